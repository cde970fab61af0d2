//! Dark states of the correlated and anti-correlated noise perturbations:
//! which states each perturbation annihilates, and how that depends on the
//! wire geometry.

use crossbar_rb::spin_model::{build_perturbation, dark_states, NoiseCoefficients};

fn main() {
    let ds = dark_states();
    let states = [
        ("|D1>_S = (|uu> - |dd>)/sqrt(2)", ds.d1_sym),
        ("|D2>_S = (|uu> - |ud> + |du> + |dd>)/2", ds.d2_sym),
        ("|D1>_A = (|ud> + |du>)/sqrt(2) = |T0>", ds.d1_anti),
        ("|D2>_A = (|uu> + |ud> - |du> + |dd>)/2", ds.d2_anti),
    ];

    for ratio in [1.0, 0.5] {
        let corr = build_perturbation(&NoiseCoefficients::correlated_central(0.3, ratio).unwrap());
        let anti = build_perturbation(&NoiseCoefficients::anticorrelated(0.3, ratio).unwrap());
        println!("z0/L = {ratio}:");
        println!("  {:44}  ||dH_S v||    ||dH_A v||", "state");
        for (label, state) in &states {
            println!(
                "  {label:44}  {:.3e}    {:.3e}",
                (corr * *state).norm(),
                (anti * *state).norm()
            );
        }
        println!();
    }
    println!("|D1>_S and |D1>_A stay dark at any geometry; the second state of");
    println!("each family needs the transverse and longitudinal couplings to");
    println!("coincide, which happens exactly at z0 = L.");
}
