//! The ideal two-qubit entangling gate: evolution of the exchange-coupled
//! Hamiltonian at the magic parameter point, and its place in the Clifford
//! group.

use crossbar_rb::clifford::{canonicalize, CliffordTable};
use crossbar_rb::rb::GateModel;
use crossbar_rb::spin_model::{ideal_gate, NoiseCoefficients};

fn main() {
    let u = ideal_gate(5); // omega = 20 J
    println!("U = exp(-iHt) at t = pi/J, delta_omega = sqrt(15) J, omega = 20 J:");
    for row in 0..4 {
        let cells: Vec<String> = (0..4)
            .map(|col| format!("{:+.4}{:+.4}i", u[(row, col)].re, u[(row, col)].im))
            .collect();
        println!("  [{}]", cells.join(", "));
    }
    println!("(equal to e^(-i pi/4) * diag(1, i, i, 1))");

    let table = CliffordTable::generate().unwrap();
    let canonical = canonicalize(&u).unwrap();
    match table.lookup(&canonical) {
        Some(index) => println!("phase-canonical form is Clifford element #{index}"),
        None => println!("gate not found in the Clifford table (unexpected)"),
    }

    // A perturbed implementation and its error channel.
    let coeffs = NoiseCoefficients::correlated_central(0.05, 1.0).unwrap();
    let noisy = GateModel::default().noisy_gate(&coeffs).unwrap();
    let f_avg = noisy.error.average_fidelity();
    let p = noisy.error.depolarization_parameter().value;
    println!("\nwith correlated current noise kappa = 0.05 on both qubits:");
    println!("  average gate fidelity  F_avg = {f_avg:.8}");
    println!("  depolarization value   p     = {p:.8}");
    println!("  average error rate     1 - F = {:.3e}", 1.0 - f_avg);
}
