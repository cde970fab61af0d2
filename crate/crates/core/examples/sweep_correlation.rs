//! Error-rate maps over the (kappa1, kappa2) noise-amplitude plane for both
//! pipelines, in the fast analytic mode.

use crossbar_rb::channels::QuantumChannel;
use crossbar_rb::clifford::CliffordTable;
use crossbar_rb::linalg::projector;
use crossbar_rb::rb::{
    geometric_m_grid, sweep_grid, GateModel, ProtocolConfig, ProtocolKind, SweepConfig,
};
use crossbar_rb::spin_model::triplet_t0;

fn print_map(label: &str, result: &crossbar_rb::rb::SweepResult) {
    println!("{label} (r x 10^3):");
    print!("  k1\\k2 ");
    for k2 in &result.kappa2 {
        print!("{k2:>7.2}");
    }
    println!();
    for (i1, k1) in result.kappa1.iter().enumerate() {
        print!("{k1:>7.2} ");
        for i2 in 0..result.kappa2.len() {
            let (r, _) = result.at(i1, i2);
            print!("{:>7.2}", r * 1e3);
        }
        println!();
    }
    println!();
}

fn main() {
    let table = CliffordTable::generate().unwrap();
    let axis: Vec<f64> = (-4..=4).map(|i| i as f64 * 0.025).collect();
    let gate = GateModel::default();
    let grid = geometric_m_grid(30, 12);

    let standard = SweepConfig {
        kappa1: axis.clone(),
        kappa2: axis.clone(),
        gate,
        base: ProtocolConfig::new(ProtocolKind::Irb, grid.clone(), 1000, 2024),
        fast: true,
    };
    print_map("standard IRB", &sweep_grid(&standard, &table).unwrap());

    let mut base = ProtocolConfig::new(ProtocolKind::ModifiedIrb, grid, 1000, 2024);
    base.measurement_channel = Some(
        QuantumChannel::measurement_channel(&projector(&triplet_t0())).unwrap(),
    );
    let modified = SweepConfig {
        kappa1: axis.clone(),
        kappa2: axis,
        gate,
        base,
        fast: true,
    };
    print_map("modified IRB with P = |T0><T0|", &sweep_grid(&modified, &table).unwrap());

    println!("the standard map is nearly rotation symmetric in (k1, k2); the");
    println!("modified map is squeezed along the correlated diagonal k1 = k2.");
}
