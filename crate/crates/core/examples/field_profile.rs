//! Magnetic field of the alternating-current wire array: lattice sum vs the
//! closed forms at the operation points vs the calibrated two-wire
//! approximation.

use crossbar_rb::field_profile::{
    calibrated_two_wire_field, calibration_coefficient, closed_form_operation_point, total_field,
    OperationPoint, WireArrayConfig,
};

fn main() {
    let cfg = WireArrayConfig::with_depth_ratio(1.0).unwrap();
    println!("wire array with z0 = L, fields in units of B0 = mu_eff*I/(2*pi*z0)");
    println!("zeta = {:.6}", cfg.zeta());

    let mid = closed_form_operation_point(0, OperationPoint::BetweenWires, &cfg);
    let below = closed_form_operation_point(0, OperationPoint::BelowWire, &cfg);
    println!("closed form at x = L (mid-gap):     Bz = {:+.6}", mid.bz);
    println!("closed form at x = 0 (below wire):  Bx = {:+.6}", below.bx);
    println!(
        "two-wire calibration coefficient lambda_0 = {:.6}",
        calibration_coefficient(0, &cfg)
    );

    println!("\n x/L      sum(N=100)          sum(N=10^4)         two-wire");
    for i in 0..=8 {
        let x = 0.2 + 1.6 * i as f64 / 8.0;
        let coarse = total_field(x, &cfg, 100).unwrap();
        let fine = total_field(x, &cfg, 10_000).unwrap();
        let tw = calibrated_two_wire_field(x, 0, &cfg)
            .map(|f| format!("({:+.4}, {:+.4})", f.bx, f.bz))
            .unwrap_or_else(|_| "outside validity".into());
        println!(
            "{x:5.2}  ({:+.4}, {:+.4})  ({:+.4}, {:+.4})  {tw}",
            coarse.bx, coarse.bz, fine.bx, fine.bz
        );
    }

    println!("\nconvergence of the truncated sum toward zeta*sech(zeta) at x = L:");
    let exact = mid.bz;
    for n in [10usize, 100, 1000, 10_000] {
        let f = total_field(1.0, &cfg, n).unwrap();
        println!(
            "  N = {n:>6}: Bz = {:.8}  relative error {:.2e}",
            f.bz,
            (f.bz - exact).abs() / exact
        );
    }
}
