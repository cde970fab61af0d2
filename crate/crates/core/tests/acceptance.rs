//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them).
//!
//! Statistical criteria use the documented default master seed (2024) and
//! fixed parameters, so every outcome here is reproducible bit for bit.

use std::sync::OnceLock;
use std::time::Instant;

use crossbar_rb::channels::QuantumChannel;
use crossbar_rb::clifford::{canonicalize, CliffordTable, GROUP_ORDER};
use crossbar_rb::field_profile::{
    closed_form_operation_point, total_field, OperationPoint, WireArrayConfig,
};
use crossbar_rb::linalg::{cr, max_abs_diff, projector, Mat4, Vec4, C64};
use crossbar_rb::rb::{
    estimate_error_rate_from_fits, fit_decay, geometric_m_grid, predict_exact, run_protocol,
    sweep_diagonals, DecayCurve, GateModel, ProtocolConfig, ProtocolKind, SweepConfig,
};
use crossbar_rb::spin_model::{
    build_perturbation, dark_states, ideal_gate, triplet_t0, NoiseCoefficients,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

const SEED: u64 = 2024;

fn table() -> &'static CliffordTable {
    static TABLE: OnceLock<CliffordTable> = OnceLock::new();
    TABLE.get_or_init(|| CliffordTable::generate().expect("table generation"))
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "[acceptance] {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

#[test]
fn criterion_01_clifford_group_closure() {
    let start = Instant::now();
    let t = CliffordTable::generate().expect("generation succeeds");
    let generation = start.elapsed();

    let mut rng = ChaCha12Rng::seed_from_u64(SEED);
    let mut closed = true;
    for _ in 0..10_000 {
        let a = t.sample_uniform(&mut rng);
        let b = t.sample_uniform(&mut rng);
        let prod = canonicalize(&(t.element(a).matrix() * t.element(b).matrix())).unwrap();
        if !t.contains(&prod) {
            closed = false;
            break;
        }
        let inv = canonicalize(&t.element(a).matrix().adjoint()).unwrap();
        if !t.contains(&inv) {
            closed = false;
            break;
        }
    }
    let elapsed = start.elapsed();
    let pass = t.len() == GROUP_ORDER && closed && elapsed.as_secs() < 60;
    report(
        "criterion 1 (Clifford closure)",
        pass,
        &format!(
            "{} elements, 10^4 product/inverse pairs closed = {closed}, generated in {generation:?}, total {elapsed:?}",
            t.len()
        ),
    );
    assert_eq!(t.len(), GROUP_ORDER);
    assert!(closed);
    assert!(elapsed.as_secs() < 60, "closure check took {elapsed:?}");
}

#[test]
fn criterion_02_field_closed_forms() {
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    for &ratio in &[0.25, 0.5, 1.0] {
        let cfg = WireArrayConfig::with_depth_ratio(ratio).unwrap();
        for (x, kind, component) in [
            (1.0, OperationPoint::BetweenWires, "z"),
            (0.0, OperationPoint::BelowWire, "x"),
        ] {
            let closed = closed_form_operation_point(0, kind, &cfg);
            let reference = if component == "z" { closed.bz } else { closed.bx };
            let mut prev = f64::INFINITY;
            for &n in &[100usize, 1000, 10_000] {
                let f = total_field(x, &cfg, n).unwrap();
                let value = if component == "z" { f.bz } else { f.bx };
                let err = (value - reference).abs() / reference.abs();
                if err >= prev {
                    monotone = false;
                }
                prev = err;
            }
            worst = worst.max(prev);
        }
    }
    let pass = monotone && worst < 1e-3;
    report(
        "criterion 2 (field closed forms)",
        pass,
        &format!("relative error at N = 10^4 is {worst:.2e}, strict decay across decades = {monotone}"),
    );
    assert!(monotone);
    assert!(worst < 1e-3);
}

#[test]
fn criterion_03_dark_state_annihilation() {
    let ds = dark_states();
    let mut worst: f64 = 0.0;
    let sym = build_perturbation(&NoiseCoefficients::correlated_central(0.37, 1.0).unwrap());
    for state in ds.symmetric() {
        worst = worst.max((sym * *state).norm());
    }
    let anti = build_perturbation(&NoiseCoefficients::anticorrelated(0.52, 1.0).unwrap());
    for state in ds.antisymmetric() {
        worst = worst.max((anti * *state).norm());
    }
    for &ratio in &[0.3, 0.7] {
        let a = build_perturbation(&NoiseCoefficients::anticorrelated(0.52, ratio).unwrap());
        worst = worst.max((a * ds.d1_anti).norm());
    }
    let pass = worst < 1e-12;
    report(
        "criterion 3 (dark-state annihilation)",
        pass,
        &format!("largest residual norm {worst:.2e}"),
    );
    assert!(worst < 1e-12);
}

#[test]
fn criterion_04_ideal_gate() {
    let u = ideal_gate(5);
    let phase = C64::new(0.0, -std::f64::consts::FRAC_PI_4).exp();
    let i = C64::new(0.0, 1.0);
    let expected = Mat4::from_diagonal(&Vec4::new(cr(1.0), i, i, cr(1.0))) * phase;
    let defect = max_abs_diff(&u, &expected);
    let canonical = canonicalize(&u).unwrap();
    let in_table = table().contains(&canonical);
    let pass = defect < 1e-10 && in_table;
    report(
        "criterion 4 (ideal gate)",
        pass,
        &format!("max-norm deviation {defect:.2e}, canonical form in table = {in_table}"),
    );
    assert!(defect < 1e-10);
    assert!(in_table);
}

#[test]
fn criterion_05_two_design_twirl() {
    let t = table();
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(SEED);
    let mut worst_offdiag: f64 = 0.0;
    let mut worst_p: f64 = 0.0;
    for trial in 0..20 {
        let ch = QuantumChannel::random_cptp(&mut rng, 1 + trial % 4);
        let analytic = ch.depolarization_parameter().value;
        let twirled = ch.twirl(t);
        let ptm = twirled.pauli_transfer_matrix();
        for a in 0..16 {
            for b in 0..16 {
                let expected = match (a, b) {
                    (0, 0) => 1.0,
                    (x, y) if x == y => analytic,
                    _ => 0.0,
                };
                worst_offdiag = worst_offdiag.max((ptm[(a, b)] - expected).abs());
            }
        }
        worst_p = worst_p.max((twirled.depolarization_parameter().value - analytic).abs());
    }
    let elapsed = start.elapsed();
    let pass = worst_offdiag < 1e-9 && worst_p < 1e-9 && elapsed.as_secs() < 30;
    report(
        "criterion 5 (2-design twirl)",
        pass,
        &format!(
            "20 random channels: PTM deviation {worst_offdiag:.2e}, parameter deviation {worst_p:.2e}, {elapsed:?}"
        ),
    );
    assert!(worst_offdiag < 1e-9);
    assert!(worst_p < 1e-9);
    assert!(elapsed.as_secs() < 30, "twirls took {elapsed:?}");
}

#[test]
fn criterion_06_measurement_channel_depolarization() {
    let ch = QuantumChannel::measurement_channel(&projector(&triplet_t0())).unwrap();
    let analytic = ch.depolarization_parameter().value;
    let twirled = ch.twirl(table()).depolarization_parameter().value;
    let pass = (analytic - 0.6).abs() < 1e-12 && (twirled - 0.6).abs() < 1e-12;
    report(
        "criterion 6 (pinching depolarization)",
        pass,
        &format!("trace formula p = {analytic}, explicit twirl p = {twirled}"),
    );
    assert!((analytic - 0.6).abs() < 1e-12);
    assert!((twirled - 0.6).abs() < 1e-12);
}

#[test]
fn criterion_07_irb_estimator_consistency() {
    let start = Instant::now();
    let coeffs = NoiseCoefficients::correlated_central(0.05, 1.0).unwrap();
    let gate = GateModel::default().noisy_gate(&coeffs).unwrap();
    let exact_rate = 1.0 - gate.error.average_fidelity();

    let mut cfg = ProtocolConfig::new(ProtocolKind::Irb, geometric_m_grid(200, 12), 1000, SEED);
    cfg.interleaved = Some(gate);
    let reference = cfg.reference();
    let ref_fit = fit_decay(&run_protocol(&reference, table()).unwrap()).unwrap();
    let int_fit = fit_decay(&run_protocol(&cfg, table()).unwrap()).unwrap();
    let estimate = estimate_error_rate_from_fits(&ref_fit, &int_fit).unwrap();
    let elapsed = start.elapsed();

    let tolerance = (0.1 * estimate.r).max(5e-4);
    let deviation = (estimate.r - exact_rate).abs();
    let pass = deviation <= tolerance && elapsed.as_secs() < 300;
    report(
        "criterion 7 (IRB estimator consistency)",
        pass,
        &format!(
            "r = {:.4e} ± {:.1e} vs exact {exact_rate:.4e}; |Δ| = {deviation:.2e} ≤ {tolerance:.2e}, {elapsed:?}",
            estimate.r, estimate.r_std_err
        ),
    );
    assert!(ref_fit.degenerate, "noiseless reference must be degenerate");
    assert!(deviation <= tolerance);
    assert!(elapsed.as_secs() < 300, "pipeline took {elapsed:?}");
}

/// Measured to be unattainable as stated: the exact error rates of the two
/// diagonals differ by ~6.2% relative (a property of the perturbation model
/// confirmed by two independent implementations), which at κ = 0.10 is
/// 5.7e-4 — beyond the ~4.3e-4 two-sigma resolution that N_avg = 10³ fits
/// deliver. The test states the intended property faithfully and is expected
/// to fail at the largest amplitude.
#[test]
fn criterion_08_standard_irb_diagonal_overlap() {
    let base = ProtocolConfig::new(ProtocolKind::Irb, geometric_m_grid(200, 12), 1000, SEED);
    let sweep = SweepConfig {
        kappa1: vec![0.02, 0.04, 0.06, 0.08, 0.10],
        kappa2: vec![],
        gate: GateModel::default(),
        base,
        fast: false,
    };
    let cuts = sweep_diagonals(&sweep, table()).unwrap();
    let mut max_ratio: f64 = 0.0;
    let mut detail = String::new();
    for i in 0..cuts.kappa.len() {
        let diff = (cuts.correlated_r[i] - cuts.anticorrelated_r[i]).abs();
        let sigma = (cuts.correlated_se[i].powi(2) + cuts.anticorrelated_se[i].powi(2)).sqrt();
        let ratio = diff / sigma;
        max_ratio = max_ratio.max(ratio);
        detail.push_str(&format!("κ={}: {:.2}σ; ", cuts.kappa[i], ratio));
    }
    let pass = max_ratio <= 2.0;
    report(
        "criterion 8 (standard-IRB diagonal overlap)",
        pass,
        &format!("{detail}worst {max_ratio:.2}σ (must be ≤ 2σ at every amplitude)"),
    );
    assert!(
        max_ratio <= 2.0,
        "diagonal cuts distinguishable at {max_ratio:.2}σ; the exact rates differ by ~6% relative, \
         which N_avg = 10³ statistics resolve at the largest amplitudes"
    );
}

/// The deterministic half of this criterion holds everywhere; the 2σ
/// Monte-Carlo separation at N_avg = 10³, m ≤ 30 is measured to be
/// unattainable (the exact separation of ~1.7e-3..4.8e-3 over κ = 0.06..0.10
/// sits well below the ~1.1e-2 two-sigma resolution of the modified-protocol
/// fits). The Monte-Carlo clause is asserted as stated and is expected to
/// fail.
#[test]
fn criterion_09_modified_irb_separation() {
    // Deterministic part: exact depolarization ordering over (0, 0.2].
    let pinch = QuantumChannel::measurement_channel(&projector(&triplet_t0())).unwrap();
    let mut exact_ordered = true;
    for i in 1..=40 {
        let kappa = i as f64 * 0.005;
        let p_of = |coeffs: &NoiseCoefficients| {
            let mut cfg =
                ProtocolConfig::new(ProtocolKind::ModifiedIrb, vec![1, 2, 3], 1, SEED);
            cfg.measurement_channel = Some(pinch.clone());
            cfg.interleaved = Some(GateModel::default().noisy_gate(coeffs).unwrap());
            predict_exact(&cfg).unwrap().p
        };
        let p_corr = p_of(&NoiseCoefficients::correlated_central(kappa, 1.0).unwrap());
        let p_anti = p_of(&NoiseCoefficients::anticorrelated(kappa, 1.0).unwrap());
        if p_corr <= p_anti {
            exact_ordered = false;
        }
    }

    // Monte-Carlo part at the stated statistics.
    let mut base = ProtocolConfig::new(ProtocolKind::ModifiedIrb, geometric_m_grid(30, 12), 1000, SEED);
    base.measurement_channel = Some(pinch);
    let sweep = SweepConfig {
        kappa1: vec![0.02, 0.04, 0.06, 0.08, 0.10],
        kappa2: vec![],
        gate: GateModel::default(),
        base,
        fast: false,
    };
    let cuts = sweep_diagonals(&sweep, table()).unwrap();
    let mut mc_separated = true;
    let mut detail = String::new();
    for i in 0..cuts.kappa.len() {
        if cuts.kappa[i] < 0.06 {
            continue;
        }
        let diff = cuts.anticorrelated_r[i] - cuts.correlated_r[i];
        let sigma = (cuts.correlated_se[i].powi(2) + cuts.anticorrelated_se[i].powi(2)).sqrt();
        detail.push_str(&format!("κ={}: {:+.2}σ; ", cuts.kappa[i], diff / sigma));
        if diff.is_nan() || diff <= 2.0 * sigma {
            mc_separated = false;
        }
    }
    let pass = exact_ordered && mc_separated;
    report(
        "criterion 9 (modified-IRB separation)",
        pass,
        &format!(
            "exact ordering p̃c(corr) > p̃c(anti) on (0, 0.2] = {exact_ordered}; Monte-Carlo {detail}(needs > +2σ)"
        ),
    );
    assert!(exact_ordered, "exact depolarization ordering violated");
    assert!(
        mc_separated,
        "Monte-Carlo separation below 2σ; the exact separation is smaller than the \
         modified-protocol fit resolution at N_avg = 10³, m ≤ 30"
    );
}

#[test]
fn criterion_10_worker_count_determinism() {
    let run = |workers: &str, dir: &std::path::Path| {
        let out = dir.to_str().unwrap();
        let code = crossbar_rb::cli::run_from([
            "crossbar-rb",
            "irb",
            "--scenario",
            "correlated",
            "--kappa",
            "0.08",
            "--m-max",
            "20",
            "--m-count",
            "6",
            "--n-avg",
            "60",
            "--seed",
            "2024",
            "--workers",
            workers,
            "--out",
            out,
        ]);
        assert_eq!(code, 0, "cli run failed");
        (
            std::fs::read(dir.join("irb_interleaved_decay.csv")).unwrap(),
            std::fs::read(dir.join("irb_reference_decay.csv")).unwrap(),
        )
    };
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    // Share the cached table between the two runs.
    std::fs::create_dir_all(dir_a.path().join("cache")).unwrap();
    table()
        .save(&dir_a.path().join("cache").join(format!(
            "clifford_table_v{}.bin",
            crossbar_rb::clifford::TABLE_FORMAT_VERSION
        )))
        .unwrap();
    std::fs::create_dir_all(dir_b.path().join("cache")).unwrap();
    table()
        .save(&dir_b.path().join("cache").join(format!(
            "clifford_table_v{}.bin",
            crossbar_rb::clifford::TABLE_FORMAT_VERSION
        )))
        .unwrap();
    let (int_a, ref_a) = run("1", dir_a.path());
    let (int_b, ref_b) = run("4", dir_b.path());
    let pass = int_a == int_b && ref_a == ref_b;
    report(
        "criterion 10 (worker-count determinism)",
        pass,
        &format!(
            "interleaved CSV identical = {}, reference CSV identical = {}",
            int_a == int_b,
            ref_a == ref_b
        ),
    );
    assert_eq!(int_a, int_b);
    assert_eq!(ref_a, ref_b);
}

#[test]
fn criterion_11_fit_robustness() {
    // Noiseless round trip.
    let ms = geometric_m_grid(200, 12);
    let clean = DecayCurve {
        m_values: ms.clone(),
        mean_fidelity: ms
            .iter()
            .map(|&m| 0.75 * 0.9f64.powi(m as i32) + 0.25)
            .collect(),
        std_err: vec![0.0; ms.len()],
        counts: vec![1; ms.len()],
    };
    let fit = fit_decay(&clean).unwrap();
    let clean_dev = (fit.a - 0.75)
        .abs()
        .max((fit.b - 0.25).abs())
        .max((fit.p - 0.9).abs());

    // Noisy coverage study: 200 independent synthetic curves.
    let sigma = 0.005;
    let mut rng = ChaCha12Rng::seed_from_u64(SEED);
    let mut hits = 0usize;
    let trials = 200usize;
    for _ in 0..trials {
        let noisy = DecayCurve {
            m_values: ms.clone(),
            mean_fidelity: ms
                .iter()
                .map(|&m| {
                    let mean = 0.72 * 0.93f64.powi(m as i32) + 0.25;
                    // Box-Muller from two uniform draws.
                    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
                    let u2: f64 = rng.random_range(0.0..1.0);
                    mean + sigma
                        * (-2.0 * u1.ln()).sqrt()
                        * (2.0 * std::f64::consts::PI * u2).cos()
                })
                .collect(),
            std_err: vec![sigma; ms.len()],
            counts: vec![1000; ms.len()],
        };
        let f = fit_decay(&noisy).unwrap();
        if f.converged && (f.p - 0.93).abs() <= 3.0 * f.p_std_err {
            hits += 1;
        }
    }
    let pass = clean_dev < 1e-6 && hits * 100 >= trials * 95;
    report(
        "criterion 11 (fit robustness)",
        pass,
        &format!("noiseless deviation {clean_dev:.2e}, noisy 3σ coverage {hits}/{trials}"),
    );
    assert!(clean_dev < 1e-6);
    assert!(hits * 100 >= trials * 95, "coverage {hits}/{trials}");
}

