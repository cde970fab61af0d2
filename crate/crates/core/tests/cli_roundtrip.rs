//! End-to-end checks of the command-line artifact contract: sidecar
//! round-trips, config-file precedence, and exit codes.

use std::path::Path;
use std::sync::OnceLock;

use crossbar_rb::cli::run_from;
use crossbar_rb::clifford::{CliffordTable, TABLE_FORMAT_VERSION};

fn table() -> &'static CliffordTable {
    static TABLE: OnceLock<CliffordTable> = OnceLock::new();
    TABLE.get_or_init(|| CliffordTable::generate().expect("table generation"))
}

fn seed_cache(dir: &Path) {
    let cache = dir.join("cache");
    std::fs::create_dir_all(&cache).unwrap();
    table()
        .save(&cache.join(format!("clifford_table_v{TABLE_FORMAT_VERSION}.bin")))
        .unwrap();
}

fn run(args: &[&str]) -> i32 {
    run_from(args.iter().map(|s| s.to_string()))
}

#[test]
fn sidecar_reruns_reproduce_artifacts() {
    let first = tempfile::tempdir().unwrap();
    seed_cache(first.path());
    let out = first.path().to_str().unwrap().to_string();
    let code = run(&[
        "crossbar-rb",
        "mirb",
        "--scenario",
        "anticorrelated",
        "--kappa",
        "0.09",
        "--m-max",
        "18",
        "--m-count",
        "5",
        "--n-avg",
        "40",
        "--seed",
        "777",
        "--out",
        &out,
    ]);
    assert_eq!(code, 0);
    let sidecar = first.path().join("mirb.config.json");
    assert!(sidecar.exists());

    // Re-run purely from the sidecar into a fresh directory.
    let second = tempfile::tempdir().unwrap();
    seed_cache(second.path());
    let out2 = second.path().to_str().unwrap().to_string();
    let code = run(&[
        "crossbar-rb",
        "mirb",
        "--config",
        sidecar.to_str().unwrap(),
        "--out",
        &out2,
    ]);
    assert_eq!(code, 0);

    for name in [
        "mirb_reference_decay.csv",
        "mirb_interleaved_decay.csv",
        "mirb_reference_fit.json",
        "mirb_interleaved_fit.json",
        "mirb_estimate.json",
        "mirb.config.json",
    ] {
        let a = std::fs::read(first.path().join(name)).unwrap();
        let b = std::fs::read(second.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between original and sidecar re-run");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    seed_cache(dir.path());
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, "seed = 5\nkappa = 0.02\nscenario = correlated\n").unwrap();
    let out = dir.path().to_str().unwrap().to_string();
    let code = run(&[
        "crossbar-rb",
        "irb",
        "--config",
        cfg_path.to_str().unwrap(),
        "--seed",
        "9",
        "--fast",
        "--m-max",
        "10",
        "--m-count",
        "4",
        "--n-avg",
        "4",
        "--out",
        &out,
    ]);
    assert_eq!(code, 0);
    let sidecar: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("irb.config.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(sidecar["seed"], "9");
    assert_eq!(sidecar["kappa"], "0.02");
    assert_eq!(sidecar["fast"], "true");
}

#[test]
fn sweep_emits_matrix_and_cuts() {
    let dir = tempfile::tempdir().unwrap();
    seed_cache(dir.path());
    let out = dir.path().to_str().unwrap().to_string();
    let code = run(&[
        "crossbar-rb",
        "sweep",
        "--protocol-kind",
        "mirb",
        "--kappa-max",
        "0.1",
        "--kappa-steps",
        "5",
        "--m-max",
        "10",
        "--m-count",
        "4",
        "--out",
        &out,
    ]);
    assert_eq!(code, 0);
    let matrix = std::fs::read_to_string(dir.path().join("sweep_matrix.csv")).unwrap();
    assert!(matrix.starts_with("kappa1,kappa2,r_est,r_std_err,error\n"));
    // 5x5 grid plus the header line.
    assert_eq!(matrix.lines().count(), 26);
    let cuts = std::fs::read_to_string(dir.path().join("sweep_cuts.csv")).unwrap();
    assert!(cuts.starts_with(
        "kappa,r_correlated,r_correlated_std_err,r_anticorrelated,r_anticorrelated_std_err\n"
    ));
    // Non-negative half of the axis: 0, 0.05, 0.1.
    assert_eq!(cuts.lines().count(), 4);
    // Default sweep mode is the exact prediction: the modified protocol
    // separates the two noise types at every nonzero amplitude.
    for line in cuts.lines().skip(2) {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!(cols[1] < cols[3], "correlated should decay slower: {line}");
    }
}

#[test]
fn sweep_sidecar_restores_protocol_kind() {
    let first = tempfile::tempdir().unwrap();
    seed_cache(first.path());
    let out = first.path().to_str().unwrap().to_string();
    let code = run(&[
        "crossbar-rb",
        "sweep",
        "--protocol-kind",
        "mirb",
        "--kappa-steps",
        "3",
        "--m-max",
        "8",
        "--m-count",
        "3",
        "--out",
        &out,
    ]);
    assert_eq!(code, 0);
    let sidecar = first.path().join("sweep.config.json");

    let second = tempfile::tempdir().unwrap();
    seed_cache(second.path());
    let out2 = second.path().to_str().unwrap().to_string();
    let code = run(&[
        "crossbar-rb",
        "sweep",
        "--config",
        sidecar.to_str().unwrap(),
        "--out",
        &out2,
    ]);
    assert_eq!(code, 0);
    for name in ["sweep_matrix.csv", "sweep_cuts.csv", "sweep.config.json"] {
        assert_eq!(
            std::fs::read(first.path().join(name)).unwrap(),
            std::fs::read(second.path().join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn montecarlo_sweep_records_failures_gracefully() {
    // A clean sweep has an empty error column.
    let dir = tempfile::tempdir().unwrap();
    seed_cache(dir.path());
    let out = dir.path().to_str().unwrap().to_string();
    let code = run(&[
        "crossbar-rb",
        "sweep",
        "--kappa-max",
        "0.05",
        "--kappa-steps",
        "3",
        "--m-max",
        "8",
        "--m-count",
        "3",
        "--n-avg",
        "10",
        "--montecarlo",
        "--out",
        &out,
    ]);
    assert_eq!(code, 0);
    let matrix = std::fs::read_to_string(dir.path().join("sweep_matrix.csv")).unwrap();
    for line in matrix.lines().skip(1) {
        assert!(line.ends_with(','), "unexpected error entry: {line}");
    }
}

#[test]
fn bad_subcommand_flag_is_config_error() {
    let code = run(&["crossbar-rb", "sweep", "--protocol-kind", "warp"]);
    assert_eq!(code, 2);
    let code = run(&["crossbar-rb", "mirb", "--projector", "q7"]);
    assert_eq!(code, 2);
}
