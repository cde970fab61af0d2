//! Command-line front end.
//!
//! `crossbar-rb <subcommand>` runs one experiment and writes its artifacts
//! (CSV data plus a JSON sidecar with the full effective configuration) into
//! the output directory. Re-running any subcommand with the sidecar passed
//! back through `--config` reproduces the artifacts byte for byte;
//! `--workers` changes the parallel width without affecting any output.
//!
//! Exit codes: 0 on success, 2 on configuration or i/o errors, 3 when a fit
//! did not converge (artifacts are still written, flagged in the JSON).

pub mod config;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::channels::QuantumChannel;
use crate::clifford::{CliffordTable, TABLE_FORMAT_VERSION};
use crate::field_profile::{
    calibrated_two_wire_field, closed_form_operation_point, operation_point_x, total_field,
    OperationPoint, WireArrayConfig,
};
use crate::linalg::projector;
use crate::rb::{
    fit_decay, geometric_m_grid, predict_exact, run_protocol, sweep_diagonals, sweep_grid,
    DecayCurve, DecayFit, GateModel, InterleavedGate, ProtocolConfig, ProtocolKind, SweepConfig,
};
use crate::spin_model::{dark_states, triplet_t0, up_up, NoiseCoefficients};
use config::{ProjectorKey, RunConfig, ScenarioKey, StateKey, SweepProtocolKey};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_QUALITY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "crossbar-rb",
    about = "Randomized-benchmarking simulator for correlated magnetic noise on a two-qubit spin gate",
    version
)]
struct Cli {
    /// Flat key=value config file or a JSON sidecar from a previous run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for all random streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Parallel worker count (0 = automatic); never affects results.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory (for `clifford --generate`: the table path).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Analytic prediction instead of Monte-Carlo sampling.
    #[arg(long, global = true)]
    fast: bool,
    /// Force Monte-Carlo sampling.
    #[arg(long, global = true, conflicts_with = "fast")]
    montecarlo: bool,
    /// Directory for the cached Clifford table.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct ProtocolArgs {
    /// Noise scenario: none, correlated, anticorrelated, independent,
    /// position_shift.
    #[arg(long)]
    scenario: Option<String>,
    /// Dimensionless noise amplitude κ (κ₀ for position_shift).
    #[arg(long)]
    kappa: Option<f64>,
    /// Per-wire amplitude κ₁ for the independent scenario.
    #[arg(long)]
    kappa1: Option<f64>,
    /// Per-wire amplitude κ₂ for the independent scenario.
    #[arg(long)]
    kappa2: Option<f64>,
    /// Displacement δx/L for the position-shift scenario.
    #[arg(long)]
    dx_over_l: Option<f64>,
    /// Remove the static δx = 0 offset of the position-shift coefficients.
    #[arg(long)]
    subtract_baseline: bool,
    /// Largest sequence length.
    #[arg(long)]
    m_max: Option<usize>,
    /// Number of sequence lengths in the grid.
    #[arg(long)]
    m_count: Option<usize>,
    /// Random sequences per length.
    #[arg(long)]
    n_avg: Option<usize>,
    /// Wire depth over half-spacing.
    #[arg(long)]
    z0_over_l: Option<f64>,
    /// Zeeman index k of the gate (ω = 4kJ).
    #[arg(long)]
    gate_k: Option<u32>,
    /// Initial state: uu or t0.
    #[arg(long)]
    initial_state: Option<String>,
    /// Depolarization parameter of the random-Clifford noise channel Λ.
    #[arg(long)]
    lambda_depolarizing: Option<f64>,
    /// Shortcut for a noise-free run (scenario none).
    #[arg(long)]
    noiseless: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Magnetic-field profile of the wire array as CSV.
    Field {
        #[arg(long)]
        z0_over_l: Option<f64>,
        /// Lattice-sum truncation.
        #[arg(long)]
        cutoff: Option<usize>,
        #[arg(long)]
        x_min_over_l: Option<f64>,
        #[arg(long)]
        x_max_over_l: Option<f64>,
        #[arg(long)]
        x_steps: Option<usize>,
    },
    /// Generate or verify the two-qubit Clifford table.
    Clifford {
        /// Generate the table and write it to --out.
        #[arg(long)]
        generate: bool,
        /// Load a table file and run structural checks on it.
        #[arg(long)]
        verify: Option<PathBuf>,
    },
    /// Standard randomized benchmarking of the random-Clifford noise.
    Rb {
        #[command(flatten)]
        protocol: ProtocolArgs,
    },
    /// Interleaved benchmarking of the two-qubit gate of interest.
    Irb {
        #[command(flatten)]
        protocol: ProtocolArgs,
    },
    /// Measurement-modified interleaved benchmarking.
    Mirb {
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// Measurement projector: t0, d1s, d2s, d1a, d2a.
        #[arg(long)]
        projector: Option<String>,
    },
    /// Error-rate map over the (κ₁, κ₂) grid plus its diagonal cuts.
    Sweep {
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// Which pipeline to sweep: irb or mirb.
        #[arg(long)]
        protocol_kind: Option<String>,
        #[arg(long)]
        kappa_max: Option<f64>,
        #[arg(long)]
        kappa_steps: Option<usize>,
        /// Projector for the mirb pipeline.
        #[arg(long)]
        projector: Option<String>,
    },
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Quality(String),
}

impl CliError {
    fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(m) | Self::Quality(m) => f.write_str(m),
        }
    }
}

impl From<crate::rb::RbError> for CliError {
    fn from(e: crate::rb::RbError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<crate::field_profile::FieldError> for CliError {
    fn from(e: crate::field_profile::FieldError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<crate::clifford::CliffordError> for CliError {
    fn from(e: crate::clifford::CliffordError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<crate::channels::ChannelError> for CliError {
    fn from(e: crate::channels::ChannelError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<crate::spin_model::SpinModelError> for CliError {
    fn from(e: crate::spin_model::SpinModelError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Config(format!("i/o error: {e}"))
    }
}

/// Entry point used by the binary and by tests. Returns the process exit
/// code instead of exiting.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            EXIT_CONFIG
        }
        Err(CliError::Quality(msg)) => {
            eprintln!("warning: {msg}");
            EXIT_QUALITY
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(CliError::Config)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = cli.workers {
        cfg.workers = workers;
    }
    if cli.fast {
        cfg.fast = Some(true);
    }
    if cli.montecarlo {
        cfg.fast = Some(false);
    }
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| dispatch(&cli, cfg, &out_dir))
}

fn dispatch(cli: &Cli, mut cfg: RunConfig, out_dir: &Path) -> Result<(), CliError> {
    match &cli.command {
        Command::Field {
            z0_over_l,
            cutoff,
            x_min_over_l,
            x_max_over_l,
            x_steps,
        } => {
            override_if(&mut cfg.z0_over_l, *z0_over_l);
            override_if(&mut cfg.cutoff, *cutoff);
            override_if(&mut cfg.x_min_over_l, *x_min_over_l);
            override_if(&mut cfg.x_max_over_l, *x_max_over_l);
            override_if(&mut cfg.x_steps, *x_steps);
            cmd_field(&cfg, out_dir)
        }
        Command::Clifford { generate, verify } => {
            cmd_clifford(*generate, verify.as_deref(), cli.out.as_deref())
        }
        Command::Rb { protocol } => {
            apply_protocol_args(&mut cfg, protocol)?;
            cmd_benchmark(&cfg, out_dir, cli, ProtocolKind::StandardRb, "rb")
        }
        Command::Irb { protocol } => {
            apply_protocol_args(&mut cfg, protocol)?;
            default_scenario(&mut cfg, protocol);
            cmd_benchmark(&cfg, out_dir, cli, ProtocolKind::Irb, "irb")
        }
        Command::Mirb {
            protocol,
            projector,
        } => {
            apply_protocol_args(&mut cfg, protocol)?;
            default_scenario(&mut cfg, protocol);
            if let Some(p) = projector {
                cfg.projector = ProjectorKey::parse(p).map_err(CliError::Config)?;
            }
            cmd_benchmark(&cfg, out_dir, cli, ProtocolKind::ModifiedIrb, "mirb")
        }
        Command::Sweep {
            protocol,
            protocol_kind,
            kappa_max,
            kappa_steps,
            projector,
        } => {
            apply_protocol_args(&mut cfg, protocol)?;
            override_if(&mut cfg.kappa_max, *kappa_max);
            override_if(&mut cfg.kappa_steps, *kappa_steps);
            if let Some(p) = projector {
                cfg.projector = ProjectorKey::parse(p).map_err(CliError::Config)?;
            }
            if let Some(kind) = protocol_kind {
                cfg.sweep_protocol = SweepProtocolKey::parse(kind).map_err(CliError::Config)?;
            }
            let kind = match cfg.sweep_protocol {
                SweepProtocolKey::Irb => ProtocolKind::Irb,
                SweepProtocolKey::Mirb => ProtocolKind::ModifiedIrb,
            };
            cmd_sweep(&cfg, out_dir, cli, kind)
        }
    }
}

fn override_if<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn apply_protocol_args(cfg: &mut RunConfig, args: &ProtocolArgs) -> Result<(), CliError> {
    if let Some(s) = &args.scenario {
        cfg.scenario = ScenarioKey::parse(s).map_err(CliError::Config)?;
    }
    if args.noiseless {
        cfg.scenario = ScenarioKey::None;
        cfg.lambda_depolarizing = None;
    }
    override_if(&mut cfg.kappa, args.kappa);
    override_if(&mut cfg.kappa1, args.kappa1);
    override_if(&mut cfg.kappa2, args.kappa2);
    override_if(&mut cfg.dx_over_l, args.dx_over_l);
    if args.subtract_baseline {
        cfg.subtract_baseline = true;
    }
    if args.m_max.is_some() {
        cfg.m_max = args.m_max;
    }
    override_if(&mut cfg.m_count, args.m_count);
    override_if(&mut cfg.n_avg, args.n_avg);
    override_if(&mut cfg.z0_over_l, args.z0_over_l);
    override_if(&mut cfg.gate_k, args.gate_k);
    if let Some(s) = &args.initial_state {
        cfg.initial_state = StateKey::parse(s).map_err(CliError::Config)?;
    }
    if args.lambda_depolarizing.is_some() {
        cfg.lambda_depolarizing = args.lambda_depolarizing;
    }
    Ok(())
}

/// The interleaving commands default to the correlated scenario so that a
/// bare `irb`/`mirb` run shows something nontrivial.
fn default_scenario(cfg: &mut RunConfig, args: &ProtocolArgs) {
    if args.scenario.is_none() && !args.noiseless && cfg.scenario == ScenarioKey::None {
        cfg.scenario = ScenarioKey::Correlated;
    }
}

// ---------------------------------------------------------------------------
// Artifact helpers
// ---------------------------------------------------------------------------

/// Write through a temp file in the same directory so failed runs never
/// leave partial artifacts under the final name.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn write_sidecar(path: &Path, map: &BTreeMap<String, String>) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(map)
        .map_err(|e| CliError::config(format!("cannot serialize sidecar: {e}")))?;
    write_atomic(path, json.as_bytes())
}

fn decay_csv(curve: &DecayCurve) -> String {
    let mut out = String::from("m,mean_fidelity,std_err,n\n");
    for i in 0..curve.m_values.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            curve.m_values[i], curve.mean_fidelity[i], curve.std_err[i], curve.counts[i]
        ));
    }
    out
}

/// Model-evaluated curve standing in for Monte-Carlo data in fast mode.
fn exact_curve(fit: &DecayFit, m_values: &[usize]) -> DecayCurve {
    DecayCurve {
        m_values: m_values.to_vec(),
        mean_fidelity: m_values.iter().map(|&m| fit.evaluate(m)).collect(),
        std_err: vec![0.0; m_values.len()],
        counts: vec![0; m_values.len()],
    }
}

#[derive(serde::Serialize)]
struct FitReport {
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
    p: f64,
    #[serde(rename = "A_std_err")]
    a_std_err: f64,
    #[serde(rename = "B_std_err")]
    b_std_err: f64,
    p_std_err: f64,
    residual: f64,
    converged: bool,
    degenerate: bool,
    protocol: &'static str,
    seed: u64,
}

impl FitReport {
    fn new(fit: &DecayFit, kind: ProtocolKind, seed: u64) -> Self {
        Self {
            a: fit.a,
            b: fit.b,
            p: fit.p,
            a_std_err: fit.a_std_err,
            b_std_err: fit.b_std_err,
            p_std_err: fit.p_std_err,
            residual: fit.residual,
            converged: fit.converged,
            degenerate: fit.degenerate,
            protocol: kind.name(),
            seed,
        }
    }
}

fn write_fit(path: &Path, fit: &DecayFit, kind: ProtocolKind, seed: u64) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(&FitReport::new(fit, kind, seed))
        .map_err(|e| CliError::config(format!("cannot serialize fit: {e}")))?;
    write_atomic(path, json.as_bytes())
}

// ---------------------------------------------------------------------------
// field
// ---------------------------------------------------------------------------

fn cmd_field(cfg: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    if cfg.x_steps < 2 {
        return Err(CliError::config("x_steps must be at least 2"));
    }
    if cfg.x_max_over_l.is_nan() || cfg.x_max_over_l <= cfg.x_min_over_l {
        return Err(CliError::config("x_max_over_l must exceed x_min_over_l"));
    }
    if cfg.cutoff < 1 {
        return Err(CliError::config("cutoff must be at least 1"));
    }
    let wire = WireArrayConfig::with_depth_ratio(cfg.z0_over_l)?;
    let mut csv = String::from("x_over_L,Bx_over_B0,Bz_over_B0,method\n");

    let xs: Vec<f64> = (0..cfg.x_steps)
        .map(|i| {
            cfg.x_min_over_l
                + (cfg.x_max_over_l - cfg.x_min_over_l) * i as f64 / (cfg.x_steps - 1) as f64
        })
        .collect();
    for &x in &xs {
        let f = total_field(x, &wire, cfg.cutoff)?;
        csv.push_str(&format!("{x},{},{},sum\n", f.bx, f.bz));
    }
    // Closed forms exist only at the operation points inside the range.
    let k_min = ((cfg.x_min_over_l - 1.0) / 2.0).ceil() as i32;
    let k_max = ((cfg.x_max_over_l - 1.0) / 2.0).floor() as i32;
    for k in k_min..=k_max {
        let x = operation_point_x(k, OperationPoint::BetweenWires, &wire);
        let f = closed_form_operation_point(k, OperationPoint::BetweenWires, &wire);
        csv.push_str(&format!("{x},{},{},closed\n", f.bx, f.bz));
    }
    let k_min = (cfg.x_min_over_l / 2.0).ceil() as i32;
    let k_max = (cfg.x_max_over_l / 2.0).floor() as i32;
    for k in k_min..=k_max {
        let x = operation_point_x(k, OperationPoint::BelowWire, &wire);
        let f = closed_form_operation_point(k, OperationPoint::BelowWire, &wire);
        csv.push_str(&format!("{x},{},{},closed\n", f.bx, f.bz));
    }
    for &x in &xs {
        // Nearest mid-gap point; skip x exactly between two of them.
        let k = ((x - 1.0) / 2.0).round() as i32;
        if let Ok(f) = calibrated_two_wire_field(x, k, &wire) {
            csv.push_str(&format!("{x},{},{},two_wire\n", f.bx, f.bz));
        }
    }

    write_atomic(&out_dir.join("field.csv"), csv.as_bytes())?;
    write_sidecar(
        &out_dir.join("field.config.json"),
        &cfg.to_map("field", false),
    )?;
    println!(
        "field profile written to {} ({} sample points, cutoff {})",
        out_dir.join("field.csv").display(),
        cfg.x_steps,
        cfg.cutoff
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// clifford
// ---------------------------------------------------------------------------

fn default_table_path(out: Option<&Path>) -> PathBuf {
    let name = format!("clifford_table_v{TABLE_FORMAT_VERSION}.bin");
    match out {
        Some(p) if p.is_dir() => p.join(name),
        Some(p) => p.to_path_buf(),
        None => PathBuf::from(name),
    }
}

fn cmd_clifford(
    generate: bool,
    verify: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if let Some(path) = verify {
        let table = CliffordTable::load(path)?;
        table.verify()?;
        println!(
            "{}: {} elements, format v{}, checks passed",
            path.display(),
            table.len(),
            table.metadata().format_version
        );
        return Ok(());
    }
    if generate {
        let table = CliffordTable::generate()?;
        let path = default_table_path(out);
        table.save(&path)?;
        println!("{} elements written to {}", table.len(), path.display());
        return Ok(());
    }
    Err(CliError::config(
        "clifford needs --generate or --verify <path>",
    ))
}

/// Load the cached table, or generate and cache it.
fn obtain_table(cache_dir: Option<&Path>, out_dir: &Path) -> Result<CliffordTable, CliError> {
    let dir = cache_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| out_dir.join("cache"));
    let path = dir.join(format!("clifford_table_v{TABLE_FORMAT_VERSION}.bin"));
    if path.exists() {
        match CliffordTable::load(&path) {
            Ok(table) => return Ok(table),
            Err(e) => eprintln!(
                "warning: cached table {} unusable ({e}); regenerating",
                path.display()
            ),
        }
    }
    let table = CliffordTable::generate()?;
    std::fs::create_dir_all(&dir)?;
    table.save(&path)?;
    Ok(table)
}

// ---------------------------------------------------------------------------
// rb / irb / mirb
// ---------------------------------------------------------------------------

fn noise_coefficients(cfg: &RunConfig) -> Result<Option<NoiseCoefficients>, CliError> {
    let coeffs = match cfg.scenario {
        ScenarioKey::None => None,
        ScenarioKey::Correlated => Some(NoiseCoefficients::correlated_central(
            cfg.kappa,
            cfg.z0_over_l,
        )?),
        ScenarioKey::Anticorrelated => Some(NoiseCoefficients::anticorrelated(
            cfg.kappa,
            cfg.z0_over_l,
        )?),
        ScenarioKey::Independent => Some(NoiseCoefficients::independent(
            cfg.kappa1,
            cfg.kappa2,
            cfg.z0_over_l,
        )?),
        ScenarioKey::PositionShift => Some(NoiseCoefficients::position_shift(
            cfg.kappa,
            cfg.dx_over_l,
            cfg.z0_over_l,
            cfg.subtract_baseline,
        )?),
    };
    Ok(coeffs)
}

fn projector_matrix(key: ProjectorKey) -> crate::linalg::Mat4 {
    let ds = dark_states();
    let state = match key {
        ProjectorKey::T0 => triplet_t0(),
        ProjectorKey::D1Sym => ds.d1_sym,
        ProjectorKey::D2Sym => ds.d2_sym,
        ProjectorKey::D1Anti => ds.d1_anti,
        ProjectorKey::D2Anti => ds.d2_anti,
    };
    projector(&state)
}

fn build_protocol(
    cfg: &RunConfig,
    kind: ProtocolKind,
    default_m_max: usize,
) -> Result<ProtocolConfig, CliError> {
    let m_max = cfg.m_max.unwrap_or(default_m_max);
    let mut protocol = ProtocolConfig::new(
        kind,
        geometric_m_grid(m_max, cfg.m_count),
        cfg.n_avg,
        cfg.seed,
    );
    let initial = match cfg.initial_state {
        StateKey::UpUp => up_up(),
        StateKey::T0 => triplet_t0(),
    };
    protocol.rho0 = crate::channels::DensityMatrix::from_pure(&initial);
    protocol.measurement = *protocol.rho0.matrix();
    if let Some(p) = cfg.lambda_depolarizing {
        protocol.clifford_noise = QuantumChannel::depolarizing(p)?;
    }
    if kind.interleaves_gate() {
        let gate = GateModel {
            gate_index: cfg.gate_k,
            z0_over_l: cfg.z0_over_l,
        };
        let interleaved = match noise_coefficients(cfg)? {
            Some(coeffs) => gate.noisy_gate(&coeffs)?,
            None => InterleavedGate::perfect(&gate.ideal())?,
        };
        protocol.interleaved = Some(interleaved);
    }
    if kind.pinches() {
        protocol.measurement_channel = Some(QuantumChannel::measurement_channel(
            &projector_matrix(cfg.projector),
        )?);
    }
    Ok(protocol)
}

fn run_and_fit(
    protocol: &ProtocolConfig,
    table: &CliffordTable,
    fast: bool,
) -> Result<(DecayCurve, DecayFit), CliError> {
    if fast {
        let fit = predict_exact(protocol)?;
        Ok((exact_curve(&fit, &protocol.m_values), fit))
    } else {
        let curve = run_protocol(protocol, table)?;
        let fit = fit_decay(&curve)?;
        Ok((curve, fit))
    }
}

#[derive(serde::Serialize)]
struct EstimateReport {
    r: f64,
    r_std_err: f64,
    p_ref: f64,
    p_interleaved: f64,
    protocol: &'static str,
    seed: u64,
}

fn cmd_benchmark(
    cfg: &RunConfig,
    out_dir: &Path,
    cli: &Cli,
    kind: ProtocolKind,
    name: &str,
) -> Result<(), CliError> {
    let default_m_max = if kind.pinches() { 30 } else { 200 };
    let fast = cfg.fast.unwrap_or(false);
    let table = obtain_table(cli.cache_dir.as_deref(), out_dir)?;
    let protocol = build_protocol(cfg, kind, default_m_max)?;
    let mut all_converged = true;

    if kind.interleaves_gate() {
        let reference = protocol.reference();
        let (ref_curve, ref_fit) = run_and_fit(&reference, &table, fast)?;
        let (int_curve, int_fit) = run_and_fit(&protocol, &table, fast)?;
        all_converged &= ref_fit.converged && int_fit.converged;
        write_atomic(
            &out_dir.join(format!("{name}_reference_decay.csv")),
            decay_csv(&ref_curve).as_bytes(),
        )?;
        write_atomic(
            &out_dir.join(format!("{name}_interleaved_decay.csv")),
            decay_csv(&int_curve).as_bytes(),
        )?;
        write_fit(
            &out_dir.join(format!("{name}_reference_fit.json")),
            &ref_fit,
            reference.kind,
            cfg.seed,
        )?;
        write_fit(
            &out_dir.join(format!("{name}_interleaved_fit.json")),
            &int_fit,
            kind,
            cfg.seed,
        )?;
        let estimate = crate::rb::estimate_error_rate_from_fits(&ref_fit, &int_fit)?;
        let report = EstimateReport {
            r: estimate.r,
            r_std_err: estimate.r_std_err,
            p_ref: estimate.p_ref,
            p_interleaved: estimate.p_interleaved,
            protocol: kind.name(),
            seed: cfg.seed,
        };
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::config(format!("cannot serialize estimate: {e}")))?;
        write_atomic(&out_dir.join(format!("{name}_estimate.json")), json.as_bytes())?;
        println!(
            "{name}: r = {:.6e} ± {:.1e}  (p_ref = {:.6}, p_int = {:.6}, scenario {})",
            estimate.r,
            estimate.r_std_err,
            estimate.p_ref,
            estimate.p_interleaved,
            cfg.scenario.name()
        );
    } else {
        let (curve, fit) = run_and_fit(&protocol, &table, fast)?;
        all_converged &= fit.converged;
        write_atomic(
            &out_dir.join(format!("{name}_decay.csv")),
            decay_csv(&curve).as_bytes(),
        )?;
        write_fit(&out_dir.join(format!("{name}_fit.json")), &fit, kind, cfg.seed)?;
        println!(
            "{name}: p = {:.6} ± {:.1e}{}",
            fit.p,
            fit.p_std_err,
            if fit.degenerate { " (degenerate: no decay)" } else { "" }
        );
    }

    write_sidecar(
        &out_dir.join(format!("{name}.config.json")),
        &cfg.to_map(name, fast),
    )?;
    if !all_converged {
        return Err(CliError::Quality(
            "decay fit did not converge; artifacts written and flagged".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn cmd_sweep(
    cfg: &RunConfig,
    out_dir: &Path,
    cli: &Cli,
    kind: ProtocolKind,
) -> Result<(), CliError> {
    if cfg.kappa_steps < 2 {
        return Err(CliError::config("kappa_steps must be at least 2"));
    }
    if cfg.kappa_max.is_nan() || cfg.kappa_max <= 0.0 {
        return Err(CliError::config("kappa_max must be positive"));
    }
    let fast = cfg.fast.unwrap_or(true);
    let default_m_max = if kind.pinches() { 30 } else { 200 };
    let table = obtain_table(cli.cache_dir.as_deref(), out_dir)?;
    let mut base = build_protocol(cfg, kind, default_m_max)?;
    // The per-point gates are rebuilt from the grid amplitudes.
    base.interleaved = None;

    let axis: Vec<f64> = (0..cfg.kappa_steps)
        .map(|i| -cfg.kappa_max + 2.0 * cfg.kappa_max * i as f64 / (cfg.kappa_steps - 1) as f64)
        .collect();
    let sweep = SweepConfig {
        kappa1: axis.clone(),
        kappa2: axis.clone(),
        gate: GateModel {
            gate_index: cfg.gate_k,
            z0_over_l: cfg.z0_over_l,
        },
        base: base.clone(),
        fast,
    };
    let result = sweep_grid(&sweep, &table)?;

    let mut matrix_csv = String::from("kappa1,kappa2,r_est,r_std_err,error\n");
    for (i1, &k1) in result.kappa1.iter().enumerate() {
        for (i2, &k2) in result.kappa2.iter().enumerate() {
            let idx = result.index(i1, i2);
            let err = result.errors[idx].as_deref().unwrap_or("");
            matrix_csv.push_str(&format!(
                "{k1},{k2},{},{},{err}\n",
                result.r_est[idx], result.r_std_err[idx]
            ));
        }
    }
    write_atomic(&out_dir.join("sweep_matrix.csv"), matrix_csv.as_bytes())?;

    let cut_kappas: Vec<f64> = axis.iter().copied().filter(|&k| k >= 0.0).collect();
    let cut_sweep = SweepConfig {
        kappa1: cut_kappas,
        kappa2: vec![],
        gate: sweep.gate,
        base,
        fast,
    };
    let cuts = sweep_diagonals(&cut_sweep, &table)?;
    let mut cuts_csv = String::from(
        "kappa,r_correlated,r_correlated_std_err,r_anticorrelated,r_anticorrelated_std_err\n",
    );
    for i in 0..cuts.kappa.len() {
        cuts_csv.push_str(&format!(
            "{},{},{},{},{}\n",
            cuts.kappa[i],
            cuts.correlated_r[i],
            cuts.correlated_se[i],
            cuts.anticorrelated_r[i],
            cuts.anticorrelated_se[i]
        ));
    }
    write_atomic(&out_dir.join("sweep_cuts.csv"), cuts_csv.as_bytes())?;
    write_sidecar(&out_dir.join("sweep.config.json"), &cfg.to_map("sweep", fast))?;

    let failures = result.errors.iter().flatten().count();
    println!(
        "sweep ({}, {}): {}x{} grid and {} cut amplitudes written to {}",
        kind.name(),
        if fast { "exact" } else { "monte-carlo" },
        result.kappa1.len(),
        result.kappa2.len(),
        cuts.kappa.len(),
        out_dir.display()
    );
    if failures > 0 {
        eprintln!("warning: {failures} grid points failed; see the error column");
    }
    Ok(())
}
