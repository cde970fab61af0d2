//! Flat key/value run configuration.
//!
//! Config files are plain text, one `key = value` per line with `#`
//! comments. The JSON sidecars written next to every artifact hold the same
//! flat map and load through the same path, so a sidecar can be passed back
//! via `--config` to reproduce a run. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;

/// Noise scenario selector for the gate of interest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKey {
    None,
    Correlated,
    Anticorrelated,
    Independent,
    PositionShift,
}

impl ScenarioKey {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "none" | "noiseless" => Ok(Self::None),
            "correlated" => Ok(Self::Correlated),
            "anticorrelated" | "anti-correlated" => Ok(Self::Anticorrelated),
            "independent" => Ok(Self::Independent),
            "position_shift" | "position-shift" => Ok(Self::PositionShift),
            other => Err(format!(
                "unknown scenario '{other}' (expected none, correlated, anticorrelated, independent or position_shift)"
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Correlated => "correlated",
            Self::Anticorrelated => "anticorrelated",
            Self::Independent => "independent",
            Self::PositionShift => "position_shift",
        }
    }
}

/// Named measurement projectors for the modified protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectorKey {
    /// The triplet `|T₀(1,1)⟩`, equal to the first anti-correlated dark state.
    T0,
    D1Sym,
    D2Sym,
    D1Anti,
    D2Anti,
}

impl ProjectorKey {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "t0" => Ok(Self::T0),
            "d1s" => Ok(Self::D1Sym),
            "d2s" => Ok(Self::D2Sym),
            "d1a" => Ok(Self::D1Anti),
            "d2a" => Ok(Self::D2Anti),
            other => Err(format!(
                "unknown projector '{other}' (expected t0, d1s, d2s, d1a or d2a)"
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::T0 => "t0",
            Self::D1Sym => "d1s",
            Self::D2Sym => "d2s",
            Self::D1Anti => "d1a",
            Self::D2Anti => "d2a",
        }
    }
}

/// Initial-state selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKey {
    UpUp,
    T0,
}

impl StateKey {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "uu" | "upup" => Ok(Self::UpUp),
            "t0" => Ok(Self::T0),
            other => Err(format!("unknown initial state '{other}' (expected uu or t0)")),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::UpUp => "uu",
            Self::T0 => "t0",
        }
    }
}

/// Every tunable of every subcommand, with defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    /// 0 means "let rayon decide".
    pub workers: usize,
    /// Resolved per command when absent.
    pub fast: Option<bool>,

    // Geometry and gate.
    pub z0_over_l: f64,
    pub gate_k: u32,

    // Noise on the gate of interest.
    pub scenario: ScenarioKey,
    pub kappa: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub dx_over_l: f64,
    pub subtract_baseline: bool,

    // Protocol statistics.
    pub m_max: Option<usize>,
    pub m_count: usize,
    pub n_avg: usize,
    pub projector: ProjectorKey,
    pub initial_state: StateKey,
    /// Depolarization parameter of the random-Clifford noise `Λ`; absent
    /// means noiseless Cliffords.
    pub lambda_depolarizing: Option<f64>,

    // Field profile.
    pub x_min_over_l: f64,
    pub x_max_over_l: f64,
    pub x_steps: usize,
    pub cutoff: usize,

    // Sweep grid.
    pub kappa_max: f64,
    pub kappa_steps: usize,
    /// Which pipeline `sweep` runs: "irb" or "mirb".
    pub sweep_protocol: SweepProtocolKey,
}

/// Pipeline selector for the sweep subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepProtocolKey {
    Irb,
    Mirb,
}

impl SweepProtocolKey {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "irb" => Ok(Self::Irb),
            "mirb" => Ok(Self::Mirb),
            other => Err(format!(
                "unknown sweep protocol '{other}' (expected irb or mirb)"
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Irb => "irb",
            Self::Mirb => "mirb",
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            workers: 0,
            fast: None,
            z0_over_l: 1.0,
            gate_k: 5,
            scenario: ScenarioKey::None,
            kappa: 0.05,
            kappa1: 0.05,
            kappa2: 0.05,
            dx_over_l: 0.05,
            subtract_baseline: false,
            m_max: None,
            m_count: 12,
            n_avg: 1000,
            projector: ProjectorKey::T0,
            initial_state: StateKey::UpUp,
            lambda_depolarizing: None,
            x_min_over_l: 0.0,
            x_max_over_l: 4.0,
            x_steps: 201,
            cutoff: 100,
            kappa_max: 0.1,
            kappa_steps: 11,
            sweep_protocol: SweepProtocolKey::Irb,
        }
    }
}

fn parse_as<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| format!("invalid value '{value}' for key '{key}': {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(format!("invalid boolean '{value}' for key '{key}'")),
    }
}

impl RunConfig {
    /// Apply one key/value pair; unknown keys are an error.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "seed" => self.seed = parse_as(key, value)?,
            "workers" => self.workers = parse_as(key, value)?,
            "fast" => self.fast = Some(parse_bool(key, value)?),
            "z0_over_l" => self.z0_over_l = parse_as(key, value)?,
            "gate_k" => self.gate_k = parse_as(key, value)?,
            "scenario" => self.scenario = ScenarioKey::parse(value)?,
            "kappa" => self.kappa = parse_as(key, value)?,
            "kappa1" => self.kappa1 = parse_as(key, value)?,
            "kappa2" => self.kappa2 = parse_as(key, value)?,
            "dx_over_l" => self.dx_over_l = parse_as(key, value)?,
            "subtract_baseline" => self.subtract_baseline = parse_bool(key, value)?,
            "m_max" => self.m_max = Some(parse_as(key, value)?),
            "m_count" => self.m_count = parse_as(key, value)?,
            "n_avg" => self.n_avg = parse_as(key, value)?,
            "projector" => self.projector = ProjectorKey::parse(value)?,
            "initial_state" => self.initial_state = StateKey::parse(value)?,
            "lambda_depolarizing" => {
                self.lambda_depolarizing = Some(parse_as(key, value)?);
            }
            "x_min_over_l" => self.x_min_over_l = parse_as(key, value)?,
            "x_max_over_l" => self.x_max_over_l = parse_as(key, value)?,
            "x_steps" => self.x_steps = parse_as(key, value)?,
            "cutoff" => self.cutoff = parse_as(key, value)?,
            "kappa_max" => self.kappa_max = parse_as(key, value)?,
            "kappa_steps" => self.kappa_steps = parse_as(key, value)?,
            "sweep_protocol" => self.sweep_protocol = SweepProtocolKey::parse(value)?,
            // Sidecar metadata, accepted and ignored so sidecars round-trip.
            "subcommand" => {}
            _ => return Err(format!("unknown configuration key '{key}'")),
        }
        Ok(())
    }

    /// Load from a flat `key = value` file or a JSON sidecar.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut cfg = Self::default();
        if text.trim_start().starts_with('{') {
            let map: BTreeMap<String, serde_json::Value> = serde_json::from_str(&text)
                .map_err(|e| format!("invalid JSON config {}: {e}", path.display()))?;
            for (key, value) in &map {
                let rendered = match value {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                cfg.apply(key, &rendered)?;
            }
        } else {
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    return Err(format!(
                        "{}:{}: expected 'key = value', got '{raw}'",
                        path.display(),
                        lineno + 1
                    ));
                };
                cfg.apply(key.trim(), value.trim())?;
            }
        }
        Ok(cfg)
    }

    /// Effective configuration as a flat string map (what sidecars store).
    pub fn to_map(&self, subcommand: &str, fast_resolved: bool) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        map.insert("subcommand".into(), subcommand.into());
        map.insert("seed".into(), self.seed.to_string());
        map.insert("workers".into(), self.workers.to_string());
        map.insert("fast".into(), fast_resolved.to_string());
        map.insert("z0_over_l".into(), self.z0_over_l.to_string());
        map.insert("gate_k".into(), self.gate_k.to_string());
        map.insert("scenario".into(), self.scenario.name().into());
        map.insert("kappa".into(), self.kappa.to_string());
        map.insert("kappa1".into(), self.kappa1.to_string());
        map.insert("kappa2".into(), self.kappa2.to_string());
        map.insert("dx_over_l".into(), self.dx_over_l.to_string());
        map.insert(
            "subtract_baseline".into(),
            self.subtract_baseline.to_string(),
        );
        if let Some(m) = self.m_max {
            map.insert("m_max".into(), m.to_string());
        }
        map.insert("m_count".into(), self.m_count.to_string());
        map.insert("n_avg".into(), self.n_avg.to_string());
        map.insert("projector".into(), self.projector.name().into());
        map.insert("initial_state".into(), self.initial_state.name().into());
        if let Some(p) = self.lambda_depolarizing {
            map.insert("lambda_depolarizing".into(), p.to_string());
        }
        map.insert("x_min_over_l".into(), self.x_min_over_l.to_string());
        map.insert("x_max_over_l".into(), self.x_max_over_l.to_string());
        map.insert("x_steps".into(), self.x_steps.to_string());
        map.insert("cutoff".into(), self.cutoff.to_string());
        map.insert("kappa_max".into(), self.kappa_max.to_string());
        map.insert("kappa_steps".into(), self.kappa_steps.to_string());
        map.insert("sweep_protocol".into(), self.sweep_protocol.name().into());
        map
    }
}
