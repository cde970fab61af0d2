//! Magnetic field of an infinite array of parallel wires with alternating
//! current directions.
//!
//! Wires run along `y`. Wires carrying current in `+y` sit at `x = 4Ln`,
//! wires carrying `−y` at `x = 2L(2n+1)`, all at height `z0` above the qubit
//! plane. All returned fields are dimensionless, in units of
//! `B0 = μ_eff·I/(2π·z0)`, the field magnitude directly below a single wire.
//! Absolute fields are recovered by multiplying with [`WireArrayConfig::b0`].

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("invalid wire-array configuration: {0}")]
    InvalidConfig(String),
    #[error("coordinate must be finite, got {0}")]
    NonFiniteCoordinate(f64),
    #[error(
        "x = {x} is outside the two-wire validity neighborhood |x - x_k| < L around x_k = {x_k}"
    )]
    OutsideValidity { x: f64, x_k: f64 },
}

/// Geometry and current of the wire array.
///
/// The geometric angle `arctan(z0/L)` occasionally used to parameterize the
/// wire–qubit geometry carries no computational role here; everything is a
/// function of the ratio `z0/L` through `ζ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireArrayConfig {
    /// Current through each wire (arbitrary current unit).
    pub current: f64,
    /// Half of the same-direction wire spacing; wires sit at even multiples of `L`.
    pub half_spacing: f64,
    /// Vertical distance from the qubit plane to the wires.
    pub depth: f64,
    /// Effective permeability of the medium (field·length / current).
    pub mu_eff: f64,
}

impl WireArrayConfig {
    pub fn new(
        current: f64,
        half_spacing: f64,
        depth: f64,
        mu_eff: f64,
    ) -> Result<Self, FieldError> {
        let cfg = Self {
            current,
            half_spacing,
            depth,
            mu_eff,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Unit geometry: `I = 1`, `L = 1`, `μ_eff = 1` and the given `z0/L`.
    pub fn with_depth_ratio(z0_over_l: f64) -> Result<Self, FieldError> {
        Self::new(1.0, 1.0, z0_over_l, 1.0)
    }

    fn validate(&self) -> Result<(), FieldError> {
        if !(self.half_spacing.is_finite() && self.half_spacing > 0.0) {
            return Err(FieldError::InvalidConfig(format!(
                "half_spacing must be positive and finite, got {}",
                self.half_spacing
            )));
        }
        if !(self.depth.is_finite() && self.depth > 0.0) {
            return Err(FieldError::InvalidConfig(format!(
                "depth must be positive and finite, got {}",
                self.depth
            )));
        }
        if !(self.mu_eff.is_finite() && self.mu_eff > 0.0) {
            return Err(FieldError::InvalidConfig(format!(
                "mu_eff must be positive and finite, got {}",
                self.mu_eff
            )));
        }
        if !self.current.is_finite() {
            return Err(FieldError::InvalidConfig(format!(
                "current must be finite, got {}",
                self.current
            )));
        }
        Ok(())
    }

    /// Field unit `B0 = μ_eff·I/(2π·z0)`.
    pub fn b0(&self) -> f64 {
        self.mu_eff * self.current / (2.0 * PI * self.depth)
    }

    /// Dimensionless geometry parameter `ζ = π·z0/(2L)`.
    pub fn zeta(&self) -> f64 {
        PI * self.depth / (2.0 * self.half_spacing)
    }
}

/// In-plane field components in units of `B0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldVector {
    pub bx: f64,
    pub bz: f64,
}

impl FieldVector {
    pub fn magnitude(&self) -> f64 {
        self.bx.hypot(self.bz)
    }

    /// Components in absolute field units.
    pub fn absolute(&self, cfg: &WireArrayConfig) -> (f64, f64) {
        (self.bx * cfg.b0(), self.bz * cfg.b0())
    }
}

/// Current direction of a single wire (wires run along `y`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurrentDirection {
    PlusY,
    MinusY,
}

impl CurrentDirection {
    /// `(−1)^(j−1)` for the `j`-th wire of a pair.
    pub fn from_pair_index(j: usize) -> Self {
        if j % 2 == 1 {
            CurrentDirection::PlusY
        } else {
            CurrentDirection::MinusY
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            CurrentDirection::PlusY => 1.0,
            CurrentDirection::MinusY => -1.0,
        }
    }
}

/// Which family of special points the closed forms refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperationPoint {
    /// Mid-gap points `x_k = (2k+1)L`; the field is purely along `z` and
    /// first-order insensitive to displacements along `x`.
    BetweenWires,
    /// Points `x = 2kL` directly below a wire; the field is purely along `x`.
    BelowWire,
}

/// Coordinate of the `k`-th operation point.
pub fn operation_point_x(k: i32, kind: OperationPoint, cfg: &WireArrayConfig) -> f64 {
    let l = cfg.half_spacing;
    match kind {
        OperationPoint::BetweenWires => (2 * k + 1) as f64 * l,
        OperationPoint::BelowWire => (2 * k) as f64 * l,
    }
}

/// Field of a single straight wire at `wire_x`, in units of `B0`.
///
/// For a `+y` current the components are `(z0²/r², z0·(x − wire_x)/r²)` with
/// `r² = (x − wire_x)² + z0²`; the magnitude is `B0·z0/r`.
pub fn single_wire_field(
    x: f64,
    wire_x: f64,
    direction: CurrentDirection,
    cfg: &WireArrayConfig,
) -> FieldVector {
    let z0 = cfg.depth;
    let dx = x - wire_x;
    let r2 = dx * dx + z0 * z0;
    let s = direction.sign();
    FieldVector {
        bx: s * z0 * z0 / r2,
        bz: s * z0 * dx / r2,
    }
}

/// Total field of the wire array truncated symmetrically to pair indices
/// `n ∈ [−N, N]`, in units of `B0`.
pub fn total_field(x: f64, cfg: &WireArrayConfig, cutoff: usize) -> Result<FieldVector, FieldError> {
    assert!(cutoff >= 1, "cutoff must be at least 1");
    if !x.is_finite() {
        return Err(FieldError::NonFiniteCoordinate(x));
    }
    let l = cfg.half_spacing;
    let z0 = cfg.depth;
    let n = cutoff as i64;
    let mut bx = 0.0;
    let mut bz = 0.0;
    for i in -n..=n {
        let x1 = x - 4.0 * l * i as f64;
        let x2 = x - 2.0 * l * (2 * i + 1) as f64;
        let r1sq = x1 * x1 + z0 * z0;
        let r2sq = x2 * x2 + z0 * z0;
        bx += z0 * z0 / r1sq - z0 * z0 / r2sq;
        bz += z0 * x1 / r1sq - z0 * x2 / r2sq;
    }
    Ok(FieldVector { bx, bz })
}

/// Exact lattice sum at the operation points, in units of `B0`.
///
/// At `x_k = (2k+1)L` the field is `(0, (−1)^k·ζ·sech ζ)`; at `x = 2kL` it is
/// `((−1)^k·ζ·csch ζ, 0)`.
pub fn closed_form_operation_point(
    k: i32,
    kind: OperationPoint,
    cfg: &WireArrayConfig,
) -> FieldVector {
    let zeta = cfg.zeta();
    let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    match kind {
        OperationPoint::BetweenWires => FieldVector {
            bx: 0.0,
            bz: sign * zeta / zeta.cosh(),
        },
        OperationPoint::BelowWire => FieldVector {
            bx: sign * zeta / zeta.sinh(),
            bz: 0.0,
        },
    }
}

fn two_wire_raw(x: f64, k: i32, cfg: &WireArrayConfig) -> FieldVector {
    let l = cfg.half_spacing;
    let left_x = 2.0 * k as f64 * l;
    let right_x = 2.0 * (k + 1) as f64 * l;
    // Wires at 4Ln carry +y, wires at 2L(2n+1) carry −y, so the wire at 2kL
    // has direction (−1)^k.
    let (left_dir, right_dir) = if k.rem_euclid(2) == 0 {
        (CurrentDirection::PlusY, CurrentDirection::MinusY)
    } else {
        (CurrentDirection::MinusY, CurrentDirection::PlusY)
    };
    let left = single_wire_field(x, left_x, left_dir, cfg);
    let right = single_wire_field(x, right_x, right_dir, cfg);
    FieldVector {
        bx: left.bx + right.bx,
        bz: left.bz + right.bz,
    }
}

/// Calibration coefficient `λ_k` matching the two-wire field to the exact
/// lattice sum at `x_k`. Independent of the overall current.
pub fn calibration_coefficient(k: i32, cfg: &WireArrayConfig) -> f64 {
    let x_k = operation_point_x(k, OperationPoint::BetweenWires, cfg);
    let exact = closed_form_operation_point(k, OperationPoint::BetweenWires, cfg);
    let raw = two_wire_raw(x_k, k, cfg);
    exact.bz / raw.bz
}

/// Two-nearest-wire approximation around `x_k = (2k+1)L`, rescaled so it
/// equals the exact closed form at `x_k`. Valid for `|x − x_k| < L`.
pub fn calibrated_two_wire_field(
    x: f64,
    k: i32,
    cfg: &WireArrayConfig,
) -> Result<FieldVector, FieldError> {
    if !x.is_finite() {
        return Err(FieldError::NonFiniteCoordinate(x));
    }
    let x_k = operation_point_x(k, OperationPoint::BetweenWires, cfg);
    if (x - x_k).abs() >= cfg.half_spacing {
        return Err(FieldError::OutsideValidity { x, x_k });
    }
    let lambda = calibration_coefficient(k, cfg);
    let raw = two_wire_raw(x, k, cfg);
    Ok(FieldVector {
        bx: lambda * raw.bx,
        bz: lambda * raw.bz,
    })
}
