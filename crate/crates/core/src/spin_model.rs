//! Two-qubit spin Hamiltonian, magnetic-noise perturbations, unitary
//! evolution and the dark states of the perturbations.
//!
//! Units: `ħ = 1`, energies in units of the exchange coupling `J` (so `J = 1`
//! in every matrix), times in `1/J`. Spin operators are `σ/2`. Basis order is
//! `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩` with qubit 1 the left tensor factor.

use std::f64::consts::PI;

use thiserror::Error;

use crate::linalg::{
    cr, eigh, hermiticity_defect, kron2, pauli_i, pauli_x, pauli_z, Mat4, Vec4, C64,
};

#[derive(Debug, Error)]
pub enum SpinModelError {
    #[error("invalid Hamiltonian parameters: {0}")]
    InvalidParams(String),
    #[error("noise amplitudes must be finite: {0}")]
    NonFiniteAmplitude(String),
    #[error("geometry ratio z0/L must be positive and finite, got {0}")]
    InvalidGeometry(f64),
    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
}

/// `S₁ˣ = (σx ⊗ I)/2`.
pub fn s1x() -> Mat4 {
    kron2(&pauli_x(), &pauli_i()) * cr(0.5)
}

/// `S₂ˣ = (I ⊗ σx)/2`.
pub fn s2x() -> Mat4 {
    kron2(&pauli_i(), &pauli_x()) * cr(0.5)
}

/// `S₁ᶻ = (σz ⊗ I)/2`.
pub fn s1z() -> Mat4 {
    kron2(&pauli_z(), &pauli_i()) * cr(0.5)
}

/// `S₂ᶻ = (I ⊗ σz)/2`.
pub fn s2z() -> Mat4 {
    kron2(&pauli_i(), &pauli_z()) * cr(0.5)
}

/// Heisenberg coupling `S₁·S₂`.
pub fn heisenberg_coupling() -> Mat4 {
    let half = cr(0.5);
    let sx1 = kron2(&pauli_x(), &pauli_i()) * half;
    let sx2 = kron2(&pauli_i(), &pauli_x()) * half;
    let sy1 = kron2(&crate::linalg::pauli_y(), &pauli_i()) * half;
    let sy2 = kron2(&pauli_i(), &crate::linalg::pauli_y()) * half;
    sx1 * sx2 + sy1 * sy2 + s1z() * s2z()
}

/// Parameters of the static two-qubit Hamiltonian, all in units of `J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianParams {
    /// Exchange coupling; the energy unit, normally 1.
    pub exchange: f64,
    /// Sum of the two Zeeman splittings, `ω = ω₁ + ω₂`.
    pub omega: f64,
    /// Difference of the Zeeman splittings, `δω = ω₁ − ω₂`.
    pub delta_omega: f64,
    /// Gate duration in units of `1/J`.
    pub time: f64,
}

impl HamiltonianParams {
    pub fn new(
        exchange: f64,
        omega: f64,
        delta_omega: f64,
        time: f64,
    ) -> Result<Self, SpinModelError> {
        if !(exchange.is_finite() && exchange > 0.0) {
            return Err(SpinModelError::InvalidParams(format!(
                "exchange must be positive and finite, got {exchange}"
            )));
        }
        for (name, v) in [("omega", omega), ("delta_omega", delta_omega), ("time", time)] {
            if !v.is_finite() {
                return Err(SpinModelError::InvalidParams(format!(
                    "{name} must be finite, got {v}"
                )));
            }
        }
        Ok(Self {
            exchange,
            omega,
            delta_omega,
            time,
        })
    }

    /// Parameters that make the evolved gate a two-qubit Clifford up to a
    /// global phase: `t = π/J`, `δω = √15·J`, `ω = 4kJ`.
    pub fn clifford_gate(k: u32) -> Self {
        assert!(k >= 1, "gate index k must be at least 1");
        Self {
            exchange: 1.0,
            omega: 4.0 * k as f64,
            delta_omega: 15.0_f64.sqrt(),
            time: PI,
        }
    }
}

/// `H = J·S₁·S₂ + ½[ω(S₁ᶻ+S₂ᶻ) + δω(S₁ᶻ−S₂ᶻ)]`.
pub fn build_static_hamiltonian(p: &HamiltonianParams) -> Mat4 {
    heisenberg_coupling() * cr(p.exchange)
        + (s1z() + s2z()) * cr(0.5 * p.omega)
        + (s1z() - s2z()) * cr(0.5 * p.delta_omega)
}

/// Which physical mechanism produced a set of noise coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseScenario {
    /// Independent current fluctuations `δI₁`, `δI₂` on the two side wires.
    Independent,
    /// Single fluctuation `δI` on the shared central wire.
    CorrelatedCentral,
    /// Side-wire fluctuations locked to `δI₁ = −δI₂`.
    Anticorrelated,
    /// Correlated displacement of both qubits by `δx`.
    PositionShift,
}

/// The four perturbation frequencies entering the noise Hamiltonian, in
/// units of `J`. `dwx1/dwx2` multiply `S₁ˣ/S₂ˣ`, `dwz1/dwz2` multiply
/// `S₁ᶻ/S₂ᶻ`.
///
/// Amplitudes are parameterized by the dimensionless coupling
/// `κ = g·μ_B·δB₀/(ħJ)` (or `κ₀ = g·μ_B·B₀/(ħJ)` for position shifts), so the
/// geometry enters only through the ratio `z0/L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseCoefficients {
    pub dwx1: f64,
    pub dwx2: f64,
    pub dwz1: f64,
    pub dwz2: f64,
    pub scenario: NoiseScenario,
}

/// `z0²/(L²+z0²)` as a function of `ρ = z0/L`.
fn transverse_fraction(ratio: f64) -> f64 {
    ratio * ratio / (1.0 + ratio * ratio)
}

/// `z0·L/(L²+z0²)` as a function of `ρ = z0/L`.
fn longitudinal_fraction(ratio: f64) -> f64 {
    ratio / (1.0 + ratio * ratio)
}

fn check_geometry(ratio: f64) -> Result<(), SpinModelError> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(SpinModelError::InvalidGeometry(ratio));
    }
    Ok(())
}

fn check_amplitude(name: &str, v: f64) -> Result<(), SpinModelError> {
    if !v.is_finite() {
        return Err(SpinModelError::NonFiniteAmplitude(format!("{name} = {v}")));
    }
    Ok(())
}

impl NoiseCoefficients {
    /// Independent side-wire fluctuations with amplitudes `κ₁, κ₂`.
    pub fn independent(
        kappa1: f64,
        kappa2: f64,
        z0_over_l: f64,
    ) -> Result<Self, SpinModelError> {
        check_amplitude("kappa1", kappa1)?;
        check_amplitude("kappa2", kappa2)?;
        check_geometry(z0_over_l)?;
        let fx = transverse_fraction(z0_over_l);
        let fz = longitudinal_fraction(z0_over_l);
        Ok(Self {
            dwx1: kappa1 * fx,
            dwx2: kappa2 * fx,
            dwz1: kappa1 * fz,
            dwz2: kappa2 * fz,
            scenario: NoiseScenario::Independent,
        })
    }

    /// Central-wire fluctuation `δI` acting on both qubits with equal sign.
    pub fn correlated_central(kappa: f64, z0_over_l: f64) -> Result<Self, SpinModelError> {
        let mut c = Self::independent(kappa, kappa, z0_over_l)?;
        c.scenario = NoiseScenario::CorrelatedCentral;
        Ok(c)
    }

    /// Side-wire fluctuations locked to opposite signs, `δI₁ = −δI₂`.
    pub fn anticorrelated(kappa: f64, z0_over_l: f64) -> Result<Self, SpinModelError> {
        let mut c = Self::independent(kappa, -kappa, z0_over_l)?;
        c.scenario = NoiseScenario::Anticorrelated;
        Ok(c)
    }

    /// Correlated position shift of both qubits by `δx` (in units of `L`).
    ///
    /// With `subtract_baseline` the static `δx = 0` value is removed so the
    /// perturbation vanishes at zero displacement; by default the formulas
    /// are evaluated as printed, which leaves a finite longitudinal term at
    /// `δx = 0`.
    pub fn position_shift(
        kappa0: f64,
        dx_over_l: f64,
        z0_over_l: f64,
        subtract_baseline: bool,
    ) -> Result<Self, SpinModelError> {
        check_amplitude("kappa0", kappa0)?;
        check_amplitude("dx_over_l", dx_over_l)?;
        check_geometry(z0_over_l)?;
        let rho = z0_over_l;
        let u = 1.0 + dx_over_l;
        let v = 1.0 - dx_over_l;
        let du = u * u + rho * rho;
        let dv = v * v + rho * rho;
        let mut dwx = kappa0 * (rho * rho / du - rho * rho / dv);
        let mut dwz = kappa0 * (rho * u / du + rho * v / dv);
        if subtract_baseline {
            dwx -= 0.0;
            dwz -= kappa0 * 2.0 * longitudinal_fraction(rho);
        }
        Ok(Self {
            dwx1: dwx,
            dwx2: dwx,
            dwz1: dwz,
            dwz2: dwz,
            scenario: NoiseScenario::PositionShift,
        })
    }
}

/// Perturbation Hamiltonian
/// `δH = −dwx1·S₁ˣ − dwx2·S₂ˣ − dwz1·S₁ᶻ + dwz2·S₂ᶻ`.
///
/// Note the sign asymmetry between the two longitudinal terms; it is what
/// makes the dark states of the correlated and anti-correlated special cases
/// work out.
pub fn build_perturbation(c: &NoiseCoefficients) -> Mat4 {
    s1x() * cr(-c.dwx1) + s2x() * cr(-c.dwx2) + s1z() * cr(-c.dwz1) + s2z() * cr(c.dwz2)
}

/// Tolerance on the Hermiticity defect accepted by [`evolve`].
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Unitary evolution `U = exp(−iHt)` of a Hermitian `H` via
/// eigendecomposition.
pub fn evolve(h: &Mat4, t: f64) -> Result<Mat4, SpinModelError> {
    let defect = hermiticity_defect(h);
    if defect > HERMITICITY_TOL {
        return Err(SpinModelError::NotHermitian(defect));
    }
    let (vals, vecs) = eigh(h);
    let phases = Mat4::from_diagonal(&Vec4::from_fn(|i, _| {
        let angle = -vals[i] * t;
        C64::new(angle.cos(), angle.sin())
    }));
    Ok(vecs * phases * vecs.adjoint())
}

/// The ideal interleaved gate: evolution of the static Hamiltonian with
/// `t = π/J`, `δω = √15·J`, `ω = 4kJ`, equal to `e^{−iπ/4}·diag(1, i, i, 1)`.
pub fn ideal_gate(k: u32) -> Mat4 {
    let p = HamiltonianParams::clifford_gate(k);
    let h = build_static_hamiltonian(&p);
    evolve(&h, p.time).expect("static Hamiltonian is Hermitian by construction")
}

/// The states annihilated by the correlated (`S`) and anti-correlated (`A`)
/// perturbations.
#[derive(Debug, Clone)]
pub struct DarkStateSet {
    /// `(|↑↑⟩ − |↓↓⟩)/√2`; dark for the correlated perturbation at any
    /// geometry.
    pub d1_sym: Vec4,
    /// `½(|↑↑⟩ − |↑↓⟩ + |↓↑⟩ + |↓↓⟩)`; dark for the correlated perturbation
    /// when `δω_x = δω_z` (i.e. `z0 = L`).
    pub d2_sym: Vec4,
    /// `(|↑↓⟩ + |↓↑⟩)/√2`, the triplet `|T₀(1,1)⟩`; dark for the
    /// anti-correlated perturbation at any geometry.
    pub d1_anti: Vec4,
    /// `½(|↑↑⟩ + |↑↓⟩ − |↓↑⟩ + |↓↓⟩)`; dark for the anti-correlated
    /// perturbation when `δω_x = δω_z`.
    pub d2_anti: Vec4,
}

impl DarkStateSet {
    pub fn symmetric(&self) -> [&Vec4; 2] {
        [&self.d1_sym, &self.d2_sym]
    }

    pub fn antisymmetric(&self) -> [&Vec4; 2] {
        [&self.d1_anti, &self.d2_anti]
    }
}

/// Basis state `|↑↑⟩`.
pub fn up_up() -> Vec4 {
    Vec4::new(cr(1.0), cr(0.0), cr(0.0), cr(0.0))
}

/// The triplet `|T₀(1,1)⟩ = (|↑↓⟩ + |↓↑⟩)/√2`.
pub fn triplet_t0() -> Vec4 {
    let s = cr(1.0 / 2.0_f64.sqrt());
    Vec4::new(cr(0.0), s, s, cr(0.0))
}

pub fn dark_states() -> DarkStateSet {
    let s = 1.0 / 2.0_f64.sqrt();
    DarkStateSet {
        d1_sym: Vec4::new(cr(s), cr(0.0), cr(0.0), cr(-s)),
        d2_sym: Vec4::new(cr(0.5), cr(-0.5), cr(0.5), cr(0.5)),
        d1_anti: triplet_t0(),
        d2_anti: Vec4::new(cr(0.5), cr(0.5), cr(-0.5), cr(0.5)),
    }
}
