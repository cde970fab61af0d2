//! Quantum channels on the two-qubit space.
//!
//! A channel is held as its 16×16 superoperator in the column-stacking
//! convention of [`crate::linalg`], together with an eagerly computed
//! Pauli-transfer matrix `R_ab = Tr[P_a Λ(P_b)]/d` in the normalized
//! two-qubit Pauli basis ordered `(II, IX, IY, IZ, XI, XX, …, ZZ)` and, when
//! the construction provides one, a Kraus decomposition.
//!
//! Twirling over the Clifford table projects any channel onto the
//! depolarizing family `ρ ↦ pρ + (1−p)·I/d`; because the group is a unitary
//! 2-design the resulting `p` can also be read off the Pauli-transfer trace,
//! `p = (Tr R − 1)/(d² − 1)`, and both routes are exposed.

use rayon::prelude::*;
use std::sync::OnceLock;
use thiserror::Error;

use crate::clifford::CliffordTable;
use crate::linalg::{
    cr, eigh, eigvalsh16, hermiticity_defect, kron2, max_abs_diff, pauli_i, pauli_x, pauli_y,
    pauli_z, projector, unitarity_defect, unvectorize, vectorize, Mat4, SuperOp, Vec4, C64,
};

/// Hilbert-space dimension.
pub const DIM: usize = 4;

/// Tolerance on trace preservation.
pub const TP_TOL: f64 = 1e-10;
/// Tolerance on Choi-matrix positivity.
pub const CP_TOL: f64 = 1e-8;

const PROJECTOR_TOL: f64 = 1e-9;
const DM_HERMITICITY_TOL: f64 = 1e-10;
const DM_TRACE_TOL: f64 = 1e-10;
const DM_POSITIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("matrix is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("operator is not a projector (defect {0:.3e})")]
    NotProjector(f64),
    #[error("Kraus operators are not trace preserving (defect {0:.3e})")]
    NotTracePreserving(f64),
    #[error("channel is not completely positive (min Choi eigenvalue {0:.3e})")]
    NotCompletelyPositive(f64),
    #[error("depolarization parameter {0} outside CPTP range [-1/15, 1]")]
    ParameterOutOfRange(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
}

/// The unnormalized two-qubit Pauli operators `σ_a ⊗ σ_b`, ordered with the
/// second-qubit label fastest: II, IX, IY, IZ, XI, XX, …, ZZ.
pub fn pauli_basis() -> &'static [Mat4; 16] {
    static BASIS: OnceLock<[Mat4; 16]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let singles = [pauli_i(), pauli_x(), pauli_y(), pauli_z()];
        std::array::from_fn(|a| kron2(&singles[a / 4], &singles[a % 4]))
    })
}

/// A valid two-qubit state: Hermitian, unit trace, positive semidefinite
/// within tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat4);

impl DensityMatrix {
    pub fn new(m: Mat4) -> Result<Self, ChannelError> {
        let herm = hermiticity_defect(&m);
        if herm > DM_HERMITICITY_TOL {
            return Err(ChannelError::InvalidDensityMatrix(format!(
                "Hermiticity defect {herm:.3e}"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > DM_TRACE_TOL || tr.im.abs() > DM_TRACE_TOL {
            return Err(ChannelError::InvalidDensityMatrix(format!(
                "trace {tr} differs from 1"
            )));
        }
        let symmetrized = (m + m.adjoint()) * cr(0.5);
        let (vals, _) = eigh(&symmetrized);
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -DM_POSITIVITY_TOL {
            return Err(ChannelError::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self(m))
    }

    /// Pure state `|ψ⟩⟨ψ|`; the vector is normalized first.
    pub fn from_pure(psi: &Vec4) -> Self {
        let n = psi.norm();
        let normalized = psi / cr(n);
        Self(projector(&normalized))
    }

    pub fn maximally_mixed() -> Self {
        Self(Mat4::identity() * cr(0.25))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }
}

/// Depolarization parameter `p` of `[Λ]_d ρ = pρ + (1−p)·I/d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepolarizationParameter {
    pub value: f64,
}

/// Completely positive trace-preserving map on 4×4 density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    superop: SuperOp,
    ptm: nalgebra::SMatrix<f64, 16, 16>,
    kraus: Option<Vec<Mat4>>,
}

fn superop_of_conjugation(u: &Mat4) -> SuperOp {
    // vec(UρU†) = (conj(U) ⊗ U) vec(ρ)
    u.conjugate().kronecker(u)
}

impl QuantumChannel {
    fn from_superop(superop: SuperOp, kraus: Option<Vec<Mat4>>) -> Self {
        let basis = pauli_basis();
        let images: Vec<Mat4> = basis
            .iter()
            .map(|p| unvectorize(&(superop * vectorize(p))))
            .collect();
        let ptm = nalgebra::SMatrix::<f64, 16, 16>::from_fn(|a, b| {
            // Tr[P_a Λ(P_b)]/d; real for Hermiticity-preserving maps.
            (basis[a] * images[b]).trace().re / DIM as f64
        });
        Self {
            superop,
            ptm,
            kraus,
        }
    }

    pub fn identity() -> Self {
        Self::from_unitary(&Mat4::identity()).expect("identity is unitary")
    }

    /// Conjugation channel `ρ ↦ UρU†`.
    pub fn from_unitary(u: &Mat4) -> Result<Self, ChannelError> {
        let defect = unitarity_defect(u);
        if defect > crate::clifford::UNITARITY_TOL {
            return Err(ChannelError::NotUnitary(defect));
        }
        Ok(Self::from_superop(superop_of_conjugation(u), Some(vec![*u])))
    }

    /// Channel with the given Kraus operators `{K_i}`, `ρ ↦ Σ K_i ρ K_i†`.
    pub fn from_kraus(ops: &[Mat4]) -> Result<Self, ChannelError> {
        let completeness: Mat4 = ops.iter().map(|k| k.adjoint() * k).sum();
        let defect = max_abs_diff(&completeness, &Mat4::identity());
        if defect > TP_TOL {
            return Err(ChannelError::NotTracePreserving(defect));
        }
        let superop = ops
            .iter()
            .map(|k| k.conjugate().kronecker(k))
            .fold(SuperOp::zeros(), |acc, s| acc + s);
        Ok(Self::from_superop(superop, Some(ops.to_vec())))
    }

    /// Error channel of a noisy gate relative to its ideal version:
    /// conjugation by `δU = U_ideal†·U_actual`, so that
    /// `actual = ideal ∘ error`.
    pub fn error_channel(u_ideal: &Mat4, u_actual: &Mat4) -> Result<Self, ChannelError> {
        for u in [u_ideal, u_actual] {
            let defect = unitarity_defect(u);
            if defect > crate::clifford::UNITARITY_TOL {
                return Err(ChannelError::NotUnitary(defect));
            }
        }
        Self::from_unitary(&(u_ideal.adjoint() * u_actual))
    }

    /// Measurement-induced pinching `ρ ↦ PρP + QρQ` with `Q = I − P`.
    pub fn measurement_channel(p: &Mat4) -> Result<Self, ChannelError> {
        let herm = hermiticity_defect(p);
        let idem = max_abs_diff(&(p * p), p);
        let defect = herm.max(idem);
        if defect > PROJECTOR_TOL {
            return Err(ChannelError::NotProjector(defect));
        }
        let q = Mat4::identity() - p;
        Self::from_kraus(&[*p, q])
    }

    /// Depolarizing channel `ρ ↦ pρ + (1−p)·I/d`.
    pub fn depolarizing(p: f64) -> Result<Self, ChannelError> {
        if !(p.is_finite() && (-1.0 / 15.0 - 1e-12..=1.0 + 1e-12).contains(&p)) {
            return Err(ChannelError::ParameterOutOfRange(p));
        }
        let vec_id = vectorize(&Mat4::identity());
        let superop = SuperOp::identity() * cr(p)
            + (vec_id * vec_id.adjoint()) * cr((1.0 - p) / DIM as f64);
        Ok(Self::from_superop(superop, None))
    }

    pub fn superoperator(&self) -> &SuperOp {
        &self.superop
    }

    pub fn pauli_transfer_matrix(&self) -> &nalgebra::SMatrix<f64, 16, 16> {
        &self.ptm
    }

    pub fn kraus(&self) -> Option<&[Mat4]> {
        self.kraus.as_deref()
    }

    /// Composition `self ∘ inner` (apply `inner` first).
    pub fn compose(&self, inner: &Self) -> Self {
        let kraus = match (&self.kraus, &inner.kraus) {
            (Some(a), Some(b)) if a.len() == 1 && b.len() == 1 => Some(vec![a[0] * b[0]]),
            _ => None,
        };
        Self::from_superop(self.superop * inner.superop, kraus)
    }

    /// Apply to a raw operator without state validation.
    pub fn apply_matrix(&self, m: &Mat4) -> Mat4 {
        unvectorize(&(self.superop * vectorize(m)))
    }

    /// Apply to a state; the output is re-validated so invariant violations
    /// surface as diagnostics.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix, ChannelError> {
        DensityMatrix::new(self.apply_matrix(rho.matrix()))
    }

    /// Max-norm defect of `Λ†(I) = I`.
    pub fn trace_preservation_defect(&self) -> f64 {
        let vec_id = vectorize(&Mat4::identity());
        let back = self.superop.adjoint() * vec_id;
        (back - vec_id).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Choi matrix `Σ_ij E_ij ⊗ Λ(E_ij)`.
    pub fn choi(&self) -> nalgebra::SMatrix<C64, 16, 16> {
        let mut choi = nalgebra::SMatrix::<C64, 16, 16>::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                let mut e = Mat4::zeros();
                e[(i, j)] = cr(1.0);
                choi += e.kronecker(&self.apply_matrix(&e));
            }
        }
        choi
    }

    /// Smallest eigenvalue of the (symmetrized) Choi matrix.
    pub fn min_choi_eigenvalue(&self) -> f64 {
        let choi = self.choi();
        let sym = (choi + choi.adjoint()) * cr(0.5);
        eigvalsh16(&sym)
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Check trace preservation and complete positivity.
    pub fn validate_cptp(&self) -> Result<(), ChannelError> {
        let tp = self.trace_preservation_defect();
        if tp > TP_TOL {
            return Err(ChannelError::NotTracePreserving(tp));
        }
        let choi = self.choi();
        let herm = hermiticity_defect(&choi);
        if herm > CP_TOL {
            return Err(ChannelError::NotCompletelyPositive(-herm));
        }
        let min = self.min_choi_eigenvalue();
        if min < -CP_TOL {
            return Err(ChannelError::NotCompletelyPositive(min));
        }
        Ok(())
    }

    pub fn is_cptp(&self) -> bool {
        self.validate_cptp().is_ok()
    }

    /// Depolarization parameter from the Pauli-transfer trace,
    /// `p = (Tr R − 1)/(d² − 1)`. Equals the parameter of the explicit
    /// Clifford twirl for any channel.
    pub fn depolarization_parameter(&self) -> DepolarizationParameter {
        DepolarizationParameter {
            value: (self.ptm.trace() - 1.0) / (DIM * DIM - 1) as f64,
        }
    }

    /// Average gate fidelity `F_avg = p + (1−p)/d` via the
    /// entanglement-fidelity relation.
    pub fn average_fidelity(&self) -> f64 {
        let p = self.depolarization_parameter().value;
        p + (1.0 - p) / DIM as f64
    }

    /// Explicit group average `(1/|C₂|)·Σ_g C(g) ∘ Λ ∘ C(g)⁻¹`.
    ///
    /// The sum is chunked with a fixed reduction order, so the result is
    /// bitwise identical for any rayon worker count.
    pub fn twirl(&self, table: &CliffordTable) -> QuantumChannel {
        const CHUNK: usize = 360;
        let indices: Vec<usize> = (0..table.len()).collect();
        let partials: Vec<SuperOp> = indices
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut acc = SuperOp::zeros();
                for &g in chunk {
                    let sg = superop_of_conjugation(table.element(g).matrix());
                    acc += sg * self.superop * sg.adjoint();
                }
                acc
            })
            .collect();
        let mut sum = SuperOp::zeros();
        for p in &partials {
            sum += p;
        }
        Self::from_superop(sum * cr(1.0 / table.len() as f64), None)
    }

    /// Random CPTP channel with the given number of Kraus operators, for
    /// stress-testing twirls and fits. Built from uniformly random matrices
    /// renormalized to satisfy `Σ K†K = I`.
    pub fn random_cptp<R: rand::Rng + ?Sized>(rng: &mut R, kraus_count: usize) -> QuantumChannel {
        assert!(kraus_count >= 1);
        let raw: Vec<Mat4> = (0..kraus_count)
            .map(|_| {
                Mat4::from_fn(|_, _| {
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                })
            })
            .collect();
        let total: Mat4 = raw.iter().map(|k| k.adjoint() * k).sum();
        // total is Hermitian positive definite for generic draws; build its
        // inverse square root.
        let (vals, vecs) = eigh(&total);
        let inv_sqrt = vecs
            * Mat4::from_diagonal(&Vec4::from_fn(|i, _| cr(1.0 / vals[i].max(1e-12).sqrt())))
            * vecs.adjoint();
        let kraus: Vec<Mat4> = raw.iter().map(|k| k * inv_sqrt).collect();
        Self::from_kraus(&kraus).expect("renormalized Kraus set is trace preserving")
    }
}
