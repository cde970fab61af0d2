//! Small shared linear-algebra helpers for 4×4 operators and 16×16
//! superoperators.
//!
//! Vectorization follows the column-stacking convention: `vec(ρ)` stacks the
//! columns of `ρ`, so `vec(AρB) = (Bᵀ ⊗ A)·vec(ρ)` and channel composition is
//! plain matrix multiplication of superoperators. Worked 2×2 example:
//!
//! ```text
//! ρ = [a c]   vec(ρ) = (a, b, c, d)ᵀ       (columns top-to-bottom)
//!     [b d]
//! A = [0 1]   AρI has vec (b, 0, d, 0)ᵀ = (Iᵀ ⊗ A)·vec(ρ)
//!     [0 0]
//! ```

use nalgebra::{Matrix2, Matrix4, SMatrix, SVector, Vector4};
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Vec4 = Vector4<C64>;
/// Column-stacked superoperator acting on `vec(ρ)`.
pub type SuperOp = SMatrix<C64, 16, 16>;
pub type Vec16 = SVector<C64, 16>;

#[inline]
pub fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[inline]
pub fn ci(x: f64) -> C64 {
    C64::new(0.0, x)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff<const R: usize, const C: usize>(
    a: &SMatrix<C64, R, C>,
    b: &SMatrix<C64, R, C>,
) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise modulus.
pub fn max_abs<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Max-norm of `m - m†`.
pub fn hermiticity_defect<const N: usize>(m: &SMatrix<C64, N, N>) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Max-norm of `U†U - I`.
pub fn unitarity_defect(u: &Mat4) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &Mat4::identity())
}

/// Kronecker product of two single-qubit operators; qubit 1 is the left
/// factor, matching the `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩` basis order.
pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vectorize(m: &Mat4) -> Vec16 {
    // nalgebra stores column-major, so iteration order is already the
    // column-stacked order.
    Vec16::from_iterator(m.iter().copied())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &Vec16) -> Mat4 {
    Mat4::from_iterator(v.iter().copied())
}

/// Rank-one projector `|v⟩⟨v|`.
pub fn projector(v: &Vec4) -> Mat4 {
    v * v.adjoint()
}

pub fn pauli_i() -> Mat2 {
    Mat2::identity()
}

pub fn pauli_x() -> Mat2 {
    Mat2::new(cr(0.0), cr(1.0), cr(1.0), cr(0.0))
}

pub fn pauli_y() -> Mat2 {
    Mat2::new(cr(0.0), ci(-1.0), ci(1.0), cr(0.0))
}

pub fn pauli_z() -> Mat2 {
    Mat2::new(cr(1.0), cr(0.0), cr(0.0), cr(-1.0))
}

/// Eigendecomposition of a Hermitian 4×4 matrix: real eigenvalues and a
/// unitary matrix of eigenvectors (columns).
pub fn eigh(h: &Mat4) -> (Vector4<f64>, Mat4) {
    let se = nalgebra::SymmetricEigen::new(*h);
    (se.eigenvalues, se.eigenvectors)
}

/// Eigenvalues of a Hermitian 16×16 matrix, ascending order not guaranteed.
pub fn eigvalsh16(h: &SMatrix<C64, 16, 16>) -> SVector<f64, 16> {
    nalgebra::SymmetricEigen::new(*h).eigenvalues
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vectorize_roundtrip() {
        let m = Mat4::from_fn(|i, j| C64::new(i as f64, j as f64));
        assert_eq!(unvectorize(&vectorize(&m)), m);
    }

    #[test]
    fn vectorize_is_column_stacking() {
        let m = Mat4::from_fn(|i, j| cr((10 * i + j) as f64));
        let v = vectorize(&m);
        // First four entries are the first column.
        assert_eq!(v[0], cr(0.0));
        assert_eq!(v[1], cr(10.0));
        assert_eq!(v[2], cr(20.0));
        assert_eq!(v[3], cr(30.0));
        assert_eq!(v[4], cr(1.0));
    }

    #[test]
    fn kron_matches_conjugation_identity() {
        // vec(AρB) = (Bᵀ ⊗ A) vec(ρ) on a random-ish example.
        let a = Mat4::from_fn(|i, j| C64::new((i + 2 * j) as f64, (i * j) as f64));
        let b = Mat4::from_fn(|i, j| C64::new((3 * i) as f64 - j as f64, 1.0));
        let rho = Mat4::from_fn(|i, j| C64::new(i as f64 - j as f64, (i + j) as f64));
        let lhs = vectorize(&(a * rho * b));
        let rhs = b.transpose().kronecker(&a) * vectorize(&rho);
        for (x, y) in lhs.iter().zip(rhs.iter()) {
            assert_relative_eq!(x.re, y.re, max_relative = 1e-12, epsilon = 1e-12);
            assert_relative_eq!(x.im, y.im, max_relative = 1e-12, epsilon = 1e-12);
        }
    }

    #[test]
    fn eigh_reconstructs() {
        let h = Mat4::new(
            cr(1.0),
            ci(0.5),
            cr(0.0),
            cr(0.2),
            ci(-0.5),
            cr(-1.0),
            cr(0.3),
            cr(0.0),
            cr(0.0),
            cr(0.3),
            cr(2.0),
            ci(1.0),
            cr(0.2),
            cr(0.0),
            ci(-1.0),
            cr(0.5),
        );
        assert!(hermiticity_defect(&h) < 1e-15);
        let (vals, vecs) = eigh(&h);
        let reconstructed =
            vecs * Mat4::from_diagonal(&Vec4::from_fn(|i, _| cr(vals[i]))) * vecs.adjoint();
        assert!(max_abs_diff(&reconstructed, &h) < 1e-12);
        assert!(unitarity_defect(&vecs) < 1e-12);
    }
}
