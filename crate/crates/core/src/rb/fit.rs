//! Weighted nonlinear least-squares fit of the zero-th order decay model
//! `⟨F⟩ = A·p^m + B`.
//!
//! A small Levenberg–Marquardt loop with box constraints
//! `A ∈ [0, 1.5]`, `B ∈ [0, 1]`, `p ∈ [0, 1]`; points are weighted by
//! `1/σ²` when standard errors are available and uniformly otherwise.

use nalgebra::{Matrix3, Vector3};

use super::{DecayCurve, RbError};

const MAX_ITER: usize = 500;
const FLAT_TOL: f64 = 1e-9;

/// Result of fitting `A·p^m + B`, or an exact prediction in the same shape.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DecayFit {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub a_std_err: f64,
    pub b_std_err: f64,
    pub p_std_err: f64,
    /// Weighted residual norm `sqrt(Σ w·(F − model)²)`.
    pub residual: f64,
    pub converged: bool,
    /// Set for curves that are flat at 1 (nothing to fit; `p = 1` exactly).
    pub degenerate: bool,
}

impl DecayFit {
    /// Exact model parameters with no statistical uncertainty.
    pub fn exact(a: f64, b: f64, p: f64) -> Self {
        Self {
            a,
            b,
            p,
            a_std_err: 0.0,
            b_std_err: 0.0,
            p_std_err: 0.0,
            residual: 0.0,
            converged: true,
            degenerate: false,
        }
    }

    pub fn evaluate(&self, m: usize) -> f64 {
        self.a * self.p.powi(m as i32) + self.b
    }
}

fn clamp_params(theta: &mut Vector3<f64>) {
    theta[0] = theta[0].clamp(0.0, 1.5);
    theta[1] = theta[1].clamp(0.0, 1.0);
    theta[2] = theta[2].clamp(0.0, 1.0);
}

fn model(theta: &Vector3<f64>, m: f64) -> f64 {
    theta[0] * theta[2].powf(m) + theta[1]
}

fn jacobian_row(theta: &Vector3<f64>, m: f64) -> Vector3<f64> {
    let p = theta[2];
    let dp = if m >= 1.0 {
        theta[0] * m * p.powf(m - 1.0)
    } else {
        0.0
    };
    Vector3::new(p.powf(m), 1.0, dp)
}

fn cost(theta: &Vector3<f64>, ms: &[f64], fs: &[f64], w: &[f64]) -> f64 {
    ms.iter()
        .zip(fs)
        .zip(w)
        .map(|((&m, &f), &wi)| {
            let r = f - model(theta, m);
            wi * r * r
        })
        .sum()
}

/// Fit the decay model to an averaged curve.
///
/// Initialization follows the standard recipe: `B₀ = 1/d`,
/// `A₀ = F(m_min) − B₀`, and `p₀` from a two-point log-ratio. Flat-at-1
/// curves short-circuit to `p = 1` with zero residual and the `degenerate`
/// flag set; non-convergence is reported through the `converged` flag with
/// the best iterate returned.
pub fn fit_decay(curve: &DecayCurve) -> Result<DecayFit, RbError> {
    let n = curve.m_values.len();
    if n < 3 {
        return Err(RbError::InvalidConfig(format!(
            "decay fit needs at least 3 distinct sequence lengths, got {n}"
        )));
    }
    let ms: Vec<f64> = curve.m_values.iter().map(|&m| m as f64).collect();
    let fs: Vec<f64> = curve.mean_fidelity.clone();

    if fs.iter().all(|f| (f - 1.0).abs() < FLAT_TOL) {
        return Ok(DecayFit {
            a: 0.75,
            b: 0.25,
            p: 1.0,
            a_std_err: 0.0,
            b_std_err: 0.0,
            p_std_err: 0.0,
            residual: 0.0,
            converged: true,
            degenerate: true,
        });
    }

    let weighted = curve.std_err.iter().all(|&s| s > 0.0);
    let w: Vec<f64> = if weighted {
        curve.std_err.iter().map(|&s| 1.0 / (s * s)).collect()
    } else {
        vec![1.0; n]
    };

    // Initialization.
    let b0 = 0.25;
    let a0 = (fs[0] - b0).clamp(0.0, 1.5);
    let mut p0 = 0.9;
    let head = fs[0] - b0;
    if head > 1e-6 {
        if let Some(j) = (1..n).rev().find(|&j| fs[j] - b0 > 1e-6) {
            let ratio = (fs[j] - b0) / head;
            let span = ms[j] - ms[0];
            if ratio > 0.0 && span > 0.0 {
                p0 = ratio.powf(1.0 / span).clamp(1e-3, 1.0);
            }
        }
    }
    let mut theta = Vector3::new(a0.max(1e-6), b0, p0);
    clamp_params(&mut theta);

    let mut lambda = 1e-3;
    let mut current_cost = cost(&theta, &ms, &fs, &w);
    let mut converged = false;
    for _ in 0..MAX_ITER {
        // Normal equations for the weighted Gauss-Newton step.
        let mut jtj = Matrix3::<f64>::zeros();
        let mut jtr = Vector3::<f64>::zeros();
        for ((&m, &f), &wi) in ms.iter().zip(&fs).zip(&w) {
            let j = jacobian_row(&theta, m);
            let r = f - model(&theta, m);
            jtj += j * j.transpose() * wi;
            jtr += j * (wi * r);
        }
        // The Gauss-Newton decrement has cost units, so this criterion is
        // insensitive to the weighting scale.
        let mut regularized = jtj;
        for k in 0..3 {
            regularized[(k, k)] += 1e-12 * jtj[(k, k)].max(1.0);
        }
        if let Some(inv) = regularized.try_inverse() {
            let decrement = jtr.dot(&(inv * jtr)).abs();
            if decrement <= 1e-12 * (current_cost + 1e-12) {
                converged = true;
                break;
            }
        }
        let mut improved = false;
        for _ in 0..60 {
            let mut damped = jtj;
            for k in 0..3 {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(inv) = damped.try_inverse() else {
                lambda *= 4.0;
                continue;
            };
            let step = inv * jtr;
            let mut candidate = theta + step;
            clamp_params(&mut candidate);
            let candidate_cost = cost(&candidate, &ms, &fs, &w);
            if candidate_cost < current_cost {
                let rel_drop = (current_cost - candidate_cost) / current_cost.max(1e-300);
                let small_step = (candidate - theta).amax() < 1e-13;
                theta = candidate;
                current_cost = candidate_cost;
                lambda = (lambda / 3.0).max(1e-14);
                improved = true;
                if rel_drop < 1e-14 || small_step {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
            if lambda > 1e14 {
                break;
            }
        }
        if !improved {
            // Damping blew up without finding a descent step: the iterate is
            // a numerical stationary point (possibly on the box boundary).
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }

    // Covariance from the final weighted Jacobian. With 1/σ² weights this is
    // (JᵀWJ)⁻¹; for uniform weights it is scaled by the residual variance.
    let mut jtj = Matrix3::<f64>::zeros();
    for (&m, &wi) in ms.iter().zip(&w) {
        let j = jacobian_row(&theta, m);
        jtj += j * j.transpose() * wi;
    }
    let scale = if weighted {
        1.0
    } else {
        current_cost / (n.saturating_sub(3).max(1)) as f64
    };
    let (sa, sb, sp) = match jtj.try_inverse() {
        Some(cov) => (
            (cov[(0, 0)] * scale).max(0.0).sqrt(),
            (cov[(1, 1)] * scale).max(0.0).sqrt(),
            (cov[(2, 2)] * scale).max(0.0).sqrt(),
        ),
        None => (f64::NAN, f64::NAN, f64::NAN),
    };

    Ok(DecayFit {
        a: theta[0],
        b: theta[1],
        p: theta[2],
        a_std_err: sa,
        b_std_err: sb,
        p_std_err: sp,
        residual: current_cost.sqrt(),
        converged,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use rand_distr::{Distribution, Normal};

    fn curve_from(ms: &[usize], f: impl Fn(usize) -> f64, se: f64) -> DecayCurve {
        DecayCurve {
            m_values: ms.to_vec(),
            mean_fidelity: ms.iter().map(|&m| f(m)).collect(),
            std_err: vec![se; ms.len()],
            counts: vec![1000; ms.len()],
        }
    }

    #[test]
    fn noiseless_roundtrip() {
        let ms = crate::rb::geometric_m_grid(200, 12);
        let curve = curve_from(&ms, |m| 0.75 * 0.9f64.powi(m as i32) + 0.25, 0.0);
        let fit = fit_decay(&curve).unwrap();
        assert!(fit.converged);
        assert!(!fit.degenerate);
        assert_relative_eq!(fit.a, 0.75, epsilon = 1e-6);
        assert_relative_eq!(fit.b, 0.25, epsilon = 1e-6);
        assert_relative_eq!(fit.p, 0.9, epsilon = 1e-6);
    }

    #[test]
    fn flat_curve_is_degenerate() {
        let ms = [1usize, 5, 10, 20];
        let curve = curve_from(&ms, |_| 1.0, 0.0);
        let fit = fit_decay(&curve).unwrap();
        assert!(fit.degenerate);
        assert_eq!(fit.p, 1.0);
        assert_eq!(fit.residual, 0.0);
    }

    #[test]
    fn needs_three_points() {
        let ms = [1usize, 5];
        let curve = curve_from(&ms, |_| 0.5, 0.0);
        assert!(fit_decay(&curve).is_err());
    }

    #[test]
    fn noisy_fit_recovers_within_errors() {
        let ms = crate::rb::geometric_m_grid(200, 12);
        let sigma = 0.005;
        let normal = Normal::new(0.0, sigma).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let mut hits = 0;
        let trials = 50;
        for _ in 0..trials {
            let curve = DecayCurve {
                m_values: ms.clone(),
                mean_fidelity: ms
                    .iter()
                    .map(|&m| 0.72 * 0.93f64.powi(m as i32) + 0.25 + normal.sample(&mut rng))
                    .collect(),
                std_err: vec![sigma; ms.len()],
                counts: vec![1000; ms.len()],
            };
            let fit = fit_decay(&curve).unwrap();
            assert!(fit.converged);
            if (fit.p - 0.93).abs() <= 3.0 * fit.p_std_err {
                hits += 1;
            }
        }
        assert!(hits * 100 >= trials * 90, "only {hits}/{trials} within 3σ");
    }

    #[test]
    fn weighted_points_dominate() {
        // A single wildly-off point with a huge error bar should not move
        // the fit.
        let ms = crate::rb::geometric_m_grid(100, 10);
        let mut curve = curve_from(&ms, |m| 0.7 * 0.95f64.powi(m as i32) + 0.25, 0.001);
        curve.mean_fidelity[4] += 0.3;
        curve.std_err[4] = 10.0;
        let fit = fit_decay(&curve).unwrap();
        assert_relative_eq!(fit.p, 0.95, epsilon = 1e-3);
    }
}
