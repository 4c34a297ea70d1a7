//! Singular values and condition numbers of 3×3 matrices.
//!
//! The condition number here is `κ = σ_min / σ_max ∈ [0, 1]`, the reciprocal
//! of the usual 2-norm condition number: 1 means isotropic, 0 singular.

use serde::{Deserialize, Serialize};

use crate::linalg::Mat3;
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditioningReport<T> {
    /// Singular values in descending order.
    pub sigma: [T; 3],
    pub kappa: T,
    /// Set for the zero matrix, where `κ` is reported as 0 by convention.
    pub degenerate: bool,
}

/// Singular values of `m`, descending.
///
/// Cyclic Jacobi iteration on `MᵀM`, carried out implicitly on the columns of
/// `M` (one-sided, Hestenes form) so that small singular values keep full
/// absolute accuracy instead of being recovered from squared quantities.
pub fn singular_values<T: Scalar>(m: &Mat3<T>) -> [T; 3] {
    let mut cols = [m.col(0), m.col(1), m.col(2)];
    let dot = |a: &[T; 3], b: &[T; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];

    let fro2 = m.0.iter().flatten().fold(T::zero(), |acc, &v| acc + v * v);
    if fro2 == T::zero() {
        return [T::zero(); 3];
    }
    let threshold = T::lit(1e-28) * fro2 * fro2;

    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..2 {
            for q in p + 1..3 {
                let g = dot(&cols[p], &cols[q]);
                off = off + g * g;
            }
        }
        if off <= threshold {
            break;
        }
        for p in 0..2 {
            for q in p + 1..3 {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == T::zero() {
                    continue;
                }
                let zeta = (beta - alpha) / (T::two() * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for r in 0..3 {
                    let xp = cols[p][r];
                    let xq = cols[q][r];
                    cols[p][r] = c * xp - s * xq;
                    cols[q][r] = s * xp + c * xq;
                }
            }
        }
    }

    let mut sigma = cols.map(|c| dot(&c, &c).max(T::zero()).sqrt());
    sigma.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sigma
}

pub fn conditioning_report<T: Scalar>(m: &Mat3<T>) -> ConditioningReport<T> {
    let sigma = singular_values(m);
    if sigma[0] == T::zero() {
        return ConditioningReport { sigma, kappa: T::zero(), degenerate: true };
    }
    let kappa = (sigma[2] / sigma[0]).min(T::one()).max(T::zero());
    ConditioningReport { sigma, kappa, degenerate: false }
}

/// `σ_min / σ_max`; 0 for rank-deficient matrices and for the zero matrix.
pub fn condition_number<T: Scalar>(m: &Mat3<T>) -> T {
    conditioning_report(m).kappa
}
