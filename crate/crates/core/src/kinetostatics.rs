//! Direct- and inverse-kinematics matrices, velocity maps and singularity
//! classification.
//!
//! The velocity relation is `A·t = B·ρ̇` with twist `t = [ṗ; θ̇]`. Row `i` of
//! `A` is `(l_iᵀ, -k_i)`; `B = diag(m_i)`. The normalized `Ā` divides the
//! orientation column by a characteristic length `L`, and `K̄ = B⁻¹Ā`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Configuration;
use crate::linalg::Mat3;
use crate::scalar::Scalar;

/// Serial singularity threshold on `min|m_i|`, relative to `l`.
pub const SERIAL_TOL: f64 = 1e-9;
/// Parallel singularity threshold on `|det A| / ∏‖row_i(A)‖`.
pub const PARALLEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinetostaticMatrices<T> {
    pub a: Mat3<T>,
    pub b: Mat3<T>,
    pub abar: Mat3<T>,
    /// `B⁻¹Ā`; absent when some `m_i = 0`.
    pub kbar: Option<Mat3<T>>,
    /// `A⁻¹B`; absent at parallel singularities.
    pub j: Option<Mat3<T>>,
    /// `B⁻¹A`; absent at serial singularities.
    pub k: Option<Mat3<T>>,
    pub det_a: T,
    pub det_b: T,
    /// Characteristic length used for `Ā` and `K̄`.
    pub char_len: T,
    pub leg_length: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Twist<T> {
    pub xdot: T,
    pub ydot: T,
    pub thetadot: T,
}

impl<T: Scalar> Twist<T> {
    pub fn new(xdot: T, ydot: T, thetadot: T) -> Self {
        Self { xdot, ydot, thetadot }
    }

    pub fn to_array(self) -> [T; 3] {
        [self.xdot, self.ydot, self.thetadot]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointRates<T> {
    pub rhodot: [T; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularityKind {
    Regular,
    Serial,
    Parallel,
    SerialAndParallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularityClass<T> {
    pub kind: SingularityKind,
    /// `min_i |m_i|` (length).
    pub serial_margin: T,
    /// `|det A| / ∏_i ‖row_i(A)‖` (dimensionless).
    pub parallel_margin: T,
}

impl<T: Scalar> KinetostaticMatrices<T> {
    pub fn serial_margin(&self) -> T {
        (0..3).fold(T::infinity(), |acc, i| acc.min(self.b[(i, i)].abs()))
    }

    pub fn parallel_margin(&self) -> T {
        let norms = (0..3).fold(T::one(), |acc, i| acc * self.a.row_norm(i));
        if norms == T::zero() {
            return T::zero();
        }
        self.det_a.abs() / norms
    }

    fn serially_regular(&self) -> bool {
        self.serial_margin() > T::lit(SERIAL_TOL) * self.leg_length
    }

    fn parallelly_regular(&self) -> bool {
        self.parallel_margin() > T::lit(PARALLEL_TOL)
    }
}

pub fn build_matrices<T: Scalar>(config: &Configuration<T>, char_len: T) -> Result<KinetostaticMatrices<T>> {
    if !(char_len > T::zero()) || !char_len.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "characteristic length must be positive, got {char_len}"
        )));
    }
    let mut a = Mat3::zeros();
    let mut abar = Mat3::zeros();
    let mut m = [T::zero(); 3];
    for (i, leg) in config.legs.iter().enumerate() {
        a.0[i] = [leg.lvec.x, leg.lvec.y, -leg.k];
        abar.0[i] = [leg.lvec.x, leg.lvec.y, -leg.k / char_len];
        m[i] = leg.m;
    }
    let b = Mat3::diag(m);
    let det_a = a.det();
    let det_b = m[0] * m[1] * m[2];

    let kbar = if m.iter().all(|&mi| mi != T::zero()) {
        let mut kb = abar;
        for (i, row) in kb.0.iter_mut().enumerate() {
            for v in row.iter_mut() {
                *v = *v / m[i];
            }
        }
        Some(kb)
    } else {
        None
    };

    let mut mats = KinetostaticMatrices {
        a,
        b,
        abar,
        kbar,
        j: None,
        k: None,
        det_a,
        det_b,
        char_len,
        leg_length: config.geometry.leg_length,
    };

    if mats.serially_regular() {
        let mut k = a;
        for (i, row) in k.0.iter_mut().enumerate() {
            for v in row.iter_mut() {
                *v = *v / m[i];
            }
        }
        mats.k = Some(k);
    }
    if mats.parallelly_regular() {
        // A⁻¹B = adj(A)·B / det A; right-multiplying by diag scales columns
        let adj = a.adjugate();
        let mut j = Mat3::zeros();
        for r in 0..3 {
            for c in 0..3 {
                j.0[r][c] = adj.0[r][c] * m[c] / det_a;
            }
        }
        mats.j = Some(j);
    }
    Ok(mats)
}

/// Solves `A·t = B·ρ̇` for the twist.
pub fn forward_rate_map<T: Scalar>(mat: &KinetostaticMatrices<T>, rates: &JointRates<T>) -> Result<Twist<T>> {
    if !mat.parallelly_regular() {
        return Err(Error::ParallelSingular { margin: mat.parallel_margin().to_f64_lossy() });
    }
    let rhs = mat.b.mul_vec(rates.rhodot);
    let num = mat.a.adjugate().mul_vec(rhs);
    Ok(Twist::new(num[0] / mat.det_a, num[1] / mat.det_a, num[2] / mat.det_a))
}

/// `ρ̇ = B⁻¹A·t`.
pub fn inverse_rate_map<T: Scalar>(mat: &KinetostaticMatrices<T>, twist: &Twist<T>) -> Result<JointRates<T>> {
    if !mat.serially_regular() {
        return Err(Error::SerialSingular { margin: mat.serial_margin().to_f64_lossy() });
    }
    let at = mat.a.mul_vec(twist.to_array());
    let mut rhodot = [T::zero(); 3];
    for i in 0..3 {
        rhodot[i] = at[i] / mat.b[(i, i)];
    }
    Ok(JointRates { rhodot })
}

pub fn classify_singularity<T: Scalar>(
    mat: &KinetostaticMatrices<T>,
    serial_tol: T,
    parallel_tol: T,
) -> SingularityClass<T> {
    let serial_margin = mat.serial_margin();
    let parallel_margin = mat.parallel_margin();
    let serial = serial_margin <= serial_tol * mat.leg_length;
    let parallel = parallel_margin <= parallel_tol;
    let kind = match (serial, parallel) {
        (false, false) => SingularityKind::Regular,
        (true, false) => SingularityKind::Serial,
        (false, true) => SingularityKind::Parallel,
        (true, true) => SingularityKind::SerialAndParallel,
    };
    SingularityClass { kind, serial_margin, parallel_margin }
}

/// [`classify_singularity`] with the default tolerances.
pub fn classify<T: Scalar>(mat: &KinetostaticMatrices<T>) -> SingularityClass<T> {
    classify_singularity(mat, T::lit(SERIAL_TOL), T::lit(PARALLEL_TOL))
}
