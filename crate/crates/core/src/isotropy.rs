//! Characteristic length, isotropy residuals and the centered isotropic
//! configurations.
//!
//! At the centered pose with `b_i = r·n_i` the three legs are images of one
//! another under the 2π/3 rotation, so `l_iᵀl_j = -l²/2` and `k_i = r·m`.
//! Zeroing the off-diagonal terms of `K̄K̄ᵀ` then gives
//! `L = √2·r·sin γ` with `sin γ = |m|/l`.

use serde::{Deserialize, Serialize};

use crate::conditioning::condition_number;
use crate::error::{Error, Result};
use crate::geometry::{inverse_kinematics, Configuration, Geometry, Pose, WorkingMode};
use crate::kinetostatics::build_matrices;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsotropyReport<T> {
    /// Common angle `A_i B_i P`.
    pub gamma: T,
    #[serde(rename = "L")]
    pub char_len: T,
    /// `K̄K̄ᵀ = τ²·I`.
    pub tau: T,
    /// Three diagonal deviations from `τ²`, then the three off-diagonal terms
    /// for leg pairs (1,2), (1,3), (2,3).
    pub residuals: [T; 6],
}

/// `L = √2·r·sin γ`.
pub fn characteristic_length<T: Scalar>(r: T, gamma: T) -> Result<T> {
    let s = gamma.sin();
    if s <= T::lit(1e-12) {
        return Err(Error::DegenerateLength { sin_gamma: s.to_f64_lossy() });
    }
    Ok(T::SQRT_2() * r * s)
}

/// `L` from zeroing the (1,2) off-diagonal of `K̄K̄ᵀ`: `√(-k_1k_2 / l_1ᵀl_2)`.
pub fn char_length_from_legs<T: Scalar>(config: &Configuration<T>) -> Result<T> {
    let [l1, l2, _] = config.legs;
    let num = -l1.k * l2.k;
    let den = l1.lvec.dot(l2.lvec);
    let v = num / den;
    if !(v > T::zero()) || !v.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "no real characteristic length: -k1*k2 = {num}, l1.l2 = {den}"
        )));
    }
    Ok(v.sqrt())
}

fn diag_and_offdiag<T: Scalar>(config: &Configuration<T>, char_len: T) -> Result<([T; 3], [T; 3])> {
    if let Some(i) = config.legs.iter().position(|l| l.m == T::zero()) {
        return Err(Error::SerialSingular { margin: config.legs[i].m.abs().to_f64_lossy() });
    }
    let l2 = char_len * char_len;
    let legs = &config.legs;
    let diag = [0, 1, 2].map(|i| {
        let g = &legs[i];
        (g.lvec.norm_sq() + g.k * g.k / l2) / (g.m * g.m)
    });
    let off = [(0, 1), (0, 2), (1, 2)].map(|(i, j)| {
        let (a, b) = (&legs[i], &legs[j]);
        (a.lvec.dot(b.lvec) + a.k * b.k / l2) / (a.m * b.m)
    });
    Ok((diag, off))
}

/// Deviations of `K̄K̄ᵀ` from `τ²·I`, with `τ²` the mean diagonal term.
pub fn isotropy_residuals<T: Scalar>(config: &Configuration<T>, char_len: T) -> Result<[T; 6]> {
    let (diag, off) = diag_and_offdiag(config, char_len)?;
    let tau2 = (diag[0] + diag[1] + diag[2]) / T::lit(3.0);
    Ok([diag[0] - tau2, diag[1] - tau2, diag[2] - tau2, off[0], off[1], off[2]])
}

/// Equal-leg conditions that any isotropic posture of this architecture satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryConditions {
    pub equal_leg_lengths: bool,
    pub equal_platform_radii: bool,
    pub equal_leg_dot_products: bool,
    pub equal_branch_products: bool,
}

impl SymmetryConditions {
    pub fn all(&self) -> bool {
        self.equal_leg_lengths
            && self.equal_platform_radii
            && self.equal_leg_dot_products
            && self.equal_branch_products
    }
}

pub fn symmetry_conditions<T: Scalar>(config: &Configuration<T>, rel_tol: T) -> SymmetryConditions {
    let p = config.pose.position();
    let legs = &config.legs;
    let all_eq = |v: [T; 3]| {
        let scale = v.iter().fold(T::zero(), |a, x| a.max(x.abs())).max(T::min_positive_value());
        (v[0] - v[1]).abs() <= rel_tol * scale
            && (v[0] - v[2]).abs() <= rel_tol * scale
            && (v[1] - v[2]).abs() <= rel_tol * scale
    };
    let pairs = [(0, 1), (1, 2), (0, 2)];
    SymmetryConditions {
        equal_leg_lengths: all_eq(legs.map(|l| l.lvec.norm())),
        equal_platform_radii: all_eq(legs.map(|l| (p - l.b).norm())),
        equal_leg_dot_products: all_eq(pairs.map(|(i, j)| legs[i].lvec.dot(legs[j].lvec))),
        equal_branch_products: all_eq(pairs.map(|(i, j)| legs[i].m * legs[j].m)),
    }
}

/// Centered configuration with `b_i = r·n_i`, isotropic for the characteristic
/// length it reports. Only working modes 1 and 5 admit it.
pub fn symmetric_isotropic_config<T: Scalar>(
    geometry: &Geometry<T>,
    mode: WorkingMode,
) -> Result<(Configuration<T>, IsotropyReport<T>)> {
    if mode.index() != 1 && mode.index() != 5 {
        return Err(Error::InvalidArgument(format!(
            "the centered isotropic configuration exists in working modes 1 and 5, not {mode}"
        )));
    }
    let gap = (geometry.base_radius - geometry.platform_radius).abs();
    if geometry.leg_length <= gap {
        return Err(Error::NoSymmetricConfig {
            l: geometry.leg_length.to_f64_lossy(),
            gap: gap.to_f64_lossy(),
        });
    }
    // B_1 along n_1 = (0, -1)
    let theta = T::lit(1.5) * T::PI() - geometry.phase;
    let config = inverse_kinematics(geometry, &Pose::new(T::zero(), T::zero(), theta), mode)?;

    let gamma = config.legs[0].gamma;
    let char_len = characteristic_length(geometry.platform_radius, gamma)?;
    let (diag, _) = diag_and_offdiag(&config, char_len)?;
    let tau2 = (diag[0] + diag[1] + diag[2]) / T::lit(3.0);
    let residuals = isotropy_residuals(&config, char_len)?;

    let tol = T::lit(1e-9).max(T::epsilon() * T::lit(1e3));
    let conds = symmetry_conditions(&config, T::lit(1e-12).max(T::epsilon() * T::lit(64.0)));
    let abar = build_matrices(&config, char_len)?.abar;
    let worst = residuals.iter().fold(T::zero(), |a, r| a.max(r.abs()));
    if !conds.all() || worst > tol * tau2.max(T::one()) || condition_number(&abar) < T::one() - tol {
        return Err(Error::InvalidArgument(format!(
            "centered configuration failed isotropy verification (max residual {worst})"
        )));
    }

    Ok((config, IsotropyReport { gamma, char_len, tau: tau2.sqrt(), residuals }))
}

/// `(every leg has e_iᵀE·l_i ≈ 0, r ≈ R/2)`: the two conditions for the
/// isotropic posture furthest from serial singularities.
pub fn max_serial_distance_check<T: Scalar>(geometry: &Geometry<T>, config: &Configuration<T>) -> (bool, bool) {
    let legs_ok = config.legs.iter().zip(&geometry.rails).all(|(leg, rail)| {
        rail.dir.dot(leg.lvec.perp()).abs() <= T::lit(1e-9) * geometry.leg_length
    });
    let half = geometry.base_radius / T::two();
    let radius_ok = (geometry.platform_radius - half).abs() <= T::lit(1e-12) * geometry.base_radius;
    (legs_ok, radius_ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LegSolution;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn char_length_values() {
        assert!(close(characteristic_length(1.0, PI / 2.0).unwrap(), 2f64.sqrt(), 1e-15));
        assert!(close(characteristic_length(1.0, 2.0 * PI / 3.0).unwrap(), 6f64.sqrt() / 2.0, 1e-15));
        assert!(matches!(characteristic_length(1.0, 0.0), Err(Error::DegenerateLength { .. })));
    }

    #[test]
    fn anchor_isotropic_config() {
        let g = Geometry::new(2.0, 1.0, 2.0, 0.0).unwrap();
        let (c, rep) = symmetric_isotropic_config(&g, WorkingMode::new(1).unwrap()).unwrap();
        assert!(close(c.pose.theta, 1.5 * PI, 1e-15));
        assert!(c.legs.iter().all(|l| close(l.rho, 3f64.sqrt(), 1e-14)));
        assert!(close(rep.gamma, 2.0 * PI / 3.0, 1e-14));
        assert!(close(rep.char_len, 6f64.sqrt() / 2.0, 1e-14));
        assert!(close(rep.tau, 2f64.sqrt(), 1e-14));
        assert!(rep.residuals.iter().all(|r| r.abs() < 1e-12));

        let (c5, rep5) = symmetric_isotropic_config(&g, WorkingMode::new(5).unwrap()).unwrap();
        assert!(c5.legs.iter().all(|l| close(l.rho, -(3f64.sqrt()), 1e-14)));
        assert!(close(rep5.gamma, rep.gamma, 1e-14) && close(rep5.char_len, rep.char_len, 1e-14));
    }

    #[test]
    fn phase_shifts_orientation() {
        let g = Geometry::new(2.0, 1.0, 2.0, 0.4).unwrap();
        let (c, _) = symmetric_isotropic_config(&g, WorkingMode::new(1).unwrap()).unwrap();
        assert!(close(c.pose.theta, 1.5 * PI - 0.4, 1e-15));
    }

    #[test]
    fn no_symmetric_config() {
        let g = Geometry::new(2.0, 1.0, 0.5, 0.0).unwrap();
        assert!(matches!(
            symmetric_isotropic_config(&g, WorkingMode::new(1).unwrap()),
            Err(Error::NoSymmetricConfig { .. })
        ));
        let g = Geometry::new(2.0, 1.0, 2.0, 0.0).unwrap();
        assert!(symmetric_isotropic_config(&g, WorkingMode::new(2).unwrap()).is_err());
    }

    #[test]
    fn residuals_at_wrong_length() {
        let g = Geometry::new(2.0, 1.0, 2.0, 0.0).unwrap();
        let (c, _) = symmetric_isotropic_config(&g, WorkingMode::new(1).unwrap()).unwrap();
        let r = isotropy_residuals(&c, 1.0).unwrap();
        // (l1·l2 + k1k2)/(m1 m2) = (-2 + 3)/3
        assert!(close(r[3], 1.0 / 3.0, 1e-14));
        assert_eq!(r, isotropy_residuals(&c, 1.0).unwrap());
        assert!(close(char_length_from_legs(&c).unwrap(), 6f64.sqrt() / 2.0, 1e-14));
    }

    #[test]
    fn residuals_reject_serial_boundary() {
        let g = Geometry::new(2.0, 1.0, 2.0, 0.0).unwrap();
        let p = g.rails[1].normal.scale(-1.0);
        let c = inverse_kinematics(&g, &Pose::new(p.x, p.y, 1.5 * PI), WorkingMode::new(1).unwrap())
            .unwrap();
        assert!(matches!(isotropy_residuals(&c, 1.0), Err(Error::SerialSingular { .. })));
    }

    #[test]
    fn serial_distance_flags() {
        let g = Geometry::new(2.0, 1.0, 2.0, 0.0).unwrap();
        let (c, _) = symmetric_isotropic_config(&g, WorkingMode::new(1).unwrap()).unwrap();
        assert_eq!(max_serial_distance_check(&g, &c), (false, true));
        assert!(close(g.rails[0].dir.dot(c.legs[0].lvec.perp()), 1.0, 1e-14));

        let g2 = Geometry::new(2.0, 0.9, 2.0, 0.0).unwrap();
        assert!(!max_serial_distance_check(&g2, &c).1);

        // hand-built legs running along their rails
        let mut along = c;
        for (leg, rail) in along.legs.iter_mut().zip(&g.rails) {
            *leg = LegSolution { lvec: rail.dir.scale(2.0), ..*leg };
        }
        assert!(max_serial_distance_check(&g, &along).0);
    }

    #[test]
    fn generic_f32_anchor() {
        let g = Geometry::<f32>::new(2.0, 1.0, 2.0, 0.0).unwrap();
        let (_, rep) = symmetric_isotropic_config(&g, WorkingMode::new(1).unwrap()).unwrap();
        assert!((rep.char_len - 6f32.sqrt() / 2.0).abs() < 1e-6);
        assert!((rep.tau - 2f32.sqrt()).abs() < 1e-5);
    }
}
