//! Manipulator parameters, frame conventions and closed-form inverse kinematics.
//!
//! Rail `i` (1-based) has direction `e_i = (cos α_i, sin α_i)` with
//! `α_i = π + (i-1)·2π/3`, and offset normal `n_i = E·e_i`. The rail is the
//! line `{R·n_i + t·e_i}`, tangent to the circle of radius `R` about the base
//! origin; rail 1 is the horizontal line `y = -R` traversed towards `-x`.
//! Platform anchor `B_i` sits at `p + r·(cos φ_i, sin φ_i)` with
//! `φ_i = θ + δ + (i-1)·2π/3`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vec2;
use crate::scalar::Scalar;

/// `|disc| ≤ BOUNDARY_CLAMP·l²` counts as a leg exactly at its serial boundary.
pub const BOUNDARY_CLAMP: f64 = 1e-12;

/// One actuated rail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rail<T> {
    pub alpha: T,
    pub dir: Vec2<T>,
    pub normal: Vec2<T>,
}

/// Symmetric 3-PRR architecture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry<T> {
    /// Inscribed radius `R` of the rail triangle.
    pub base_radius: T,
    /// Platform circumradius `r = |B_i P|`.
    pub platform_radius: T,
    /// Leg length `l = |A_i B_i|`.
    pub leg_length: T,
    /// Angular phase `δ` of `B_1` relative to the platform orientation.
    pub phase: T,
    pub rails: [Rail<T>; 3],
}

impl<T: Scalar> Geometry<T> {
    pub fn new(base_radius: T, platform_radius: T, leg_length: T, phase: T) -> Result<Self> {
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !positive(base_radius) {
            return Err(Error::InvalidGeometry(format!("R must be positive, got {base_radius}")));
        }
        if !positive(platform_radius) {
            return Err(Error::InvalidGeometry(format!(
                "r must be positive, got {platform_radius}"
            )));
        }
        if !positive(leg_length) {
            return Err(Error::InvalidGeometry(format!("l must be positive, got {leg_length}")));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidGeometry("delta must be finite".into()));
        }
        let rails = [0, 1, 2].map(|i| {
            let alpha = T::PI() + T::from_usize_lossy(i) * third_turn::<T>();
            let dir = Vec2::polar(alpha);
            Rail { alpha, dir, normal: dir.perp() }
        });
        Ok(Self { base_radius, platform_radius, leg_length, phase, rails })
    }

    /// Point of rail `i` (0-based) at actuated displacement `rho`.
    pub fn rail_point(&self, i: usize, rho: T) -> Vec2<T> {
        let rail = &self.rails[i];
        rail.normal.scale(self.base_radius) + rail.dir.scale(rho)
    }

    /// Half-width of an origin-centred square that provably contains every
    /// reachable position of `P`.
    ///
    /// Each anchor must lie within `l` of its rail, so `P` satisfies
    /// `R-l-r ≤ n_i·p ≤ R+l+r` for all three rails; the result is the largest
    /// coordinate magnitude over the vertices of that polygon.
    pub fn reach_half_width(&self) -> T {
        let hi = self.base_radius + self.leg_length + self.platform_radius;
        let lo = self.base_radius - self.leg_length - self.platform_radius;
        // constraints written as  c·p ≤ h
        let cons: Vec<(Vec2<T>, T)> = self
            .rails
            .iter()
            .flat_map(|rail| [(rail.normal, hi), (-rail.normal, -lo)])
            .collect();
        let slack = T::lit(1e-9) * hi;
        let mut best = T::zero();
        for (i, &(c1, h1)) in cons.iter().enumerate() {
            for &(c2, h2) in &cons[i + 1..] {
                let d = c1.cross(c2);
                if d.abs() <= T::lit(1e-12) {
                    continue;
                }
                let v = Vec2::new((h1 * c2.y - h2 * c1.y) / d, (c1.x * h2 - c2.x * h1) / d);
                if cons.iter().all(|&(c, h)| c.dot(v) <= h + slack) {
                    best = best.max(v.x.abs()).max(v.y.abs());
                }
            }
        }
        best
    }
}

pub(crate) fn third_turn<T: Scalar>() -> T {
    T::TAU() / T::lit(3.0)
}

/// Pose of the operation point `P` and platform orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose<T> {
    pub x: T,
    pub y: T,
    /// Orientation in `[0, 2π)`.
    pub theta: T,
}

impl<T: Scalar> Pose<T> {
    pub fn new(x: T, y: T, theta: T) -> Self {
        Self { x, y, theta: theta.wrap_angle() }
    }

    pub fn position(&self) -> Vec2<T> {
        Vec2::new(self.x, self.y)
    }
}

/// Working mode: one inverse-kinematics branch per leg, identified by the
/// sign pattern of `m_i = (b_i - a_i)·e_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct WorkingMode(u8);

const MODE_TABLE: [[i8; 3]; 8] = [
    [-1, -1, -1],
    [1, -1, -1],
    [-1, 1, -1],
    [-1, -1, 1],
    [1, 1, 1],
    [-1, 1, 1],
    [1, -1, 1],
    [1, 1, -1],
];

impl WorkingMode {
    pub const ALL: [WorkingMode; 8] = [
        WorkingMode(1),
        WorkingMode(2),
        WorkingMode(3),
        WorkingMode(4),
        WorkingMode(5),
        WorkingMode(6),
        WorkingMode(7),
        WorkingMode(8),
    ];

    pub fn new(index: i64) -> Result<Self> {
        if (1..=8).contains(&index) {
            Ok(WorkingMode(index as u8))
        } else {
            Err(Error::InvalidMode(index))
        }
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn signs(self) -> [i8; 3] {
        MODE_TABLE[self.0 as usize - 1]
    }

    pub fn from_signs(signs: [i8; 3]) -> Result<Self> {
        MODE_TABLE
            .iter()
            .position(|s| *s == signs)
            .map(|i| WorkingMode(i as u8 + 1))
            .ok_or_else(|| Error::InvalidArgument(format!("sign triple {signs:?} is not in {{-1,+1}}^3")))
    }

    /// Mode with every branch flipped (1↔5, 2↔6, 3↔7, 4↔8).
    pub fn complement(self) -> Self {
        let s = self.signs();
        Self::from_signs([-s[0], -s[1], -s[2]]).expect("table is closed under negation")
    }

    /// Mode reached by rotating the whole mechanism by +2π/3: leg `i`'s branch
    /// moves to leg `i+1` (2→3→4, 6→7→8).
    pub fn shifted(self) -> Self {
        let s = self.signs();
        Self::from_signs([s[2], s[0], s[1]]).expect("table is closed under rotation")
    }
}

impl TryFrom<u8> for WorkingMode {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        WorkingMode::new(v as i64)
    }
}

impl From<WorkingMode> for u8 {
    fn from(m: WorkingMode) -> u8 {
        m.0
    }
}

impl std::fmt::Display for WorkingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn mode_signs(index: i64) -> Result<[i8; 3]> {
    WorkingMode::new(index).map(WorkingMode::signs)
}

pub fn signs_to_mode(signs: [i8; 3]) -> Result<u8> {
    WorkingMode::from_signs(signs).map(WorkingMode::index)
}

/// Joint-space solution for one leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegSolution<T> {
    /// Actuated displacement `ρ_i` along the rail.
    pub rho: T,
    pub a: Vec2<T>,
    pub b: Vec2<T>,
    /// `l_i = b_i - a_i`.
    pub lvec: Vec2<T>,
    /// `m_i = l_i·e_i`, the diagonal entry of `B`.
    pub m: T,
    /// `k_i = l_i·E(p - b_i)`.
    pub k: T,
    /// Unsigned angle `A_i B_i P` in `[0, π]`.
    pub gamma: T,
    /// Direction angle of `l_i` (passive joint angle).
    pub eta: T,
}

/// A pose solved in a given working mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Configuration<T> {
    pub geometry: Geometry<T>,
    pub pose: Pose<T>,
    pub mode: WorkingMode,
    pub legs: [LegSolution<T>; 3],
}

impl<T: Scalar> Configuration<T> {
    pub fn rho(&self) -> [T; 3] {
        self.legs.map(|l| l.rho)
    }

    pub fn m(&self) -> [T; 3] {
        self.legs.map(|l| l.m)
    }
}

/// Platform anchor points `b_1, b_2, b_3`.
pub fn platform_anchors<T: Scalar>(geometry: &Geometry<T>, pose: &Pose<T>) -> [Vec2<T>; 3] {
    let p = pose.position();
    [0, 1, 2].map(|i| {
        let phi = pose.theta + geometry.phase + T::from_usize_lossy(i) * third_turn::<T>();
        p + Vec2::polar(phi).scale(geometry.platform_radius)
    })
}

/// Per-leg discriminants `l² - dist(b_i, rail_i)²`, before clamping.
pub fn leg_discriminants<T: Scalar>(geometry: &Geometry<T>, pose: &Pose<T>) -> [T; 3] {
    let b = platform_anchors(geometry, pose);
    let l2 = geometry.leg_length * geometry.leg_length;
    [0, 1, 2].map(|i| {
        let off = geometry.rails[i].normal.dot(b[i]) - geometry.base_radius;
        l2 - off * off
    })
}

fn boundary_tol<T: Scalar>(geometry: &Geometry<T>) -> T {
    T::lit(BOUNDARY_CLAMP) * geometry.leg_length * geometry.leg_length
}

/// Whether every leg can reach its rail at this pose (mode-independent).
pub fn is_reachable<T: Scalar>(geometry: &Geometry<T>, pose: &Pose<T>) -> bool {
    let tol = boundary_tol(geometry);
    leg_discriminants(geometry, pose).iter().all(|&d| d >= -tol)
}

/// Closed-form inverse kinematics in a given working mode.
///
/// With `d_i = b_i - R·n_i`, leg `i` closes at
/// `ρ_i = d_i·e_i - ε_i·√disc_i`, `disc_i = l² - (d_i·n_i)²`, which yields
/// `m_i = ε_i·√disc_i`.
pub fn inverse_kinematics<T: Scalar>(
    geometry: &Geometry<T>,
    pose: &Pose<T>,
    mode: WorkingMode,
) -> Result<Configuration<T>> {
    let p = pose.position();
    let b = platform_anchors(geometry, pose);
    let tol = boundary_tol(geometry);
    let signs = mode.signs();
    let mut legs = [LegSolution {
        rho: T::zero(),
        a: Vec2::zero(),
        b: Vec2::zero(),
        lvec: Vec2::zero(),
        m: T::zero(),
        k: T::zero(),
        gamma: T::zero(),
        eta: T::zero(),
    }; 3];

    for i in 0..3 {
        let rail = &geometry.rails[i];
        let d = b[i] - rail.normal.scale(geometry.base_radius);
        let along = d.dot(rail.dir);
        let off = d.dot(rail.normal);
        let disc = geometry.leg_length * geometry.leg_length - off * off;
        if disc < -tol {
            return Err(Error::UnreachablePose {
                leg: i + 1,
                excess: (off.abs() - geometry.leg_length).to_f64_lossy(),
            });
        }
        let root = if disc.abs() <= tol { T::zero() } else { disc.sqrt() };
        let eps = if signs[i] > 0 { T::one() } else { -T::one() };
        let rho = along - eps * root;
        let a = geometry.rail_point(i, rho);
        let lvec = b[i] - a;
        let to_p = p - b[i];
        let k = lvec.dot(to_p.perp());
        // unsigned angle between (a - b) and (p - b)
        let gamma = (-lvec).cross(to_p).abs().atan2((-lvec).dot(to_p));
        legs[i] = LegSolution {
            rho,
            a,
            b: b[i],
            lvec,
            m: eps * root,
            k,
            gamma,
            eta: lvec.angle(),
        };
    }

    Ok(Configuration { geometry: *geometry, pose: *pose, mode, legs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn anchor_geometry() -> Geometry<f64> {
        Geometry::new(2.0, 1.0, 2.0, 0.0).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rail_angles_and_frames() {
        let g = anchor_geometry();
        let deg: Vec<f64> = g.rails.iter().map(|r| r.alpha.to_degrees()).collect();
        assert!(close(deg[0], 180.0, 1e-12));
        assert!(close(deg[1], 300.0, 1e-12));
        assert!(close(deg[2], 420.0, 1e-12) || close(deg[2], 60.0, 1e-12));
        assert!(close(g.rails[0].dir.x, -1.0, 1e-15) && close(g.rails[0].dir.y, 0.0, 1e-15));
        let s3 = 3f64.sqrt();
        let r3 = g.rails[2];
        assert!(close(r3.dir.x, 0.5, 1e-15) && close(r3.dir.y, s3 / 2.0, 1e-15));
        assert!(close(r3.normal.x, -s3 / 2.0, 1e-15) && close(r3.normal.y, 0.5, 1e-15));
        for r in &g.rails {
            assert!(close(r.dir.norm(), 1.0, 1e-15));
            assert!(close(r.normal.norm(), 1.0, 1e-15));
            assert!(close(r.dir.dot(r.normal), 0.0, 1e-15));
        }
        // rail 1 is y = -R
        assert!(close(g.rail_point(0, 5.0).y, -2.0, 1e-15));
    }

    #[test]
    fn invalid_geometry() {
        for (big_r, r, l) in [(0.0, 1.0, 2.0), (2.0, -1.0, 2.0), (2.0, 1.0, 0.0)] {
            assert!(matches!(
                Geometry::new(big_r, r, l, 0.0),
                Err(Error::InvalidGeometry(_))
            ));
        }
    }

    #[test]
    fn anchors() {
        let g = Geometry::new(2.0, 1.0, 2.0, 0.0).unwrap();
        let b = platform_anchors(&g, &Pose::new(0.0, 0.0, 0.0));
        let s3 = 3f64.sqrt();
        let want = [(1.0, 0.0), (-0.5, s3 / 2.0), (-0.5, -s3 / 2.0)];
        for (bi, w) in b.iter().zip(want) {
            assert!(close(bi.x, w.0, 1e-15) && close(bi.y, w.1, 1e-15));
        }
        let b = platform_anchors(&g, &Pose::new(0.0, 0.0, 1.5 * PI));
        assert!(close(b[0].x, 0.0, 1e-15) && close(b[0].y, -1.0, 1e-15));

        let th = 0.7;
        let b0 = platform_anchors(&g, &Pose::new(0.0, 0.0, th));
        let b1 = platform_anchors(&g, &Pose::new(5.0, -3.0, th));
        for i in 0..3 {
            assert!(close(b1[i].x - b0[i].x, 5.0, 1e-14));
            assert!(close(b1[i].y - b0[i].y, -3.0, 1e-14));
        }
        let cx = (b1[0].x + b1[1].x + b1[2].x) / 3.0;
        let cy = (b1[0].y + b1[1].y + b1[2].y) / 3.0;
        assert!(close(cx, 5.0, 1e-14) && close(cy, -3.0, 1e-14));
    }

    #[test]
    fn mode_table() {
        assert_eq!(mode_signs(1).unwrap(), [-1, -1, -1]);
        assert_eq!(mode_signs(5).unwrap(), [1, 1, 1]);
        assert_eq!(mode_signs(2).unwrap(), [1, -1, -1]);
        assert_eq!(mode_signs(3).unwrap(), [-1, 1, -1]);
        assert!(matches!(mode_signs(0), Err(Error::InvalidMode(0))));
        assert!(matches!(mode_signs(9), Err(Error::InvalidMode(9))));
        for i in 1..=8 {
            assert_eq!(signs_to_mode(mode_signs(i).unwrap()).unwrap() as i64, i);
        }
        let m = |i| WorkingMode::new(i).unwrap();
        assert_eq!(m(1).complement(), m(5));
        for (a, b) in [(2, 6), (3, 7), (4, 8)] {
            assert_eq!(m(a).complement(), m(b));
            assert_eq!(m(b).complement(), m(a));
        }
        assert_eq!(m(2).shifted(), m(3));
        assert_eq!(m(3).shifted(), m(4));
        assert_eq!(m(6).shifted(), m(7));
        assert_eq!(m(7).shifted(), m(8));
        assert_eq!(m(1).shifted(), m(1));
        assert_eq!(m(5).shifted(), m(5));
    }

    #[test]
    fn symmetric_ik_anchor() {
        let g = anchor_geometry();
        let s3 = 3f64.sqrt();
        let c = inverse_kinematics(&g, &Pose::new(0.0, 0.0, 1.5 * PI), WorkingMode::new(1).unwrap())
            .unwrap();
        for leg in &c.legs {
            assert!(close(leg.rho, s3, 1e-14));
            assert!(close(leg.m, -s3, 1e-14));
        }
        assert!(close(c.legs[0].a.x, -s3, 1e-14) && close(c.legs[0].a.y, -2.0, 1e-14));
        assert!(close(c.legs[0].b.x, 0.0, 1e-14) && close(c.legs[0].b.y, -1.0, 1e-14));

        let c5 = inverse_kinematics(&g, &Pose::new(0.0, 0.0, 1.5 * PI), WorkingMode::new(5).unwrap())
            .unwrap();
        for leg in &c5.legs {
            assert!(close(leg.rho, -s3, 1e-14));
            assert!(close(leg.m, s3, 1e-14));
        }
    }

    #[test]
    fn unreachable_far_pose() {
        let g = anchor_geometry();
        for mode in WorkingMode::ALL {
            assert!(matches!(
                inverse_kinematics(&g, &Pose::new(10.0, 0.0, 0.0), mode),
                Err(Error::UnreachablePose { .. })
            ));
        }
    }

    #[test]
    fn boundary_leg_has_zero_branch() {
        let g = anchor_geometry();
        // shift P along n_2 until B_2 sits exactly l from rail 2
        let n2 = g.rails[1].normal;
        let p = n2.scale(-1.0);
        let c = inverse_kinematics(&g, &Pose::new(p.x, p.y, 1.5 * PI), WorkingMode::new(1).unwrap())
            .unwrap();
        assert_eq!(c.legs[1].m, 0.0);
        assert!(c.legs[0].m.abs() > 0.1 && c.legs[2].m.abs() > 0.1);
    }

    #[test]
    fn reach_half_width_contains_hexagon() {
        // r, R -> 0: regular hexagon of inradius l, circumradius 2l/√3
        let g = Geometry::new(1e-9, 1e-9, 2.0, 0.0).unwrap();
        assert!(close(g.reach_half_width(), 4.0 / 3f64.sqrt(), 1e-6));
    }
}
