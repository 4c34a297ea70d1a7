use std::f64::consts::{PI, SQRT_2, TAU};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prr3::geometry::is_reachable;
use prr3::{
    average_conditioning, build_matrices, condition_number, inverse_kinematics, optimal_conditioning, scan_field,
    workspace_area, Geometry32, Geometry64, GridSpec64, MatrixKind, Pose32, Pose64, ThetaSearch, Vec2f64,
    WorkingMode,
};

fn geometry() -> impl Strategy<Value = Geometry64> {
    (0.3..3.0f64, 0.3..2.0f64, 1.0..4.0f64, -PI..PI)
        .prop_filter("non-empty workspace", |(big_r, r, l, _)| big_r < &(l + r - 0.1))
        .prop_map(|(big_r, r, l, d)| Geometry64::new(big_r, r, l, d).unwrap())
}

/// A pose inside the reach polygon, as fractions of its half-width.
fn pose_in(g: &Geometry64, u: f64, v: f64, theta: f64) -> Pose64 {
    let h = g.reach_half_width();
    Pose64::new(u * h, v * h, theta)
}

fn mode_index() -> impl Strategy<Value = i64> {
    1..=8i64
}

proptest! {
    #[test]
    fn ik_closes_every_leg(g in geometry(), u in -1.0..1.0f64, v in -1.0..1.0f64, th in 0.0..TAU, m in mode_index()) {
        let pose = pose_in(&g, u, v, th);
        if let Ok(c) = inverse_kinematics(&g, &pose, WorkingMode::new(m).unwrap()) {
            for (i, leg) in c.legs.iter().enumerate() {
                let rail = g.rails[i];
                prop_assert!((leg.a - g.rail_point(i, leg.rho)).norm() <= 1e-12);
                prop_assert!((leg.a.dot(rail.normal) - g.base_radius).abs() <= 1e-12);
                prop_assert!(((leg.b - leg.a).norm() - g.leg_length).abs() <= 1e-9 * g.leg_length);
                prop_assert!((leg.b - pose.position()).norm() - g.platform_radius <= 1e-12);
                prop_assert!((leg.m - leg.lvec.dot(rail.dir)).abs() <= 1e-9);
                let sign = WorkingMode::new(m).unwrap().signs()[i] as f64;
                prop_assert!(leg.m == 0.0 || leg.m.signum() == sign);
            }
        }
    }

    #[test]
    fn reachability_and_branch_magnitude_are_mode_free(g in geometry(), u in -1.0..1.0f64, v in -1.0..1.0f64, th in 0.0..TAU) {
        let pose = pose_in(&g, u, v, th);
        let sols: Vec<_> = WorkingMode::ALL.iter().map(|&m| inverse_kinematics(&g, &pose, m)).collect();
        let reachable = is_reachable(&g, &pose);
        prop_assert!(sols.iter().all(|s| s.is_ok() == reachable));
        if reachable {
            let base = sols[0].as_ref().unwrap();
            for s in &sols[1..] {
                let c = s.as_ref().unwrap();
                for i in 0..3 {
                    prop_assert!((c.legs[i].m.abs() - base.legs[i].m.abs()).abs() <= 1e-12);
                }
                let db = build_matrices(c, 1.0).unwrap().det_b.abs();
                let db0 = build_matrices(base, 1.0).unwrap().det_b.abs();
                prop_assert!((db - db0).abs() <= 1e-12 * db0.max(1.0));
            }
        }
    }

    #[test]
    fn third_turn_permutes_actuators(g in geometry(), u in -1.0..1.0f64, v in -1.0..1.0f64, th in 0.0..TAU, m in mode_index()) {
        let mode = WorkingMode::new(m).unwrap();
        let pose = pose_in(&g, u, v, th);
        let a = 2.0 * PI / 3.0;
        let q = Vec2f64::new(a.cos() * pose.x - a.sin() * pose.y, a.sin() * pose.x + a.cos() * pose.y);
        let rotated = Pose64::new(q.x, q.y, th);
        match (inverse_kinematics(&g, &pose, mode), inverse_kinematics(&g, &rotated, mode.shifted())) {
            (Ok(c), Ok(d)) => {
                let (r, s) = (c.rho(), d.rho());
                for i in 0..3 {
                    prop_assert!((s[(i + 1) % 3] - r[i]).abs() <= 1e-9);
                }
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "reachability differs under rotation"),
        }
    }

    #[test]
    fn kappa_b_is_mode_free(g in geometry(), u in -1.0..1.0f64, v in -1.0..1.0f64, th in 0.0..TAU) {
        let pose = pose_in(&g, u, v, th);
        if let Ok(c) = inverse_kinematics(&g, &pose, WorkingMode::ALL[0]) {
            let k0 = condition_number(&build_matrices(&c, 1.0).unwrap().b);
            for &m in &WorkingMode::ALL[1..] {
                let c = inverse_kinematics(&g, &pose, m).unwrap();
                prop_assert!((condition_number(&build_matrices(&c, 1.0).unwrap().b) - k0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn single_precision_tracks_double(g in geometry(), u in -0.5..0.5f64, v in -0.5..0.5f64, th in 0.0..TAU) {
        let pose = pose_in(&g, u, v, th);
        let mode = WorkingMode::new(1).unwrap();
        let g32 = Geometry32::new(g.base_radius as f32, g.platform_radius as f32, g.leg_length as f32, g.phase as f32).unwrap();
        let p32 = Pose32::new(pose.x as f32, pose.y as f32, pose.theta as f32);
        if let (Ok(c), Ok(c32)) = (inverse_kinematics(&g, &pose, mode), inverse_kinematics(&g32, &p32, mode)) {
            // away from leg boundaries the closed form is well conditioned
            if c.legs.iter().all(|l| l.m.abs() > 0.2 * g.leg_length) {
                for (a, b) in c.rho().iter().zip(c32.rho()) {
                    prop_assert!((a - b as f64).abs() <= 1e-4 * (1.0 + a.abs()));
                }
            }
        }
    }
}

#[test]
fn workspace_area_refines() {
    let g = Geometry64::new(2.0, 1.0, 2.0, 0.0).unwrap();
    let coarse = GridSpec64::covering(&g, 60, 60).unwrap();
    let fine = GridSpec64::covering(&g, 120, 120).unwrap();
    let s1 = workspace_area(&g, &coarse, 120).unwrap();
    let s2 = workspace_area(&g, &fine, 120).unwrap();
    // the reach polygon perimeter bounds the workspace perimeter
    let perimeter = 8.0 * g.reach_half_width();
    assert!((s1 - s2).abs() < 4.0 * perimeter * coarse.dx(), "{s1} vs {s2}");
}

#[test]
fn grid_average_matches_monte_carlo() {
    let g = Geometry64::new(2.0, 1.0, 2.0, 0.0).unwrap();
    let mode = WorkingMode::new(1).unwrap();
    let search = ThetaSearch::new(48, 1e-5).unwrap();
    let grid = GridSpec64::covering(&g, 80, 80).unwrap();
    let field = scan_field(&g, mode, MatrixKind::B, &grid, SQRT_2, &search).unwrap();
    let grid_mean = average_conditioning(&field).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = g.reach_half_width();
    let mut samples = Vec::new();
    while samples.len() < 4000 {
        let (x, y) = (rng.gen_range(-h..h), rng.gen_range(-h..h));
        if let Ok((k, _)) = optimal_conditioning(&g, mode, MatrixKind::B, x, y, SQRT_2, &search) {
            samples.push(k);
        }
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!((grid_mean - mean).abs() <= 3.0 * se, "grid {grid_mean}, MC {mean} ± {se}");
}
