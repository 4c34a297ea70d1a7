//! Cartesian-plane analyses: orientation-optimized conditioning fields,
//! workspace area, average conditioning, design sweeps and isolines.
//!
//! A position belongs to the Cartesian workspace when at least one sampled
//! platform orientation puts every anchor within reach of its rail. The
//! conditioning reported at a position is the best `κ = σ_min/σ_max` over
//! orientations.

mod contour;
mod golden;
mod sweep;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditioning::condition_number;
use crate::error::{Error, Result};
use crate::geometry::{inverse_kinematics, is_reachable, Configuration, Geometry, Pose, WorkingMode};
use crate::linalg::{Mat3, Vec2};
use crate::scalar::Scalar;

pub use contour::{extract_contours, ContourSet};
pub use golden::golden_max;
pub use sweep::{design_sweep, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MatrixKind {
    Abar,
    B,
    Kbar,
}

impl MatrixKind {
    pub const ALL: [MatrixKind; 3] = [MatrixKind::Abar, MatrixKind::B, MatrixKind::Kbar];

    pub fn name(self) -> &'static str {
        match self {
            MatrixKind::Abar => "Abar",
            MatrixKind::B => "B",
            MatrixKind::Kbar => "Kbar",
        }
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatrixKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Abar" | "abar" | "A" => Ok(MatrixKind::Abar),
            "B" | "b" => Ok(MatrixKind::B),
            "Kbar" | "kbar" | "K" => Ok(MatrixKind::Kbar),
            _ => Err(Error::InvalidArgument(format!("unknown matrix kind '{s}' (Abar, B, Kbar)"))),
        }
    }
}

/// Orientation search settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaSearch<T> {
    /// Uniform samples over `[0, 2π)`.
    pub samples: usize,
    /// Golden-section bracket width at which refinement stops (radians).
    pub refine_tol: T,
}

impl<T: Scalar> Default for ThetaSearch<T> {
    fn default() -> Self {
        Self { samples: 120, refine_tol: T::lit(1e-6) }
    }
}

impl<T: Scalar> ThetaSearch<T> {
    pub fn new(samples: usize, refine_tol: T) -> Result<Self> {
        if samples < 12 {
            return Err(Error::InvalidArgument(format!("theta samples must be >= 12, got {samples}")));
        }
        if !(refine_tol > T::zero()) {
            return Err(Error::InvalidArgument("refine tolerance must be positive".into()));
        }
        Ok(Self { samples, refine_tol })
    }

    pub fn sample(&self, j: usize) -> T {
        T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(self.samples)
    }

    fn step(&self) -> T {
        T::TAU() / T::from_usize_lossy(self.samples)
    }
}

/// Rectangular scan region sampled at cell centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    pub xmin: T,
    pub xmax: T,
    pub ymin: T,
    pub ymax: T,
    pub nx: usize,
    pub ny: usize,
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(xmin: T, xmax: T, ymin: T, ymax: T, nx: usize, ny: usize) -> Result<Self> {
        let g = Self { xmin, xmax, ymin, ymax, nx, ny };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xmax > self.xmin) || !(self.ymax > self.ymin) {
            return Err(Error::InvalidGrid("bounds must satisfy xmax > xmin and ymax > ymin".into()));
        }
        if !(self.xmin.is_finite() && self.xmax.is_finite() && self.ymin.is_finite() && self.ymax.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2x2 cells, got {}x{}", self.nx, self.ny)));
        }
        Ok(())
    }

    /// Origin-centred square that contains every reachable position. Fails
    /// with `EmptyWorkspace` when the reach polygon has no interior
    /// (`R ≥ l + r`).
    pub fn covering(geometry: &Geometry<T>, nx: usize, ny: usize) -> Result<Self> {
        let h = geometry.reach_half_width();
        if !(h > T::zero()) {
            return Err(Error::EmptyWorkspace);
        }
        Self::new(-h, h, -h, h, nx, ny)
    }

    pub fn dx(&self) -> T {
        (self.xmax - self.xmin) / T::from_usize_lossy(self.nx)
    }

    pub fn dy(&self) -> T {
        (self.ymax - self.ymin) / T::from_usize_lossy(self.ny)
    }

    pub fn cell_area(&self) -> T {
        self.dx() * self.dy()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn center(&self, ix: usize, iy: usize) -> Vec2<T> {
        let half = T::lit(0.5);
        Vec2::new(
            self.xmin + (T::from_usize_lossy(ix) + half) * self.dx(),
            self.ymin + (T::from_usize_lossy(iy) + half) * self.dy(),
        )
    }

    /// Center of the cell with row-major index `k` (y outer).
    pub fn center_of(&self, k: usize) -> Vec2<T> {
        self.center(k % self.nx, k / self.nx)
    }

    fn contains_square(&self, h: T) -> bool {
        self.xmin <= -h && self.xmax >= h && self.ymin <= -h && self.ymax >= h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta<T> {
    pub geometry: Geometry<T>,
    pub mode: WorkingMode,
    pub kind: MatrixKind,
    pub char_len: T,
    pub search: ThetaSearch<T>,
}

/// Orientation-optimized condition numbers over a grid; NaN marks
/// unreachable cells in both arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField<T> {
    pub grid: GridSpec<T>,
    /// Row-major, y outer.
    pub values: Vec<T>,
    pub theta_star: Vec<T>,
    pub meta: FieldMeta<T>,
}

impl<T: Scalar> ScalarField<T> {
    pub fn value(&self, ix: usize, iy: usize) -> T {
        self.values[iy * self.grid.nx + ix]
    }

    pub fn reachable_count(&self) -> usize {
        self.values.iter().filter(|v| !v.is_nan()).count()
    }
}

/// Normalized direct-kinematics matrix straight from the leg solutions.
fn abar_of<T: Scalar>(config: &Configuration<T>, char_len: T) -> Mat3<T> {
    Mat3(config.legs.map(|l| [l.lvec.x, l.lvec.y, -l.k / char_len]))
}

/// `κ` of the requested matrix at a solved configuration. `K̄` does not exist
/// when some `m_i = 0`; its conditioning is reported as 0 there.
pub fn kind_conditioning<T: Scalar>(config: &Configuration<T>, kind: MatrixKind, char_len: T) -> T {
    match kind {
        MatrixKind::Abar => condition_number(&abar_of(config, char_len)),
        MatrixKind::B => condition_number(&Mat3::diag(config.m())),
        MatrixKind::Kbar => {
            let m = config.m();
            if m.iter().any(|&v| v == T::zero()) {
                return T::zero();
            }
            let mut kb = abar_of(config, char_len);
            for (row, mi) in kb.0.iter_mut().zip(m) {
                for v in row.iter_mut() {
                    *v = *v / mi;
                }
            }
            condition_number(&kb)
        }
    }
}

fn check_char_len<T: Scalar>(char_len: T) -> Result<()> {
    if !(char_len > T::zero()) || !char_len.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "characteristic length must be positive, got {char_len}"
        )));
    }
    Ok(())
}

/// Best `(κ*, θ*)` per kind at one position; `None` when no sample is reachable.
fn optimize_kinds<T: Scalar>(
    geometry: &Geometry<T>,
    mode: WorkingMode,
    kinds: &[MatrixKind],
    x: T,
    y: T,
    char_len: T,
    search: &ThetaSearch<T>,
) -> Option<Vec<(T, T)>> {
    let mut best: Vec<Option<(T, T)>> = vec![None; kinds.len()];
    for j in 0..search.samples {
        let theta = search.sample(j);
        let Ok(config) = inverse_kinematics(geometry, &Pose::new(x, y, theta), mode) else {
            continue;
        };
        for (slot, &kind) in best.iter_mut().zip(kinds) {
            let k = kind_conditioning(&config, kind, char_len);
            if slot.map_or(true, |(bk, _)| k > bk) {
                *slot = Some((k, theta));
            }
        }
    }

    let h = search.step();
    let mut out = Vec::with_capacity(kinds.len());
    for (slot, &kind) in best.into_iter().zip(kinds) {
        let (k0, t0) = slot?;
        let eval = |theta: T| match inverse_kinematics(geometry, &Pose::new(x, y, theta), mode) {
            Ok(c) => kind_conditioning(&c, kind, char_len),
            Err(_) => -T::one(),
        };
        let (t1, k1) = golden_max(eval, t0 - h, t0 + h, search.refine_tol);
        if k1 > k0 {
            out.push((k1, t1.wrap_angle()));
        } else {
            out.push((k0, t0));
        }
    }
    Some(out)
}

/// Maximum over platform orientation of `κ` for one matrix kind at `(x, y)`:
/// uniform sampling, then golden-section refinement around the best sample.
/// Returns `(κ*, θ*)`; sampling ties resolve to the smallest angle.
pub fn optimal_conditioning<T: Scalar>(
    geometry: &Geometry<T>,
    mode: WorkingMode,
    kind: MatrixKind,
    x: T,
    y: T,
    char_len: T,
    search: &ThetaSearch<T>,
) -> Result<(T, T)> {
    check_char_len(char_len)?;
    ThetaSearch::new(search.samples, search.refine_tol)?;
    optimize_kinds(geometry, mode, &[kind], x, y, char_len, search)
        .map(|v| v[0])
        .ok_or(Error::UnreachablePosition { x: x.to_f64_lossy(), y: y.to_f64_lossy() })
}

/// Scans several kinds in one pass, sharing the inverse kinematics of each
/// sampled orientation. Output order matches `kinds`.
pub fn scan_fields<T: Scalar>(
    geometry: &Geometry<T>,
    mode: WorkingMode,
    kinds: &[MatrixKind],
    grid: &GridSpec<T>,
    char_len: T,
    search: &ThetaSearch<T>,
) -> Result<Vec<ScalarField<T>>> {
    grid.validate()?;
    check_char_len(char_len)?;
    ThetaSearch::new(search.samples, search.refine_tol)?;

    let cells: Vec<Option<Vec<(T, T)>>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let c = grid.center_of(k);
            optimize_kinds(geometry, mode, kinds, c.x, c.y, char_len, search)
        })
        .collect();

    Ok(kinds
        .iter()
        .enumerate()
        .map(|(n, &kind)| {
            let (values, theta_star) = cells
                .iter()
                .map(|c| c.as_ref().map_or((T::nan(), T::nan()), |v| v[n]))
                .unzip();
            ScalarField {
                grid: *grid,
                values,
                theta_star,
                meta: FieldMeta { geometry: *geometry, mode, kind, char_len, search: *search },
            }
        })
        .collect())
}

pub fn scan_field<T: Scalar>(
    geometry: &Geometry<T>,
    mode: WorkingMode,
    kind: MatrixKind,
    grid: &GridSpec<T>,
    char_len: T,
    search: &ThetaSearch<T>,
) -> Result<ScalarField<T>> {
    Ok(scan_fields(geometry, mode, &[kind], grid, char_len, search)?.remove(0))
}

/// Cells whose center admits at least one reachable sampled orientation.
pub fn workspace_mask<T: Scalar>(geometry: &Geometry<T>, grid: &GridSpec<T>, theta_samples: usize) -> Result<Vec<bool>> {
    grid.validate()?;
    let search = ThetaSearch::new(theta_samples, T::lit(1e-6))?;
    Ok((0..grid.len())
        .into_par_iter()
        .map(|k| {
            let c = grid.center_of(k);
            (0..search.samples).any(|j| is_reachable(geometry, &Pose::new(c.x, c.y, search.sample(j))))
        })
        .collect())
}

/// Cartesian workspace area by cell counting. The grid must contain the
/// square returned by [`Geometry::reach_half_width`].
pub fn workspace_area<T: Scalar>(geometry: &Geometry<T>, grid: &GridSpec<T>, theta_samples: usize) -> Result<T> {
    grid.validate()?;
    let h = geometry.reach_half_width();
    if !grid.contains_square(h) {
        return Err(Error::RegionTooSmall { needed: h.to_f64_lossy() });
    }
    let count = workspace_mask(geometry, grid, theta_samples)?.iter().filter(|&&b| b).count();
    Ok(T::from_usize_lossy(count) * grid.cell_area())
}

/// Arithmetic mean of the reachable cells, accumulated in row-major order.
pub fn average_conditioning<T: Scalar>(field: &ScalarField<T>) -> Result<T> {
    let (sum, n) = field
        .values
        .iter()
        .filter(|v| !v.is_nan())
        .fold((T::zero(), 0usize), |(s, n), &v| (s + v, n + 1));
    if n == 0 {
        return Err(Error::EmptyWorkspace);
    }
    Ok(sum / T::from_usize_lossy(n))
}
