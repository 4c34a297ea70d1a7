use serde::{Deserialize, Serialize};

use super::{average_conditioning, scan_fields, workspace_area, GridSpec, MatrixKind, ThetaSearch};
use crate::error::{Error, Result};
use crate::geometry::{Geometry, WorkingMode};
use crate::scalar::Scalar;

/// Global indices for one base-to-platform ratio `R/r` (with `r = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    pub ratio: T,
    /// Cartesian workspace area `S`.
    pub area: T,
    pub kbar_a1: T,
    pub kbar_a2: T,
    /// Average `κ(B)`; identical in every working mode.
    pub kbar_b: T,
    pub kbar_k1: T,
    pub kbar_k2: T,
}

/// Sweeps `R/r` at fixed `l/r`, normalizing with `L = √2·r`. Each row scans
/// the covering square at `resolution × resolution` cells and averages in
/// working modes 1 and 2. Rows whose workspace is empty come back as
/// `Err(EmptyWorkspace)`; the remaining rows are unaffected.
pub fn design_sweep<T: Scalar>(
    ratios: &[T],
    l_over_r: T,
    resolution: usize,
    search: &ThetaSearch<T>,
) -> Result<Vec<Result<SweepRow<T>>>> {
    if !(l_over_r > T::zero()) {
        return Err(Error::InvalidArgument(format!("l/r must be positive, got {l_over_r}")));
    }
    let r = T::one();
    let char_len = T::SQRT_2() * r;
    let mode1 = WorkingMode::new(1)?;
    let mode2 = WorkingMode::new(2)?;

    if let Some(bad) = ratios.iter().find(|&&ratio| !(ratio > T::zero())) {
        return Err(Error::InvalidArgument(format!("ratio R/r must be positive, got {bad}")));
    }

    Ok(ratios
        .iter()
        .map(|&ratio| {
            let geometry = Geometry::new(ratio * r, r, l_over_r * r, T::zero())?;
            let grid = GridSpec::covering(&geometry, resolution, resolution)?;
            let area = workspace_area(&geometry, &grid, search.samples)?;

            let f1 = scan_fields(
                &geometry,
                mode1,
                &[MatrixKind::Abar, MatrixKind::B, MatrixKind::Kbar],
                &grid,
                char_len,
                search,
            )?;
            let f2 = scan_fields(&geometry, mode2, &[MatrixKind::Abar, MatrixKind::Kbar], &grid, char_len, search)?;

            Ok(SweepRow {
                ratio,
                area,
                kbar_a1: average_conditioning(&f1[0])?,
                kbar_a2: average_conditioning(&f2[0])?,
                kbar_b: average_conditioning(&f1[1])?,
                kbar_k1: average_conditioning(&f1[2])?,
                kbar_k2: average_conditioning(&f2[1])?,
            })
        })
        .collect())
}
