//! Marching squares over the cell-center lattice of a [`ScalarField`].

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::ScalarField;
use crate::linalg::Vec2;
use crate::scalar::Scalar;

/// Isolines per level. Closed loops repeat their first vertex at the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSet<T> {
    pub levels: Vec<T>,
    /// `polylines[n]` holds the chains for `levels[n]`.
    pub polylines: Vec<Vec<Vec<Vec2<T>>>>,
}

impl<T> ContourSet<T> {
    pub fn is_empty(&self) -> bool {
        self.polylines.iter().all(|p| p.is_empty())
    }
}

/// Lattice edge: horizontal from `(ix, iy)` to `(ix+1, iy)` or vertical from
/// `(ix, iy)` to `(ix, iy+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

/// Extracts isolines with linear edge interpolation. Squares touching a NaN
/// corner are skipped; saddles are split according to the mean of the four
/// corners.
pub fn extract_contours<T: Scalar>(field: &ScalarField<T>, levels: &[T]) -> ContourSet<T> {
    let polylines = levels.iter().map(|&level| trace_level(field, level)).collect();
    ContourSet { levels: levels.to_vec(), polylines }
}

fn trace_level<T: Scalar>(field: &ScalarField<T>, level: T) -> Vec<Vec<Vec2<T>>> {
    let grid = &field.grid;
    let (nx, ny) = (grid.nx, grid.ny);
    let mut segments: Vec<(Edge, Edge)> = Vec::new();

    for iy in 0..ny - 1 {
        for ix in 0..nx - 1 {
            let v00 = field.value(ix, iy);
            let v10 = field.value(ix + 1, iy);
            let v11 = field.value(ix + 1, iy + 1);
            let v01 = field.value(ix, iy + 1);
            if v00.is_nan() || v10.is_nan() || v11.is_nan() || v01.is_nan() {
                continue;
            }
            let above = [v00 >= level, v10 >= level, v11 >= level, v01 >= level];
            let bottom = Edge::H(ix, iy);
            let right = Edge::V(ix + 1, iy);
            let top = Edge::H(ix, iy + 1);
            let left = Edge::V(ix, iy);
            // edges adjacent to each corner, in corner order 00, 10, 11, 01
            let around = [(left, bottom), (bottom, right), (right, top), (top, left)];

            let n_above = above.iter().filter(|&&a| a).count();
            match n_above {
                0 | 4 => {}
                1 | 3 => {
                    let odd = n_above == 1;
                    let c = above.iter().position(|&a| a == odd).expect("one odd corner");
                    segments.push(around[c]);
                }
                _ => {
                    if above[0] == above[2] {
                        // saddle: diagonal corners agree
                        let center = (v00 + v10 + v11 + v01) / T::lit(4.0);
                        let center_above = center >= level;
                        for c in 0..4 {
                            if above[c] != center_above {
                                segments.push(around[c]);
                            }
                        }
                    } else if above[0] == above[1] {
                        segments.push((left, right));
                    } else {
                        segments.push((bottom, top));
                    }
                }
            }
        }
    }

    let point = |e: Edge| -> Vec2<T> {
        let ((ax, ay), (bx, by)) = match e {
            Edge::H(ix, iy) => ((ix, iy), (ix + 1, iy)),
            Edge::V(ix, iy) => ((ix, iy), (ix, iy + 1)),
        };
        let va = field.value(ax, ay);
        let vb = field.value(bx, by);
        let pa = grid.center(ax, ay);
        let pb = grid.center(bx, by);
        let t = ((level - va) / (vb - va)).max(T::zero()).min(T::one());
        pa + (pb - pa).scale(t)
    };

    stitch(&segments).into_iter().map(|chain| chain.into_iter().map(point).collect()).collect()
}

/// Joins segments sharing an edge into maximal chains: open chains first (in
/// order of their first segment), then closed loops.
fn stitch(segments: &[(Edge, Edge)]) -> Vec<Vec<Edge>> {
    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (i, &(a, b)) in segments.iter().enumerate() {
        by_edge.entry(a).or_default().push(i);
        by_edge.entry(b).or_default().push(i);
    }
    let mut used = vec![false; segments.len()];
    let mut chains = Vec::new();

    let walk = |start_seg: usize, start_edge: Edge, used: &mut Vec<bool>| -> Vec<Edge> {
        let mut chain = vec![start_edge];
        let (mut seg, mut at) = (start_seg, start_edge);
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == at { b } else { a };
            chain.push(next);
            match by_edge[&next].iter().find(|&&s| !used[s]) {
                Some(&s) => {
                    seg = s;
                    at = next;
                }
                None => break,
            }
        }
        chain
    };

    for pass_open in [true, false] {
        for i in 0..segments.len() {
            if used[i] {
                continue;
            }
            let (a, b) = segments[i];
            let start = if by_edge[&a].len() == 1 {
                Some(a)
            } else if by_edge[&b].len() == 1 {
                Some(b)
            } else {
                None
            };
            match (pass_open, start) {
                (true, Some(e)) => chains.push(walk(i, e, &mut used)),
                (false, _) => chains.push(walk(i, a, &mut used)),
                _ => {}
            }
        }
    }
    chains
}
