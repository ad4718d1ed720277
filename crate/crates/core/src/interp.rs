//! Tricubic Lagrange interpolation of lattice data, extended by zero outside
//! the lattice.

use crate::grid::VelocityGrid;

/// Weights of the 4-point Lagrange stencil at offsets -1, 0, 1, 2 for a
/// fractional position `t ∈ [0, 1)`.
#[inline]
fn weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Base index and weights along one axis; positions within `1e-10` cells of
/// a node snap to it so that node-aligned queries reproduce values exactly.
#[inline]
fn axis(grid: &VelocityGrid, x: f64) -> (i64, [f64; 4]) {
    let s = (x + grid.extent()) / grid.spacing();
    let r = s.round();
    if (s - r).abs() < 1e-10 {
        return (r as i64, [0.0, 1.0, 0.0, 0.0]);
    }
    let base = s.floor();
    (base as i64, weights(s - base))
}

/// Interpolated value at `x`; lattice nodes outside `[0, n)` count as zero.
pub fn tricubic(grid: &VelocityGrid, values: &[f64], x: [f64; 3]) -> f64 {
    let n = grid.n() as i64;
    let (bi, wi) = axis(grid, x[0]);
    let (bj, wj) = axis(grid, x[1]);
    let (bk, wk) = axis(grid, x[2]);
    let mut acc = 0.0;
    for (a, &wa) in wi.iter().enumerate() {
        let i = bi - 1 + a as i64;
        if wa == 0.0 || i < 0 || i >= n {
            continue;
        }
        for (b, &wb) in wj.iter().enumerate() {
            let j = bj - 1 + b as i64;
            if wb == 0.0 || j < 0 || j >= n {
                continue;
            }
            let row = ((i * n + j) * n) as usize;
            let mut line = 0.0;
            for (c, &wc) in wk.iter().enumerate() {
                let k = bk - 1 + c as i64;
                if wc == 0.0 || k < 0 || k >= n {
                    continue;
                }
                line += wc * values[row + k as usize];
            }
            acc += wa * wb * line;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_exactly() {
        let g = VelocityGrid::new(16, 4.0).unwrap();
        let p = |v: [f64; 3]| {
            1.0 + v[0] - 0.5 * v[1] * v[1] + 0.2 * v[0] * v[1] * v[2] + 0.1 * v[2].powi(3)
        };
        let vals = g.sample(p);
        for x in [[0.13, -0.71, 1.4], [-2.2, 0.05, 0.9], [1.0, 1.0, -1.0]] {
            assert!((tricubic(&g, &vals, x) - p(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn node_queries_are_exact_and_outside_is_zero() {
        let g = VelocityGrid::new(8, 2.0).unwrap();
        let vals: Vec<f64> = (0..g.len()).map(|i| (i as f64).sin()).collect();
        for idx in [0, 100, 511] {
            assert_eq!(tricubic(&g, &vals, g.node_at(idx)), vals[idx]);
        }
        assert_eq!(tricubic(&g, &vals, [5.0, 0.0, 0.0]), 0.0);
    }
}
