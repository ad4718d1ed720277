//! Pointwise bounds on `A[h]` computed by the production coefficient
//! pipeline.

use super::{is_integer, BoundReport};
use crate::coefficients::CoefficientSolver;
use crate::error::{LandauError, Result};
use crate::grid::{bracket, Distribution, VelocityGrid};
use crate::interp::tricubic;
use crate::linalg::{eigenvalues, quadratic_form, Sym3};

/// The 13 lattice directions up to sign: 3 axes, 6 face diagonals and 4
/// body diagonals, normalised.
pub fn sample_directions() -> Vec<[f64; 3]> {
    let raw: [[f64; 3]; 13] = [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [1.0, 1.0, 0.0],
        [1.0, -1.0, 0.0],
        [1.0, 0.0, 1.0],
        [1.0, 0.0, -1.0],
        [0.0, 1.0, 1.0],
        [0.0, 1.0, -1.0],
        [1.0, 1.0, 1.0],
        [1.0, 1.0, -1.0],
        [1.0, -1.0, 1.0],
        [-1.0, 1.0, 1.0],
    ];
    raw.iter()
        .map(|d| {
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            d.map(|x| x / n)
        })
        .collect()
}

/// 13 directions × 24 radii `0.8 L k / 24`, `k = 1..=24`.
pub fn sample_set(grid: &VelocityGrid) -> Vec<[f64; 3]> {
    let r_max = 0.8 * grid.extent();
    let mut out = Vec::with_capacity(13 * 24);
    for d in sample_directions() {
        for k in 1..=24 {
            let r = r_max * k as f64 / 24.0;
            out.push(d.map(|x| x * r));
        }
    }
    out
}

fn interpolate_matrix(grid: &VelocityGrid, parts: &[Vec<f64>; 6], v: [f64; 3]) -> Sym3 {
    std::array::from_fn(|s| tricubic(grid, &parts[s], v))
}

/// `v·A[h](v)v / (⟨v⟩^{4−m} ‖h‖_{L∞_m})` at each sample, with `A[h]`
/// interpolated tricubically from the lattice.
pub fn coercivity_bound_check(
    h: &Distribution,
    m: f64,
    v_samples: &[[f64; 3]],
) -> Result<BoundReport> {
    if !(m > 2.0 && m < 5.0) || is_integer(m) {
        return Err(LandauError::param(
            "m",
            format!("need a non-integer m in (2, 5), got {m}"),
        ));
    }
    if h.min_value() < 0.0 {
        return Err(LandauError::param("h", "the bound is stated for h >= 0"));
    }
    let grid = *h.grid();
    let a = CoefficientSolver::new(&grid).compute_A(h)?;
    let parts: [Vec<f64>; 6] = std::array::from_fn(|s| a.iter().map(|m| m[s]).collect());
    let norm = h.weighted_sup_norm(m)?;
    let mut report = if norm == 0.0 {
        let mut r = BoundReport::new("coercivity", v_samples.to_vec(), vec![0.0; v_samples.len()]);
        r.degenerate = true;
        r
    } else {
        let ratios = v_samples
            .iter()
            .map(|&v| {
                let q = quadratic_form(&interpolate_matrix(&grid, &parts, v), v);
                q / (bracket(v).powf(4.0 - m) * norm)
            })
            .collect();
        BoundReport::new("coercivity", v_samples.to_vec(), ratios)
    };
    report.m = Some(m);
    Ok(report)
}

/// `max_v |A[h](v)|_op / ‖h‖_{L^p_m}` over lattice nodes.
pub fn sup_a_bound_check(h: &Distribution, p: f64, m: f64) -> Result<BoundReport> {
    if !(p > 1.5) || !p.is_finite() {
        return Err(LandauError::param("p", format!("need p > 3/2, got {p}")));
    }
    if !(m > 2.0) || !m.is_finite() {
        return Err(LandauError::param("m", format!("need m > 2, got {m}")));
    }
    let grid = *h.grid();
    let a = CoefficientSolver::new(&grid).compute_A(h)?;
    let sup = a
        .iter()
        .map(|x| {
            let e = eigenvalues(x);
            e[0].abs().max(e[2].abs())
        })
        .fold(0.0, f64::max);
    let norm = h.lp_m_norm(p, m)?;
    let mut report = if norm == 0.0 {
        let mut r = BoundReport::new("sup-A", Vec::new(), vec![0.0]);
        r.degenerate = true;
        r
    } else {
        BoundReport::new("sup-A", Vec::new(), vec![sup / norm])
    };
    report.m = Some(m);
    report.p = Some(p);
    Ok(report)
}
