//! Initial data families sampled on a velocity lattice.

use std::f64::consts::PI;

use crate::error::{LandauError, Result};
use crate::grid::{bracket, norm3, Distribution, VelocityGrid};

/// `ρ (2πθ)^{-3/2} exp(-|v-u|^2 / 2θ)`.
pub fn maxwellian_density(rho: f64, u: [f64; 3], theta: f64, v: [f64; 3]) -> f64 {
    let d = [v[0] - u[0], v[1] - u[1], v[2] - u[2]];
    let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    rho * (2.0 * PI * theta).powf(-1.5) * (-0.5 * r2 / theta).exp()
}

/// Maxwellian with density `rho`, bulk velocity `u` and temperature `theta`.
///
/// Logs a warning when `|u| + 4√θ` exceeds `0.9 L`, since the tail then
/// reaches the lattice boundary.
pub fn maxwellian(rho: f64, u: [f64; 3], theta: f64, grid: &VelocityGrid) -> Result<Distribution> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(LandauError::param(
            "rho",
            format!("must be >= 0, got {rho}"),
        ));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(LandauError::param(
            "theta",
            format!("must be > 0, got {theta}"),
        ));
    }
    if norm3(u) + 4.0 * theta.sqrt() > 0.9 * grid.extent() {
        log::warn!(
            "maxwellian support |u| + 4 sqrt(theta) = {:.3} exceeds 0.9 L = {:.3}",
            norm3(u) + 4.0 * theta.sqrt(),
            0.9 * grid.extent()
        );
    }
    Distribution::from_fn(*grid, |v| maxwellian_density(rho, u, theta, v))
}

/// `(2π)^{-3/2} exp(-|v|^2/2)`.
pub fn unit_maxwellian(grid: &VelocityGrid) -> Distribution {
    Distribution::from_fn(*grid, |v| maxwellian_density(1.0, [0.0; 3], 1.0, v))
        .expect("gaussian samples are finite")
}

/// `0.9 M_{θ=1} + 0.1 M_{θ=2}`: smooth, positive, not an equilibrium.
pub fn bimodal(grid: &VelocityGrid) -> Distribution {
    Distribution::from_fn(*grid, |v| {
        maxwellian_density(0.9, [0.0; 3], 1.0, v) + maxwellian_density(0.1, [0.0; 3], 2.0, v)
    })
    .expect("gaussian samples are finite")
}

/// Radial cutoff: 1 on `[0, 0.8]`, 0 from 1 on, quintic smoothstep between
/// (C^2 across both joins).
pub fn cutoff(s: f64) -> f64 {
    if s <= 0.8 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let t = (s - 0.8) / 0.2;
        1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// `c ⟨v⟩^{-m} χ(|v|/L)`; with `c = 1` the sup norm is 1 (attained at 0).
pub fn fat_tail(m: f64, c: f64, grid: &VelocityGrid) -> Result<Distribution> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(LandauError::param(
            "m",
            format!("tail exponent must be > 0, got {m}"),
        ));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(LandauError::param(
            "c",
            format!("amplitude must be >= 0, got {c}"),
        ));
    }
    let l = grid.extent();
    Distribution::from_fn(*grid, |v| c * bracket(v).powf(-m) * cutoff(norm3(v) / l))
}

/// Unit mass in the single cell at node `center`: value `h^{-3}` there.
pub fn point_mass(grid: &VelocityGrid, center: [usize; 3]) -> Result<Distribution> {
    let n = grid.n();
    if center.iter().any(|&c| c >= n) {
        return Err(LandauError::param(
            "center",
            format!("{center:?} outside an {n}^3 lattice"),
        ));
    }
    let mut f = Distribution::zeros(*grid);
    f.values_mut()[grid.index(center[0], center[1], center[2])] = 1.0 / grid.cell_volume();
    Ok(f)
}

/// Point mass at the origin node.
pub fn origin_point_mass(grid: &VelocityGrid) -> Distribution {
    let c = grid.n() / 2;
    point_mass(grid, [c, c, c]).expect("origin is a node")
}
