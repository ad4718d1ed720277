//! Local Maxwellians and the compressible Euler system at `γ = 5/3`.
//!
//! The fluid fields are tied to the kinetic ones through
//! `θ = (2/3) e` and `S̄ = log(ρ^{2/3}/e)`, so that the Maxwellian peak
//! `ρ (2πθ)^{−3/2}` equals `(3/(4π))^{3/2} e^{(3/2) S̄}`.

mod euler;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::grid::Distribution;

pub use euler::{
    entropy_max_principle_check, euler_run, maxwellian_sup_bound_check, preset, specific_entropy,
    Boundary, EntropyTrace, EulerRun, EulerState, MaxPrincipleReport, Preset, SupBoundReport,
};

pub const GAMMA: f64 = 5.0 / 3.0;
/// Cells with `ρ` at or below this carry the `−∞` entropy sentinel.
pub const VACUUM: f64 = 1e-12;

/// `(3/(4π))^{3/2} e^{(3/2) S̄}`: the Maxwellian peak at specific entropy `S̄`.
pub fn peak_from_entropy(s_bar: f64) -> f64 {
    (3.0 / (4.0 * PI)).powf(1.5) * (1.5 * s_bar).exp()
}

/// Relative errors of the quadrature moments of `f` against
/// `(ρ, ρu, ρ(|u|²/2 + 3θ/2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentResiduals {
    pub mass: f64,
    /// `|∫vf − ρu| / (ρ(|u| + √θ))`.
    pub momentum: f64,
    pub energy: f64,
}

impl MomentResiduals {
    pub fn max(&self) -> f64 {
        self.mass.max(self.momentum).max(self.energy)
    }
}

pub fn maxwellian_moments_check(
    f: &Distribution,
    rho: f64,
    u: [f64; 3],
    theta: f64,
) -> MomentResiduals {
    let m = f.moments();
    let speed = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let momentum_gap = (0..3)
        .map(|d| (m.momentum[d] - rho * u[d]).powi(2))
        .sum::<f64>()
        .sqrt();
    let energy = rho * (0.5 * speed * speed + 1.5 * theta);
    MomentResiduals {
        mass: (m.mass - rho).abs() / rho,
        momentum: momentum_gap / (rho * (speed + theta.sqrt())),
        energy: (m.kinetic_energy() - energy).abs() / energy,
    }
}

/// `(ρ, u, θ)` from the mass, momentum and energy moments of `f`.
pub fn fluid_fields(f: &Distribution) -> (f64, [f64; 3], f64) {
    let m = f.moments();
    let rho = m.mass;
    let u = m.momentum.map(|p| p / rho);
    let u2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    let theta = (m.energy / rho - u2) / 3.0;
    (rho, u, theta)
}
