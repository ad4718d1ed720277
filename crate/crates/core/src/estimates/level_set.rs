//! Energy inequality for the truncations `g_ℓ = (⟨v⟩^m f − ℓ)₊`.
//!
//! With `u = v/⟨v⟩²`, multiplying the equation by `⟨v⟩^m` gives
//! `∂_t g = ∇·(A∇g − g∇a) − m g ⟨v⟩^{−2} tr A − 2m u·A∇g + m(m+2) g u·Au`,
//! and testing against `g_ℓ` splits `∫ g_ℓ ∂_t g` into
//!
//! * `I₁ = −∫ ∇g_ℓ·A∇g_ℓ`
//! * `I₂ = −2m ∫ g_ℓ ∇g_ℓ·Au`
//! * `I₃ = −m ∫ g_ℓ g ⟨v⟩^{−2} tr A`
//! * `I₄ = m(m+2) ∫ g_ℓ g u·Au`
//! * `I₅ = ∫ g ∇g_ℓ·∇a`
//!
//! The terms are evaluated with centred differences on the lattice; the
//! gap between their sum and `∫ g_ℓ ∂_t g` is reported as a consistency
//! observable, not asserted.

use serde::{Deserialize, Serialize};

use super::is_integer;
use crate::coefficients::CoefficientSolver;
use crate::error::{LandauError, Result};
use crate::evolution::Trajectory;
use crate::grid::{bracket, VelocityGrid};
use crate::linalg::{mat_vec, trace};
use crate::sum::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelRule {
    Constant {
        ell0: f64,
    },
    /// `ℓ(t) = ℓ₀ exp(K̂ ∫₀ᵗ ‖f‖_∞)`.
    Gronwall {
        ell0: f64,
        k_hat: f64,
    },
}

impl LevelRule {
    fn level(self, continuation: f64) -> f64 {
        match self {
            LevelRule::Constant { ell0 } => ell0,
            LevelRule::Gronwall { ell0, k_hat } => ell0 * (k_hat * continuation).exp(),
        }
    }

    fn ell0(self) -> f64 {
        match self {
            LevelRule::Constant { ell0 } | LevelRule::Gronwall { ell0, .. } => ell0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetRow {
    pub t: f64,
    pub ell: f64,
    pub sup: f64,
    /// `‖⟨v⟩^m f‖_{L²}`.
    pub weighted_l2: f64,
    /// `∫ g_ℓ ∂_t g`.
    pub lhs: f64,
    /// `ℓ ‖f‖_∞ ∫ g_ℓ`.
    pub rhs1: f64,
    /// `(‖f‖_∞ + ‖⟨v⟩^m f‖_{L²}) ∫ g_ℓ²`.
    pub rhs2: f64,
    /// `LHS₊ / (RHS₁ + RHS₂)`, 0 on an empty level set.
    pub c_hat: f64,
    /// `∫ ∇g_ℓ·A∇g_ℓ`.
    pub dissipation: f64,
    pub terms: [f64; 5],
    /// `LHS − Σ Iₖ`.
    pub identity_defect: f64,
    /// `∫ g_ℓ`.
    pub g_ell_mass: f64,
    /// `∫ g_ℓ²`.
    pub g_ell_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetReport {
    pub m: f64,
    pub rule: LevelRule,
    pub rows: Vec<LevelSetRow>,
    pub sup_c_hat: f64,
    /// `∫ g²` at the first snapshot.
    pub initial_g_energy: f64,
    pub max_g_ell_energy: f64,
}

/// Centred differences inside, one-sided on the faces of the box.
fn gradient(grid: &VelocityGrid, g: &[f64]) -> Vec<[f64; 3]> {
    let n = grid.n();
    let h = grid.spacing();
    let strides = [n * n, n, 1];
    (0..grid.len())
        .map(|idx| {
            let pos = grid.unindex(idx);
            std::array::from_fn(|d| {
                let s = strides[d];
                match pos[d] {
                    0 => (g[idx + s] - g[idx]) / h,
                    p if p == n - 1 => (g[idx] - g[idx - s]) / h,
                    _ => (g[idx + s] - g[idx - s]) / (2.0 * h),
                }
            })
        })
        .collect()
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn level_set_report(traj: &Trajectory, m: f64, rule: LevelRule) -> Result<LevelSetReport> {
    if !(m > 2.0 && m < 5.0) || is_integer(m) {
        return Err(LandauError::param(
            "m",
            format!("need a non-integer m in (2, 5), got {m}"),
        ));
    }
    if !(rule.ell0() >= 0.0) || !rule.ell0().is_finite() {
        return Err(LandauError::param(
            "ell0",
            format!("level must be finite and >= 0, got {}", rule.ell0()),
        ));
    }
    if traj.snapshots.is_empty() {
        return Err(LandauError::param("traj", "no snapshots recorded"));
    }
    let grid = traj.grid;
    let dv = grid.cell_volume();
    let solver = CoefficientSolver::new(&grid);
    let weight: Vec<f64> = (0..grid.len())
        .map(|idx| bracket(grid.node_at(idx)).powf(m))
        .collect();
    let integral = |it: &mut dyn Iterator<Item = f64>| dv * it.collect::<CompensatedSum>().value();

    let mut rows = Vec::with_capacity(traj.snapshots.len());
    let mut initial_g_energy = None;
    for snap in &traj.snapshots {
        let t = snap.f.time();
        let continuation = traj
            .diagnostics
            .iter()
            .find(|d| d.t == t)
            .map(|d| d.continuation)
            .ok_or_else(|| {
                LandauError::param("traj", format!("no diagnostics row at snapshot time {t}"))
            })?;
        let ell = rule.level(continuation);
        let f = snap.f.values();
        let g: Vec<f64> = f.iter().zip(&weight).map(|(x, w)| w * x).collect();
        let g_ell: Vec<f64> = g.iter().map(|x| (x - ell).max(0.0)).collect();
        let dg: Vec<f64> = snap.rhs.iter().zip(&weight).map(|(q, w)| w * q).collect();

        let g_energy = integral(&mut g.iter().map(|x| x * x));
        initial_g_energy.get_or_insert(g_energy);
        let weighted_l2 = g_energy.sqrt();
        let sup = snap.f.sup_norm();
        let g_ell_mass = integral(&mut g_ell.iter().copied());
        let g_ell_energy = integral(&mut g_ell.iter().map(|x| x * x));
        let lhs = integral(&mut g_ell.iter().zip(&dg).map(|(a, b)| a * b));
        let rhs1 = ell * sup * g_ell_mass;
        let rhs2 = (sup + weighted_l2) * g_ell_energy;

        let (dissipation, terms) = if g_ell_mass > 0.0 {
            let c = solver.compute(&snap.f)?;
            let grad = gradient(&grid, &g_ell);
            let mut parts: [CompensatedSum; 5] = Default::default();
            for idx in 0..grid.len() {
                if g_ell[idx] == 0.0 && grad[idx] == [0.0; 3] {
                    continue;
                }
                let v = grid.node_at(idx);
                let b2 = 1.0 + dot(v, v);
                let u = v.map(|x| x / b2);
                let a = &c.matrix()[idx];
                let au = mat_vec(a, u);
                let a_grad = mat_vec(a, grad[idx]);
                parts[0].add(-dot(grad[idx], a_grad));
                parts[1].add(-2.0 * m * g_ell[idx] * dot(grad[idx], au));
                parts[2].add(-m * g_ell[idx] * g[idx] * trace(a) / b2);
                parts[3].add(m * (m + 2.0) * g_ell[idx] * g[idx] * dot(u, au));
                parts[4].add(g[idx] * dot(grad[idx], c.grad_a()[idx]));
            }
            let terms = parts.map(|s| dv * s.value());
            (-terms[0], terms)
        } else {
            (0.0, [0.0; 5])
        };
        let denom = rhs1 + rhs2;
        let c_hat = if denom > 0.0 {
            lhs.max(0.0) / denom
        } else {
            0.0
        };
        rows.push(LevelSetRow {
            t,
            ell,
            sup,
            weighted_l2,
            lhs,
            rhs1,
            rhs2,
            c_hat,
            dissipation,
            identity_defect: lhs - terms.iter().sum::<f64>(),
            terms,
            g_ell_mass,
            g_ell_energy,
        });
    }
    let sup_c_hat = rows.iter().map(|r| r.c_hat).fold(0.0, f64::max);
    let max_g_ell_energy = rows.iter().map(|r| r.g_ell_energy).fold(0.0, f64::max);
    Ok(LevelSetReport {
        m,
        rule,
        rows,
        sup_c_hat,
        initial_g_energy: initial_g_energy.unwrap_or(0.0),
        max_g_ell_energy,
    })
}
