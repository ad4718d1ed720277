//! First-order finite volumes with the HLL flux on `[0, 1]`.

use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{peak_from_entropy, GAMMA, VACUUM};
use crate::error::{LandauError, Result};
use crate::sum::CompensatedSum;

const CFL: f64 = 0.5;
/// Slack on `sup S̄` for the scheme's own entropy production.
const SCHEME_ALLOWANCE: f64 = 1e-3;
const NOISE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Periodic,
    /// Zero-gradient ghost cells.
    Outflow,
}

/// Conservative cell averages `(ρ, ρu, ρE)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerState {
    pub cells: Vec<[f64; 3]>,
    pub boundary: Boundary,
    pub time: f64,
}

fn pressure(u: &[f64; 3]) -> f64 {
    (GAMMA - 1.0) * (u[2] - 0.5 * u[1] * u[1] / u[0])
}

fn flux(u: &[f64; 3]) -> [f64; 3] {
    let v = u[1] / u[0];
    let p = pressure(u);
    [u[1], u[1] * v + p, v * (u[2] + p)]
}

fn sound_speed(u: &[f64; 3]) -> f64 {
    (GAMMA * pressure(u) / u[0]).sqrt()
}

/// HLL with Davis wave-speed bounds.
fn hll(l: &[f64; 3], r: &[f64; 3]) -> [f64; 3] {
    let (vl, vr) = (l[1] / l[0], r[1] / r[0]);
    let (cl, cr) = (sound_speed(l), sound_speed(r));
    let sl = (vl - cl).min(vr - cr);
    let sr = (vl + cl).max(vr + cr);
    if sl >= 0.0 {
        return flux(l);
    }
    if sr <= 0.0 {
        return flux(r);
    }
    let (fl, fr) = (flux(l), flux(r));
    std::array::from_fn(|k| (sr * fl[k] - sl * fr[k] + sl * sr * (r[k] - l[k])) / (sr - sl))
}

impl EulerState {
    pub fn from_primitive(rho: &[f64], u: &[f64], p: &[f64], boundary: Boundary) -> Result<Self> {
        if rho.len() != u.len() || rho.len() != p.len() || rho.len() < 2 {
            return Err(LandauError::param(
                "cells",
                "need at least two cells and equal-length fields",
            ));
        }
        for i in 0..rho.len() {
            if !(rho[i] > 0.0) || !(p[i] > 0.0) || !u[i].is_finite() {
                return Err(LandauError::param(
                    "state",
                    format!("cell {i} needs rho > 0 and p > 0"),
                ));
            }
        }
        let cells = (0..rho.len())
            .map(|i| {
                [
                    rho[i],
                    rho[i] * u[i],
                    p[i] / (GAMMA - 1.0) + 0.5 * rho[i] * u[i] * u[i],
                ]
            })
            .collect();
        Ok(Self {
            cells,
            boundary,
            time: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.cells.len() as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx()
    }

    pub fn density(&self, i: usize) -> f64 {
        self.cells[i][0]
    }

    pub fn velocity(&self, i: usize) -> f64 {
        self.cells[i][1] / self.cells[i][0]
    }

    pub fn pressure(&self, i: usize) -> f64 {
        pressure(&self.cells[i])
    }

    /// Specific internal energy `e = E − u²/2`.
    pub fn internal_energy(&self, i: usize) -> f64 {
        let c = &self.cells[i];
        c[2] / c[0] - 0.5 * (c[1] / c[0]).powi(2)
    }

    /// `θ = (2/3) e`.
    pub fn temperature(&self, i: usize) -> f64 {
        (GAMMA - 1.0) * self.internal_energy(i)
    }

    /// `Σ U_i Δx` for the three conserved fields.
    pub fn totals(&self) -> [f64; 3] {
        let dx = self.dx();
        std::array::from_fn(|k| {
            dx * self
                .cells
                .iter()
                .map(|c| c[k])
                .collect::<CompensatedSum>()
                .value()
        })
    }

    fn faces(&self) -> Vec<[f64; 3]> {
        let n = self.cells.len();
        let cell = |i: isize| -> &[f64; 3] {
            match self.boundary {
                Boundary::Periodic => &self.cells[i.rem_euclid(n as isize) as usize],
                Boundary::Outflow => &self.cells[i.clamp(0, n as isize - 1) as usize],
            }
        };
        (0..=n as isize)
            .map(|f| hll(cell(f - 1), cell(f)))
            .collect()
    }

    fn max_speed(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| (c[1] / c[0]).abs() + sound_speed(c))
            .fold(0.0, f64::max)
    }

    fn check_positivity(&self) -> Result<()> {
        for i in 0..self.cells.len() {
            let (rho, e) = (self.density(i), self.internal_energy(i));
            if !(rho > 0.0) || !(e > 0.0) {
                log::error!("positivity lost; state at abort: {:?}", self.cells);
                return Err(LandauError::PositivityLoss {
                    cell: i,
                    time: self.time,
                    rho,
                    internal_energy: e,
                });
            }
        }
        Ok(())
    }
}

/// `S̄ = log(ρ^{2/3}/e)` per cell; `−∞` in vacuum.
pub fn specific_entropy(state: &EulerState) -> Vec<f64> {
    (0..state.len())
        .map(|i| {
            let rho = state.density(i);
            if rho <= VACUUM {
                f64::NEG_INFINITY
            } else {
                (rho.powf(GAMMA - 1.0) / state.internal_energy(i)).ln()
            }
        })
        .collect()
}

/// Per-step entropy record of an Euler run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyTrace {
    pub times: Vec<f64>,
    pub s_bar: Vec<Vec<f64>>,
    /// `sup_x S̄`, vacuum excluded.
    pub sup_s: Vec<f64>,
    /// Entropy flux `F_ρ S̄_upwind` through each face over the step that
    /// ends at the matching time (empty for the initial row).
    pub face_flux: Vec<Vec<f64>>,
    /// `sup_x ρ (2πθ)^{−3/2}`.
    pub peak: Vec<f64>,
    /// Largest relative gap in `ρθ^{−3/2} = (3/2)^{3/2} e^{(3/2)S̄}` over
    /// non-vacuum cells.
    pub identity_defect: Vec<f64>,
}

impl EntropyTrace {
    fn push(&mut self, state: &EulerState, face_flux: Vec<f64>) {
        let s = specific_entropy(state);
        let mut peak: f64 = 0.0;
        let mut defect: f64 = 0.0;
        for (i, &si) in s.iter().enumerate() {
            if si == f64::NEG_INFINITY {
                continue;
            }
            let (rho, theta) = (state.density(i), state.temperature(i));
            let lhs = rho * theta.powf(-1.5);
            let rhs = 1.5f64.powf(1.5) * (1.5 * si).exp();
            defect = defect.max((lhs - rhs).abs() / rhs);
            peak = peak.max(rho * (2.0 * PI * theta).powf(-1.5));
        }
        self.times.push(state.time);
        self.sup_s
            .push(s.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        self.s_bar.push(s);
        self.face_flux.push(face_flux);
        self.peak.push(peak);
        self.identity_defect.push(defect);
    }
}

#[derive(Debug, Clone)]
pub struct EulerRun {
    pub states: Vec<EulerState>,
    pub trace: EntropyTrace,
}

/// Advances to `t_end` with `Δt = 0.5 Δx / max(|u| + c)`, recording every
/// step.
pub fn euler_run(initial: &EulerState, t_end: f64) -> Result<EulerRun> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(LandauError::param(
            "t_end",
            format!("must be finite and >= 0, got {t_end}"),
        ));
    }
    initial.check_positivity()?;
    let mut state = initial.clone();
    let mut trace = EntropyTrace {
        times: Vec::new(),
        s_bar: Vec::new(),
        sup_s: Vec::new(),
        face_flux: Vec::new(),
        peak: Vec::new(),
        identity_defect: Vec::new(),
    };
    trace.push(&state, Vec::new());
    let mut states = vec![state.clone()];
    let stop = initial.time + t_end;
    let dx = state.dx();
    while stop - state.time > 1e-14 * stop.abs().max(1.0) {
        let dt = (CFL * dx / state.max_speed()).min(stop - state.time);
        let faces = state.faces();
        let s = specific_entropy(&state);
        let n = state.len();
        let entropy_flux: Vec<f64> = faces
            .iter()
            .enumerate()
            .map(|(f, flux)| {
                let left = match state.boundary {
                    Boundary::Periodic => (f + n - 1) % n,
                    Boundary::Outflow => f.saturating_sub(1),
                };
                let right = match state.boundary {
                    Boundary::Periodic => f % n,
                    Boundary::Outflow => f.min(n - 1),
                };
                let upwind = if flux[0] >= 0.0 { s[left] } else { s[right] };
                if flux[0] == 0.0 {
                    0.0
                } else {
                    flux[0] * upwind
                }
            })
            .collect();
        let ratio = dt / dx;
        for (i, c) in state.cells.iter_mut().enumerate() {
            for k in 0..3 {
                c[k] -= ratio * (faces[i + 1][k] - faces[i][k]);
            }
        }
        state.time = if (stop - (state.time + dt)).abs() <= 1e-14 * stop.abs().max(1.0) {
            stop
        } else {
            state.time + dt
        };
        state.check_positivity()?;
        trace.push(&state, entropy_flux);
        states.push(state.clone());
    }
    Ok(EulerRun { states, trace })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxPrincipleReport {
    /// `max_t sup_x S̄(t) − sup_x S̄(0)`.
    pub margin: f64,
    pub tolerance: f64,
    pub holds: bool,
}

pub fn entropy_max_principle_check(trace: &EntropyTrace) -> MaxPrincipleReport {
    let start = trace.sup_s.first().copied().unwrap_or(f64::NEG_INFINITY);
    let margin = trace
        .sup_s
        .iter()
        .map(|s| if start.is_finite() { s - start } else { 0.0 })
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    let tolerance = NOISE + SCHEME_ALLOWANCE;
    MaxPrincipleReport {
        margin,
        tolerance,
        holds: margin <= tolerance,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupBoundReport {
    /// `(3/(4π))^{3/2} e^{(3/2) sup S̄(0)}`.
    pub bound: f64,
    /// `max_t sup_x ρ(2πθ)^{−3/2} − bound`.
    pub worst_margin: f64,
    pub identity_defect: f64,
    pub holds: bool,
}

pub fn maxwellian_sup_bound_check(trace: &EntropyTrace) -> SupBoundReport {
    let bound = peak_from_entropy(trace.sup_s.first().copied().unwrap_or(f64::NEG_INFINITY));
    let worst_margin = trace
        .peak
        .iter()
        .map(|p| p - bound)
        .fold(f64::NEG_INFINITY, f64::max);
    let identity_defect = trace.identity_defect.iter().copied().fold(0.0, f64::max);
    SupBoundReport {
        bound,
        worst_margin,
        identity_defect,
        holds: worst_margin <= NOISE && identity_defect <= 1e-12,
    }
}

/// Named initial conditions for the `hydro` driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `ρ = 1, u = 0.3, e = 1`, periodic.
    Uniform,
    /// `(ρ, u, p) = (1, 0, 1) | (0.125, 0, 0.1)` split at `x = 0.5`, outflow.
    Sod,
    /// Isentropic density bump `p = ρ^γ`, periodic.
    Pulse,
    /// Uniform `ρ = e = 1` with one cell at `ρ × 100`, `e × 100^{2/3}`
    /// (same `S̄`), outflow.
    Spike,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Uniform, Preset::Sod, Preset::Pulse, Preset::Spike];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Uniform => "uniform",
            Preset::Sod => "sod",
            Preset::Pulse => "pulse",
            Preset::Spike => "spike",
        }
    }

    pub fn default_t_end(self) -> f64 {
        match self {
            Preset::Uniform | Preset::Sod | Preset::Pulse => 0.2,
            Preset::Spike => 0.05,
        }
    }
}

impl FromStr for Preset {
    type Err = LandauError;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                LandauError::param(
                    "preset",
                    format!("unknown preset `{s}` (uniform, sod, pulse, spike)"),
                )
            })
    }
}

pub fn preset(which: Preset, cells: usize) -> Result<EulerState> {
    if cells < 2 {
        return Err(LandauError::param(
            "cells",
            format!("need at least 2 cells, got {cells}"),
        ));
    }
    let x: Vec<f64> = (0..cells)
        .map(|i| (i as f64 + 0.5) / cells as f64)
        .collect();
    let pressure_from = |rho: f64, e: f64| (GAMMA - 1.0) * rho * e;
    let (rho, u, p, boundary): (Vec<f64>, Vec<f64>, Vec<f64>, Boundary) = match which {
        Preset::Uniform => (
            vec![1.0; cells],
            vec![0.3; cells],
            vec![pressure_from(1.0, 1.0); cells],
            Boundary::Periodic,
        ),
        Preset::Sod => {
            let left = |x: f64| x < 0.5;
            (
                x.iter()
                    .map(|&x| if left(x) { 1.0 } else { 0.125 })
                    .collect(),
                vec![0.0; cells],
                x.iter().map(|&x| if left(x) { 1.0 } else { 0.1 }).collect(),
                Boundary::Outflow,
            )
        }
        Preset::Pulse => {
            let rho: Vec<f64> = x
                .iter()
                .map(|&x| 1.0 + 0.2 * (-((x - 0.5) / 0.1).powi(2)).exp())
                .collect();
            let p = rho.iter().map(|r| r.powf(GAMMA)).collect();
            (rho, vec![0.0; cells], p, Boundary::Periodic)
        }
        Preset::Spike => {
            let mid = cells / 2;
            let amp: f64 = 100.0;
            let rho: Vec<f64> = (0..cells)
                .map(|i| if i == mid { amp } else { 1.0 })
                .collect();
            let e: Vec<f64> = (0..cells)
                .map(|i| if i == mid { amp.powf(GAMMA - 1.0) } else { 1.0 })
                .collect();
            let p = rho
                .iter()
                .zip(&e)
                .map(|(&r, &e)| pressure_from(r, e))
                .collect();
            (rho, vec![0.0; cells], p, Boundary::Outflow)
        }
    };
    EulerState::from_primitive(&rho, &u, &p, boundary)
}
