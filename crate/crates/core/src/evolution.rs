//! Explicit SSP Runge–Kutta integration of `∂_t f = Q(f)`.
//!
//! Coefficients are recomputed from the stage density at every stage. The
//! boundary outflow of each stage is combined with the same weights as the
//! stage right-hand sides, so `mass(f_{k+1}) − mass(f_k)` equals the recorded
//! boundary term plus any mass added by clipping, up to rounding.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientField, CoefficientSolver};
use crate::collision::{q_divergence_with_flux, BoundaryFlux};
use crate::error::{LandauError, Result};
use crate::grid::{Distribution, MomentSet, VelocityGrid};

/// Negative values below `-NEGATIVITY_FLAG * ‖f‖_∞` are flagged when
/// clipping is off.
pub const NEGATIVITY_FLAG: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Rk2,
    Rk3Ssp,
}

impl Scheme {
    /// Weights of the stage right-hand sides in the final update.
    fn effective_weights(self) -> &'static [f64] {
        match self {
            Scheme::Rk2 => &[0.5, 0.5],
            Scheme::Rk3Ssp => &[1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DtPolicy {
    Fixed(f64),
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clipping {
    Off,
    ClipAndReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub dt_policy: DtPolicy,
    pub t_end: f64,
    pub snapshot_stride: usize,
    pub clipping: Clipping,
    /// CFL safety factor σ ∈ (0, 1].
    pub safety: f64,
    /// Stop once `‖f‖_∞` exceeds this value.
    pub ceiling: Option<f64>,
    /// Weights `m` of the recorded `‖f‖_{L∞_m}`.
    pub m_list: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Rk3Ssp,
            dt_policy: DtPolicy::Adaptive,
            t_end: 1.0,
            snapshot_stride: 10,
            clipping: Clipping::Off,
            safety: 0.5,
            ceiling: None,
            m_list: vec![2.5, 3.5, 4.5],
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(LandauError::param(
                "t_end",
                format!("must be positive, got {}", self.t_end),
            ));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(LandauError::param(
                "safety",
                format!("must lie in (0, 1], got {}", self.safety),
            ));
        }
        if self.snapshot_stride == 0 {
            return Err(LandauError::param("snapshot_stride", "must be at least 1"));
        }
        if let DtPolicy::Fixed(dt) = self.dt_policy {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(LandauError::param(
                    "dt",
                    format!("must be positive, got {dt}"),
                ));
            }
        }
        if let Some(c) = self.ceiling {
            if !(c > 0.0) {
                return Err(LandauError::param(
                    "ceiling",
                    format!("must be positive, got {c}"),
                ));
            }
        }
        if let Some(m) = self.m_list.iter().find(|m| !(**m >= 0.0 && m.is_finite())) {
            return Err(LandauError::param(
                "m_list",
                format!("weights must be >= 0, got {m}"),
            ));
        }
        Ok(())
    }
}

/// The three step-size bounds (diffusion, drift, Riccati source); zero
/// denominators give `+∞`, i.e. an inactive bound.
fn stability_bounds(f: &Distribution, c: &CoefficientField) -> [f64; 3] {
    let h = f.grid().spacing();
    let bound = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::INFINITY };
    [
        bound(h * h, 6.0 * c.max_eigenvalue()),
        bound(h, 2.0 * c.max_grad_norm()),
        bound(1.0, 2.0 * f.sup_norm()),
    ]
}

/// `σ · min(h²/(6 λ_max), h/(2 max|∇a|), 1/(2‖f‖_∞))`, ignoring inactive
/// bounds. Fails if a bound is NaN or if every bound is inactive.
pub fn stability_dt(f: &Distribution, c: &CoefficientField, safety: f64) -> Result<f64> {
    if !f.grid().same_as(c.grid()) {
        return Err(LandauError::GridMismatch(
            "density and coefficients differ".into(),
        ));
    }
    let bounds = stability_bounds(f, c);
    if bounds.iter().any(|b| b.is_nan()) {
        return Err(LandauError::UnstableBound(format!("{bounds:?}")));
    }
    let dt = safety * bounds.iter().copied().fold(f64::INFINITY, f64::min);
    if dt.is_finite() {
        Ok(dt)
    } else {
        Err(LandauError::UnstableBound(
            "no active bound (zero data)".into(),
        ))
    }
}

/// Result of one step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub f: Distribution,
    /// `Q(f)` at the start of the step.
    pub rhs: Vec<f64>,
    /// Time-integrated boundary term `dt Σ w_s ∮ φ F_s·n`.
    pub flux: BoundaryFlux,
    /// Mass added by zeroing negative values (0 when clipping is off).
    pub clipped_mass: f64,
}

fn evaluate(
    solver: &CoefficientSolver,
    f: &Distribution,
    stage: usize,
) -> Result<(Vec<f64>, BoundaryFlux)> {
    let c = solver.compute(f)?;
    rhs_with(f, &c, stage)
}

fn rhs_with(
    f: &Distribution,
    c: &CoefficientField,
    stage: usize,
) -> Result<(Vec<f64>, BoundaryFlux)> {
    let (q, flux) = q_divergence_with_flux(f, c)?;
    if let Some(index) = q.iter().position(|x| !x.is_finite()) {
        return Err(LandauError::NonFinite {
            index,
            context: format!("collision operator at stage {stage}, t = {}", f.time()),
        });
    }
    Ok((q, flux))
}

/// `a·x + b·(y + dt q)` as a new distribution at time `t`.
fn combine(
    a: f64,
    x: &[f64],
    b: f64,
    y: &[f64],
    dt: f64,
    q: &[f64],
    grid: VelocityGrid,
    t: f64,
    stage: usize,
) -> Result<Distribution> {
    let vals: Vec<f64> = x
        .iter()
        .zip(y)
        .zip(q)
        .map(|((xi, yi), qi)| a * xi + b * (yi + dt * qi))
        .collect();
    if let Some(index) = vals.iter().position(|v| !v.is_finite()) {
        return Err(LandauError::NonFinite {
            index,
            context: format!("stage {stage} update, t = {t}"),
        });
    }
    Distribution::new(grid, vals, t)
}

fn advance(
    solver: &CoefficientSolver,
    f: &Distribution,
    first: (Vec<f64>, BoundaryFlux),
    dt: f64,
    cfg: &SolverConfig,
) -> Result<StepOutcome> {
    let grid = *f.grid();
    let t1 = f.time() + dt;
    let x = f.values();
    let (q0, b0) = first;
    let mut fluxes = vec![b0];
    let out = match cfg.scheme {
        Scheme::Rk2 => {
            let f1 = combine(0.0, x, 1.0, x, dt, &q0, grid, t1, 1)?;
            let (q1, b1) = evaluate(solver, &f1, 1)?;
            fluxes.push(b1);
            combine(0.5, x, 0.5, f1.values(), dt, &q1, grid, t1, 2)?
        }
        Scheme::Rk3Ssp => {
            let f1 = combine(0.0, x, 1.0, x, dt, &q0, grid, t1, 1)?;
            let (q1, b1) = evaluate(solver, &f1, 1)?;
            fluxes.push(b1);
            let f2 = combine(
                0.75,
                x,
                0.25,
                f1.values(),
                dt,
                &q1,
                grid,
                f.time() + 0.5 * dt,
                2,
            )?;
            let (q2, b2) = evaluate(solver, &f2, 2)?;
            fluxes.push(b2);
            combine(1.0 / 3.0, x, 2.0 / 3.0, f2.values(), dt, &q2, grid, t1, 3)?
        }
    };
    let mut flux = BoundaryFlux::default();
    for (b, w) in fluxes.iter().zip(cfg.scheme.effective_weights()) {
        flux.add(&b.scaled(w * dt));
    }

    let mut out = out;
    let mut clipped_mass = 0.0;
    match cfg.clipping {
        Clipping::ClipAndReport => {
            let dv = grid.cell_volume();
            for v in out.values_mut() {
                if *v < 0.0 {
                    clipped_mass -= *v * dv;
                    *v = 0.0;
                }
            }
        }
        Clipping::Off => {
            let floor = -NEGATIVITY_FLAG * out.sup_norm();
            if out.min_value() < floor {
                warn!("negative values down to {:e} at t = {t1}", out.min_value());
            }
        }
    }
    Ok(StepOutcome {
        f: out,
        rhs: q0,
        flux,
        clipped_mass,
    })
}

/// One step of size `dt`; the adaptive policy checks `dt` against
/// [`stability_dt`].
pub fn step(f: &Distribution, dt: f64, cfg: &SolverConfig) -> Result<Distribution> {
    Ok(step_with_report(f, dt, cfg)?.f)
}

pub fn step_with_report(f: &Distribution, dt: f64, cfg: &SolverConfig) -> Result<StepOutcome> {
    cfg.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(LandauError::param(
            "dt",
            format!("must be positive, got {dt}"),
        ));
    }
    let solver = CoefficientSolver::new(f.grid());
    let c = solver.compute(f)?;
    if cfg.dt_policy == DtPolicy::Adaptive {
        let bounds = stability_bounds(f, &c);
        let limit = cfg.safety * bounds.iter().copied().fold(f64::INFINITY, f64::min);
        if dt > limit * (1.0 + 1e-12) {
            return Err(LandauError::param(
                "dt",
                format!("{dt} exceeds the stability limit {limit}"),
            ));
        }
    }
    let first = rhs_with(f, &c, 0)?;
    advance(&solver, f, first, dt, cfg)
}

/// One row of the per-step diagnostics stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub step: usize,
    pub t: f64,
    /// Step that produced this row (0 for the initial row).
    pub dt: f64,
    pub sup: f64,
    /// `‖f‖_{L∞_m}` for each entry of the configured `m` list.
    pub weighted_sup: Vec<f64>,
    pub moments: MomentSet,
    pub min_value: f64,
    /// `∫₀ᵗ ‖f‖_∞ ds` by the trapezoid rule.
    pub continuation: f64,
    /// Cumulative mass added by clipping.
    pub clipped_mass: f64,
    /// Cumulative boundary terms `∫₀ᵗ ∮ φ F·n`.
    pub boundary: BoundaryFlux,
}

/// A recorded state together with `Q(f)` at that state.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub f: Distribution,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Completed,
    Ceiling,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: VelocityGrid,
    pub config: SolverConfig,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<Diagnostics>,
    pub stop: StopReason,
    /// Set when clipping is off and the density went below the flag level.
    pub negativity_flagged: bool,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.t).collect()
    }

    /// Index of `m` in the configured list.
    pub fn weight_index(&self, m: f64) -> Option<usize> {
        self.config
            .m_list
            .iter()
            .position(|x| (x - m).abs() < 1e-12)
    }

    pub fn final_state(&self) -> Option<&Distribution> {
        self.snapshots.last().map(|s| &s.f)
    }
}

fn record(
    f: &Distribution,
    step: usize,
    dt: f64,
    cfg: &SolverConfig,
    prev: Option<&Diagnostics>,
    extra: (f64, BoundaryFlux),
) -> Result<Diagnostics> {
    let sup = f.sup_norm();
    let weighted_sup = cfg
        .m_list
        .iter()
        .map(|&m| f.weighted_sup_norm(m))
        .collect::<Result<Vec<_>>>()?;
    let (continuation, clipped_mass, mut boundary) = match prev {
        Some(p) => (
            p.continuation + 0.5 * dt * (p.sup + sup),
            p.clipped_mass + extra.0,
            p.boundary,
        ),
        None => (0.0, 0.0, BoundaryFlux::default()),
    };
    boundary.add(&extra.1);
    Ok(Diagnostics {
        step,
        t: f.time(),
        dt,
        sup,
        weighted_sup,
        moments: f.moments(),
        min_value: f.min_value(),
        continuation,
        clipped_mass,
        boundary,
    })
}

/// Advances `f_in` to `cfg.t_end`, or until `‖f‖_∞` passes the ceiling.
pub fn run(f_in: &Distribution, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if f_in.min_value() < 0.0 {
        return Err(LandauError::param(
            "f_in",
            format!("initial data must be >= 0, min {}", f_in.min_value()),
        ));
    }
    let grid = *f_in.grid();
    let solver = CoefficientSolver::new(&grid);
    let t0 = f_in.time();
    let t_end = t0 + cfg.t_end;
    let mut f = f_in.clone();
    let mut diagnostics = vec![record(
        &f,
        0,
        0.0,
        cfg,
        None,
        (0.0, BoundaryFlux::default()),
    )?];
    let mut snapshots = Vec::new();
    let mut stop = StopReason::Completed;
    let mut negativity_flagged = false;
    let mut steps = 0;

    loop {
        let remaining = t_end - f.time();
        if remaining <= 1e-12 * t_end.abs().max(1.0) {
            break;
        }
        if let Some(ceiling) = cfg.ceiling {
            if f.sup_norm() > ceiling {
                stop = StopReason::Ceiling;
                break;
            }
        }
        let c = solver.compute(&f)?;
        let first = rhs_with(&f, &c, 0)?;
        if steps % cfg.snapshot_stride == 0 {
            snapshots.push(Snapshot {
                f: f.clone(),
                rhs: first.0.clone(),
            });
        }
        let dt = match cfg.dt_policy {
            DtPolicy::Fixed(dt) => dt,
            DtPolicy::Adaptive => {
                let bounds = stability_bounds(&f, &c);
                if bounds.iter().any(|b| b.is_nan()) {
                    return Err(LandauError::UnstableBound(format!(
                        "{bounds:?} at t = {}",
                        f.time()
                    )));
                }
                cfg.safety * bounds.iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
        .min(remaining);
        let outcome = advance(&solver, &f, first, dt, cfg)?;
        steps += 1;
        let mut next = outcome.f;
        if (next.time() - t_end).abs() <= 1e-12 * t_end.abs().max(1.0) {
            next.set_time(t_end);
        }
        if cfg.clipping == Clipping::Off && next.min_value() < -NEGATIVITY_FLAG * next.sup_norm() {
            negativity_flagged = true;
        }
        let row = record(
            &next,
            steps,
            dt,
            cfg,
            diagnostics.last(),
            (outcome.clipped_mass, outcome.flux),
        )?;
        diagnostics.push(row);
        f = next;
    }
    if snapshots.last().map(|s| s.f.time()) != Some(f.time()) {
        let (rhs, _) = evaluate(&solver, &f, 0)?;
        snapshots.push(Snapshot { f: f.clone(), rhs });
    }
    Ok(Trajectory {
        grid,
        config: cfg.clone(),
        snapshots,
        diagnostics,
        stop,
        negativity_flagged,
    })
}
