//! The scaling symmetry `f ↦ λ⁻¹ f(t/λ, v/μ)` and a rate classifier for
//! `‖f(t)‖_∞ ~ C (T* − t)^{−β}`.

use serde::{Deserialize, Serialize};

use crate::error::{LandauError, Result};
use crate::evolution::{run, DtPolicy, SolverConfig};
use crate::grid::Distribution;
use crate::interp::tricubic;
use crate::sum::CompensatedSum;

/// A rescaled field and the mass added by zeroing negative interpolants.
#[derive(Debug, Clone)]
pub struct Rescaled {
    pub f: Distribution,
    pub clamped_mass: f64,
}

/// `λ⁻¹ f(v/μ)` on the same lattice, time tag multiplied by `λ`.
pub fn rescale(f: &Distribution, mu: f64, lam: f64) -> Result<Distribution> {
    rescale_with_report(f, mu, lam).map(|r| r.f)
}

pub fn rescale_with_report(f: &Distribution, mu: f64, lam: f64) -> Result<Rescaled> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(LandauError::param("mu", format!("need mu > 0, got {mu}")));
    }
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(LandauError::param(
            "lam",
            format!("need lambda > 0, got {lam}"),
        ));
    }
    if mu * 0.8 > 1.0 {
        log::warn!("mu = {mu} pushes the 0.8 L ball outside the lattice");
    }
    let grid = *f.grid();
    let mut clamped = CompensatedSum::new();
    let values: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let v = grid.node_at(idx).map(|x| x / mu);
            let g = tricubic(&grid, f.values(), v) / lam;
            if g < 0.0 {
                clamped.add(-g);
                0.0
            } else {
                g
            }
        })
        .collect();
    Ok(Rescaled {
        f: Distribution::new(grid, values, f.time() * lam)?,
        clamped_mass: clamped.value() * grid.cell_volume(),
    })
}

/// `‖x − y‖₂ / ‖y‖₂` over the lattice.
fn relative_l2(x: &[f64], y: &[f64]) -> f64 {
    let num: CompensatedSum = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).collect();
    let den: CompensatedSum = y.iter().map(|b| b * b).collect();
    if den.value() == 0.0 {
        return if num.value() == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    (num.value() / den.value()).sqrt()
}

/// Largest relative L² gap between "evolve then rescale" and "rescale then
/// evolve for `λ t_end`", over snapshot times the two runs share.
///
/// Both runs live on the lattice of `f_in`. A fixed step `dt` becomes `λ dt`
/// in the rescaled run, which makes the snapshot times line up.
pub fn symmetry_residual(
    f_in: &Distribution,
    mu: f64,
    lam: f64,
    t_end: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    let direct_cfg = SolverConfig {
        t_end,
        ..cfg.clone()
    };
    let scaled_cfg = SolverConfig {
        t_end: lam * t_end,
        dt_policy: match cfg.dt_policy {
            DtPolicy::Fixed(dt) => DtPolicy::Fixed(lam * dt),
            DtPolicy::Adaptive => DtPolicy::Adaptive,
        },
        ..cfg.clone()
    };
    let direct = run(f_in, &direct_cfg)?;
    let scaled = run(&rescale(f_in, mu, lam)?, &scaled_cfg)?;
    let tol = 1e-9 * (lam * t_end).abs().max(1.0);
    let mut worst: f64 = 0.0;
    for snap in &direct.snapshots {
        let target = lam * snap.f.time();
        if let Some(other) = scaled
            .snapshots
            .iter()
            .find(|s| (s.f.time() - target).abs() <= tol)
        {
            let mapped = rescale(&snap.f, mu, lam)?;
            worst = worst.max(relative_l2(other.f.values(), mapped.values()));
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlowupClass {
    /// `|β − 1| ≤ 0.1`.
    TypeI,
    /// A log correction lowers the residual by 25% or more and its
    /// exponent is within the Type I band.
    MarginalLog,
    /// `β < 0.9`: `λ⁻¹` integrable, so the continuation criterion applies.
    ExcludedIntegrable,
    /// `β > 1.1`: faster than the Riccati ceiling allows.
    ExcludedAboveRiccati,
    /// The norm is not increasing at the end of the series.
    NoBlowUpSignature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub t_star: f64,
    pub beta: f64,
    /// Standard error of `β` from the log-log regression.
    pub beta_stderr: f64,
    pub log_c: f64,
    /// RMS residual in `log ‖f‖`.
    pub residual: f64,
    /// RMS residual and exponent with an added `log log(e + 1/(T* − t))`
    /// regressor.
    pub log_residual: f64,
    pub beta_log: f64,
    pub log_flag: bool,
    pub class: BlowupClass,
}

const TYPE_I_BAND: f64 = 0.1;
const LOG_GAIN: f64 = 0.25;
const MIN_SAMPLES: usize = 10;

struct Linear {
    coef: Vec<f64>,
    rms: f64,
    slope_stderr: f64,
}

/// Least squares of `y` on `[1, x₁]` or `[1, x₁, x₂]`, centred, solved by
/// Cramer's rule.
fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Option<Linear> {
    let k = y.len() as f64;
    let mean = |c: &[f64]| c.iter().sum::<f64>() / k;
    let y_bar = mean(y);
    let means: Vec<f64> = columns.iter().map(|c| mean(c)).collect();
    let cov = |a: &[f64], ma: f64, b: &[f64], mb: f64| -> f64 {
        a.iter().zip(b).map(|(x, z)| (x - ma) * (z - mb)).sum()
    };
    let (slopes, inverse_00) = match columns {
        [x] => {
            let sxx = cov(x, means[0], x, means[0]);
            (vec![cov(x, means[0], y, y_bar) / sxx], 1.0 / sxx)
        }
        [x, z] => {
            let (mx, mz) = (means[0], means[1]);
            let (sxx, szz, sxz) = (cov(x, mx, x, mx), cov(z, mz, z, mz), cov(x, mx, z, mz));
            let (sxy, szy) = (cov(x, mx, y, y_bar), cov(z, mz, y, y_bar));
            let det = sxx * szz - sxz * sxz;
            (
                vec![(sxy * szz - szy * sxz) / det, (szy * sxx - sxy * sxz) / det],
                szz / det,
            )
        }
        _ => return None,
    };
    if slopes.iter().any(|s| !s.is_finite()) {
        return None;
    }
    let intercept = y_bar - slopes.iter().zip(&means).map(|(s, m)| s * m).sum::<f64>();
    let sse: f64 = (0..y.len())
        .map(|i| {
            let fit = intercept
                + slopes
                    .iter()
                    .zip(columns)
                    .map(|(s, c)| s * c[i])
                    .sum::<f64>();
            (y[i] - fit).powi(2)
        })
        .sum();
    let dof = y.len().saturating_sub(columns.len() + 1).max(1) as f64;
    let mut coef = vec![intercept];
    coef.extend(slopes);
    Some(Linear {
        coef,
        rms: (sse / k).sqrt(),
        slope_stderr: (sse / dof * inverse_00).sqrt(),
    })
}

/// Power-law fit at a fixed `T*`: regress `log N` on `−log(T* − t)`.
fn power_fit(times: &[f64], log_n: &[f64], t_star: f64) -> Option<Linear> {
    let x: Vec<f64> = times.iter().map(|t| -(t_star - t).ln()).collect();
    least_squares(&[x], log_n)
}

/// As [`power_fit`] with the extra regressor `log log(e + 1/(T* − t))`.
fn log_corrected_fit(times: &[f64], log_n: &[f64], t_star: f64) -> Option<Linear> {
    let x: Vec<f64> = times.iter().map(|t| -(t_star - t).ln()).collect();
    let loglog: Vec<f64> = times
        .iter()
        .map(|t| (std::f64::consts::E + 1.0 / (t_star - t)).ln().ln())
        .collect();
    least_squares(&[x, loglog], log_n)
}

/// Minimises `objective` over `[lo, hi]`: a uniform scan for the basin, then
/// golden-section refinement inside it.
fn golden_section(objective: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    const SCAN: usize = 64;
    let pts: Vec<f64> = (0..=SCAN)
        .map(|i| lo + (hi - lo) * i as f64 / SCAN as f64)
        .collect();
    let values: Vec<f64> = pts.iter().map(|&p| objective(p)).collect();
    let best = (0..values.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    let (mut a, mut b) = (pts[best.saturating_sub(1)], pts[(best + 1).min(SCAN)]);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = objective(d);
        }
    }
    0.5 * (a + b)
}

/// Fits `‖f(t)‖_∞ ≈ C (T* − t)^{−β}` to `(t, norm)` pairs.
///
/// `T*` is searched over `t_last + span·e^s` for `s ∈ [−25, 3]`, or within a
/// factor 10 of the hint's gap when one is given. The log-corrected model
/// gets its own `T*` search.
pub fn fit_blowup_rate(series: &[(f64, f64)], t_star_hint: Option<f64>) -> Result<RateFit> {
    if series.len() < MIN_SAMPLES {
        return Err(LandauError::param(
            "series",
            format!("need at least {MIN_SAMPLES} samples, got {}", series.len()),
        ));
    }
    if series
        .iter()
        .any(|&(t, n)| !t.is_finite() || !(n > 0.0) || !n.is_finite())
    {
        return Err(LandauError::param(
            "series",
            "times must be finite and norms positive",
        ));
    }
    if series.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(LandauError::param("series", "times must increase strictly"));
    }
    let times: Vec<f64> = series.iter().map(|p| p.0).collect();
    let log_n: Vec<f64> = series.iter().map(|p| p.1.ln()).collect();
    let t_last = times[times.len() - 1];
    let span = t_last - times[0];

    let tail = &series[series.len() / 2..];
    if tail.windows(2).any(|w| w[1].1 <= w[0].1) {
        return Ok(RateFit {
            t_star: f64::NAN,
            beta: f64::NAN,
            beta_stderr: f64::NAN,
            log_c: f64::NAN,
            residual: f64::NAN,
            log_residual: f64::NAN,
            beta_log: f64::NAN,
            log_flag: false,
            class: BlowupClass::NoBlowUpSignature,
        });
    }

    let (lo, hi) = match t_star_hint {
        Some(h) if h > t_last => {
            let s = ((h - t_last) / span).ln();
            (s - 10f64.ln(), s + 10f64.ln())
        }
        _ => (-25.0, 3.0),
    };
    let t_of = |s: f64| t_last + span * s.exp();
    let objective = |s: f64| power_fit(&times, &log_n, t_of(s)).map_or(f64::INFINITY, |l| l.rms);
    let t_star = t_of(golden_section(objective, lo, hi));
    let fit = power_fit(&times, &log_n, t_star)
        .ok_or_else(|| LandauError::param("series", "degenerate regression"))?;
    let (log_c, beta) = (fit.coef[0], fit.coef[1]);

    let log_objective =
        |s: f64| log_corrected_fit(&times, &log_n, t_of(s)).map_or(f64::INFINITY, |l| l.rms);
    let (log_residual, beta_log) =
        log_corrected_fit(&times, &log_n, t_of(golden_section(log_objective, lo, hi)))
            .map_or((fit.rms, beta), |l| (l.rms, l.coef[1]));
    let floor = 1e-12 * log_n.iter().fold(1.0_f64, |a, b| a.max(b.abs()));
    let log_flag = fit.rms > floor && log_residual <= (1.0 - LOG_GAIN) * fit.rms;

    let class = if log_flag && (beta_log - 1.0).abs() <= TYPE_I_BAND {
        BlowupClass::MarginalLog
    } else if (beta - 1.0).abs() <= TYPE_I_BAND {
        BlowupClass::TypeI
    } else if beta < 1.0 {
        BlowupClass::ExcludedIntegrable
    } else {
        BlowupClass::ExcludedAboveRiccati
    };
    Ok(RateFit {
        t_star,
        beta,
        beta_stderr: fit.slope_stderr,
        log_c,
        residual: fit.rms,
        log_residual,
        beta_log,
        log_flag,
        class,
    })
}
