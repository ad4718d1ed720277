//! Trajectory post-processing: the fitted Grönwall constant `K̂` and the
//! Riccati bound `d/dt ‖f‖_∞ ≤ ‖f‖_∞²`.

use serde::{Deserialize, Serialize};

use super::is_integer;
use crate::error::{LandauError, Result};
use crate::evolution::Trajectory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub m: f64,
    pub n: usize,
    pub times: Vec<f64>,
    /// `log(‖f(t)‖_{L∞_m} / ‖f_in‖_{L∞_m}) / ∫₀ᵗ ‖f‖_∞`; `None` while the
    /// continuation integral is still zero.
    pub k_hat: Vec<Option<f64>>,
    /// Running supremum of `k_hat`.
    pub running_sup: Vec<Option<f64>>,
    pub sup_k_hat: Option<f64>,
}

fn check_weight(m: f64) -> Result<()> {
    if !(m > 2.0 && m < 5.0) || is_integer(m) {
        return Err(LandauError::param(
            "m",
            format!("need a non-integer m in (2, 5), got {m}"),
        ));
    }
    Ok(())
}

/// `K̂(t)` from sampled `‖f‖_{L∞_m}` and continuation integral.
pub fn envelope_from_series(
    m: f64,
    n: usize,
    times: &[f64],
    weighted: &[f64],
    continuation: &[f64],
) -> Result<EnvelopeReport> {
    if times.len() != weighted.len() || times.len() != continuation.len() || times.is_empty() {
        return Err(LandauError::param(
            "series",
            "times, norms and integrals must have equal nonzero length",
        ));
    }
    let base = weighted[0];
    if !(base > 0.0) {
        return Err(LandauError::param(
            "series",
            "initial weighted norm must be positive",
        ));
    }
    let k_hat: Vec<Option<f64>> = weighted
        .iter()
        .zip(continuation)
        .map(|(&w, &c)| (c > 0.0).then(|| (w / base).ln() / c))
        .collect();
    let mut running = None;
    let running_sup: Vec<Option<f64>> = k_hat
        .iter()
        .map(|k| {
            if let Some(k) = *k {
                running = Some(running.map_or(k, |r: f64| r.max(k)));
            }
            running
        })
        .collect();
    Ok(EnvelopeReport {
        m,
        n,
        times: times.to_vec(),
        k_hat,
        sup_k_hat: running,
        running_sup,
    })
}

pub fn gronwall_envelope(traj: &Trajectory, m: f64) -> Result<EnvelopeReport> {
    check_weight(m)?;
    let slot = traj.weight_index(m).ok_or_else(|| {
        LandauError::param("m", format!("trajectory does not record the weight {m}"))
    })?;
    let times: Vec<f64> = traj.diagnostics.iter().map(|d| d.t).collect();
    let weighted: Vec<f64> = traj
        .diagnostics
        .iter()
        .map(|d| d.weighted_sup[slot])
        .collect();
    let continuation: Vec<f64> = traj.diagnostics.iter().map(|d| d.continuation).collect();
    envelope_from_series(m, traj.grid.n(), &times, &weighted, &continuation)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementPair {
    pub n_coarse: usize,
    pub n_fine: usize,
    pub k_coarse: f64,
    pub k_fine: f64,
    /// `|K̂_fine − K̂_coarse| / |K̂_fine|`.
    pub relative_change: f64,
}

pub fn refinement_pair(coarse: &EnvelopeReport, fine: &EnvelopeReport) -> Result<RefinementPair> {
    let (Some(kc), Some(kf)) = (coarse.sup_k_hat, fine.sup_k_hat) else {
        return Err(LandauError::param(
            "envelope",
            "both reports need a finite sup K̂",
        ));
    };
    Ok(RefinementPair {
        n_coarse: coarse.n,
        n_fine: fine.n,
        k_coarse: kc,
        k_fine: kf,
        relative_change: (kf - kc).abs() / kf.abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiccatiReport {
    /// `((M_{k+1} − M_k)/Δt − M_k²) / M_k²` per step.
    pub margins: Vec<f64>,
    pub worst_margin: f64,
    pub worst_time: f64,
    /// `max_{t ≤ s} (1/M(t) − 1/M(s)) − (s − t)`; `≤ 0` when the integrated
    /// bound holds.
    pub worst_integrated: f64,
}

pub fn riccati_from_series(times: &[f64], maxima: &[f64]) -> Result<RiccatiReport> {
    if times.len() != maxima.len() || times.len() < 2 {
        return Err(LandauError::param(
            "series",
            "need at least two (t, M) samples of equal length",
        ));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(LandauError::param("series", "times must increase strictly"));
    }
    let mut margins = Vec::with_capacity(times.len() - 1);
    let (mut worst_margin, mut worst_time) = (f64::NEG_INFINITY, times[0]);
    for k in 0..times.len() - 1 {
        let m = maxima[k];
        if m <= 0.0 {
            margins.push(0.0);
            continue;
        }
        let rate = (maxima[k + 1] - m) / (times[k + 1] - times[k]);
        let margin = (rate - m * m) / (m * m);
        if margin > worst_margin {
            worst_margin = margin;
            worst_time = times[k];
        }
        margins.push(margin);
    }
    let mut worst_integrated = f64::NEG_INFINITY;
    for i in 0..times.len() {
        if maxima[i] <= 0.0 {
            continue;
        }
        for j in i + 1..times.len() {
            if maxima[j] <= 0.0 {
                continue;
            }
            let gap = (1.0 / maxima[i] - 1.0 / maxima[j]) - (times[j] - times[i]);
            worst_integrated = worst_integrated.max(gap);
        }
    }
    Ok(RiccatiReport {
        margins,
        worst_margin,
        worst_time,
        worst_integrated,
    })
}

pub fn riccati_check(traj: &Trajectory) -> Result<RiccatiReport> {
    let times: Vec<f64> = traj.diagnostics.iter().map(|d| d.t).collect();
    let maxima: Vec<f64> = traj.diagnostics.iter().map(|d| d.sup).collect();
    riccati_from_series(&times, &maxima)
}
