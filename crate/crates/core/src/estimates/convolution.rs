//! `∫ |v−w|^{−α} ⟨w⟩^{−m} dw` by radial-angular quadrature centred at `v`.
//!
//! With `w = v + ρω` the integral is `∫ ρ^{2−α} S(ρ) dρ` where
//! `S(ρ) = 2π ∫_{−1}^{1} (1 + |v|² + ρ² + 2|v|ρx)^{−m/2} dx`. The angular
//! integral is done in the variable `log(1 + |v|² + ρ² + 2|v|ρx)`, which
//! removes the near-collision peak. The radial range is split into a
//! first panel with Gauss–Jacobi nodes for the weight `ρ^{2−α}`, unit-width
//! panels across `ρ ≈ |v|`, geometric panels, and a tail panel with
//! `ρ = R t^{−1/q}`, `q = α + m − 3`, which flattens the `ρ^{2−α−m}` decay.

use gauss_quad::{GaussJacobi, GaussLegendre};
use serde::{Deserialize, Serialize};

use super::BoundReport;
use crate::error::{LandauError, Result};
use crate::grid::bracket;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvolutionRegime {
    /// `3 − α < m < 3`: envelope `⟨v⟩^{3−α−m}`.
    Slow,
    /// `m = 3`: envelope `⟨v⟩^{−α} log(1 + ⟨v⟩)`.
    Critical,
    /// `m > 3`: envelope `⟨v⟩^{−α}`.
    Fast,
}

impl ConvolutionRegime {
    pub fn classify(alpha: f64, m: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 3.0) {
            return Err(LandauError::param(
                "alpha",
                format!("need 0 < alpha < 3, got {alpha}"),
            ));
        }
        if !(m > 3.0 - alpha) || !m.is_finite() {
            return Err(LandauError::param(
                "m",
                format!(
                    "the integral diverges at infinity unless m > 3 - alpha = {}",
                    3.0 - alpha
                ),
            ));
        }
        Ok(if (m - 3.0).abs() < 1e-12 {
            ConvolutionRegime::Critical
        } else if m < 3.0 {
            ConvolutionRegime::Slow
        } else {
            ConvolutionRegime::Fast
        })
    }

    pub fn envelope(self, alpha: f64, m: f64, v: [f64; 3]) -> f64 {
        let b = bracket(v);
        match self {
            ConvolutionRegime::Slow => b.powf(3.0 - alpha - m),
            ConvolutionRegime::Critical => b.powf(-alpha) * (1.0 + b).ln(),
            ConvolutionRegime::Fast => b.powf(-alpha),
        }
    }

    fn label(self) -> &'static str {
        match self {
            ConvolutionRegime::Slow => "slow-decay",
            ConvolutionRegime::Critical => "critical",
            ConvolutionRegime::Fast => "fast-decay",
        }
    }
}

/// Gauss–Legendre orders per radial panel and for the angular integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quadrature {
    pub panel_nodes: usize,
    pub angular_nodes: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            panel_nodes: 12,
            angular_nodes: 12,
        }
    }
}

impl Quadrature {
    pub fn doubled(self) -> Self {
        Self {
            panel_nodes: 2 * self.panel_nodes,
            angular_nodes: 2 * self.angular_nodes,
        }
    }
}

fn rule(nodes: usize) -> Result<GaussLegendre> {
    GaussLegendre::new(nodes).map_err(|e| LandauError::param("nodes", e.to_string()))
}

/// `∫ |v−w|^{−α} ⟨w⟩^{−m} dw` for `|v| = r`.
pub fn convolution_integral(alpha: f64, m: f64, r: f64, quad: Quadrature) -> Result<f64> {
    ConvolutionRegime::classify(alpha, m)?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(LandauError::param(
            "v",
            format!("|v| must be finite, got {r}"),
        ));
    }
    let radial = rule(quad.panel_nodes)?;
    let angular = rule(quad.angular_nodes)?;
    let c0 = 1.0 + r * r;
    let shell = |rho: f64| -> f64 {
        let c = c0 + rho * rho;
        let b = 2.0 * r * rho;
        if b <= 1e-12 * c {
            return 4.0 * std::f64::consts::PI * c.powf(-0.5 * m);
        }
        // x ↦ y = log(c + b x): dx = e^y / b dy.
        let e = 1.0 - 0.5 * m;
        let (lo, hi) = ((c - b).ln(), (c + b).ln());
        2.0 * std::f64::consts::PI / b * angular.integrate(lo, hi, |y| (e * y).exp())
    };

    // ρ^{2−α} on the first panel is the Jacobi weight (1 + x)^{2−α} after
    // ρ = r₀(1 + x)/2.
    let r0: f64 = 0.5;
    let first = GaussJacobi::new(quad.panel_nodes, 0.0, 2.0 - alpha)
        .map_err(|e| LandauError::param("nodes", e.to_string()))?;
    let mut total = (0.5 * r0).powf(2.0 - alpha) * first.integrate(0.0, r0, shell);

    let mut a = r0;
    let unit_end = r + 4.0;
    while a < unit_end - 1e-12 {
        let b = (a + 0.5).min(unit_end);
        total += radial.integrate(a, b, |rho| rho.powf(2.0 - alpha) * shell(rho));
        a = b;
    }
    let far = 256.0 * unit_end;
    while a < far {
        let b = 2.0 * a;
        total += radial.integrate(a, b, |rho| rho.powf(2.0 - alpha) * shell(rho));
        a = b;
    }
    // Tail: ρ = R t^{−1/q}, dρ = (R/q) t^{−1/q − 1} dt.
    let q = alpha + m - 3.0;
    let big_r = a;
    total += radial.integrate(0.0, 1.0, |t| {
        if t <= 0.0 {
            return 0.0;
        }
        let rho = big_r * t.powf(-1.0 / q);
        rho.powf(2.0 - alpha) * shell(rho) * big_r / q * t.powf(-1.0 / q - 1.0)
    });
    Ok(total)
}

/// Ratios of the convolution integral to the regime's envelope.
pub fn convolution_bound_check(
    alpha: f64,
    m: f64,
    v_samples: &[[f64; 3]],
    quad: Quadrature,
) -> Result<BoundReport> {
    let regime = ConvolutionRegime::classify(alpha, m)?;
    let ratios = v_samples
        .iter()
        .map(|&v| {
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            Ok(convolution_integral(alpha, m, r, quad)? / regime.envelope(alpha, m, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = BoundReport::new(regime.label(), v_samples.to_vec(), ratios);
    report.alpha = Some(alpha);
    report.m = Some(m);
    Ok(report)
}
