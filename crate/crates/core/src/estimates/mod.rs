//! Numerical checks of the weighted bounds: the polynomial convolution
//! estimate, the coefficient bounds `v·A[h]v ≲ ⟨v⟩^{4−m}‖h‖_{L∞_m}` and
//! `‖A[h]‖_∞ ≲ ‖h‖_{L^p_m}`, the Grönwall envelope for weighted sup norms,
//! the Riccati bound on the maximum and the level-set energy inequality.
//!
//! Every check reports measured ratios against the claimed envelope; the
//! envelopes carry unspecified constants, so what is asserted downstream is
//! finiteness and stability, not a particular value.

mod coefficient_bounds;
mod convolution;
mod envelope;
mod level_set;

use serde::{Deserialize, Serialize};

pub use coefficient_bounds::{
    coercivity_bound_check, sample_directions, sample_set, sup_a_bound_check,
};
pub use convolution::{
    convolution_bound_check, convolution_integral, ConvolutionRegime, Quadrature,
};
pub use envelope::{
    envelope_from_series, gronwall_envelope, refinement_pair, riccati_check, riccati_from_series,
    EnvelopeReport, RefinementPair, RiccatiReport,
};
pub use level_set::{level_set_report, LevelRule, LevelSetReport, LevelSetRow};

/// Ratios `LHS / envelope` at sampled velocities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub label: String,
    pub samples: Vec<[f64; 3]>,
    pub ratios: Vec<f64>,
    pub sup_ratio: f64,
    pub alpha: Option<f64>,
    pub m: Option<f64>,
    pub p: Option<f64>,
    /// Both sides vanish (e.g. `h = 0`); `sup_ratio` is 0 by convention.
    pub degenerate: bool,
}

impl BoundReport {
    fn new(label: impl Into<String>, samples: Vec<[f64; 3]>, ratios: Vec<f64>) -> Self {
        let sup_ratio = ratios.iter().copied().fold(0.0, f64::max);
        Self {
            label: label.into(),
            samples,
            ratios,
            sup_ratio,
            alpha: None,
            m: None,
            p: None,
            degenerate: false,
        }
    }
}

/// `true` when `m` is within `1e-9` of an integer.
pub(crate) fn is_integer(m: f64) -> bool {
    (m - m.round()).abs() < 1e-9
}
