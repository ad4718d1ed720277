//! Deterministic solver for the spatially homogeneous Landau equation with
//! Coulomb potential on a truncated velocity lattice, together with the
//! numerical checks that accompany it: weighted coefficient bounds, the
//! Grönwall envelope for weighted sup norms, the level-set energy inequality,
//! the Riccati bound on the maximum, blow-up rate classification and a small
//! hydrodynamic-limit laboratory (local Maxwellians and 1D Euler).
//!
//! Module map:
//!
//! * [`grid`]: velocity lattice, distributions, weighted norms and moments.
//! * [`coefficients`]: the nonlocal coefficients `A[f]`, `a[f]`, `∇a[f]`.
//! * [`collision`]: divergence, non-divergence and collisional forms of `Q(f)`.
//! * [`evolution`]: explicit SSP time stepping and trajectory diagnostics.
//! * [`estimates`]: quadrature and trajectory-based bound verifiers.
//! * [`blowup`]: scaling symmetry and blow-up rate fits.
//! * [`hydro`]: local Maxwellians, 1D Euler with HLL flux and entropy traces.

// NaN-rejecting guards are written `!(x > 0.0)` on purpose, and lattice
// loops index several parallel arrays by node. Stage combiners take the
// stage states and their bookkeeping as separate arguments.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments
)]

pub mod blowup;
pub mod coefficients;
pub mod collision;
pub mod error;
pub mod estimates;
pub mod evolution;
pub mod fft;
pub mod grid;
pub mod hydro;
pub mod interp;
pub mod linalg;
pub mod profiles;
pub mod snapshot;
pub mod sum;

pub use coefficients::{CoefficientField, CoefficientSolver};
pub use error::{LandauError, Result};
pub use evolution::{SolverConfig, Trajectory};
pub use grid::{bracket, Distribution, MomentSet, VelocityGrid};
