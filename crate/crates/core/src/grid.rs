//! Velocity-space lattice, distributions on it, weighted norms and moments.
//!
//! The lattice is the cube `[-L, L)^3` split into `n^3` cells of side
//! `h = 2L/n`; node `(i, j, k)` sits at `(-L + i h, -L + j h, -L + k h)`, so
//! the origin is node `(n/2, n/2, n/2)`. Integrals use the midpoint rule
//! `∫ g dv ≈ h^3 Σ g(v_ijk)`, which is spectrally accurate for smooth fields
//! that have decayed at the boundary. Values are stored row-major with `k`
//! fastest.

use serde::{Deserialize, Serialize};

use crate::error::{LandauError, Result};
use crate::sum::CompensatedSum;

/// Japanese bracket `⟨v⟩ = sqrt(1 + |v|^2)`.
#[inline]
pub fn bracket(v: [f64; 3]) -> f64 {
    (1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[inline]
pub(crate) fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Uniform cubic velocity lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    n: usize,
    extent: f64,
    spacing: f64,
}

impl VelocityGrid {
    /// `n` points per axis (even, at least 4) on `[-extent, extent)`.
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(LandauError::InvalidGrid(format!(
                "points per axis must be even and >= 4, got {n}"
            )));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(LandauError::InvalidGrid(format!(
                "half-width must be positive and finite, got {extent}"
            )));
        }
        Ok(Self {
            n,
            extent,
            spacing: 2.0 * extent / n as f64,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Half-width `L`.
    #[inline]
    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Lattice spacing `h`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing * self.spacing * self.spacing
    }

    /// Number of nodes, `n^3`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of lattice index `i` along any axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.extent + i as f64 * self.spacing
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn unindex(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    #[inline]
    pub fn node_at(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.unindex(idx);
        self.node(i, j, k)
    }

    /// Index of the node at the origin.
    pub fn origin_index(&self) -> usize {
        let c = self.n / 2;
        self.index(c, c, c)
    }

    /// Samples `g` at every node in storage order.
    pub fn sample(&self, g: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|idx| g(self.node_at(idx))).collect()
    }

    /// Whether node `idx` is at least `shell` cells away from every face.
    #[inline]
    pub fn is_interior(&self, idx: usize, shell: usize) -> bool {
        let [i, j, k] = self.unindex(idx);
        let hi = self.n - shell;
        i >= shell && j >= shell && k >= shell && i < hi && j < hi && k < hi
    }

    /// Whether `other` describes the same lattice.
    pub fn same_as(&self, other: &VelocityGrid) -> bool {
        self.n == other.n && self.extent.to_bits() == other.extent.to_bits()
    }
}

/// Kinetic density `f(v)` at a fixed time on a [`VelocityGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    grid: VelocityGrid,
    values: Vec<f64>,
    time: f64,
}

impl Distribution {
    /// Wraps node values; rejects wrong lengths and non-finite entries.
    pub fn new(grid: VelocityGrid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LandauError::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(LandauError::NonFinite {
                index,
                context: "distribution values".into(),
            });
        }
        Ok(Self { grid, values, time })
    }

    pub fn zeros(grid: VelocityGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
            time: 0.0,
        }
    }

    pub fn from_fn(grid: VelocityGrid, g: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        Self::new(grid, grid.sample(g), 0.0)
    }

    #[inline]
    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    /// `c f`, keeping the time tag.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|x| c * x).collect(),
            time: self.time,
        }
    }

    /// Node-wise sum; panics on lattice mismatch.
    pub fn added(&self, other: &Distribution) -> Self {
        assert!(self.grid.same_as(&other.grid), "lattice mismatch");
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            time: self.time,
        }
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Grid maximum, the discrete stand-in for `‖f‖_∞`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    /// `max_v ⟨v⟩^m |f(v)|` over the nodes.
    pub fn weighted_sup_norm(&self, m: f64) -> Result<f64> {
        if !(m >= 0.0) {
            return Err(LandauError::param(
                "m",
                format!("weight must be >= 0, got {m}"),
            ));
        }
        Ok(self
            .values
            .iter()
            .enumerate()
            .fold(0.0_f64, |acc, (idx, x)| {
                acc.max(bracket(self.grid.node_at(idx)).powf(m) * x.abs())
            }))
    }

    /// `(h^3 Σ ⟨v⟩^{mp} |f|^p)^{1/p}`.
    pub fn lp_m_norm(&self, p: f64, m: f64) -> Result<f64> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(LandauError::param(
                "p",
                format!("exponent must be >= 1, got {p}"),
            ));
        }
        let mp = m * p;
        let s: CompensatedSum = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, x)| bracket(self.grid.node_at(idx)).powf(mp) * x.abs().powf(p))
            .collect();
        Ok((self.grid.cell_volume() * s.value()).powf(1.0 / p))
    }

    /// Mass, momentum, energy and entropy by the midpoint rule.
    pub fn moments(&self) -> MomentSet {
        let mut mass = CompensatedSum::new();
        let mut mom = [CompensatedSum::new(); 3];
        let mut energy = CompensatedSum::new();
        let mut entropy = CompensatedSum::new();
        for (idx, &x) in self.values.iter().enumerate() {
            let v = self.grid.node_at(idx);
            mass.add(x);
            for d in 0..3 {
                mom[d].add(v[d] * x);
            }
            energy.add((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * x);
            // 0 log 0 = 0; nonpositive values carry no entropy.
            if x > 0.0 {
                entropy.add(x * x.ln());
            }
        }
        let dv = self.grid.cell_volume();
        MomentSet {
            mass: dv * mass.value(),
            momentum: [
                dv * mom[0].value(),
                dv * mom[1].value(),
                dv * mom[2].value(),
            ],
            energy: dv * energy.value(),
            entropy: dv * entropy.value(),
        }
    }

    /// Midpoint-rule integral of `w(v) f(v)`.
    pub fn integrate_with(&self, w: impl Fn([f64; 3]) -> f64) -> f64 {
        let s: CompensatedSum = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, x)| w(self.grid.node_at(idx)) * x)
            .collect();
        self.grid.cell_volume() * s.value()
    }

    /// Fraction of the absolute mass sitting in the outermost cell layer.
    pub fn boundary_mass_fraction(&self) -> f64 {
        let mut edge = CompensatedSum::new();
        let mut total = CompensatedSum::new();
        for (idx, x) in self.values.iter().enumerate() {
            total.add(x.abs());
            if !self.grid.is_interior(idx, 1) {
                edge.add(x.abs());
            }
        }
        if total.value() > 0.0 {
            edge.value() / total.value()
        } else {
            0.0
        }
    }
}

/// Velocity moments of a distribution.
///
/// `energy` is `∫ |v|^2 f dv` (no factor 1/2), the convention of the
/// hydrodynamic bounds; [`MomentSet::kinetic_energy`] gives the halved value
/// used by the fluid equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub mass: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
    /// `∫ f log f dv` with `0 log 0 = 0`.
    pub entropy: f64,
}

impl MomentSet {
    /// `½ ∫ |v|^2 f dv`.
    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.energy
    }
}
