//! Nonlocal Landau coefficients
//! `a[f] = (1/(4π|·|)) * f`, `A[f] = (Π/(8π|·|)) * f` and `∇a[f]`.
//!
//! All ten component fields come from one forward transform of the
//! zero-padded density and five inverse transforms, each of which carries
//! two real outputs as the real and imaginary parts of a complex field.

mod kernel;
pub mod verify;

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{LandauError, Result};
use crate::fft::Fft3;
use crate::grid::{Distribution, VelocityGrid};
use crate::linalg::{self, Sym3};

pub(crate) use kernel::{effective_kernels, oversampled_side, symbols, wavenumber};
pub use kernel::{Component, KernelBank, ProjectionKernel, COMPONENTS};

/// Boundary-layer mass fraction above which convolutions warn about
/// truncation.
pub const BOUNDARY_MASS_WARNING: f64 = 1e-6;

/// `A`, `a` and `∇a` at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    grid: VelocityGrid,
    a: Vec<f64>,
    matrix: Vec<Sym3>,
    grad_a: Vec<[f64; 3]>,
}

impl CoefficientField {
    pub fn zeros(grid: VelocityGrid) -> Self {
        let len = grid.len();
        Self {
            grid,
            a: vec![0.0; len],
            matrix: vec![[0.0; 6]; len],
            grad_a: vec![[0.0; 3]; len],
        }
    }

    /// Assembles a field from the ten component arrays in [`Component`] order.
    pub fn from_components(grid: VelocityGrid, parts: Vec<Vec<f64>>) -> Result<Self> {
        if parts.len() != COMPONENTS || parts.iter().any(|p| p.len() != grid.len()) {
            return Err(LandauError::GridMismatch(format!(
                "expected {COMPONENTS} component arrays of length {}",
                grid.len()
            )));
        }
        let len = grid.len();
        let mut field = Self::zeros(grid);
        for idx in 0..len {
            field.a[idx] = parts[Component::Potential as usize][idx];
            for c in Component::ALL {
                if let Some((d, e)) = c.matrix_entry() {
                    field.matrix[idx][sym_slot(d, e)] = parts[c as usize][idx];
                } else if let Some(d) = c.gradient_axis() {
                    field.grad_a[idx][d] = parts[c as usize][idx];
                }
            }
        }
        Ok(field)
    }

    /// The ten component arrays in [`Component`] order.
    pub fn to_components(&self) -> Vec<Vec<f64>> {
        Component::ALL
            .iter()
            .map(|&c| {
                (0..self.grid.len())
                    .map(|idx| self.component(c, idx))
                    .collect()
            })
            .collect()
    }

    #[inline]
    pub fn component(&self, c: Component, idx: usize) -> f64 {
        if let Some((d, e)) = c.matrix_entry() {
            self.matrix[idx][sym_slot(d, e)]
        } else if let Some(d) = c.gradient_axis() {
            self.grad_a[idx][d]
        } else {
            self.a[idx]
        }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// `A` per node as `[xx, xy, xz, yy, yz, zz]`.
    pub fn matrix(&self) -> &[Sym3] {
        &self.matrix
    }

    pub fn grad_a(&self) -> &[[f64; 3]] {
        &self.grad_a
    }

    pub fn sup_a(&self) -> f64 {
        self.a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Largest eigenvalue of `A` over all nodes.
    pub fn max_eigenvalue(&self) -> f64 {
        self.matrix
            .par_iter()
            .map(|m| linalg::eigenvalues(m)[2])
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }

    /// Smallest eigenvalue of `A` over all nodes.
    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .par_iter()
            .map(|m| linalg::eigenvalues(m)[0])
            .reduce(|| f64::INFINITY, f64::min)
    }

    /// Largest operator norm `max |λ(A)|` over all nodes.
    pub fn max_operator_norm(&self) -> f64 {
        self.matrix
            .par_iter()
            .map(|m| {
                let e = linalg::eigenvalues(m);
                e[0].abs().max(e[2].abs())
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn max_grad_norm(&self) -> f64 {
        self.grad_a
            .iter()
            .fold(0.0_f64, |m, g| m.max(crate::grid::norm3(*g)))
    }

    /// `max |Tr A − a| / max |a|` (0 for a vanishing field).
    pub fn trace_defect(&self) -> f64 {
        let sup = self.sup_a();
        if sup == 0.0 {
            return 0.0;
        }
        self.matrix
            .iter()
            .zip(&self.a)
            .fold(0.0_f64, |m, (mat, a)| m.max((linalg::trace(mat) - a).abs()))
            / sup
    }
}

#[inline]
pub(crate) fn sym_slot(d: usize, e: usize) -> usize {
    let (d, e) = if d <= e { (d, e) } else { (e, d) };
    match (d, e) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// Evaluates coefficient fields on one lattice; cheap to clone.
#[derive(Debug, Clone)]
pub struct CoefficientSolver {
    bank: Arc<KernelBank>,
}

impl CoefficientSolver {
    /// Solver for `grid`; the kernel transforms are built once per lattice
    /// and shared process-wide.
    pub fn new(grid: &VelocityGrid) -> Self {
        Self {
            bank: KernelBank::shared(grid),
        }
    }

    pub fn grid(&self) -> &VelocityGrid {
        self.bank.grid()
    }

    pub fn kernel(&self) -> &ProjectionKernel {
        self.bank.kernel()
    }

    /// All coefficient fields of `f`.
    pub fn compute(&self, f: &Distribution) -> Result<CoefficientField> {
        let parts = self.convolve(f, &Component::ALL)?;
        CoefficientField::from_components(*self.grid(), parts)
    }

    /// `a[f] = (1/(4π|·|)) * f`.
    pub fn compute_a(&self, f: &Distribution) -> Result<Vec<f64>> {
        Ok(self.convolve(f, &[Component::Potential])?.remove(0))
    }

    /// `A[f] = (Π/(8π|·|)) * f` as per-node symmetric matrices.
    #[allow(non_snake_case)]
    pub fn compute_A(&self, f: &Distribution) -> Result<Vec<Sym3>> {
        let comps = [
            Component::Axx,
            Component::Axy,
            Component::Axz,
            Component::Ayy,
            Component::Ayz,
            Component::Azz,
        ];
        let parts = self.convolve(f, &comps)?;
        Ok((0..self.grid().len())
            .map(|idx| std::array::from_fn(|s| parts[s][idx]))
            .collect())
    }

    /// `∇a[f]`, the convolution of `f` with `∇(1/(4π|·|))`.
    pub fn compute_grad_a(&self, f: &Distribution) -> Result<Vec<[f64; 3]>> {
        let parts = self.convolve(f, &[Component::GradX, Component::GradY, Component::GradZ])?;
        Ok((0..self.grid().len())
            .map(|idx| [parts[0][idx], parts[1][idx], parts[2][idx]])
            .collect())
    }

    /// Convolutions of `f` with the requested kernels, restricted to the
    /// physical block.
    pub fn convolve(&self, f: &Distribution, comps: &[Component]) -> Result<Vec<Vec<f64>>> {
        let grid = *self.grid();
        if !f.grid().same_as(&grid) {
            return Err(LandauError::GridMismatch(format!(
                "density on n = {}, L = {}; solver on n = {}, L = {}",
                f.grid().n(),
                f.grid().extent(),
                grid.n(),
                grid.extent()
            )));
        }
        if let Some(index) = f.values().iter().position(|x| !x.is_finite()) {
            return Err(LandauError::NonFinite {
                index,
                context: "coefficient input".into(),
            });
        }
        let edge = f.boundary_mass_fraction();
        if edge > BOUNDARY_MASS_WARNING {
            log::warn!("boundary-layer mass fraction {edge:.2e} exceeds {BOUNDARY_MASS_WARNING:e}; truncation error likely");
        }

        let n = grid.n();
        let m = 2 * n;
        let fft = Fft3::shared(m);
        let mut spectrum = vec![Complex64::new(0.0, 0.0); m * m * m];
        spectrum
            .par_chunks_mut(m * m)
            .take(n)
            .enumerate()
            .for_each(|(i, plane)| {
                for j in 0..n {
                    let src = &f.values()[(i * n + j) * n..(i * n + j + 1) * n];
                    for (dst, &x) in plane[j * m..j * m + n].iter_mut().zip(src) {
                        *dst = Complex64::new(x, 0.0);
                    }
                }
            });
        fft.forward(&mut spectrum);

        let mut out = vec![Vec::new(); comps.len()];
        for (slot, pair) in comps.chunks(2).enumerate() {
            let k1 = self.bank.spectrum(pair[0]);
            let odd1 = pair[0].is_odd();
            let second = pair.get(1).map(|c| (self.bank.spectrum(*c), c.is_odd()));
            let mut buf = vec![Complex64::new(0.0, 0.0); m * m * m];
            buf.par_chunks_mut(m * m)
                .zip(spectrum.par_chunks(m * m))
                .enumerate()
                .for_each(|(p, (dst, src))| {
                    let base = p * m * m;
                    for (q, (d, s)) in dst.iter_mut().zip(src).enumerate() {
                        let mut z = apply(*s, k1[base + q], odd1);
                        if let Some((k2, odd2)) = second {
                            z += Complex64::i() * apply(*s, k2[base + q], odd2);
                        }
                        *d = z;
                    }
                });
            fft.inverse(&mut buf);
            let extract = |part: fn(&Complex64) -> f64| -> Vec<f64> {
                let mut field = vec![0.0; n * n * n];
                field
                    .par_chunks_mut(n * n)
                    .enumerate()
                    .for_each(|(i, plane)| {
                        for j in 0..n {
                            let row = &buf[(i * m + j) * m..(i * m + j) * m + n];
                            for (x, z) in plane[j * n..(j + 1) * n].iter_mut().zip(row) {
                                *x = part(z);
                            }
                        }
                    });
                field
            };
            out[2 * slot] = extract(|z| z.re);
            if pair.len() == 2 {
                out[2 * slot + 1] = extract(|z| z.im);
            }
        }
        Ok(out)
    }
}

/// `F · K̂` where `K̂ = s` (even kernel) or `K̂ = i s` (odd kernel).
#[inline]
fn apply(f: Complex64, s: f64, odd: bool) -> Complex64 {
    if odd {
        Complex64::new(-f.im * s, f.re * s)
    } else {
        f * s
    }
}
