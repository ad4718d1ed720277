//! Cross-checks of the coefficient pipeline against a second, fully spectral
//! route on the oversampled box.
//!
//! The production fields come from `2n` Hockney convolutions with effective
//! kernels. Here the same density is transformed on the `3n` box and the
//! truncated symbols are applied directly, so the Laplacian of `a` and the
//! row divergence of `A` are spectral derivatives of independently computed
//! fields.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::Serialize;

use super::{
    oversampled_side, symbols, wavenumber, CoefficientField, CoefficientSolver, Component,
};
use crate::error::Result;
use crate::fft::Fft3;
use crate::grid::{Distribution, VelocityGrid};

/// Nodes within this many cells of a face are excluded from interior norms.
pub const SHELL: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientCheck {
    pub n: usize,
    pub extent: f64,
    /// `max |Tr A − a| / max |a|`.
    pub trace_defect: f64,
    /// Relative interior L² norm of `Δa + f` (spectral Laplacian).
    pub poisson_residual: f64,
    /// Relative interior L² norm of `div_row A − ∇a`.
    pub divergence_residual: f64,
    /// Relative L² distance between the Hockney and oversampled-spectral `a`.
    pub route_defect: f64,
    /// Relative interior L² distance between `∇a` and fourth-order finite
    /// differences of `a`.
    pub fd_gradient_defect: f64,
    /// `min λ(A) / max |a|` (should be ≥ -1e-10 for nonnegative data).
    pub min_eigenvalue_ratio: f64,
    pub boundary_mass_fraction: f64,
}

/// Relative L² distance `‖x − y‖ / ‖y‖` over nodes at least [`SHELL`] cells
/// from the boundary.
pub fn interior_relative_l2(grid: &VelocityGrid, x: &[f64], y: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for idx in 0..grid.len() {
        if grid.is_interior(idx, SHELL) {
            num += (x[idx] - y[idx]).powi(2);
            den += y[idx] * y[idx];
        }
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Spectral fields of `f` on the oversampled box, restricted to the block.
pub struct SpectralFields {
    pub a: Vec<f64>,
    pub laplacian_a: Vec<f64>,
    /// Row divergence `Σ_d ∂_d A_de` for `e = x, y, z`.
    pub divergence: [Vec<f64>; 3],
}

pub fn spectral_fields(f: &Distribution) -> SpectralFields {
    let grid = *f.grid();
    let n = grid.n();
    let m = oversampled_side(n);
    let fft = Fft3::shared(m);
    let kernel = super::ProjectionKernel::for_grid(&grid);
    let h = grid.spacing();
    let ks: Vec<f64> = (0..m).map(|i| wavenumber(&fft, i, h)).collect();
    let nyq = m / 2;

    let mut spectrum = vec![Complex64::new(0.0, 0.0); m * m * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                spectrum[(i * m + j) * m + k] =
                    Complex64::new(f.values()[grid.index(i, j, k)], 0.0);
            }
        }
    }
    fft.forward(&mut spectrum);

    // Multiplier per wave vector; the output is real, so pairs share a transform.
    let run = |mult: &(dyn Fn([f64; 3], [bool; 3], [Complex64; 10]) -> (Complex64, Complex64)
                     + Sync)| {
        let mut buf = vec![Complex64::new(0.0, 0.0); m * m * m];
        buf.par_chunks_mut(m * m)
            .enumerate()
            .for_each(|(i, plane)| {
                for j in 0..m {
                    for l in 0..m {
                        let k = [ks[i], ks[j], ks[l]];
                        let nq = [i == nyq, j == nyq, l == nyq];
                        let s = symbols(&kernel, k, nq);
                        let (u, v) = mult(k, nq, s);
                        let src = spectrum[(i * m + j) * m + l];
                        plane[j * m + l] = src * u + Complex64::i() * src * v;
                    }
                }
            });
        fft.inverse(&mut buf);
        let scale = 1.0 / (m * m * m) as f64;
        let mut re = vec![0.0; n * n * n];
        let mut im = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let z = buf[(i * m + j) * m + k];
                    re[grid.index(i, j, k)] = z.re * scale;
                    im[grid.index(i, j, k)] = z.im * scale;
                }
            }
        }
        (re, im)
    };

    let ik = |k: [f64; 3], nq: [bool; 3], d: usize| {
        if nq[d] {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, k[d])
        }
    };
    let entry = |s: &[Complex64; 10], d: usize, e: usize| {
        let c = match (d.min(e), d.max(e)) {
            (0, 0) => Component::Axx,
            (0, 1) => Component::Axy,
            (0, 2) => Component::Axz,
            (1, 1) => Component::Ayy,
            (1, 2) => Component::Ayz,
            _ => Component::Azz,
        };
        s[c as usize]
    };
    let div = |k: [f64; 3], nq: [bool; 3], s: &[Complex64; 10], e: usize| {
        (0..3)
            .map(|d| ik(k, nq, d) * entry(s, d, e))
            .sum::<Complex64>()
    };

    let (a, laplacian_a) = run(&|k, _, s| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let g = s[Component::Potential as usize];
        (g, -k2 * g)
    });
    let (dx, dy) = run(&|k, nq, s| (div(k, nq, &s, 0), div(k, nq, &s, 1)));
    let (dz, _) = run(&|k, nq, s| (div(k, nq, &s, 2), Complex64::new(0.0, 0.0)));
    SpectralFields {
        a,
        laplacian_a,
        divergence: [dx, dy, dz],
    }
}

/// Fourth-order centred differences of `a` along each axis; zero within two
/// cells of the boundary.
pub fn fd_gradient(grid: &VelocityGrid, a: &[f64]) -> Vec<[f64; 3]> {
    let n = grid.n();
    let h = grid.spacing();
    let strides = [n * n, n, 1];
    (0..grid.len())
        .map(|idx| {
            if !grid.is_interior(idx, SHELL) {
                return [0.0; 3];
            }
            std::array::from_fn(|d| {
                let s = strides[d];
                (8.0 * (a[idx + s] - a[idx - s]) - (a[idx + 2 * s] - a[idx - 2 * s])) / (12.0 * h)
            })
        })
        .collect()
}

/// Runs the full battery on `f`.
pub fn check(f: &Distribution) -> Result<CoefficientCheck> {
    let grid = *f.grid();
    let solver = CoefficientSolver::new(&grid);
    let field: CoefficientField = solver.compute(f)?;
    let spectral = spectral_fields(f);

    let minus_f: Vec<f64> = f.values().iter().map(|x| -x).collect();
    let poisson_residual = interior_relative_l2(&grid, &spectral.laplacian_a, &minus_f);

    let (mut num, mut den) = (0.0, 0.0);
    for e in 0..3 {
        let grad: Vec<f64> = field.grad_a().iter().map(|g| g[e]).collect();
        for idx in 0..grid.len() {
            if grid.is_interior(idx, SHELL) {
                num += (spectral.divergence[e][idx] - grad[idx]).powi(2);
                den += grad[idx] * grad[idx];
            }
        }
    }
    let divergence_residual = if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    };

    let route = {
        let num: f64 = field
            .a()
            .iter()
            .zip(&spectral.a)
            .map(|(x, y)| (x - y).powi(2))
            .sum();
        let den: f64 = spectral.a.iter().map(|y| y * y).sum();
        if den > 0.0 {
            (num / den).sqrt()
        } else {
            num.sqrt()
        }
    };

    let fd = fd_gradient(&grid, field.a());
    let (mut num, mut den) = (0.0, 0.0);
    for idx in 0..grid.len() {
        if grid.is_interior(idx, SHELL) {
            for d in 0..3 {
                num += (fd[idx][d] - field.grad_a()[idx][d]).powi(2);
                den += field.grad_a()[idx][d].powi(2);
            }
        }
    }
    let fd_gradient_defect = if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    };

    let sup = field.sup_a();
    Ok(CoefficientCheck {
        n: grid.n(),
        extent: grid.extent(),
        trace_defect: field.trace_defect(),
        poisson_residual,
        divergence_residual,
        route_defect: route,
        fd_gradient_defect,
        min_eigenvalue_ratio: if sup > 0.0 {
            field.min_eigenvalue() / sup
        } else {
            0.0
        },
        boundary_mass_fraction: f.boundary_mass_fraction(),
    })
}
