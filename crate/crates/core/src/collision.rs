//! The Landau operator `Q(f) = ∇·(A[f]∇f − ∇a[f] f) = Tr(A[f] D²f) + f²`.
//!
//! The divergence form is the production path: fluxes live on cell faces
//! with arithmetic-mean coefficients, so the discrete divergence telescopes
//! and mass changes only through the outer faces. Outside the lattice `f` is
//! continued by linear extrapolation (ghost value `2 f_0 − f_1`), which makes
//! the outer-face normal derivative one-sided.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::verify::SHELL;
use crate::coefficients::{effective_kernels, CoefficientField, Component, ProjectionKernel};
use crate::error::{LandauError, Result};
use crate::grid::{Distribution, VelocityGrid};
use crate::linalg::Sym3;
use crate::sum::CompensatedSum;

/// Largest lattice accepted by [`q_collisional_oracle`] (cost grows as `n^6`).
pub const ORACLE_MAX_N: usize = 16;

/// Outward fluxes `∮ φ F·n dS` through the lattice boundary for
/// `φ = 1, v, |v|^2`, evaluated at the boundary face centres.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFlux {
    pub mass: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
}

impl BoundaryFlux {
    pub fn scaled(self, c: f64) -> Self {
        Self {
            mass: c * self.mass,
            momentum: self.momentum.map(|x| c * x),
            energy: c * self.energy,
        }
    }

    pub fn add(&mut self, other: &BoundaryFlux) {
        self.mass += other.mass;
        for d in 0..3 {
            self.momentum[d] += other.momentum[d];
        }
        self.energy += other.energy;
    }
}

/// `‖f‖_∞ ‖f‖_1`, the reference size of `Q(f)` used to normalise residuals
/// that should vanish.
pub fn collision_scale(f: &Distribution) -> f64 {
    let l1: CompensatedSum = f.values().iter().map(|x| x.abs()).collect();
    f.sup_norm() * f.grid().cell_volume() * l1.value()
}

/// L² norm over nodes at least [`SHELL`] cells from the boundary.
pub fn interior_l2(grid: &VelocityGrid, q: &[f64]) -> f64 {
    let s: CompensatedSum = (0..grid.len())
        .filter(|&idx| grid.is_interior(idx, SHELL))
        .map(|idx| q[idx] * q[idx])
        .collect();
    (grid.cell_volume() * s.value()).sqrt()
}

/// `interior_l2(Q) / collision_scale(f)`.
pub fn relative_residual(f: &Distribution, q: &[f64]) -> f64 {
    interior_l2(f.grid(), q) / collision_scale(f)
}

fn check_grids(f: &Distribution, c: &CoefficientField) -> Result<()> {
    if !f.grid().same_as(c.grid()) {
        return Err(LandauError::GridMismatch(
            "density and coefficients live on different lattices".into(),
        ));
    }
    Ok(())
}

#[inline]
fn strides_of(n: usize) -> [usize; 3] {
    [n * n, n, 1]
}

/// Centred difference of `f` along `e` at node `idx` (one-sided at the
/// boundary, which equals the centred difference with a linear ghost).
#[inline]
fn centred(f: &[f64], idx: usize, pos: usize, e: usize, n: usize, h: f64) -> f64 {
    let s = strides_of(n)[e];
    if pos == 0 {
        (f[idx + s] - f[idx]) / h
    } else if pos == n - 1 {
        (f[idx] - f[idx - s]) / h
    } else {
        (f[idx + s] - f[idx - s]) / (2.0 * h)
    }
}

/// Face data: value and gradient of `f` at the face `(lo, hi)` across axis
/// `d`, where `hi` may be a ghost (`None`) on the upper boundary and `lo`
/// a ghost on the lower one.
struct FaceState {
    value: f64,
    grad: [f64; 3],
}

fn face_state(f: &[f64], grid: &VelocityGrid, idx: usize, d: usize, upper: bool) -> FaceState {
    let n = grid.n();
    let h = grid.spacing();
    let s = strides_of(n)[d];
    let pos = grid.unindex(idx);
    let interior = if upper { pos[d] + 1 < n } else { false };
    let mut grad = [0.0; 3];
    let value;
    if interior {
        let q = idx + s;
        value = 0.5 * (f[idx] + f[q]);
        let pos_q = grid.unindex(q);
        for e in 0..3 {
            grad[e] = if e == d {
                (f[q] - f[idx]) / h
            } else {
                0.5 * (centred(f, idx, pos[e], e, n, h) + centred(f, q, pos_q[e], e, n, h))
            };
        }
    } else {
        // Boundary face: ghost 2 f_b − f_in across the face.
        let inner = if upper { idx - s } else { idx + s };
        let ghost = 2.0 * f[idx] - f[inner];
        value = 0.5 * (ghost + f[idx]);
        for e in 0..3 {
            grad[e] = if e == d {
                if upper {
                    (ghost - f[idx]) / h
                } else {
                    (f[idx] - ghost) / h
                }
            } else {
                centred(f, idx, pos[e], e, n, h)
            };
        }
    }
    FaceState { value, grad }
}

#[inline]
fn row(a: &Sym3, d: usize) -> [f64; 3] {
    match d {
        0 => [a[0], a[1], a[2]],
        1 => [a[1], a[3], a[4]],
        _ => [a[2], a[4], a[5]],
    }
}

/// Face coefficients: `A` row `d` and `∂_d a`.
type FaceCoefficients = ([f64; 3], f64);

/// Assembles `Q` from face fluxes given a rule for face coefficients.
/// `coef(idx, d, upper, interior)` returns coefficients at the upper face of
/// node `idx` (or the lower boundary face when `upper` is false).
fn divergence_with<C>(f: &Distribution, coef: C) -> (Vec<f64>, BoundaryFlux)
where
    C: Fn(usize, usize, bool) -> FaceCoefficients + Sync,
{
    let grid = *f.grid();
    let n = grid.n();
    let h = grid.spacing();
    let vals = f.values();
    let strides = strides_of(n);
    let flux = |idx: usize, d: usize, upper: bool| -> f64 {
        let st = face_state(vals, &grid, idx, d, upper);
        let (arow, ga) = coef(idx, d, upper);
        arow[0] * st.grad[0] + arow[1] * st.grad[1] + arow[2] * st.grad[2] - ga * st.value
    };
    // Upper-face flux of every node, per axis.
    let upper: Vec<[f64; 3]> = (0..grid.len())
        .into_par_iter()
        .map(|idx| std::array::from_fn(|d| flux(idx, d, true)))
        .collect();
    let q: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let pos = grid.unindex(idx);
            let mut acc = 0.0;
            for d in 0..3 {
                let below = if pos[d] > 0 {
                    upper[idx - strides[d]][d]
                } else {
                    flux(idx, d, false)
                };
                acc += upper[idx][d] - below;
            }
            acc / h
        })
        .collect();

    // Outflow bookkeeping over the six lattice faces, in fixed order.
    let mut bf = BoundaryFlux::default();
    let area = h * h;
    for idx in 0..grid.len() {
        let pos = grid.unindex(idx);
        let v = grid.node_at(idx);
        for d in 0..3 {
            for (upper_face, sign) in [(true, 1.0), (false, -1.0)] {
                let on_face = if upper_face {
                    pos[d] == n - 1
                } else {
                    pos[d] == 0
                };
                if !on_face {
                    continue;
                }
                let fl = if upper_face {
                    upper[idx][d]
                } else {
                    flux(idx, d, false)
                };
                let mut vf = v;
                vf[d] += sign * 0.5 * h;
                let out = sign * fl * area;
                bf.mass += out;
                for e in 0..3 {
                    bf.momentum[e] += vf[e] * out;
                }
                bf.energy += (vf[0] * vf[0] + vf[1] * vf[1] + vf[2] * vf[2]) * out;
            }
        }
    }
    (q, bf)
}

/// Conservative divergence form with arithmetic-mean face coefficients.
pub fn q_divergence(f: &Distribution, c: &CoefficientField) -> Result<Vec<f64>> {
    Ok(q_divergence_with_flux(f, c)?.0)
}

/// [`q_divergence`] together with the boundary outflow it implies.
pub fn q_divergence_with_flux(
    f: &Distribution,
    c: &CoefficientField,
) -> Result<(Vec<f64>, BoundaryFlux)> {
    check_grids(f, c)?;
    let n = f.grid().n();
    let strides = strides_of(n);
    let mat = c.matrix();
    let grad = c.grad_a();
    Ok(divergence_with(f, |idx, d, upper| {
        let pos = f.grid().unindex(idx);
        if upper && pos[d] + 1 < n {
            let q = idx + strides[d];
            let (r0, r1) = (row(&mat[idx], d), row(&mat[q], d));
            (
                [
                    0.5 * (r0[0] + r1[0]),
                    0.5 * (r0[1] + r1[1]),
                    0.5 * (r0[2] + r1[2]),
                ],
                0.5 * (grad[idx][d] + grad[q][d]),
            )
        } else {
            (row(&mat[idx], d), grad[idx][d])
        }
    }))
}

/// Non-divergence form `Tr(A D²f) + f^2` with centred second differences,
/// shifted one cell inward at the boundary. Not conservative.
pub fn q_nondivergence(f: &Distribution, c: &CoefficientField) -> Result<Vec<f64>> {
    check_grids(f, c)?;
    let grid = *f.grid();
    let n = grid.n();
    let h = grid.spacing();
    let vals = f.values();
    let strides = strides_of(n);
    let mat = c.matrix();
    Ok((0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let pos = grid.unindex(idx);
            let second = |d: usize| {
                let s = strides[d];
                let centre = match pos[d] {
                    0 => idx + s,
                    p if p == n - 1 => idx - s,
                    _ => idx,
                };
                (vals[centre + s] - 2.0 * vals[centre] + vals[centre - s]) / (h * h)
            };
            let mixed = |d: usize, e: usize| {
                // D_e of the centred D_d, both one-sided at the boundary.
                let se = strides[e];
                let (lo, hi, span) = match pos[e] {
                    0 => (idx, idx + se, h),
                    p if p == n - 1 => (idx - se, idx, h),
                    _ => (idx - se, idx + se, 2.0 * h),
                };
                let d_lo = centred(vals, lo, grid.unindex(lo)[d], d, n, h);
                let d_hi = centred(vals, hi, grid.unindex(hi)[d], d, n, h);
                (d_hi - d_lo) / span
            };
            let a = &mat[idx];
            let trace = a[0] * second(0)
                + a[3] * second(1)
                + a[5] * second(2)
                + 2.0 * (a[1] * mixed(0, 1) + a[2] * mixed(0, 2) + a[4] * mixed(1, 2));
            trace + vals[idx] * vals[idx]
        })
        .collect())
}

/// Brute-force collisional form on small lattices.
///
/// At each face the inner integral
/// `(1/8π) ∫ Π(v−v*)/|v−v*| (f* ∇f − f ∇f*) dv*` is summed directly over
/// all source nodes, using kernel samples taken at the exact face-to-node
/// offsets (half-cell shifted effective kernels). The `∇f*` term is
/// integrated by parts, `∫ K(v−v*) ∇f* dv* = ∫ (div K)(v−v*) f* dv*` with
/// `div K = ∇(1/(4π|·|))`. Face values and gradients of `f` and the final
/// divergence use the same stencil as [`q_divergence`].
pub fn q_collisional_oracle(f: &Distribution) -> Result<Vec<f64>> {
    let (upper, lower) = oracle_faces(f)?;
    let (q, _) = divergence_with(f, |idx, d, is_upper| {
        if is_upper {
            upper[d][idx]
        } else {
            lower[d][idx]
        }
    });
    Ok(q)
}

/// Directly summed face coefficients: upper faces of every node and lower
/// faces of the first layer, per axis.
#[allow(clippy::type_complexity)]
fn oracle_faces(
    f: &Distribution,
) -> Result<(Vec<Vec<FaceCoefficients>>, Vec<Vec<FaceCoefficients>>)> {
    let grid = *f.grid();
    let n = grid.n();
    if n > ORACLE_MAX_N {
        return Err(LandauError::param(
            "n",
            format!("collisional oracle is O(n^6); refusing n = {n} > {ORACLE_MAX_N}"),
        ));
    }
    let kernel = ProjectionKernel::for_grid(&grid);
    let h = grid.spacing();
    let m = crate::coefficients::oversampled_side(n);
    let dv = grid.cell_volume();
    let vals = f.values();
    let sources: Vec<(usize, [usize; 3])> = (0..grid.len())
        .filter(|&j| vals[j] != 0.0)
        .map(|j| (j, grid.unindex(j)))
        .collect();

    let mut upper: Vec<Vec<FaceCoefficients>> = Vec::with_capacity(3);
    let mut lower: Vec<Vec<FaceCoefficients>> = Vec::with_capacity(3);
    for d in 0..3 {
        let mut shift = [0.0; 3];
        shift[d] = 0.5 * h;
        let eff = effective_kernels(&grid, &kernel, shift);
        let wrap = |q: i64| q.rem_euclid(m as i64) as usize;
        let direct = |face_pos: [i64; 3]| -> FaceCoefficients {
            // Face at node `face_pos` + h/2 e_d.
            let mut arow = [0.0; 3];
            let mut g = 0.0;
            for &(j, pj) in &sources {
                let off = [
                    face_pos[0] - pj[0] as i64,
                    face_pos[1] - pj[1] as i64,
                    face_pos[2] - pj[2] as i64,
                ];
                let s = (wrap(off[0]) * m + wrap(off[1])) * m + wrap(off[2]);
                let fj = vals[j];
                for (e, slot) in arow.iter_mut().enumerate() {
                    let c = matrix_component(d, e);
                    *slot += eff[c as usize][s] * fj;
                }
                g +=
                    eff[[Component::GradX, Component::GradY, Component::GradZ][d] as usize][s] * fj;
            }
            (arow.map(|x| x * dv), g * dv)
        };
        let up: Vec<FaceCoefficients> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let p = grid.unindex(idx);
                direct([p[0] as i64, p[1] as i64, p[2] as i64])
            })
            .collect();
        let low: Vec<FaceCoefficients> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let p = grid.unindex(idx);
                if p[d] != 0 {
                    return ([0.0; 3], 0.0);
                }
                let mut fp = [p[0] as i64, p[1] as i64, p[2] as i64];
                fp[d] -= 1;
                direct(fp)
            })
            .collect();
        upper.push(up);
        lower.push(low);
    }
    Ok((upper, lower))
}

fn matrix_component(d: usize, e: usize) -> Component {
    match (d.min(e), d.max(e)) {
        (0, 0) => Component::Axx,
        (0, 1) => Component::Axy,
        (0, 2) => Component::Axz,
        (1, 1) => Component::Ayy,
        (1, 2) => Component::Ayz,
        _ => Component::Azz,
    }
}

/// `∫ Q dv`, `∫ v Q dv`, `∫ |v|^2 Q dv` by the midpoint rule.
pub fn collision_moments(grid: &VelocityGrid, q: &[f64]) -> (f64, [f64; 3], f64) {
    let mut mass = CompensatedSum::new();
    let mut mom = [CompensatedSum::new(); 3];
    let mut energy = CompensatedSum::new();
    for (idx, &x) in q.iter().enumerate() {
        let v = grid.node_at(idx);
        mass.add(x);
        for d in 0..3 {
            mom[d].add(v[d] * x);
        }
        energy.add((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * x);
    }
    let dv = grid.cell_volume();
    (
        dv * mass.value(),
        [
            dv * mom[0].value(),
            dv * mom[1].value(),
            dv * mom[2].value(),
        ],
        dv * energy.value(),
    )
}

/// `∫ Q log f dv` over nodes with `f > 0`.
pub fn entropy_production(f: &Distribution, q: &[f64]) -> f64 {
    let s: CompensatedSum = f
        .values()
        .iter()
        .zip(q)
        .filter(|(x, _)| **x > 0.0)
        .map(|(x, qv)| qv * x.ln())
        .collect();
    f.grid().cell_volume() * s.value()
}
