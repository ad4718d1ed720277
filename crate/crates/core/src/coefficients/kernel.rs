//! Lattice kernels for the free-space convolutions.
//!
//! The Newtonian kernel `G = 1/(4π|w|)` and the projection kernel
//! `Π(w)/(8π|w|)` are singular at the origin and decay slowly, so neither
//! point sampling nor plain zero padding is accurate. Instead each kernel is
//! truncated to a ball of radius `R` larger than the lattice diagonal, whose
//! Fourier transform is smooth and known in closed form. On an oversampled
//! periodic box of side `P = 3 · 2L` the truncated kernel convolves the
//! lattice data exactly (no periodic image reaches the physical block), and
//! inverting its symbol there yields *effective kernel samples* `K_eff(q h)`.
//! Those samples are then used in an ordinary `2n` zero-padded (Hockney)
//! convolution, which reproduces the oversampled spectral result on the
//! physical block while costing only `(2n)^3` transforms per evaluation.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::fft::Fft3;
use crate::grid::VelocityGrid;
use crate::linalg::Sym3;

/// Number of stored kernels: `a`, six components of `A`, three of `∇a`.
pub const COMPONENTS: usize = 10;

/// Storage order of the kernel bank and of serialized coefficient fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Potential,
    Axx,
    Axy,
    Axz,
    Ayy,
    Ayz,
    Azz,
    GradX,
    GradY,
    GradZ,
}

impl Component {
    pub const ALL: [Component; COMPONENTS] = [
        Component::Potential,
        Component::Axx,
        Component::Axy,
        Component::Axz,
        Component::Ayy,
        Component::Ayz,
        Component::Azz,
        Component::GradX,
        Component::GradY,
        Component::GradZ,
    ];

    /// Matrix entry `(d, e)` for the `A` components.
    pub fn matrix_entry(self) -> Option<(usize, usize)> {
        match self {
            Component::Axx => Some((0, 0)),
            Component::Axy => Some((0, 1)),
            Component::Axz => Some((0, 2)),
            Component::Ayy => Some((1, 1)),
            Component::Ayz => Some((1, 2)),
            Component::Azz => Some((2, 2)),
            _ => None,
        }
    }

    pub fn gradient_axis(self) -> Option<usize> {
        match self {
            Component::GradX => Some(0),
            Component::GradY => Some(1),
            Component::GradZ => Some(2),
            _ => None,
        }
    }

    /// Gradient kernels are odd, so their transforms are purely imaginary.
    pub fn is_odd(self) -> bool {
        self.gradient_axis().is_some()
    }
}

/// The Coulomb projection kernel `Π(w)/|w|`, `Π(w) = I − w⊗w/|w|^2`.
///
/// The origin singularity is not regularized by cell averaging; the kernel
/// is truncated at `radius` (beyond every pairwise lattice distance) and
/// handled through its Fourier symbol, see [`ProjectionKernel::symbol`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionKernel {
    pub radius: f64,
}

impl ProjectionKernel {
    /// Truncation radius for a lattice: midway between the largest pairwise
    /// node distance `√3 (2L − h)` and the closest periodic image distance
    /// `4L + h` on the oversampled box.
    pub fn for_grid(grid: &VelocityGrid) -> Self {
        let span = 2.0 * grid.extent() - grid.spacing();
        let image = 4.0 * grid.extent() + grid.spacing();
        Self {
            radius: 0.5 * (3f64.sqrt() * span + image),
        }
    }

    /// `Π(w)`; the zero matrix at `w = 0`.
    pub fn projection(w: [f64; 3]) -> Sym3 {
        let r2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
        if r2 == 0.0 {
            return [0.0; 6];
        }
        [
            1.0 - w[0] * w[0] / r2,
            -w[0] * w[1] / r2,
            -w[0] * w[2] / r2,
            1.0 - w[1] * w[1] / r2,
            -w[1] * w[2] / r2,
            1.0 - w[2] * w[2] / r2,
        ]
    }

    /// `Π(w)/(8π|w|)`, the kernel of `A`; `None` at the origin.
    pub fn eval(&self, w: [f64; 3]) -> Option<Sym3> {
        let r = crate::grid::norm3(w);
        if r == 0.0 {
            return None;
        }
        let p = Self::projection(w);
        let c = 1.0 / (8.0 * std::f64::consts::PI * r);
        Some(p.map(|x| c * x))
    }

    /// Fourier symbols of the truncated kernels at wave vector `k`:
    /// `(Ĝ, [α, β])` with `Ĝ = (1 − cos kR)/k^2` for `1/(4π|w|)` and
    /// `α δ + β k̂⊗k̂` for `Π(w)/(8π|w|)`, where
    /// `α = (j0(kR) − cos kR)/(2k^2)`, `β = (1 − j0(kR))/k^2 − α`.
    pub fn symbol(&self, k: f64) -> (f64, f64, f64) {
        let r = self.radius;
        let x = k * r;
        if x < 0.5 {
            // Power series; the closed forms cancel catastrophically here.
            let x2 = x * x;
            let (mut g, mut alpha, mut beta) = (0.0, 0.0, 0.0);
            let mut pow = 1.0;
            let mut fact_even = 2.0; // (2n)!
            let mut fact_odd = 6.0; // (2n+1)!
            for n in 1..12 {
                let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                let nf = n as f64;
                g += sign * pow / fact_even;
                alpha += sign * pow * nf / fact_odd;
                beta += sign * pow * (1.0 - nf) / fact_odd;
                pow *= x2;
                fact_even *= (2.0 * nf + 1.0) * (2.0 * nf + 2.0);
                fact_odd *= (2.0 * nf + 2.0) * (2.0 * nf + 3.0);
            }
            let r2 = r * r;
            return (r2 * g, r2 * alpha, r2 * beta);
        }
        let k2 = k * k;
        let (s, c) = x.sin_cos();
        let j0 = s / x;
        let g = (1.0 - c) / k2;
        let alpha = (j0 - c) / (2.0 * k2);
        let beta = (1.0 - j0) / k2 - alpha;
        (g, alpha, beta)
    }
}

/// Transformed effective kernels on the `(2n)^3` Hockney box, with the
/// quadrature weight `h^3` and the inverse-FFT normalisation folded in.
/// Even kernels keep their (real) transform, odd kernels the imaginary part.
pub struct KernelBank {
    grid: VelocityGrid,
    kernel: ProjectionKernel,
    spectra: Vec<Vec<f64>>,
}

impl std::fmt::Debug for KernelBank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelBank")
            .field("n", &self.grid.n())
            .field("extent", &self.grid.extent())
            .field("radius", &self.kernel.radius)
            .finish()
    }
}

/// Side of the oversampled box used to derive effective kernels.
pub(crate) fn oversampled_side(n: usize) -> usize {
    3 * n
}

/// Angular wavenumber of FFT slot `i` on a box of `m` cells of size `h`.
pub(crate) fn wavenumber(fft: &Fft3, i: usize, h: f64) -> f64 {
    2.0 * std::f64::consts::PI * fft.frequency(i) as f64 / (fft.side() as f64 * h)
}

/// Symbols of all ten kernels at wave vector `k`; `nyquist[d]` marks the
/// unpaired Nyquist slot along axis `d`.
pub(crate) fn symbols(
    kernel: &ProjectionKernel,
    k: [f64; 3],
    nyquist: [bool; 3],
) -> [Complex64; COMPONENTS] {
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    let kn = k2.sqrt();
    let (g, alpha, beta) = kernel.symbol(kn);
    let hat = if kn > 0.0 {
        [k[0] / kn, k[1] / kn, k[2] / kn]
    } else {
        [0.0; 3]
    };
    let mut out = [Complex64::new(0.0, 0.0); COMPONENTS];
    for c in Component::ALL {
        let v = match c {
            Component::Potential => Complex64::new(g, 0.0),
            _ => {
                if let Some((d, e)) = c.matrix_entry() {
                    let delta = if d == e { alpha } else { 0.0 };
                    Complex64::new(delta + beta * hat[d] * hat[e], 0.0)
                } else {
                    let d = c.gradient_axis().unwrap();
                    // The Nyquist mode of a derivative has no real counterpart.
                    if nyquist[d] {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(0.0, k[d] * g)
                    }
                }
            }
        };
        out[c as usize] = v;
    }
    out
}

/// Effective kernel samples `K_eff(q h + shift)` for all components, laid out
/// on the oversampled `M^3` box in FFT order (offset `q` at slot `q mod M`).
pub(crate) fn effective_kernels(
    grid: &VelocityGrid,
    kernel: &ProjectionKernel,
    shift: [f64; 3],
) -> Vec<Vec<f64>> {
    let m = oversampled_side(grid.n());
    let fft = Fft3::shared(m);
    let h = grid.spacing();
    let p3 = (m as f64 * h).powi(3);
    let ks: Vec<f64> = (0..m).map(|i| wavenumber(&fft, i, h)).collect();
    let nyq = m / 2;
    let shifted = shift != [0.0; 3];
    // Unshifted kernels are real, so two share one inverse transform as
    // K1 + i K2. Shifted symbols lose exact Hermitian symmetry at the Nyquist
    // planes and are inverted one at a time, keeping the real part.
    let groups: Vec<Vec<Component>> = if shifted {
        Component::ALL.iter().map(|c| vec![*c]).collect()
    } else {
        Component::ALL.chunks(2).map(|p| p.to_vec()).collect()
    };
    let mut out = vec![Vec::new(); COMPONENTS];
    for group in groups {
        let mut buf = vec![Complex64::new(0.0, 0.0); m * m * m];
        buf.par_chunks_mut(m * m)
            .enumerate()
            .for_each(|(i, plane)| {
                for j in 0..m {
                    for l in 0..m {
                        let k = [ks[i], ks[j], ks[l]];
                        let s = symbols(kernel, k, [i == nyq, j == nyq, l == nyq]);
                        let phase = Complex64::from_polar(
                            1.0,
                            k[0] * shift[0] + k[1] * shift[1] + k[2] * shift[2],
                        );
                        let mut z = s[group[0] as usize] * phase;
                        if let Some(c) = group.get(1) {
                            z += Complex64::i() * s[*c as usize] * phase;
                        }
                        plane[j * m + l] = z;
                    }
                }
            });
        fft.inverse(&mut buf);
        out[group[0] as usize] = buf.iter().map(|z| z.re / p3).collect();
        if let Some(c) = group.get(1) {
            out[*c as usize] = buf.iter().map(|z| z.im / p3).collect();
        }
    }
    out
}

impl KernelBank {
    fn build(grid: &VelocityGrid) -> Self {
        let n = grid.n();
        let m = oversampled_side(n);
        let kernel = ProjectionKernel::for_grid(grid);
        let eff = effective_kernels(grid, &kernel, [0.0; 3]);
        let two_n = 2 * n;
        let fft = Fft3::shared(two_n);
        let scale = grid.cell_volume() / (two_n * two_n * two_n) as f64;
        let wrap = |q: i64, side: usize| q.rem_euclid(side as i64) as usize;
        let place = |src: &[f64]| -> Vec<Complex64> {
            let mut buf = vec![Complex64::new(0.0, 0.0); two_n * two_n * two_n];
            let range = -(n as i64 - 1)..=(n as i64 - 1);
            for qi in range.clone() {
                for qj in range.clone() {
                    for qk in range.clone() {
                        let s = (wrap(qi, m) * m + wrap(qj, m)) * m + wrap(qk, m);
                        let d =
                            (wrap(qi, two_n) * two_n + wrap(qj, two_n)) * two_n + wrap(qk, two_n);
                        buf[d] = Complex64::new(src[s], 0.0);
                    }
                }
            }
            buf
        };
        let mut spectra = vec![Vec::new(); COMPONENTS];
        for c in Component::ALL {
            let mut buf = place(&eff[c as usize]);
            fft.forward(&mut buf);
            spectra[c as usize] = if c.is_odd() {
                buf.iter().map(|z| z.im * scale).collect()
            } else {
                buf.iter().map(|z| z.re * scale).collect()
            };
        }
        Self {
            grid: *grid,
            kernel,
            spectra,
        }
    }

    /// Bank for `grid`, built on first use and shared afterwards.
    pub fn shared(grid: &VelocityGrid) -> Arc<KernelBank> {
        type Cache = Mutex<HashMap<(usize, u64), Arc<KernelBank>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let key = (grid.n(), grid.extent().to_bits());
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(bank) = cache.lock().expect("kernel cache poisoned").get(&key) {
            return bank.clone();
        }
        // Built outside the lock; a concurrent duplicate build is harmless.
        let bank = Arc::new(Self::build(grid));
        cache
            .lock()
            .expect("kernel cache poisoned")
            .entry(key)
            .or_insert(bank)
            .clone()
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn kernel(&self) -> &ProjectionKernel {
        &self.kernel
    }

    /// Stored transform of component `c` (see the type docs for the convention).
    pub fn spectrum(&self, c: Component) -> &[f64] {
        &self.spectra[c as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Truncated transforms by direct radial quadrature:
    /// `Ĝ(k) = ∫_0^R sin(kr)/k dr` and, for the projection kernel along
    /// `k̂ = e_z`, `A_xx = (1/8π)∫_0^R ∫_{-1}^1 ∫_0^{2π} (1 − sin²θ cos²φ) r cos(k r μ) …`.
    fn radial_oracle(k: f64, r_max: f64) -> (f64, f64, f64) {
        let steps = 4000;
        let mut g = 0.0;
        let mut axx = 0.0;
        let mut azz = 0.0;
        let gl_r = gauss_quad::GaussLegendre::new(16).unwrap();
        let gl_mu = gauss_quad::GaussLegendre::new(48).unwrap();
        for s in 0..steps {
            let a = r_max * s as f64 / steps as f64;
            let b = r_max * (s + 1) as f64 / steps as f64;
            g += gl_r.integrate(a, b, |r| (k * r).sin() / k);
            // ∫ Π/(8π r) e^{-ik·w} dw; φ-integral done analytically:
            // ∫ (1 − (1−μ²)cos²φ) dφ = π(1+μ²), ∫ μ² dφ = 2π μ² for zz.
            axx += gl_r.integrate(a, b, |r| {
                gl_mu.integrate(-1.0, 1.0, |mu| {
                    r * r / (8.0 * PI * r) * (k * r * mu).cos() * PI * (1.0 + mu * mu)
                })
            });
            azz += gl_r.integrate(a, b, |r| {
                gl_mu.integrate(-1.0, 1.0, |mu| {
                    r * r / (8.0 * PI * r) * (k * r * mu).cos() * 2.0 * PI * (1.0 - mu * mu)
                })
            });
        }
        (g, axx, azz)
    }

    #[test]
    fn symbols_match_radial_quadrature() {
        let kernel = ProjectionKernel { radius: 3.0 };
        for k in [0.05, 0.3, 1.7, 4.0] {
            let (g, alpha, beta) = kernel.symbol(k);
            let (og, oxx, ozz) = radial_oracle(k, 3.0);
            assert!(
                (g - og).abs() < 1e-9 * og.abs().max(1.0),
                "G at k={k}: {g} vs {og}"
            );
            // With k̂ = e_z: A_xx = α, A_zz = α + β.
            assert!((alpha - oxx).abs() < 1e-9, "xx at k={k}: {alpha} vs {oxx}");
            assert!(
                (alpha + beta - ozz).abs() < 1e-9,
                "zz at k={k}: {} vs {ozz}",
                alpha + beta
            );
        }
    }

    #[test]
    fn series_and_closed_form_agree_at_the_switch() {
        let kernel = ProjectionKernel { radius: 2.0 };
        let below = kernel.symbol(0.25 * (1.0 - 1e-9));
        let above = kernel.symbol(0.25 * (1.0 + 1e-9));
        assert!((below.0 - above.0).abs() < 1e-9);
        assert!((below.1 - above.1).abs() < 1e-9);
        assert!((below.2 - above.2).abs() < 1e-9);
        let zero = kernel.symbol(0.0);
        assert_eq!(zero, (2.0, 4.0 / 6.0, 0.0));
    }

    #[test]
    fn projection_annihilates_its_argument() {
        let w = [0.4, -2.0, 1.1];
        let p = ProjectionKernel::projection(w);
        let pw = crate::linalg::mat_vec(&p, w);
        assert!(pw.iter().all(|x| x.abs() < 1e-15));
        let e = crate::linalg::eigenvalues(&p);
        assert!(e[0].abs() < 1e-15 && (e[1] - 1.0).abs() < 1e-15 && (e[2] - 1.0).abs() < 1e-15);
        assert!(ProjectionKernel { radius: 1.0 }.eval([0.0; 3]).is_none());
    }
}
