//! Closed-form Landau quantities for isotropic Gaussian mixtures, used as
//! independent references.
//!
//! For radial `f`, `A = D²b` with `b = |·| * f / 8π`. For one Gaussian of
//! mass `ρ` and temperature `T`, `8π b(r) = ρ √T g(r/√T)` where
//! `g(s) = √(2/π) e^{-s²/2} + (s + 1/s) erf(s/√2)`, so the radial and
//! tangential eigenvalues of `A` are `ρ g''(s) / (8π√T)` and
//! `ρ (g'(s)/s) / (8π√T)`. Then `Q = λ_r f'' + 2 λ_t f'/r + f²`.
#![allow(dead_code)]

pub mod riemann;

use std::f64::consts::PI;

use libm::erf;

/// `(g''(s), g'(s)/s)`, by power series below `s = 2` where the closed form
/// cancels badly.
pub fn g_derivatives(s: f64) -> (f64, f64) {
    let r2p = (2.0 / PI).sqrt();
    if s < 2.0 {
        // Coefficients of e^{-x/2} = Σ c_k x^k.
        let mut c = [0.0; 42];
        c[0] = 1.0;
        for k in 1..c.len() {
            c[k] = c[k - 1] * (-0.5 / k as f64);
        }
        let (mut gpp, mut gps) = (0.0, 0.0);
        for k in 0..40 {
            let kf = k as f64;
            if k >= 1 {
                gpp += c[k] * (-4.0 * kf / (2.0 * kf + 1.0)) * s.powi(2 * k as i32 - 2);
            }
            gps += (c[k] / (2.0 * kf + 1.0) + c[k + 1] * (2.0 * kf + 2.0) / (2.0 * kf + 3.0))
                * s.powi(2 * k as i32);
        }
        (r2p * gpp, r2p * gps)
    } else {
        let e = erf(s / 2f64.sqrt());
        let x = r2p * (-s * s / 2.0).exp();
        (
            2.0 / s.powi(3) * e - 2.0 / (s * s) * x,
            (1.0 / s - 1.0 / s.powi(3)) * e + x / (s * s),
        )
    }
}

/// Centred Gaussian mixture `Σ ρ_i M_{T_i}`.
#[derive(Clone, Debug)]
pub struct Mixture(pub Vec<(f64, f64)>);

impl Mixture {
    pub fn density(&self, r: f64) -> f64 {
        self.0
            .iter()
            .map(|&(rho, t)| rho * (2.0 * PI * t).powf(-1.5) * (-r * r / (2.0 * t)).exp())
            .sum()
    }

    /// `(λ_r, λ_t)` of `A` at radius `r`.
    pub fn eigenvalues(&self, r: f64) -> (f64, f64) {
        self.0.iter().fold((0.0, 0.0), |(lr, lt), &(rho, t)| {
            let (gpp, gps) = g_derivatives(r / t.sqrt());
            let c = rho / (8.0 * PI * t.sqrt());
            (lr + c * gpp, lt + c * gps)
        })
    }

    /// `a(r) = Σ ρ erf(r/√(2T)) / (4π r)`.
    pub fn potential(&self, r: f64) -> f64 {
        self.0
            .iter()
            .map(|&(rho, t)| {
                if r < 1e-8 {
                    rho * (2.0 / (PI * t)).sqrt() / (4.0 * PI)
                } else {
                    rho * erf(r / (2.0 * t).sqrt()) / (4.0 * PI * r)
                }
            })
            .sum()
    }

    pub fn collision(&self, r: f64) -> f64 {
        let (mut f, mut f_over_r, mut fpp) = (0.0, 0.0, 0.0);
        for &(rho, t) in &self.0 {
            let fi = rho * (2.0 * PI * t).powf(-1.5) * (-r * r / (2.0 * t)).exp();
            f += fi;
            f_over_r -= fi / t;
            fpp += (r * r / (t * t) - 1.0 / t) * fi;
        }
        let (lr, lt) = self.eigenvalues(r);
        lr * fpp + 2.0 * lt * f_over_r + f * f
    }
}

pub fn radius(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}
