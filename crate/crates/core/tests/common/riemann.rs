//! Exact ideal-gas Riemann solution (two-wave pressure iteration), used as
//! an independent reference for the finite-volume scheme.

#[derive(Debug, Clone, Copy)]
pub struct Primitive {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

pub struct Riemann {
    gamma: f64,
    left: Primitive,
    right: Primitive,
    p_star: f64,
    u_star: f64,
}

fn sound(gamma: f64, s: Primitive) -> f64 {
    (gamma * s.p / s.rho).sqrt()
}

/// Wave function `f_K(p)` and its derivative.
fn wave(gamma: f64, s: Primitive, p: f64) -> (f64, f64) {
    let c = sound(gamma, s);
    if p > s.p {
        let a = 2.0 / ((gamma + 1.0) * s.rho);
        let b = (gamma - 1.0) / (gamma + 1.0) * s.p;
        let q = (a / (p + b)).sqrt();
        ((p - s.p) * q, q * (1.0 - 0.5 * (p - s.p) / (p + b)))
    } else {
        let e = (gamma - 1.0) / (2.0 * gamma);
        let ratio = p / s.p;
        (
            2.0 * c / (gamma - 1.0) * (ratio.powf(e) - 1.0),
            ratio.powf(-(gamma + 1.0) / (2.0 * gamma)) / (s.rho * c),
        )
    }
}

impl Riemann {
    pub fn new(gamma: f64, left: Primitive, right: Primitive) -> Self {
        let du = right.u - left.u;
        let mut p = 0.5 * (left.p + right.p);
        for _ in 0..100 {
            let (fl, dl) = wave(gamma, left, p);
            let (fr, dr) = wave(gamma, right, p);
            let next = (p - (fl + fr + du) / (dl + dr)).max(1e-14);
            let done = (next - p).abs() <= 1e-15 * (next + p);
            p = next;
            if done {
                break;
            }
        }
        let (fl, _) = wave(gamma, left, p);
        let (fr, _) = wave(gamma, right, p);
        Self {
            gamma,
            left,
            right,
            p_star: p,
            u_star: 0.5 * (left.u + right.u) + 0.5 * (fr - fl),
        }
    }

    pub fn star(&self) -> (f64, f64) {
        (self.p_star, self.u_star)
    }

    /// Solution at similarity coordinate `ξ = x/t`.
    pub fn sample(&self, xi: f64) -> Primitive {
        let g = self.gamma;
        let (ps, us) = (self.p_star, self.u_star);
        // Reflect the right side onto the left-side formulas.
        let (s, dir, xi) = if xi <= us {
            (self.left, 1.0, xi)
        } else {
            let r = self.right;
            (
                Primitive {
                    rho: r.rho,
                    u: -r.u,
                    p: r.p,
                },
                -1.0,
                -xi,
            )
        };
        let us = dir * us;
        let c = sound(g, s);
        let out = if ps > s.p {
            let ratio = ps / s.p;
            let speed = s.u - c * ((g + 1.0) / (2.0 * g) * ratio + (g - 1.0) / (2.0 * g)).sqrt();
            if xi <= speed {
                s
            } else {
                let k = (g - 1.0) / (g + 1.0);
                Primitive {
                    rho: s.rho * (ratio + k) / (k * ratio + 1.0),
                    u: us,
                    p: ps,
                }
            }
        } else {
            let head = s.u - c;
            let c_star = c * (ps / s.p).powf((g - 1.0) / (2.0 * g));
            let tail = us - c_star;
            if xi <= head {
                s
            } else if xi >= tail {
                Primitive {
                    rho: s.rho * (ps / s.p).powf(1.0 / g),
                    u: us,
                    p: ps,
                }
            } else {
                let k = 2.0 / (g + 1.0);
                let cf = k * (c + 0.5 * (g - 1.0) * (s.u - xi));
                Primitive {
                    rho: s.rho * (cf / c).powf(2.0 / (g - 1.0)),
                    u: k * (c + 0.5 * (g - 1.0) * s.u + xi),
                    p: s.p * (cf / c).powf(2.0 * g / (g - 1.0)),
                }
            }
        };
        Primitive {
            u: dir * out.u,
            ..out
        }
    }
}
