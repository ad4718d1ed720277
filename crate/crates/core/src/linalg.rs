//! Small dense helpers for symmetric 3×3 matrices stored as
//! `[xx, xy, xz, yy, yz, zz]`.

pub type Sym3 = [f64; 6];

#[inline]
pub fn trace(a: &Sym3) -> f64 {
    a[0] + a[3] + a[5]
}

#[inline]
pub fn mat_vec(a: &Sym3, v: [f64; 3]) -> [f64; 3] {
    [
        a[0] * v[0] + a[1] * v[1] + a[2] * v[2],
        a[1] * v[0] + a[3] * v[1] + a[4] * v[2],
        a[2] * v[0] + a[4] * v[1] + a[5] * v[2],
    ]
}

/// `vᵀ A v`.
#[inline]
pub fn quadratic_form(a: &Sym3, v: [f64; 3]) -> f64 {
    let w = mat_vec(a, v);
    v[0] * w[0] + v[1] * w[1] + v[2] * w[2]
}

/// Eigenvalues in ascending order (trigonometric solution of the
/// characteristic cubic; accurate to a few ulps of `‖A‖` for symmetric input).
pub fn eigenvalues(a: &Sym3) -> [f64; 3] {
    let off = a[1] * a[1] + a[2] * a[2] + a[4] * a[4];
    if off == 0.0 {
        let mut d = [a[0], a[3], a[5]];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let q = trace(a) / 3.0;
    let (b0, b3, b5) = (a[0] - q, a[3] - q, a[5] - q);
    let p2 = b0 * b0 + b3 * b3 + b5 * b5 + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return [q; 3];
    }
    // det(B / p) / 2 with B = A - qI.
    let det = b0 * (b3 * b5 - a[4] * a[4]) - a[1] * (a[1] * b5 - a[4] * a[2])
        + a[2] * (a[1] * a[4] - b3 * a[2]);
    let r = (det / (2.0 * p * p * p)).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let mid = 3.0 * q - hi - lo;
    [lo, mid, hi]
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix3;
    use proptest::prelude::*;

    fn reference(a: &Sym3) -> [f64; 3] {
        let m = Matrix3::new(a[0], a[1], a[2], a[1], a[3], a[4], a[2], a[4], a[5]);
        let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        [e[0], e[1], e[2]]
    }

    #[test]
    fn diagonal_and_identity() {
        assert_eq!(
            eigenvalues(&[3.0, 0.0, 0.0, 1.0, 0.0, 2.0]),
            [1.0, 2.0, 3.0]
        );
        assert_eq!(
            eigenvalues(&[1.0, 0.0, 0.0, 1.0, 0.0, 1.0]),
            [1.0, 1.0, 1.0]
        );
    }

    #[test]
    fn projection_has_eigenvalues_0_1_1() {
        let w = [0.3, -1.2, 0.7];
        let r2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
        let p = [
            1.0 - w[0] * w[0] / r2,
            -w[0] * w[1] / r2,
            -w[0] * w[2] / r2,
            1.0 - w[1] * w[1] / r2,
            -w[1] * w[2] / r2,
            1.0 - w[2] * w[2] / r2,
        ];
        let e = eigenvalues(&p);
        assert!(e[0].abs() < 1e-15 && (e[1] - 1.0).abs() < 1e-15 && (e[2] - 1.0).abs() < 1e-15);
        assert!(quadratic_form(&p, w).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn agrees_with_nalgebra(a in proptest::array::uniform6(-10.0f64..10.0)) {
            let got = eigenvalues(&a);
            let want = reference(&a);
            let scale = a.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
            for d in 0..3 {
                prop_assert!((got[d] - want[d]).abs() <= 1e-12 * scale, "{got:?} vs {want:?}");
            }
        }
    }
}
