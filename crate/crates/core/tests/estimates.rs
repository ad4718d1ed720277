mod common;

use common::{radius, Mixture};
use landau_core::estimates::{
    coercivity_bound_check, convolution_bound_check, convolution_integral, envelope_from_series,
    gronwall_envelope, level_set_report, refinement_pair, riccati_check, riccati_from_series,
    sample_directions, sample_set, sup_a_bound_check, ConvolutionRegime, LevelRule, Quadrature,
};
use landau_core::evolution::{run, DtPolicy, SolverConfig};
use landau_core::{profiles, Distribution, LandauError, VelocityGrid};
use proptest::prelude::*;
use std::f64::consts::PI;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// At `v = 0` the integral is `2π B((3−α)/2, (α+m−3)/2)`.
fn origin_value(alpha: f64, m: f64) -> f64 {
    let (x, y) = ((3.0 - alpha) / 2.0, (alpha + m - 3.0) / 2.0);
    2.0 * PI * libm::tgamma(x) * libm::tgamma(y) / libm::tgamma(x + y)
}

#[test]
fn convolution_at_origin_matches_beta_function() {
    for (alpha, m) in [
        (1.0, 2.5),
        (1.0, 3.0),
        (1.0, 4.0),
        (2.0, 2.5),
        (2.0, 4.0),
        (0.5, 3.7),
    ] {
        let got = convolution_integral(alpha, m, 0.0, Quadrature::default()).unwrap();
        assert!(
            rel(got, origin_value(alpha, m)) < 1e-10,
            "alpha {alpha} m {m}: {got}"
        );
    }
    let report = convolution_bound_check(1.0, 3.0, &[[0.0; 3]], Quadrature::default()).unwrap();
    assert!(rel(report.sup_ratio, 4.0 * PI / 2f64.ln()) < 1e-10);
}

#[test]
fn newton_potential_of_algebraic_profiles() {
    // α = 1 is the Newton potential: 4π (r⁻¹ ∫₀ʳ s²ρ + ∫ᵣ^∞ sρ).
    for r in [0.3, 1.0, 2.5, 5.0, 6.4] {
        let m4 = convolution_integral(1.0, 4.0, r, Quadrature::default()).unwrap();
        assert!(
            rel(m4, 2.0 * PI * r.atan() / r) < 1e-10,
            "m = 4, r = {r}: {m4}"
        );
        let m3 = convolution_integral(1.0, 3.0, r, Quadrature::default()).unwrap();
        assert!(
            rel(m3, 4.0 * PI * r.asinh() / r) < 1e-10,
            "m = 3, r = {r}: {m3}"
        );
    }
}

#[test]
fn convolution_is_stable_under_doubling() {
    let samples = sample_set(&VelocityGrid::new(16, 8.0).unwrap());
    for (alpha, m) in [(1.0, 4.0), (2.0, 2.5)] {
        let base = convolution_bound_check(alpha, m, &samples, Quadrature::default()).unwrap();
        let fine =
            convolution_bound_check(alpha, m, &samples, Quadrature::default().doubled()).unwrap();
        assert!(base.sup_ratio.is_finite() && base.ratios.iter().all(|&r| r >= 0.0));
        assert!(rel(base.sup_ratio, fine.sup_ratio) < 0.02);
        assert_eq!(base.alpha, Some(alpha));
    }
}

#[test]
fn regimes_and_their_limits() {
    assert_eq!(
        ConvolutionRegime::classify(1.0, 2.5).unwrap(),
        ConvolutionRegime::Slow
    );
    assert_eq!(
        ConvolutionRegime::classify(1.0, 3.0).unwrap(),
        ConvolutionRegime::Critical
    );
    assert_eq!(
        ConvolutionRegime::classify(1.0, 4.0).unwrap(),
        ConvolutionRegime::Fast
    );
    for (alpha, m) in [
        (3.0, 4.0),
        (0.0, 4.0),
        (1.0, 2.0),
        (2.0, 0.5),
        (1.0, f64::NAN),
    ] {
        assert!(matches!(
            convolution_integral(alpha, m, 1.0, Quadrature::default()),
            Err(LandauError::InvalidParameter { .. })
        ));
    }
    let v = [5.0, 0.0, 0.0];
    let below = ConvolutionRegime::Slow.envelope(1.0, 2.95, v);
    let at = ConvolutionRegime::Critical.envelope(1.0, 3.0, v);
    let above = ConvolutionRegime::Fast.envelope(1.0, 3.05, v);
    println!("envelopes at |v| = 5 across m = 3: {below:.4} {at:.4} {above:.4}");
}

#[test]
fn sample_set_layout() {
    let grid = VelocityGrid::new(16, 5.0).unwrap();
    let samples = sample_set(&grid);
    assert_eq!(samples.len(), 13 * 24);
    assert!(sample_directions()
        .iter()
        .all(|d| (radius(*d) - 1.0).abs() < 1e-15));
    let r_max = samples.iter().map(|&v| radius(v)).fold(0.0, f64::max);
    assert!((r_max - 4.0).abs() < 1e-12);
}

/// `v·Av / (⟨v⟩^{4−m} ‖M‖_{L∞_m})` with the closed-form radial eigenvalue.
fn maxwellian_ratio(v: [f64; 3], m: f64, norm: f64) -> f64 {
    let r = radius(v);
    let (lr, _) = Mixture(vec![(1.0, 1.0)]).eigenvalues(r);
    lr * r * r / ((1.0 + r * r).powf(0.5 * (4.0 - m)) * norm)
}

/// Largest deviation from the closed form over the sample set, relative
/// to the exact sup ratio.
fn maxwellian_coercivity_error(n: usize, m: f64) -> f64 {
    let grid = VelocityGrid::new(n, 8.0).unwrap();
    let f = profiles::unit_maxwellian(&grid);
    let samples = sample_set(&grid);
    let norm = f.weighted_sup_norm(m).unwrap();
    let report = coercivity_bound_check(&f, m, &samples).unwrap();
    let exact: Vec<f64> = samples
        .iter()
        .map(|&v| maxwellian_ratio(v, m, norm))
        .collect();
    let sup_exact = exact.iter().copied().fold(0.0, f64::max);
    let worst = report
        .ratios
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    worst / sup_exact
}

#[test]
fn maxwellian_coercivity_matches_closed_form() {
    for m in [2.5, 3.5, 4.5] {
        let (coarse, fine) = (
            maxwellian_coercivity_error(16, m),
            maxwellian_coercivity_error(32, m),
        );
        println!("m {m}: {coarse:e} {fine:e}");
        assert!(
            fine < 1e-2 && coarse / fine > 3.5,
            "m {m}: {coarse:e} {fine:e}"
        );
    }
}

/// Least-squares slope of `log ratio` against `log ⟨v⟩`.
fn log_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / k, sy / k);
    let (num, den) = points.iter().fold((0.0, 0.0), |(n, d), &(x, y)| {
        (n + (x - mx) * (y - my), d + (x - mx) * (x - mx))
    });
    num / den
}

#[test]
fn maxwellian_coercivity_tail_exponent() {
    // v·Av → 1/(4π|v|) for unit mass, so the ratio falls like ⟨v⟩^{m−5}.
    let grid = VelocityGrid::new(32, 8.0).unwrap();
    let f = profiles::unit_maxwellian(&grid);
    let m = 2.5;
    let norm = f.weighted_sup_norm(m).unwrap();
    let axis: Vec<[f64; 3]> = (0..=8).map(|k| [4.0 + 0.25 * k as f64, 0.0, 0.0]).collect();
    let report = coercivity_bound_check(&f, m, &axis).unwrap();
    let fit = |ratios: &[f64]| {
        let pts: Vec<(f64, f64)> = axis
            .iter()
            .zip(ratios)
            .map(|(v, r)| ((1.0 + v[0] * v[0]).sqrt().ln(), r.ln()))
            .collect();
        log_slope(&pts)
    };
    let measured = fit(&report.ratios);
    let exact = fit(&axis
        .iter()
        .map(|&v| maxwellian_ratio(v, m, norm))
        .collect::<Vec<_>>());
    assert!((measured - exact).abs() < 1e-2, "{measured} vs {exact}");
    assert!((measured - (m - 5.0)).abs() < 0.15, "{measured}");
    // The envelope exponent 4 − m itself is never exceeded.
    assert!(measured < 0.0);
}

#[test]
fn coercivity_refinement_and_homogeneity() {
    let m = 4.5;
    let ratios: Vec<f64> = [16, 32]
        .iter()
        .map(|&n| {
            let grid = VelocityGrid::new(n, 8.0).unwrap();
            let h = profiles::fat_tail(m, 1.0, &grid).unwrap();
            let samples = sample_set(&grid);
            let base = coercivity_bound_check(&h, m, &samples).unwrap();
            let scaled = coercivity_bound_check(&h.scaled(10.0), m, &samples).unwrap();
            for (a, b) in base.ratios.iter().zip(&scaled.ratios) {
                assert!((a - b).abs() <= 1e-10 * base.sup_ratio);
            }
            assert!(base.ratios.iter().all(|&r| r >= 0.0));
            base.sup_ratio
        })
        .collect();
    assert!(ratios[1].is_finite());
    assert!(rel(ratios[0], ratios[1]) < 0.2, "{ratios:?}");
}

#[test]
fn coercivity_hypotheses() {
    let grid = VelocityGrid::new(8, 4.0).unwrap();
    let f = profiles::unit_maxwellian(&grid);
    for m in [3.0, 2.0, 5.5, 1.5] {
        assert!(matches!(
            coercivity_bound_check(&f, m, &[[1.0, 0.0, 0.0]]),
            Err(LandauError::InvalidParameter { name: "m", .. })
        ));
    }
    let mut negative = f.clone();
    negative.values_mut()[0] = -1.0;
    assert!(coercivity_bound_check(&negative, 2.5, &[[1.0, 0.0, 0.0]]).is_err());
    let zero = coercivity_bound_check(&Distribution::zeros(grid), 2.5, &[[1.0, 0.0, 0.0]]).unwrap();
    assert!(zero.degenerate);
    assert_eq!(zero.sup_ratio, 0.0);
}

#[test]
#[ignore = "the band-limited kernel spreads a one-cell mass over neighbouring nodes, so A[h] at v != 0 keeps a radial part of relative size ~1e-2; see the coefficient tests"]
fn point_mass_is_annihilated_along_v() {
    let grid = VelocityGrid::new(16, 4.0).unwrap();
    let h = profiles::origin_point_mass(&grid);
    let samples: Vec<[f64; 3]> = sample_set(&grid);
    let report = coercivity_bound_check(&h, 2.5, &samples).unwrap();
    let peak = report.sup_ratio;
    assert!(peak < 1e-10, "{peak}");
}

#[test]
fn sup_a_for_maxwellian() {
    // A(0) = a(0)/3 · I is the largest node value; ‖M‖_{L²_m} by 1D quadrature.
    let m: f64 = 2.5;
    let a0 = (2.0 / PI).sqrt() / (4.0 * PI) / 3.0;
    let steps = 200_000;
    let dr = 12.0 / steps as f64;
    let l2_sq: f64 = (0..steps)
        .map(|i| {
            let r = (i as f64 + 0.5) * dr;
            let mx = (2.0 * PI).powf(-1.5) * (-0.5 * r * r).exp();
            4.0 * PI * r * r * (1.0 + r * r).powf(m) * mx * mx * dr
        })
        .sum();
    let exact = a0 / l2_sq.sqrt();
    let mut sups = Vec::new();
    for n in [16, 32] {
        let grid = VelocityGrid::new(n, 8.0).unwrap();
        let f = profiles::unit_maxwellian(&grid);
        let report = sup_a_bound_check(&f, 2.0, m).unwrap();
        assert!(
            rel(report.sup_ratio, exact) < 1e-3,
            "n {n}: {} vs {exact}",
            report.sup_ratio
        );
        for c in [0.1, 10.0] {
            let scaled = sup_a_bound_check(&f.scaled(c), 2.0, m).unwrap();
            assert!(rel(scaled.sup_ratio, report.sup_ratio) < 1e-10);
        }
        sups.push(report.sup_ratio);
    }
    assert!(rel(sups[0], sups[1]) < 0.02);
}

#[test]
fn sup_a_hypotheses() {
    let grid = VelocityGrid::new(8, 4.0).unwrap();
    let f = profiles::unit_maxwellian(&grid);
    assert!(matches!(
        sup_a_bound_check(&f, 1.5, 2.5),
        Err(LandauError::InvalidParameter { name: "p", .. })
    ));
    assert!(matches!(
        sup_a_bound_check(&f, 2.0, 2.0),
        Err(LandauError::InvalidParameter { name: "m", .. })
    ));
    let zero = sup_a_bound_check(&Distribution::zeros(grid), 2.0, 2.5).unwrap();
    assert!(zero.degenerate);
    assert_eq!(zero.sup_ratio, 0.0);
}

#[test]
fn synthetic_exponential_growth_gives_constant_k() {
    let times: Vec<f64> = (0..=20).map(|k| 0.05 * k as f64).collect();
    let weighted: Vec<f64> = times.iter().map(|t| 2.0 * (3.0 * t).exp()).collect();
    let report = envelope_from_series(2.5, 0, &times, &weighted, &times).unwrap();
    assert_eq!(report.k_hat[0], None);
    for k in &report.k_hat[1..] {
        assert!((k.unwrap() - 3.0).abs() < 1e-13);
    }
    assert!((report.sup_k_hat.unwrap() - 3.0).abs() < 1e-13);
}

#[test]
fn envelope_series_validation() {
    assert!(envelope_from_series(2.5, 0, &[0.0, 1.0], &[1.0], &[0.0, 1.0]).is_err());
    assert!(envelope_from_series(2.5, 0, &[0.0], &[0.0], &[0.0]).is_err());
    let flat = envelope_from_series(2.5, 0, &[0.0], &[1.0], &[0.0]).unwrap();
    assert_eq!(flat.sup_k_hat, None);
    assert!(refinement_pair(&flat, &flat).is_err());
}

#[test]
fn refinement_pair_arithmetic() {
    let t = [0.0, 1.0];
    let coarse = envelope_from_series(2.5, 16, &t, &[1.0, 2f64.exp()], &t).unwrap();
    let fine = envelope_from_series(2.5, 32, &t, &[1.0, 2.5f64.exp()], &t).unwrap();
    let pair = refinement_pair(&coarse, &fine).unwrap();
    assert_eq!((pair.n_coarse, pair.n_fine), (16, 32));
    assert!((pair.relative_change - 0.2).abs() < 1e-14);
}

fn quick_config(t_end: f64, m_list: Vec<f64>) -> SolverConfig {
    SolverConfig {
        t_end,
        snapshot_stride: 1,
        m_list,
        ..SolverConfig::default()
    }
}

#[test]
#[ignore = "the discrete Maxwellian is not an exact steady state: the O(h^2) residual (6.6e-4 relative at n = 64) moves the weighted sup by more than rounding"]
fn maxwellian_envelope_is_flat() {
    let grid = VelocityGrid::new(16, 6.0).unwrap();
    let traj = run(
        &profiles::unit_maxwellian(&grid),
        &quick_config(0.5, vec![2.5]),
    )
    .unwrap();
    let report = gronwall_envelope(&traj, 2.5).unwrap();
    assert!(report.sup_k_hat.unwrap().abs() < 1e-12);
}

#[test]
fn envelope_needs_a_recorded_non_integer_weight() {
    let grid = VelocityGrid::new(8, 4.0).unwrap();
    let traj = run(
        &profiles::unit_maxwellian(&grid),
        &quick_config(0.05, vec![2.5]),
    )
    .unwrap();
    assert!(gronwall_envelope(&traj, 3.5).is_err());
    assert!(gronwall_envelope(&traj, 3.0).is_err());
    assert!(gronwall_envelope(&traj, 2.5).is_ok());
}

#[test]
fn riccati_equality_solution() {
    let margins: Vec<f64> = [1e-3f64, 5e-4]
        .iter()
        .map(|&dt| {
            let steps = (0.4 / dt).round() as usize;
            let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
            let maxima: Vec<f64> = times.iter().map(|t| 1.0 / (1.0 - t)).collect();
            let report = riccati_from_series(&times, &maxima).unwrap();
            // Forward differences overshoot by dt / (1 − t − dt).
            let t_last = times[times.len() - 2];
            assert!(
                report.worst_margin > 0.0
                    && report.worst_margin <= dt / (1.0 - t_last - dt) * (1.0 + 1e-6)
            );
            assert!(report.worst_integrated.abs() < 1e-12);
            report.worst_margin
        })
        .collect();
    assert!((margins[0] / margins[1] - 2.0).abs() < 0.05);
}

#[test]
fn riccati_series_validation() {
    assert!(riccati_from_series(&[0.0], &[1.0]).is_err());
    assert!(riccati_from_series(&[0.0, 0.0], &[1.0, 1.0]).is_err());
    assert!(riccati_from_series(&[0.0, 1.0], &[1.0]).is_err());
}

#[test]
fn riccati_holds_on_a_fat_tail_run() {
    let grid = VelocityGrid::new(16, 8.0).unwrap();
    let traj = run(
        &profiles::fat_tail(2.5, 1.0, &grid).unwrap(),
        &quick_config(0.5, vec![2.5]),
    )
    .unwrap();
    let report = riccati_check(&traj).unwrap();
    assert_eq!(report.margins.len(), traj.diagnostics.len() - 1);
    assert!(report.worst_margin <= 1e-3, "{}", report.worst_margin);
    assert!(report.worst_integrated <= 1e-12);
}

#[test]
fn empty_level_set_reports_zeros() {
    let grid = VelocityGrid::new(16, 8.0).unwrap();
    let traj = run(
        &profiles::fat_tail(2.5, 1.0, &grid).unwrap(),
        &quick_config(0.1, vec![2.5]),
    )
    .unwrap();
    let peak = traj
        .diagnostics
        .iter()
        .map(|d| d.weighted_sup[0])
        .fold(0.0, f64::max);
    let report = level_set_report(&traj, 2.5, LevelRule::Constant { ell0: 2.0 * peak }).unwrap();
    assert_eq!(report.rows.len(), traj.snapshots.len());
    for row in &report.rows {
        assert_eq!(
            [
                row.lhs,
                row.rhs1,
                row.rhs2,
                row.c_hat,
                row.dissipation,
                row.g_ell_mass,
                row.g_ell_energy
            ],
            [0.0; 7]
        );
        assert_eq!(row.terms, [0.0; 5]);
    }
    assert!(report.initial_g_energy > 0.0);
}

#[test]
fn level_set_hypotheses() {
    let grid = VelocityGrid::new(8, 4.0).unwrap();
    let traj = run(
        &profiles::unit_maxwellian(&grid),
        &quick_config(0.05, vec![2.5]),
    )
    .unwrap();
    for m in [2.0, 3.0, 5.0, 1.0] {
        assert!(level_set_report(&traj, m, LevelRule::Constant { ell0: 0.1 }).is_err());
    }
    assert!(level_set_report(&traj, 2.5, LevelRule::Constant { ell0: -1.0 }).is_err());
}

/// Centred reconstruction of `d/dt ½∫g_ℓ² + ℓ' ∫g_ℓ` at interior rows.
fn reconstruction_gap(rule: LevelRule, dt: f64) -> f64 {
    let grid = VelocityGrid::new(16, 8.0).unwrap();
    let cfg = SolverConfig {
        dt_policy: DtPolicy::Fixed(dt),
        ..quick_config(0.1, vec![2.5])
    };
    let traj = run(&profiles::fat_tail(2.5, 1.0, &grid).unwrap(), &cfg).unwrap();
    let report = level_set_report(&traj, 2.5, rule).unwrap();
    let rows = &report.rows;
    let scale = rows.iter().map(|r| r.lhs.abs()).fold(0.0, f64::max);
    (1..rows.len() - 1)
        .map(|k| {
            let span = rows[k + 1].t - rows[k - 1].t;
            let energy_rate = 0.5 * (rows[k + 1].g_ell_energy - rows[k - 1].g_ell_energy) / span;
            let level_rate = (rows[k + 1].ell - rows[k - 1].ell) / span;
            (rows[k].lhs - energy_rate - level_rate * rows[k].g_ell_mass).abs() / scale
        })
        .fold(0.0, f64::max)
}

#[test]
fn level_set_lhs_is_the_energy_rate() {
    for rule in [
        LevelRule::Constant { ell0: 0.5 },
        LevelRule::Gronwall {
            ell0: 0.5,
            k_hat: 0.4,
        },
    ] {
        let coarse = reconstruction_gap(rule, 0.01);
        let fine = reconstruction_gap(rule, 0.005);
        assert!(fine < 1e-3, "{rule:?}: {coarse:e} {fine:e}");
        assert!(coarse / fine > 3.0, "{rule:?}: {coarse:e} {fine:e}");
    }
}

#[test]
fn level_set_report_on_fat_tail() {
    let grid = VelocityGrid::new(16, 8.0).unwrap();
    let traj = run(
        &profiles::fat_tail(2.5, 1.0, &grid).unwrap(),
        &quick_config(0.25, vec![2.5]),
    )
    .unwrap();
    let ell0 = traj.diagnostics[0].weighted_sup[0];
    let constant = level_set_report(&traj, 2.5, LevelRule::Constant { ell0: 0.5 * ell0 }).unwrap();
    for row in &constant.rows {
        assert!(row.rhs1 >= 0.0 && row.rhs2 >= 0.0 && row.dissipation >= 0.0);
        assert!(row.c_hat.is_finite() && row.c_hat >= 0.0);
        assert_eq!(row.terms[0], -row.dissipation);
    }
    let envelope = gronwall_envelope(&traj, 2.5).unwrap();
    let k_hat = envelope.sup_k_hat.unwrap();
    let gronwall = level_set_report(&traj, 2.5, LevelRule::Gronwall { ell0, k_hat }).unwrap();
    assert!(gronwall.max_g_ell_energy <= 1e-6 * gronwall.initial_g_energy);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn running_sup_is_monotone(growth in prop::collection::vec(-2.0f64..2.0, 2..30)) {
        let times: Vec<f64> = (0..growth.len()).map(|k| k as f64 * 0.1).collect();
        let mut weighted = vec![1.0];
        for g in &growth[1..] {
            let last = *weighted.last().unwrap();
            weighted.push(last * (0.1 * g).exp());
        }
        let report = envelope_from_series(2.5, 0, &times, &weighted, &times).unwrap();
        let seen: Vec<f64> = report.running_sup.iter().flatten().copied().collect();
        prop_assert!(seen.windows(2).all(|w| w[1] >= w[0]));
        let best = report.k_hat.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(report.sup_k_hat.unwrap(), best);
    }

    #[test]
    fn decreasing_maxima_satisfy_riccati(steps in prop::collection::vec(0.0f64..1.0, 2..30)) {
        let times: Vec<f64> = (0..steps.len()).map(|k| k as f64 * 0.05).collect();
        let mut maxima = vec![2.0];
        for s in &steps[1..] {
            let last = *maxima.last().unwrap();
            maxima.push(last * (1.0 - 0.1 * s));
        }
        let report = riccati_from_series(&times, &maxima).unwrap();
        prop_assert!(report.worst_margin <= -1.0 + 1e-12);
        prop_assert!(report.worst_integrated <= 0.0);
    }

    #[test]
    fn convolution_ratio_is_positive(alpha in 0.2f64..2.8, extra in 0.1f64..3.0, r in 0.0f64..8.0) {
        let m = 3.0 - alpha + extra;
        prop_assume!((m - 3.0).abs() > 1e-6);
        let v = [r, 0.0, 0.0];
        let report = convolution_bound_check(alpha, m, &[v], Quadrature::default()).unwrap();
        prop_assert!(report.sup_ratio.is_finite() && report.sup_ratio > 0.0);
    }
}
