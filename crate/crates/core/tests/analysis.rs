mod common;

use std::sync::Arc;

use common::{linspace, slope, trapezoid};
use num_complex::Complex64;
use propertime::analysis::{
    admissibility_check, covariance_check, exponential_tail_test, propertime_sweep, tail_exponent, AdmissibilityReport,
    Candidate, CovarianceGrids, LinearFit, Verdict,
};
use propertime::kinematics::{build_grid, GridSpec, Mass, QuadratureGrid};
use propertime::operators::{eigenvalue, q3_longitudinal_eigenfunction, ExtensionParam, StencilSpec};
use propertime::povm::{position_density, PositionTruncation};
use propertime::states::{gaussian_packet, PhysState, PositionAmplitude, SeparableHyperbolic, Sign};
use proptest::prelude::*;

fn m1() -> Mass {
    Mass::new(1.0).unwrap()
}

fn hyp() -> QuadratureGrid {
    build_grid(GridSpec::hyperbolic(24, 256, 4, 6.0), m1()).unwrap()
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn consistent(r: &AdmissibilityReport) -> bool {
    let all = [r.band_limit, r.endpoint_zeros, r.boundary_decay, r.square_integrable, r.smoothness]
        .iter()
        .all(|v| *v == Verdict::Pass);
    all == r.admissible
}

#[test]
fn extension_eigenfunction_is_inadmissible() {
    let g = hyp();
    let z = eigenvalue(ExtensionParam::new(0.7).unwrap(), 0, m1());
    let v = q3_longitudinal_eigenfunction(z, Sign::Plus, 0.0, m1()).unwrap();
    let r = admissibility_check(Candidate::State { state: &v, grid: &g }).unwrap();
    assert!(!r.admissible);
    assert_eq!(r.boundary_decay, Verdict::Fail);
    assert!(consistent(&r));
}

#[test]
fn cos_squared_margin_is_admissible() {
    let g = hyp();
    // ν-profile cos²ν (sec ν)^{−3/2}.
    let amp = SeparableHyperbolic::new(|w: f64| c((-w * w).exp()), |nu: f64| c(nu.cos().powf(3.5)), 0);
    let s = PhysState::single(m1(), Sign::Plus, Arc::new(amp)).normalize(&g).unwrap();
    let r = admissibility_check(Candidate::State { state: &s, grid: &g }).unwrap();
    assert!(r.admissible, "{r:?}");
    assert!(consistent(&r));
    // The extra cos²ν fits as a local power near 2.
    assert!(r.tail_exponents.iter().all(|p| (p - 2.0).abs() < 0.1), "{:?}", r.tail_exponents);
}

#[test]
fn compact_box_is_inadmissible() {
    let z = linspace(-60.0, 60.0, 1201);
    let omega = z.iter().map(|z| c(if z.abs() <= 2.0 { 1.0 } else { 0.0 })).collect();
    let pa = PositionAmplitude::new(z, omega, vec![0.5, 1.0], vec![c(1.0); 2]).unwrap();
    let r = admissibility_check(Candidate::Amplitude { amplitude: &pa, mass: m1() }).unwrap();
    assert!(!r.admissible);
    assert!(consistent(&r));
}

#[test]
fn exponential_control_and_power_tails() {
    let z = linspace(-60.0, 60.0, 1201);
    let exp_data: Vec<f64> = z.iter().map(|z| (-0.8 * z.abs()).exp()).collect();
    let report = exponential_tail_test(&z, &exp_data, 0.5, 1.0).unwrap();
    assert_eq!(report.verdict, Verdict::Pass);
    assert!((report.fit.unwrap().rate - 0.8).abs() < 1e-8);
    // A sinc-like oscillating 1/|z| tail: no exponential bound, slope −1.
    let sinc_data: Vec<f64> = z.iter().map(|z| if *z == 0.0 { 1.0 } else { (z.sin() / z).abs() }).collect();
    let report = exponential_tail_test(&z, &sinc_data, 0.5, 1.0).unwrap();
    assert_eq!(report.verdict, Verdict::Fail);
    let fit = tail_exponent(&z, &sinc_data, 1.0).unwrap().unwrap();
    assert_eq!(fit.preferred(), "power");
    assert!((fit.power + 1.0).abs() < 0.05, "power {}", fit.power);
}

#[test]
fn narrow_window_is_indeterminate() {
    let z = linspace(-5.0, 5.0, 101);
    let data: Vec<f64> = z.iter().map(|z| (-z.abs()).exp()).collect();
    let report = exponential_tail_test(&z, &data, 0.5, 1.0).unwrap();
    assert_eq!(report.verdict, Verdict::Indeterminate);
    assert!(report.reason.is_some());
    assert!(tail_exponent(&z, &data, 1.0).unwrap().is_none());
}

/// ⟨π³⟩ summed here over the nodes of a spherical grid.
fn momentum_z(state: &PhysState, grid: &QuadratureGrid) -> f64 {
    let v = state.values_on(grid).unwrap();
    let (mut num, mut den) = (0.0, 0.0);
    for (i, p) in grid.points().iter().enumerate() {
        let w = grid.weights()[i] * v[0][i].norm_sqr();
        num += w * p.to_cartesian(grid.mass())[2];
        den += w;
    }
    num / den
}

fn sweep_means(state: &PhysState, taus: &[f64], g: &QuadratureGrid) -> (Vec<f64>, propertime::analysis::SweepResult) {
    let z = linspace(-60.0, 60.0, 1201);
    let sweep = propertime_sweep(state, taus, &z, PositionTruncation::default(), g).unwrap();
    let means = sweep
        .profiles
        .iter()
        .map(|p| {
            let zp: Vec<f64> = p.points.iter().zip(&p.density).map(|(z, v)| z * v).collect();
            trapezoid(&p.points, &zp) / trapezoid(&p.points, &p.density)
        })
        .collect();
    (means, sweep)
}

#[test]
fn resting_packet_does_not_drift() {
    let g = build_grid(GridSpec::hyperbolic(48, 160, 8, 6.0), m1()).unwrap();
    let s = gaussian_packet([0.0; 3], 0.4, Sign::Plus, &g).unwrap();
    let taus = [0.0, 2.0, 5.0, 10.0];
    let (means, sweep) = sweep_means(&s, &taus, &g);
    assert!(means.iter().all(|m| m.abs() < 1e-2), "{means:?}");
    assert!(sweep.expected_slope.abs() < 1e-12);
}

#[test]
fn moving_packet_drifts_at_half_speed() {
    let g = build_grid(GridSpec::hyperbolic(48, 160, 8, 6.0), m1()).unwrap();
    let sg = build_grid(GridSpec::spherical(64, 24, 8, 8.0), m1()).unwrap();
    // Secant search for the centre whose ⟨π³⟩ is 0.5m.
    let target = |pz: f64| momentum_z(&gaussian_packet([0.0, 0.0, pz], 0.4, Sign::Plus, &sg).unwrap(), &sg) - 0.5;
    let (mut a, mut b) = (0.4, 0.6);
    for _ in 0..20 {
        let (fa, fb) = (target(a), target(b));
        if fb.abs() < 1e-12 {
            break;
        }
        (a, b) = (b, b - fb * (b - a) / (fb - fa));
    }
    let s = gaussian_packet([0.0, 0.0, b], 0.4, Sign::Plus, &g).unwrap();
    assert!((momentum_z(&s, &sg) - 0.5).abs() < 1e-9);
    let taus: Vec<f64> = (0..=8).map(f64::from).collect();
    let (means, sweep) = sweep_means(&s, &taus, &g);
    let fitted = slope(&taus, &means);
    assert!((fitted - 0.5).abs() < 0.01, "slope {fitted}");
    let lib = sweep.drift.unwrap();
    assert!((lib.slope - fitted).abs() < 1e-3);
    assert!(lib.relative_residual < 1e-2);
    let direct = position_density(&s, 0.0, &sweep.profiles[0].points, PositionTruncation::default(), &g).unwrap();
    assert_eq!(direct.density, sweep.profiles[0].density);
}

#[test]
fn zero_rapidity_has_no_discrepancy() {
    let sg = build_grid(GridSpec::spherical(32, 12, 8, 8.0), m1()).unwrap();
    let hg = build_grid(GridSpec::hyperbolic(24, 64, 8, 4.0), m1()).unwrap();
    let s = gaussian_packet([0.0, 0.0, 0.3], 0.4, Sign::Plus, &hg).unwrap();
    let grids = CovarianceGrids { spherical: &sg, hyperbolic: &hg };
    let r = covariance_check(&s, 0.0, 1.0, grids, &StencilSpec::new(0.05).unwrap()).unwrap();
    assert_eq!(r.discrepancy, 0.0);
    assert_eq!(r.boosted_q3, r.q3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn line_fit_recovers_lines(a in -5.0..5.0f64, b in -3.0..3.0f64, n in 3usize..20) {
        let x: Vec<f64> = (0..n).map(|i| i as f64 * 0.7).collect();
        let y: Vec<f64> = x.iter().map(|x| a + b * x).collect();
        let f = LinearFit::fit(&x, &y).unwrap();
        prop_assert!((f.slope - b).abs() < 1e-10 && (f.intercept - a).abs() < 1e-10);
        prop_assert!(f.relative_residual < 1e-10);
    }

    #[test]
    fn exponential_rates_are_recovered(rate in 0.2..2.0f64) {
        let z = linspace(-60.0, 60.0, 601);
        let data: Vec<f64> = z.iter().map(|z| (-rate * z.abs()).exp().max(1e-300)).collect();
        let report = exponential_tail_test(&z, &data, rate, 1.0).unwrap();
        prop_assert_eq!(report.verdict, Verdict::Pass);
        let report = exponential_tail_test(&z, &data, 1.2 * rate, 1.0).unwrap();
        prop_assert_eq!(report.verdict, Verdict::Fail);
    }
}
