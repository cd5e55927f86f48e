mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::{linspace, sin_over, trapezoid};
use num_complex::Complex64;
use propertime::kinematics::{build_grid, GridSpec, Mass, MomentumPoint, QuadratureGrid};
use propertime::povm::{
    completeness_residual, interval_probability, position_overlap, time_overlap_smeared, CompletenessTruncation,
    PositionProjector, PositionTruncation, PovmElementSpec, TimeProjector, TimeWindow,
};
use propertime::specfun::{conical_p, spherical_harmonic, ConicalArgs};
use propertime::states::{gaussian_packet, FnAmplitude, PhysState, SeparableHyperbolic, Sign, Symmetry};
use proptest::prelude::*;

fn m1() -> Mass {
    Mass::new(1.0).unwrap()
}

fn time_grid() -> QuadratureGrid {
    build_grid(GridSpec::spherical_time(320, 8, 8, -12.0, -0.005), m1()).unwrap()
}

fn hyp() -> QuadratureGrid {
    build_grid(GridSpec::hyperbolic(48, 160, 8, 6.0), m1()).unwrap()
}

/// Transverse Gaussian times the normalized longitudinal element
/// π^{−1/2} (sec ν)^{−3/2} e^{−i z₀ ν} (ξ = +, τ = 0).
fn element_matched(z0: f64, grid: &QuadratureGrid) -> PhysState {
    let amp = SeparableHyperbolic::new(
        |w: f64| Complex64::new((-w * w).exp(), 0.0),
        move |nu: f64| Complex64::from_polar(nu.cos().powf(1.5) / PI.sqrt(), -z0 * nu),
        0,
    );
    PhysState::single(grid.mass(), Sign::Plus, Arc::new(amp)).normalize(grid).unwrap()
}

#[test]
fn rest_packet_time_mass() {
    let g = time_grid();
    let s = gaussian_packet([0.0; 3], 0.4, Sign::Plus, &g).unwrap();
    let t = linspace(-24.0, 24.0, 1201);
    let p = TimeProjector::new(&s, &g, 0).unwrap().density(0.0, &t).unwrap();
    assert!((trapezoid(&p.points, &p.density) - 1.0).abs() < 1e-3);
    assert!(completeness_residual(&s, CompletenessTruncation::Time { l_max: 0 }, &g).unwrap() < 1e-3);
}

#[test]
fn spherical_content_has_no_higher_l() {
    let g = time_grid();
    // Spherically symmetric, but declared without symmetry so every l is projected.
    let amp = FnAmplitude::new("radial", Symmetry::None, |p: &MomentumPoint, m: Mass| {
        let r = p.spherical_coords(m).0;
        Complex64::new((-r * r / 0.64).exp(), 0.0)
    });
    let s = PhysState::single(m1(), Sign::Plus, Arc::new(amp)).normalize(&g).unwrap();
    let by_l = TimeProjector::new(&s, &g, 3).unwrap().mass_by_l();
    assert!((by_l[0] - 1.0).abs() < 1e-3);
    assert!(by_l[1..].iter().all(|&x| x < 1e-12), "{by_l:?}");
}

#[test]
fn energy_sign_reverses_time() {
    let g = time_grid();
    let t = linspace(-10.0, 10.0, 201);
    let plus = gaussian_packet([0.0, 0.0, 0.3], 0.4, Sign::Plus, &g).unwrap();
    let minus = gaussian_packet([0.0, 0.0, 0.3], 0.4, Sign::Minus, &g).unwrap();
    let pp = TimeProjector::new(&plus, &g, 2).unwrap().density(1.5, &t).unwrap();
    let pm = TimeProjector::new(&minus, &g, 2).unwrap().density(1.5, &t).unwrap();
    let n = t.len();
    let mut asym: f64 = 0.0;
    for (i, t) in t.iter().enumerate() {
        assert!((pp.density[i] - pm.density[n - 1 - i]).abs() < 1e-12, "t = {t}");
        asym = asym.max((pp.density[i] - pp.density[n - 1 - i]).abs());
    }
    assert!(asym > 1e-4, "profile is symmetric, so the check is vacuous");
}

#[test]
fn single_element_state_gives_squared_sinc() {
    let g = hyp();
    let z0 = 3.0;
    let s = element_matched(z0, &g);
    let z = linspace(-7.0, 13.0, 201);
    let p = PositionProjector::new(&s, &g, PositionTruncation::default()).unwrap().density(0.0, &z).unwrap();
    let peak = p.density[100];
    for (z, v) in z.iter().zip(&p.density) {
        let oracle = sin_over(0.5 * PI * (z - z0)).powi(2);
        assert!((v / peak - oracle).abs() < 1e-6, "z = {z}: {} vs {oracle}", v / peak);
    }
}

#[test]
fn axial_state_has_no_azimuthal_content() {
    let g = hyp();
    let inner = gaussian_packet([0.0, 0.0, 0.4], 0.5, Sign::Plus, &g).unwrap();
    let amp = FnAmplitude::new("axial", Symmetry::None, move |p: &MomentumPoint, _m: Mass| inner.eval(Sign::Plus, p));
    let s = PhysState::single(m1(), Sign::Plus, Arc::new(amp));
    let t = PositionTruncation { lambda_max: 4.0, n_lambda: 16, m_z_window: [-2, 2] };
    let proj = PositionProjector::new(&s, &g, t).unwrap();
    assert_eq!(proj.m_z_values(), &[-2, -1, 0, 1, 2]);
    let ov = proj.overlaps(0.7, 0.3);
    let scale = ov[2].iter().map(|c| c.norm()).fold(0.0, f64::max);
    for (mz, row) in proj.m_z_values().iter().zip(&ov) {
        if *mz != 0 {
            assert!(row.iter().all(|c| c.norm() < 1e-12 * scale), "m_z = {mz}");
        }
    }
}

#[test]
fn interval_probabilities() {
    let g = hyp();
    let s = gaussian_packet([0.0; 3], 0.4, Sign::Plus, &g).unwrap();
    let z = linspace(-40.0, 40.0, 801);
    let p = PositionProjector::new(&s, &g, PositionTruncation::default()).unwrap().density(0.0, &z).unwrap();
    let full = interval_probability(&p, -40.0, 40.0).unwrap();
    assert!((full - p.total_mass.min(1.0)).abs() < 1e-12);
    assert_eq!(interval_probability(&p, 1.0, 1.0).unwrap(), 0.0);
    assert!((interval_probability(&p, 0.0, 40.0).unwrap() - 0.5).abs() < 0.01);
    assert!(interval_probability(&p, 2.0, 1.0).is_err());
    assert!(interval_probability(&p, -50.0, 0.0).is_err());
}

#[test]
fn longitudinal_overlap_values() {
    assert!((position_overlap(0.0, 1.0, 1.0, 0, 0.0).unwrap() - 2.0 / PI).norm() < 1e-10);
    assert!((position_overlap(2.5, 2.5, 1.0, 0, 3.0).unwrap() - 1.0).norm() < 1e-10);
}

#[test]
fn identical_windows_give_half() {
    for sign in Sign::BOTH {
        let w = TimeWindow::new(1.0, 0.7).unwrap();
        let o = time_overlap_smeared(&w, &w, sign).unwrap();
        assert!((o.direct.re - 0.5).abs() < 1e-4 && (o.fourier.re - 0.5).abs() < 1e-4);
        assert!(o.direct.im.abs() < 1e-4 && o.fourier.im.abs() < 1e-10);
    }
}

#[test]
fn completeness_improves_with_truncation() {
    let g = hyp();
    let s = gaussian_packet([0.2, 0.0, 0.3], 0.4, Sign::Plus, &g).unwrap();
    let res: Vec<f64> = [(2.0, 12, 0), (4.0, 24, 1), (8.0, 48, 4)]
        .iter()
        .map(|&(lm, n, w)| {
            let t = PositionTruncation { lambda_max: lm, n_lambda: n, m_z_window: [-w, w] };
            completeness_residual(&s, CompletenessTruncation::Position(t), &g).unwrap()
        })
        .collect();
    assert!(res[1] < res[0] && res[2] < res[1], "{res:?}");
    let matched = element_matched(0.0, &g);
    let r =
        completeness_residual(&matched, CompletenessTruncation::Position(PositionTruncation::default()), &g).unwrap();
    assert!(r < 1e-3, "residual {r:.2e}");
}

#[test]
fn element_evaluators_match_their_formulas() {
    let m = Mass::new(2.0).unwrap();
    let mv: f64 = 2.0;
    for sign in Sign::BOTH {
        let xi = sign.factor();
        let e = PovmElementSpec::time(0.8, 2, -1, sign, 0.3).unwrap();
        for (r, th, ph) in [(0.5, 0.4, 1.0), (3.0, 2.0, 5.5)] {
            let en = (r * r + mv * mv).sqrt();
            let y = spherical_harmonic(2, -1, th, ph).unwrap();
            let direct = y
                * (mv / (2.0 * PI)).sqrt()
                * r.powf(-1.5)
                * Complex64::from_polar(1.0, mv * 0.3 * (r / mv).ln())
                * Complex64::from_polar(1.0, -xi * mv * 0.8 * (r / (en + mv)).ln());
            let got = e.evaluate(&MomentumPoint::spherical(r, th, ph).unwrap(), m);
            assert!((got - direct).norm() < 1e-12 * direct.norm());
        }
        let e = PovmElementSpec::position(-1.2, 0.9, 1, sign, 0.5).unwrap();
        for (w, nu, ph) in [(0.3, 0.2, 1.0), (1.5, -1.1, 4.0)] {
            let sec: f64 = 1.0 / f64::cos(nu);
            let gamma = (PI / (PI * 0.9f64).cosh()).sqrt() * 0.5f64.hypot(0.9);
            let pref = (PI * 0.9f64).sinh().sqrt() * gamma / (2.0 * (mv * PI).powf(1.5));
            let conical = conical_p(&ConicalArgs::at_rapidity(1, 0.9, w).unwrap()).unwrap();
            let direct = Complex64::from_polar(
                pref * sec.powf(-1.5) * conical,
                mv * 0.5 * sec.ln() - xi * mv * (-1.2) * nu + ph,
            );
            let got = e.evaluate(&MomentumPoint::hyperbolic(w, nu, ph).unwrap(), m);
            assert!((got - direct).norm() < 1e-12 * direct.norm(), "{got} vs {direct}");
        }
    }
    assert!(PovmElementSpec::time(0.0, 1, 2, Sign::Plus, 0.0).is_err());
    assert!(PovmElementSpec::position(0.0, -1.0, 0, Sign::Plus, 0.0).is_err());
}

proptest! {
    #[test]
    fn element_moduli_ignore_t_and_tau(r in 0.05..20.0f64, t in -50.0..50.0f64, tau in -50.0..50.0f64,
                                       z in -50.0..50.0f64, nu in -1.5..1.5f64) {
        let m = m1();
        let p = MomentumPoint::spherical(r, 1.0, 2.0).unwrap();
        let a = PovmElementSpec::time(t, 1, 1, Sign::Plus, tau).unwrap().evaluate(&p, m).norm();
        let b = PovmElementSpec::time(0.0, 1, 1, Sign::Plus, 0.0).unwrap().evaluate(&p, m).norm();
        prop_assert!((a - b).abs() <= 1e-12 * b);
        let q = MomentumPoint::hyperbolic(0.7, nu, 1.0).unwrap();
        let c = PovmElementSpec::position(z, 1.3, 0, Sign::Minus, tau).unwrap().evaluate(&q, m).norm();
        let d = PovmElementSpec::position(0.0, 1.3, 0, Sign::Minus, 0.0).unwrap().evaluate(&q, m).norm();
        prop_assert!((c - d).abs() <= 1e-12 * d);
    }

    #[test]
    fn longitudinal_overlap_is_sinc(z1 in -10.0..10.0f64, dz in 0.0..8.0f64, tau in -5.0..5.0f64) {
        let got = position_overlap(z1, z1 + dz, 1.0, 0, tau).unwrap();
        prop_assert!((got - Complex64::new(sin_over(0.5 * PI * dz), 0.0)).norm() < 1e-8);
    }
}
