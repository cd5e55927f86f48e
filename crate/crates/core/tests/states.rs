mod common;

use std::f64::consts::PI;

use common::simpson;
use num_complex::Complex64;
use propertime::kinematics::{build_grid, inner_product, GridSpec, Mass, QuadratureGrid};
use propertime::states::{
    gaussian_packet, normalize, state_from_position_amplitude, PhysState, PositionAmplitude, Sign, StateFile,
};
use proptest::prelude::*;

fn m1() -> Mass {
    Mass::new(1.0).unwrap()
}

fn sph() -> QuadratureGrid {
    build_grid(GridSpec::spherical(64, 24, 16, 8.0), m1()).unwrap()
}

/// ⟨f(π)⟩ summed here over the grid nodes.
fn moment(state: &PhysState, grid: &QuadratureGrid, f: impl Fn([f64; 3]) -> f64) -> f64 {
    let v = state.values_on(grid).unwrap();
    let mut acc = 0.0;
    for (i, p) in grid.points().iter().enumerate() {
        let w = grid.weights()[i] * v.iter().filter_map(|c| c.get(i)).map(|x| x.norm_sqr()).sum::<f64>();
        acc += w * f(p.to_cartesian(grid.mass()));
    }
    acc
}

#[test]
fn packets_are_normalized() {
    let g = sph();
    for (c, w) in [([0.0, 0.0, 0.0], 0.4), ([0.2, -0.1, 0.6], 0.3)] {
        let s = gaussian_packet(c, w, Sign::Plus, &g).unwrap();
        assert!(s.is_normalized());
        assert!((moment(&s, &g, |_| 1.0) - 1.0).abs() < 1e-8);
    }
}

#[test]
fn narrow_packet_momentum() {
    let g = build_grid(GridSpec::spherical(96, 48, 8, 4.0), m1()).unwrap();
    let s = gaussian_packet([0.0, 0.0, 1.5], 0.08, Sign::Plus, &g).unwrap();
    let pz = moment(&s, &g, |p| p[2]);
    assert!((pz - 1.5).abs() < 0.015, "⟨π³⟩ = {pz}");
}

#[test]
fn centred_packet_has_no_momentum() {
    let g = sph();
    let s = gaussian_packet([0.0; 3], 0.5, Sign::Minus, &g).unwrap();
    for j in 0..3 {
        assert!(moment(&s, &g, |p| p[j]).abs() < 1e-12, "component {j}");
    }
}

#[test]
fn zero_profile_is_rejected() {
    let z: Vec<f64> = (0..11).map(|i| i as f64 - 5.0).collect();
    let zero = vec![Complex64::new(0.0, 0.0); 11];
    assert!(PositionAmplitude::new(z, zero, vec![0.5, 1.0], vec![Complex64::new(1.0, 0.0); 2]).is_err());
}

#[test]
fn broad_profile_concentrates_at_small_k() {
    let m = m1();
    let s = 10.0;
    let z: Vec<f64> = (0..=2000).map(|i| -100.0 + 0.1 * i as f64).collect();
    let omega = z.iter().map(|z| Complex64::new((-z * z / (2.0 * s * s)).exp(), 0.0)).collect();
    let lambda: Vec<f64> = (1..=20).map(|i| 0.2 * i as f64).collect();
    let alpha = lambda.iter().map(|l| Complex64::new((-l * l).exp(), 0.0)).collect();
    let pa = PositionAmplitude::new(z, omega, lambda, alpha).unwrap();
    // Gaussian transform with the kernel (2π)^{−1/2} mπ e^{−iπmkz}.
    for k in [0.0, 0.01, 0.03, 0.1] {
        let oracle = PI * s * (-(PI * k * s).powi(2) / 2.0).exp();
        assert!((pa.fourier(k, m).re - oracle).abs() < 1e-10 * PI * s, "k = {k}");
    }
    let g = build_grid(GridSpec::hyperbolic(32, 128, 4, 5.0), m).unwrap();
    let state = state_from_position_amplitude(&pa, Sign::Plus, 0.0, &g).unwrap();
    let v = state.values_on(&g).unwrap();
    let (mut nu2, mut total) = (0.0, 0.0);
    for (i, p) in g.points().iter().enumerate() {
        let w = g.weights()[i] * v[0][i].norm_sqr();
        nu2 += w * p.hyperbolic_coords(m).1.powi(2);
        total += w;
    }
    assert!((total - 1.0).abs() < 1e-8);
    assert!(nu2.sqrt() < 0.2, "rms ν = {}", nu2.sqrt());
}

#[test]
fn band_limited_profile_reproduces_itself() {
    let m = m1();
    let z: Vec<f64> = (0..=8000).map(|i| -400.0 + 0.1 * i as f64).collect();
    // sinc⁴(πz/8) has transform support |k| ≤ 1/2.
    let f = |z: f64| {
        let x = PI * z / 8.0;
        if x == 0.0 {
            1.0
        } else {
            (x.sin() / x).powi(4)
        }
    };
    let omega = z.iter().map(|&z| Complex64::new(f(z), 0.0)).collect();
    let pa = PositionAmplitude::new(z, omega, vec![0.5, 1.0], vec![Complex64::new(1.0, 0.0); 2]).unwrap();
    for zp in [0.0, 1.3, -4.0, 7.5] {
        let got = pa.p0(zp, m);
        assert!((got.re - 2f64.sqrt() * f(zp)).abs() < 1e-6 && got.im.abs() < 1e-12, "z′ = {zp}: {got}");
    }
    let oracle = 2.0 * simpson(0.0, 400.0, 40_000, |z| f(z).powi(2));
    assert!((pa.norm_sq() - oracle).abs() < 1e-8);
}

#[test]
fn normalize_undoes_scaling() {
    let g = sph();
    let s = gaussian_packet([0.1, 0.0, 0.2], 0.4, Sign::Plus, &g).unwrap();
    let probe = gaussian_packet([0.0, 0.2, 0.0], 0.6, Sign::Plus, &g).unwrap();
    let base = inner_product(&probe, &s, &g).unwrap();
    let big = s.scaled(3.0);
    assert!((inner_product(&probe, &big, &g).unwrap() - 3.0 * base).norm() < 1e-12);
    let back = normalize(&big, &g).unwrap();
    assert!((back.norm_sq(&g).unwrap() - 1.0).abs() < 1e-10);
    assert!((inner_product(&probe, &back, &g).unwrap() - base).norm() < 1e-12);
    let again = normalize(&s, &g).unwrap();
    assert!((again.scale() - s.scale()).abs() < 1e-14 * s.scale());
}

#[test]
fn state_file_round_trip() {
    let g = build_grid(GridSpec::spherical(16, 8, 8, 6.0), m1()).unwrap();
    let s = gaussian_packet([0.0, 0.1, 0.3], 0.4, Sign::Minus, &g).unwrap();
    let file = StateFile::from_state(&s, &g).unwrap();
    let text = serde_json::to_string(&file).unwrap();
    let (back, g2) = serde_json::from_str::<StateFile>(&text).unwrap().into_state().unwrap();
    assert_eq!(g2.spec(), g.spec());
    let (a, b) = (s.values_on(&g).unwrap(), back.values_on(&g2).unwrap());
    assert!(b[0].iter().all(|v| v.norm() == 0.0) || b[0].is_empty());
    for (x, y) in a[1].iter().zip(&b[1]) {
        assert!((x - y).norm() <= 1e-15 * x.norm().max(1e-300));
    }
    let mut bad = StateFile::from_state(&s.scaled(2.0), &g).unwrap();
    assert!(bad.clone().into_state().is_err());
    bad.minus = None;
    assert!(bad.into_state().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn any_packet_normalizes(cx in -0.5..0.5f64, cz in -0.8..0.8f64, w in 0.3..0.8f64, minus in any::<bool>()) {
        let g = build_grid(GridSpec::spherical(48, 16, 8, 8.0), m1()).unwrap();
        let sign = if minus { Sign::Minus } else { Sign::Plus };
        let s = gaussian_packet([cx, 0.0, cz], w, sign, &g).unwrap();
        prop_assert!((s.norm_sq(&g).unwrap() - 1.0).abs() < 1e-12);
        prop_assert_eq!(s.single_sign(), Some(sign));
        prop_assert!(s.project(sign.flip()).is_err());
    }
}
