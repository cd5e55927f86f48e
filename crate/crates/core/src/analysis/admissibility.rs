//! Domain checks excluding strictly localized and exponentially bounded
//! states: band limit, endpoint zeros, boundary decay, square-integrability
//! and smoothness of the longitudinal profile F_Ω.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kinematics::{ChartKind, Mass, MomentumPoint, QuadratureGrid};
use crate::quadrature::{gauss_legendre, trapezoid_weights};
use crate::states::{fourier_samples, PhysState, PositionAmplitude};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Fail dominates Indeterminate, which dominates Pass.
    fn worst(self, other: Self) -> Self {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Indeterminate, _) | (_, Indeterminate) => Indeterminate,
            _ => Pass,
        }
    }
}

/// Numerical conventions of the checks. None of these constants is fixed by
/// the theory; each makes an order-of-growth statement decidable on samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdmissibilityThresholds {
    /// Largest fraction of ∫|F_Ω|² allowed outside k ∈ [−1/2, 1/2].
    pub band_leak: f64,
    /// Largest |F_Ω(±1/2)| / max|F_Ω|.
    pub endpoint: f64,
    /// The ν-profile |φ|(sec ν)^{3/2} must fall at least like (sec ν)^{−margin}.
    pub decay_margin: f64,
    /// Profile values below this fraction of the maximum count as zero.
    pub noise_floor: f64,
    /// Largest relative change of the second difference under step halving.
    pub smoothness: f64,
}

impl Default for AdmissibilityThresholds {
    fn default() -> Self {
        Self { band_leak: 1e-6, endpoint: 1e-6, decay_margin: 0.1, noise_floor: 1e-7, smoothness: 0.1 }
    }
}

/// Per-check verdicts, in the order they are evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    /// (a) F_Ω supported in [−1/2, 1/2].
    pub band_limit: Verdict,
    pub band_leak: f64,
    /// (b) F_Ω(±1/2) = 0.
    pub endpoint_zeros: Verdict,
    pub endpoint_ratio: f64,
    /// (c) ν-profile decays strictly faster than (sec ν)^{−3/2}.
    pub boundary_decay: Verdict,
    /// (d) finite, non-zero norm.
    pub square_integrable: Verdict,
    pub norm_sq: f64,
    /// (e) F_Ω free of kinks on the open band.
    pub smoothness: Verdict,
    /// Fitted local powers p in |φ|(sec ν)^{3/2} ∝ (sec ν)^{−p}, one per
    /// (transverse point, boundary) pair that was not below the noise floor.
    pub tail_exponents: Vec<f64>,
    pub thresholds: AdmissibilityThresholds,
    pub admissible: bool,
    pub notes: Vec<String>,
}

/// What to check: a state on the hyperbolic chart, or a sampled position
/// amplitude Ω(z).
#[derive(Debug, Clone, Copy)]
pub enum Candidate<'a> {
    State { state: &'a PhysState, grid: &'a QuadratureGrid },
    Amplitude { amplitude: &'a PositionAmplitude, mass: Mass },
}

pub fn admissibility_check(candidate: Candidate<'_>) -> Result<AdmissibilityReport> {
    admissibility_check_with(candidate, AdmissibilityThresholds::default())
}

pub fn admissibility_check_with(candidate: Candidate<'_>, th: AdmissibilityThresholds) -> Result<AdmissibilityReport> {
    match candidate {
        Candidate::State { state, grid } => check_state(state, grid, th),
        Candidate::Amplitude { amplitude, mass } => check_amplitude(amplitude, mass, th),
    }
}

/// Boundary distances δ = π/2 − |ν| at which the decay is fitted.
fn boundary_offsets() -> Vec<f64> {
    (0..=30).map(|k| 0.3 * 10f64.powf(-(k as f64) / 6.0)).collect()
}

/// Distance from the boundary at which the endpoint value is read off.
const ENDPOINT_OFFSET: f64 = 1e-9;

/// Least-squares slope of y against x.
pub(crate) fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum DecayFit {
    /// The profile drops below the noise floor within four samples.
    Vanishing,
    Power(f64),
    TooFewPoints,
}

/// Fits g(δ) ∝ (sec ν)^{−p} on the samples nearest the boundary, scanning
/// inward from δ = 0.3 until the profile first drops below the floor.
fn fit_decay(g: impl Fn(f64) -> f64, floor: f64) -> DecayFit {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    let mut dropped = false;
    for d in boundary_offsets() {
        let v = g(d);
        if !v.is_finite() {
            return DecayFit::TooFewPoints;
        }
        if v <= floor {
            dropped = true;
            break;
        }
        // ln sec ν = −ln sin δ.
        x.push(-d.sin().ln());
        y.push(v.ln());
    }
    if x.len() < 4 {
        return if dropped { DecayFit::Vanishing } else { DecayFit::TooFewPoints };
    }
    let keep = x.len().min(8);
    let (x, y) = (&x[x.len() - keep..], &y[y.len() - keep..]);
    DecayFit::Power(-slope(x, y))
}

/// Relative change of max|Δ²f|/h² under step halving on k ∈ [−0.45, 0.45].
fn kink_indicator(f: impl Fn(f64) -> Complex64) -> f64 {
    let curvature = |n: usize| {
        let h = 0.9 / n as f64;
        let v: Vec<Complex64> = (0..=n).map(|j| f(-0.45 + h * j as f64)).collect();
        v.windows(3).map(|w| (w[0] - 2.0 * w[1] + w[2]).norm() / (h * h)).fold(0.0, f64::max)
    };
    let (c1, c2) = (curvature(64), curvature(128));
    let scale = c1.max(c2);
    if scale == 0.0 {
        0.0
    } else {
        (c1 - c2).abs() / scale
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    band: (Verdict, f64),
    endpoint: (Verdict, f64),
    decay: Verdict,
    norm: (Verdict, f64),
    smooth: Verdict,
    tail_exponents: Vec<f64>,
    th: AdmissibilityThresholds,
    notes: Vec<String>,
) -> AdmissibilityReport {
    let admissible = [band.0, endpoint.0, decay, norm.0, smooth].iter().all(|v| *v == Verdict::Pass);
    AdmissibilityReport {
        band_limit: band.0,
        band_leak: band.1,
        endpoint_zeros: endpoint.0,
        endpoint_ratio: endpoint.1,
        boundary_decay: decay,
        square_integrable: norm.0,
        norm_sq: norm.1,
        smoothness: smooth,
        tail_exponents,
        thresholds: th,
        admissible,
        notes,
    }
}

fn decay_verdict(fit: DecayFit, margin: f64, exponents: &mut Vec<f64>) -> Verdict {
    match fit {
        DecayFit::Vanishing => Verdict::Pass,
        DecayFit::TooFewPoints => Verdict::Indeterminate,
        DecayFit::Power(p) => {
            exponents.push(p);
            Verdict::from_bool(p >= margin)
        }
    }
}

fn check_state(state: &PhysState, grid: &QuadratureGrid, th: AdmissibilityThresholds) -> Result<AdmissibilityReport> {
    if grid.chart() != ChartKind::Hyperbolic {
        return Err(Error::ChartMismatch { expected: "hyperbolic".into(), found: grid.chart().to_string() });
    }
    if !state.is_evaluable() {
        return Err(Error::NotEvaluable);
    }
    let mut notes = vec!["band limit is structural for states on the hyperbolic chart".to_string()];
    let norm_sq = state.norm_sq(grid)?;
    let norm = (Verdict::from_bool(norm_sq.is_finite() && norm_sq > 0.0), norm_sq);

    // ν-profiles g = |φ|(sec ν)^{3/2} at a spread of transverse points.
    let profile = |s, omega: f64, phi: f64, nu: f64| -> Complex64 {
        let p = MomentumPoint::Hyperbolic { omega, nu, phi };
        state.eval(s, &p) * nu.cos().powf(-1.5)
    };
    let (nu_nodes, _) = gauss_legendre(96, -FRAC_PI_2, FRAC_PI_2);
    let mut lines = Vec::new();
    for s in state.signs() {
        for &omega in &[0.1, 0.5, 1.0, 2.0] {
            for &phi in &[0.0, FRAC_PI_2, PI] {
                let peak = nu_nodes.iter().map(|&nu| profile(s, omega, phi, nu).norm()).fold(0.0, f64::max);
                lines.push((s, omega, phi, peak));
            }
        }
    }
    let global = lines.iter().map(|l| l.3).fold(0.0, f64::max);
    if !(global > 0.0 && global.is_finite()) {
        return Ok(finish(
            (Verdict::Pass, 0.0),
            (Verdict::Indeterminate, f64::NAN),
            Verdict::Indeterminate,
            norm,
            Verdict::Indeterminate,
            Vec::new(),
            th,
            vec!["ν-profile vanishes or is not finite at every probed transverse point".into()],
        ));
    }
    let (mut endpoint, mut decay, mut smooth) = (Verdict::Pass, Verdict::Pass, Verdict::Pass);
    let mut ratio: f64 = 0.0;
    let mut exponents = Vec::new();
    for &(s, omega, phi, peak) in &lines {
        if peak < th.noise_floor * global {
            continue;
        }
        for side in [-1.0, 1.0] {
            let at = |d: f64| profile(s, omega, phi, side * (FRAC_PI_2 - d)).norm();
            let r = at(ENDPOINT_OFFSET) / peak;
            ratio = ratio.max(r);
            endpoint = endpoint.worst(Verdict::from_bool(r < th.endpoint));
            let fit = fit_decay(at, th.noise_floor * peak);
            decay = decay.worst(decay_verdict(fit, th.decay_margin, &mut exponents));
        }
        let kink = kink_indicator(|k| profile(s, omega, phi, PI * k) / peak);
        smooth = smooth.worst(Verdict::from_bool(kink.is_finite() && kink < th.smoothness));
    }
    if decay == Verdict::Indeterminate {
        notes.push("too few near-boundary samples above the noise floor for a decay fit".into());
    }
    Ok(finish((Verdict::Pass, 0.0), (endpoint, ratio), decay, norm, smooth, exponents, th, notes))
}

fn check_amplitude(pa: &PositionAmplitude, m: Mass, th: AdmissibilityThresholds) -> Result<AdmissibilityReport> {
    match pa.validate() {
        Ok(()) => {}
        Err(Error::ZeroNorm) => {
            return Ok(finish(
                (Verdict::Indeterminate, f64::NAN),
                (Verdict::Indeterminate, f64::NAN),
                Verdict::Indeterminate,
                (Verdict::Fail, 0.0),
                Verdict::Indeterminate,
                Vec::new(),
                th,
                vec!["Ω vanishes identically".into()],
            ))
        }
        Err(e) => return Err(e),
    }
    let zw = trapezoid_weights(&pa.z)?;
    let f = |k: f64| fourier_samples(&pa.z, &zw, &pa.omega, k, m);
    let norm_sq = pa.norm_sq();
    let norm = (Verdict::from_bool(norm_sq.is_finite() && norm_sq > 0.0), norm_sq);

    // (a) ∫_{−1/2}^{1/2} |F|² against the Parseval total mπ ∫|Ω|².
    let dz_max = pa.z.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if dz_max * m.value() >= 2.0 {
        return Err(invalid(format!("z-step {dz_max} aliases the band |k| ≤ 1/2; need Δz < 2/m")));
    }
    let span = pa.z[pa.z.len() - 1] - pa.z[0];
    let panels = (span * m.value() / 2.0).ceil().max(8.0) as usize;
    let (mut inband, mut peak) = (0.0, 0.0_f64);
    for p in 0..panels {
        let a = -0.5 + p as f64 / panels as f64;
        let (k, w) = gauss_legendre(16, a, a + 1.0 / panels as f64);
        for (k, w) in k.iter().zip(&w) {
            let v = f(*k).norm();
            inband += w * v * v;
            peak = peak.max(v);
        }
    }
    let total = m.value() * PI * norm_sq;
    let leak = (1.0 - inband / total).max(0.0);
    let band = (Verdict::from_bool(leak < th.band_leak), leak);

    // (b) literal endpoint values.
    let ratio = f(-0.5).norm().max(f(0.5).norm()) / peak;
    let endpoint = (Verdict::from_bool(ratio < th.endpoint), ratio);

    // (c) the ν-profile is |F_Ω(ξν/π)|; its boundary is k → ±1/2.
    let mut exponents = Vec::new();
    let mut decay = Verdict::Pass;
    for side in [-1.0, 1.0] {
        let g = |d: f64| f(side * (FRAC_PI_2 - d) / PI).norm();
        decay = decay.worst(decay_verdict(fit_decay(g, th.noise_floor * peak), th.decay_margin, &mut exponents));
    }
    let mut notes = Vec::new();
    if decay == Verdict::Indeterminate {
        notes.push("too few near-boundary samples above the noise floor for a decay fit".into());
    }

    // (e)
    let kink = kink_indicator(|k| f(k) / peak);
    let smooth = Verdict::from_bool(kink.is_finite() && kink < th.smoothness);
    Ok(finish(band, endpoint, decay, norm, smooth, exponents, th, notes))
}
