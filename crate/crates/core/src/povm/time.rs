//! Time POVM: p(t) = Σ_{l,m_z} |⟨ψ^{t,l,m_z}_{τ;ξ}|φ⟩|².
//!
//! With u = ln(r/(E+m)) the radial measure is m r²/E dr = r³ du and the time
//! elements are plane waves e^{∓imtu} on u < 0, so p(t) is the squared
//! half-line Fourier transform of the radial content.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::element::PovmElementSpec;
use super::profile::{DensityProfile, ProfileAxis, ProfileTruncation};
use crate::error::{invalid, Error, Result};
use crate::kinematics::{radius_from_time_log, time_log_from_radius, ChartKind, Mass, QuadratureGrid};
use crate::quadrature::{gauss_legendre, integrate_adaptive, trapezoid_weights};
use crate::specfun::legendre_table;
use crate::states::{PhysState, Sign, Symmetry};

/// Radial projections of a state onto spherical harmonics, reusable across
/// τ and t.
#[derive(Debug, Clone)]
pub struct TimeProjector {
    mass: Mass,
    sign: Sign,
    l_max: u32,
    labels: Vec<(u32, i32)>,
    r: Vec<f64>,
    u: Vec<f64>,
    /// c_{lm}(r_i) including the radial quadrature weight.
    coeffs: Vec<Vec<Complex64>>,
    /// Radial weight R_i with Σ_angles W = 4π R_i.
    radial_weight: Vec<f64>,
    momentum_reach: f64,
    warnings: Vec<String>,
}

fn sign_of(state: &PhysState) -> Result<Sign> {
    state.single_sign().ok_or_else(|| invalid("POVM densities need a single-sign state; project onto one sign first"))
}

impl TimeProjector {
    pub fn new(state: &PhysState, grid: &QuadratureGrid, l_max: u32) -> Result<Self> {
        if grid.chart() != ChartKind::Spherical {
            return Err(Error::ChartMismatch { expected: "spherical".into(), found: grid.chart().to_string() });
        }
        let sign = sign_of(state)?;
        let m = grid.mass();
        let values = std::mem::take(&mut state.values_on(grid)?[sign.index()]);
        let [ar, at, ap] = grid.axes();
        let (n_r, n_t, n_p) = (ar.len(), at.len(), ap.len());

        let labels: Vec<(u32, i32)> = match state.symmetry() {
            Symmetry::Spherical => vec![(0, 0)],
            Symmetry::Axial => (0..=l_max).map(|l| (l, 0)).collect(),
            Symmetry::None => (0..=l_max).flat_map(|l| (-(l as i32)..=l as i32).map(move |mz| (l, mz))).collect(),
        };
        let mut warnings = Vec::new();
        if l_max as usize >= n_t || 2 * l_max as usize >= n_p {
            warnings.push(format!("angular grid {n_t}×{n_p} cannot resolve l_max = {l_max}"));
        }

        // conj(Y_lm) at every angular node.
        let tables: Vec<Vec<Vec<f64>>> = at.nodes.iter().map(|&th| legendre_table(l_max as usize, th.cos())).collect();
        let conj_y = |(l, mz): (u32, i32), j: usize, k: usize| -> Complex64 {
            let am = mz.unsigned_abs() as usize;
            let mut v = tables[j][l as usize][am];
            if mz < 0 && am % 2 == 1 {
                v = -v;
            }
            Complex64::from_polar(v, -(mz as f64) * ap.nodes[k])
        };

        let radial_weight: Vec<f64> = (0..n_r)
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..n_t {
                    for k in 0..n_p {
                        acc += grid.weights()[grid.index(i, j, k)];
                    }
                }
                acc / (4.0 * PI)
            })
            .collect();

        let coeffs: Vec<Vec<Complex64>> = labels
            .par_iter()
            .map(|&lm| {
                (0..n_r)
                    .map(|i| {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for j in 0..n_t {
                            for k in 0..n_p {
                                let idx = grid.index(i, j, k);
                                acc += grid.weights()[idx] * conj_y(lm, j, k) * values[idx];
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();

        let r = ar.nodes.clone();
        let u = r.iter().map(|&r| time_log_from_radius(r, m)).collect();
        Ok(Self {
            mass: m,
            sign,
            l_max,
            labels,
            r,
            u,
            coeffs,
            radial_weight,
            momentum_reach: grid.truncation().momentum_reach / m.value(),
            warnings,
        })
    }

    /// Σ_{lm} ∫|c_lm|² r³ du: the limit of ∫p(t)dt over the whole t-axis.
    pub fn spectral_mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.iter().zip(&self.radial_weight).map(|(c, w)| c.norm_sqr() / w).sum::<f64>()).sum()
    }

    /// Contribution of each l to the spectral mass.
    pub fn mass_by_l(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.l_max as usize + 1];
        for (&(l, _), c) in self.labels.iter().zip(&self.coeffs) {
            out[l as usize] += c.iter().zip(&self.radial_weight).map(|(c, w)| c.norm_sqr() / w).sum::<f64>();
        }
        out
    }

    /// Largest u-gap between radial nodes where the state has content.
    pub fn max_log_gap(&self) -> f64 {
        let content: Vec<f64> = (0..self.r.len())
            .map(|i| self.coeffs.iter().map(|c| c[i].norm_sqr()).sum::<f64>() / self.radial_weight[i])
            .collect();
        let peak = content.iter().cloned().fold(0.0, f64::max);
        let floor = 1e-14 * peak;
        self.u
            .windows(2)
            .zip(content.windows(2))
            .filter(|(_, c)| c[0] > floor || c[1] > floor)
            .map(|(u, _)| u[1] - u[0])
            .fold(0.0, f64::max)
    }

    /// p(t) at t (units 1/m) and τ (units 1/m), per unit 1/m.
    fn density_at(&self, a: &[Vec<Complex64>], t: f64) -> f64 {
        let xi = self.sign.factor();
        let phases: Vec<Complex64> = self.u.iter().map(|&u| Complex64::from_polar(1.0, xi * t * u)).collect();
        let mut p = 0.0;
        for al in a {
            let amp: Complex64 = al.iter().zip(&phases).map(|(a, e)| a * e).sum();
            p += amp.norm_sqr();
        }
        p / self.mass.value()
    }

    /// c_lm(r_i) times the conjugated radial element at τ, without the t phase.
    fn tau_weighted(&self, tau: f64) -> Vec<Vec<Complex64>> {
        let mv = self.mass.value();
        let radial: Vec<Complex64> = self
            .r
            .iter()
            .map(|&r| Complex64::from_polar((mv / (2.0 * PI)).sqrt() * r.powf(-1.5), -tau * (r / mv).ln()))
            .collect();
        self.coeffs.iter().map(|c| c.iter().zip(&radial).map(|(c, e)| c * e).collect()).collect()
    }

    /// p(t) on `t_grid` (ascending, units 1/m) at proper time τ (units 1/m).
    pub fn density(&self, tau: f64, t_grid: &[f64]) -> Result<DensityProfile> {
        trapezoid_weights(t_grid)?;
        if !tau.is_finite() {
            return Err(invalid("τ must be finite"));
        }
        let t_max = t_grid.iter().fold(0.0f64, |a, t| a.max(t.abs()));
        let gap = self.max_log_gap();
        if t_max * gap >= 0.5 * PI {
            return Err(Error::UnderResolved {
                what: "time-element phase".into(),
                detail: format!("|t|·Δu = {t_max}·{gap:.4} ≥ π/2; refine the radial grid in ln(r/(E+m))"),
            });
        }
        let a = self.tau_weighted(tau);
        let raw: Vec<f64> = t_grid.par_iter().map(|&t| self.density_at(&a, t)).collect();
        let trunc = ProfileTruncation {
            l_max: Some(self.l_max),
            lambda_max: None,
            n_lambda: None,
            m_z_window: [-(self.l_max as i32), self.l_max as i32],
            momentum_reach: self.momentum_reach,
        };
        let mut profile = DensityProfile::assemble(
            ProfileAxis::T,
            self.mass.value(),
            tau,
            self.sign,
            trunc,
            t_grid.to_vec(),
            raw,
            self.spectral_mass(),
        )?;
        profile.warnings.extend(self.warnings.iter().cloned());
        Ok(profile)
    }
}

/// p(t) on `t_grid` for a single-sign state (units 1/m throughout).
pub fn time_density(
    state: &PhysState,
    tau: f64,
    t_grid: &[f64],
    l_max: u32,
    grid: &QuadratureGrid,
) -> Result<DensityProfile> {
    TimeProjector::new(state, grid, l_max)?.density(tau, t_grid)
}

/// An L²-normalized Gaussian window (2πs²)^{−1/4} exp(−(t−c)²/4s²) on the
/// t-axis, in units of 1/m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub center: f64,
    pub width: f64,
}

impl TimeWindow {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) || !center.is_finite() {
            return Err(invalid(format!("window needs finite centre and positive width, got ({center}, {width})")));
        }
        Ok(Self { center, width })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let s = self.width;
        (2.0 * PI * s * s).powf(-0.25) * (-(t - self.center).powi(2) / (4.0 * s * s)).exp()
    }

    /// ŵ(k) = ∫ w(t) e^{−ikt} dt = (8πs²)^{1/4} e^{−s²k²} e^{−ikc}.
    pub fn fourier(&self, k: f64) -> Complex64 {
        let s = self.width;
        Complex64::from_polar((8.0 * PI * s * s).powf(0.25) * (-(s * k).powi(2)).exp(), -k * self.center)
    }
}

/// The doubly smeared time kernel by two independent routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmearedOverlap {
    /// Radial quadrature of the window-smeared time elements.
    pub direct: Complex64,
    /// Half-line integral (1/2π) ∫ conj(ŵ_a) ŵ_b over the spectral side of ξ.
    pub fourier: Complex64,
}

impl SmearedOverlap {
    pub fn discrepancy(&self) -> f64 {
        (self.direct - self.fourier).norm()
    }
}

/// ∬ w_a(t) w_b(t′) ⟨ψ^t_{τ;ξ}|ψ^{t′}_{τ;ξ}⟩ dt dt′ (equal l, m_z), in units
/// where t is measured in 1/m.
pub fn time_overlap_smeared(a: &TimeWindow, b: &TimeWindow, sign: Sign) -> Result<SmearedOverlap> {
    TimeWindow::new(a.center, a.width)?;
    TimeWindow::new(b.center, b.width)?;
    let xi = sign.factor();
    let s_min = a.width.min(b.width);
    let s_max = a.width.max(b.width);
    let dc = (a.center - b.center).abs();

    // Route (ii): (1/2π) ∫_{−∞}^0 conj(ŵ_a(ξk)) ŵ_b(ξk) dk, cut where e^{−s²k²}
    // is below 1e−17.
    let k_cut = 6.3 / s_min;
    let re = integrate_adaptive(-k_cut, 0.0, 1e-14, 1 << 14, |k| (a.fourier(xi * k).conj() * b.fourier(xi * k)).re).0;
    let im = integrate_adaptive(-k_cut, 0.0, 1e-14, 1 << 14, |k| (a.fourier(xi * k).conj() * b.fourier(xi * k)).im).0;
    let fourier = Complex64::new(re, im) / (2.0 * PI);

    // Route (i): the window-smeared radial elements ∫ w(t) ψ^t(r) dt by
    // Gauss–Legendre in t, paired under m r²/E dr = r³ du on u ∈ (−u_cut, 0)
    // (m = 1, so t is in units of 1/m).
    let m = Mass::default();
    let smear = |w: &TimeWindow, r: f64, u: f64| -> Result<Complex64> {
        let half = 9.0 * w.width;
        let panels = 1 + (half * u.abs() / 4.0).ceil() as usize;
        let h = 2.0 * half / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let lo = w.center - half + h * p as f64;
            let (t, wt) = gauss_legendre(32, lo, lo + h);
            for (t, wt) in t.iter().zip(&wt) {
                let element = PovmElementSpec::time(*t, 0, 0, sign, 0.0)?;
                acc += wt * w.eval(*t) * element.time_radial(r, m);
            }
        }
        Ok(acc)
    };
    let u_cut = k_cut;
    let panels = 8 + (u_cut * (dc + 2.0 * s_max)).ceil() as usize;
    let h = u_cut / panels as f64;
    let mut direct = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = -u_cut + h * p as f64;
        let (u, wu) = gauss_legendre(24, lo, lo + h);
        for (u, wu) in u.iter().zip(&wu) {
            let r = radius_from_time_log(*u, m);
            direct += wu * r.powi(3) * smear(a, r, *u)?.conj() * smear(b, r, *u)?;
        }
    }
    Ok(SmearedOverlap { direct, fourier })
}
