//! Position POVM: p(z) = (m/2) Σ_{m_z} ∫ 2Λ dΛ |⟨ψ^{z,Λ,m_z}_{τ;ξ}|φ⟩|².
//!
//! The transverse (ω, φ) projection of the state onto conical modes does not
//! depend on z or τ, so it is computed once; each density sample is then a
//! single sum over the ν nodes.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::element::PovmElementSpec;
use super::profile::{DensityProfile, ProfileAxis, ProfileTruncation};
use crate::error::{invalid, Error, Result};
use crate::kinematics::{ChartKind, Mass, QuadratureGrid};
use crate::operators::longitudinal_mode;
use crate::quadrature::{gauss_legendre, integrate_composite, trapezoid_weights};
use crate::specfun::{conical_p, sinc, ConicalArgs};
use crate::states::{PhysState, Sign, Symmetry};

/// Truncation of the transverse spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionTruncation {
    /// Upper limit of the Λ integral.
    #[serde(default = "default_lambda_max")]
    pub lambda_max: f64,
    /// Gauss–Legendre nodes on [0, Λ_max].
    #[serde(default = "default_n_lambda")]
    pub n_lambda: usize,
    /// Inclusive window of azimuthal numbers.
    #[serde(default = "default_m_z_window")]
    pub m_z_window: [i32; 2],
}

fn default_lambda_max() -> f64 {
    8.0
}

fn default_n_lambda() -> usize {
    48
}

fn default_m_z_window() -> [i32; 2] {
    [-4, 4]
}

impl Default for PositionTruncation {
    fn default() -> Self {
        Self { lambda_max: default_lambda_max(), n_lambda: default_n_lambda(), m_z_window: default_m_z_window() }
    }
}

impl PositionTruncation {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_max > 0.0 && self.lambda_max.is_finite()) || self.n_lambda < 2 {
            return Err(invalid(format!("need Λ_max > 0 and n_Λ ≥ 2, got {self:?}")));
        }
        if self.m_z_window[0] > self.m_z_window[1] {
            return Err(invalid(format!("empty m_z window {:?}", self.m_z_window)));
        }
        Ok(())
    }
}

/// Transverse projections C(ν; Λ, m_z) of a state, reusable across z and τ.
#[derive(Debug, Clone)]
pub struct PositionProjector {
    mass: Mass,
    sign: Sign,
    truncation: PositionTruncation,
    nu: Vec<f64>,
    /// w_ν sec^{3/2} ν: the ν weight times sec³ν times the element's sec^{−3/2}ν.
    nu_weight: Vec<f64>,
    ln_sec: Vec<f64>,
    lambda: Vec<f64>,
    /// w_Λ 2Λ per (m_z, Λ).
    spectral_weight: Vec<Vec<f64>>,
    /// K(Λ, μ) C(ν) per (m_z, Λ), over ν.
    coeffs: Vec<Vec<Vec<Complex64>>>,
    m_z: Vec<i32>,
    momentum_reach: f64,
}

impl PositionProjector {
    pub fn new(state: &PhysState, grid: &QuadratureGrid, truncation: PositionTruncation) -> Result<Self> {
        truncation.validate()?;
        if grid.chart() != ChartKind::Hyperbolic {
            return Err(Error::ChartMismatch { expected: "hyperbolic".into(), found: grid.chart().to_string() });
        }
        let sign = state
            .single_sign()
            .ok_or_else(|| invalid("POVM densities need a single-sign state; project onto one sign first"))?;
        let m = grid.mass();
        let mv = m.value();
        let values = std::mem::take(&mut state.values_on(grid)?[sign.index()]);
        let [aw, an, ap] = grid.axes();
        let (n_w, n_n, n_p) = (aw.len(), an.len(), ap.len());

        let m_z: Vec<i32> = if state.symmetry() >= Symmetry::Axial {
            if truncation.m_z_window[0] <= 0 && truncation.m_z_window[1] >= 0 {
                vec![0]
            } else {
                Vec::new()
            }
        } else {
            (truncation.m_z_window[0]..=truncation.m_z_window[1]).collect()
        };
        let (lambda, lw) = gauss_legendre(truncation.n_lambda, 0.0, truncation.lambda_max);

        // Conical tables P^{−μ}_{−1/2+iΛ_j}(cosh ω_i) per distinct μ.
        let mut mus: Vec<u32> = m_z.iter().map(|k| k.unsigned_abs()).collect();
        mus.sort_unstable();
        mus.dedup();
        let mut tables = Vec::with_capacity(mus.len());
        for &mu in &mus {
            let rows: Result<Vec<Vec<f64>>> = lambda
                .par_iter()
                .map(|&l| {
                    aw.nodes.iter().map(|&w| ConicalArgs::at_rapidity(mu, l, w).and_then(|a| conical_p(&a))).collect()
                })
                .collect();
            tables.push(rows?);
        }

        let transverse_w: Vec<f64> = aw.nodes.iter().zip(&aw.weights).map(|(w, q)| q * mv.powi(3) * w.sinh()).collect();
        let mut coeffs = Vec::with_capacity(m_z.len());
        let mut spectral_weight = Vec::with_capacity(m_z.len());
        for &k in &m_z {
            let mu = k.unsigned_abs();
            let table = &tables[mus.binary_search(&mu).expect("μ tabulated")];
            // Azimuthal projection f(ω_i, ν_n) = Σ_φ w_φ e^{−i m_z φ} ψ.
            let phase: Vec<Complex64> =
                ap.nodes.iter().zip(&ap.weights).map(|(p, w)| Complex64::from_polar(*w, -(k as f64) * p)).collect();
            let mut f = vec![Complex64::new(0.0, 0.0); n_w * n_n];
            for i in 0..n_w {
                for n in 0..n_n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (q, e) in phase.iter().enumerate().take(n_p) {
                        acc += e * values[grid.index(i, n, q)];
                    }
                    f[i * n_n + n] = acc;
                }
            }
            let per_lambda: Vec<Vec<Complex64>> = lambda
                .par_iter()
                .enumerate()
                .map(|(j, &l)| {
                    let kfac = PovmElementSpec::position_prefactor(l, mu, m);
                    (0..n_n)
                        .map(|n| {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for i in 0..n_w {
                                acc += transverse_w[i] * table[j][i] * f[i * n_n + n];
                            }
                            kfac * acc
                        })
                        .collect()
                })
                .collect();
            coeffs.push(per_lambda);
            spectral_weight.push(lambda.iter().zip(&lw).map(|(l, w)| w * 2.0 * l).collect());
        }

        let nu = an.nodes.clone();
        let nu_weight = nu.iter().zip(&an.weights).map(|(n, w)| w * n.cos().powf(-1.5)).collect();
        let ln_sec = nu.iter().map(|n| -n.cos().ln()).collect();
        Ok(Self {
            mass: m,
            sign,
            truncation,
            nu,
            nu_weight,
            ln_sec,
            lambda,
            spectral_weight,
            coeffs,
            m_z,
            momentum_reach: grid.truncation().momentum_reach / mv,
        })
    }

    /// π Σ_{m_z} Σ_Λ w 2Λ Σ_ν w_ν sec³ν |K C|²: the limit of ∫p(z)dz over the
    /// whole z-axis for the retained (Λ, m_z) content.
    pub fn spectral_mass(&self) -> f64 {
        let sec3: Vec<f64> = self.nu_weight.iter().zip(&self.nu).map(|(w, n)| w * n.cos().powf(-1.5)).collect();
        let mut total = 0.0;
        for (c_mz, sw) in self.coeffs.iter().zip(&self.spectral_weight) {
            for (c, w) in c_mz.iter().zip(sw) {
                total += w * c.iter().zip(&sec3).map(|(c, s)| s * c.norm_sqr()).sum::<f64>();
            }
        }
        PI * total
    }

    /// ⟨ψ^{z,Λ_j,m_z}|φ⟩ for every retained (m_z, Λ_j) at z, τ in units 1/m.
    pub fn overlaps(&self, z: f64, tau: f64) -> Vec<Vec<Complex64>> {
        let xi = self.sign.factor();
        let kernel: Vec<Complex64> = self
            .nu
            .iter()
            .zip(&self.nu_weight)
            .zip(&self.ln_sec)
            .map(|((n, w), ls)| Complex64::from_polar(*w, xi * z * n - tau * ls))
            .collect();
        self.coeffs
            .iter()
            .map(|c_mz| c_mz.iter().map(|c| c.iter().zip(&kernel).map(|(c, k)| c * k).sum()).collect())
            .collect()
    }

    /// p(z) per unit 1/m.
    fn density_at(&self, z: f64, tau: f64) -> f64 {
        let ov = self.overlaps(z, tau);
        let mut p = 0.0;
        for (o_mz, sw) in ov.iter().zip(&self.spectral_weight) {
            p += o_mz.iter().zip(sw).map(|(o, w)| w * o.norm_sqr()).sum::<f64>();
        }
        // (m/2) Σ ... per physical length, divided by m per unit 1/m.
        0.5 * p
    }

    /// p(z; τ) on `z_grid` (ascending, units 1/m) at τ (units 1/m).
    pub fn density(&self, tau: f64, z_grid: &[f64]) -> Result<DensityProfile> {
        trapezoid_weights(z_grid)?;
        if !tau.is_finite() {
            return Err(invalid("τ must be finite"));
        }
        let raw: Vec<f64> = z_grid.par_iter().map(|&z| self.density_at(z, tau)).collect();
        let trunc = ProfileTruncation {
            l_max: None,
            lambda_max: Some(self.truncation.lambda_max),
            n_lambda: Some(self.truncation.n_lambda),
            m_z_window: self.truncation.m_z_window,
            momentum_reach: self.momentum_reach,
        };
        DensityProfile::assemble(
            ProfileAxis::Z,
            self.mass.value(),
            tau,
            self.sign,
            trunc,
            z_grid.to_vec(),
            raw,
            self.spectral_mass(),
        )
    }

    /// The Λ nodes used for the transverse integral.
    pub fn lambda_nodes(&self) -> &[f64] {
        &self.lambda
    }

    pub fn m_z_values(&self) -> &[i32] {
        &self.m_z
    }
}

/// p(z; τ) on `z_grid` for a single-sign state on a hyperbolic grid.
pub fn position_density(
    state: &PhysState,
    tau: f64,
    z_grid: &[f64],
    truncation: PositionTruncation,
    grid: &QuadratureGrid,
) -> Result<DensityProfile> {
    PositionProjector::new(state, grid, truncation)?.density(tau, z_grid)
}

/// ∫ sec³ν dν conj(L_{z1}) L_{z2} for the longitudinal factors of two position
/// elements with equal (Λ, m_z, τ, ξ); z in units of 1/m. Equals
/// sinc(π(z1 − z2)/2).
pub fn position_overlap(z1: f64, z2: f64, _lambda: f64, _m_z: i32, tau: f64) -> Result<Complex64> {
    if !(z1.is_finite() && z2.is_finite() && tau.is_finite()) {
        return Err(invalid("z1, z2 and τ must be finite"));
    }
    let panels = 2 + (z1 - z2).abs().ceil() as usize;
    let integrand = |nu: f64, part: fn(Complex64) -> f64| {
        let a = longitudinal_mode(nu, z1, 1.0, tau, 1.0);
        let b = longitudinal_mode(nu, z2, 1.0, tau, 1.0);
        part(a.conj() * b) * nu.cos().powi(-3)
    };
    let re = integrate_composite(32, panels, -FRAC_PI_2, FRAC_PI_2, |nu| integrand(nu, |c| c.re));
    let im = integrate_composite(32, panels, -FRAC_PI_2, FRAC_PI_2, |nu| integrand(nu, |c| c.im));
    Ok(Complex64::new(re, im))
}

/// The closed form of [`position_overlap`].
pub fn sinc_kernel(dz: f64) -> f64 {
    sinc(0.5 * PI * dz)
}
