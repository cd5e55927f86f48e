use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quadrature::trapezoid_weights;
use crate::states::Sign;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileAxis {
    T,
    Z,
}

impl ProfileAxis {
    pub fn name(self) -> &'static str {
        match self {
            ProfileAxis::T => "t",
            ProfileAxis::Z => "z",
        }
    }
}

/// Spectral truncations under which a profile was computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileTruncation {
    pub l_max: Option<u32>,
    pub lambda_max: Option<f64>,
    pub n_lambda: Option<usize>,
    pub m_z_window: [i32; 2],
    /// Largest |π| resolved by the momentum grid, units of m.
    pub momentum_reach: f64,
}

/// A sampled time or position density. Axis values are in units of 1/m and
/// densities per unit 1/m, so `total_mass` is dimensionless.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub axis: ProfileAxis,
    pub units: String,
    pub mass: f64,
    /// τ in units of 1/m.
    pub tau: f64,
    pub sign: Sign,
    pub truncation: ProfileTruncation,
    pub points: Vec<f64>,
    pub density: Vec<f64>,
    pub weights: Vec<f64>,
    /// ∫ p over the sampled window.
    pub total_mass: f64,
    /// Mass of the truncated spectral content (the limit of `total_mass` for
    /// an unbounded, fully resolved axis).
    pub spectral_mass: f64,
    /// Number of negative quadrature-noise values clipped to zero.
    pub clipped: usize,
    pub warnings: Vec<String>,
}

/// Values below this are treated as quadrature noise and clipped to zero;
/// anything more negative is reported as a warning.
pub const NEGATIVITY_FLOOR: f64 = 1e-12;

/// Largest |1 − spectral mass| before a truncation warning is attached.
pub const TRUNCATION_WARNING: f64 = 1e-2;

impl DensityProfile {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        axis: ProfileAxis,
        mass: f64,
        tau: f64,
        sign: Sign,
        truncation: ProfileTruncation,
        points: Vec<f64>,
        raw: Vec<f64>,
        spectral_mass: f64,
    ) -> Result<Self> {
        let weights = trapezoid_weights(&points)?;
        let mut clipped = 0;
        let mut warnings = Vec::new();
        let mut most_negative: f64 = 0.0;
        let density: Vec<f64> = raw
            .into_iter()
            .map(|p| {
                if p < 0.0 {
                    clipped += 1;
                    most_negative = most_negative.min(p);
                    0.0
                } else {
                    p
                }
            })
            .collect();
        if most_negative < -NEGATIVITY_FLOOR {
            warnings.push(format!("negative density {most_negative:.3e} clipped"));
        }
        let total_mass = weights.iter().zip(&density).map(|(w, p)| w * p).sum();
        if (1.0 - spectral_mass).abs() > TRUNCATION_WARNING {
            warnings.push(format!("spectral truncation keeps mass {spectral_mass:.6}"));
        }
        Ok(Self {
            axis,
            units: "1/m".into(),
            mass,
            tau,
            sign,
            truncation,
            points,
            density,
            weights,
            total_mass,
            spectral_mass,
            clipped,
            warnings,
        })
    }

    /// ∫ z p(z) dz / ∫ p(z) dz.
    pub fn mean(&self) -> f64 {
        self.moment(1) / self.total_mass
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.points
            .iter()
            .zip(&self.density)
            .zip(&self.weights)
            .map(|((x, p), w)| w * p * (x - mu).powi(2))
            .sum::<f64>()
            / self.total_mass
    }

    fn moment(&self, k: i32) -> f64 {
        self.points.iter().zip(&self.density).zip(&self.weights).map(|((x, p), w)| w * p * x.powi(k)).sum()
    }

    /// CSV with `#` header rows, then `axis,density,weight` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let f = |x: f64| format!("{x:.16e}");
        let _ = writeln!(out, "# axis,{}", self.axis.name());
        let _ = writeln!(out, "# units,{}", self.units);
        let _ = writeln!(out, "# mass,{}", f(self.mass));
        let _ = writeln!(out, "# tau,{}", f(self.tau));
        let _ = writeln!(out, "# sign,{}", self.sign);
        match (self.truncation.l_max, self.truncation.lambda_max) {
            (Some(l), _) => {
                let _ = writeln!(out, "# l_max,{l}");
            }
            (None, Some(lm)) => {
                let _ = writeln!(out, "# Lambda_max,{}", f(lm));
            }
            (None, None) => {}
        }
        let [lo, hi] = self.truncation.m_z_window;
        let _ = writeln!(out, "# m_z_window,{lo}:{hi}");
        let _ = writeln!(out, "# momentum_reach,{}", f(self.truncation.momentum_reach));
        let _ = writeln!(out, "# total_mass,{}", f(self.total_mass));
        let _ = writeln!(out, "# spectral_mass,{}", f(self.spectral_mass));
        let _ = writeln!(out, "# clipped,{}", self.clipped);
        let _ = writeln!(out, "{},density,weight", self.axis.name());
        for ((x, p), w) in self.points.iter().zip(&self.density).zip(&self.weights) {
            let _ = writeln!(out, "{},{},{}", f(*x), f(*p), f(*w));
        }
        out
    }
}

/// ∫_a^b p by the trapezoid rule on the piecewise-linear interpolant,
/// clipped to [0, 1].
pub fn interval_probability(profile: &DensityProfile, a: f64, b: f64) -> Result<f64> {
    let (x, p) = (&profile.points, &profile.density);
    let (lo, hi) = (x[0], x[x.len() - 1]);
    if !(a <= b) {
        return Err(invalid(format!("interval [{a}, {b}] is reversed")));
    }
    if a < lo || b > hi {
        return Err(invalid(format!("interval [{a}, {b}] leaves the sampled range [{lo}, {hi}]")));
    }
    let interp = |k: usize, t: f64| p[k] + (p[k + 1] - p[k]) * (t - x[k]) / (x[k + 1] - x[k]);
    let mut acc = 0.0;
    for k in 0..x.len() - 1 {
        let s = x[k].max(a);
        let e = x[k + 1].min(b);
        if e > s {
            acc += 0.5 * (e - s) * (interp(k, s) + interp(k, e));
        }
    }
    Ok(acc.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile() -> DensityProfile {
        let points: Vec<f64> = (0..=40).map(|k| -2.0 + 0.1 * k as f64).collect();
        let raw = points.iter().map(|&x| 0.25 * (1.0 - 0.25 * x * x).max(0.0) * 1.5).collect();
        let trunc = ProfileTruncation {
            l_max: Some(0),
            lambda_max: None,
            n_lambda: None,
            m_z_window: [0, 0],
            momentum_reach: 1.0,
        };
        DensityProfile::assemble(ProfileAxis::T, 1.0, 0.0, Sign::Plus, trunc, points, raw, 1.0).unwrap()
    }

    #[test]
    fn interval_edge_cases() {
        let p = profile();
        assert_eq!(interval_probability(&p, 0.3, 0.3).unwrap(), 0.0);
        let full = interval_probability(&p, -2.0, 2.0).unwrap();
        assert!((full - p.total_mass).abs() < 1e-15);
        assert!(interval_probability(&p, -3.0, 0.0).is_err());
        assert!(interval_probability(&p, 1.0, 0.0).is_err());
        let half = interval_probability(&p, 0.0, 2.0).unwrap();
        assert!((half - 0.5 * full).abs() < 1e-14);
    }

    #[test]
    fn negative_noise_is_clipped_and_counted() {
        let trunc = ProfileTruncation {
            l_max: None,
            lambda_max: Some(8.0),
            n_lambda: Some(4),
            m_z_window: [0, 0],
            momentum_reach: 1.0,
        };
        let p = DensityProfile::assemble(
            ProfileAxis::Z,
            1.0,
            0.0,
            Sign::Plus,
            trunc,
            vec![0.0, 1.0, 2.0],
            vec![1.0, -1e-14, -1e-3],
            1.0,
        )
        .unwrap();
        assert_eq!(p.clipped, 2);
        assert_eq!(p.density, vec![1.0, 0.0, 0.0]);
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn csv_is_deterministic() {
        let p = profile();
        assert_eq!(p.to_csv(), p.clone().to_csv());
        assert!(p.to_csv().lines().any(|l| l == "t,density,weight"));
    }
}
