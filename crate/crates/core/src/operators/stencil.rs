//! Fourth-order finite differences with Richardson extrapolation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Step and extrapolation settings for a derivative stencil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StencilSpec {
    /// Step in the differentiated chart coordinate.
    pub step: f64,
    /// Combine steps h and h/2 as (16 D(h/2) − D(h)) / 15.
    #[serde(default = "yes")]
    pub richardson: bool,
}

fn yes() -> bool {
    true
}

impl StencilSpec {
    pub fn new(step: f64) -> Result<Self> {
        let s = Self { step, richardson: true };
        s.validate()?;
        Ok(s)
    }

    pub fn raw(step: f64) -> Result<Self> {
        let s = Self { step, richardson: false };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.step > 0.0 && self.step < 0.5 {
            Ok(())
        } else {
            Err(invalid(format!("stencil step must lie in (0, 0.5), got {}", self.step)))
        }
    }

    pub fn refined(&self) -> Self {
        Self { step: 0.5 * self.step, ..*self }
    }
}

/// Derivative estimate and an error indicator (|D(h/2) − D(h)| when
/// extrapolating, else zero).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Derivative {
    pub value: Complex64,
    pub error: f64,
}

/// d/dx of `f` at `x` inside the open interval (lo, hi). Central differences
/// are used when x ± 2h fits, one-sided five-point rules otherwise; the
/// step is halved until some rule fits.
pub(crate) fn derivative<F>(f: &F, x: f64, lo: f64, hi: f64, spec: &StencilSpec) -> Derivative
where
    F: Fn(f64) -> Complex64,
{
    let mut h = spec.step;
    // Extrapolation needs the rule at h as well as h/2.
    while !(fits(x, h, lo, hi)) && h > 1e-12 {
        h *= 0.5;
    }
    let d_h = raw(f, x, h, lo, hi);
    if !spec.richardson {
        return Derivative { value: d_h, error: 0.0 };
    }
    let d_half = raw(f, x, 0.5 * h, lo, hi);
    Derivative { value: (16.0 * d_half - d_h) / 15.0, error: (d_half - d_h).norm() }
}

fn fits(x: f64, h: f64, lo: f64, hi: f64) -> bool {
    (x - 2.0 * h > lo && x + 2.0 * h < hi) || x + 4.0 * h < hi || x - 4.0 * h > lo
}

fn raw<F>(f: &F, x: f64, h: f64, lo: f64, hi: f64) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    if x - 2.0 * h > lo && x + 2.0 * h < hi {
        (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
    } else {
        // Forward rule, or backward by reflecting the step.
        let s = if x + 4.0 * h < hi { h } else { -h };
        (-25.0 * f(x) + 48.0 * f(x + s) - 36.0 * f(x + 2.0 * s) + 16.0 * f(x + 3.0 * s) - 3.0 * f(x + 4.0 * s))
            / (12.0 * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_i(x: f64) -> Complex64 {
        Complex64::from_polar(x.exp(), 2.0 * x)
    }

    fn exact(x: f64) -> Complex64 {
        Complex64::new(1.0, 2.0) * exp_i(x)
    }

    #[test]
    fn central_rule_is_fourth_order() {
        let spec = |h| StencilSpec::raw(h).unwrap();
        let e1 = (derivative(&exp_i, 0.3, -10.0, 10.0, &spec(0.04)).value - exact(0.3)).norm();
        let e2 = (derivative(&exp_i, 0.3, -10.0, 10.0, &spec(0.02)).value - exact(0.3)).norm();
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.2, "order {order}");
    }

    #[test]
    fn one_sided_rules_near_both_ends() {
        let spec = StencilSpec::new(0.01).unwrap();
        for x in [-0.995, 0.995] {
            let d = derivative(&exp_i, x, -1.0, 1.0, &spec);
            assert!((d.value - exact(x)).norm() < 1e-8, "{x}: {:?}", d.value);
        }
    }

    #[test]
    fn richardson_improves_and_reports_error() {
        let d = derivative(&exp_i, 0.1, -10.0, 10.0, &StencilSpec::new(0.05).unwrap());
        assert!((d.value - exact(0.1)).norm() < 1e-9);
        assert!(d.error > 0.0 && d.error < 1e-4);
    }

    #[test]
    fn steps_are_validated() {
        assert!(StencilSpec::new(0.0).is_err());
        assert!(StencilSpec::new(0.7).is_err());
    }
}
