//! One function per subcommand. Each writes its artifacts and returns the
//! summary lines and any failed checks; nothing here reads the environment.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use propertime::analysis::{
    admissibility_check_with, covariance_check, covariance_convergence, propertime_sweep, AdmissibilityReport,
    Candidate, CovarianceConvergence, CovarianceGrids, CovarianceReport,
};
use propertime::operators::{extension_spectrum, ExtensionParam, StencilSpec};
use propertime::povm::{
    position_overlap, sinc_kernel, time_overlap_smeared, PositionProjector, TimeProjector, TimeWindow,
};
use propertime::states::Sign;
use serde::Serialize;

use crate::config::{AxisRange, KernelAxis, RunConfig, StateSource};
use crate::emit::{emit, float, to_json, write_file};
use crate::error::CliError;

/// What a subcommand did.
#[derive(Debug, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
    /// Names and details of failed checks; empty means exit status 0.
    pub failures: Vec<String>,
}

impl Outcome {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        self.lines.push(format!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" }));
        if !ok {
            self.failures.push(format!("{name}: {detail}"));
        }
    }
}

fn out_dir(cfg: &RunConfig) -> &Path {
    &cfg.output.dir
}

pub fn spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = &cfg.spectrum;
    let phi = ExtensionParam::new(s.phi)?;
    let spec = extension_spectrum(phi, s.n_min, s.n_max, cfg.mass())?;
    let files = emit(&spec, || spec.to_csv(), cfg.output.format, out_dir(cfg), "spectrum")?;
    let mut out = Outcome { files, ..Outcome::default() };
    out.lines.push(format!("spectrum: phi = {}, n in [{}, {}], {} eigenvalues", s.phi, s.n_min, s.n_max, spec.z.len()));
    Ok(out)
}

pub fn time_density(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (state, grid) = cfg.state_on(cfg.grids.time)?;
    let projector = TimeProjector::new(&state, &grid, cfg.truncation.l_max)?;
    let t = cfg.time_axis.points();
    let mut out = Outcome::default();
    for (i, &tau) in cfg.taus.iter().enumerate() {
        let p = projector.density(tau, &t)?;
        out.files.extend(emit(&p, || p.to_csv(), cfg.output.format, out_dir(cfg), &format!("time_density_{i:03}"))?);
        out.lines.push(format!(
            "time density tau = {tau}: total mass {:.6}, spectral mass {:.6}, mean {:.6}",
            p.total_mass,
            p.spectral_mass,
            p.mean()
        ));
        out.lines.extend(p.warnings.iter().map(|w| format!("  warning: {w}")));
    }
    Ok(out)
}

pub fn position_density(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (state, grid) = cfg.state_on(cfg.grids.hyperbolic)?;
    let projector = PositionProjector::new(&state, &grid, cfg.truncation.position())?;
    let z = cfg.position_axis.points();
    let mut out = Outcome::default();
    for (i, &tau) in cfg.taus.iter().enumerate() {
        let p = projector.density(tau, &z)?;
        out.files.extend(emit(
            &p,
            || p.to_csv(),
            cfg.output.format,
            out_dir(cfg),
            &format!("position_density_{i:03}"),
        )?);
        out.lines.push(format!(
            "position density tau = {tau}: total mass {:.6}, spectral mass {:.6}, mean {:.6}",
            p.total_mass,
            p.spectral_mass,
            p.mean()
        ));
        out.lines.extend(p.warnings.iter().map(|w| format!("  warning: {w}")));
    }
    Ok(out)
}

/// Largest deviation tolerated between a kernel scan and its reference.
pub const Z_KERNEL_TOLERANCE: f64 = 1e-6;
pub const T_KERNEL_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Serialize)]
pub struct KernelRow {
    pub separation: f64,
    pub re: f64,
    pub im: f64,
    pub reference_re: f64,
    pub reference_im: f64,
    pub abs_error: f64,
}

/// A scan of the position kernel against sinc(mπΔz/2), or of the smeared
/// time kernel against its half-line Fourier representation.
#[derive(Debug, Clone, Serialize)]
pub struct KernelScan {
    pub axis: KernelAxis,
    pub units: String,
    pub mass: f64,
    pub tau: f64,
    pub sign: Sign,
    pub window_width: Option<f64>,
    pub max_abs_error: f64,
    pub rows: Vec<KernelRow>,
}

impl KernelScan {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# axis,{}", if self.axis == KernelAxis::Z { "z" } else { "t" });
        let _ = writeln!(s, "# units,{}", self.units);
        let _ = writeln!(s, "# mass,{}", float(self.mass));
        let _ = writeln!(s, "# tau,{}", float(self.tau));
        let _ = writeln!(s, "# sign,{}", self.sign);
        if let Some(w) = self.window_width {
            let _ = writeln!(s, "# window_width,{}", float(w));
        }
        let _ = writeln!(s, "# max_abs_error,{}", float(self.max_abs_error));
        let _ = writeln!(s, "separation,re,im,reference_re,reference_im,abs_error");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                float(r.separation),
                float(r.re),
                float(r.im),
                float(r.reference_re),
                float(r.reference_im),
                float(r.abs_error)
            );
        }
        s
    }
}

fn state_sign(cfg: &RunConfig) -> Sign {
    match &cfg.state {
        StateSource::Gaussian(g) => g.sign,
        StateSource::File(_) => Sign::Plus,
    }
}

pub fn overlap(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let o = &cfg.overlap;
    let range = AxisRange { min: o.min, max: o.max, step: o.step };
    range.validate("overlap")?;
    let sign = state_sign(cfg);
    let mut rows = Vec::new();
    for d in range.points() {
        let (value, reference) = match o.axis {
            KernelAxis::Z => (position_overlap(0.0, d, 1.0, 0, o.tau)?, Complex64::new(sinc_kernel(d), 0.0)),
            KernelAxis::T => {
                let a = TimeWindow::new(0.0, o.window_width)?;
                let b = TimeWindow::new(d, o.window_width)?;
                let s = time_overlap_smeared(&a, &b, sign)?;
                (s.direct, s.fourier)
            }
        };
        rows.push(KernelRow {
            separation: d,
            re: value.re,
            im: value.im,
            reference_re: reference.re,
            reference_im: reference.im,
            abs_error: (value - reference).norm(),
        });
    }
    let max_abs_error = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    let scan = KernelScan {
        axis: o.axis,
        units: "1/m".into(),
        mass: cfg.mass,
        tau: o.tau,
        sign,
        window_width: (o.axis == KernelAxis::T).then_some(o.window_width),
        max_abs_error,
        rows,
    };
    let (stem, tol) = match o.axis {
        KernelAxis::Z => ("overlap_z", Z_KERNEL_TOLERANCE),
        KernelAxis::T => ("overlap_t", T_KERNEL_TOLERANCE),
    };
    let files = emit(&scan, || scan.to_csv(), cfg.output.format, out_dir(cfg), stem)?;
    let mut out = Outcome { files, ..Outcome::default() };
    out.check(
        stem,
        max_abs_error < tol,
        format!("max |kernel − reference| = {max_abs_error:.3e} (tolerance {tol:.0e})"),
    );
    Ok(out)
}

fn admissibility_csv(r: &AdmissibilityReport) -> String {
    let v = serde_json::to_value(r).expect("report serializes");
    let mut s = String::from("key,value\n");
    for (k, val) in v.as_object().expect("report is an object") {
        match val {
            serde_json::Value::Object(inner) => {
                for (k2, x) in inner {
                    let _ = writeln!(s, "{k}.{k2},{}", scalar(x));
                }
            }
            serde_json::Value::Array(items) => {
                for (i, x) in items.iter().enumerate() {
                    let _ = writeln!(s, "{k}.{i},{}", scalar(x));
                }
            }
            x => {
                let _ = writeln!(s, "{k},{}", scalar(x));
            }
        }
    }
    s
}

fn scalar(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::Number(n) if n.is_f64() => float(n.as_f64().expect("finite")),
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Null => "nan".into(),
        other => other.to_string(),
    }
}

pub fn admissibility(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (state, grid) = cfg.state_on(cfg.grids.hyperbolic)?;
    let report = admissibility_check_with(Candidate::State { state: &state, grid: &grid }, cfg.admissibility)?;
    let files = emit(&report, || admissibility_csv(&report), cfg.output.format, out_dir(cfg), "admissibility")?;
    let mut out = Outcome { files, ..Outcome::default() };
    out.check(
        "admissible",
        report.admissible,
        format!(
            "band {:?}, endpoints {:?}, decay {:?}, square-integrable {:?}, smooth {:?}",
            report.band_limit,
            report.endpoint_zeros,
            report.boundary_decay,
            report.square_integrable,
            report.smoothness
        ),
    );
    Ok(out)
}

/// Relative tolerance of the fitted drift slope, with an absolute floor of
/// the same size for packets at rest.
pub const DRIFT_TOLERANCE: f64 = 1e-2;

pub fn evolve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (state, grid) = cfg.state_on(cfg.grids.hyperbolic)?;
    let z = cfg.position_axis.points();
    let sweep = propertime_sweep(&state, &cfg.taus, &z, cfg.truncation.position(), &grid)?;
    let mut out = Outcome::default();
    let dir = out_dir(cfg);
    if cfg.output.format.csv() {
        for (i, p) in sweep.profiles.iter().enumerate() {
            let path = dir.join(format!("evolve_profile_{i:03}.csv"));
            write_file(&path, &p.to_csv())?;
            out.files.push(path);
        }
        let path = dir.join("evolve_summary.csv");
        write_file(&path, &sweep.summary_csv())?;
        out.files.push(path);
    }
    if cfg.output.format.json() {
        let path = dir.join("evolve.json");
        write_file(&path, &to_json(&sweep))?;
        out.files.push(path);
    }
    for w in &sweep.warnings {
        out.lines.push(format!("  warning: {w}"));
    }
    if let Some(fit) = sweep.drift {
        let tol = DRIFT_TOLERANCE * sweep.expected_slope.abs().max(1.0);
        let dev = (fit.slope - sweep.expected_slope).abs();
        out.check(
            "drift_slope",
            dev <= tol,
            format!("fitted {:.6}, expected <Pi3>/m = {:.6}", fit.slope, sweep.expected_slope),
        );
        out.check(
            "mean_affine",
            fit.relative_residual < DRIFT_TOLERANCE,
            format!("max line-fit residual {:.3e} of the drift", fit.relative_residual),
        );
    } else {
        out.lines.push("single tau: no drift fit".into());
    }
    Ok(out)
}

/// Smallest acceptable observed order of the covariance discrepancy.
pub const COVARIANCE_MIN_ORDER: f64 = 2.0;
pub const COVARIANCE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct CovarianceArtifact {
    pub report: CovarianceReport,
    pub convergence: CovarianceConvergence,
}

impl CovarianceArtifact {
    fn to_csv(&self) -> String {
        let r = &self.report;
        let mut s = String::new();
        let _ = writeln!(s, "# rapidity,{}", float(r.rapidity));
        let _ = writeln!(s, "# tau,{}", float(r.tau));
        let _ = writeln!(s, "# step,{}", float(r.step));
        for (k, v) in [("boosted_q3", r.boosted_q3), ("q3", r.q3), ("q0", r.q0), ("predicted", r.predicted)] {
            let _ = writeln!(s, "# {k},{},{}", float(v.re), float(v.im));
        }
        let _ = writeln!(s, "# discrepancy,{}", float(r.discrepancy));
        let _ = writeln!(s, "# stencil_error,{}", float(r.stencil_error));
        let _ = writeln!(s, "# converged,{}", r.converged);
        let _ = writeln!(s, "# order,{}", self.convergence.order.map_or("nan".into(), float));
        let _ = writeln!(s, "step,discrepancy");
        for (h, d) in self.convergence.steps.iter().zip(&self.convergence.discrepancies) {
            let _ = writeln!(s, "{},{}", float(*h), float(*d));
        }
        s
    }
}

pub fn covariance(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (state, hyperbolic) = cfg.state_on(cfg.grids.hyperbolic)?;
    let spherical = cfg.grid(cfg.grids.spherical)?;
    let grids = CovarianceGrids { spherical: &spherical, hyperbolic: &hyperbolic };
    let c = &cfg.covariance;
    let report = covariance_check(&state, c.rapidity, c.tau, grids, &StencilSpec::new(c.step)?)?;
    let convergence = covariance_convergence(&state, c.rapidity, c.tau, grids, &c.refinement)?;
    let artifact = CovarianceArtifact { report, convergence };
    let files = emit(&artifact, || artifact.to_csv(), cfg.output.format, out_dir(cfg), "covariance")?;
    let mut out = Outcome { files, ..Outcome::default() };
    let r = &artifact.report;
    out.check(
        "covariance_identity",
        r.discrepancy < COVARIANCE_TOLERANCE,
        format!("relative discrepancy {:.3e} at chi = {}", r.discrepancy, r.rapidity),
    );
    let order = artifact.convergence.order;
    out.check(
        "covariance_order",
        order.is_some_and(|o| o >= COVARIANCE_MIN_ORDER),
        format!("observed order {}", order.map_or("undefined".into(), |o| format!("{o:.2}"))),
    );
    if !r.converged {
        return Err(CliError::Numerical(format!(
            "stencil error estimate {:.3e} exceeds {:.0e}; artifacts written to {}",
            r.stencil_error,
            propertime::analysis::STENCIL_TOLERANCE,
            out_dir(cfg).display()
        )));
    }
    Ok(out)
}
