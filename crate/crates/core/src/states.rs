//! Physical single-particle states: two amplitude fields on the mass shell,
//! one per energy sign, each an evaluator over momentum points.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kinematics::{boost_momentum, inner_product, GridSpec, Mass, MomentumPoint, QuadratureGrid};
use crate::quadrature::trapezoid_weights;
use crate::specfun::{conical_p, conical_weight, sinc, ConicalArgs};

/// Energy sign ξ labelling the two summands H⁺ ⊕ H⁻.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    /// ξ as ±1; also the σ³ eigenvalue on this summand.
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        })
    }
}

/// Rotational symmetry of an amplitude, used for fast paths in the POVMs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Symmetry {
    None,
    /// Independent of the azimuth φ.
    Axial,
    /// Depends on |π| only.
    Spherical,
}

/// A complex amplitude on the mass shell.
pub trait Amplitude: Send + Sync + fmt::Debug {
    fn eval(&self, p: &MomentumPoint, m: Mass) -> Complex64;

    /// Values at the nodes of `grid`, in node order.
    fn on_grid(&self, grid: &QuadratureGrid) -> Result<Vec<Complex64>> {
        let m = grid.mass();
        Ok(grid.points().par_iter().map(|p| self.eval(p, m)).collect())
    }

    /// False for amplitudes known only at the nodes of one grid.
    fn is_evaluable(&self) -> bool {
        true
    }

    fn symmetry(&self) -> Symmetry {
        Symmetry::None
    }
}

pub type AmplitudeRef = Arc<dyn Amplitude>;

/// exp(−|π − c|² / 4σ²) · e^{−iπ·x₀}: a Gaussian in Cartesian momentum,
/// centred at c, displaced in position by x₀ (units 1/m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianAmplitude {
    pub center: [f64; 3],
    pub width: f64,
    pub offset: [f64; 3],
}

impl Amplitude for GaussianAmplitude {
    fn eval(&self, p: &MomentumPoint, m: Mass) -> Complex64 {
        let q = p.to_cartesian(m);
        let d2: f64 = (0..3).map(|i| (q[i] - self.center[i]).powi(2)).sum();
        let phase: f64 = (0..3).map(|i| q[i] * self.offset[i]).sum();
        Complex64::from_polar((-d2 / (4.0 * self.width * self.width)).exp(), -phase)
    }

    fn symmetry(&self) -> Symmetry {
        let on_axis = |v: [f64; 3]| v[0] == 0.0 && v[1] == 0.0;
        let zero = |v: [f64; 3]| v.iter().all(|&c| c == 0.0);
        if zero(self.center) && zero(self.offset) {
            Symmetry::Spherical
        } else if on_axis(self.center) && on_axis(self.offset) {
            Symmetry::Axial
        } else {
            Symmetry::None
        }
    }
}

type AmplitudeFn = dyn Fn(&MomentumPoint, Mass) -> Complex64 + Send + Sync;

/// A closure-backed amplitude with a declared symmetry.
#[derive(Clone)]
pub struct FnAmplitude {
    label: String,
    symmetry: Symmetry,
    f: Arc<AmplitudeFn>,
}

impl FnAmplitude {
    pub fn new(
        label: impl Into<String>,
        symmetry: Symmetry,
        f: impl Fn(&MomentumPoint, Mass) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), symmetry, f: Arc::new(f) }
    }
}

impl fmt::Debug for FnAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnAmplitude").field("label", &self.label).finish()
    }
}

impl Amplitude for FnAmplitude {
    fn eval(&self, p: &MomentumPoint, m: Mass) -> Complex64 {
        (self.f)(p, m)
    }

    fn symmetry(&self) -> Symmetry {
        self.symmetry
    }
}

/// ψ(Λ⁻¹π) for a z-boost of the given rapidity.
#[derive(Debug, Clone)]
pub struct Boosted {
    inner: AmplitudeRef,
    rapidity: f64,
}

impl Boosted {
    #[allow(clippy::new_ret_no_self)]
    pub fn new(inner: AmplitudeRef, rapidity: f64) -> AmplitudeRef {
        Arc::new(Self { inner, rapidity })
    }
}

impl Amplitude for Boosted {
    fn eval(&self, p: &MomentumPoint, m: Mass) -> Complex64 {
        let back = boost_momentum(p.to_cartesian(m), -self.rapidity, m);
        self.inner.eval(&MomentumPoint::Cartesian { p: back }, m)
    }

    fn symmetry(&self) -> Symmetry {
        self.inner.symmetry().min(Symmetry::Axial)
    }
}

/// Multiplication by a constant times a component of the four-momentum.
#[derive(Debug, Clone)]
pub struct MomentumMultiplied {
    inner: AmplitudeRef,
    mu: usize,
    factor: f64,
}

impl MomentumMultiplied {
    /// `mu` = 0 multiplies by `factor`·E, 1..=3 by `factor`·πʲ.
    #[allow(clippy::new_ret_no_self)]
    pub fn new(inner: AmplitudeRef, mu: usize, factor: f64) -> Result<AmplitudeRef> {
        if mu > 3 {
            return Err(invalid(format!("four-momentum index must be 0..=3, got {mu}")));
        }
        Ok(Arc::new(Self { inner, mu, factor }))
    }
}

impl Amplitude for MomentumMultiplied {
    fn eval(&self, p: &MomentumPoint, m: Mass) -> Complex64 {
        let c = if self.mu == 0 { p.energy(m) } else { p.to_cartesian(m)[self.mu - 1] };
        (self.factor * c) * self.inner.eval(p, m)
    }

    fn symmetry(&self) -> Symmetry {
        match self.mu {
            0 => self.inner.symmetry(),
            3 => self.inner.symmetry().min(Symmetry::Axial),
            _ => Symmetry::None,
        }
    }
}

/// Amplitude known only at the nodes of one grid (e.g. loaded from a file).
#[derive(Debug, Clone)]
pub struct SampledAmplitude {
    spec: GridSpec,
    mass: Mass,
    values: Vec<Complex64>,
    index: HashMap<[u64; 3], usize>,
}

fn point_key(p: &MomentumPoint) -> [u64; 3] {
    match *p {
        MomentumPoint::Cartesian { p } => [p[0].to_bits(), p[1].to_bits(), p[2].to_bits()],
        MomentumPoint::Spherical { r, theta, phi } => [r.to_bits(), theta.to_bits(), phi.to_bits()],
        MomentumPoint::Hyperbolic { omega, nu, phi } => [omega.to_bits(), nu.to_bits(), phi.to_bits()],
    }
}

impl SampledAmplitude {
    pub fn new(grid: &QuadratureGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "sampled amplitude has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(invalid("sampled amplitude contains non-finite values"));
        }
        let index = grid.points().iter().enumerate().map(|(k, p)| (point_key(p), k)).collect();
        Ok(Self { spec: *grid.spec(), mass: grid.mass(), values, index })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

impl Amplitude for SampledAmplitude {
    /// NaN away from the sampling nodes.
    fn eval(&self, p: &MomentumPoint, _m: Mass) -> Complex64 {
        self.index.get(&point_key(p)).map_or(Complex64::new(f64::NAN, f64::NAN), |&k| self.values[k])
    }

    fn on_grid(&self, grid: &QuadratureGrid) -> Result<Vec<Complex64>> {
        if *grid.spec() != self.spec || grid.mass() != self.mass {
            return Err(Error::ChartMismatch {
                expected: format!("{:?} (mass {})", self.spec, self.mass.value()),
                found: format!("{:?} (mass {})", grid.spec(), grid.mass().value()),
            });
        }
        Ok(self.values.clone())
    }

    fn is_evaluable(&self) -> bool {
        false
    }
}

/// T(ω)·L(ν)·e^{i m_z φ} on the hyperbolic chart, with T memoized per ω
/// because it is typically a costly superposition of conical functions.
pub struct SeparableHyperbolic {
    transverse: Box<dyn Fn(f64) -> Complex64 + Send + Sync>,
    longitudinal: Box<dyn Fn(f64) -> Complex64 + Send + Sync>,
    m_z: i32,
    cache: RwLock<HashMap<u64, Complex64>>,
}

impl SeparableHyperbolic {
    pub fn new(
        transverse: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        longitudinal: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        m_z: i32,
    ) -> Self {
        Self {
            transverse: Box::new(transverse),
            longitudinal: Box::new(longitudinal),
            m_z,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn transverse_at(&self, omega: f64) -> Complex64 {
        let key = omega.to_bits();
        if let Some(v) = self.cache.read().expect("transverse cache poisoned").get(&key) {
            return *v;
        }
        let v = (self.transverse)(omega);
        self.cache.write().expect("transverse cache poisoned").insert(key, v);
        v
    }

    pub fn longitudinal_at(&self, nu: f64) -> Complex64 {
        (self.longitudinal)(nu)
    }
}

impl fmt::Debug for SeparableHyperbolic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeparableHyperbolic").field("m_z", &self.m_z).finish()
    }
}

impl Amplitude for SeparableHyperbolic {
    fn eval(&self, p: &MomentumPoint, m: Mass) -> Complex64 {
        let (omega, nu, phi) = p.hyperbolic_coords(m);
        let azimuthal =
            if self.m_z == 0 { Complex64::new(1.0, 0.0) } else { Complex64::from_polar(1.0, self.m_z as f64 * phi) };
        self.transverse_at(omega) * self.longitudinal_at(nu) * azimuthal
    }

    fn symmetry(&self) -> Symmetry {
        if self.m_z == 0 {
            Symmetry::Axial
        } else {
            Symmetry::None
        }
    }
}

/// A pure state of H⁺ ⊕ H⁻.
#[derive(Debug, Clone)]
pub struct PhysState {
    mass: Mass,
    components: [Option<AmplitudeRef>; 2],
    scale: f64,
    normalized: bool,
}

impl PhysState {
    pub fn new(mass: Mass, plus: Option<AmplitudeRef>, minus: Option<AmplitudeRef>) -> Result<Self> {
        if plus.is_none() && minus.is_none() {
            return Err(invalid("a state needs at least one sign component"));
        }
        Ok(Self { mass, components: [plus, minus], scale: 1.0, normalized: false })
    }

    /// A state living entirely in the summand of the given sign.
    pub fn single(mass: Mass, sign: Sign, amplitude: AmplitudeRef) -> Self {
        let mut components = [None, None];
        components[sign.index()] = Some(amplitude);
        Self { mass, components, scale: 1.0, normalized: false }
    }

    pub fn mass(&self) -> Mass {
        self.mass
    }

    pub fn component(&self, sign: Sign) -> Option<&AmplitudeRef> {
        self.components[sign.index()].as_ref()
    }

    /// Signs with a component present.
    pub fn signs(&self) -> Vec<Sign> {
        Sign::BOTH.into_iter().filter(|s| self.components[s.index()].is_some()).collect()
    }

    /// The sign if the state lives in a single summand.
    pub fn single_sign(&self) -> Option<Sign> {
        match self.signs().as_slice() {
            [s] => Some(*s),
            _ => None,
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_evaluable(&self) -> bool {
        self.components.iter().flatten().all(|a| a.is_evaluable())
    }

    /// The weakest symmetry over the components present.
    pub fn symmetry(&self) -> Symmetry {
        self.components.iter().flatten().map(|a| a.symmetry()).min().unwrap_or(Symmetry::None)
    }

    /// The (scaled) amplitude of one sign at a point; zero for an absent sign.
    pub fn eval(&self, sign: Sign, p: &MomentumPoint) -> Complex64 {
        self.components[sign.index()].as_ref().map_or(Complex64::new(0.0, 0.0), |a| self.scale * a.eval(p, self.mass))
    }

    /// Node values per sign; an absent sign yields an empty vector.
    pub fn values_on(&self, grid: &QuadratureGrid) -> Result<[Vec<Complex64>; 2]> {
        let mut out = [Vec::new(), Vec::new()];
        for s in Sign::BOTH {
            if let Some(a) = &self.components[s.index()] {
                let mut v = a.on_grid(grid)?;
                if self.scale != 1.0 {
                    v.iter_mut().for_each(|x| *x *= self.scale);
                }
                out[s.index()] = v;
            }
        }
        Ok(out)
    }

    /// The state multiplied by a real factor. The flag survives only |c| = 1.
    pub fn scaled(&self, c: f64) -> Self {
        Self { scale: self.scale * c, normalized: self.normalized && c.abs() == 1.0, ..self.clone() }
    }

    /// Applies `f` to each present component, keeping scale and flag.
    pub fn map_components(&self, f: impl Fn(AmplitudeRef) -> AmplitudeRef) -> Self {
        let [a, b] = &self.components;
        Self { components: [a.clone().map(&f), b.clone().map(&f)], ..self.clone() }
    }

    /// The same state with only the given sign kept (flag cleared).
    pub fn project(&self, sign: Sign) -> Result<Self> {
        let amp =
            self.components[sign.index()].clone().ok_or_else(|| invalid(format!("state has no {sign} component")))?;
        Ok(Self { scale: self.scale, ..Self::single(self.mass, sign, amp) })
    }

    pub fn norm_sq(&self, grid: &QuadratureGrid) -> Result<f64> {
        Ok(inner_product(self, self, grid)?.re)
    }

    pub fn normalize(&self, grid: &QuadratureGrid) -> Result<Self> {
        let n2 = self.norm_sq(grid)?;
        if !n2.is_finite() {
            return Err(Error::NonConvergence { what: "state norm".into(), residual: n2 });
        }
        if n2 <= f64::MIN_POSITIVE {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { scale: self.scale / n2.sqrt(), normalized: true, ..self.clone() })
    }
}

/// Free-function form of [`PhysState::normalize`].
pub fn normalize(state: &PhysState, grid: &QuadratureGrid) -> Result<PhysState> {
    state.normalize(grid)
}

/// Serializable description of a Gaussian test packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    /// Momentum centre (units of m).
    pub center: [f64; 3],
    /// Momentum width σ (units of m).
    pub width: f64,
    /// Position offset (units of 1/m).
    #[serde(default)]
    pub offset: [f64; 3],
    #[serde(default = "default_sign")]
    pub sign: Sign,
}

fn default_sign() -> Sign {
    Sign::Plus
}

impl GaussianSpec {
    pub fn build(&self, grid: &QuadratureGrid) -> Result<PhysState> {
        gaussian_packet_with_offset(self.center, self.width, self.offset, self.sign, grid)
    }
}

/// A normalized single-sign Gaussian in Cartesian momentum; `center` and
/// `width` are in units of m.
pub fn gaussian_packet(center: [f64; 3], width: f64, sign: Sign, grid: &QuadratureGrid) -> Result<PhysState> {
    gaussian_packet_with_offset(center, width, [0.0; 3], sign, grid)
}

/// As [`gaussian_packet`], with a position offset phase e^{−iπ·x₀}.
pub fn gaussian_packet_with_offset(
    center: [f64; 3],
    width: f64,
    offset: [f64; 3],
    sign: Sign,
    grid: &QuadratureGrid,
) -> Result<PhysState> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(invalid(format!("packet width must be positive, got {width}")));
    }
    if center.iter().chain(&offset).any(|c| !c.is_finite()) {
        return Err(invalid("packet centre and offset must be finite"));
    }
    let m = grid.mass().value();
    let amp = GaussianAmplitude { center: center.map(|c| c * m), width: width * m, offset: offset.map(|x| x / m) };
    PhysState::single(grid.mass(), sign, Arc::new(amp)).normalize(grid)
}

/// Position profile Ω(z) on a z-grid together with a transverse profile
/// α(Λ) on a Λ-grid; both are sampled and integrated by the trapezoid rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionAmplitude {
    /// Ascending sample points, units 1/m.
    pub z: Vec<f64>,
    pub omega: Vec<Complex64>,
    /// Ascending, non-negative Λ samples.
    pub lambda: Vec<f64>,
    pub alpha: Vec<Complex64>,
}

impl PositionAmplitude {
    pub fn new(z: Vec<f64>, omega: Vec<Complex64>, lambda: Vec<f64>, alpha: Vec<Complex64>) -> Result<Self> {
        let pa = Self { z, omega, lambda, alpha };
        pa.validate()?;
        Ok(pa)
    }

    pub fn validate(&self) -> Result<()> {
        if self.z.len() != self.omega.len() {
            return Err(invalid("Ω samples and z-grid differ in length"));
        }
        if self.lambda.len() != self.alpha.len() {
            return Err(invalid("α samples and Λ-grid differ in length"));
        }
        trapezoid_weights(&self.z)?;
        trapezoid_weights(&self.lambda)?;
        if self.lambda[0] < 0.0 {
            return Err(invalid("Λ samples must be non-negative"));
        }
        let finite = |v: &Complex64| v.re.is_finite() && v.im.is_finite();
        if !self.omega.iter().all(finite) || !self.alpha.iter().all(finite) {
            return Err(invalid("profile samples must be finite"));
        }
        if self.omega.iter().all(|v| v.norm() == 0.0) {
            return Err(Error::ZeroNorm);
        }
        if self.alpha.iter().all(|v| v.norm() == 0.0) {
            return Err(invalid("transverse profile α is identically zero"));
        }
        Ok(())
    }

    /// F_Ω(k) = (2π)^{-1/2} mπ ∫ dz Ω(z) e^{−iπmkz}; the band limit in k is
    /// [−1/2, 1/2].
    pub fn fourier(&self, k: f64, m: Mass) -> Complex64 {
        let w = trapezoid_weights(&self.z).expect("validated z-grid");
        fourier_samples(&self.z, &w, &self.omega, k, m)
    }

    /// ∫ dz |Ω|².
    pub fn norm_sq(&self) -> f64 {
        let w = trapezoid_weights(&self.z).expect("validated z-grid");
        w.iter().zip(&self.omega).map(|(w, v)| w * v.norm_sqr()).sum()
    }

    /// The smeared amplitude p₀(z′) = √(m/2) ∫ dz Ω(z) sinc(mπ(z′ − z)/2),
    /// z′ in units of 1/m. For band-limited Ω this is √(2/m) Ω(z′).
    pub fn p0(&self, z_prime: f64, m: Mass) -> Complex64 {
        let m = m.value();
        let w = trapezoid_weights(&self.z).expect("validated z-grid");
        let mut acc = Complex64::new(0.0, 0.0);
        for ((z, w), v) in self.z.iter().zip(&w).zip(&self.omega) {
            acc += v * (w * sinc(0.5 * m * PI * (z_prime - z)));
        }
        acc * (0.5 * m).sqrt()
    }
}

pub(crate) fn fourier_samples(z: &[f64], w: &[f64], omega: &[Complex64], k: f64, m: Mass) -> Complex64 {
    let m = m.value();
    let mut acc = Complex64::new(0.0, 0.0);
    for ((z, w), v) in z.iter().zip(w).zip(omega) {
        acc += *w * v * Complex64::from_polar(1.0, -PI * m * k * z);
    }
    acc * (m * PI / (2.0 * PI).sqrt())
}

/// Σ_j w_j 2Λ_j α_j √(sinh πΛ_j)|Γ(1/2+iΛ_j)| P_{−1/2+iΛ_j}(cosh ω).
fn transverse_superposition(lambda: &[f64], weights: &[f64], alpha: &[Complex64], omega: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for ((&l, &w), &a) in lambda.iter().zip(weights).zip(alpha) {
        if l == 0.0 || a == Complex64::new(0.0, 0.0) {
            continue;
        }
        let p = ConicalArgs::at_rapidity(0, l, omega).and_then(|args| conical_p(&args)).unwrap_or(f64::NAN);
        acc += a * (w * 2.0 * l * conical_weight(0, l) * p);
    }
    acc
}

/// The state ∫dλ α(λ) ∫dz Ω(z) |ψ^{z,Λ(λ),0}_{τ;ξ}⟩, normalized on `grid`.
///
/// Longitudinally this is F_Ω(ξν/π) (sec ν)^{−3/2} e^{imτ ln sec ν}; the band
/// limit k ∈ [−1/2, 1/2] is built in by the chart range of ν. The transverse
/// factor is the α-weighted superposition of m_z = 0 conical modes, which
/// fixes the otherwise unspecified ω-dependent prefactor.
pub fn state_from_position_amplitude(
    pa: &PositionAmplitude,
    sign: Sign,
    tau: f64,
    grid: &QuadratureGrid,
) -> Result<PhysState> {
    pa.validate()?;
    if !tau.is_finite() {
        return Err(invalid("τ must be finite"));
    }
    let m = grid.mass();
    let zw = trapezoid_weights(&pa.z)?;
    let lw = trapezoid_weights(&pa.lambda)?;
    let (z, omega) = (pa.z.clone(), pa.omega.clone());
    let xi = sign.factor();
    let mtau = m.value() * tau;
    let longitudinal = move |nu: f64| {
        if nu.abs() >= FRAC_PI_2 {
            return Complex64::new(0.0, 0.0);
        }
        let ln_sec = -nu.cos().ln();
        let f = fourier_samples(&z, &zw, &omega, xi * nu / PI, m);
        f * Complex64::from_polar((-1.5 * ln_sec).exp(), mtau * ln_sec)
    };
    let (lambda, alpha) = (pa.lambda.clone(), pa.alpha.clone());
    let transverse = move |w: f64| transverse_superposition(&lambda, &lw, &alpha, w);
    let amp = SeparableHyperbolic::new(transverse, longitudinal, 0);
    PhysState::single(m, sign, Arc::new(amp)).normalize(grid)
}

/// A finite convex combination of pure states.
#[derive(Debug, Clone)]
pub struct Mixture {
    weights: Vec<f64>,
    states: Vec<PhysState>,
}

impl Mixture {
    pub fn new(weights: Vec<f64>, states: Vec<PhysState>) -> Result<Self> {
        if weights.is_empty() || weights.len() != states.len() {
            return Err(invalid("mixture needs matching, non-empty weights and states"));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(invalid("mixture weights must be non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("mixture weights must sum to 1, got {total}")));
        }
        Ok(Self { weights, states })
    }

    pub fn pure(state: PhysState) -> Self {
        Self { weights: vec![1.0], states: vec![state] }
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &PhysState)> {
        self.weights.iter().copied().zip(&self.states)
    }

    /// Tr(ρ A) from per-state expectation values ⟨ψ_i|A|ψ_i⟩.
    pub fn expectation<F: FnMut(&PhysState) -> Result<f64>>(&self, mut f: F) -> Result<f64> {
        let mut acc = 0.0;
        for (w, s) in self.iter() {
            acc += w * f(s)?;
        }
        Ok(acc)
    }
}

/// On-disk form of a state: grid spec and per-node (re, im) pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub mass: f64,
    pub grid: GridSpec,
    pub plus: Option<Vec<[f64; 2]>>,
    pub minus: Option<Vec<[f64; 2]>>,
}

/// Tolerance on |⟨ψ|ψ⟩ − 1| accepted when loading a state file.
pub const STATE_FILE_NORM_TOL: f64 = 1e-6;

impl StateFile {
    /// Samples `state` on `grid`.
    pub fn from_state(state: &PhysState, grid: &QuadratureGrid) -> Result<Self> {
        let values = state.values_on(grid)?;
        let pack = |s: Sign| state.component(s).map(|_| values[s.index()].iter().map(|v| [v.re, v.im]).collect());
        Ok(Self { mass: grid.mass().value(), grid: *grid.spec(), plus: pack(Sign::Plus), minus: pack(Sign::Minus) })
    }

    /// Rebuilds the grid and state; rejects states that are not normalized.
    pub fn into_state(self) -> Result<(PhysState, QuadratureGrid)> {
        let mass = Mass::new(self.mass)?;
        let grid = QuadratureGrid::build(self.grid, mass)?;
        let unpack = |v: Option<Vec<[f64; 2]>>| -> Result<Option<AmplitudeRef>> {
            v.map(|v| {
                let values = v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
                SampledAmplitude::new(&grid, values).map(|a| Arc::new(a) as AmplitudeRef)
            })
            .transpose()
        };
        let state = PhysState::new(mass, unpack(self.plus)?, unpack(self.minus)?)?;
        let n2 = state.norm_sq(&grid)?;
        if (n2 - 1.0).abs() > STATE_FILE_NORM_TOL {
            return Err(invalid(format!("state file is not normalized: ⟨ψ|ψ⟩ = {n2}")));
        }
        Ok((PhysState { normalized: true, ..state }, grid))
    }
}
