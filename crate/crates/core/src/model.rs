//! Flux functions, drag coefficients and the velocity orbits they generate.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::numerics::{LazyPath, NumericsError, SharedRhs, ToleranceProfile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("negative time t = {0}")]
    NegativeTime(f64),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum FluxKind {
    Identity,
    GeometricOptics,
    OddPower(u32),
    Traffic(f64),
    Custom { name: String, f: ScalarFn, df: ScalarFn },
}

/// A strictly increasing flux `f` with its derivative.
#[derive(Clone)]
pub struct FluxSpec {
    kind: FluxKind,
}

impl fmt::Debug for FluxSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FluxSpec({})", self.name())
    }
}

impl FluxSpec {
    pub fn identity() -> Self {
        Self { kind: FluxKind::Identity }
    }

    /// `u / sqrt(1 + u^2)`.
    pub fn geometric_optics() -> Self {
        Self { kind: FluxKind::GeometricOptics }
    }

    pub fn odd_power(k: u32) -> Result<Self, ModelError> {
        if k == 0 || k.is_multiple_of(2) {
            return Err(ModelError::InvalidParameter(format!(
                "odd_power exponent must be an odd positive integer, got {k}"
            )));
        }
        Ok(Self { kind: FluxKind::OddPower(k) })
    }

    /// `u / (a + u)`, increasing on `u > -a`.
    pub fn traffic(a: f64) -> Result<Self, ModelError> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(ModelError::InvalidParameter(format!("traffic parameter a must be positive, got {a}")));
        }
        Ok(Self { kind: FluxKind::Traffic(a) })
    }

    pub fn custom(name: impl Into<String>, f: ScalarFn, df: ScalarFn) -> Self {
        Self {
            kind: FluxKind::Custom { name: name.into(), f, df },
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            FluxKind::Identity => "identity".into(),
            FluxKind::GeometricOptics => "geometric_optics".into(),
            FluxKind::OddPower(k) => format!("odd_power({k})"),
            FluxKind::Traffic(a) => format!("traffic({a})"),
            FluxKind::Custom { name, .. } => name.clone(),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, FluxKind::Identity)
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match &self.kind {
            FluxKind::Identity => u,
            FluxKind::GeometricOptics => u / (1.0 + u * u).sqrt(),
            FluxKind::OddPower(k) => u.powi(*k as i32),
            FluxKind::Traffic(a) => {
                if u > -a {
                    u / (a + u)
                } else {
                    f64::NAN
                }
            }
            FluxKind::Custom { f, .. } => f(u),
        }
    }

    #[inline]
    pub fn derivative(&self, u: f64) -> f64 {
        match &self.kind {
            FluxKind::Identity => 1.0,
            FluxKind::GeometricOptics => (1.0 + u * u).powf(-1.5),
            FluxKind::OddPower(k) => *k as f64 * u.powi(*k as i32 - 1),
            FluxKind::Traffic(a) => {
                if u > -a {
                    a / ((a + u) * (a + u))
                } else {
                    f64::NAN
                }
            }
            FluxKind::Custom { df, .. } => df(u),
        }
    }

    /// Checks finiteness and strict increase on `[lo, hi]` at 10^4 sample
    /// points.
    pub fn check_monotone(&self, lo: f64, hi: f64) -> Result<(), ModelError> {
        if let FluxKind::Traffic(a) = self.kind {
            if lo <= -a {
                return Err(ModelError::InvalidParameter(format!(
                    "traffic flux with a = {a} is undefined at velocity {lo}"
                )));
            }
        }
        let n = 10_000;
        let mut prev = self.eval(lo);
        if !prev.is_finite() {
            return Err(ModelError::InvalidParameter(format!("flux is not finite at {lo}")));
        }
        for i in 1..=n {
            let u = lo + (hi - lo) * i as f64 / n as f64;
            let v = self.eval(u);
            if !v.is_finite() {
                return Err(ModelError::InvalidParameter(format!("flux is not finite at {u}")));
            }
            if hi > lo && v <= prev {
                return Err(ModelError::InvalidParameter(format!(
                    "flux {} is not strictly increasing near {u}",
                    self.name()
                )));
            }
            prev = v;
        }
        Ok(())
    }
}

/// Looks up a built-in flux by name. `params` carries the exponent for
/// `odd_power` and `a` for `traffic`.
pub fn builtin_flux(name: &str, params: &[f64]) -> Result<FluxSpec, ModelError> {
    let first = |what: &str| {
        params
            .first()
            .copied()
            .ok_or_else(|| ModelError::InvalidParameter(format!("{name} needs parameter {what}")))
    };
    match name {
        "identity" => Ok(FluxSpec::identity()),
        "geometric_optics" => Ok(FluxSpec::geometric_optics()),
        "odd_power" => {
            let k = first("k")?;
            if k.fract() != 0.0 || k < 1.0 {
                return Err(ModelError::InvalidParameter(format!("odd_power exponent {k} is not an integer")));
            }
            FluxSpec::odd_power(k as u32)
        }
        "traffic" => FluxSpec::traffic(first("a")?),
        other => Err(ModelError::UnknownModel(other.to_string())),
    }
}

/// Drag coefficient `kappa(t) >= 0`.
#[derive(Clone)]
pub enum Drag {
    Zero,
    Constant(f64),
    /// `1 / (t + upkappa)`.
    Algebraic { upkappa: f64 },
    Custom(ScalarFn),
}

/// Air velocity seen by the particles, a function of time only.
#[derive(Clone)]
pub enum AirVelocity {
    Zero,
    Constant(f64),
    Custom(ScalarFn),
}

impl fmt::Debug for Drag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Drag::Zero => write!(f, "Zero"),
            Drag::Constant(k) => write!(f, "Constant({k})"),
            Drag::Algebraic { upkappa } => write!(f, "Algebraic({upkappa})"),
            Drag::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl fmt::Debug for AirVelocity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AirVelocity::Zero => write!(f, "Zero"),
            AirVelocity::Constant(a) => write!(f, "Constant({a})"),
            AirVelocity::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Drag {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Drag::Zero => 0.0,
            Drag::Constant(k) => *k,
            Drag::Algebraic { upkappa } => 1.0 / (t + upkappa),
            Drag::Custom(g) => g(t),
        }
    }
}

impl AirVelocity {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            AirVelocity::Zero => 0.0,
            AirVelocity::Constant(a) => *a,
            AirVelocity::Custom(g) => g(t),
        }
    }
}

/// Drag and air velocity together with the integrals
/// `K(t) = int_0^t kappa` and `Phi(t) = int_0^t kappa u_a e^K`.
///
/// Closed forms are used when both coefficients are of a known shape;
/// anything else is integrated lazily on unit segments and memoized.
pub struct CoefficientSpec {
    drag: Drag,
    air: AirVelocity,
    cache: Option<LazyPath>,
}

impl fmt::Debug for CoefficientSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSpec")
            .field("drag", &self.drag)
            .field("air", &self.air)
            .finish()
    }
}

impl CoefficientSpec {
    pub fn new(drag: Drag, air: AirVelocity) -> Result<Self, ModelError> {
        match &drag {
            Drag::Constant(k) if !(k.is_finite() && *k >= 0.0) => {
                return Err(ModelError::InvalidParameter(format!("drag must be nonnegative, got {k}")))
            }
            Drag::Algebraic { upkappa } if !(upkappa.is_finite() && *upkappa > 0.0) => {
                return Err(ModelError::InvalidParameter(format!(
                    "algebraic drag needs a positive shift, got {upkappa}"
                )))
            }
            _ => {}
        }
        if let AirVelocity::Constant(a) = air {
            if !a.is_finite() {
                return Err(ModelError::InvalidParameter("air velocity must be finite".into()));
            }
        }
        let closed = !matches!(drag, Drag::Custom(_)) && !matches!(air, AirVelocity::Custom(_))
            || matches!(drag, Drag::Zero);
        let cache = if closed {
            None
        } else {
            let (d, a) = (drag.clone(), air.clone());
            let rhs: SharedRhs = Arc::new(move |t, y, dy| {
                let k = d.eval(t);
                dy[0] = k;
                dy[1] = k * a.eval(t) * y[0].exp();
            });
            Some(LazyPath::new(rhs, vec![0.0, 0.0], 1.0, ToleranceProfile::new(1e-13, 1e-12)))
        };
        Ok(Self { drag, air, cache })
    }

    /// `kappa = 0`, pressureless dynamics.
    pub fn zero() -> Self {
        Self {
            drag: Drag::Zero,
            air: AirVelocity::Zero,
            cache: None,
        }
    }

    pub fn constant(kappa: f64, air: f64) -> Result<Self, ModelError> {
        Self::new(Drag::Constant(kappa), AirVelocity::Constant(air))
    }

    pub fn drag(&self) -> &Drag {
        &self.drag
    }

    pub fn air(&self) -> &AirVelocity {
        &self.air
    }

    pub fn is_zero(&self) -> bool {
        match self.drag {
            Drag::Zero => true,
            Drag::Constant(k) => k == 0.0,
            _ => false,
        }
    }

    pub fn kappa(&self, t: f64) -> f64 {
        self.drag.eval(t)
    }

    pub fn air_velocity(&self, t: f64) -> f64 {
        self.air.eval(t)
    }

    /// `(K(t), Phi(t))` for `t >= 0`.
    pub fn integrals(&self, t: f64) -> (f64, f64) {
        if let Some(cache) = &self.cache {
            let mut y = [0.0; 2];
            return match cache.eval_into(t, &mut y) {
                Ok(()) => (y[0], y[1]),
                Err(_) => (f64::NAN, f64::NAN),
            };
        }
        let a = match self.air {
            AirVelocity::Zero => 0.0,
            AirVelocity::Constant(a) => a,
            AirVelocity::Custom(_) => 0.0,
        };
        match self.drag {
            Drag::Zero => (0.0, 0.0),
            Drag::Constant(k) => (k * t, a * (k * t).exp_m1()),
            Drag::Algebraic { upkappa } => ((t / upkappa).ln_1p(), a * t / upkappa),
            Drag::Custom(_) => unreachable!("custom drag always has a cache"),
        }
    }
}

fn check_time(t: f64) -> Result<(), ModelError> {
    if t < 0.0 || t.is_nan() {
        Err(ModelError::NegativeTime(t))
    } else {
        Ok(())
    }
}

/// `K(t) = int_0^t kappa`.
pub fn kappa_integral(coeff: &CoefficientSpec, t: f64) -> Result<f64, ModelError> {
    check_time(t)?;
    Ok(coeff.integrals(t).0)
}

/// `Phi(t) = int_0^t kappa u_a e^K`.
pub fn forcing_integral(coeff: &CoefficientSpec, t: f64) -> Result<f64, ModelError> {
    check_time(t)?;
    Ok(coeff.integrals(t).1)
}

/// Velocity at time `t` of a particle that started with velocity `u0`.
pub fn evolve_velocity(u0: f64, coeff: &CoefficientSpec, t: f64) -> Result<f64, ModelError> {
    check_time(t)?;
    let (k, phi) = coeff.integrals(t);
    Ok((-k).exp() * (phi + u0))
}

/// Solution of `u' = kappa (u_a - u)`, parametrized by its value at `t = 0`.
#[derive(Clone, Debug)]
pub struct VelocityOrbit {
    u0: f64,
    coeff: Arc<CoefficientSpec>,
}

impl VelocityOrbit {
    pub fn new(u0: f64, coeff: Arc<CoefficientSpec>) -> Self {
        Self { u0, coeff }
    }

    /// The orbit taking value `u` at time `s`.
    pub fn through(u: f64, s: f64, coeff: Arc<CoefficientSpec>) -> Result<Self, ModelError> {
        check_time(s)?;
        let (k, phi) = coeff.integrals(s);
        Ok(Self::new(k.exp() * u - phi, coeff))
    }

    pub fn initial(&self) -> f64 {
        self.u0
    }

    pub fn coefficients(&self) -> &Arc<CoefficientSpec> {
        &self.coeff
    }

    /// `U(t)`; negative times are clamped to zero.
    #[inline]
    pub fn velocity(&self, t: f64) -> f64 {
        if self.coeff.is_zero() {
            return self.u0;
        }
        let (k, phi) = self.coeff.integrals(t.max(0.0));
        (-k).exp() * (phi + self.u0)
    }
}

/// A velocity orbit together with the path `x(t) = int_0^t f(U)` of a
/// characteristic moving with it.
#[derive(Clone)]
pub struct CharacteristicPath {
    orbit: VelocityOrbit,
    flux: FluxSpec,
    cache: Option<Arc<LazyPath>>,
}

impl fmt::Debug for CharacteristicPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CharacteristicPath")
            .field("u0", &self.orbit.u0)
            .field("flux", &self.flux)
            .finish()
    }
}

impl CharacteristicPath {
    pub fn new(orbit: VelocityOrbit, flux: FluxSpec) -> Self {
        let closed = orbit.coeff.is_zero()
            || (flux.is_identity()
                && matches!(orbit.coeff.drag, Drag::Constant(_) | Drag::Algebraic { .. })
                && !matches!(orbit.coeff.air, AirVelocity::Custom(_)));
        let cache = if closed {
            None
        } else {
            let (o, fl) = (orbit.clone(), flux.clone());
            let rhs: SharedRhs = Arc::new(move |t, _y, dy| dy[0] = fl.eval(o.velocity(t)));
            Some(Arc::new(LazyPath::new(rhs, vec![0.0], 1.0, ToleranceProfile::new(1e-13, 1e-12))))
        };
        Self { orbit, flux, cache }
    }

    pub fn orbit(&self) -> &VelocityOrbit {
        &self.orbit
    }

    pub fn flux(&self) -> &FluxSpec {
        &self.flux
    }

    pub fn coefficients(&self) -> &Arc<CoefficientSpec> {
        &self.orbit.coeff
    }

    #[inline]
    pub fn velocity(&self, t: f64) -> f64 {
        self.orbit.velocity(t)
    }

    #[inline]
    pub fn speed(&self, t: f64) -> f64 {
        self.flux.eval(self.orbit.velocity(t))
    }

    /// `int_0^t f(U(s)) ds`.
    pub fn displacement(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        if let Some(cache) = &self.cache {
            return cache.eval_scalar(t).unwrap_or(f64::NAN);
        }
        let u0 = self.orbit.u0;
        let coeff = &self.orbit.coeff;
        if coeff.is_zero() {
            return self.flux.eval(u0) * t;
        }
        let a = match coeff.air {
            AirVelocity::Constant(a) => a,
            _ => 0.0,
        };
        match coeff.drag {
            // U = a + (u0 - a) e^{-kt}
            Drag::Constant(k) => a * t - (u0 - a) * (-k * t).exp_m1() / k,
            // U = (a t + upkappa u0) / (t + upkappa)
            Drag::Algebraic { upkappa } => {
                a * t + upkappa * (u0 - a) * (t / upkappa).ln_1p()
            }
            _ => unreachable!("closed form only for known coefficient shapes"),
        }
    }
}

/// Point values of the initial state `(v, u, w)`; `w` is the second
/// phase's density and vanishes for single-phase data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointState {
    pub v: f64,
    pub u: f64,
    pub w: f64,
}

impl PointState {
    pub fn new(v: f64, u: f64) -> Self {
        Self { v, u, w: 0.0 }
    }

    pub fn two_phase(v: f64, w: f64, u: f64) -> Self {
        Self { v, u, w }
    }
}

/// Initial data `x -> (v0, u0, w0)`.
pub trait InitialProfile: Send + Sync {
    fn state(&self, x: f64) -> PointState;

    /// Points where the data may jump.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Left and right limits at `x`. The default probes a small offset,
    /// which is exact for data that is continuous away from its breakpoints.
    fn limits(&self, x: f64) -> (PointState, PointState) {
        let d = 1e-11 * (1.0 + x.abs());
        (self.state(x - d), self.state(x))
    }
}

/// Piecewise constant data: `left` for `x < pieces[0].0`, then each piece
/// holds from its start point up to the next one.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    pub left: PointState,
    pub pieces: Vec<(f64, PointState)>,
}

impl PiecewiseConstant {
    pub fn new(left: PointState, pieces: Vec<(f64, PointState)>) -> Result<Self, ModelError> {
        for w in pieces.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(ModelError::InvalidParameter("piece start points must increase".into()));
            }
        }
        Ok(Self { left, pieces })
    }

    /// Two constant states separated at `x0`.
    pub fn riemann(x0: f64, left: PointState, right: PointState) -> Self {
        Self {
            left,
            pieces: vec![(x0, right)],
        }
    }
}

impl InitialProfile for PiecewiseConstant {
    fn state(&self, x: f64) -> PointState {
        let idx = self.pieces.partition_point(|(s, _)| *s <= x);
        if idx == 0 {
            self.left
        } else {
            self.pieces[idx - 1].1
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().map(|(s, _)| *s).collect()
    }

    fn limits(&self, x: f64) -> (PointState, PointState) {
        let idx = self.pieces.partition_point(|(s, _)| *s < x);
        let left = if idx == 0 { self.left } else { self.pieces[idx - 1].1 };
        (left, self.state(x))
    }
}

/// Linear interpolation between samples, constant beyond the ends.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    states: Vec<PointState>,
}

impl PiecewiseLinear {
    pub fn new(xs: Vec<f64>, states: Vec<PointState>) -> Result<Self, ModelError> {
        if xs.is_empty() || xs.len() != states.len() {
            return Err(ModelError::InvalidParameter("sample arrays must be nonempty and of equal length".into()));
        }
        for w in xs.windows(2) {
            if !(w[0] < w[1]) {
                return Err(ModelError::InvalidParameter("sample abscissae must increase".into()));
            }
        }
        Ok(Self { xs, states })
    }
}

impl InitialProfile for PiecewiseLinear {
    fn state(&self, x: f64) -> PointState {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.states[0];
        }
        if x >= self.xs[n - 1] {
            return self.states[n - 1];
        }
        let k = self.xs.partition_point(|s| *s <= x) - 1;
        let th = (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
        let (a, b) = (self.states[k], self.states[k + 1]);
        PointState {
            v: a.v + th * (b.v - a.v),
            u: a.u + th * (b.u - a.u),
            w: a.w + th * (b.w - a.w),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.xs.clone()
    }

    fn limits(&self, x: f64) -> (PointState, PointState) {
        let s = self.state(x);
        (s, s)
    }
}

/// Data given by closures, with optional declared jump locations.
#[derive(Clone)]
pub struct FunctionProfile {
    density: ScalarFn,
    velocity: ScalarFn,
    second: Option<ScalarFn>,
    breaks: Vec<f64>,
}

impl FunctionProfile {
    pub fn new(density: ScalarFn, velocity: ScalarFn) -> Self {
        Self {
            density,
            velocity,
            second: None,
            breaks: Vec::new(),
        }
    }

    pub fn with_second_phase(mut self, w: ScalarFn) -> Self {
        self.second = Some(w);
        self
    }

    pub fn with_breaks(mut self, breaks: Vec<f64>) -> Self {
        self.breaks = breaks;
        self
    }
}

impl InitialProfile for FunctionProfile {
    fn state(&self, x: f64) -> PointState {
        PointState {
            v: (self.density)(x),
            u: (self.velocity)(x),
            w: self.second.as_ref().map_or(0.0, |w| w(x)),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breaks.clone()
    }
}
