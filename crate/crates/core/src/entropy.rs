//! Entropy checks for delta fronts with the pair `eta = v f(u)^2 / 2`,
//! `q = v f(u)^3 / 2`: the dissipation residual along a front, the
//! overcompressibility test it should agree with, and a convexity test for
//! `f^2`.

use std::sync::Arc;

use thiserror::Error;

use crate::model::{CoefficientSpec, FluxSpec, ScalarFn};
use crate::numerics::ToleranceProfile;
use crate::riemann::{DeltaFront, Side};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntropyError {
    #[error("not enough samples around t = {t} to difference (birth {birth}, horizon {horizon})")]
    InsufficientSamples { t: f64, birth: f64, horizon: f64 },
}

/// What the entropy checks need from a front.
pub trait FrontTrace {
    fn mass(&self, t: f64) -> f64;
    fn weight(&self, t: f64) -> f64;
    fn left(&self) -> &Side;
    fn right(&self) -> &Side;
    fn flux(&self) -> &FluxSpec;
    fn coefficients(&self) -> &Arc<CoefficientSpec>;
    /// Times at which the front was resolved; sets the difference step.
    fn mesh(&self) -> &[f64];
    fn birth_time(&self) -> f64;
    fn horizon(&self) -> f64;
}

impl FrontTrace for DeltaFront {
    fn mass(&self, t: f64) -> f64 {
        DeltaFront::mass(self, t)
    }
    fn weight(&self, t: f64) -> f64 {
        DeltaFront::weight(self, t)
    }
    fn left(&self) -> &Side {
        DeltaFront::left(self)
    }
    fn right(&self) -> &Side {
        DeltaFront::right(self)
    }
    fn flux(&self) -> &FluxSpec {
        DeltaFront::flux(self)
    }
    fn coefficients(&self) -> &Arc<CoefficientSpec> {
        DeltaFront::coefficients(self)
    }
    fn mesh(&self) -> &[f64] {
        DeltaFront::mesh(self)
    }
    fn birth_time(&self) -> f64 {
        DeltaFront::birth_time(self)
    }
    fn horizon(&self) -> f64 {
        DeltaFront::horizon(self)
    }
}

/// Front with hand-specified mass and weight, for building cases the
/// solvers never produce.
#[derive(Clone)]
pub struct PrescribedFront {
    pub mass: ScalarFn,
    pub weight: ScalarFn,
    pub left: Side,
    pub right: Side,
    pub birth_time: f64,
    pub horizon: f64,
    mesh: Vec<f64>,
}

impl PrescribedFront {
    pub fn new(mass: ScalarFn, weight: ScalarFn, left: Side, right: Side, birth_time: f64, horizon: f64) -> Self {
        let n = ((horizon - birth_time) * 64.0).ceil().max(4.0) as usize;
        let mesh = (0..=n).map(|k| birth_time + (horizon - birth_time) * k as f64 / n as f64).collect();
        Self {
            mass,
            weight,
            left,
            right,
            birth_time,
            horizon,
            mesh,
        }
    }
}

impl FrontTrace for PrescribedFront {
    fn mass(&self, t: f64) -> f64 {
        (self.mass)(t)
    }
    fn weight(&self, t: f64) -> f64 {
        (self.weight)(t)
    }
    fn left(&self) -> &Side {
        &self.left
    }
    fn right(&self) -> &Side {
        &self.right
    }
    fn flux(&self) -> &FluxSpec {
        self.left.path.flux()
    }
    fn coefficients(&self) -> &Arc<CoefficientSpec> {
        self.left.path.coefficients()
    }
    fn mesh(&self) -> &[f64] {
        &self.mesh
    }
    fn birth_time(&self) -> f64 {
        self.birth_time
    }
    fn horizon(&self) -> f64 {
        self.horizon
    }
}

/// Ordering `U_r < chi < U_l` and `f(U_r) < f(chi) < f(U_l)`, allowing
/// `abs_tol` of slack. Vacuum sides impose nothing.
pub fn overcompressive(front: &dyn FrontTrace, t: f64, tol: &ToleranceProfile) -> bool {
    let f = front.flux();
    let chi = front.weight(t);
    let fc = f.eval(chi);
    let eps = tol.abs_tol;
    let left = front.left();
    let right = front.right();
    let left_ok = left.density == 0.0 || {
        let ul = left.velocity(t);
        chi < ul + eps && fc < f.eval(ul) + eps
    };
    let right_ok = right.density == 0.0 || {
        let ur = right.velocity(t);
        ur < chi + eps && f.eval(ur) < fc + eps
    };
    chi.is_finite() && left_ok && right_ok
}

/// Residual of the dissipation inequality at `t` and an estimate of its
/// discretisation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSample {
    pub t: f64,
    pub residual: f64,
    pub error_estimate: f64,
}

impl ResidualSample {
    pub fn dissipative(&self) -> bool {
        self.residual <= 10.0 * self.error_estimate
    }
}

fn step_at(front: &dyn FrontTrace, t: f64) -> Result<f64, EntropyError> {
    let mesh = front.mesh();
    let k = mesh.partition_point(|&s| s <= t);
    let mut h = f64::INFINITY;
    if k > 0 && k < mesh.len() {
        h = mesh[k] - mesh[k - 1];
    }
    if k >= 2 {
        h = h.min(mesh[k - 1] - mesh[k - 2]);
    }
    if !h.is_finite() {
        h = 1.0 / 64.0;
    }
    // Both stencils (h and 2h) must stay inside the life of the front.
    let room = (t - front.birth_time()).min(front.horizon() - t) / 2.0;
    let h = h.min(room);
    if !(h > 1e-9 * (1.0 + t.abs())) || mesh.len() < 3 {
        return Err(EntropyError::InsufficientSamples {
            t,
            birth: front.birth_time(),
            horizon: front.horizon(),
        });
    }
    Ok(h)
}

/// `2 xi f f'(chi) (chi' + kappa (chi - u_a)) + xi' f(chi)^2 - (f(chi) [v f(U)^2] - [v f(U)^3])`,
/// brackets taken right minus left.
/// Nonpositive for dissipative fronts.
pub fn dissipativity_residual(front: &dyn FrontTrace, t: f64) -> Result<ResidualSample, EntropyError> {
    let h = step_at(front, t)?;
    let d = |g: &dyn Fn(f64) -> f64, h: f64| (g(t + h) - g(t - h)) / (2.0 * h);
    let mass = |s: f64| front.mass(s);
    let weight = |s: f64| front.weight(s);
    let (dchi, dchi2) = (d(&weight, h), d(&weight, 2.0 * h));
    let (dxi, dxi2) = (d(&mass, h), d(&mass, 2.0 * h));

    let f = front.flux();
    let coeff = front.coefficients();
    let (xi, chi) = (front.mass(t), front.weight(t));
    let (fc, dfc) = (f.eval(chi), f.derivative(chi));
    let (kappa, air) = (coeff.kappa(t), coeff.air_velocity(t));
    let side = |s: &Side, p: i32| {
        if s.density == 0.0 {
            0.0
        } else {
            s.density * f.eval(s.velocity(t)).powi(p)
        }
    };
    let (l, r) = (front.left(), front.right());
    let jump2 = side(r, 2) - side(l, 2);
    let jump3 = side(r, 3) - side(l, 3);

    let a = 2.0 * xi * fc * dfc;
    let b = fc * fc;
    let residual = a * (dchi + kappa * (chi - air)) + dxi * b - (fc * jump2 - jump3);
    let scale = a.abs() * (dchi.abs() + (kappa * (chi - air)).abs()) + b * dxi.abs() + (fc * jump2).abs() + jump3.abs();
    let error_estimate = a.abs() * (dchi - dchi2).abs() + b * (dxi - dxi2).abs() + 1e-10 * (1.0 + scale);
    Ok(ResidualSample {
        t,
        residual,
        error_estimate,
    })
}

/// Whether `f^2` is convex on `[lo, hi]`: normalised second differences on
/// 1000 points must not drop below `-abs_tol`.
pub fn f_squared_convex(flux: &FluxSpec, lo: f64, hi: f64, tol: &ToleranceProfile) -> bool {
    let n = 1000;
    let h = (hi - lo) / (n - 1) as f64;
    if !(h > 0.0) {
        return true;
    }
    let g = |x: f64| flux.eval(x).powi(2);
    (1..n - 1).all(|k| {
        let x = lo + h * k as f64;
        (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h) >= -tol.abs_tol
    })
}

/// Residuals and overcompressibility flags along one front.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub samples: Vec<ResidualSample>,
    pub overcompressive: Vec<bool>,
    pub f_squared_convex: bool,
}

impl EntropyReport {
    pub fn dissipative(&self) -> Vec<bool> {
        self.samples.iter().map(|s| s.dissipative()).collect()
    }

    /// Times where the two checks disagree.
    pub fn disagreements(&self) -> Vec<f64> {
        self.samples
            .iter()
            .zip(&self.overcompressive)
            .filter(|(s, &o)| s.dissipative() != o)
            .map(|(s, _)| s.t)
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.samples.iter().map(|s| s.residual).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evaluates both checks at `times`; convexity of `f^2` is tested on the
/// range of velocities the front sees.
pub fn entropy_report(front: &dyn FrontTrace, times: &[f64], tol: &ToleranceProfile) -> Result<EntropyReport, EntropyError> {
    let mut samples = Vec::with_capacity(times.len());
    let mut flags = Vec::with_capacity(times.len());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &t in times {
        samples.push(dissipativity_residual(front, t)?);
        flags.push(overcompressive(front, t, tol));
        for u in [front.left().velocity(t), front.right().velocity(t), front.weight(t)] {
            lo = lo.min(u);
            hi = hi.max(u);
        }
    }
    Ok(EntropyReport {
        samples,
        overcompressive: flags,
        f_squared_convex: f_squared_convex(front.flux(), lo, hi, tol),
    })
}
