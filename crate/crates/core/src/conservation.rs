//! Global mass and momentum of a tracked run, and the momentum balance
//! `M1' = kappa (u_a M0 - M1)` that drag imposes on them.

use thiserror::Error;

use crate::fronts::{TrackError, Trajectory};
use crate::model::{AirVelocity, Drag};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BalanceError {
    #[error("need at least 5 time samples, got {0}")]
    InsufficientSamples(usize),
    #[error("sample times must be strictly increasing")]
    UnsortedTimes,
    #[error("a front leaves the truncation box at t = {0}")]
    FrontOutsideBox(f64),
    #[error(transparent)]
    Track(#[from] TrackError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    pub times: Vec<f64>,
    pub m0: Vec<f64>,
    pub m1: Vec<f64>,
    pub kappa: Vec<f64>,
    pub air: Vec<f64>,
}

/// Samples `M0`, `M1` along a trajectory. Fails if a front is outside the
/// co-moving box at one of the times.
pub fn balance_report(traj: &Trajectory, times: &[f64]) -> Result<BalanceReport, BalanceError> {
    let coeff = traj.configurations[0].setup().coefficients.clone();
    let mut rep = BalanceReport {
        times: times.to_vec(),
        m0: Vec::with_capacity(times.len()),
        m1: Vec::with_capacity(times.len()),
        kappa: Vec::with_capacity(times.len()),
        air: Vec::with_capacity(times.len()),
    };
    for &t in times {
        let cfg = traj.at(t)?;
        if !cfg.inside_box(t) {
            return Err(BalanceError::FrontOutsideBox(t));
        }
        rep.m0.push(cfg.total_mass(t)?);
        rep.m1.push(cfg.total_momentum(t)?);
        rep.kappa.push(coeff.kappa(t));
        rep.air.push(coeff.air_velocity(t));
    }
    Ok(rep)
}

impl BalanceReport {
    /// Largest relative deviation of `M0` from its first value.
    pub fn mass_drift(&self) -> f64 {
        let m = self.m0.first().copied().unwrap_or(0.0);
        self.m0.iter().map(|x| (x - m).abs()).fold(0.0, f64::max) / m.abs().max(f64::MIN_POSITIVE)
    }

    /// `M1` predicted for constant drag `k` and air velocity `a`, when the
    /// run has those coefficients.
    pub fn constant_coefficient_momentum(&self, drag: &Drag, air: &AirVelocity) -> Option<Vec<f64>> {
        let k = match drag {
            Drag::Zero => 0.0,
            Drag::Constant(k) => *k,
            _ => return None,
        };
        let a = match air {
            AirVelocity::Zero => 0.0,
            AirVelocity::Constant(a) => *a,
            _ => return None,
        };
        let (t0, m0, m1) = (*self.times.first()?, self.m0[0], self.m1[0]);
        Some(self.times.iter().map(|&t| a * m0 + (m1 - a * m0) * (-k * (t - t0)).exp()).collect())
    }
}

/// Largest `|M1' - kappa (u_a M0 - M1)|` over interior samples, with `M1'`
/// from three-point differences on the (possibly uneven) sample times.
pub fn momentum_residual(rep: &BalanceReport) -> Result<f64, BalanceError> {
    let n = rep.times.len();
    if n < 5 {
        return Err(BalanceError::InsufficientSamples(n));
    }
    if rep.times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(BalanceError::UnsortedTimes);
    }
    let mut worst: f64 = 0.0;
    for i in 1..n - 1 {
        let (h0, h1) = (rep.times[i] - rep.times[i - 1], rep.times[i + 1] - rep.times[i]);
        let d = -h1 / (h0 * (h0 + h1)) * rep.m1[i - 1] + (h1 - h0) / (h0 * h1) * rep.m1[i] + h0 / (h1 * (h0 + h1)) * rep.m1[i + 1];
        let rhs = rep.kappa[i] * (rep.air[i] * rep.m0[i] - rep.m1[i]);
        worst = worst.max((d - rhs).abs());
    }
    Ok(worst)
}
