//! Independent delta-shock path for two constant states under the
//! variational model's coefficients, from the mass/momentum/position ODE
//! system of the front. Used to cross-check atom positions.

use crate::numerics::{integrate_ode, NumericsError, OdePath, ToleranceProfile};

use super::Coefficients;

/// Shock path started from the small-time asymptotics at `t_start`.
#[derive(Debug, Clone)]
pub struct ShockOracle {
    path: OdePath,
    x0: f64,
    chi0: f64,
    rate0: f64,
}

/// Side state `(V, U)` of constant data `(v, u)` at `(x, t)`.
fn side(v: f64, u: f64, x: f64, c: &Coefficients) -> (f64, f64) {
    (v / c.a, (c.upkappa / c.s * u + c.alpha * x) / c.a)
}

impl ShockOracle {
    /// Shock from the jump `(vl, ul) | (vr, ur)` at `x0`, `ul > ur`.
    pub fn new(upkappa: f64, left: (f64, f64), right: (f64, f64), x0: f64, horizon: f64, tol: &ToleranceProfile) -> Result<Self, NumericsError> {
        let (vl, ul) = left;
        let (vr, ur) = right;
        let (sl, sr) = (vl.sqrt(), vr.sqrt());
        let chi0 = (sl * ul + sr * ur) / (sl + sr);
        let rate0 = vl * (ul - chi0) + vr * (chi0 - ur);
        let t0 = 1e-6_f64.min(horizon * 1e-3);
        let y0 = [x0 + chi0 * t0, rate0 * t0, rate0 * t0 * chi0];
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            let c = Coefficients::new(t, upkappa);
            let (pos, xi, p) = (y[0], y[1], y[2]);
            let chi = p / xi;
            let (vl_t, ul_t) = side(vl, ul, pos, &c);
            let (vr_t, ur_t) = side(vr, ur, pos, &c);
            let jv = vr_t - vl_t;
            let jvu = vr_t * ur_t - vl_t * ul_t;
            let jvuu = vr_t * ur_t * ur_t - vl_t * ul_t * ul_t;
            dy[0] = chi;
            dy[1] = chi * jv - jvu;
            dy[2] = chi * jvu - jvuu - (chi - pos / c.s) / c.s * xi;
        };
        let path = integrate_ode(rhs, t0, &y0, horizon, &tol.scaled(0.01))?;
        Ok(Self { path, x0, chi0, rate0 })
    }

    fn state(&self, t: f64) -> [f64; 3] {
        if t < self.path.t_start() {
            return [self.x0 + self.chi0 * t, self.rate0 * t, self.rate0 * t * self.chi0];
        }
        let mut out = [0.0; 3];
        self.path.eval_into(t, &mut out);
        out
    }

    pub fn position(&self, t: f64) -> f64 {
        self.state(t)[0]
    }

    pub fn mass(&self, t: f64) -> f64 {
        self.state(t)[1]
    }

    pub fn weight(&self, t: f64) -> f64 {
        let s = self.state(t);
        if s[1] > 0.0 {
            s[2] / s[1]
        } else {
            self.chi0
        }
    }
}
