//! Shared numerical kernels: an embedded Runge-Kutta integrator with dense
//! output, a bracketing root finder and adaptive Simpson quadrature.

use thiserror::Error;

/// Absolute/relative tolerances and an iteration cap shared by all kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceProfile {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_iter: 200,
        }
    }
}

impl ToleranceProfile {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    /// Same profile with both tolerances scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("right-hand side is not finite at t = {t}")]
    NonFiniteRhs { t: f64 },
    #[error("no sign change on [{a}, {b}]: g(a) = {ga}, g(b) = {gb}")]
    NoSignChange { a: f64, b: f64, ga: f64, gb: f64 },
    #[error("root finder did not converge in {0} iterations")]
    IterationLimit(usize),
    #[error("quadrature exceeded maximum recursion depth on [{a}, {b}]")]
    MaxDepthExceeded { a: f64, b: f64 },
    #[error("integrand is not finite at x = {x}")]
    NonFiniteIntegrand { x: f64 },
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Continuous extension coefficients.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Accepted steps of an ODE integration with a fourth-order continuous
/// extension on every step.
#[derive(Debug, Clone)]
pub struct OdePath {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    // Five interpolation vectors per step, flattened.
    dense: Vec<f64>,
}

impl OdePath {
    fn single(t0: f64, y0: &[f64]) -> Self {
        Self {
            dim: y0.len(),
            times: vec![t0],
            states: y0.to_vec(),
            dense: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Accepted step boundaries, including both endpoints.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// State at the `k`-th node.
    pub fn node_state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn final_state(&self) -> &[f64] {
        self.node_state(self.times.len() - 1)
    }

    /// Dense-output evaluation. Times outside the covered interval are
    /// clamped to the nearest endpoint.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            out.copy_from_slice(self.node_state(0));
            return;
        }
        if t >= self.times[n - 1] {
            out.copy_from_slice(self.node_state(n - 1));
            return;
        }
        let k = match self.times.binary_search_by(|s| s.partial_cmp(&t).unwrap()) {
            Ok(k) => {
                out.copy_from_slice(self.node_state(k));
                return;
            }
            Err(k) => k - 1,
        };
        let h = self.times[k + 1] - self.times[k];
        let theta = (t - self.times[k]) / h;
        let theta1 = 1.0 - theta;
        let d = self.dim;
        let base = k * 5 * d;
        for (i, o) in out.iter_mut().enumerate().take(d) {
            let r = |j: usize| self.dense[base + j * d + i];
            *o = r(0) + theta * (r(1) + theta1 * (r(2) + theta * (r(3) + theta1 * r(4))));
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        out
    }

    /// First component at `t`; convenient for scalar problems.
    pub fn eval_scalar(&self, t: f64) -> f64 {
        if self.dim == 1 {
            let mut out = [0.0];
            self.eval_into(t, &mut out);
            out[0]
        } else {
            self.eval(t)[0]
        }
    }
}

fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], tol: &ToleranceProfile) -> f64 {
    let mut acc = 0.0;
    for i in 0..err.len() {
        let sc = tol.abs_tol + tol.rel_tol * y0[i].abs().max(y1[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / err.len() as f64).sqrt()
}

fn check_finite(t: f64, v: &[f64]) -> Result<(), NumericsError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(NumericsError::NonFiniteRhs { t })
    }
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1 > t0` with adaptive
/// Dormand-Prince 5(4) steps. `rhs` writes the derivative into its third
/// argument.
pub fn integrate_ode<F>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    tol: &ToleranceProfile,
) -> Result<OdePath, NumericsError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let d = y0.len();
    let mut path = OdePath::single(t0, y0);
    let span = t1 - t0;
    if span <= 0.0 {
        return Ok(path);
    }
    let h_min = 1e-14 * span;

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; d];
    rhs(t, &y, &mut k1);
    check_finite(t, &k1)?;

    // Initial step guess from derivative magnitudes.
    let mut h = {
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..d {
            let sc = tol.abs_tol + tol.rel_tol * y[i].abs();
            d0 += (y[i] / sc).powi(2);
            d1 += (k1[i] / sc).powi(2);
        }
        let (d0, d1) = ((d0 / d as f64).sqrt(), (d1 / d as f64).sqrt());
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span.max(1e-6) } else { 0.01 * d0 / d1 };
        h0.min(span).max(h_min * 10.0)
    };

    let mut k2 = vec![0.0; d];
    let mut k3 = vec![0.0; d];
    let mut k4 = vec![0.0; d];
    let mut k5 = vec![0.0; d];
    let mut k6 = vec![0.0; d];
    let mut k7 = vec![0.0; d];
    let mut ys = vec![0.0; d];
    let mut y_new = vec![0.0; d];
    let mut err = vec![0.0; d];
    let mut last_rejected = false;

    while t < t1 {
        if t + h > t1 || (t1 - (t + h)) < h_min {
            h = t1 - t;
        }
        for i in 0..d {
            ys[i] = y[i] + h * A21 * k1[i];
        }
        rhs(t + C2 * h, &ys, &mut k2);
        for i in 0..d {
            ys[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(t + C3 * h, &ys, &mut k3);
        for i in 0..d {
            ys[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(t + C4 * h, &ys, &mut k4);
        for i in 0..d {
            ys[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(t + C5 * h, &ys, &mut k5);
        for i in 0..d {
            ys[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs(t + h, &ys, &mut k6);
        for i in 0..d {
            y_new[i] =
                y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        rhs(t + h, &y_new, &mut k7);
        let stages_finite = [&k2, &k3, &k4, &k5, &k6, &k7]
            .iter()
            .all(|k| k.iter().all(|x| x.is_finite()))
            && y_new.iter().all(|x| x.is_finite());

        let en = if stages_finite {
            for i in 0..d {
                err[i] = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
            }
            error_norm(&err, &y, &y_new, tol)
        } else {
            f64::INFINITY
        };

        if en <= 1.0 {
            // Accept: record dense output coefficients.
            let mut r = vec![0.0; 5 * d];
            for i in 0..d {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                r[i] = y[i];
                r[d + i] = ydiff;
                r[2 * d + i] = bspl;
                r[3 * d + i] = ydiff - h * k7[i] - bspl;
                r[4 * d + i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
            }
            path.dense.extend_from_slice(&r);
            t = if (t1 - (t + h)).abs() < h_min { t1 } else { t + h };
            y.copy_from_slice(&y_new);
            path.times.push(t);
            path.states.extend_from_slice(&y);
            std::mem::swap(&mut k1, &mut k7);
            let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            let fac = if last_rejected { fac.min(1.0) } else { fac };
            h *= fac;
            last_rejected = false;
        } else {
            if !stages_finite && h <= h_min {
                return Err(NumericsError::NonFiniteRhs { t });
            }
            let fac = if en.is_finite() { (0.9 * en.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
            h *= fac;
            last_rejected = true;
            if h < h_min {
                if !stages_finite {
                    return Err(NumericsError::NonFiniteRhs { t });
                }
                return Err(NumericsError::StepSizeUnderflow { t, h });
            }
        }
    }
    Ok(path)
}

/// Brent's bracketing root finder. Requires `g(a)` and `g(b)` of opposite
/// sign (or one of them zero); the returned root always lies in `[a, b]`.
pub fn find_root<G>(mut g: G, a: f64, b: f64, tol: &ToleranceProfile) -> Result<f64, NumericsError>
where
    G: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut fa = g(a);
    let mut fb = g(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(NumericsError::NoSignChange { a, b, ga: fa, gb: fb });
    }
    let lo = a;
    let hi = b;
    let xtol = tol.abs_tol.min(tol.rel_tol * (a.abs() + b.abs())).max(0.0);
    // Brent-Dekker iteration with b the current best estimate.
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..tol.max_iter.max(1) {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b.clamp(lo, hi));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        b = b.clamp(lo, hi);
        fb = g(b);
        if !fb.is_finite() {
            return Err(NumericsError::NoSignChange { a: lo, b: hi, ga: fa, gb: fb });
        }
    }
    Err(NumericsError::IterationLimit(tol.max_iter))
}

/// Right-hand side shared by a [`LazyPath`].
pub type SharedRhs = std::sync::Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

/// Solution of an ODE on `[0, inf)` that is integrated on demand in
/// fixed-length segments and memoized, so repeated queries cost one dense
/// output lookup.
pub struct LazyPath {
    rhs: SharedRhs,
    y0: Vec<f64>,
    seg_len: f64,
    tol: ToleranceProfile,
    segments: std::sync::RwLock<Vec<OdePath>>,
}

impl std::fmt::Debug for LazyPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LazyPath")
            .field("y0", &self.y0)
            .field("seg_len", &self.seg_len)
            .finish()
    }
}

impl LazyPath {
    pub fn new(rhs: SharedRhs, y0: Vec<f64>, seg_len: f64, tol: ToleranceProfile) -> Self {
        Self {
            rhs,
            y0,
            seg_len,
            tol,
            segments: std::sync::RwLock::new(Vec::new()),
        }
    }

    pub fn dim(&self) -> usize {
        self.y0.len()
    }

    /// Evaluates the solution at `t >= 0` (negative times clamp to 0).
    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<(), NumericsError> {
        let t = t.max(0.0);
        let idx = (t / self.seg_len).floor() as usize;
        {
            let segs = self.segments.read().unwrap();
            if let Some(seg) = segs.get(idx) {
                seg.eval_into(t, out);
                return Ok(());
            }
        }
        let mut segs = self.segments.write().unwrap();
        while segs.len() <= idx {
            let k = segs.len();
            let start = segs.last().map(|s| s.final_state().to_vec()).unwrap_or_else(|| self.y0.clone());
            let rhs = &self.rhs;
            let seg = integrate_ode(
                |t, y, dy| rhs(t, y, dy),
                k as f64 * self.seg_len,
                &start,
                (k + 1) as f64 * self.seg_len,
                &self.tol,
            )?;
            segs.push(seg);
        }
        segs[idx].eval_into(t, out);
        Ok(())
    }

    pub fn eval_scalar(&self, t: f64) -> Result<f64, NumericsError> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(t, &mut out)?;
        Ok(out[0])
    }
}

const MAX_QUAD_DEPTH: usize = 30;

/// Adaptive Simpson quadrature of `g` over `[a, b]`.
pub fn quad<G>(mut g: G, a: f64, b: f64, tol: &ToleranceProfile) -> Result<f64, NumericsError>
where
    G: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return quad(g, b, a, tol).map(|v| -v);
    }
    let mut eval = |x: f64| -> Result<f64, NumericsError> {
        let v = g(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumericsError::NonFiniteIntegrand { x })
        }
    };
    let fa = eval(a)?;
    let fb = eval(b)?;
    let m = 0.5 * (a + b);
    let fm = eval(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // A five-point pre-pass guards the relative target against a lucky
    // three-point estimate.
    let f1 = eval(0.5 * (a + m))?;
    let f3 = eval(0.5 * (m + b))?;
    let left = (m - a) / 6.0 * (fa + 4.0 * f1 + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * f3 + fb);
    let eps = tol.abs_tol.max(tol.rel_tol * (left + right).abs());
    if (left + right - whole).abs() <= 15.0 * eps {
        return Ok(left + right + (left + right - whole) / 15.0);
    }
    let l = simpson_rec(&mut eval, a, m, fa, f1, fm, left, 0.5 * eps, 1)?;
    let r = simpson_rec(&mut eval, m, b, fm, f3, fb, right, 0.5 * eps, 1)?;
    Ok(l + r)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<G>(
    g: &mut G,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: usize,
) -> Result<f64, NumericsError>
where
    G: FnMut(f64) -> Result<f64, NumericsError>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = g(lm)?;
    let frm = g(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_QUAD_DEPTH {
        return Err(NumericsError::MaxDepthExceeded { a, b });
    }
    let l = simpson_rec(g, a, m, fa, flm, fm, left, 0.5 * eps, depth + 1)?;
    let r = simpson_rec(g, m, b, fm, frm, fb, right, 0.5 * eps, depth + 1)?;
    Ok(l + r)
}
