//! Variational solver for identity flux with drag `1/(t + k)` towards the
//! air velocity `x/(t + k)`. The solution at `(x, t)` comes from the
//! leftmost and rightmost minimizers over `y` of a potential built from
//! prefix integrals of the initial data.

pub mod oracle;

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use thiserror::Error;

use crate::model::InitialProfile;
use crate::numerics::{find_root, ToleranceProfile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GvpError {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("y = {y} outside the support [{lo}, {hi}]")]
    OutOfSupport { y: f64, lo: f64, hi: f64 },
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("potential has no interior minimum at x = {x}, t = {t}; widen the support")]
    UnboundedBelow { x: f64, t: f64 },
    #[error("test function support leaves the region resolved by the data: {0}")]
    SupportEscape(String),
}

const GL_NODES: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// Prefix integrals from 0 of `v0 * [1, y, u0, y^2, y u0, u0^2]`.
const P0: usize = 0;
const P1: usize = 1;
const PU: usize = 2;
const P2: usize = 3;
const PYU: usize = 4;
const PUU: usize = 5;
type Row = [f64; 6];

fn integrand(y: f64, v: f64, u: f64) -> Row {
    [v, y * v, u * v, y * y * v, y * u * v, u * u * v]
}

/// Time-dependent coefficients with `s = t + k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub t: f64,
    pub upkappa: f64,
    pub s: f64,
    /// Forward map `X(y) = a y + b u0(y)`.
    pub a: f64,
    pub b: f64,
    /// Carried velocity `alpha y + beta u0(y)`.
    pub alpha: f64,
    pub beta: f64,
    /// Slope of `u` in `x` on rarefactions; also the one-sided bound.
    pub slope: f64,
}

impl Coefficients {
    pub fn new(t: f64, upkappa: f64) -> Self {
        let k = upkappa;
        let s = t + k;
        // t (2k + t) = s^2 - k^2 without the cancellation.
        let tt = t * (2.0 * k + t);
        Self {
            t,
            upkappa,
            s,
            a: 0.5 * (s / k + k / s),
            b: tt / (2.0 * s),
            alpha: tt / (2.0 * k * s * s),
            beta: 0.5 * (1.0 + (k / s).powi(2)),
            slope: (s * s + k * k) / (s * tt),
        }
    }

    pub fn forward(&self, y: f64, u0: f64) -> f64 {
        self.a * y + self.b * u0
    }

    pub fn carried_velocity(&self, y: f64, u0: f64) -> f64 {
        self.alpha * y + self.beta * u0
    }
}

/// Initial data tabulated for the potential.
#[derive(Clone)]
pub struct GvpField {
    profile: Arc<dyn InitialProfile>,
    upkappa: f64,
    nodes: Vec<f64>,
    values: Vec<Row>,
    /// Integrand at the left and right end of each cell, one-sided.
    slopes: Vec<(Row, Row)>,
}

impl std::fmt::Debug for GvpField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GvpField")
            .field("upkappa", &self.upkappa)
            .field("support", &self.support())
            .field("nodes", &self.nodes.len())
            .finish()
    }
}

impl GvpField {
    /// Tabulates `profile` on `[lo, hi]` with `cells` uniform cells refined
    /// at the data's breakpoints. The support must contain 0.
    pub fn new(profile: Arc<dyn InitialProfile>, upkappa: f64, support: (f64, f64), cells: usize) -> Result<Self, GvpError> {
        let (lo, hi) = support;
        if !(upkappa > 0.0 && upkappa.is_finite()) {
            return Err(GvpError::InvalidField(format!("upkappa must be positive, got {upkappa}")));
        }
        if !(lo < 0.0 && 0.0 < hi && hi.is_finite() && lo.is_finite()) {
            return Err(GvpError::InvalidField(format!("support [{lo}, {hi}] must contain 0 in its interior")));
        }
        if cells < 4 {
            return Err(GvpError::InvalidField("need at least 4 cells".into()));
        }
        let h = (hi - lo) / cells as f64;
        let mut fixed: Vec<f64> = profile.breakpoints().into_iter().filter(|&b| lo < b && b < hi).collect();
        fixed.push(0.0);
        fixed.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut nodes: Vec<f64> = (0..=cells)
            .map(|i| if i == cells { hi } else { lo + h * i as f64 })
            .filter(|&y| {
                let k = fixed.partition_point(|&b| b < y);
                let near = |j: usize| fixed.get(j).is_some_and(|&b| (b - y).abs() < 1e-9 * h);
                y == lo || y == hi || !(near(k) || (k > 0 && near(k - 1)))
            })
            .collect();
        nodes.extend(fixed);
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        nodes.dedup();

        let mut cell_sums = Vec::with_capacity(nodes.len() - 1);
        let mut slopes = Vec::with_capacity(nodes.len() - 1);
        for w in nodes.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            let mut sum = [0.0; 6];
            for (z, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
                let y = mid + half * z;
                let st = profile.state(y);
                if !(st.v > 0.0 && st.v.is_finite() && st.u.is_finite()) {
                    return Err(GvpError::InvalidField(format!("density must be positive, v0({y}) = {}", st.v)));
                }
                let row = integrand(y, st.v, st.u);
                for k in 0..6 {
                    sum[k] += wt * half * row[k];
                }
            }
            cell_sums.push(sum);
            let left = profile.limits(a).1;
            let right = profile.limits(b).0;
            slopes.push((integrand(a, left.v, left.u), integrand(b, right.v, right.u)));
        }
        let zero = nodes.iter().position(|&y| y == 0.0).expect("0 is a node");
        let mut values = vec![[0.0; 6]; nodes.len()];
        for j in zero + 1..nodes.len() {
            for k in 0..6 {
                values[j][k] = values[j - 1][k] + cell_sums[j - 1][k];
            }
        }
        for j in (0..zero).rev() {
            for k in 0..6 {
                values[j][k] = values[j + 1][k] - cell_sums[j][k];
            }
        }
        Ok(Self {
            profile,
            upkappa,
            nodes,
            values,
            slopes,
        })
    }

    pub fn upkappa(&self) -> f64 {
        self.upkappa
    }

    pub fn support(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn profile(&self) -> &Arc<dyn InitialProfile> {
        &self.profile
    }

    fn check_support(&self, y: f64) -> Result<(), GvpError> {
        let (lo, hi) = self.support();
        if y < lo || y > hi || y.is_nan() {
            return Err(GvpError::OutOfSupport { y, lo, hi });
        }
        Ok(())
    }

    /// All six prefix integrals at `y` by cubic Hermite interpolation.
    fn tables(&self, y: f64) -> Row {
        let n = self.nodes.len();
        let k = self.nodes.partition_point(|&z| z <= y);
        if k == 0 {
            return self.values[0];
        }
        if k == n {
            return self.values[n - 1];
        }
        let j = k - 1;
        let (y0, y1) = (self.nodes[j], self.nodes[j + 1]);
        if y == y0 {
            return self.values[j];
        }
        let h = y1 - y0;
        let th = (y - y0) / h;
        let (th2, th3) = (th * th, th * th * th);
        let (h00, h10, h01, h11) = (2.0 * th3 - 3.0 * th2 + 1.0, th3 - 2.0 * th2 + th, -2.0 * th3 + 3.0 * th2, th3 - th2);
        let (d0, d1) = &self.slopes[j];
        let mut out = [0.0; 6];
        for q in 0..6 {
            out[q] = h00 * self.values[j][q] + h10 * h * d0[q] + h01 * self.values[j + 1][q] + h11 * h * d1[q];
        }
        out
    }

    /// `(P0, P1, Pu)` at `y`.
    pub fn prefix(&self, y: f64) -> Result<(f64, f64, f64), GvpError> {
        self.check_support(y)?;
        let r = self.tables(y);
        Ok((r[P0], r[P1], r[PU]))
    }

    /// Potential `F(y, x, t) = a P1 + b Pu - x P0`.
    pub fn potential(&self, y: f64, x: f64, t: f64) -> Result<f64, GvpError> {
        if !(t >= 0.0) {
            return Err(GvpError::NonPositiveTime(t));
        }
        self.check_support(y)?;
        let c = Coefficients::new(t, self.upkappa);
        let r = self.tables(y);
        Ok(c.a * r[P1] + c.b * r[PU] - x * r[P0])
    }

    /// Precomputes what every query at time `t` shares.
    pub fn snapshot(&self, t: f64) -> Result<GvpSnapshot<'_>, GvpError> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(GvpError::NonPositiveTime(t));
        }
        let c = Coefficients::new(t, self.upkappa);
        let pts: Vec<(f64, f64)> = self.values.iter().map(|r| (r[P0], c.a * r[P1] + c.b * r[PU])).collect();
        let mut hull: Vec<usize> = Vec::with_capacity(pts.len());
        for j in 0..pts.len() {
            while hull.len() >= 2 {
                let (o, a) = (pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]]);
                let b = pts[j];
                let cross = (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
                if cross < 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(j);
        }
        let slopes = hull
            .windows(2)
            .map(|w| (pts[w[1]].1 - pts[w[0]].1) / (pts[w[1]].0 - pts[w[0]].0))
            .collect();
        Ok(GvpSnapshot {
            field: self,
            coeff: c,
            hull,
            slopes,
            atoms: OnceLock::new(),
        })
    }

    pub fn minimizers(&self, x: f64, t: f64) -> Result<MinimizerPair, GvpError> {
        self.snapshot(t)?.minimizers(x)
    }

    pub fn velocity(&self, x: f64, t: f64) -> Result<f64, GvpError> {
        self.snapshot(t)?.velocity(x)
    }

    pub fn mass(&self, x: f64, t: f64) -> Result<f64, GvpError> {
        self.snapshot(t)?.mass(x)
    }

    pub fn diagnostics(&self, x: f64, t: f64) -> Result<Potentials, GvpError> {
        self.snapshot(t)?.diagnostics(x)
    }

    /// Left and right backward characteristics from `(x0, t0)` at time `t`.
    pub fn backward_characteristics(&self, x0: f64, t0: f64, t: f64) -> Result<(f64, f64), GvpError> {
        if !(t >= 0.0 && t <= t0) {
            return Err(GvpError::InvalidField(format!("need 0 <= t <= t0, got t = {t}, t0 = {t0}")));
        }
        let pair = self.minimizers(x0, t0)?;
        let (c0, c) = (Coefficients::new(t0, self.upkappa), Coefficients::new(t, self.upkappa));
        let curve = |y: f64| c.a * y + c.b * (x0 - c0.a * y) / c0.b;
        Ok((curve(pair.y_star), curve(pair.y_star_hi)))
    }

    /// `u` and `m` at `t` on a grid, evaluated in parallel.
    pub fn sample(&self, t: f64, grid: &[f64]) -> Result<(Vec<f64>, Vec<f64>), GvpError> {
        let snap = self.snapshot(t)?;
        let rows: Result<Vec<(f64, f64)>, GvpError> = grid
            .par_iter()
            .map(|&x| {
                let p = snap.minimizers(x)?;
                Ok((snap.velocity_from(x, &p), snap.mass_from(&p)))
            })
            .collect();
        Ok(rows?.into_iter().unzip())
    }
}

/// Leftmost and rightmost minimizers of the potential and its minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizerPair {
    pub y_star: f64,
    pub y_star_hi: f64,
    pub value: f64,
}

impl MinimizerPair {
    pub fn is_split(&self) -> bool {
        self.y_star < self.y_star_hi
    }
}

/// Momentum, energy and drag potentials at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potentials {
    pub q: f64,
    pub e: f64,
    pub j: f64,
}

/// A point mass of the variational solution at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GvpAtom {
    pub x: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub mass: f64,
    pub velocity: f64,
}

/// Interval and orientation on which a one-sided local minimum was found.
#[derive(Debug, Clone, Copy)]
struct LocalMin {
    y: f64,
    value: f64,
    at_boundary: bool,
}

/// Queries at a fixed time.
pub struct GvpSnapshot<'a> {
    field: &'a GvpField,
    coeff: Coefficients,
    /// Node indices on the lower convex hull of `(P0, a P1 + b Pu)`.
    hull: Vec<usize>,
    slopes: Vec<f64>,
    atoms: OnceLock<Vec<GvpAtom>>,
}

impl<'a> GvpSnapshot<'a> {
    pub fn coefficients(&self) -> Coefficients {
        self.coeff
    }

    pub fn time(&self) -> f64 {
        self.coeff.t
    }

    fn value(&self, y: f64, x: f64) -> f64 {
        let r = self.field.tables(y);
        self.coeff.a * r[P1] + self.coeff.b * r[PU] - x * r[P0]
    }

    /// `X(y) - x` with the data's one-sided limits at `y`.
    fn gap(&self, y: f64, x: f64, side_right: bool) -> f64 {
        let (l, r) = self.field.profile.limits(y);
        let u0 = if side_right { r.u } else { l.u };
        self.coeff.forward(y, u0) - x
    }

    fn gap_inside(&self, y: f64, x: f64) -> f64 {
        self.coeff.forward(y, self.field.profile.state(y).u) - x
    }

    /// Local minima of `F(., x)` on nodes `lo..=hi`: points where `X - x`
    /// turns from negative to nonnegative.
    fn local_minima(&self, lo: usize, hi: usize, x: f64, out: &mut Vec<LocalMin>) {
        let nodes = &self.field.nodes;
        let last = nodes.len() - 1;
        let tol = ToleranceProfile::new(1e-15, 4e-16);
        for k in lo..=hi {
            let y = nodes[k];
            let g_minus = if k == 0 { f64::NEG_INFINITY } else { self.gap(y, x, false) };
            let g_plus = if k == last { f64::INFINITY } else { self.gap(y, x, true) };
            if g_minus < 0.0 && g_plus >= 0.0 {
                out.push(LocalMin {
                    y,
                    value: self.value(y, x),
                    at_boundary: k == 0 || k == last,
                });
            }
            if k < hi {
                let b = nodes[k + 1];
                let (ga, gb) = (g_plus, self.gap(b, x, false));
                if ga < 0.0 && gb >= 0.0 {
                    let g = |z: f64| if z <= y { ga } else if z >= b { gb } else { self.gap_inside(z, x) };
                    let root = find_root(g, y, b, &tol).unwrap_or(b);
                    out.push(LocalMin {
                        y: root,
                        value: self.value(root, x),
                        at_boundary: false,
                    });
                }
            }
        }
    }

    fn window(&self, node: usize) -> (usize, usize) {
        let last = self.field.nodes.len() - 1;
        (node.saturating_sub(2), (node + 2).min(last))
    }

    /// Minimum of `F(., x)` on the window around `node`, including window
    /// ends.
    fn basin_min(&self, node: usize, x: f64) -> (f64, f64) {
        let (lo, hi) = self.window(node);
        let mut c = Vec::new();
        self.local_minima(lo, hi, x, &mut c);
        for k in [lo, hi] {
            let y = self.field.nodes[k];
            c.push(LocalMin {
                y,
                value: self.value(y, x),
                at_boundary: false,
            });
        }
        let best = c.iter().min_by(|a, b| a.value.partial_cmp(&b.value).unwrap()).unwrap();
        (best.y, best.value)
    }

    pub fn minimizers(&self, x: f64) -> Result<MinimizerPair, GvpError> {
        let v = self.slopes.partition_point(|&s| s < x);
        let mut cands = Vec::new();
        let lo_v = v.saturating_sub(1);
        let hi_v = (v + 1).min(self.hull.len() - 1);
        let mut covered: Option<(usize, usize)> = None;
        for h in lo_v..=hi_v {
            let (mut lo, hi) = self.window(self.hull[h]);
            if let Some((_, chi)) = covered {
                if lo <= chi {
                    lo = chi + 1;
                }
            }
            if lo <= hi {
                self.local_minima(lo, hi, x, &mut cands);
                covered = Some((lo, hi));
            }
        }
        if cands.is_empty() {
            // No sign change nearby: fall back to the best hull node.
            let y = self.field.nodes[self.hull[v.min(self.hull.len() - 1)]];
            let last = self.field.nodes.len() - 1;
            let at_boundary = self.hull[v.min(self.hull.len() - 1)] == 0 || self.hull[v.min(self.hull.len() - 1)] == last;
            cands.push(LocalMin {
                y,
                value: self.value(y, x),
                at_boundary,
            });
        }
        let best = cands.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
        let tol = 1e-9 * (1.0 + best.abs());
        let ties: Vec<&LocalMin> = cands.iter().filter(|c| c.value <= best + tol).collect();
        if ties.iter().any(|c| c.at_boundary && c.value <= best) {
            return Err(GvpError::UnboundedBelow { x, t: self.coeff.t });
        }
        let y_star = ties.iter().map(|c| c.y).fold(f64::INFINITY, f64::min);
        let y_star_hi = ties.iter().map(|c| c.y).fold(f64::NEG_INFINITY, f64::max);
        Ok(MinimizerPair {
            y_star,
            y_star_hi,
            value: best,
        })
    }

    fn velocity_from(&self, x: f64, p: &MinimizerPair) -> f64 {
        let c = &self.coeff;
        if p.is_split() {
            let (a, b) = (self.field.tables(p.y_star), self.field.tables(p.y_star_hi));
            let dm = b[P0] - a[P0];
            (c.alpha * (b[P1] - a[P1]) + c.beta * (b[PU] - a[PU])) / dm
        } else {
            let y = p.y_star;
            c.slope * (x - c.a * y) + c.alpha * y
        }
    }

    fn mass_from(&self, p: &MinimizerPair) -> f64 {
        self.field.tables(p.y_star)[P0]
    }

    pub fn velocity(&self, x: f64) -> Result<f64, GvpError> {
        let p = self.minimizers(x)?;
        Ok(self.velocity_from(x, &p))
    }

    pub fn mass(&self, x: f64) -> Result<f64, GvpError> {
        let p = self.minimizers(x)?;
        Ok(self.mass_from(&p))
    }

    /// Point masses present at this time, left to right.
    pub fn atoms(&self) -> &[GvpAtom] {
        self.atoms.get_or_init(|| self.find_atoms())
    }

    fn find_atoms(&self) -> Vec<GvpAtom> {
        let c = &self.coeff;
        let mut out: Vec<GvpAtom> = Vec::new();
        for e in 0..self.slopes.len() {
            let (ja, jb) = (self.hull[e], self.hull[e + 1]);
            if jb - ja < 2 {
                continue;
            }
            let xe = self.slopes[e];
            let gap_l = if e > 0 { xe - self.slopes[e - 1] } else { f64::INFINITY };
            let gap_r = if e + 1 < self.slopes.len() { self.slopes[e + 1] - xe } else { f64::INFINITY };
            let mut w = 0.5 * gap_l.min(gap_r);
            if !w.is_finite() {
                w = 1e-6 * (1.0 + xe.abs());
            }
            let d = |x: f64| self.basin_min(ja, x).1 - self.basin_min(jb, x).1;
            let tol = ToleranceProfile::new(1e-15, 1e-15);
            let xs = if d(xe - w) < 0.0 && d(xe + w) > 0.0 {
                find_root(d, xe - w, xe + w, &tol).unwrap_or(xe)
            } else {
                xe
            };
            let (ya, yb) = (self.basin_min(ja, xs).0, self.basin_min(jb, xs).0);
            let (ra, rb) = (self.field.tables(ya), self.field.tables(yb));
            let mass = rb[P0] - ra[P0];
            if !(mass > 1e-12) {
                continue;
            }
            let velocity = (c.alpha * (rb[P1] - ra[P1]) + c.beta * (rb[PU] - ra[PU])) / mass;
            // Adjacent hull edges can describe one atom; keep the heavier.
            if let Some(prev) = out.last_mut() {
                if (prev.x - xs).abs() <= 1e-9 * (1.0 + xs.abs()) {
                    if mass > prev.mass {
                        *prev = GvpAtom {
                            x: xs,
                            y_lo: ya.min(prev.y_lo),
                            y_hi: yb.max(prev.y_hi),
                            mass,
                            velocity,
                        };
                    }
                    continue;
                }
            }
            out.push(GvpAtom {
                x: xs,
                y_lo: ya,
                y_hi: yb,
                mass,
                velocity,
            });
        }
        out
    }

    /// `q`, `E`, `J` at `x`: prefix integrals up to the leftmost minimizer,
    /// with `E` using the atom velocity on characteristics already absorbed
    /// into a point mass.
    pub fn diagnostics(&self, x: f64) -> Result<Potentials, GvpError> {
        let p = self.minimizers(x)?;
        Ok(self.potentials_at(p.y_star))
    }

    fn kernel_prefix(&self, r: &Row) -> (f64, f64) {
        let c = &self.coeff;
        let k1 = c.alpha * r[P1] + c.beta * r[PU];
        let k2 = c.alpha * c.alpha * r[P2] + 2.0 * c.alpha * c.beta * r[PYU] + c.beta * c.beta * r[PUU];
        (k1, k2)
    }

    fn potentials_at(&self, y: f64) -> Potentials {
        let c = &self.coeff;
        let r = self.field.tables(y);
        let (q, k2) = self.kernel_prefix(&r);
        let (lo, hi) = (y.min(0.0), y.max(0.0));
        let sign = if y >= 0.0 { 1.0 } else { -1.0 };
        let mut e2 = k2;
        for at in self.atoms() {
            let (a, b) = (at.y_lo.max(lo), at.y_hi.min(hi));
            if a >= b {
                continue;
            }
            let (ka, kb) = (self.kernel_prefix(&self.field.tables(a)), self.kernel_prefix(&self.field.tables(b)));
            e2 += sign * (at.velocity * (kb.0 - ka.0) - (kb.1 - ka.1));
        }
        let k = c.upkappa;
        Potentials {
            q,
            e: 0.5 * e2,
            j: k / c.s.powi(3) * (r[P1] - k * r[PU]),
        }
    }

    /// Largest excess of grid slopes of `u` over the one-sided bound, and
    /// whether `u(x+0) <= u(x) <= u(x-0)` at every atom.
    pub fn oleinik(&self, grid: &[f64]) -> Result<OleinikReport, GvpError> {
        let us: Result<Vec<f64>, GvpError> = grid.par_iter().map(|&x| self.velocity(x)).collect();
        let us = us?;
        let bound = self.coeff.slope;
        let excess = grid
            .windows(2)
            .zip(us.windows(2))
            .filter(|(x, _)| x[1] > x[0])
            .map(|(x, u)| (u[1] - u[0]) / (x[1] - x[0]) - bound)
            .fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = grid.first().zip(grid.last()).map_or((0.0, 0.0), |(a, b)| (*a, *b));
        let mut ordered = true;
        let mut worst_jump = f64::NEG_INFINITY;
        for at in self.atoms().iter().filter(|a| lo <= a.x && a.x <= hi) {
            let d = 1e-9 * (1.0 + at.x.abs());
            let (ul, ur) = (self.velocity(at.x - d)?, self.velocity(at.x + d)?);
            let u = self.velocity(at.x)?;
            let slack = 1e-8 * (1.0 + u.abs());
            if !(ur <= u + slack && u <= ul + slack) {
                ordered = false;
            }
            worst_jump = worst_jump.max(ur - ul);
        }
        Ok(OleinikReport {
            bound,
            slope_excess: excess,
            jumps_ordered: ordered,
            worst_jump,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OleinikReport {
    pub bound: f64,
    /// Max over adjacent grid pairs of slope minus bound.
    pub slope_excess: f64,
    pub jumps_ordered: bool,
    /// Largest `u(x+0) - u(x-0)` over atoms in the grid; negative for
    /// shocks, `-inf` when there are none.
    pub worst_jump: f64,
}

/// Smooth bump `phi(x, t)` centred at `(xc, tc)` with half-widths `(rx, rt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub xc: f64,
    pub rx: f64,
    pub tc: f64,
    pub rt: f64,
}

fn bump1(z: f64) -> (f64, f64) {
    if z.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let w = 1.0 - z * z;
    let b = (-1.0 / w).exp();
    (b, b * (-2.0 * z / (w * w)))
}

impl Bump {
    /// `(phi, phi_x, phi_t)`.
    pub fn eval(&self, x: f64, t: f64) -> (f64, f64, f64) {
        let (bx, dbx) = bump1((x - self.xc) / self.rx);
        let (bt, dbt) = bump1((t - self.tc) / self.rt);
        (bx * bt, dbx / self.rx * bt, bx * dbt / self.rt)
    }
}

/// Residuals of the two weak equations against `phi`, using `nx` cells in
/// `x` and `nt` (even) Simpson intervals in `t` over the bump's support.
pub fn weak_residual(field: &GvpField, phi: &Bump, nx: usize, nt: usize) -> Result<(f64, f64), GvpError> {
    let (t0, t1) = (phi.tc - phi.rt, phi.tc + phi.rt);
    let (x0, x1) = (phi.xc - phi.rx, phi.xc + phi.rx);
    if !(t0 > 0.0) {
        return Err(GvpError::SupportEscape(format!("test function reaches t = {t0}")));
    }
    let nt = nt + nt % 2;
    for t in [t0, t1] {
        let snap = field.snapshot(t)?;
        for x in [x0, x1] {
            if let Err(e) = snap.minimizers(x) {
                return Err(GvpError::SupportEscape(e.to_string()));
            }
        }
    }
    let ht = (t1 - t0) / nt as f64;
    let rows: Result<Vec<(f64, f64, f64)>, GvpError> = (0..=nt)
        .into_par_iter()
        .map(|i| {
            let t = t0 + ht * i as f64;
            let w = if i == 0 || i == nt { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let (a, b) = slice_integrals(field, phi, t, x0, x1, nx)?;
            let (ra, rb) = (a, b);
            Ok((w, ra, rb))
        })
        .collect();
    let (mut r1, mut r2) = (0.0, 0.0);
    for (w, a, b) in rows? {
        r1 += w * a;
        r2 += w * b;
    }
    Ok(((r1 * ht / 3.0).abs(), (r2 * ht / 3.0).abs()))
}

/// `x`-integrals of both weak equations at one time.
fn slice_integrals(field: &GvpField, phi: &Bump, t: f64, x0: f64, x1: f64, nx: usize) -> Result<(f64, f64), GvpError> {
    let snap = field.snapshot(t)?;
    let c = snap.coefficients();
    let atoms: Vec<GvpAtom> = snap.atoms().iter().copied().filter(|a| x0 < a.x && a.x < x1).collect();
    let mut cuts: Vec<f64> = (0..=nx).map(|i| x0 + (x1 - x0) * i as f64 / nx as f64).collect();
    cuts.extend(atoms.iter().map(|a| a.x));
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    // Mass just left of each cut. At an atom the two minimizers tie and
    // either may come back, so take the lower one explicitly.
    let m_at: Vec<f64> = cuts
        .iter()
        .map(|&x| match atoms.iter().find(|a| a.x == x) {
            Some(a) => field.prefix(a.y_lo).map(|p| p.0),
            None => snap.mass(x),
        })
        .collect::<Result<_, _>>()?;
    let jump = |x: f64| atoms.iter().find(|a| a.x == x).map_or(0.0, |a| a.mass);
    let (mut first, mut second) = (0.0, 0.0);
    for k in 0..cuts.len() - 1 {
        let (a, b) = (cuts[k], cuts[k + 1]);
        let mid = 0.5 * (a + b);
        let dm = m_at[k + 1] - (m_at[k] + jump(a));
        let (p, px, pt) = phi.eval(mid, t);
        let u = snap.velocity(mid)?;
        let m_mid = snap.mass(mid)?;
        first += pt * m_mid * (b - a) - p * u * dm;
        second += (u * pt + u * u * px + (mid / c.s - u) / c.s * p) * dm;
    }
    for at in &atoms {
        let (p, px, pt) = phi.eval(at.x, t);
        let u = at.velocity;
        first -= p * u * at.mass;
        second += (u * pt + u * u * px + (at.x / c.s - u) / c.s * p) * at.mass;
    }
    Ok((first, second))
}
