//! Riemann and delta-initial-data problems for the 2x2 system, solved
//! directly in terms of the limiting front objects: center `c(t)`, mass
//! `xi(t)` and velocity weight `chi(t)`.

use std::sync::Arc;

use thiserror::Error;

use crate::model::{CharacteristicPath, CoefficientSpec, FluxSpec, ModelError, VelocityOrbit};
use crate::numerics::{find_root, integrate_ode, NumericsError, OdePath, ToleranceProfile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiemannError {
    #[error("no root of the velocity equation in (U_r, U_l) at t = {t}; the flux may not be increasing")]
    BracketFailure { t: f64 },
    #[error("front left its admissible region at t = {t}: offset {offset} not in [{lo}, {hi}]")]
    RegionViolation { t: f64, offset: f64, lo: f64, hi: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Density and velocity of a constant state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub v: f64,
    pub u: f64,
}

impl State {
    pub fn new(v: f64, u: f64) -> Self {
        Self { v, u }
    }
}

/// Riemann data, optionally with a point mass at the discontinuity.
#[derive(Debug, Clone)]
pub struct RiemannInput {
    pub left: State,
    pub right: State,
    pub delta_mass: f64,
    pub delta_velocity: f64,
    pub coefficients: Arc<CoefficientSpec>,
    pub flux: FluxSpec,
    /// Where and when the data is posed; velocities are values at that time.
    pub birth_position: f64,
    pub birth_time: f64,
}

impl RiemannInput {
    pub fn new(left: State, right: State, coefficients: Arc<CoefficientSpec>, flux: FluxSpec) -> Self {
        Self {
            left,
            right,
            delta_mass: 0.0,
            delta_velocity: 0.0,
            coefficients,
            flux,
            birth_position: 0.0,
            birth_time: 0.0,
        }
    }

    pub fn with_delta(mut self, mass: f64, velocity: f64) -> Self {
        self.delta_mass = mass;
        self.delta_velocity = velocity;
        self
    }

    pub fn posed_at(mut self, x0: f64, t0: f64) -> Self {
        self.birth_position = x0;
        self.birth_time = t0;
        self
    }

    fn validate(&self) -> Result<(), RiemannError> {
        for (name, s) in [("left", self.left), ("right", self.right)] {
            if !(s.v >= 0.0 && s.v.is_finite() && s.u.is_finite()) {
                return Err(RiemannError::InvalidInput(format!("{name} state {s:?} is not admissible")));
            }
        }
        if !(self.delta_mass >= 0.0 && self.delta_mass.is_finite()) {
            return Err(RiemannError::InvalidInput("delta mass must be nonnegative".into()));
        }
        if !(self.birth_time >= 0.0) {
            return Err(RiemannError::Model(ModelError::NegativeTime(self.birth_time)));
        }
        Ok(())
    }

    fn side(&self, s: State) -> Result<Side, RiemannError> {
        let orbit = VelocityOrbit::through(s.u, self.birth_time, self.coefficients.clone())?;
        Ok(Side::new(s.v, CharacteristicPath::new(orbit, self.flux.clone())))
    }
}

/// One side of a front: a density carried along a velocity orbit. A vacuum
/// side has zero density and the orbit of the adjacent fan edge.
#[derive(Debug, Clone)]
pub struct Side {
    pub density: f64,
    pub path: CharacteristicPath,
}

impl Side {
    pub fn new(density: f64, path: CharacteristicPath) -> Self {
        Self { density, path }
    }

    #[inline]
    pub fn velocity(&self, t: f64) -> f64 {
        self.path.velocity(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiemannClass {
    DeltaShock,
    ContactVacuum,
    SingleContact,
}

pub fn classify(input: &RiemannInput) -> RiemannClass {
    if input.left.u > input.right.u {
        RiemannClass::DeltaShock
    } else if input.left.u < input.right.u {
        RiemannClass::ContactVacuum
    } else {
        RiemannClass::SingleContact
    }
}

/// Root function whose zero is the front velocity weight for Riemann data.
fn velocity_equation(x: f64, t: f64, left: &Side, right: &Side, flux: &FluxSpec) -> f64 {
    let (ul, ur) = (left.velocity(t), right.velocity(t));
    let (vl, vr) = (left.density, right.density);
    let (fl, fr) = (flux.eval(ul), flux.eval(ur));
    let jv = vr - vl;
    let jvu = vr * ur - vl * ul;
    let jvf = vr * fr - vl * fl;
    let jvuf = vr * ur * fr - vl * ul * fl;
    flux.eval(x) * (jv * x - jvu) - x * jvf + jvuf
}

fn root_between(t: f64, left: &Side, right: &Side, flux: &FluxSpec, tol: &ToleranceProfile) -> Result<f64, RiemannError> {
    let (ul, ur) = (left.velocity(t), right.velocity(t));
    if ul == ur {
        return Ok(ul);
    }
    find_root(|x| velocity_equation(x, t, left, right, flux), ur, ul, tol).map_err(|e| match e {
        NumericsError::NoSignChange { .. } => RiemannError::BracketFailure { t },
        other => RiemannError::Numerics(other),
    })
}

/// Root of the velocity equation at time `t` for Riemann data without a
/// point mass.
pub fn chi_root(t: f64, input: &RiemannInput) -> Result<f64, RiemannError> {
    input.validate()?;
    if t < 0.0 {
        return Err(ModelError::NegativeTime(t).into());
    }
    let (l, r) = (input.side(input.left)?, input.side(input.right)?);
    root_between(t, &l, &r, &input.flux, &ToleranceProfile::default())
}

/// Explicit front mass for a center curve passing through `c_value` at `t`.
pub fn xi_mass(t: f64, c_value: f64, input: &RiemannInput) -> Result<f64, RiemannError> {
    input.validate()?;
    if t < input.birth_time {
        return Err(ModelError::NegativeTime(t - input.birth_time).into());
    }
    let geom = Geometry::new(input)?;
    Ok(geom.mass_at(t, c_value - input.birth_position))
}

/// Data shared by every front evaluation: sides, birth point and the
/// point mass carried at birth.
#[derive(Debug, Clone)]
struct Geometry {
    left: Side,
    right: Side,
    mass0: f64,
    velocity0: f64,
    ubar: VelocityOrbit,
    x0: f64,
    t0: f64,
    p_left0: f64,
    p_right0: f64,
}

impl Geometry {
    fn new(input: &RiemannInput) -> Result<Self, RiemannError> {
        let left = input.side(input.left)?;
        let right = input.side(input.right)?;
        Self::from_sides(left, right, input.delta_mass, input.delta_velocity, input.birth_position, input.birth_time)
    }

    fn from_sides(left: Side, right: Side, mass0: f64, velocity0: f64, x0: f64, t0: f64) -> Result<Self, RiemannError> {
        let ubar = VelocityOrbit::through(velocity0, t0, left.path.coefficients().clone())?;
        let p_left0 = left.path.displacement(t0);
        let p_right0 = right.path.displacement(t0);
        Ok(Self {
            left,
            right,
            mass0,
            velocity0,
            ubar,
            x0,
            t0,
            p_left0,
            p_right0,
        })
    }

    /// Displacements of the left and right characteristics since birth.
    #[inline]
    fn travel(&self, t: f64) -> (f64, f64) {
        (
            self.left.path.displacement(t) - self.p_left0,
            self.right.path.displacement(t) - self.p_right0,
        )
    }

    #[inline]
    fn mass_at(&self, t: f64, off: f64) -> f64 {
        let (pl, pr) = self.travel(t);
        let (vl, vr) = (self.left.density, self.right.density);
        off * (vr - vl) + vl * pl - vr * pr + self.mass0
    }

    #[inline]
    fn momentum_at(&self, t: f64, off: f64) -> f64 {
        let (pl, pr) = self.travel(t);
        let (vl, vr) = (self.left.density, self.right.density);
        let (ul, ur) = (self.left.velocity(t), self.right.velocity(t));
        off * (vr * ur - vl * ul) + vl * ul * pl - vr * ur * pr + self.mass0 * self.ubar.velocity(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontKind {
    /// Born from Riemann data without a point mass; the weight is the root
    /// of the velocity equation at each time.
    Riemann,
    /// Born carrying a point mass; the weight is the momentum-to-mass ratio.
    DeltaData,
}

#[derive(Debug, Clone)]
enum Offset {
    Linear(f64),
    Path(OdePath),
}

/// Limiting delta front: center, mass and velocity weight as functions of
/// time on `[birth_time, horizon]`.
#[derive(Debug, Clone)]
pub struct DeltaFront {
    geom: Geometry,
    kind: FrontKind,
    offset: Offset,
    horizon: f64,
    mesh: Vec<f64>,
    tol: ToleranceProfile,
}

const MESH_FLOOR_PER_UNIT: f64 = 64.0;

fn build_mesh(t0: f64, t1: f64, extra: &[f64]) -> Vec<f64> {
    let span = t1 - t0;
    let mut mesh: Vec<f64> = extra.iter().copied().filter(|t| *t >= t0 && *t <= t1).collect();
    let n = (span * MESH_FLOOR_PER_UNIT).ceil().max(1.0) as usize;
    for k in 0..=n {
        mesh.push(t0 + span * k as f64 / n as f64);
    }
    // Geometric refinement toward the birth time.
    let first = span / n as f64;
    for k in 1..=20 {
        mesh.push(t0 + first * 0.5f64.powi(k));
    }
    mesh.sort_by(|a, b| a.partial_cmp(b).unwrap());
    mesh.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));
    mesh
}

impl DeltaFront {
    /// Front born at `(x0, t0)` from Riemann data (no point mass) between
    /// two sides with `U_l(t0) > U_r(t0)`.
    pub fn riemann(left: Side, right: Side, x0: f64, t0: f64, horizon: f64, tol: &ToleranceProfile) -> Result<Self, RiemannError> {
        if left.density == 0.0 && right.density == 0.0 {
            return Err(RiemannError::InvalidInput("both sides are vacuum".into()));
        }
        let geom = Geometry::from_sides(left, right, 0.0, 0.0, x0, t0)?;
        let flux = geom.left.path.flux().clone();
        let horizon = horizon.max(t0);
        let offset = if geom.left.path.coefficients().is_zero() {
            let chi = root_between(t0, &geom.left, &geom.right, &flux, tol)?;
            Offset::Linear(flux.eval(chi))
        } else {
            let (l, r) = (geom.left.clone(), geom.right.clone());
            let mut fail = None;
            let path = integrate_ode(
                |t, _y, dy| match root_between(t, &l, &r, &flux, tol) {
                    Ok(chi) => dy[0] = flux.eval(chi),
                    Err(e) => {
                        fail.get_or_insert(e);
                        dy[0] = f64::NAN;
                    }
                },
                t0,
                &[0.0],
                horizon,
                tol,
            );
            if let Some(e) = fail {
                return Err(e);
            }
            Offset::Path(path?)
        };
        let nodes = match &offset {
            Offset::Path(p) => p.times().to_vec(),
            Offset::Linear(_) => Vec::new(),
        };
        let front = Self {
            geom,
            kind: FrontKind::Riemann,
            offset,
            horizon,
            mesh: build_mesh(t0, horizon, &nodes),
            tol: *tol,
        };
        front.check_region()?;
        Ok(front)
    }

    /// Front born at `(x0, t0)` carrying mass `mass0 > 0` with velocity
    /// `velocity0` strictly between the side velocities.
    #[allow(clippy::too_many_arguments)]
    pub fn delta_data(
        left: Side,
        right: Side,
        mass0: f64,
        velocity0: f64,
        x0: f64,
        t0: f64,
        horizon: f64,
        tol: &ToleranceProfile,
    ) -> Result<Self, RiemannError> {
        if !(mass0 > 0.0) {
            return Err(RiemannError::InvalidInput(format!("point mass must be positive, got {mass0}")));
        }
        let geom = Geometry::from_sides(left, right, mass0, velocity0, x0, t0)?;
        let flux = geom.left.path.flux().clone();
        let horizon = horizon.max(t0);
        let g = geom.clone();
        let ode_tol = tol.scaled(0.1);
        let path = integrate_ode(
            |t, y, dy| {
                let xi = g.mass_at(t, y[0]);
                dy[0] = flux.eval(g.momentum_at(t, y[0]) / xi);
            },
            t0,
            &[0.0],
            horizon,
            &ode_tol,
        )?;
        let nodes = path.times().to_vec();
        let front = Self {
            geom,
            kind: FrontKind::DeltaData,
            offset: Offset::Path(path),
            horizon,
            mesh: build_mesh(t0, horizon, &nodes),
            tol: *tol,
        };
        front.check_region()?;
        Ok(front)
    }

    fn check_region(&self) -> Result<(), RiemannError> {
        for &t in &self.mesh {
            let off = self.offset(t);
            let (lo, hi) = self.region_bounds(t);
            let slack = 1e-8 * (1.0 + off.abs());
            if !off.is_finite() || off < lo - slack || off > hi + slack {
                return Err(RiemannError::RegionViolation { t, offset: off, lo, hi });
            }
        }
        Ok(())
    }

    /// Admissible range for `c(t) - c(birth)`: between the displacements of
    /// the right and left characteristics.
    pub fn region_bounds(&self, t: f64) -> (f64, f64) {
        let (pl, pr) = self.geom.travel(t);
        (pr, pl)
    }

    #[inline]
    fn offset(&self, t: f64) -> f64 {
        match &self.offset {
            Offset::Linear(s) => s * (t - self.geom.t0),
            Offset::Path(p) => p.eval_scalar(t),
        }
    }

    pub fn kind(&self) -> FrontKind {
        self.kind
    }

    pub fn birth_time(&self) -> f64 {
        self.geom.t0
    }

    pub fn birth_position(&self) -> f64 {
        self.geom.x0
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn birth_mass(&self) -> f64 {
        self.geom.mass0
    }

    pub fn birth_velocity(&self) -> f64 {
        self.geom.velocity0
    }

    pub fn left(&self) -> &Side {
        &self.geom.left
    }

    pub fn right(&self) -> &Side {
        &self.geom.right
    }

    pub fn flux(&self) -> &FluxSpec {
        self.geom.left.path.flux()
    }

    pub fn coefficients(&self) -> &Arc<CoefficientSpec> {
        self.geom.left.path.coefficients()
    }

    pub fn tolerance(&self) -> &ToleranceProfile {
        &self.tol
    }

    /// Sample times: integrator nodes, a uniform floor and a refinement
    /// toward the birth time.
    pub fn mesh(&self) -> &[f64] {
        &self.mesh
    }

    /// Displacements of the left and right characteristics since birth.
    pub fn travel(&self, t: f64) -> (f64, f64) {
        self.geom.travel(t)
    }

    /// `c(t) - c(birth)`.
    pub fn displacement(&self, t: f64) -> f64 {
        self.offset(t)
    }

    /// Center `c(t)`.
    pub fn position(&self, t: f64) -> f64 {
        self.geom.x0 + self.offset(t)
    }

    /// Mass `xi(t)`.
    pub fn mass(&self, t: f64) -> f64 {
        self.geom.mass_at(t, self.offset(t))
    }

    /// `xi(t) chi(t)`.
    pub fn momentum(&self, t: f64) -> f64 {
        match self.kind {
            FrontKind::DeltaData => self.geom.momentum_at(t, self.offset(t)),
            FrontKind::Riemann => self.mass(t) * self.weight(t),
        }
    }

    /// Velocity weight `chi(t)`.
    pub fn weight(&self, t: f64) -> f64 {
        match self.kind {
            FrontKind::Riemann => {
                root_between(t, &self.geom.left, &self.geom.right, self.flux(), &self.tol).unwrap_or(f64::NAN)
            }
            FrontKind::DeltaData => {
                if t <= self.geom.t0 {
                    return self.geom.velocity0;
                }
                let off = self.offset(t);
                self.geom.momentum_at(t, off) / self.geom.mass_at(t, off)
            }
        }
    }

    /// `c'(t) = f(chi(t))`.
    pub fn speed(&self, t: f64) -> f64 {
        self.flux().eval(self.weight(t))
    }

    /// Strict ordering `U_r < chi < U_l` and the same for the flux values.
    /// Vacuum sides impose no condition.
    pub fn is_overcompressive(&self, t: f64) -> bool {
        let chi = self.weight(t);
        let f = self.flux();
        let fc = f.eval(chi);
        let left_ok = self.geom.left.density == 0.0 || {
            let ul = self.geom.left.velocity(t);
            chi < ul && fc < f.eval(ul)
        };
        let right_ok = self.geom.right.density == 0.0 || {
            let ur = self.geom.right.velocity(t);
            ur < chi && f.eval(ur) < fc
        };
        left_ok && right_ok
    }

    /// Largest gap between the per-time root weight and the orbit through
    /// its birth value, over the sample mesh. Zero for point-mass fronts.
    pub fn orbit_discrepancy(&self) -> f64 {
        if self.kind != FrontKind::Riemann {
            return 0.0;
        }
        let chi0 = self.weight(self.geom.t0);
        let Ok(orbit) = VelocityOrbit::through(chi0, self.geom.t0, self.coefficients().clone()) else {
            return f64::NAN;
        };
        self.mesh
            .iter()
            .map(|&t| (self.weight(t) - orbit.velocity(t)).abs())
            .fold(0.0, f64::max)
    }
}

/// Vacuum between two contact lines moving with the left and right states.
#[derive(Debug, Clone)]
pub struct WaveFan {
    pub left: Side,
    pub right: Side,
    pub birth_position: f64,
    pub birth_time: f64,
}

impl WaveFan {
    pub fn left_edge(&self, t: f64) -> f64 {
        self.birth_position + self.left.path.displacement(t) - self.left.path.displacement(self.birth_time)
    }

    pub fn right_edge(&self, t: f64) -> f64 {
        self.birth_position + self.right.path.displacement(t) - self.right.path.displacement(self.birth_time)
    }

    /// Velocity inside the fan, interpolated linearly between the edge
    /// velocities; outside the fan the adjacent state velocity.
    pub fn interior_velocity(&self, x: f64, t: f64) -> f64 {
        let (a, b) = (self.left_edge(t), self.right_edge(t));
        let (ua, ub) = (self.left.velocity(t), self.right.velocity(t));
        if x <= a {
            ua
        } else if x >= b {
            ub
        } else {
            ua + (ub - ua) * (x - a) / (b - a)
        }
    }
}

/// A contact line between states of equal velocity.
#[derive(Debug, Clone)]
pub struct ContactLine {
    pub left: Side,
    pub right: Side,
    pub birth_position: f64,
    pub birth_time: f64,
}

impl ContactLine {
    pub fn position(&self, t: f64) -> f64 {
        self.birth_position + self.left.path.displacement(t) - self.left.path.displacement(self.birth_time)
    }
}

#[derive(Debug, Clone)]
pub enum RiemannSolution {
    Delta(DeltaFront),
    Fan(WaveFan),
    Contact(ContactLine),
}

impl RiemannSolution {
    pub fn delta(&self) -> Option<&DeltaFront> {
        match self {
            RiemannSolution::Delta(d) => Some(d),
            _ => None,
        }
    }
}

/// Solves Riemann data without a point mass on `[birth_time, horizon]`.
pub fn solve_riemann(input: &RiemannInput, horizon: f64) -> Result<RiemannSolution, RiemannError> {
    solve_riemann_with(input, horizon, &ToleranceProfile::default())
}

pub fn solve_riemann_with(input: &RiemannInput, horizon: f64, tol: &ToleranceProfile) -> Result<RiemannSolution, RiemannError> {
    input.validate()?;
    if input.delta_mass != 0.0 {
        return Err(RiemannError::InvalidInput("Riemann data must not carry a point mass".into()));
    }
    let left = input.side(input.left)?;
    let right = input.side(input.right)?;
    let (x0, t0) = (input.birth_position, input.birth_time);
    Ok(match classify(input) {
        RiemannClass::DeltaShock => RiemannSolution::Delta(DeltaFront::riemann(left, right, x0, t0, horizon, tol)?),
        RiemannClass::ContactVacuum => RiemannSolution::Fan(WaveFan {
            left,
            right,
            birth_position: x0,
            birth_time: t0,
        }),
        RiemannClass::SingleContact => RiemannSolution::Contact(ContactLine {
            left,
            right,
            birth_position: x0,
            birth_time: t0,
        }),
    })
}

/// Solves data with a point mass `m > 0` of velocity `u_l > u > u_r`.
pub fn solve_delta_riemann(input: &RiemannInput, horizon: f64) -> Result<DeltaFront, RiemannError> {
    solve_delta_riemann_with(input, horizon, &ToleranceProfile::default())
}

pub fn solve_delta_riemann_with(input: &RiemannInput, horizon: f64, tol: &ToleranceProfile) -> Result<DeltaFront, RiemannError> {
    input.validate()?;
    if !(input.left.u > input.delta_velocity && input.delta_velocity > input.right.u) {
        return Err(RiemannError::InvalidInput(format!(
            "point-mass velocity {} must lie strictly between {} and {}",
            input.delta_velocity, input.right.u, input.left.u
        )));
    }
    let left = input.side(input.left)?;
    let right = input.side(input.right)?;
    DeltaFront::delta_data(
        left,
        right,
        input.delta_mass,
        input.delta_velocity,
        input.birth_position,
        input.birth_time,
        horizon,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AirVelocity, Drag};

    fn zero() -> Arc<CoefficientSpec> {
        Arc::new(CoefficientSpec::zero())
    }

    fn input(l: (f64, f64), r: (f64, f64)) -> RiemannInput {
        RiemannInput::new(State::new(l.0, l.1), State::new(r.0, r.1), zero(), FluxSpec::identity())
    }

    #[test]
    fn classification() {
        assert_eq!(classify(&input((1.0, 2.0), (4.0, 0.0))), RiemannClass::DeltaShock);
        assert_eq!(classify(&input((1.0, 0.0), (1.0, 1.0))), RiemannClass::ContactVacuum);
        assert_eq!(classify(&input((1.0, 1.0), (2.0, 1.0))), RiemannClass::SingleContact);
    }

    #[test]
    fn root_of_quadratic_velocity_equation() {
        let inp = input((1.0, 2.0), (4.0, 0.0));
        for &t in &[0.0, 0.5, 3.0] {
            assert!((chi_root(t, &inp).unwrap() - 2.0 / 3.0).abs() < 1e-10);
        }
        assert!(chi_root(0.3, &input((1.0, 1.0), (1.0, -1.0))).unwrap().abs() < 1e-12);
        let go = RiemannInput::new(State::new(1.0, 1.0), State::new(1.0, -1.0), zero(), FluxSpec::geometric_optics());
        assert!(chi_root(0.7, &go).unwrap().abs() < 1e-12);
    }

    #[test]
    fn mass_formula_examples() {
        let inp = input((1.0, 2.0), (1.0, 0.0));
        assert_eq!(xi_mass(0.0, 0.0, &inp).unwrap(), 0.0);
        assert!((xi_mass(0.8, 0.8, &inp).unwrap() - 1.6).abs() < 1e-14);
        let sym = input((1.0, 2.0), (1.0, -2.0)).with_delta(2.0, 0.0);
        assert!((xi_mass(1.5, 0.0, &sym).unwrap() - 8.0).abs() < 1e-14);
    }

    #[test]
    fn pressureless_shock_front() {
        let sol = solve_riemann(&input((1.0, 2.0), (4.0, 0.0)), 1.0).unwrap();
        let d = sol.delta().unwrap();
        assert!((d.position(1.0) - 2.0 / 3.0).abs() < 1e-10);
        assert!((d.mass(1.0) - 4.0).abs() < 1e-9);
        assert!((d.weight(0.5) - 2.0 / 3.0).abs() < 1e-10);
        assert!(d.is_overcompressive(0.5));
    }

    #[test]
    fn symmetric_vacuum_fan() {
        let sol = solve_riemann(&input((1.0, -1.0), (1.0, 1.0)), 1.0).unwrap();
        let RiemannSolution::Fan(fan) = sol else { panic!("expected a fan") };
        assert_eq!(fan.left_edge(0.5), -0.5);
        assert_eq!(fan.right_edge(0.5), 0.5);
        assert!((fan.interior_velocity(0.2, 0.5) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn single_contact_moves_with_state() {
        let sol = solve_riemann(&input((1.0, 1.0), (1.0, 1.0)), 1.0).unwrap();
        let RiemannSolution::Contact(c) = sol else { panic!("expected a contact") };
        assert_eq!(c.position(0.75), 0.75);
    }

    #[test]
    fn symmetric_point_mass_stays_put() {
        let inp = input((1.0, 2.0), (1.0, -2.0)).with_delta(2.0, 0.0);
        let d = solve_delta_riemann(&inp, 2.0).unwrap();
        for &t in &[0.0, 0.5, 1.0, 2.0] {
            assert!(d.position(t).abs() < 1e-12);
            assert!(d.weight(t).abs() < 1e-12);
            assert!((d.mass(t) - (4.0 * t + 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn small_point_mass_approaches_riemann_weight() {
        let inp = input((1.0, 2.0), (4.0, 0.0)).with_delta(1e-8, 2.0 / 3.0);
        let d = solve_delta_riemann(&inp, 1.0).unwrap();
        assert!((d.weight(1.0) - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn birth_values() {
        let c = Arc::new(CoefficientSpec::constant(0.5, 0.2).unwrap());
        let inp = RiemannInput::new(State::new(1.0, 1.5), State::new(2.0, -0.5), c, FluxSpec::geometric_optics())
            .with_delta(0.7, 0.3);
        let d = solve_delta_riemann(&inp, 1.0).unwrap();
        assert_eq!(d.weight(0.0), 0.3);
        assert!((d.mass(0.0) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn invalid_point_mass_velocity() {
        let inp = input((1.0, 2.0), (1.0, 0.0)).with_delta(1.0, 3.0);
        assert!(matches!(solve_delta_riemann(&inp, 1.0), Err(RiemannError::InvalidInput(_))));
    }

    fn check_ode_residuals(d: &DeltaFront, coeff: &CoefficientSpec) {
        let f = d.flux().clone();
        let t1 = d.horizon();
        for k in 1..20 {
            let t = d.birth_time() + (t1 - d.birth_time()) * k as f64 / 20.0;
            let h = 1e-4;
            let dxi = (d.mass(t + h) - d.mass(t - h)) / (2.0 * h);
            let dth = (d.momentum(t + h) - d.momentum(t - h)) / (2.0 * h);
            let (l, r) = (d.left(), d.right());
            let (ul, ur) = (l.velocity(t), r.velocity(t));
            let (vl, vr) = (l.density, r.density);
            let cp = d.speed(t);
            let chi = d.weight(t);
            let xi = d.mass(t);
            let rhs1 = cp * (vr - vl) - (vr * f.eval(ur) - vl * f.eval(ul));
            let rhs2 = cp * (vr * ur - vl * ul) - (vr * ur * f.eval(ur) - vl * ul * f.eval(ul))
                - coeff.kappa(t) * (chi - coeff.air_velocity(t)) * xi;
            assert!((dxi - rhs1).abs() < 1e-6, "mass residual at {t}: {dxi} vs {rhs1}");
            assert!((dth - rhs2).abs() < 1e-6, "momentum residual at {t}: {dth} vs {rhs2}");
        }
    }

    #[test]
    fn ode_residuals_identity_flux_with_drag() {
        let coeff = Arc::new(CoefficientSpec::new(Drag::Algebraic { upkappa: 1.0 }, AirVelocity::Constant(0.5)).unwrap());
        let inp = RiemannInput::new(State::new(1.0, 2.0), State::new(3.0, -1.0), coeff.clone(), FluxSpec::identity());
        let sol = solve_riemann(&inp, 2.0).unwrap();
        check_ode_residuals(sol.delta().unwrap(), &coeff);
        let d = solve_delta_riemann(&inp.clone().with_delta(0.5, 0.4), 2.0).unwrap();
        check_ode_residuals(&d, &coeff);
    }

    #[test]
    fn ode_residuals_point_mass_nonlinear_flux() {
        let coeff = Arc::new(CoefficientSpec::constant(0.7, -0.2).unwrap());
        let inp = RiemannInput::new(State::new(2.0, 1.5), State::new(1.0, -1.0), coeff.clone(), FluxSpec::geometric_optics())
            .with_delta(0.3, 0.5);
        let d = solve_delta_riemann(&inp, 1.5).unwrap();
        check_ode_residuals(&d, &coeff);
    }

    #[test]
    fn riemann_orbit_form_holds_for_identity_flux() {
        let coeff = Arc::new(CoefficientSpec::constant(1.0, 0.3).unwrap());
        let inp = RiemannInput::new(State::new(1.0, 2.0), State::new(4.0, 0.0), coeff, FluxSpec::identity());
        let sol = solve_riemann(&inp, 2.0).unwrap();
        assert!(sol.delta().unwrap().orbit_discrepancy() < 1e-9);
    }

    #[test]
    fn riemann_front_stays_in_region_nonlinear() {
        let coeff = Arc::new(CoefficientSpec::new(Drag::Algebraic { upkappa: 0.5 }, AirVelocity::Constant(1.0)).unwrap());
        let inp = RiemannInput::new(State::new(1.0, 2.0), State::new(0.5, -1.0), coeff, FluxSpec::odd_power(3).unwrap());
        let d = solve_riemann(&inp, 3.0).unwrap();
        let d = d.delta().unwrap();
        for &t in d.mesh() {
            assert!(d.is_overcompressive(t), "t = {t}");
            assert!(d.mass(t) >= 0.0);
        }
    }
}
