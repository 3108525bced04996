//! Front tracking: discretize the initial data into constant states, follow
//! the resulting delta fronts and contact lines, and merge fronts whose
//! centers meet into a single delta front carrying their total mass.

use std::sync::Arc;

use thiserror::Error;

use crate::model::{CharacteristicPath, CoefficientSpec, FluxSpec, InitialProfile, PiecewiseConstant, PointState, VelocityOrbit};
use crate::numerics::{find_root, ToleranceProfile};
use crate::riemann::{DeltaFront, RiemannError, Side};
use crate::twophase::DeltaFront3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrackError {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid initial data: {0}")]
    InvalidData(String),
    #[error("merged point mass at t = {t}, x = {x} has velocity {velocity} outside ({right}, {left})")]
    NonOvercompressiveMerge { t: f64, x: f64, velocity: f64, left: f64, right: f64 },
    #[error("event budget exceeded: {events} events against a budget of {budget}")]
    EventBudgetExceeded { events: usize, budget: usize },
    #[error("time {t} outside the valid interval [{lo}, {hi}]")]
    TimeOutOfRange { t: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Riemann(#[from] RiemannError),
}

/// How `rho(eps)` is formed: `eps^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionSpec {
    /// Left end of the discretized window.
    pub r: f64,
    /// Length of the discretized window; the last cell's state extends to
    /// infinity.
    pub length: f64,
    pub eps: f64,
    pub alpha: f64,
    pub c1: f64,
    pub c2: f64,
    pub rho_exponent: f64,
    /// Requested cell width; defaults to the geometric mean of the bounds.
    pub width: Option<f64>,
}

impl PartitionSpec {
    pub fn lower_bound(&self) -> f64 {
        self.c1 * self.eps.powf(self.alpha)
    }

    pub fn upper_bound(&self) -> f64 {
        self.c2 * self.eps.powf(self.rho_exponent)
    }

    /// Cell boundaries `Y_0 = r < Y_1 < ... < Y_n = r + length`.
    pub fn nodes(&self) -> Result<Vec<f64>, TrackError> {
        let bad = |m: String| Err(TrackError::InvalidPartition(m));
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.c1 >= 1.0 && self.c2 >= 1.0) {
            return bad(format!("C1 and C2 must be at least 1, got {} and {}", self.c1, self.c2));
        }
        if !(self.rho_exponent > 0.0) {
            return bad("rho(eps) must vanish as eps -> 0".into());
        }
        if !(self.length > 0.0 && self.length.is_finite() && self.r.is_finite()) {
            return bad("window must have positive finite length".into());
        }
        let (lo, hi) = (self.lower_bound(), self.upper_bound());
        let target = self.width.unwrap_or_else(|| (lo * hi).sqrt());
        let n = (self.length / target).round().max(1.0) as usize;
        let w = self.length / n as f64;
        if !(lo < w && w < hi) {
            return bad(format!("cell width {w} not in ({lo}, {hi})"));
        }
        Ok((0..=n).map(|i| self.r + w * i as f64).collect())
    }
}

/// Model, tolerances, horizon and truncation box shared by a tracking run.
#[derive(Debug, Clone)]
pub struct TrackerSetup {
    pub flux: FluxSpec,
    pub coefficients: Arc<CoefficientSpec>,
    pub tol: ToleranceProfile,
    pub horizon: f64,
    /// Truncation box at `t = 0`; its ends move with the outermost states.
    pub box_lo: f64,
    pub box_hi: f64,
}

/// Constant state or vacuum between consecutive fronts.
#[derive(Debug, Clone)]
pub enum Region {
    State {
        /// `(v, w)`; `w` is zero for single-phase runs.
        densities: [f64; 2],
        path: CharacteristicPath,
    },
    /// Vacuum whose velocity is interpolated between the orbits of the
    /// states it separated.
    Vacuum { left: CharacteristicPath, right: CharacteristicPath },
}

impl Region {
    pub fn density(&self) -> f64 {
        match self {
            Region::State { densities, .. } => densities[0] + densities[1],
            Region::Vacuum { .. } => 0.0,
        }
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self, Region::Vacuum { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontType {
    Delta,
    Delta3,
    /// Left edge of a vacuum, or a contact between equal velocities.
    ContactLeft,
    /// Right edge of a vacuum.
    ContactRight,
}

#[derive(Debug, Clone)]
pub enum Front {
    Delta(Arc<DeltaFront3>),
    Contact {
        path: CharacteristicPath,
        origin: f64,
        kind: FrontType,
    },
}

impl Front {
    pub fn position(&self, t: f64) -> f64 {
        match self {
            Front::Delta(d) => d.position(t),
            Front::Contact { path, origin, .. } => origin + path.displacement(t),
        }
    }

    pub fn mass(&self, t: f64) -> f64 {
        match self {
            Front::Delta(d) => d.aggregate().mass(t),
            Front::Contact { .. } => 0.0,
        }
    }

    pub fn momentum(&self, t: f64) -> f64 {
        match self {
            Front::Delta(d) => d.aggregate().momentum(t),
            Front::Contact { .. } => 0.0,
        }
    }

    pub fn component_masses(&self, t: f64) -> [f64; 2] {
        match self {
            Front::Delta(d) => [d.xi_v(t), d.xi_w(t)],
            Front::Contact { .. } => [0.0, 0.0],
        }
    }

    /// Delta weight, or the carried velocity of a contact.
    pub fn weight(&self, t: f64) -> f64 {
        match self {
            Front::Delta(d) => d.weight(t),
            Front::Contact { path, .. } => path.velocity(t),
        }
    }

    pub fn delta(&self) -> Option<&DeltaFront> {
        match self {
            Front::Delta(d) => Some(d.aggregate()),
            _ => None,
        }
    }

    pub fn is_contact(&self) -> bool {
        matches!(self, Front::Contact { .. })
    }

    fn mesh(&self) -> &[f64] {
        match self {
            Front::Delta(d) => d.aggregate().mesh(),
            Front::Contact { .. } => &[],
        }
    }
}

/// Interaction of the consecutive fronts `first..=last` at `(time, position)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub position: f64,
    pub first: usize,
    pub last: usize,
}

impl Event {
    pub fn participants(&self) -> Vec<usize> {
        (self.first..=self.last).collect()
    }
}

/// A resolved interaction as written to the event log.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub position: f64,
    pub participants: Vec<usize>,
    /// Set when an outer side of the merged front is vacuum.
    pub vacuum_edge: bool,
    pub fronts_before: usize,
    pub fronts_after: usize,
    /// Every delta front alive after the merge is overcompressive at `time`.
    pub overcompressive: bool,
}

/// Cumulative-mass and velocity snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub m: Vec<f64>,
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub x: f64,
    pub xi: f64,
    pub chi: f64,
    pub xi_v: f64,
    pub xi_w: f64,
}

/// Fronts and the regions between them at one time. `regions.len()` is
/// always `fronts.len() + 1`.
#[derive(Debug, Clone)]
pub struct FrontConfiguration {
    pub time: f64,
    /// End of the interval on which this configuration describes the run.
    pub valid_until: f64,
    pub regions: Vec<Region>,
    pub fronts: Vec<Front>,
    pub event_log: Vec<EventRecord>,
    pub two_phase: bool,
    /// Upper bound on the number of interactions for this discretization.
    pub event_budget: usize,
    setup: TrackerSetup,
    box_paths: (CharacteristicPath, CharacteristicPath),
    pair_crossings: Vec<Option<f64>>,
}

fn same_state(a: &PointState, b: &PointState) -> bool {
    a.v == b.v && a.w == b.w && a.u == b.u
}

impl FrontConfiguration {
    /// Builds the configuration for constant states: `left` up to
    /// `cells[0].0`, then `cells[i].1` from `cells[i].0` on.
    pub fn from_cells(left: PointState, cells: &[(f64, PointState)], setup: TrackerSetup, two_phase: bool) -> Result<Self, TrackError> {
        if !(setup.horizon > 0.0) {
            return Err(TrackError::InvalidData(format!("horizon must be positive, got {}", setup.horizon)));
        }
        let mut states = vec![left];
        let mut breaks = Vec::new();
        for (x, s) in cells {
            if same_state(states.last().unwrap(), s) {
                continue;
            }
            breaks.push(*x);
            states.push(*s);
        }
        for s in &states {
            if !(s.v >= 0.0 && s.w >= 0.0 && s.v + s.w > 0.0 && s.u.is_finite()) {
                return Err(TrackError::InvalidData(format!("state {s:?} needs positive total density")));
            }
            if !two_phase && s.w != 0.0 {
                return Err(TrackError::InvalidData("second-phase mass in a single-phase run".into()));
            }
        }
        let paths: Vec<CharacteristicPath> = states
            .iter()
            .map(|s| CharacteristicPath::new(VelocityOrbit::new(s.u, setup.coefficients.clone()), setup.flux.clone()))
            .collect();
        let mut regions = vec![Region::State {
            densities: [states[0].v, states[0].w],
            path: paths[0].clone(),
        }];
        let mut fronts = Vec::new();
        for (k, &y) in breaks.iter().enumerate() {
            let (a, b) = (&states[k], &states[k + 1]);
            let (pa, pb) = (&paths[k], &paths[k + 1]);
            let next = Region::State {
                densities: [b.v, b.w],
                path: pb.clone(),
            };
            if a.u > b.u {
                let front = DeltaFront::riemann(
                    Side::new(a.v + a.w, pa.clone()),
                    Side::new(b.v + b.w, pb.clone()),
                    y,
                    0.0,
                    setup.horizon,
                    &setup.tol,
                )?;
                fronts.push(Front::Delta(Arc::new(DeltaFront3::from_aggregate(front, [a.v, a.w], [b.v, b.w], [0.0, 0.0]))));
            } else if a.u < b.u {
                fronts.push(Front::Contact {
                    path: pa.clone(),
                    origin: y,
                    kind: FrontType::ContactLeft,
                });
                regions.push(Region::Vacuum {
                    left: pa.clone(),
                    right: pb.clone(),
                });
                fronts.push(Front::Contact {
                    path: pb.clone(),
                    origin: y,
                    kind: FrontType::ContactRight,
                });
            } else {
                fronts.push(Front::Contact {
                    path: pa.clone(),
                    origin: y,
                    kind: FrontType::ContactLeft,
                });
            }
            regions.push(next);
        }
        let box_paths = (paths[0].clone(), paths.last().unwrap().clone());
        let n_fronts = fronts.len();
        let mut cfg = Self {
            time: 0.0,
            valid_until: setup.horizon,
            regions,
            fronts,
            event_log: Vec::new(),
            two_phase,
            event_budget: n_fronts,
            setup,
            box_paths,
            pair_crossings: Vec::new(),
        };
        cfg.pair_crossings = (0..cfg.fronts.len().saturating_sub(1)).map(|i| cfg.pair_crossing(i)).collect();
        Ok(cfg)
    }

    /// Exact discretization of piecewise constant data.
    pub fn from_pieces(data: &PiecewiseConstant, setup: TrackerSetup, two_phase: bool) -> Result<Self, TrackError> {
        Self::from_cells(data.left, &data.pieces, setup, two_phase)
    }

    pub fn setup(&self) -> &TrackerSetup {
        &self.setup
    }

    pub fn horizon(&self) -> f64 {
        self.setup.horizon
    }

    pub fn delta_count(&self) -> usize {
        self.fronts.iter().filter(|f| !f.is_contact()).count()
    }

    fn crossing_nodes(&self, a: &Front, b: &Front, t0: f64) -> Vec<f64> {
        let t1 = self.setup.horizon;
        let n = ((t1 - t0) * 64.0).ceil().max(1.0) as usize;
        let mut nodes: Vec<f64> = (1..=n).map(|k| t0 + (t1 - t0) * k as f64 / n as f64).collect();
        nodes.extend(a.mesh().iter().chain(b.mesh()).copied().filter(|&t| t > t0 && t <= t1));
        nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
        nodes.dedup();
        nodes
    }

    /// Earliest time after the current one at which fronts `i` and `i + 1`
    /// meet, if before the horizon.
    fn pair_crossing(&self, i: usize) -> Option<f64> {
        let (a, b) = (&self.fronts[i], &self.fronts[i + 1]);
        if a.is_contact() && b.is_contact() {
            // Contacts move with their states and never meet.
            return None;
        }
        let gap = |t: f64| b.position(t) - a.position(t);
        let t0 = self.time;
        let touch = 1e-12 * (1.0 + a.position(t0).abs());
        let mut prev = t0;
        if gap(t0) <= touch {
            return Some(t0);
        }
        let tol = ToleranceProfile::new(1e-14, 1e-14);
        for t in self.crossing_nodes(a, b, t0) {
            if gap(t) <= 0.0 {
                return find_root(gap, prev, t, &tol).ok().or(Some(t));
            }
            prev = t;
        }
        None
    }

    /// Earliest pending interaction, grouping fronts that meet the first
    /// pair at the same time and place.
    pub fn next_interaction(&self) -> Option<Event> {
        let (mut best, mut time) = (None, f64::INFINITY);
        for (i, c) in self.pair_crossings.iter().enumerate() {
            if let Some(t) = *c {
                if t < time {
                    time = t;
                    best = Some(i);
                }
            }
        }
        let i = best?;
        let position = 0.5 * (self.fronts[i].position(time) + self.fronts[i + 1].position(time));
        let near = |k: usize| {
            let tie = self.pair_crossings[k].is_some_and(|t| t - time <= 1e-12);
            let touching = (self.fronts[k + 1].position(time) - self.fronts[k].position(time)).abs() <= 1e-9 * (1.0 + position.abs());
            tie || touching
        };
        let (mut first, mut last) = (i, i + 1);
        while first > 0 && near(first - 1) {
            first -= 1;
        }
        while last + 1 < self.fronts.len() && near(last) {
            last += 1;
        }
        Some(Event {
            time,
            position,
            first,
            last,
        })
    }

    fn outer_side(&self, region: &Region, on_left: bool) -> (Side, [f64; 2]) {
        match region {
            Region::State { densities, path } => (Side::new(densities[0] + densities[1], path.clone()), *densities),
            // The merged front sits at the vacuum edge next to it.
            Region::Vacuum { left, right } => {
                let edge = if on_left { right } else { left };
                (Side::new(0.0, edge.clone()), [0.0, 0.0])
            }
        }
    }

    /// Replaces the participating fronts by one delta front born at the
    /// event point with their combined mass and momentum.
    pub fn resolve_interaction(&self, event: &Event) -> Result<Self, TrackError> {
        let (t, x) = (event.time, event.position);
        let parts = &self.fronts[event.first..=event.last];
        let mut comp = [0.0; 2];
        let mut momentum = 0.0;
        for f in parts {
            let m = f.component_masses(t);
            comp[0] += m[0];
            comp[1] += m[1];
            momentum += f.momentum(t);
        }
        let mass = comp[0] + comp[1];
        let left_region = &self.regions[event.first];
        let right_region = &self.regions[event.last + 1];
        let (left, lc) = self.outer_side(left_region, true);
        let (right, rc) = self.outer_side(right_region, false);
        let (ul, ur) = (left.velocity(t), right.velocity(t));
        let ubar = if mass > 0.0 { momentum / mass } else { 0.5 * (ul + ur) };
        let slack = self.setup.tol.abs_tol.max(self.setup.tol.rel_tol * ubar.abs());
        let bad_left = left.density > 0.0 && ubar >= ul + slack;
        let bad_right = right.density > 0.0 && ubar <= ur - slack;
        if !(mass > 0.0) || bad_left || bad_right {
            return Err(TrackError::NonOvercompressiveMerge {
                t,
                x,
                velocity: ubar,
                left: ul,
                right: ur,
            });
        }
        let vacuum_edge = left.density == 0.0 || right.density == 0.0;
        let front = DeltaFront::delta_data(left, right, mass, ubar, x, t, self.setup.horizon, &self.setup.tol)?;
        let merged = Front::Delta(Arc::new(DeltaFront3::from_aggregate(front, lc, rc, comp)));

        let mut next = self.clone();
        next.time = t;
        next.valid_until = self.setup.horizon;
        next.fronts.splice(event.first..=event.last, [merged]);
        next.regions.drain(event.first + 1..=event.last);
        let overcompressive = next
            .fronts
            .iter()
            .filter_map(|f| f.delta())
            .filter(|d| d.birth_time() < t || d.birth_mass() > 0.0)
            .all(|d| d.is_overcompressive(t) || d.left().density == 0.0 && d.right().density == 0.0);
        next.event_log.push(EventRecord {
            time: t,
            position: x,
            participants: event.participants(),
            vacuum_edge,
            fronts_before: self.fronts.len(),
            fronts_after: next.fronts.len(),
            overcompressive,
        });
        // Pairs untouched by the merge keep their crossing times.
        let k = event.first;
        let removed = event.last - event.first;
        let mut crossings: Vec<Option<f64>> = Vec::with_capacity(next.fronts.len().saturating_sub(1));
        for (i, c) in self.pair_crossings.iter().enumerate() {
            if i + 1 < k || i > event.last {
                crossings.push(*c);
            } else if i + 1 == k || i == event.last {
                crossings.push(None); // placeholder, recomputed below
            }
        }
        debug_assert_eq!(crossings.len(), next.fronts.len().saturating_sub(1), "removed {removed}");
        next.pair_crossings = crossings;
        if k > 0 {
            next.pair_crossings[k - 1] = next.pair_crossing(k - 1);
        }
        if k + 1 < next.fronts.len() {
            next.pair_crossings[k] = next.pair_crossing(k);
        }
        Ok(next)
    }

    /// Box ends at time `t`.
    pub fn box_at(&self, t: f64) -> (f64, f64) {
        (
            self.setup.box_lo + self.box_paths.0.displacement(t),
            self.setup.box_hi + self.box_paths.1.displacement(t),
        )
    }

    fn check_time(&self, t: f64) -> Result<(), TrackError> {
        let slack = 1e-12 * (1.0 + t.abs());
        if t < self.time - slack || t > self.valid_until + slack {
            return Err(TrackError::TimeOutOfRange {
                t,
                lo: self.time,
                hi: self.valid_until,
            });
        }
        Ok(())
    }

    /// Region spans `[a_k, b_k]` at `t`, clipped at the box ends.
    fn spans(&self, t: f64) -> Vec<(f64, f64)> {
        let (lo, hi) = self.box_at(t);
        let pos: Vec<f64> = self.fronts.iter().map(|f| f.position(t)).collect();
        (0..self.regions.len())
            .map(|k| {
                let a = if k == 0 { lo } else { pos[k - 1] };
                let b = if k == pos.len() { hi } else { pos[k] };
                (a, b)
            })
            .collect()
    }

    /// Total mass in the box: state masses plus front masses.
    pub fn total_mass(&self, t: f64) -> Result<f64, TrackError> {
        self.check_time(t)?;
        let spans = self.spans(t);
        let states: f64 = self.regions.iter().zip(&spans).map(|(r, (a, b))| r.density() * (b - a)).sum();
        Ok(states + self.fronts.iter().map(|f| f.mass(t)).sum::<f64>())
    }

    /// Total momentum in the box.
    pub fn total_momentum(&self, t: f64) -> Result<f64, TrackError> {
        self.check_time(t)?;
        let spans = self.spans(t);
        let states: f64 = self
            .regions
            .iter()
            .zip(&spans)
            .map(|(r, (a, b))| match r {
                Region::State { path, .. } => r.density() * path.velocity(t) * (b - a),
                Region::Vacuum { .. } => 0.0,
            })
            .sum();
        Ok(states + self.fronts.iter().map(|f| f.momentum(t)).sum::<f64>())
    }

    /// Whether every front lies inside the box at `t`.
    pub fn inside_box(&self, t: f64) -> bool {
        let (lo, hi) = self.box_at(t);
        self.fronts.iter().all(|f| {
            let x = f.position(t);
            lo <= x && x <= hi
        })
    }

    /// Velocity, cumulative mass from the left box end and the atoms at `t`.
    pub fn sample(&self, t: f64, grid: &[f64]) -> Result<Snapshot, TrackError> {
        self.check_time(t)?;
        let spans = self.spans(t);
        let atoms: Vec<Atom> = self
            .fronts
            .iter()
            .filter_map(|f| match f {
                Front::Delta(d) => Some(Atom {
                    x: d.position(t),
                    xi: d.aggregate().mass(t),
                    chi: d.weight(t),
                    xi_v: d.xi_v(t),
                    xi_w: d.xi_w(t),
                }),
                _ => None,
            })
            .collect();
        let mut u = Vec::with_capacity(grid.len());
        let mut m = Vec::with_capacity(grid.len());
        for &x in grid {
            let k = spans.partition_point(|(_, b)| *b < x).min(spans.len() - 1);
            let (a, b) = spans[k];
            let region = &self.regions[k];
            let on_atom = atoms.iter().find(|at| at.x == x);
            let vel = if let Some(at) = on_atom {
                at.chi
            } else {
                match region {
                    Region::State { path, .. } => path.velocity(t),
                    Region::Vacuum { left, right } => {
                        let (ua, ub) = (left.velocity(t), right.velocity(t));
                        if b > a {
                            ua + (ub - ua) * ((x - a) / (b - a)).clamp(0.0, 1.0)
                        } else {
                            0.5 * (ua + ub)
                        }
                    }
                }
            };
            u.push(vel);
            let mut acc = 0.0;
            for (j, r) in self.regions.iter().enumerate() {
                let (ra, rb) = spans[j];
                if ra >= x {
                    break;
                }
                acc += r.density() * (rb.min(x) - ra);
            }
            acc += atoms.iter().filter(|at| at.x < x).map(|at| at.xi).sum::<f64>();
            m.push(acc);
        }
        Ok(Snapshot {
            t,
            x: grid.to_vec(),
            u,
            m,
            atoms,
        })
    }
}

/// Discretizes `data` on the partition and attaches `left` on `x <= r`.
/// Each cell takes the data value at its right endpoint.
pub fn discretize_initial(
    data: &dyn InitialProfile,
    left: PointState,
    spec: &PartitionSpec,
    setup: TrackerSetup,
    two_phase: bool,
) -> Result<FrontConfiguration, TrackError> {
    let nodes = spec.nodes()?;
    let cells: Vec<(f64, PointState)> = nodes.windows(2).map(|w| (w[0], data.state(w[1]))).collect();
    let mut cfg = FrontConfiguration::from_cells(left, &cells, setup, two_phase)?;
    let budget = (2.0 * spec.length / spec.lower_bound()).ceil() as usize + 2;
    cfg.event_budget = cfg.event_budget.max(budget);
    Ok(cfg)
}

/// Configurations at the start and after each interaction.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub configurations: Vec<FrontConfiguration>,
    pub horizon: f64,
}

impl Trajectory {
    pub fn events(&self) -> &[EventRecord] {
        &self.configurations.last().unwrap().event_log
    }

    pub fn last(&self) -> &FrontConfiguration {
        self.configurations.last().unwrap()
    }

    /// Configuration describing the run at `t`.
    pub fn at(&self, t: f64) -> Result<&FrontConfiguration, TrackError> {
        let first = &self.configurations[0];
        if t < first.time || t > self.horizon * (1.0 + 1e-12) {
            return Err(TrackError::TimeOutOfRange {
                t,
                lo: first.time,
                hi: self.horizon,
            });
        }
        let k = self.configurations.partition_point(|c| c.time <= t).max(1) - 1;
        Ok(&self.configurations[k])
    }

    pub fn sample(&self, t: f64, grid: &[f64]) -> Result<Snapshot, TrackError> {
        self.at(t)?.sample(t, grid)
    }

    pub fn total_mass(&self, t: f64) -> Result<f64, TrackError> {
        self.at(t)?.total_mass(t)
    }

    pub fn total_momentum(&self, t: f64) -> Result<f64, TrackError> {
        self.at(t)?.total_momentum(t)
    }
}

/// Runs the event loop up to `horizon`.
pub fn track(config: &FrontConfiguration, horizon: f64) -> Result<Trajectory, TrackError> {
    match track_partial(config, horizon) {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}

/// Like [`track`], but on failure also returns the configurations reached
/// so far, so the event log up to the failing interaction survives.
pub fn track_partial(config: &FrontConfiguration, horizon: f64) -> (Trajectory, Option<TrackError>) {
    let mut current = config.clone();
    let mut configurations = Vec::new();
    if !(horizon > config.time) || horizon > config.horizon() * (1.0 + 1e-12) {
        configurations.push(current);
        let err = TrackError::TimeOutOfRange {
            t: horizon,
            lo: config.time,
            hi: config.horizon(),
        };
        return (Trajectory { configurations, horizon }, Some(err));
    }
    current.valid_until = horizon;
    let guard = 10 * config.event_budget.max(1);
    let mut events = 0usize;
    let mut failure = None;
    while let Some(ev) = current.next_interaction() {
        if ev.time > horizon {
            break;
        }
        events += 1;
        if events > guard {
            failure = Some(TrackError::EventBudgetExceeded {
                events,
                budget: config.event_budget,
            });
            break;
        }
        match current.resolve_interaction(&ev) {
            Ok(mut next) => {
                next.valid_until = horizon;
                current.valid_until = ev.time;
                configurations.push(current);
                current = next;
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    configurations.push(current);
    (Trajectory { configurations, horizon }, failure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FunctionProfile;

    fn setup(horizon: f64) -> TrackerSetup {
        TrackerSetup {
            flux: FluxSpec::identity(),
            coefficients: Arc::new(CoefficientSpec::zero()),
            tol: ToleranceProfile::default(),
            horizon,
            box_lo: -5.0,
            box_hi: 6.0,
        }
    }

    fn triple() -> PiecewiseConstant {
        PiecewiseConstant::new(
            PointState::new(1.0, 2.0),
            vec![(0.0, PointState::new(1.0, 0.0)), (1.0, PointState::new(1.0, -2.0))],
        )
        .unwrap()
    }

    #[test]
    fn triple_state_single_merge() {
        let cfg = FrontConfiguration::from_pieces(&triple(), setup(1.0), false).unwrap();
        let ev = cfg.next_interaction().unwrap();
        assert!((ev.time - 0.5).abs() < 1e-9);
        assert!((ev.position - 0.5).abs() < 1e-9);
        assert_eq!(ev.participants(), vec![0, 1]);
        let traj = track(&cfg, 1.0).unwrap();
        assert_eq!(traj.events().len(), 1);
        let last = traj.last();
        assert_eq!(last.fronts.len(), 1);
        let d = last.fronts[0].delta().unwrap();
        assert!((d.position(1.0) - 0.5).abs() < 1e-9);
        assert!((d.mass(1.0) - 4.0).abs() < 1e-9);
        assert!(d.weight(1.0).abs() < 1e-9);
    }

    #[test]
    fn merged_data_values() {
        let cfg = FrontConfiguration::from_pieces(&triple(), setup(1.0), false).unwrap();
        let ev = cfg.next_interaction().unwrap();
        assert!((cfg.fronts[0].mass(ev.time) - 1.0).abs() < 1e-9);
        assert!((cfg.fronts[1].mass(ev.time) - 1.0).abs() < 1e-9);
        let next = cfg.resolve_interaction(&ev).unwrap();
        let d = next.fronts[0].delta().unwrap();
        assert!((d.birth_mass() - 2.0).abs() < 1e-9);
        assert!(d.birth_velocity().abs() < 1e-9);
        assert!((d.mass(0.75) - 3.0).abs() < 1e-8);
    }

    #[test]
    fn constant_data_has_no_fronts() {
        let data = FunctionProfile::new(Arc::new(|_| 1.0), Arc::new(|_| 0.5));
        let spec = PartitionSpec {
            r: 0.0,
            length: 4.0,
            eps: 2f64.powi(-6),
            alpha: 0.5,
            c1: 1.0,
            c2: 1.0,
            rho_exponent: 0.25,
            width: None,
        };
        let cfg = discretize_initial(&data, PointState::new(1.0, 0.5), &spec, setup(1.0), false).unwrap();
        assert_eq!(cfg.fronts.len(), 0);
        assert_eq!(cfg.regions.len(), 1);
        let traj = track(&cfg, 1.0).unwrap();
        assert!(traj.events().is_empty());
    }

    #[test]
    fn increasing_data_only_separates() {
        let data = FunctionProfile::new(Arc::new(|_| 1.0), Arc::new(|x: f64| x));
        let spec = PartitionSpec {
            r: 0.0,
            length: 2.0,
            eps: 2f64.powi(-6),
            alpha: 0.5,
            c1: 1.0,
            c2: 1.0,
            rho_exponent: 0.25,
            width: None,
        };
        let cfg = discretize_initial(&data, PointState::new(1.0, 0.0), &spec, setup(1.0), false).unwrap();
        assert!(cfg.fronts.iter().all(|f| f.is_contact()));
        assert!(cfg.next_interaction().is_none());
    }

    #[test]
    fn decreasing_data_gives_one_delta_per_break() {
        let data = FunctionProfile::new(Arc::new(|_| 1.0), Arc::new(|x: f64| -x));
        let spec = PartitionSpec {
            r: 0.0,
            length: 2.0,
            eps: 2f64.powi(-6),
            alpha: 0.5,
            c1: 1.0,
            c2: 1.0,
            rho_exponent: 0.25,
            width: None,
        };
        let nodes = spec.nodes().unwrap();
        let n = nodes.len() - 1;
        let cfg = discretize_initial(&data, PointState::new(1.0, 0.0), &spec, setup(1.0), false).unwrap();
        // The first cell already differs from the left state.
        assert_eq!(cfg.delta_count(), n);
        assert!(cfg.fronts.iter().all(|f| !f.is_contact()));
    }

    #[test]
    fn partition_bounds_are_checked() {
        let spec = PartitionSpec {
            r: 0.0,
            length: 1.0,
            eps: 0.01,
            alpha: 0.5,
            c1: 1.0,
            c2: 1.0,
            rho_exponent: 0.5,
            width: None,
        };
        assert!(matches!(spec.nodes(), Err(TrackError::InvalidPartition(_))));
        let spec = PartitionSpec { alpha: 1.5, ..spec };
        assert!(matches!(spec.nodes(), Err(TrackError::InvalidPartition(_))));
    }

    #[test]
    fn sample_after_merge() {
        let cfg = FrontConfiguration::from_pieces(&triple(), setup(1.0), false).unwrap();
        let traj = track(&cfg, 1.0).unwrap();
        let snap = traj.sample(1.0, &[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(snap.atoms.len(), 1);
        assert!((snap.atoms[0].x - 0.5).abs() < 1e-9);
        assert!((snap.atoms[0].xi - 4.0).abs() < 1e-9);
        assert_eq!(snap.u, vec![2.0, 2.0, -2.0]);
        assert!(traj.sample(1.5, &[0.0]).is_err());
    }

    #[test]
    fn mass_is_conserved_through_merge() {
        let cfg = FrontConfiguration::from_pieces(&triple(), setup(1.0), false).unwrap();
        let traj = track(&cfg, 1.0).unwrap();
        let m0 = traj.total_mass(0.0).unwrap();
        assert!((m0 - 11.0).abs() < 1e-12);
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            assert!((traj.total_mass(t).unwrap() - m0).abs() < 1e-8 * m0, "t = {t}");
            assert!(traj.total_momentum(t).unwrap().abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn delta_swallows_contact_and_enters_vacuum() {
        // A delta front (from 2 > 1) runs into the vacuum opened between
        // velocities 1 and 3.
        let data = PiecewiseConstant::new(
            PointState::new(1.0, 2.0),
            vec![(0.0, PointState::new(1.0, 1.0)), (0.2, PointState::new(1.0, 3.0))],
        )
        .unwrap();
        let cfg = FrontConfiguration::from_pieces(&data, setup(2.0), false).unwrap();
        assert_eq!(cfg.fronts.len(), 3);
        let traj = track(&cfg, 2.0).unwrap();
        let ev = &traj.events()[0];
        assert!(ev.vacuum_edge);
        assert_eq!(ev.participants, vec![0, 1]);
        let m0 = traj.total_mass(0.0).unwrap();
        for k in 0..=10 {
            let t = 0.2 * k as f64;
            assert!((traj.total_mass(t).unwrap() - m0).abs() < 1e-8 * m0);
        }
    }
}
