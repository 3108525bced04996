//! JSON scenarios: parsing, validation, and the run/compare drivers that
//! write CSV artifacts and a gnuplot script.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::dissipativity_residual;
use crate::fronts::{discretize_initial, track_partial, FrontConfiguration, PartitionSpec, TrackerSetup, Trajectory};
use crate::gvp::oracle::ShockOracle;
use crate::gvp::GvpField;
use crate::model::{builtin_flux, AirVelocity, CoefficientSpec, Drag, FluxSpec, InitialProfile, PiecewiseConstant, PiecewiseLinear, PointState};
use crate::numerics::ToleranceProfile;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid field `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("incompatible scenario: {0}")]
    Incompatible(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl ScenarioError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Parse { .. } | ScenarioError::Validation { .. } | ScenarioError::Incompatible(_) => 2,
            ScenarioError::Solver(_) => 3,
            ScenarioError::Io(_) => 1,
        }
    }
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

fn io(e: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Io(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub model: ModelBlock,
    pub initial: InitialBlock,
    pub solver: SolverBlock,
    pub horizon: f64,
    pub output: OutputBlock,
    pub domain: DomainBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub flux: FluxBlock,
    pub kappa: KappaBlock,
    pub air_velocity: AirBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxBlock {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KappaBlock {
    Zero,
    Constant { value: f64 },
    /// `1 / (t + upkappa)`.
    Algebraic { upkappa: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AirBlock {
    Zero,
    Constant { value: f64 },
    /// `x / (t + upkappa)`, with `upkappa` taken from the drag.
    Algebraic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateBlock {
    pub v: f64,
    pub u: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceBlock {
    /// Where this piece starts.
    pub x: f64,
    pub v: f64,
    pub u: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialBlock {
    Pieces {
        left: StateBlock,
        pieces: Vec<PieceBlock>,
    },
    /// Linear interpolation between samples.
    Sampled {
        left: StateBlock,
        x: Vec<f64>,
        v: Vec<f64>,
        u: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fronts: Option<FrontsBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gvp: Option<GvpBlock>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontsBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionBlock {
    pub r: f64,
    pub length: f64,
    pub eps: f64,
    pub alpha: f64,
    pub c1: f64,
    pub c2: f64,
    /// `rho(eps) = eps^rho_exponent`.
    pub rho_exponent: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GvpBlock {
    /// Required when the model's drag is not algebraic (comparison runs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upkappa: Option<f64>,
    #[serde(default = "default_cells")]
    pub cells: usize,
    pub support: [f64; 2],
}

fn default_cells() -> usize {
    4096
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub times: Vec<f64>,
    pub grid: GridBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridBlock {
    pub fn points(&self) -> Vec<f64> {
        let n = self.n.max(2);
        (0..n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64).collect()
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n.max(2) - 1) as f64
    }
}

/// Truncation box at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBlock {
    pub lo: f64,
    pub hi: f64,
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

pub fn to_json(s: &Scenario) -> String {
    serde_json::to_string_pretty(s).expect("scenario serializes")
}

/// Which solver a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Fronts,
    Gvp,
}

/// The two supported comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareMode {
    /// Zero drag fronts against the variational solver at large `upkappa`.
    PressurelessLimit,
    /// Variational atoms against the shock ODE for Riemann data.
    ShockOracle,
}

fn finite(field: &str, x: f64) -> Result<(), ScenarioError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite, got {x}")))
    }
}

impl Scenario {
    fn two_phase(&self) -> bool {
        match &self.initial {
            InitialBlock::Pieces { left, pieces } => left.w.is_some() || pieces.iter().any(|p| p.w.is_some()),
            InitialBlock::Sampled { left, w, .. } => left.w.is_some() || w.is_some(),
        }
    }

    fn states(&self) -> Vec<(String, PointState)> {
        let st = |v: f64, u: f64, w: Option<f64>| PointState::two_phase(v, w.unwrap_or(0.0), u);
        match &self.initial {
            InitialBlock::Pieces { left, pieces } => std::iter::once(("initial.left".to_string(), st(left.v, left.u, left.w)))
                .chain(pieces.iter().enumerate().map(|(i, p)| (format!("initial.pieces[{i}]"), st(p.v, p.u, p.w))))
                .collect(),
            InitialBlock::Sampled { left, v, u, w, .. } => std::iter::once(("initial.left".to_string(), st(left.v, left.u, left.w)))
                .chain((0..v.len()).map(|i| {
                    let wi = w.as_ref().and_then(|w| w.get(i).copied());
                    (format!("initial.sampled[{i}]"), st(v[i], u[i], wi))
                }))
                .collect(),
        }
    }

    pub fn flux(&self) -> Result<FluxSpec, ScenarioError> {
        builtin_flux(&self.model.flux.name, &self.model.flux.params).map_err(|e| invalid("model.flux", e.to_string()))
    }

    fn upkappa(&self) -> Option<f64> {
        match self.model.kappa {
            KappaBlock::Algebraic { upkappa } => Some(upkappa),
            _ => None,
        }
    }

    /// Drag and air velocity as seen by the front tracker.
    pub fn coefficients(&self) -> Result<CoefficientSpec, ScenarioError> {
        let drag = match self.model.kappa {
            KappaBlock::Zero => Drag::Zero,
            KappaBlock::Constant { value } => Drag::Constant(value),
            KappaBlock::Algebraic { upkappa } => Drag::Algebraic { upkappa },
        };
        let air = match self.model.air_velocity {
            AirBlock::Zero => AirVelocity::Zero,
            AirBlock::Constant { value } => AirVelocity::Constant(value),
            AirBlock::Algebraic => {
                return Err(invalid("model.air_velocity", "x-dependent air velocity needs the gvp solver"));
            }
        };
        CoefficientSpec::new(drag, air).map_err(|e| invalid("model.kappa", e.to_string()))
    }

    fn profile(&self) -> (PointState, Arc<dyn InitialProfile>) {
        let st = |b: &StateBlock| PointState::two_phase(b.v, b.w.unwrap_or(0.0), b.u);
        match &self.initial {
            InitialBlock::Pieces { left, pieces } => {
                let pc = PiecewiseConstant {
                    left: st(left),
                    pieces: pieces.iter().map(|p| (p.x, PointState::two_phase(p.v, p.w.unwrap_or(0.0), p.u))).collect(),
                };
                (st(left), Arc::new(pc))
            }
            InitialBlock::Sampled { left, x, v, u, w } => {
                let states = (0..x.len())
                    .map(|i| PointState::two_phase(v[i], w.as_ref().map_or(0.0, |w| w[i]), u[i]))
                    .collect();
                (st(left), Arc::new(PiecewiseLinear::new(x.clone(), states).expect("validated samples")))
            }
        }
    }

    fn validate_common(&self) -> Result<(), ScenarioError> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid("horizon", format!("must be positive, got {}", self.horizon)));
        }
        finite("domain.lo", self.domain.lo)?;
        finite("domain.hi", self.domain.hi)?;
        if !(self.domain.lo < self.domain.hi) {
            return Err(invalid("domain", "lo must be below hi"));
        }
        let g = &self.output.grid;
        finite("output.grid.lo", g.lo)?;
        finite("output.grid.hi", g.hi)?;
        if !(g.lo < g.hi && g.n >= 2) {
            return Err(invalid("output.grid", "need lo < hi and n >= 2"));
        }
        if self.output.times.is_empty() {
            return Err(invalid("output.times", "at least one output time is required"));
        }
        for (i, &t) in self.output.times.iter().enumerate() {
            if !(0.0..=self.horizon).contains(&t) {
                return Err(invalid(format!("output.times[{i}]"), format!("{t} outside [0, {}]", self.horizon)));
            }
        }
        if self.output.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("output.times", "must be strictly increasing"));
        }
        match &self.initial {
            InitialBlock::Pieces { pieces, .. } => {
                for (i, w) in pieces.windows(2).enumerate() {
                    if !(w[0].x < w[1].x) {
                        return Err(invalid(format!("initial.pieces[{}].x", i + 1), "breaks must be strictly increasing"));
                    }
                }
                for (i, p) in pieces.iter().enumerate() {
                    finite(&format!("initial.pieces[{i}].x"), p.x)?;
                }
            }
            InitialBlock::Sampled { x, v, u, w, .. } => {
                if x.len() < 2 || v.len() != x.len() || u.len() != x.len() || w.as_ref().is_some_and(|w| w.len() != x.len()) {
                    return Err(invalid("initial.x", "sample arrays need equal lengths of at least 2"));
                }
                for (i, w) in x.windows(2).enumerate() {
                    if !(w[0] < w[1]) {
                        return Err(invalid(format!("initial.x[{}]", i + 1), "sample points must be strictly increasing"));
                    }
                }
            }
        }
        for (field, s) in self.states() {
            finite(&format!("{field}.u"), s.u)?;
            if !(s.v >= 0.0 && s.v.is_finite()) {
                return Err(invalid(format!("{field}.v"), format!("must be nonnegative, got {}", s.v)));
            }
            if !(s.w >= 0.0 && s.w.is_finite()) {
                return Err(invalid(format!("{field}.w"), format!("must be nonnegative, got {}", s.w)));
            }
        }
        let flux = self.flux()?;
        let (lo, hi) = self
            .states()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (_, s)| (a.min(s.u), b.max(s.u)));
        flux.check_monotone(lo - 1e-9, hi + 1e-9).map_err(|e| invalid("model.flux", e.to_string()))?;
        Ok(())
    }

    fn validate_fronts(&self) -> Result<(), ScenarioError> {
        self.coefficients()?;
        for (field, s) in self.states() {
            if !(s.v + s.w > 0.0) {
                return Err(invalid(format!("{field}.v"), "the front tracker needs positive total density"));
            }
        }
        let fb = self.solver.fronts.as_ref().expect("fronts block");
        if let Some(p) = &fb.partition {
            self.partition(p).nodes().map_err(|e| invalid("solver.fronts.partition", e.to_string()))?;
        } else if matches!(self.initial, InitialBlock::Sampled { .. }) {
            return Err(invalid("solver.fronts.partition", "sampled data needs a partition"));
        }
        Ok(())
    }

    fn partition(&self, p: &PartitionBlock) -> PartitionSpec {
        PartitionSpec {
            r: p.r,
            length: p.length,
            eps: p.eps,
            alpha: p.alpha,
            c1: p.c1,
            c2: p.c2,
            rho_exponent: p.rho_exponent,
            width: p.width,
        }
    }

    /// `upkappa` the variational solver runs with.
    fn gvp_upkappa(&self, for_compare: bool) -> Result<f64, ScenarioError> {
        let gb = self.solver.gvp.as_ref().ok_or_else(|| invalid("solver.gvp", "missing"))?;
        let k = match (self.upkappa(), gb.upkappa) {
            (Some(a), Some(b)) if a != b => return Err(invalid("solver.gvp.upkappa", format!("{b} differs from the model drag's {a}"))),
            (Some(a), _) => a,
            (None, Some(b)) if for_compare => b,
            _ => {
                return Err(ScenarioError::Incompatible(
                    "the gvp solver needs algebraic drag 1/(t+k) and air velocity x/(t+k)".into(),
                ))
            }
        };
        if !(k > 0.0 && k.is_finite()) {
            return Err(invalid("solver.gvp.upkappa", format!("must be positive, got {k}")));
        }
        Ok(k)
    }

    fn validate_gvp(&self, for_compare: bool) -> Result<(), ScenarioError> {
        let gb = self.solver.gvp.as_ref().expect("gvp block");
        if !self.flux()?.is_identity() {
            return Err(ScenarioError::Incompatible("the gvp solver needs the identity flux".into()));
        }
        if self.two_phase() {
            return Err(ScenarioError::Incompatible("the gvp solver is single-phase".into()));
        }
        if !for_compare && !(matches!(self.model.kappa, KappaBlock::Algebraic { .. }) && self.model.air_velocity == AirBlock::Algebraic) {
            return Err(ScenarioError::Incompatible(
                "the gvp solver needs algebraic drag 1/(t+k) and air velocity x/(t+k)".into(),
            ));
        }
        self.gvp_upkappa(for_compare)?;
        let [lo, hi] = gb.support;
        if !(lo < 0.0 && 0.0 < hi) {
            return Err(invalid("solver.gvp.support", "must contain 0 in its interior"));
        }
        if gb.cells < 4 {
            return Err(invalid("solver.gvp.cells", "need at least 4 cells"));
        }
        for (field, s) in self.states() {
            if !(s.v > 0.0) {
                return Err(invalid(format!("{field}.v"), "the gvp solver needs positive density"));
            }
        }
        Ok(())
    }

    /// Solver used by `run`: exactly one block must be present.
    pub fn solver_kind(&self) -> Result<SolverKind, ScenarioError> {
        match (&self.solver.fronts, &self.solver.gvp) {
            (Some(_), None) => Ok(SolverKind::Fronts),
            (None, Some(_)) => Ok(SolverKind::Gvp),
            (None, None) => Err(invalid("solver", "configure either `fronts` or `gvp`")),
            (Some(_), Some(_)) => Err(invalid("solver", "`run` takes one solver; use `compare` for both")),
        }
    }

    /// Full validation for `run`.
    pub fn validate(&self) -> Result<SolverKind, ScenarioError> {
        self.validate_common()?;
        let kind = self.solver_kind()?;
        match kind {
            SolverKind::Fronts => self.validate_fronts()?,
            SolverKind::Gvp => self.validate_gvp(false)?,
        }
        Ok(kind)
    }

    /// Validation for `compare`.
    pub fn compare_mode(&self) -> Result<CompareMode, ScenarioError> {
        self.validate_common()?;
        if self.solver.gvp.is_none() {
            return Err(ScenarioError::Incompatible("compare needs a gvp block".into()));
        }
        if !self.flux()?.is_identity() {
            return Err(ScenarioError::Incompatible("compare needs the identity flux".into()));
        }
        let zero = self.model.kappa == KappaBlock::Zero && self.model.air_velocity == AirBlock::Zero;
        let algebraic = matches!(self.model.kappa, KappaBlock::Algebraic { .. }) && self.model.air_velocity == AirBlock::Algebraic;
        if zero && self.solver.fronts.is_some() {
            self.validate_fronts()?;
            self.validate_gvp(true)?;
            return Ok(CompareMode::PressurelessLimit);
        }
        if algebraic {
            self.validate_gvp(false)?;
            match &self.initial {
                InitialBlock::Pieces { left, pieces } if pieces.len() == 1 && left.u > pieces[0].u => {}
                _ => {
                    return Err(ScenarioError::Incompatible(
                        "the shock oracle needs Riemann data with a single downward velocity jump".into(),
                    ))
                }
            }
            return Ok(CompareMode::ShockOracle);
        }
        Err(ScenarioError::Incompatible(
            "compare needs zero drag with both solvers, or algebraic drag with Riemann data".into(),
        ))
    }
}

/// Settings that come from the command line rather than the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub tol: ToleranceProfile,
    pub quiet: bool,
}

impl RunOptions {
    /// Output directory: explicit, else the scenario's, else
    /// `$SDW_OUT_DIR`, else `sdw_out`.
    pub fn resolve(explicit: Option<PathBuf>, scenario: &Scenario, tol: ToleranceProfile, quiet: bool) -> Self {
        let out_dir = explicit
            .or_else(|| scenario.output.dir.as_ref().map(PathBuf::from))
            .or_else(|| std::env::var_os("SDW_OUT_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("sdw_out"));
        Self { out_dir, tol, quiet }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub solver: SolverKind,
    pub files: Vec<PathBuf>,
    pub events: usize,
    /// Largest relative change of total mass over the output times.
    pub mass_drift: f64,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

struct Writers {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writers {
    fn new(dir: &Path) -> Result<Self, ScenarioError> {
        fs::create_dir_all(dir).map_err(|e| ScenarioError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), ScenarioError> {
        let path = self.dir.join(name);
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(&path).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(io)?;
        self.files.push(path);
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<(), ScenarioError> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(io)?;
        self.files.push(path);
        Ok(())
    }
}

fn plot_script(times: &[f64]) -> String {
    let mut s = String::from("set datafile separator ','\nset key outside\nset xlabel 'x'\n");
    for (col, label, file) in [(3, "u", "velocity.png"), (4, "m", "mass.png")] {
        s += &format!("set terminal pngcairo size 900,600\nset output '{file}'\nset ylabel '{label}'\nplot \\\n");
        let lines: Vec<String> = times
            .iter()
            .map(|t| format!("  'snapshots.csv' using 2:($1=={} ? ${col} : 1/0) with lines title 't={t}'", num(*t)))
            .collect();
        s += &lines.join(", \\\n");
        s += "\n";
    }
    s += "set output 'atoms.png'\nset ylabel 't'\nplot 'atoms.csv' using 2:1 with points pt 7 title 'point masses'\n";
    s
}

fn events_rows(traj: &Trajectory) -> Vec<Vec<String>> {
    traj.events()
        .iter()
        .map(|e| {
            let parts: Vec<String> = e.participants.iter().map(|p| p.to_string()).collect();
            vec![
                num(e.time),
                num(e.position),
                format!("[{}]", parts.join(",")),
                if e.vacuum_edge { "vacuum_edge".into() } else { String::new() },
            ]
        })
        .collect()
}

const EVENTS_HEADER: [&str; 4] = ["T", "X", "participants", "note"];
const DIAG_HEADER: [&str; 5] = ["t", "M0", "M1", "entropy_residual_max", "oleinik_violation"];

fn build_fronts(s: &Scenario, tol: &ToleranceProfile) -> Result<FrontConfiguration, ScenarioError> {
    let setup = TrackerSetup {
        flux: s.flux()?,
        coefficients: Arc::new(s.coefficients()?),
        tol: *tol,
        horizon: s.horizon,
        box_lo: s.domain.lo,
        box_hi: s.domain.hi,
    };
    let two = s.two_phase();
    let (left, profile) = s.profile();
    let part = s.solver.fronts.as_ref().and_then(|f| f.partition);
    let cfg = match (&s.initial, part) {
        (InitialBlock::Pieces { .. }, None) => {
            let InitialBlock::Pieces { left, pieces } = &s.initial else { unreachable!() };
            let st = |v: f64, u: f64, w: Option<f64>| PointState::two_phase(v, w.unwrap_or(0.0), u);
            let cells: Vec<(f64, PointState)> = pieces.iter().map(|p| (p.x, st(p.v, p.u, p.w))).collect();
            FrontConfiguration::from_cells(st(left.v, left.u, left.w), &cells, setup, two)
        }
        (_, Some(p)) => discretize_initial(profile.as_ref(), left, &s.partition(&p), setup, two),
        (InitialBlock::Sampled { .. }, None) => unreachable!("validated"),
    };
    cfg.map_err(|e| ScenarioError::Solver(e.to_string()))
}

fn run_fronts(s: &Scenario, opts: &RunOptions, out: &mut Writers) -> Result<RunSummary, ScenarioError> {
    let cfg = build_fronts(s, &opts.tol)?;
    let (traj, failure) = track_partial(&cfg, s.horizon);
    out.csv("events.csv", &EVENTS_HEADER, &events_rows(&traj))?;
    if let Some(e) = failure {
        return Err(ScenarioError::Solver(e.to_string()));
    }
    let grid = s.output.grid.points();
    let two = s.two_phase();
    let (mut snaps, mut atoms, mut diag) = (Vec::new(), Vec::new(), Vec::new());
    let mut m0s = Vec::new();
    for &t in &s.output.times {
        let at = traj.at(t).map_err(|e| ScenarioError::Solver(e.to_string()))?;
        if !at.inside_box(t) {
            return Err(invalid("domain", format!("a front leaves the box [{}, {}] by t = {t}", s.domain.lo, s.domain.hi)));
        }
        let snap = at.sample(t, &grid).map_err(|e| ScenarioError::Solver(e.to_string()))?;
        for ((x, u), m) in grid.iter().zip(&snap.u).zip(&snap.m) {
            snaps.push(vec![num(t), num(*x), num(*u), num(*m)]);
        }
        for a in snap.atoms.iter().filter(|a| a.xi > 0.0) {
            let mut row = vec![num(t), num(a.x), num(a.xi), num(a.chi)];
            if two {
                row.push(num(a.xi_v));
                row.push(num(a.xi_w));
            }
            atoms.push(row);
        }
        let m0 = at.total_mass(t).map_err(|e| ScenarioError::Solver(e.to_string()))?;
        let m1 = at.total_momentum(t).map_err(|e| ScenarioError::Solver(e.to_string()))?;
        m0s.push(m0);
        let entropy = at
            .fronts
            .iter()
            .filter_map(|f| f.delta())
            .filter_map(|d| dissipativity_residual(d, t).ok())
            .map(|r| r.residual)
            .fold(f64::NAN, f64::max);
        diag.push(vec![num(t), num(m0), num(m1), num(entropy), num(f64::NAN)]);
    }
    let mut header = vec!["t", "x", "xi", "chi"];
    if two {
        header.extend(["xi_v", "xi_w"]);
    }
    out.csv("snapshots.csv", &["t", "x", "u", "m"], &snaps)?;
    out.csv("atoms.csv", &header, &atoms)?;
    out.csv("diagnostics.csv", &DIAG_HEADER, &diag)?;
    out.text("plot.gp", &plot_script(&s.output.times))?;
    let m_ref = m0s[0];
    let drift = m0s.iter().map(|m| (m - m_ref).abs()).fold(0.0, f64::max) / m_ref.abs().max(f64::MIN_POSITIVE);
    Ok(RunSummary {
        solver: SolverKind::Fronts,
        files: out.files.clone(),
        events: traj.events().len(),
        mass_drift: drift,
    })
}

fn build_gvp(s: &Scenario, for_compare: bool) -> Result<GvpField, ScenarioError> {
    let gb = s.solver.gvp.as_ref().expect("validated");
    let k = s.gvp_upkappa(for_compare)?;
    let (_, profile) = s.profile();
    GvpField::new(profile, k, (gb.support[0], gb.support[1]), gb.cells).map_err(|e| invalid("solver.gvp", e.to_string()))
}

fn gvp_error(e: crate::gvp::GvpError) -> ScenarioError {
    match e {
        crate::gvp::GvpError::UnboundedBelow { .. } | crate::gvp::GvpError::OutOfSupport { .. } => invalid("solver.gvp.support", e.to_string()),
        other => ScenarioError::Solver(other.to_string()),
    }
}

fn run_gvp(s: &Scenario, out: &mut Writers) -> Result<RunSummary, ScenarioError> {
    let field = build_gvp(s, false)?;
    out.csv("events.csv", &EVENTS_HEADER, &[])?;
    let grid = s.output.grid.points();
    let (lo, hi) = (grid[0], *grid.last().unwrap());
    let (mut snaps, mut atoms, mut diag) = (Vec::new(), Vec::new(), Vec::new());
    let mut m0s = Vec::new();
    for &t in &s.output.times {
        let (u, m, m0, m1, oleinik);
        if t == 0.0 {
            let prof = field.profile().clone();
            let pre: Result<Vec<(f64, f64, f64)>, _> = grid.iter().map(|&x| field.prefix(x)).collect();
            let pre = pre.map_err(gvp_error)?;
            u = grid.iter().map(|&x| prof.state(x).u).collect::<Vec<_>>();
            m = pre.iter().map(|p| p.0).collect::<Vec<_>>();
            m0 = pre.last().unwrap().0 - pre[0].0;
            m1 = pre.last().unwrap().2 - pre[0].2;
            oleinik = f64::NAN;
        } else {
            let snap = field.snapshot(t).map_err(gvp_error)?;
            let (uu, mm) = field.sample(t, &grid).map_err(gvp_error)?;
            u = uu;
            m = mm;
            for a in snap.atoms().iter().filter(|a| lo <= a.x && a.x <= hi) {
                atoms.push(vec![num(t), num(a.x), num(a.mass), num(a.velocity)]);
            }
            let (a, b) = (snap.diagnostics(lo).map_err(gvp_error)?, snap.diagnostics(hi).map_err(gvp_error)?);
            m0 = m.last().unwrap() - m[0];
            m1 = b.q - a.q;
            oleinik = snap.oleinik(&grid).map_err(gvp_error)?.slope_excess;
        }
        m0s.push(m0);
        for i in 0..grid.len() {
            snaps.push(vec![num(t), num(grid[i]), num(u[i]), num(m[i])]);
        }
        diag.push(vec![num(t), num(m0), num(m1), num(f64::NAN), num(oleinik)]);
    }
    out.csv("snapshots.csv", &["t", "x", "u", "m"], &snaps)?;
    out.csv("atoms.csv", &["t", "x", "xi", "chi"], &atoms)?;
    out.csv("diagnostics.csv", &DIAG_HEADER, &diag)?;
    out.text("plot.gp", &plot_script(&s.output.times))?;
    let _ = m0s;
    Ok(RunSummary {
        solver: SolverKind::Gvp,
        files: out.files.clone(),
        events: 0,
        mass_drift: f64::NAN,
    })
}

/// Validates and runs the scenario, writing artifacts into `opts.out_dir`.
pub fn run(s: &Scenario, opts: &RunOptions) -> Result<RunSummary, ScenarioError> {
    let kind = s.validate()?;
    let mut out = Writers::new(&opts.out_dir)?;
    match kind {
        SolverKind::Fronts => run_fronts(s, opts, &mut out),
        SolverKind::Gvp => run_gvp(s, &mut out),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareSummary {
    pub mode: CompareMode,
    /// Max `|u_fronts - u_gvp|` away from shocks (pressureless mode).
    pub max_velocity_gap: f64,
    /// Max distance between matched point masses.
    pub max_atom_gap: f64,
    /// The same distance in output grid cells.
    pub max_atom_gap_cells: f64,
    pub file: PathBuf,
}

/// Cross-checks the two methods where their regimes overlap and writes
/// `compare.csv`.
pub fn compare(s: &Scenario, opts: &RunOptions) -> Result<CompareSummary, ScenarioError> {
    let mode = s.compare_mode()?;
    let mut out = Writers::new(&opts.out_dir)?;
    let grid = s.output.grid.points();
    let dx = s.output.grid.spacing();
    let field = build_gvp(s, mode == CompareMode::PressurelessLimit)?;
    let mut rows = Vec::new();
    let (mut du_max, mut dx_max) = (0.0f64, 0.0f64);
    let row = |kind: &str, t: f64, x: f64, a: f64, b: f64, excluded: bool| {
        vec![kind.to_string(), num(t), num(x), num(a), num(b), num((a - b).abs()), (excluded as u8).to_string()]
    };
    let times: Vec<f64> = s.output.times.iter().copied().filter(|&t| t > 0.0).collect();
    match mode {
        CompareMode::PressurelessLimit => {
            let cfg = build_fronts(s, &opts.tol)?;
            let (traj, failure) = track_partial(&cfg, s.horizon);
            if let Some(e) = failure {
                return Err(ScenarioError::Solver(e.to_string()));
            }
            for &t in &times {
                let fs = traj.sample(t, &grid).map_err(|e| ScenarioError::Solver(e.to_string()))?;
                let snap = field.snapshot(t).map_err(gvp_error)?;
                let (ug, _) = field.sample(t, &grid).map_err(gvp_error)?;
                let shocks: Vec<f64> = fs.atoms.iter().map(|a| a.x).chain(snap.atoms().iter().map(|a| a.x)).collect();
                for i in 0..grid.len() {
                    let excluded = shocks.iter().any(|&x| (grid[i] - x).abs() <= 2.0 * dx);
                    if !excluded {
                        du_max = du_max.max((fs.u[i] - ug[i]).abs());
                    }
                    rows.push(row("u", t, grid[i], fs.u[i], ug[i], excluded));
                }
                for a in &fs.atoms {
                    let nearest = snap.atoms().iter().map(|b| b.x).min_by(|p, q| (p - a.x).abs().partial_cmp(&(q - a.x).abs()).unwrap());
                    let b = nearest.unwrap_or(f64::NAN);
                    dx_max = dx_max.max((a.x - b).abs());
                    rows.push(row("atom", t, a.x, a.x, b, false));
                }
            }
        }
        CompareMode::ShockOracle => {
            let InitialBlock::Pieces { left, pieces } = &s.initial else { unreachable!() };
            let k = s.gvp_upkappa(false)?;
            let oracle = ShockOracle::new(k, (left.v, left.u), (pieces[0].v, pieces[0].u), pieces[0].x, s.horizon, &opts.tol)
                .map_err(|e| ScenarioError::Solver(e.to_string()))?;
            for &t in &times {
                let snap = field.snapshot(t).map_err(gvp_error)?;
                let xo = oracle.position(t);
                let nearest = snap.atoms().iter().map(|b| b.x).min_by(|p, q| (p - xo).abs().partial_cmp(&(q - xo).abs()).unwrap());
                let xg = nearest.unwrap_or(f64::NAN);
                dx_max = dx_max.max((xg - xo).abs());
                rows.push(row("atom", t, xo, xg, xo, false));
            }
        }
    }
    if dx_max.is_nan() {
        dx_max = f64::INFINITY;
    }
    rows.push(row("max_u", f64::NAN, f64::NAN, du_max, 0.0, false));
    rows.push(row("max_atom", f64::NAN, f64::NAN, dx_max, 0.0, false));
    out.csv("compare.csv", &["kind", "t", "x", "a", "b", "abs_diff", "excluded"], &rows)?;
    Ok(CompareSummary {
        mode,
        max_velocity_gap: du_max,
        max_atom_gap: dx_max,
        max_atom_gap_cells: dx_max / dx,
        file: out.dir.join("compare.csv"),
    })
}
