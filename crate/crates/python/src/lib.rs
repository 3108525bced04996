//! Python module `shadowwave`: Riemann solvers, front tracking, the
//! variational solver and the scenario runner.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use shadowwave_core::entropy::dissipativity_residual;
use shadowwave_core::fronts::{self, FrontConfiguration, TrackerSetup};
use shadowwave_core::gvp::GvpField;
use shadowwave_core::model::{builtin_flux, AirVelocity, CoefficientSpec, Drag, FluxSpec, PiecewiseConstant, PointState};
use shadowwave_core::numerics::ToleranceProfile;
use shadowwave_core::riemann::{self, DeltaFront, RiemannInput, RiemannSolution, State};
use shadowwave_core::scenario::{self, RunOptions, ScenarioError};
use shadowwave_core::twophase::{self, DeltaFront3, Riemann3Solution, State3};

create_exception!(shadowwave, SolverError, PyRuntimeError);

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn solver_err(e: impl std::fmt::Display) -> PyErr {
    SolverError::new_err(e.to_string())
}

fn scenario_err(e: ScenarioError) -> PyErr {
    match e {
        ScenarioError::Io(_) => PyOSError::new_err(e.to_string()),
        ScenarioError::Solver(_) => solver_err(e),
        _ => value_err(e),
    }
}

/// Velocity flux `f(u)`: identity, geometric_optics, odd_power, traffic.
#[pyclass(name = "Flux", frozen, from_py_object)]
#[derive(Clone)]
struct PyFlux(FluxSpec);

#[pymethods]
impl PyFlux {
    #[new]
    #[pyo3(signature = (name = "identity", params = Vec::new()))]
    fn new(name: &str, params: Vec<f64>) -> PyResult<Self> {
        builtin_flux(name, &params).map(Self).map_err(value_err)
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name()
    }

    fn __call__(&self, u: f64) -> f64 {
        self.0.eval(u)
    }

    fn derivative(&self, u: f64) -> f64 {
        self.0.derivative(u)
    }

    fn __repr__(&self) -> String {
        format!("Flux({:?})", self.0.name())
    }
}

/// Drag `kappa(t)` and air velocity `u_a(t)`.
#[pyclass(name = "Coefficients", frozen, from_py_object)]
#[derive(Clone)]
struct PyCoefficients(Arc<CoefficientSpec>);

#[pymethods]
impl PyCoefficients {
    #[staticmethod]
    fn zero() -> Self {
        Self(Arc::new(CoefficientSpec::zero()))
    }

    #[staticmethod]
    #[pyo3(signature = (kappa, air = 0.0))]
    fn constant(kappa: f64, air: f64) -> PyResult<Self> {
        CoefficientSpec::constant(kappa, air).map(|c| Self(Arc::new(c))).map_err(value_err)
    }

    /// Drag `1/(t + upkappa)` with constant air velocity.
    #[staticmethod]
    #[pyo3(signature = (upkappa, air = 0.0))]
    fn algebraic(upkappa: f64, air: f64) -> PyResult<Self> {
        let air = if air == 0.0 { AirVelocity::Zero } else { AirVelocity::Constant(air) };
        CoefficientSpec::new(Drag::Algebraic { upkappa }, air).map(|c| Self(Arc::new(c))).map_err(value_err)
    }

    fn kappa(&self, t: f64) -> f64 {
        self.0.kappa(t)
    }

    fn air_velocity(&self, t: f64) -> f64 {
        self.0.air_velocity(t)
    }
}

fn tol(abs: Option<f64>, rel: Option<f64>) -> ToleranceProfile {
    let d = ToleranceProfile::default();
    ToleranceProfile::new(abs.unwrap_or(d.abs_tol), rel.unwrap_or(d.rel_tol))
}

/// A delta shock of the single-phase model.
#[pyclass(name = "DeltaShock", frozen)]
struct PyDeltaShock(DeltaFront);

#[pymethods]
impl PyDeltaShock {
    fn position(&self, t: f64) -> f64 {
        self.0.position(t)
    }
    fn mass(&self, t: f64) -> f64 {
        self.0.mass(t)
    }
    /// Velocity of the point mass.
    fn weight(&self, t: f64) -> f64 {
        self.0.weight(t)
    }
    fn momentum(&self, t: f64) -> f64 {
        self.0.momentum(t)
    }
    fn speed(&self, t: f64) -> f64 {
        self.0.speed(t)
    }
    fn is_overcompressive(&self, t: f64) -> bool {
        self.0.is_overcompressive(t)
    }
    /// `(residual, error_estimate)` of the entropy inequality at `t`.
    fn dissipativity_residual(&self, t: f64) -> PyResult<(f64, f64)> {
        let r = dissipativity_residual(&self.0, t).map_err(value_err)?;
        Ok((r.residual, r.error_estimate))
    }
    #[getter]
    fn birth_time(&self) -> f64 {
        self.0.birth_time()
    }
    #[getter]
    fn horizon(&self) -> f64 {
        self.0.horizon()
    }
}

/// Drift-flux delta shock: aggregate front plus per-component masses.
#[pyclass(name = "DeltaShock3", frozen)]
struct PyDeltaShock3(DeltaFront3);

#[pymethods]
impl PyDeltaShock3 {
    fn position(&self, t: f64) -> f64 {
        self.0.position(t)
    }
    fn weight(&self, t: f64) -> f64 {
        self.0.weight(t)
    }
    fn xi_v(&self, t: f64) -> f64 {
        self.0.xi_v(t)
    }
    fn xi_w(&self, t: f64) -> f64 {
        self.0.xi_w(t)
    }
    fn mass(&self, t: f64) -> f64 {
        self.0.aggregate().mass(t)
    }
}

/// Riemann solution: `kind` is "delta", "fan" or "contact".
#[pyclass(name = "RiemannSolution", frozen)]
struct PyRiemannSolution(RiemannSolution);

#[pymethods]
impl PyRiemannSolution {
    #[getter]
    fn kind(&self) -> &'static str {
        match &self.0 {
            RiemannSolution::Delta(_) => "delta",
            RiemannSolution::Fan(_) => "fan",
            RiemannSolution::Contact(_) => "contact",
        }
    }

    #[getter]
    fn delta(&self) -> Option<PyDeltaShock> {
        self.0.delta().cloned().map(PyDeltaShock)
    }

    /// Left and right edge of the wave at `t`.
    fn edges(&self, t: f64) -> (f64, f64) {
        match &self.0 {
            RiemannSolution::Delta(d) => (d.position(t), d.position(t)),
            RiemannSolution::Fan(f) => (f.left_edge(t), f.right_edge(t)),
            RiemannSolution::Contact(c) => (c.position(t), c.position(t)),
        }
    }
}

fn riemann_input(left: (f64, f64), right: (f64, f64), flux: &PyFlux, coefficients: &PyCoefficients, x0: f64, t0: f64) -> RiemannInput {
    RiemannInput::new(State::new(left.0, left.1), State::new(right.0, right.1), coefficients.0.clone(), flux.0.clone()).posed_at(x0, t0)
}

/// Solves Riemann data `(v, u)` on each side of `x0` at time `t0`.
#[pyfunction]
#[pyo3(signature = (left, right, flux, coefficients, horizon, x0 = 0.0, t0 = 0.0, tol_abs = None, tol_rel = None))]
#[allow(clippy::too_many_arguments)]
fn solve_riemann(
    py: Python<'_>,
    left: (f64, f64),
    right: (f64, f64),
    flux: &PyFlux,
    coefficients: &PyCoefficients,
    horizon: f64,
    x0: f64,
    t0: f64,
    tol_abs: Option<f64>,
    tol_rel: Option<f64>,
) -> PyResult<PyRiemannSolution> {
    let input = riemann_input(left, right, flux, coefficients, x0, t0);
    let tol = tol(tol_abs, tol_rel);
    py.detach(|| riemann::solve_riemann_with(&input, horizon, &tol)).map(PyRiemannSolution).map_err(value_err)
}

/// Riemann data with a point mass `mass` of velocity `velocity` at `x0`.
#[pyfunction]
#[pyo3(signature = (left, right, mass, velocity, flux, coefficients, horizon, x0 = 0.0, t0 = 0.0, tol_abs = None, tol_rel = None))]
#[allow(clippy::too_many_arguments)]
fn solve_delta_riemann(
    py: Python<'_>,
    left: (f64, f64),
    right: (f64, f64),
    mass: f64,
    velocity: f64,
    flux: &PyFlux,
    coefficients: &PyCoefficients,
    horizon: f64,
    x0: f64,
    t0: f64,
    tol_abs: Option<f64>,
    tol_rel: Option<f64>,
) -> PyResult<PyDeltaShock> {
    let input = riemann_input(left, right, flux, coefficients, x0, t0).with_delta(mass, velocity);
    let tol = tol(tol_abs, tol_rel);
    py.detach(|| riemann::solve_delta_riemann_with(&input, horizon, &tol)).map(PyDeltaShock).map_err(value_err)
}

/// Drift-flux Riemann data `(v, w, u)` at the origin. Returns the kind and
/// the delta shock when there is one.
#[pyfunction]
#[pyo3(signature = (left, right, flux, coefficients, horizon))]
fn solve_riemann3(
    py: Python<'_>,
    left: (f64, f64, f64),
    right: (f64, f64, f64),
    flux: &PyFlux,
    coefficients: &PyCoefficients,
    horizon: f64,
) -> PyResult<(&'static str, Option<PyDeltaShock3>)> {
    let (l, r) = (State3::new(left.0, left.1, left.2), State3::new(right.0, right.1, right.2));
    let sol = py
        .detach(|| twophase::solve_riemann3(l, r, coefficients.0.clone(), flux.0.clone(), horizon, &ToleranceProfile::default()))
        .map_err(value_err)?;
    Ok(match sol {
        Riemann3Solution::Delta(d) => ("delta", Some(PyDeltaShock3(d))),
        Riemann3Solution::Fan(_) => ("fan", None),
        Riemann3Solution::Contact(_) => ("contact", None),
    })
}

/// Tracked front configurations from t = 0 to the horizon.
#[pyclass(name = "Trajectory", frozen)]
struct PyTrajectory(fronts::Trajectory);

#[pymethods]
impl PyTrajectory {
    /// `(t, x, participants, vacuum_edge)` per interaction.
    fn events(&self) -> Vec<(f64, f64, Vec<usize>, bool)> {
        self.0
            .events()
            .iter()
            .map(|e| (e.time, e.position, e.participants.clone(), e.vacuum_edge))
            .collect()
    }

    /// `(u, m, atoms)` on `grid`; atoms are `(x, xi, chi, xi_v, xi_w)`.
    #[allow(clippy::type_complexity)]
    fn sample(&self, py: Python<'_>, t: f64, grid: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>, Vec<(f64, f64, f64, f64, f64)>)> {
        let s = py.detach(|| self.0.sample(t, &grid)).map_err(solver_err)?;
        let atoms = s.atoms.iter().map(|a| (a.x, a.xi, a.chi, a.xi_v, a.xi_w)).collect();
        Ok((s.u, s.m, atoms))
    }

    fn total_mass(&self, t: f64) -> PyResult<f64> {
        self.0.total_mass(t).map_err(solver_err)
    }

    fn total_momentum(&self, t: f64) -> PyResult<f64> {
        self.0.total_momentum(t).map_err(solver_err)
    }

    fn delta_count(&self, t: f64) -> PyResult<usize> {
        Ok(self.0.at(t).map_err(solver_err)?.delta_count())
    }
}

fn state(s: &[f64]) -> PyResult<PointState> {
    match *s {
        [v, u] => Ok(PointState::new(v, u)),
        [v, u, w] => Ok(PointState::two_phase(v, w, u)),
        _ => Err(value_err("states are (v, u) or (v, u, w)")),
    }
}

fn cells(pieces: &[Vec<f64>]) -> PyResult<Vec<(f64, PointState)>> {
    pieces
        .iter()
        .map(|p| match p.split_first() {
            Some((&x, rest)) => Ok((x, state(rest)?)),
            None => Err(value_err("pieces are (x, v, u) or (x, v, u, w)")),
        })
        .collect()
}

/// Tracks piecewise-constant data. `left` is `(v, u[, w])`, `pieces` are
/// `(x, v, u[, w])` starting at `x`.
#[pyfunction]
#[pyo3(signature = (left, pieces, flux, coefficients, horizon, box_bounds, two_phase = false, tol_abs = None, tol_rel = None))]
#[allow(clippy::too_many_arguments)]
fn track_pieces(
    py: Python<'_>,
    left: Vec<f64>,
    pieces: Vec<Vec<f64>>,
    flux: &PyFlux,
    coefficients: &PyCoefficients,
    horizon: f64,
    box_bounds: (f64, f64),
    two_phase: bool,
    tol_abs: Option<f64>,
    tol_rel: Option<f64>,
) -> PyResult<PyTrajectory> {
    let setup = TrackerSetup {
        flux: flux.0.clone(),
        coefficients: coefficients.0.clone(),
        tol: tol(tol_abs, tol_rel),
        horizon,
        box_lo: box_bounds.0,
        box_hi: box_bounds.1,
    };
    let (left, cells) = (state(&left)?, cells(&pieces)?);
    let cfg = FrontConfiguration::from_cells(left, &cells, setup, two_phase).map_err(value_err)?;
    py.detach(|| fronts::track(&cfg, horizon)).map(PyTrajectory).map_err(solver_err)
}

/// Variational solution for drag `1/(t + upkappa)` and air velocity
/// `x/(t + upkappa)`, from piecewise-constant data.
#[pyclass(name = "GvpField", frozen)]
struct PyGvpField(GvpField);

#[pymethods]
impl PyGvpField {
    #[new]
    #[pyo3(signature = (left, pieces, upkappa, support, cells = 4096))]
    fn new(left: Vec<f64>, pieces: Vec<Vec<f64>>, upkappa: f64, support: (f64, f64), cells: usize) -> PyResult<Self> {
        let data = PiecewiseConstant::new(state(&left)?, self::cells(&pieces)?).map_err(value_err)?;
        GvpField::new(Arc::new(data), upkappa, support, cells).map(Self).map_err(value_err)
    }

    fn velocity(&self, x: f64, t: f64) -> PyResult<f64> {
        self.0.velocity(x, t).map_err(solver_err)
    }

    /// Cumulative mass from 0 to `x`.
    fn mass(&self, x: f64, t: f64) -> PyResult<f64> {
        self.0.mass(x, t).map_err(solver_err)
    }

    fn sample(&self, py: Python<'_>, t: f64, grid: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        py.detach(|| self.0.sample(t, &grid)).map_err(solver_err)
    }

    /// `(x, mass, velocity)` of each point mass at `t`.
    fn atoms(&self, py: Python<'_>, t: f64) -> PyResult<Vec<(f64, f64, f64)>> {
        py.detach(|| {
            let s = self.0.snapshot(t)?;
            Ok::<_, shadowwave_core::gvp::GvpError>(s.atoms().iter().map(|a| (a.x, a.mass, a.velocity)).collect())
        })
        .map_err(solver_err)
    }

    /// `(bound, slope_excess, jumps_ordered)` of the one-sided Lipschitz check.
    fn oleinik(&self, py: Python<'_>, t: f64, grid: Vec<f64>) -> PyResult<(f64, f64, bool)> {
        py.detach(|| {
            let r = self.0.snapshot(t)?.oleinik(&grid)?;
            Ok::<_, shadowwave_core::gvp::GvpError>((r.bound, r.slope_excess, r.jumps_ordered))
        })
        .map_err(solver_err)
    }
}

/// Runs a scenario file; returns the list of written files.
#[pyfunction]
#[pyo3(signature = (path, out_dir = None, tol_abs = None, tol_rel = None))]
fn run_scenario(py: Python<'_>, path: PathBuf, out_dir: Option<PathBuf>, tol_abs: Option<f64>, tol_rel: Option<f64>) -> PyResult<Vec<String>> {
    let s = scenario::load_scenario(&path).map_err(scenario_err)?;
    let opts = RunOptions::resolve(out_dir, &s, tol(tol_abs, tol_rel), true);
    let sum = py.detach(|| scenario::run(&s, &opts)).map_err(scenario_err)?;
    Ok(sum.files.iter().map(|p| p.display().to_string()).collect())
}

/// Validates a scenario file; returns the solver it would use.
#[pyfunction]
fn check_scenario(path: PathBuf) -> PyResult<String> {
    let s = scenario::load_scenario(&path).map_err(scenario_err)?;
    match s.solver_kind() {
        Ok(_) => s.validate().map(|k| format!("{k:?}").to_lowercase()).map_err(scenario_err),
        Err(_) => s.compare_mode().map(|_| "compare".to_string()).map_err(scenario_err),
    }
}

#[pymodule]
fn shadowwave(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    m.add_class::<PyFlux>()?;
    m.add_class::<PyCoefficients>()?;
    m.add_class::<PyDeltaShock>()?;
    m.add_class::<PyDeltaShock3>()?;
    m.add_class::<PyRiemannSolution>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyGvpField>()?;
    m.add_function(wrap_pyfunction!(solve_riemann, m)?)?;
    m.add_function(wrap_pyfunction!(solve_delta_riemann, m)?)?;
    m.add_function(wrap_pyfunction!(solve_riemann3, m)?)?;
    m.add_function(wrap_pyfunction!(track_pieces, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(check_scenario, m)?)?;
    Ok(())
}
