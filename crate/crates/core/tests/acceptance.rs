//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p shadowwave-core --test acceptance`.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use shadowwave_core::conservation::balance_report;
use shadowwave_core::entropy::{entropy_report, PrescribedFront};
use shadowwave_core::fronts::{discretize_initial, track, FrontConfiguration, PartitionSpec, TrackerSetup};
use shadowwave_core::gvp::{weak_residual, Bump, GvpField};
use shadowwave_core::model::{
    AirVelocity, CharacteristicPath, CoefficientSpec, Drag, FluxSpec, FunctionProfile, PiecewiseConstant, PointState, VelocityOrbit,
};
use shadowwave_core::numerics::ToleranceProfile;
use shadowwave_core::riemann::{solve_delta_riemann, solve_riemann, DeltaFront, RiemannInput, Side, State};
use shadowwave_core::scenario::{compare, parse_scenario, RunOptions};
use shadowwave_core::twophase::{solve_riemann3, State3};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn delta(left: (f64, f64), right: (f64, f64), coeff: Arc<CoefficientSpec>, flux: FluxSpec) -> Result<DeltaFront, String> {
    let input = RiemannInput::new(State::new(left.0, left.1), State::new(right.0, right.1), coeff, flux);
    let sol = solve_riemann(&input, 1.0).map_err(|e| e.to_string())?;
    sol.delta().cloned().ok_or_else(|| "no delta shock".to_string())
}

fn random_flux(rng: &mut StdRng) -> FluxSpec {
    match rng.random_range(0..4) {
        0 => FluxSpec::identity(),
        1 => FluxSpec::geometric_optics(),
        2 => FluxSpec::odd_power(3).unwrap(),
        _ => FluxSpec::traffic(2.0).unwrap(),
    }
}

/// Zero, constant, or `1/(t+1)` drag.
fn random_coefficients(rng: &mut StdRng) -> Arc<CoefficientSpec> {
    Arc::new(match rng.random_range(0..3) {
        0 => CoefficientSpec::zero(),
        1 => CoefficientSpec::constant(rng.random_range(0.1..2.0), rng.random_range(-0.5..0.5)).unwrap(),
        _ => CoefficientSpec::new(Drag::Algebraic { upkappa: 1.0 }, AirVelocity::Zero).unwrap(),
    })
}

/// `u_l > u_r` with a gap of at least 0.05, all inside `(-1, 1)`.
fn random_pair(rng: &mut StdRng) -> (f64, f64) {
    let a = rng.random_range(-0.95..0.95);
    let b = rng.random_range(-0.95..0.95);
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if hi - lo < 0.05 {
        (lo + 0.05, lo)
    } else {
        (hi, lo)
    }
}

fn weight_oracle() -> Check {
    let d = delta((1.0, 2.0), (4.0, 0.0), Arc::new(CoefficientSpec::zero()), FluxSpec::identity())?;
    let worst = linspace(0.01, 1.0, 100).iter().map(|&t| (d.weight(t) - 2.0 / 3.0).abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-10, || format!("|chi - 2/3| = {worst:.3e}"))?;
    Ok(format!("max |chi - 2/3| = {worst:.1e}"))
}

fn symmetry() -> Check {
    let mut worst: f64 = 0.0;
    for flux in [FluxSpec::identity(), FluxSpec::geometric_optics()] {
        for coeff in [Arc::new(CoefficientSpec::zero()), Arc::new(CoefficientSpec::constant(0.7, 0.0).unwrap())] {
            for (v, u) in [(1.0, 1.0), (2.0, 0.5), (0.3, 3.0)] {
                let d = delta((v, u), (v, -u), coeff.clone(), flux.clone())?;
                for t in linspace(0.05, 1.0, 20) {
                    worst = worst.max(d.weight(t).abs()).max(d.position(t).abs());
                }
            }
        }
    }
    ensure(worst <= 1e-10, || format!("max |chi|, |c| = {worst:.3e}"))?;
    Ok(format!("max |chi|, |c| = {worst:.1e}"))
}

fn overcompressive_suite() -> Check {
    let mut rng = StdRng::seed_from_u64(3);
    let mut checked = 0;
    for i in 0..200 {
        let (flux, coeff) = (random_flux(&mut rng), random_coefficients(&mut rng));
        let (ul, ur) = random_pair(&mut rng);
        let (vl, vr) = (rng.random_range(0.1..3.0), rng.random_range(0.1..3.0));
        let input = RiemannInput::new(State::new(vl, ul), State::new(vr, ur), coeff, flux.clone());
        let front = if i % 2 == 0 {
            solve_riemann(&input, 1.0).map_err(|e| e.to_string())?.delta().cloned().ok_or("no delta")?
        } else {
            let u = rng.random_range(ur + 0.01..ul - 0.01);
            solve_delta_riemann(&input.with_delta(rng.random_range(0.1..2.0), u), 1.0).map_err(|e| e.to_string())?
        };
        for k in 1..=50 {
            let t = k as f64 / 50.0;
            let (fl, fc, fr) = (flux.eval(front.left().velocity(t)), flux.eval(front.weight(t)), flux.eval(front.right().velocity(t)));
            ensure(fr < fc && fc < fl, || format!("input {i} at t = {t}: {fr} < {fc} < {fl} fails ({})", flux.name()))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (front, t) pairs"))
}

fn setup(coeff: CoefficientSpec, horizon: f64, lo: f64, hi: f64) -> TrackerSetup {
    TrackerSetup {
        flux: FluxSpec::identity(),
        coefficients: Arc::new(coeff),
        tol: ToleranceProfile::default(),
        horizon,
        box_lo: lo,
        box_hi: hi,
    }
}

fn triple() -> PiecewiseConstant {
    PiecewiseConstant::new(
        PointState::new(1.0, 2.0),
        vec![(0.0, PointState::new(1.0, 0.0)), (1.0, PointState::new(1.0, -2.0))],
    )
    .unwrap()
}

fn conservation() -> Check {
    let coeff = CoefficientSpec::constant(0.8, 0.5).unwrap();
    let (drag, air) = (coeff.drag().clone(), coeff.air().clone());
    let cfg = FrontConfiguration::from_pieces(&triple(), setup(coeff, 1.0, -5.0, 6.0), false).map_err(|e| e.to_string())?;
    let traj = track(&cfg, 1.0).map_err(|e| e.to_string())?;
    ensure(traj.events().len() == 1, || format!("{} interactions", traj.events().len()))?;
    let rep = balance_report(&traj, &linspace(0.0, 1.0, 101)).map_err(|e| e.to_string())?;
    let drift = rep.mass_drift();
    let exact = rep.constant_coefficient_momentum(&drag, &air).ok_or("no closed form")?;
    let m1 = rep.m1.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(drift <= 1e-8, || format!("relative M0 drift {drift:.3e}"))?;
    ensure(m1 <= 1e-6, || format!("M1 error {m1:.3e}"))?;
    Ok(format!("M0 drift {drift:.1e}, M1 error {m1:.1e}"))
}

fn interaction_oracle() -> Check {
    let cfg = FrontConfiguration::from_pieces(&triple(), setup(CoefficientSpec::zero(), 1.0, -5.0, 6.0), false).map_err(|e| e.to_string())?;
    let traj = track(&cfg, 1.0).map_err(|e| e.to_string())?;
    let ev = traj.events();
    ensure(ev.len() == 1, || format!("{} interactions", ev.len()))?;
    let (t, x) = (ev[0].time, ev[0].position);
    ensure((t - 0.5).abs() <= 1e-9 && (x - 0.5).abs() <= 1e-9, || format!("event at ({t}, {x})"))?;
    let deltas: Vec<&DeltaFront> = traj.last().fronts.iter().filter_map(|f| f.delta()).collect();
    ensure(deltas.len() == 1, || format!("{} deltas after the event", deltas.len()))?;
    let d = deltas[0];
    let (m, u, xi) = (d.birth_mass(), d.birth_velocity(), d.mass(1.0));
    ensure((m - 2.0).abs() <= 1e-8 && u.abs() <= 1e-8 && (xi - 4.0).abs() <= 1e-8, || format!("merged (m, u) = ({m}, {u}), xi(1) = {xi}"))?;
    Ok(format!("event ({t}, {x}), xi(1) = {xi}"))
}

fn side(v: f64, u: f64, flux: &FluxSpec, coeff: &Arc<CoefficientSpec>) -> Side {
    Side::new(v, CharacteristicPath::new(VelocityOrbit::new(u, coeff.clone()), flux.clone()))
}

fn dissipativity_equivalence() -> Check {
    let mut rng = StdRng::seed_from_u64(6);
    let tol = ToleranceProfile::default();
    let times = linspace(0.1, 0.9, 17);
    let mut samples = 0;
    for i in 0..100 {
        let flux = if i % 2 == 0 { FluxSpec::identity() } else { FluxSpec::odd_power(3).unwrap() };
        let coeff = random_coefficients(&mut rng);
        let (ul, ur) = random_pair(&mut rng);
        let (vl, vr) = (rng.random_range(0.2..3.0), rng.random_range(0.2..3.0));
        let input = RiemannInput::new(State::new(vl, ul), State::new(vr, ur), coeff, flux);
        let front = if i % 4 < 2 {
            solve_riemann(&input, 1.0).map_err(|e| e.to_string())?.delta().cloned().ok_or("no delta")?
        } else {
            let u = rng.random_range(ur + 0.01..ul - 0.01);
            solve_delta_riemann(&input.with_delta(rng.random_range(0.1..2.0), u), 1.0).map_err(|e| e.to_string())?
        };
        let rep = entropy_report(&front, &times, &tol).map_err(|e| e.to_string())?;
        let diss = rep.dissipative();
        for (k, (a, b)) in diss.iter().zip(&rep.overcompressive).enumerate() {
            ensure(a == b, || format!("front {i} at t = {}: dissipative {a}, overcompressive {b}", times[k]))?;
            samples += 1;
        }
    }
    let (flux, coeff) = (FluxSpec::identity(), Arc::new(CoefficientSpec::zero()));
    let bad = PrescribedFront::new(
        Arc::new(|t| 2.0 * t),
        Arc::new(|_| 2.0),
        side(1.0, 1.0, &flux, &coeff),
        side(1.0, -1.0, &flux, &coeff),
        0.0,
        1.0,
    );
    let rep = entropy_report(&bad, &times, &tol).map_err(|e| e.to_string())?;
    ensure(rep.dissipative().iter().all(|d| !d), || "violating front passes dissipativity".into())?;
    ensure(rep.overcompressive.iter().all(|o| !o), || "violating front passes overcompressibility".into())?;
    Ok(format!("{samples} agreeing samples, violating front flagged by both"))
}

fn aggregation() -> Check {
    let mut rng = StdRng::seed_from_u64(7);
    let (mut dchi, mut dxi): (f64, f64) = (0.0, 0.0);
    for i in 0..50 {
        let (flux, coeff) = (random_flux(&mut rng), random_coefficients(&mut rng));
        let (ul, ur) = random_pair(&mut rng);
        let l = State3::new(rng.random_range(0.1..2.0), rng.random_range(0.0..2.0), ul);
        let r = State3::new(rng.random_range(0.1..2.0), rng.random_range(0.0..2.0), ur);
        let tol = ToleranceProfile::default();
        let d3 = solve_riemann3(l, r, coeff.clone(), flux.clone(), 1.0, &tol).map_err(|e| e.to_string())?;
        let d3 = d3.delta().ok_or_else(|| format!("input {i}: no delta"))?;
        let d2 = delta((l.v + l.w, ul), (r.v + r.w, ur), coeff, flux)?;
        dchi = dchi.max((d3.weight(1.0) - d2.weight(1.0)).abs());
        dxi = dxi.max((d3.xi_v(1.0) + d3.xi_w(1.0) - d2.mass(1.0)).abs());
    }
    ensure(dchi <= 1e-9 && dxi <= 1e-8, || format!("chi gap {dchi:.3e}, xi gap {dxi:.3e}"))?;
    Ok(format!("chi gap {dchi:.1e}, xi gap {dxi:.1e}"))
}

fn uniform_gvp(upkappa: f64) -> GvpField {
    let p = PiecewiseConstant::new(PointState::new(1.0, 0.0), vec![]).unwrap();
    GvpField::new(Arc::new(p), upkappa, (-10.0, 10.0), 4096).unwrap()
}

fn gvp_closed_form() -> Check {
    let f = uniform_gvp(1.0);
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (x, t) = (rng.random_range(-3.0..3.0), rng.random_range(0.05..2.0));
        let s = t + 1.0;
        let exact = x * (s * s - 1.0) / (s * (s * s + 1.0));
        worst = worst.max((f.velocity(x, t).map_err(|e| e.to_string())? - exact).abs());
    }
    let m = f.mass(1.0, 1.0).map_err(|e| e.to_string())?;
    let pot = f.potential(0.8, 1.0, 1.0).map_err(|e| e.to_string())?;
    ensure(worst <= 1e-8, || format!("velocity error {worst:.3e}"))?;
    ensure((m - 0.8).abs() <= 1e-8, || format!("m(1,1) = {m}"))?;
    ensure((pot + 0.4).abs() <= 1e-10, || format!("F(0.8,1,1) = {pot}"))?;
    Ok(format!("velocity error {worst:.1e}, m(1,1) = {m:.12}, F = {pot:.12}"))
}

/// Piecewise sinusoidal data with jumps at two random breaks.
fn random_piecewise(rng: &mut StdRng) -> FunctionProfile {
    let b0 = rng.random_range(-1.5..0.0);
    let b1 = rng.random_range(0.2..1.5);
    let lvl: Vec<(f64, f64)> = (0..3).map(|_| (rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0))).collect();
    let (w, ph, amp) = (rng.random_range(0.5..3.0), rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..0.4));
    let piece = move |x: f64| if x < b0 { 0 } else if x < b1 { 1 } else { 2 };
    let lv = lvl.clone();
    FunctionProfile::new(
        Arc::new(move |x| lv[piece(x)].0 + 0.3 * (w * x + ph).sin()),
        Arc::new(move |x| lvl[piece(x)].1 + amp * (w * x - ph).cos()),
    )
    .with_breaks(vec![b0, b1])
}

fn oleinik() -> Check {
    let mut rng = StdRng::seed_from_u64(9);
    let grid = linspace(-2.0, 2.0, 401);
    let (mut worst, mut atoms) = (f64::NEG_INFINITY, 0);
    for i in 0..20 {
        let upkappa = rng.random_range(0.5..2.0);
        let t = rng.random_range(0.2..1.5);
        let f = GvpField::new(Arc::new(random_piecewise(&mut rng)), upkappa, (-10.0, 10.0), 4096).map_err(|e| e.to_string())?;
        let snap = f.snapshot(t).map_err(|e| e.to_string())?;
        let rep = snap.oleinik(&grid).map_err(|e| e.to_string())?;
        worst = worst.max(rep.slope_excess);
        atoms += snap.atoms().len();
        ensure(rep.slope_excess <= 1e-8, || format!("data set {i}: slope excess {:.3e}", rep.slope_excess))?;
        ensure(rep.jumps_ordered, || format!("data set {i}: jump u(x+0) > u(x-0), worst {}", rep.worst_jump))?;
    }
    Ok(format!("max slope excess {worst:.1e}, {atoms} atoms ordered"))
}

fn weak_residual_convergence() -> Check {
    let p = PiecewiseConstant::riemann(0.0, PointState::new(1.0, 2.0), PointState::new(4.0, 0.0));
    let field = GvpField::new(Arc::new(p), 1.0, (-10.0, 10.0), 4096).map_err(|e| e.to_string())?;
    let bumps = [
        Bump { xc: 0.5, rx: 1.0, tc: 1.0, rt: 0.5 },
        Bump { xc: 0.3, rx: 0.6, tc: 0.6, rt: 0.3 },
        Bump { xc: -0.5, rx: 1.5, tc: 1.2, rt: 0.6 },
    ];
    let mut worst = f64::INFINITY;
    let mut detail = Vec::new();
    for (b, phi) in bumps.iter().enumerate() {
        let res: Vec<(f64, f64)> = [8, 16, 32, 64]
            .iter()
            .map(|&n| weak_residual(&field, phi, n, n))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for w in res.windows(2) {
            let (q1, q2) = (w[0].0 / w[1].0, w[0].1 / w[1].1);
            worst = worst.min(q1).min(q2);
            ensure(q1 >= 1.8 && q2 >= 1.8, || format!("bump {b}: residuals {res:?}"))?;
        }
        detail.push(format!("{:.1e}", res[3].0.max(res[3].1)));
    }
    Ok(format!("min reduction {worst:.2}, finest residuals [{}]", detail.join(", ")))
}

fn fitted_order(ts: &[f64], err: &[f64]) -> f64 {
    let (lx, ly): (Vec<f64>, Vec<f64>) = ts.iter().zip(err).map(|(t, e)| (t.ln(), e.max(1e-300).ln())).unzip();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / lx.iter().map(|a| (a - mx).powi(2)).sum::<f64>()
}

/// Order is fitted to the largest error over the points at each `t`, so
/// one constant `C` covers all of them.
fn initial_recovery() -> Check {
    let p = FunctionProfile::new(Arc::new(|x: f64| 1.0 + 0.5 * x.sin()), Arc::new(|x: f64| 0.3 * x.cos()));
    let field = GvpField::new(Arc::new(p), 1.0, (-10.0, 10.0), 4096).map_err(|e| e.to_string())?;
    let ts = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut sup = [0.0f64; 4];
    let mut pointwise = f64::INFINITY;
    for x in linspace(-1.9, 1.9, 20) {
        let u0 = 0.3 * x.cos();
        let err: Vec<f64> = ts
            .iter()
            .map(|&t| field.velocity(x, t).map(|u| (u - u0).abs()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for (s, e) in sup.iter_mut().zip(&err) {
            *s = s.max(*e);
        }
        pointwise = pointwise.min(fitted_order(&ts, &err));
    }
    let order = fitted_order(&ts, &sup);
    let c = sup.iter().zip(&ts).map(|(e, t)| e / t).fold(0.0, f64::max);
    ensure(order >= 0.9, || format!("errors {sup:?}, order {order:.3}"))?;
    Ok(format!("order {order:.3} (pointwise min {pointwise:.3}), C = {c:.3}"))
}

fn cross_method() -> Check {
    let json = |kappa: &str, air: &str, solvers: &str| {
        format!(
            r#"{{
  "model": {{"flux": {{"name": "identity"}}, "kappa": {kappa}, "air_velocity": {air}}},
  "initial": {{"kind": "pieces", "left": {{"v": 1.0, "u": 2.0}}, "pieces": [{{"x": 0.0, "v": 4.0, "u": 0.0}}]}},
  "solver": {solvers},
  "horizon": 1.0,
  "output": {{"times": [1.0], "grid": {{"lo": -2.0, "hi": 3.0, "n": 201}}}},
  "domain": {{"lo": -4.0, "hi": 5.0}}
}}"#
        )
    };
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let opts = RunOptions {
        out_dir: dir.path().to_path_buf(),
        tol: ToleranceProfile::default(),
        quiet: true,
    };
    let limit = parse_scenario(&json(
        r#"{"kind": "zero"}"#,
        r#"{"kind": "zero"}"#,
        r#"{"fronts": {}, "gvp": {"upkappa": 1e4, "cells": 4096, "support": [-10.0, 10.0]}}"#,
    ))
    .map_err(|e| e.to_string())?;
    let a = compare(&limit, &opts).map_err(|e| e.to_string())?;
    let oracle = parse_scenario(&json(
        r#"{"kind": "algebraic", "upkappa": 1.0}"#,
        r#"{"kind": "algebraic"}"#,
        r#"{"gvp": {"cells": 4096, "support": [-10.0, 10.0]}}"#,
    ))
    .map_err(|e| e.to_string())?;
    let b = compare(&oracle, &opts).map_err(|e| e.to_string())?;
    ensure(a.max_velocity_gap <= 1e-2, || format!("velocity gap {:.3e}", a.max_velocity_gap))?;
    ensure(b.max_atom_gap_cells <= 2.0, || format!("oracle gap {:.3} cells", b.max_atom_gap_cells))?;
    Ok(format!(
        "velocity gap {:.1e}, shock gap {:.2} cells (fronts), {:.1e} cells (oracle)",
        a.max_velocity_gap, a.max_atom_gap_cells, b.max_atom_gap_cells
    ))
}

fn tracking_termination() -> Check {
    let mut detail = Vec::new();
    for k in 4..=8 {
        let eps = 2f64.powi(-k);
        let spec = PartitionSpec {
            r: -2.0,
            length: 4.0,
            eps,
            alpha: 0.5,
            c1: 1.0,
            c2: 1.0,
            rho_exponent: 0.25,
            width: None,
        };
        let p = FunctionProfile::new(Arc::new(|x: f64| 1.0 + 0.5 * x.sin()), Arc::new(|x: f64| -0.8 * (1.5 * x).sin()));
        let left = PointState::new(1.0 + 0.5 * (-2f64).sin(), -0.8 * (-3f64).sin());
        let cfg = discretize_initial(&p, left, &spec, setup(CoefficientSpec::zero(), 1.0, -6.0, 6.0), false).map_err(|e| e.to_string())?;
        let traj = track(&cfg, 1.0).map_err(|e| format!("eps = 2^-{k}: {e}"))?;
        let budget = (2.0 * spec.length / (spec.c1 * eps.powf(spec.alpha))).ceil() as usize + 2;
        let events = traj.events().len();
        ensure(events < budget, || format!("eps = 2^-{k}: {events} events, budget {budget}"))?;
        let counts: Vec<usize> = traj.configurations.iter().map(|c| c.fronts.len()).collect();
        ensure(counts.windows(2).all(|w| w[1] <= w[0]), || format!("eps = 2^-{k}: front counts {counts:?}"))?;
        detail.push(format!("{events}/{budget}"));
    }
    Ok(format!("events/budget {}", detail.join(" ")))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 13] = [
        ("delta-shock weight oracle", weight_oracle),
        ("odd-symmetric data stays centred", symmetry),
        ("random fronts are overcompressive", overcompressive_suite),
        ("mass and momentum balance", conservation),
        ("triple-state interaction", interaction_oracle),
        ("dissipativity matches overcompressibility", dissipativity_equivalence),
        ("two-phase aggregation", aggregation),
        ("variational closed form", gvp_closed_form),
        ("one-sided Lipschitz bound", oleinik),
        ("weak residual convergence", weak_residual_convergence),
        ("initial data recovery", initial_recovery),
        ("fronts and variational solver agree", cross_method),
        ("tracking terminates within budget", tracking_termination),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {:>2} {name}: {d} ({secs:.2} s)", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d} ({secs:.2} s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
