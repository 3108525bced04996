use std::sync::Arc;

use proptest::prelude::*;

use shadowwave_core::fronts::{track, FrontConfiguration, TrackerSetup};
use shadowwave_core::gvp::GvpField;
use shadowwave_core::model::{CoefficientSpec, FluxSpec, PiecewiseConstant, PointState};
use shadowwave_core::numerics::ToleranceProfile;
use shadowwave_core::riemann::{solve_riemann, RiemannInput, State};
use shadowwave_core::scenario::{parse_scenario, to_json, DomainBlock, GridBlock, InitialBlock, PieceBlock, Scenario, StateBlock};
use shadowwave_core::twophase::{solve_riemann3, State3};

fn coefficients(kind: u8, k: f64, a: f64) -> Arc<CoefficientSpec> {
    Arc::new(match kind {
        0 => CoefficientSpec::zero(),
        _ => CoefficientSpec::constant(k, a).unwrap(),
    })
}

fn pieces() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.2..2.0f64, 0.2..2.0f64, -1.0..1.0f64), 2..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn delta_mass_grows_and_weight_stays_between_sides(
        vl in 0.1..3.0f64, vr in 0.1..3.0f64, ul in -1.0..1.0f64, gap in 0.01..1.5f64,
        kind in 0u8..2, k in 0.1..2.0f64, a in -0.5..0.5f64,
    ) {
        let input = RiemannInput::new(State::new(vl, ul), State::new(vr, ul - gap), coefficients(kind, k, a), FluxSpec::identity());
        let sol = solve_riemann(&input, 1.0).unwrap();
        let d = sol.delta().unwrap();
        let mut prev = 0.0;
        for i in 1..=20 {
            let t = i as f64 / 20.0;
            let m = d.mass(t);
            prop_assert!(m >= prev - 1e-12);
            prev = m;
            let chi = d.weight(t);
            prop_assert!(d.right().velocity(t) < chi && chi < d.left().velocity(t));
        }
    }

    #[test]
    fn component_masses_add_up(
        l in (0.1..2.0f64, 0.0..2.0f64), r in (0.1..2.0f64, 0.0..2.0f64), ul in -1.0..1.0f64, gap in 0.01..1.5f64,
    ) {
        let sol = solve_riemann3(
            State3::new(l.0, l.1, ul), State3::new(r.0, r.1, ul - gap),
            Arc::new(CoefficientSpec::zero()), FluxSpec::identity(), 1.0, &ToleranceProfile::default(),
        ).unwrap();
        let d = sol.delta().unwrap();
        for t in [0.1, 0.5, 1.0] {
            prop_assert!((d.xi_v(t) + d.xi_w(t) - d.aggregate().mass(t)).abs() < 1e-10);
            prop_assert!(d.xi_v(t) >= 0.0 && d.xi_w(t) >= 0.0);
        }
    }

    #[test]
    fn tracking_conserves_mass_and_merges_fronts(cells in pieces(), kind in 0u8..2, k in 0.1..1.0f64) {
        let left = PointState::new(cells[0].0, cells[0].2);
        let rest: Vec<(f64, PointState)> = cells[1..].iter().enumerate()
            .map(|(i, c)| (i as f64 * c.1.max(0.3), PointState::new(c.0, c.2)))
            .collect();
        let mut xs: Vec<(f64, PointState)> = Vec::new();
        let mut x = 0.0;
        for (dx, s) in rest {
            x += dx.max(0.3);
            xs.push((x, s));
        }
        let data = PiecewiseConstant::new(left, xs).unwrap();
        let setup = TrackerSetup {
            flux: FluxSpec::identity(),
            coefficients: coefficients(kind, k, 0.0),
            tol: ToleranceProfile::default(),
            horizon: 1.0,
            box_lo: -5.0,
            box_hi: x + 5.0,
        };
        let cfg = FrontConfiguration::from_pieces(&data, setup, false).unwrap();
        let traj = track(&cfg, 1.0).unwrap();
        let m0 = traj.total_mass(0.0).unwrap();
        for t in [0.25, 0.5, 0.75, 1.0] {
            prop_assert!((traj.total_mass(t).unwrap() - m0).abs() <= 1e-8 * m0);
        }
        let deltas: Vec<usize> = traj.configurations.iter().map(|c| c.delta_count()).collect();
        prop_assert!(deltas.windows(2).all(|w| w[1] <= w[0]), "{:?}", deltas);
        let times: Vec<f64> = traj.events().iter().map(|e| e.time).collect();
        prop_assert!(times.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn minimizers_and_mass_are_monotone(cells in pieces(), upkappa in 0.5..3.0f64, t in 0.1..1.5f64) {
        let left = PointState::new(cells[0].0, cells[0].2);
        let rest: Vec<(f64, PointState)> = cells[1..].iter().enumerate()
            .map(|(i, c)| (-1.0 + i as f64 * 0.7, PointState::new(c.0, c.2)))
            .collect();
        let data = PiecewiseConstant::new(left, rest).unwrap();
        let field = GvpField::new(Arc::new(data), upkappa, (-10.0, 10.0), 1024).unwrap();
        let snap = field.snapshot(t).unwrap();
        let (mut y_prev, mut m_prev) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for i in 0..=80 {
            let x = -2.0 + 4.0 * i as f64 / 80.0;
            let p = snap.minimizers(x).unwrap();
            prop_assert!(p.y_star >= y_prev - 1e-12 && p.y_star_hi >= p.y_star);
            y_prev = p.y_star_hi;
            let m = snap.mass(x).unwrap();
            prop_assert!(m >= m_prev - 1e-12);
            m_prev = m;
        }
    }
}

fn state() -> impl Strategy<Value = StateBlock> {
    (0.0..5.0f64, -3.0..3.0f64, prop::option::of(0.0..2.0f64)).prop_map(|(v, u, w)| StateBlock { v, u, w })
}

fn scenario() -> impl Strategy<Value = Scenario> {
    (state(), prop::collection::vec((state(), 0.01..1.0f64), 0..4), 0.1..10.0f64, 2usize..500).prop_map(|(left, ps, horizon, n)| {
        let mut x = -1.0;
        let pieces = ps
            .into_iter()
            .map(|(s, dx)| {
                x += dx;
                PieceBlock { x, v: s.v, u: s.u, w: s.w }
            })
            .collect();
        let text = r#"{
  "model": {"flux": {"name": "odd_power", "params": [3]}, "kappa": {"kind": "constant", "value": 0.25}, "air_velocity": {"kind": "zero"}},
  "initial": {"kind": "pieces", "left": {"v": 1.0, "u": 0.0}, "pieces": []},
  "solver": {"fronts": {}, "gvp": {"upkappa": 2.0, "support": [-5.0, 5.0]}},
  "horizon": 1.0,
  "output": {"times": [0.0], "grid": {"lo": 0.0, "hi": 1.0, "n": 2}},
  "domain": {"lo": -1.0, "hi": 1.0}
}"#;
        let mut s = parse_scenario(text).unwrap();
        s.initial = InitialBlock::Pieces { left, pieces };
        s.horizon = horizon;
        s.output.times = vec![0.0, horizon / 3.0, horizon];
        s.output.grid = GridBlock { lo: -2.0, hi: 2.0, n };
        s.domain = DomainBlock { lo: -3.0, hi: 3.0 + horizon };
        s
    })
}

proptest! {
    #[test]
    fn scenario_round_trip(s in scenario()) {
        let back = parse_scenario(&to_json(&s)).unwrap();
        prop_assert_eq!(back, s);
    }
}
