"""Smoke test for the shadowwave extension module.

Build and install first:
    cd crates/python && maturin build --release -o dist && pip install dist/shadowwave-*.whl
"""
import math
import pathlib
import tempfile

import shadowwave as sw

ROOT = pathlib.Path(__file__).resolve().parent.parent


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def riemann():
    flux, zero = sw.Flux("identity"), sw.Coefficients.zero()
    sol = sw.solve_riemann((1.0, 1.0), (1.0, -1.0), flux, zero, horizon=1.0)
    assert sol.kind == "delta"
    d = sol.delta
    close(d.position(0.5), 0.0, 1e-12)
    close(d.mass(1.0), 2.0, 1e-9)
    assert d.is_overcompressive(0.5)
    residual, _ = d.dissipativity_residual(0.5)
    close(residual, -2.0, 1e-6)

    sol = sw.solve_riemann((1.0, -1.0), (1.0, 1.0), flux, zero, horizon=1.0)
    assert sol.kind == "fan" and sol.delta is None
    lo, hi = sol.edges(1.0)
    assert lo < hi

    d = sw.solve_delta_riemann((1.0, 1.0), (1.0, -1.0), 1.0, 0.0, flux, zero, horizon=1.0)
    close(d.mass(1.0), 3.0, 1e-9)

    kind, d3 = sw.solve_riemann3((1.0, 0.5, 1.0), (0.5, 1.0, -1.0), flux, zero, 1.0)
    assert kind == "delta"
    close(d3.xi_v(1.0), 1.5, 1e-9)
    close(d3.xi_w(1.0), 1.5, 1e-9)


def tracking():
    traj = sw.track_pieces(
        [1.0, 2.0], [[0.0, 1.0, 0.0], [1.0, 1.0, -2.0]],
        sw.Flux(), sw.Coefficients.zero(), 1.0, (-4.0, 5.0),
    )
    events = traj.events()
    assert len(events) == 1
    t, x, parts, _ = events[0]
    close(t, 0.5, 1e-9)
    close(x, 0.5, 1e-9)
    assert parts == [0, 1]
    close(traj.total_mass(1.0), traj.total_mass(0.0), 1e-9)
    u, m, atoms = traj.sample(1.0, [-1.0, 0.5, 2.0])
    assert len(u) == 3 and len(atoms) == 1
    close(atoms[0][1], 4.0, 1e-9)


def variational():
    field = sw.GvpField([1.0, 0.0], [], 1.0, (-10.0, 10.0), cells=512)
    close(field.velocity(1.0, 1.0), 0.3, 1e-12)
    close(field.mass(1.0, 1.0), 0.8, 1e-12)
    shock = sw.GvpField([1.0, 2.0], [[0.0, 4.0, 0.0]], 1.0, (-10.0, 10.0))
    atoms = shock.atoms(1.0)
    assert len(atoms) == 1 and atoms[0][1] > 0
    bound, excess, ordered = shock.oleinik(1.0, [k / 50 - 2 for k in range(251)])
    assert excess <= 1e-9 and ordered
    close(bound, 5.0 / 6.0, 1e-12)


def scenarios():
    path = ROOT / "scenarios" / "triple_state.json"
    assert sw.check_scenario(str(path)) == "fronts"
    with tempfile.TemporaryDirectory() as d:
        files = sw.run_scenario(str(path), out_dir=d)
        names = {pathlib.Path(f).name for f in files}
        assert {"snapshots.csv", "atoms.csv", "events.csv", "diagnostics.csv", "plot.gp"} <= names
    try:
        sw.check_scenario(str(ROOT / "scenarios" / "missing.json"))
    except OSError:
        pass
    else:
        raise AssertionError("missing file accepted")
    try:
        sw.Flux("odd_power", [2.0])
    except ValueError:
        pass
    else:
        raise AssertionError("even power accepted")


if __name__ == "__main__":
    for check in (riemann, tracking, variational, scenarios):
        check()
        print(f"ok  {check.__name__}")
    assert math.isfinite(sw.Coefficients.algebraic(1.0).kappa(1.0))
