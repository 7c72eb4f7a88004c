import numpy as np
import pytest

import oracles
from condkrig import InvalidArgumentError, KernelParams, fit
from condkrig.testlab import (
    FUNCTIONS,
    GridField,
    error_report,
    evaluate,
    evaluate_grid,
    get_function,
    sample_lattice,
    sample_random,
)

FRANKE_CENTER = 0.3257620892806842  # oracles.franke(0.5, 0.5)


@pytest.mark.parametrize(
    "name, x, expected",
    [
        ("griewank", (0, 0), 0.0),
        ("cosin2", (0, 0), 1.0),
        ("gfunction", (0, 0), 6.0),
        ("irregular", (0, 0), 3.2),
        ("sasena", (0, 2), 3.04),
    ],
)
def test_spot_values(name, x, expected):
    assert evaluate(FUNCTIONS[name], x) == pytest.approx(expected, abs=1e-14)


def test_franke_center():
    assert evaluate(FUNCTIONS["franke"], (0.5, 0.5)) == pytest.approx(FRANKE_CENTER, rel=1e-15)


@pytest.mark.parametrize("name", sorted(FUNCTIONS))
def test_matches_scalar_oracle(name):
    fn = FUNCTIONS[name]
    rng = np.random.default_rng(99)
    b = fn.bounds
    x = rng.uniform(b[:, 0], b[:, 1], size=(1000, 2))
    got = fn.values(x)
    want = np.array([oracles.SCALAR[name](*p) for p in x.tolist()])
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)


def test_out_of_domain_rejected():
    with pytest.raises(InvalidArgumentError):
        evaluate(FUNCTIONS["franke"], (1.01, 0.5))
    with pytest.raises(InvalidArgumentError):
        get_function("rosenbrock")


@pytest.mark.parametrize("name", sorted(FUNCTIONS))
def test_finite_on_closed_box(name):
    fn = FUNCTIONS[name]
    assert np.all(np.isfinite(evaluate_grid(fn, (41, 41)).values))


def test_sample_single_point():
    ts = sample_random(FUNCTIONS["sasena"], 1, 5)
    assert ts.n == 1
    assert np.all((ts.locations > 0) & (ts.locations < 5))


def test_sample_deterministic():
    a = sample_random(FUNCTIONS["griewank"], 50, 17)
    b = sample_random(FUNCTIONS["griewank"], 50, 17)
    c = sample_random(FUNCTIONS["griewank"], 50, 18)
    assert np.array_equal(a.locations, b.locations) and np.array_equal(a.values, b.values)
    assert not np.array_equal(a.locations, c.locations)


@pytest.mark.parametrize("seed", range(5))
def test_sample_121_strictly_inside_and_distinct(seed):
    fn = FUNCTIONS["irregular"]
    ts = sample_random(fn, 121, seed)
    b = fn.bounds
    assert np.all(ts.locations > b[:, 0]) and np.all(ts.locations < b[:, 1])
    assert len({tuple(p) for p in ts.locations.tolist()}) == 121


def test_grid_corners():
    fn = FUNCTIONS["cosin2"]
    g = evaluate_grid(fn, (2, 2))
    corners = [[fn((0, 0)), fn((0, 1))], [fn((1, 0)), fn((1, 1))]]
    assert g.values.tolist() == corners


def test_griewank_grid_minimum():
    g = evaluate_grid(FUNCTIONS["griewank"], (101, 101))
    assert g.values.min() == pytest.approx(0.0, abs=1e-6)
    assert np.unravel_index(np.argmin(g.values), g.resolution) == (50, 50)


def test_lattice_training_error_vanishes_at_nodes():
    fn = FUNCTIONS["franke"]
    ts = sample_lattice(fn, 5)
    m = fit(ts, KernelParams([30, 30]))
    # 9x9 grid contains every node of the 5x5 lattice
    diff = evaluate_grid(m, (9, 9)).values - evaluate_grid(fn, (9, 9)).values
    assert np.abs(diff[::2, ::2]).max() <= 1e-8


def test_grid_requires_resolution():
    with pytest.raises(InvalidArgumentError):
        evaluate_grid(FUNCTIONS["franke"], (1, 5))


def test_plain_callable_grid_needs_domain():
    f = lambda x: x[:, 0] + x[:, 1]  # noqa: E731
    with pytest.raises(InvalidArgumentError):
        evaluate_grid(f, 3)
    g = evaluate_grid(f, 3, domain=[[0, 2], [0, 2]])
    assert g.values[2, 2] == 4.0


class TestErrorReport:
    def test_identical(self):
        t = evaluate_grid(FUNCTIONS["sasena"], 21)
        r = error_report(t, t)
        assert r.rmse == 0 and r.max_abs == 0
        assert np.all(r.difference.values == 0)

    def test_constant_offset(self):
        t = evaluate_grid(FUNCTIONS["franke"], 31)
        e = GridField(t.domain, t.values + 0.25)
        r = error_report(t, e)
        assert r.rmse == pytest.approx(0.25, rel=1e-12)
        assert r.roughness == pytest.approx(error_report(t, t).roughness, rel=1e-9)

    def test_linear_ramp_has_no_roughness(self):
        x, y = np.meshgrid(np.linspace(0, 1, 11), np.linspace(0, 1, 7), indexing="ij")
        ramp = GridField([[0, 1], [0, 1]], 3 * x - 2 * y + 1)
        assert error_report(ramp, ramp).roughness == pytest.approx(0.0, abs=1e-25)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            error_report(evaluate_grid(FUNCTIONS["franke"], 5), evaluate_grid(FUNCTIONS["franke"], 6))

    def test_rmse_permutation_invariant(self, rng):
        t = GridField([[0, 1], [0, 1]], rng.normal(size=(6, 6)))
        e = GridField([[0, 1], [0, 1]], rng.normal(size=(6, 6)))
        perm = rng.permutation(36)
        tp = GridField(t.domain, t.values.ravel()[perm].reshape(6, 6))
        ep = GridField(e.domain, e.values.ravel()[perm].reshape(6, 6))
        a, b = error_report(t, e), error_report(tp, ep)
        assert a.rmse == pytest.approx(b.rmse, rel=1e-12)
        assert a.max_abs == b.max_abs


def test_grid_csv_export(tmp_path):
    import json

    g = evaluate_grid(FUNCTIONS["franke"], (3, 4))
    g.save(tmp_path / "f.csv", {"note": "x"})
    lines = (tmp_path / "f.csv").read_bytes().split(b"\n")
    assert lines[0] == b"x1,x2,value"
    assert len([ln for ln in lines if ln]) == 1 + 12
    assert b"\r" not in (tmp_path / "f.csv").read_bytes()
    first = lines[1].split(b",")
    assert float(first[0]) == 0.0 and float(first[1]) == 0.0
    second = lines[2].split(b",")
    assert float(second[0]) == 0.0 and float(second[1]) == pytest.approx(1 / 3)  # row-major, x2 fastest
    meta = json.loads((tmp_path / "f.csv.meta.json").read_text())
    assert meta["resolution"] == [3, 4] and meta["note"] == "x"
