import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quadrix._rules import (
    IntegralEstimate,
    QuadratureSpec,
    exact_sum,
    gauss_legendre,
    graded_edges,
    ordered_map,
    panel_rule,
    phase_split,
    refine_axes,
    resolve_workers,
    sphere_rule,
    subdivide,
    unit_sphere_area,
)


def test_spec_defaults_and_validation():
    spec = QuadratureSpec()
    assert (spec.rel_tol, spec.seed) == (1e-6, 42)
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0)
    with pytest.raises(ValueError):
        QuadratureSpec(outer_nodes=0)
    with pytest.raises(ValueError):
        QuadratureSpec(seed=-1)
    with pytest.raises(ValueError):
        QuadratureSpec(seed=2**64)


def test_estimate_rejects_bad_error():
    with pytest.raises(ValueError):
        IntegralEstimate(1.0, -1.0, 1, "x")
    with pytest.raises(ValueError):
        IntegralEstimate(1.0, math.nan, 1, "x")
    assert IntegralEstimate(2.0, 0.5, 1, "x").rel_error_estimate == 0.25


@pytest.mark.parametrize("n", [2, 5, 8])
def test_gauss_legendre_degree(n):
    x, w = gauss_legendre(n)
    for k in range(2 * n):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert np.dot(w, x**k) == pytest.approx(exact, abs=1e-13)


def test_panel_rule_and_subdivide():
    edges = np.array([0.0, 1.0, 3.0])
    x, w = panel_rule(subdivide(edges, 2), 4)
    assert len(x) == 8 * 4
    assert np.dot(w, x**3) == pytest.approx(81 / 4, rel=1e-13)
    np.testing.assert_allclose(subdivide(edges, 1), [0, 0.5, 1, 2, 3])


def test_phase_split_bounds_phase():
    edges = phase_split(np.array([0.0, 10.0]), 3.0)
    assert np.all(np.diff(edges) * 3.0 <= np.pi / 4 + 1e-12)
    assert edges[0] == 0 and edges[-1] == 10


def test_graded_edges_cover():
    e = graded_edges(20.0, 0.01)
    assert e[0] == 0 and e[-1] == 20.0
    assert np.all(np.diff(e) > 0)
    assert e[1] == 0.01


@pytest.mark.parametrize("n, area", [(1, 2.0), (2, 2 * math.pi), (3, 4 * math.pi)])
def test_unit_sphere_area(n, area):
    assert unit_sphere_area(n) == pytest.approx(area, rel=1e-14)


def test_sphere_rule_moments():
    for d in (2, 3):
        u, w = sphere_rule(d, 8)
        assert np.allclose(np.linalg.norm(u, axis=1), 1)
        assert w.sum() == pytest.approx(unit_sphere_area(d), rel=1e-13)
        # second moment of one coordinate: area / d
        assert np.dot(w, u[:, 0] ** 2) == pytest.approx(unit_sphere_area(d) / d, rel=1e-12)
    with pytest.raises(NotImplementedError):
        sphere_rule(4, 8)


def test_refine_axes_converges_and_flags_failure():
    def evaluate(levels):
        x, w = panel_rule(subdivide(np.array([0.0, 1.0]), levels[0]), 3)
        return float(np.dot(w, np.sqrt(x))), len(x)

    value, err, levels, evals, ok = refine_axes(evaluate, 1, 1e-6, 12)
    assert ok and value == pytest.approx(2 / 3, rel=1e-5)
    *_, ok = refine_axes(evaluate, 1, 1e-14, 2)
    assert not ok


def test_ordered_map_and_workers(monkeypatch):
    items = list(range(20))
    assert ordered_map(lambda v: v * v, items, 4) == [v * v for v in items]
    monkeypatch.setenv("QUADRIX_THREADS", "3")
    assert resolve_workers(None) == 3
    assert resolve_workers(2) == 2


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=40), st.randoms())
def test_exact_sum_order_independent(values, rnd):
    shuffled = values[:]
    rnd.shuffle(shuffled)
    assert exact_sum(values) == exact_sum(shuffled)
