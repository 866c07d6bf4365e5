import math

import numpy as np
import pytest

from homricci.curvature import metric_trace_of_T, scalar_curvature
from homricci.solver import (
    SolverOptions,
    escape_curve_S,
    maximize_S_on_MT,
    maximize_hatS_on_slice,
    project_slice_coefficients,
    verify_prescribed_ricci,
)
from homricci.space_model import load_space_spec

from oracles import psi_peak_location, psi_peak_value


@pytest.fixture(scope="module")
def single():
    return load_space_spec({"name": "single", "d": [4], "b": [1], "triples": []})


@pytest.fixture(scope="module")
def toy():
    return load_space_spec({"name": "toy", "d": [2, 2], "b": [1, 1], "triples": []})


# ---------------------------------------------------------------------------
# slice maximization
# ---------------------------------------------------------------------------


def test_slice_maximum_f4(f4):
    report = maximize_hatS_on_slice(f4, (2, 4), (1, 1, 1, 1))
    assert report.converged
    assert report.first_order_residual < 1e-9
    assert report.value == pytest.approx(psi_peak_value(1.0, 1.0), rel=1e-10)
    assert report.argmax[1] == pytest.approx(6 * math.sqrt(19), rel=1e-8)
    trace = metric_trace_of_T(f4, (2, 4), report.argmax, (1, 1, 1, 1))
    assert abs(trace - 1.0) < 1e-10


def test_slice_maximum_f4_shifted_tensor(f4):
    z = (1.0, 0.6, 1.0, 1.3)
    report = maximize_hatS_on_slice(f4, (2, 4), z)
    assert report.converged
    assert report.argmax[1] == pytest.approx(psi_peak_location(z[1], z[3]), rel=1e-8)


def test_slice_escape_f4(f4):
    report = maximize_hatS_on_slice(f4, (2, 4), (1.0, 2.0, 1.0, 1.0))
    assert not report.converged
    assert report.escaped
    # coefficients blow up on summand 2 while summand 4 pins to its floor
    assert report.escape_direction[0] > 0 > report.escape_direction[1]
    assert report.value <= 2 / 9 + 1e-9
    assert "escaped" in report.diagnostics


def test_slice_requires_two_summands(f4):
    with pytest.raises(ValueError, match="two summands"):
        maximize_hatS_on_slice(f4, (4,), (1, 1, 1, 1))


def test_toy_constant_objective(toy):
    # with equal weights the objective is constant on the slice, every
    # feasible point is a maximum and the first restart already converges
    report = maximize_S_on_MT(toy, (1, 1))
    assert report.converged
    assert report.value == pytest.approx(0.5, rel=1e-12)
    assert report.first_order_residual < 1e-9


def test_toy_escape(toy):
    # unequal weights turn the supremum into a boundary limit
    report = maximize_S_on_MT(toy, (1, 2))
    assert not report.converged
    assert report.escaped
    assert report.value <= 0.5
    assert report.value == pytest.approx(0.5, abs=1e-6)


# ---------------------------------------------------------------------------
# full-space maximization
# ---------------------------------------------------------------------------


def test_full_maximum_single_summand(single):
    report = maximize_S_on_MT(single, (1.0,))
    assert report.converged
    assert report.argmax == (4.0,)
    assert report.value == pytest.approx(0.5, rel=1e-15)


def test_full_maximum_g2(g2):
    report = maximize_S_on_MT(g2, (1, 1, 1))
    assert report.converged
    assert report.first_order_residual < 1e-9
    assert abs(metric_trace_of_T(g2, None, report.argmax, (1, 1, 1)) - 1.0) < 1e-10
    # the maximum beats the boundary supremum of the best subalgebra
    assert report.value > 3 / 8


def test_full_maximum_e6(e6):
    report = maximize_S_on_MT(e6, (1, 1, 1))
    assert report.converged
    assert report.first_order_residual < 1e-9


def test_determinism_fixed_seed(g2):
    a = maximize_S_on_MT(g2, (1, 1, 1), SolverOptions(seed=3))
    b = maximize_S_on_MT(g2, (1, 1, 1), SolverOptions(seed=3))
    assert a == b


def test_restart_budget_options(g2):
    report = maximize_S_on_MT(g2, (1, 1, 1), SolverOptions(restarts=4))
    assert report.restarts_used == 4
    assert report.converged
    with pytest.raises(ValueError):
        SolverOptions(restarts=0)


def test_stationary_points_listed(g2):
    report = maximize_S_on_MT(g2, (1, 1, 1))
    assert report.stationary_points
    assert report.stationary_points[0] == report.argmax


def test_projection_constraint(g2):
    rng = np.random.default_rng(17)
    z = (1.0, 0.7, 1.9)
    for _ in range(25):
        y = rng.uniform(0.05, 20.0, 3)
        projected = project_slice_coefficients(g2, (1, 2, 3), z, y)
        assert abs(metric_trace_of_T(g2, None, projected, z) - 1.0) < 1e-10


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


def test_verify_single_summand(single):
    result = verify_prescribed_ricci(single, (4.0,), (1.0,))
    assert result.c == pytest.approx(0.5, rel=1e-15)
    assert result.residual == 0.0
    assert result.positive and result.verified


def test_verify_at_maximizer(g2):
    report = maximize_S_on_MT(g2, (1, 1, 1))
    result = verify_prescribed_ricci(g2, report.argmax, (1, 1, 1))
    assert result.residual < 1e-8
    assert result.positive
    # at a unit-trace solution the proportionality constant equals S
    assert result.c == pytest.approx(report.value, rel=1e-10)


def test_verify_rejects_flat_metric(g2):
    result = verify_prescribed_ricci(g2, (1, 1, 1), (1, 1, 1))
    assert not result.verified
    assert result.c == pytest.approx(0.375, rel=1e-12)
    assert result.residual == pytest.approx(1 / 12, rel=1e-10)


# ---------------------------------------------------------------------------
# escape curve
# ---------------------------------------------------------------------------


def test_escape_curve_limit(g2):
    value = escape_curve_S(g2, (3,), (4.0,), (1, 1, 1), 1e6)
    assert abs(value - 3 / 8) < 1e-5


def test_escape_curve_full_set_constant(g2):
    x = (2.0, 5.0, 1.25)
    y = project_slice_coefficients(g2, (1, 2, 3), (1, 1, 1), x)
    values = {escape_curve_S(g2, (1, 2, 3), y, (1, 1, 1), t) for t in (1.0, 100.0, 1e6)}
    reference = scalar_curvature(g2, y)
    for v in values:
        assert v == pytest.approx(reference, rel=1e-12)


def test_escape_curve_pole_rejected(g2):
    # the complement of {3} carries trace 4*1 + 2*1 = 6
    with pytest.raises(ValueError, match="pole"):
        escape_curve_S(g2, (3,), (4.0,), (1, 1, 1), 6.0)
    with pytest.raises(ValueError, match="pole"):
        escape_curve_S(g2, (3,), (4.0,), (1, 1, 1), 5.0)


def test_escape_curve_requires_slice_point(g2):
    with pytest.raises(ValueError, match="slice"):
        escape_curve_S(g2, (3,), (1.0,), (1, 1, 1), 100.0)


def test_escape_curve_derivative_limit(g2):
    # t^2 dS/dt tends to lhs - rhs of the existence inequality for J={3}:
    # sigma * 6 - (3 - 1/2) = 2.25 - 2.5 = -0.25
    t = 1e4
    h = 1.0
    up = escape_curve_S(g2, (3,), (4.0,), (1, 1, 1), t + h)
    down = escape_curve_S(g2, (3,), (4.0,), (1, 1, 1), t - h)
    derivative = t * t * (up - down) / (2 * h)
    assert derivative == pytest.approx(-0.25, abs=5e-4)


def test_escape_curve_monotone_gain_under_guarantee(g2):
    # when the verdict is guaranteed some finite t beats the limit value
    limit = 3 / 8
    values = [escape_curve_S(g2, (3,), (4.0,), (1, 1, 1), t) for t in np.geomspace(7, 1e8, 60)]
    assert max(values) > limit
