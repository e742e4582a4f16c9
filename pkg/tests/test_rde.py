from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roughfbm import ConvergenceError, DomainError, NumericalError
from roughfbm.fbm import FbmModel, Grid, sample_batch
from roughfbm.integrate import lift_spacetime
from roughfbm.rde import (ScalarFunction, VectorField, augmented_driver, chain_rule_check, constant_field,
                          geometric_closed_form, geometric_fbm, geometric_field, linear_field,
                          modified_field, solve_ito_via_strat, solve_rde)
from roughfbm.roughpath import lift_ito, lift_stratonovich
from conftest import assert_derivative

PARAMS = SimpleNamespace(mu=0.1, sigma=0.5, X0=1.0, hurst=0.45)


def _path(h=0.45, d=1, n=1024, seed=1, count=1):
    return sample_batch(FbmModel(h, d), Grid(0, 1, n), seed=seed, count=count)


def sine_field():
    return VectorField(lambda y: np.sin(y)[..., None],
                       lambda y: np.cos(y)[..., None, None],
                       lambda y: -np.sin(y)[..., None, None, None], name="sine")


def test_constant_field_exact():
    path = _path(d=2, n=64)
    c = np.array([[1.0, 2.0], [0.0, -1.0], [3.0, 0.5]])
    sol = solve_rde(constant_field(c), lift_ito(path), np.array([1.0, 0.0, -2.0]))
    ref = np.array([1.0, 0.0, -2.0]) + path.values @ c.T
    np.testing.assert_allclose(sol.values, ref, atol=1e-13)
    assert sol.iterations <= 3


def test_sine_field_stratonovich_closed_form():
    # y' = sin(y) along a geometric driver: y = 2 arctan(tan(y0 / 2) e^B)
    path = _path(h=0.45, n=2**12, seed=3)
    y0 = 1.0
    sol = solve_rde(sine_field(), lift_stratonovich(path), [y0])
    ref = 2 * np.arctan(np.tan(y0 / 2) * np.exp(path.values[..., 0]))
    assert np.max(np.abs(sol.values[..., 0] - ref)) < 1e-3


def test_geometric_closed_form_limits():
    t = np.array([0.0, 0.5, 1.0])
    b = np.array([0.0, 0.2, -0.1])
    p = SimpleNamespace(mu=0.0, sigma=1.0, X0=2.0, hurst=0.5)
    np.testing.assert_allclose(geometric_closed_form(p, t, b), 2 * np.exp(b - 0.5 * t))
    np.testing.assert_allclose(geometric_closed_form(p, t, b, "stratonovich"), 2 * np.exp(b))
    with pytest.raises(DomainError):
        geometric_closed_form(p, t, b, "other")


@pytest.mark.parametrize("flavor", ["ito", "stratonovich"])
def test_geometric_fbm_matches_closed_form(flavor):
    res = geometric_fbm(PARAMS, _path(n=2**12)[0], flavor=flavor)
    assert res.sup_error < 1e-3
    assert res.consistency_1 < 1e-12 and res.consistency_2 < 1e-12
    gaps = res.solution.gap_history
    assert all(b < a for a, b in zip(gaps[1:], gaps[2:]))
    assert res.solution.iterations <= 50
    assert set(res.as_dict()) >= {"sup_error", "residual_1", "iterations"}


def test_geometric_fbm_rejects_batch():
    with pytest.raises(DomainError):
        geometric_fbm(PARAMS, _path(count=2))


def test_ito_via_strat_agrees():
    path = _path(n=2**12, seed=4)
    f = linear_field([PARAMS.sigma])
    direct = solve_rde(f, lift_ito(path), [1.0])
    via = solve_ito_via_strat(f, lift_stratonovich(path), [1.0])
    assert np.max(np.abs(via.values - direct.values)) < 1e-4
    with pytest.raises(DomainError):
        solve_ito_via_strat(f, lift_ito(path), [1.0])


def test_modified_field_needs_hessian():
    f = VectorField(lambda y: np.sin(y)[..., None], lambda y: np.cos(y)[..., None, None])
    g = modified_field(f)
    y = np.array([0.3])
    g.eval(y)
    with pytest.raises(DomainError):
        g.jac(y)


def test_modified_field_derivatives():
    g = modified_field(sine_field())
    x = np.array([[0.3], [-1.2], [2.0]])
    assert_derivative(lambda y, t: g.eval(y), lambda y, t: g.jac(y), x, None)


def test_picard_budget_exhausted():
    with pytest.raises(ConvergenceError) as info:
        solve_rde(linear_field([3.0]), lift_ito(_path(n=256)), [1.0], max_iter=2)
    assert len(info.value.history) == 2


def test_non_finite_field():
    f = VectorField(lambda y: np.exp(1e3 * y)[..., None], lambda y: 1e3 * np.exp(1e3 * y)[..., None, None], name="blowup")
    with pytest.raises(NumericalError, match="blowup"):
        solve_rde(f, lift_ito(_path(n=64)), [1.0])


def test_augmented_driver_needs_hurst():
    from roughfbm.roughpath import Level2Path
    rp = lift_stratonovich(_path(n=16))
    with pytest.raises(DomainError):
        augmented_driver(Level2Path(rp.grid, rp.level1, rp.level2, "stratonovich", rp.origin, None))
    assert augmented_driver(rp).dim == 1


def test_space_time_driver_drift():
    # dY = mu Y dt along the clock only
    path = _path(n=2**10)
    f = linear_field([0.0, 0.7])
    sol = solve_rde(f, lift_spacetime(lift_ito(path)), [2.0])
    t = path.grid.times
    assert np.max(np.abs(sol.values[0, :, 0] - 2 * np.exp(0.7 * t))) < 1e-6


def test_chain_rule_constant_g():
    rep = chain_rule_check(ScalarFunction(lambda x, t: np.ones_like(x), lambda x, t: np.zeros_like(x)),
                           PARAMS, _path(n=2**12, count=8), range(6, 13))
    assert rep.rate_1 > 0.5 and rep.rate_2 > 0.5
    assert rep.residual_1[-1] < 1e-3


def test_chain_rule_rde_source():
    rep = chain_rule_check(ScalarFunction(lambda x, t: x, lambda x, t: np.ones_like(x)),
                           PARAMS, _path(n=2**10, count=2), range(5, 11), source="rde")
    assert rep.residual_2[-1] < rep.residual_2[0]


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10**6), y0=st.floats(0.1, 3.0))
def test_linear_rde_scales_with_initial_value(seed, y0):
    path = _path(n=128, seed=seed)
    f = geometric_field(SimpleNamespace(mu=0.0, sigma=0.5, X0=1.0, hurst=0.45))
    a = solve_rde(f, lift_spacetime(lift_ito(path)), [1.0]).values
    b = solve_rde(f, lift_spacetime(lift_ito(path)), [y0]).values
    np.testing.assert_allclose(b, y0 * a, rtol=1e-8)
