import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from roughfbm import DomainError
from roughfbm import forms
from conftest import assert_derivative

FORM_NAMES = sorted(forms.BUILTIN_FORMS)
finite = st.floats(-3, 3, allow_nan=False)


@pytest.mark.parametrize("name", FORM_NAMES)
@settings(max_examples=20, deadline=None)
@given(x=arrays(float, (4, 3), elements=finite), t=st.floats(0, 2))
def test_builtin_dxf_finite_difference(name, x, t):
    form = forms.builtin_form(name, 3)
    tt = np.full(x.shape[:-1], t)
    assert_derivative(form.F, form.DxF, x, tt)


@settings(max_examples=20, deadline=None)
@given(x=arrays(float, (2,), elements=finite), t=st.floats(0.1, 2))
def test_time_derivative_x_times_t(x, t):
    form = forms.x_times_t(2)
    eps = 1e-6
    num = (form.F(x, np.array(t + eps)) - form.F(x, np.array(t - eps))) / (2 * eps)
    np.testing.assert_allclose(num, form.DtF(x, np.array(t)), rtol=1e-5, atol=1e-8)


@pytest.mark.parametrize("name", sorted(forms.BUILTIN_POTENTIALS))
@settings(max_examples=15, deadline=None)
@given(x=arrays(float, (3, 2), elements=finite), t=st.floats(0.1, 2))
def test_potential_gradients(name, x, t):
    phi = forms.BUILTIN_POTENTIALS[name](2)
    tt = np.full(x.shape[:-1], t)
    grad = phi.gradient
    # D_x Phi (1 x d row) and D_x^2 Phi
    assert_derivative(phi.value, lambda y, s: np.broadcast_to(grad.F(y, s), y.shape[:-1] + (1, 2)), x, tt)
    assert_derivative(grad.F, lambda y, s: np.broadcast_to(grad.DxF(y, s), y.shape[:-1] + (1, 2, 2)), x, tt)
    if grad.drift is not None:
        eps = 1e-6
        num = (phi.value(x, tt + eps) - phi.value(x, tt - eps)) / (2 * eps)
        np.testing.assert_allclose(num, grad.drift(x, tt), rtol=1e-5, atol=1e-8)


def test_shapes():
    x = np.zeros((5, 7, 2))
    t = np.zeros((5, 7))
    for name in FORM_NAMES:
        f = forms.builtin_form(name, 2)
        assert np.broadcast_to(f.F(x, t), (5, 7, 1, 2)).shape == (5, 7, 1, 2)
        assert np.broadcast_to(f.DxF(x, t), (5, 7, 1, 2, 2)).shape == (5, 7, 1, 2, 2)


def test_time_flags():
    assert forms.x_times_t(1).uses_time
    assert not forms.square(1).uses_time
    assert forms.x_times_t_potential(1).gradient.uses_time


def test_unknown_form():
    with pytest.raises(DomainError, match="unknown one-form"):
        forms.builtin_form("cosh", 1)
