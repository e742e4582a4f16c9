"""Built-in one-forms and potentials.

Each built-in one-form maps x in R^d to a 1 x d row acting componentwise,
F(x, t)_{0j} = g(x_j, t); the CLI looks them up by name.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .integrate import OneForm, Potential


def _row(vals):
    return vals[..., None, :]


def _diag_row(vals):
    # DxF[..., 0, j, i] = delta_ij vals_j
    d = vals.shape[-1]
    return (vals[..., :, None] * np.eye(d))[..., None, :, :]


def constant_form(c) -> OneForm:
    """F(x) = c for a fixed e x d matrix c."""
    c = np.atleast_2d(np.asarray(c, dtype=float))
    zero = np.zeros(c.shape + (c.shape[-1],))
    return OneForm(lambda x, t: np.broadcast_to(c, x.shape[:-1] + c.shape),
                   lambda x, t: np.broadcast_to(zero, x.shape[:-1] + zero.shape),
                   name="constant")


def constant(d: int = 1, value: float = 1.0) -> OneForm:
    return constant_form(np.full((1, d), value))


def identity(d: int = 1) -> OneForm:
    """F(x)_{0j} = x_j, the integrand of int B dB."""
    return OneForm(lambda x, t: _row(x), lambda x, t: _diag_row(np.ones_like(x)), name="identity")


def square(d: int = 1) -> OneForm:
    """F(x)_{0j} = x_j^2."""
    return OneForm(lambda x, t: _row(x * x), lambda x, t: _diag_row(2.0 * x), name="square")


def sine(d: int = 1) -> OneForm:
    """F(x)_{0j} = sin(x_j)."""
    return OneForm(lambda x, t: _row(np.sin(x)), lambda x, t: _diag_row(np.cos(x)), name="sin")


def x_times_t(d: int = 1) -> OneForm:
    """F(x, t)_{0j} = x_j t."""
    return OneForm(
        lambda x, t: _row(x * t[..., None]),
        lambda x, t: _diag_row(np.broadcast_to(t[..., None], x.shape)),
        DtF=lambda x, t: _row(x),
        time_dependent=True,
        name="x_times_t",
    )


BUILTIN_FORMS = {
    "constant": constant,
    "identity": identity,
    "square": square,
    "sin": sine,
    "x_times_t": x_times_t,
}


def builtin_form(name: str, d: int) -> OneForm:
    try:
        return BUILTIN_FORMS[name](d)
    except KeyError:
        raise DomainError(f"unknown one-form {name!r}; choose from {sorted(BUILTIN_FORMS)}") from None


# potentials Phi(x, t) = sum_j phi(x_j, t), with gradient one-forms


def linear_potential(d: int = 1) -> Potential:
    return Potential(lambda x, t: x.sum(-1, keepdims=True), constant(d), name="linear")


def square_potential(d: int = 1) -> Potential:
    """Phi(x) = sum x_j^2."""
    grad = OneForm(lambda x, t: _row(2.0 * x), lambda x, t: _diag_row(np.full_like(x, 2.0)),
                   name="grad_square")
    return Potential(lambda x, t: (x * x).sum(-1, keepdims=True), grad, name="square")


def cube_potential(d: int = 1) -> Potential:
    """Phi(x) = sum x_j^3 / 3, whose gradient is the ``square`` form."""
    return Potential(lambda x, t: (x**3).sum(-1, keepdims=True) / 3.0, square(d), name="cube")


def x_times_t_potential(d: int = 1) -> Potential:
    """Phi(x, t) = t sum x_j: gradient t, time derivative sum x_j."""
    ones = np.ones(d)
    grad = OneForm(
        lambda x, t: _row(np.broadcast_to(t[..., None], x.shape)),
        lambda x, t: np.zeros(x.shape[:-1] + (1, d, d)),
        drift=lambda x, t: x.sum(-1, keepdims=True),
        Dx_drift=lambda x, t: np.broadcast_to(ones, x.shape)[..., None, :],
        DtF=lambda x, t: _row(np.ones_like(x)),
        Dt_drift=lambda x, t: np.zeros(x.shape[:-1] + (1,)),
        time_dependent=True,
        name="grad_x_times_t",
    )
    return Potential(lambda x, t: t[..., None] * x.sum(-1, keepdims=True), grad, name="x_times_t")


def half_square_time_potential(d: int = 1) -> Potential:
    """Phi(x, t) = t |x|^2 / 2, whose gradient is the ``x_times_t`` form and time derivative |x|^2 / 2."""
    grad = OneForm(
        lambda x, t: _row(x * t[..., None]),
        lambda x, t: _diag_row(np.broadcast_to(t[..., None], x.shape)),
        drift=lambda x, t: 0.5 * (x * x).sum(-1, keepdims=True),
        Dx_drift=lambda x, t: x[..., None, :],
        DtF=lambda x, t: _row(x),
        Dt_drift=lambda x, t: np.zeros(x.shape[:-1] + (1,)),
        time_dependent=True,
        name="grad_half_square_time",
    )
    return Potential(lambda x, t: 0.5 * t[..., None] * (x * x).sum(-1, keepdims=True), grad,
                     name="half_square_time")


BUILTIN_POTENTIALS = {
    "linear": linear_potential,
    "square": square_potential,
    "cube": cube_potential,
    "x_times_t": x_times_t_potential,
    "half_square_time": half_square_time_potential,
}


__all__ = ["constant_form", "constant", "identity", "square", "sine", "x_times_t",
           "BUILTIN_FORMS", "builtin_form", "linear_potential", "square_potential",
           "cube_potential", "x_times_t_potential", "half_square_time_potential",
           "BUILTIN_POTENTIALS"]
