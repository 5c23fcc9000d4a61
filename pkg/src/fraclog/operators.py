r"""Generalized ABC/ABR derivatives, the AB integral and the closed-form
solution of the scalar linear ABC system.

All operators act on samples of a function on a uniform grid
``t_m = t0 + m*h``. Kernels are expanded into power laws and each power law
is integrated exactly against a piecewise-linear interpolant
(:mod:`fraclog.quadrature`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import mpmath
import numpy as np

from fraclog.errors import InsufficientSamples, SingularArgument, TruncationFailure
from fraclog.order import FractionalOrder, a_coefficients, kernel_exponent
from fraclog.quadrature import implicit_row
from fraclog.special import (
    DEFAULT_CONTROL,
    MLSpec,
    SeriesControl,
    SeriesResult,
    _ml_terms,
    ml_general,
    ml_general_mp,
    ml_series,
    sum_series,
)

__all__ = [
    "SampledFunction",
    "abc_derivative",
    "abr_derivative",
    "ab_integral",
    "derivative_samples",
    "linear_solution",
    "linear_solution_series",
]


@dataclass(frozen=True)
class SampledFunction:
    """Samples ``values[m] = f(t0 + m*h)``."""

    t0: float
    h: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("a sampled function needs at least 2 samples")
        if not self.h > 0:
            raise ValueError(f"step h must be positive, got {self.h}")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, f, t0: float, h: float, n: int) -> "SampledFunction":
        """Sample ``f`` at ``t0 + m*h`` for ``m = 0..n``."""
        t = t0 + h * np.arange(n + 1)
        return cls(t0, h, np.array([f(ti) for ti in t], dtype=float))

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.values.size)


def _check_index(f: SampledFunction, m: int):
    if m < 1:
        raise InsufficientSamples(f"grid index must be >= 1, got {m}")
    if m >= f.values.size:
        raise InsufficientSamples(
            f"grid index {m} beyond the {f.values.size} available samples")


def _ml_kernel(ord: FractionalOrder) -> MLSpec:
    return MLSpec(ord.theta, ord.mu, ord.gamma, ord.lam)


def abc_derivative(f: SampledFunction, ord: FractionalOrder, m: int,
                   ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    r"""ABC derivative at ``t_m``,
    :math:`\frac{B}{1-\theta}\int_{t_0}^{t_m} E^\gamma_{\theta,\mu}(\lambda, t_m-s) f'(s)\,ds`.

    ``f'`` is estimated from samples ``0..m`` only (forward difference at
    ``t0``, centered inside, backward at ``t_m``) and interpolated linearly.
    The kernel is expanded in its power series; each power ``(t_m-s)^p``
    with ``p = k*theta + mu - 1`` is integrated exactly.
    """
    _check_index(f, m)
    h = f.h
    deriv = np.gradient(f.values[: m + 1], h)
    if not np.any(deriv):
        return 0.0

    def contributions():
        # _ml_terms at z = h yields c_k h^p; one more h from the substitution
        for k, ck_hp in enumerate(_ml_terms(_ml_kernel(ord), h)):
            p = ord.theta * k + ord.mu - 1
            yield ck_hp * h * float(np.dot(implicit_row(m, p), deriv))

    res = sum_series(contributions(), ctrl)
    if not res.converged:
        raise TruncationFailure(f"ABC kernel series not converged at m={m}", res)
    return ord.kernel_scale * res.value


def abr_derivative(f: SampledFunction, ord: FractionalOrder, m: int,
                   ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """ABR derivative at ``t_m``: the ABC value plus the boundary term
    ``B/(1-theta) * f(t0) * E^gamma_{theta,mu}(lambda, t_m - t0)``."""
    if m == 0:
        raise SingularArgument("the ABR kernel term is singular at t = t0")
    abc = abc_derivative(f, ord, m, ctrl)
    f0 = float(f.values[0])
    if f0 == 0.0:
        return abc
    return abc + ord.kernel_scale * f0 * ml_general(_ml_kernel(ord), m * f.h, ctrl)


def derivative_samples(f: SampledFunction, ord: FractionalOrder,
                       ctrl: SeriesControl = DEFAULT_CONTROL) -> SampledFunction:
    """ABC derivative on the whole grid; the value at ``t0`` is 0."""
    out = np.zeros_like(f.values)
    for m in range(1, f.values.size):
        out[m] = abc_derivative(f, ord, m, ctrl)
    return SampledFunction(f.t0, f.h, out)


def ab_integral(f: SampledFunction, ord: FractionalOrder, m: int,
                ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    r"""AB integral at ``t_m``: a binomial series of Riemann-Liouville
    integrals of order ``theta*i + 1 - mu``,

    .. math::

        \sum_i A_i \int_{t_0}^{t_m} (t_m - s)^{\theta i - \mu} f(s)\,ds,

    each evaluated by product-trapezoidal quadrature of the piecewise-linear
    interpolant of ``f``. The series stops exactly at ``i = gamma`` for
    integer ``gamma``.
    """
    _check_index(f, m)
    values = f.values[: m + 1]
    if not np.any(values):
        return 0.0

    def contributions():
        for i, a_i in a_coefficients(ord):
            p = kernel_exponent(ord, i)
            yield a_i * f.h ** (p + 1) * float(np.dot(implicit_row(m, p), values))

    res = sum_series(contributions(), ctrl)
    if not res.converged:
        raise TruncationFailure(f"AB integral series not converged at m={m}", res)
    return res.value


# -- linear system ------------------------------------------------------------

Precision = Literal["auto", "double", "mp"]

# Terms built in log space carry ~100 ulp each, so the cancellation estimate
# (max term * eps / |sum|) understates the error by about that factor.
MP_SWITCH_ESTIMATE = 1e-9


def _outer_spec(ord: FractionalOrder, j: int) -> MLSpec:
    return MLSpec(ord.theta, j * (1 - ord.mu) + 1, -ord.gamma * j, ord.lam)


def _linear_double(rho, ord, t, ctrl, max_outer) -> SeriesResult:
    ratio = rho * (1 - ord.theta) / ord.b_theta

    def terms():
        j = 0
        while True:
            inner = ml_series(_outer_spec(ord, j), t, ctrl)
            if not inner.converged:
                raise TruncationFailure(
                    f"inner Mittag-Leffler series {j} not converged", inner)
            yield ratio ** j * inner.value
            j += 1

    outer = SeriesControl(ctrl.rel_tol, ctrl.abs_tol, max_outer)
    return sum_series(terms(), outer)


def _linear_mp(rho, ord, t, dps, max_outer) -> SeriesResult:
    with mpmath.workdps(dps):
        ratio = mpmath.mpf(rho) * (1 - mpmath.mpf(ord.theta)) / ord.b_theta
        tol = mpmath.mpf("1e-20")
        total = mpmath.mpf(0)
        small = 0
        converged = False
        n = 0
        for j in range(max_outer):
            term = ratio ** j * ml_general_mp(_outer_spec(ord, j), t, dps=dps)
            total += term
            n += 1
            if abs(term) <= tol * abs(total):
                small += 1
                if small == 2:
                    converged = True
                    break
            else:
                small = 0
        # cancellation is absorbed by the working precision, so report the
        # sum itself as the largest term
        return SeriesResult(float(total), n, converged, float(abs(total)))


def linear_solution_series(rho: float, alpha0: float, ord: FractionalOrder,
                           t_minus_t0: float,
                           ctrl: SeriesControl = DEFAULT_CONTROL,
                           max_outer: int = 200,
                           precision: Precision = "auto") -> SeriesResult:
    """Like :func:`linear_solution` but returns the full :class:`SeriesResult`
    (for ``alpha0 = 1``, scaled by ``alpha0`` afterwards)."""
    t = float(t_minus_t0)
    if t < 0:
        raise ValueError(f"t - t0 must be nonnegative, got {t}")
    if t == 0 or rho == 0 or alpha0 == 0:
        return SeriesResult(float(alpha0), 1, True, abs(float(alpha0)))
    if precision == "mp":
        res = None
    else:
        res = _linear_double(rho, ord, t, ctrl, max_outer)
        if precision == "double" or (res.converged and res.error_estimate <= MP_SWITCH_ESTIMATE):
            return _scaled(res, alpha0)
    if res is not None and res.value != 0:
        lost = math.log10(max(res.max_term / abs(res.value), 1.0))
    else:
        lost = 30.0
    dps = int(20 + lost)
    res = _linear_mp(rho, ord, t, dps, max(max_outer, 20 * max_outer))
    return _scaled(res, alpha0)


def _scaled(res: SeriesResult, alpha0: float) -> SeriesResult:
    return SeriesResult(alpha0 * res.value, res.n_terms, res.converged,
                        abs(alpha0) * res.max_term)


def linear_solution(rho: float, alpha0: float, ord: FractionalOrder,
                    t_minus_t0: float, ctrl: SeriesControl = DEFAULT_CONTROL,
                    max_outer: int = 200, precision: Precision = "auto") -> float:
    r"""Solution of ``D^ABC alpha = rho * alpha``, ``alpha(t0) = alpha0``:

    .. math::

        \alpha(t) = \alpha_0 \sum_{j\ge0} \rho^j
            \Big(\frac{1-\theta}{B(\theta)}\Big)^j
            E^{-\gamma j}_{\theta,\, j(1-\mu)+1}(\lambda, t - t_0).

    The outer series alternates for ``rho < 0`` and cancels badly for large
    ``|rho| (t - t0)``. With ``precision="auto"`` the sum is redone with
    mpmath when the double-precision cancellation estimate exceeds
    :data:`MP_SWITCH_ESTIMATE`.

    Raises
    ------
    TruncationFailure
        if the outer series does not converge within ``max_outer`` terms.
    """
    res = linear_solution_series(rho, alpha0, ord, t_minus_t0, ctrl,
                                 max_outer, precision)
    if not res.converged:
        raise TruncationFailure(
            f"linear solution series not converged after {res.n_terms} terms", res)
    return res.value
