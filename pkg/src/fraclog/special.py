r"""Special functions: Pochhammer symbols, binomials, reciprocal gamma and the
three-parameter Mittag-Leffler function

.. math::

    E^{\rho}_{\theta,\beta}(\lambda, z) = \sum_{k=0}^\infty
        \lambda^k \frac{z^{k\theta+\beta-1} (\rho)_k}{\Gamma(\theta k+\beta)\, k!}.

Only real arguments are supported.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Iterator

import mpmath

from fraclog.errors import SingularArgument, TruncationFailure

EPS = sys.float_info.epsilon

#: cancellation estimate above which results are flagged as inaccurate
ACCURACY_ADVISORY = 1e-6

# rounding carried by each log-space term, in units of eps
TERM_ERROR_ULPS = 64


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy shared by every infinite series in the package."""

    rel_tol: float = 1e-14
    abs_tol: float = 1e-300
    max_terms: int = 512

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.abs_tol < 0:
            raise ValueError(f"abs_tol must be nonnegative, got {self.abs_tol}")
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")

    def is_small(self, term: float, partial: float) -> bool:
        return abs(term) < self.rel_tol * abs(partial) + self.abs_tol


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class MLSpec:
    r"""Parameters :math:`(\theta, \beta, \rho, \lambda)` of
    :math:`E^{\rho}_{\theta,\beta}(\lambda, \cdot)`."""

    theta: float
    beta: float
    rho: float
    lam: float

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")


@dataclass(frozen=True)
class SeriesResult:
    """Outcome of a truncated series summation."""

    value: float
    n_terms: int
    converged: bool
    max_term: float

    @property
    def error_estimate(self) -> float:
        """Cancellation estimate ``max|term| * eps / |value|``."""
        if self.max_term == 0.0:
            return 0.0
        if self.value == 0.0:
            return math.inf
        return self.max_term * EPS / abs(self.value)

    @property
    def accurate(self) -> bool:
        return self.converged and self.error_estimate <= ACCURACY_ADVISORY


# -- elementary pieces ------------------------------------------------------

def pochhammer(rho: float, k: int) -> float:
    """Rising factorial ``rho (rho+1) ... (rho+k-1)``; 1 for ``k == 0``."""
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    out = 1.0
    for i in range(k):
        out *= rho + i
    return out


def generalized_binomial(gamma: float, i: int) -> float:
    """``gamma (gamma-1) ... (gamma-i+1) / i!``.

    Exact for nonnegative integer ``gamma``; vanishes for ``i > gamma`` then.
    """
    if i < 0:
        raise ValueError(f"i must be nonnegative, got {i}")
    if float(gamma).is_integer() and gamma >= 0:
        return float(math.comb(int(gamma), i))
    out = 1.0
    for l in range(i):
        out *= (gamma - l) / (l + 1)
    return out


def is_gamma_pole(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def gamma_sign(x: float) -> float:
    """Sign of Gamma(x) off the poles."""
    if x > 0:
        return 1.0
    return -1.0 if math.floor(x) % 2 else 1.0


def recip_gamma(x: float) -> float:
    """``1/Gamma(x)``, defined as exactly 0 at the poles x = 0, -1, -2, ..."""
    if is_gamma_pole(x):
        return 0.0
    if x < 171.0:
        return 1.0 / math.gamma(x)
    return math.exp(-math.lgamma(x))


# -- Mittag-Leffler ---------------------------------------------------------

def _check_argument(spec: MLSpec, z: float):
    if z < 0:
        raise SingularArgument(f"z must be nonnegative, got {z}")
    if z == 0 and spec.beta < 1:
        raise SingularArgument(
            f"z = 0 is singular for beta = {spec.beta} < 1")


def ml_term(spec: MLSpec, z: float, k: int) -> float:
    """The k-th series term evaluated directly from its definition."""
    _check_argument(spec, z)
    a = spec.theta * k + spec.beta
    return (spec.lam ** k * z ** (a - 1) * pochhammer(spec.rho, k)
            * recip_gamma(a) / math.factorial(k))


def ml_term_ratio(spec: MLSpec, z: float, k: int) -> float:
    """``term_{k+1} / term_k`` from the recurrence, gamma ratio via lgamma."""
    a = spec.theta * k + spec.beta
    b = a + spec.theta
    if is_gamma_pole(b):
        return 0.0
    sign = gamma_sign(a) * gamma_sign(b)
    log_gamma_ratio = math.lgamma(a) - math.lgamma(b)
    return (sign * spec.lam * z ** spec.theta * (spec.rho + k) / (k + 1)
            * math.exp(log_gamma_ratio))


def _ml_terms(spec: MLSpec, z: float) -> Iterator[float]:
    """Series terms for z > 0, built in log space.

    The part ``lam^k z^(k theta + beta - 1) (rho)_k / k!`` is carried by
    recurrence; the gamma factor comes from lgamma on every term so a pole
    at one index does not poison the following ones. Stops after a zero
    Pochhammer factor since every later term vanishes too.
    """
    log_z = math.log(z)
    log_lam = math.log(abs(spec.lam)) if spec.lam != 0 else -math.inf
    log_mag = (spec.beta - 1.0) * log_z
    sign = 1.0
    k = 0
    while True:
        a = spec.theta * k + spec.beta
        if is_gamma_pole(a):
            yield 0.0
        else:
            yield sign * gamma_sign(a) * math.exp(log_mag - math.lgamma(a))
        step = spec.rho + k
        if step == 0.0 or spec.lam == 0.0:
            return
        log_mag += log_lam + spec.theta * log_z + math.log(abs(step)) - math.log(k + 1)
        sign *= math.copysign(1.0, spec.lam) * math.copysign(1.0, step)
        k += 1


def sum_series(terms, ctrl: SeriesControl) -> SeriesResult:
    """Sum an iterable of terms with the two-consecutive-small-terms rule.

    The stopping test uses a Neumaier running sum; the returned value is the
    correctly rounded :func:`math.fsum` of all accepted terms.
    """
    accepted = []
    running = 0.0
    comp = 0.0
    small = 0
    max_term = 0.0
    converged = False
    for term in terms:
        if len(accepted) >= ctrl.max_terms:
            break
        accepted.append(term)
        max_term = max(max_term, abs(term))
        t = running + term
        if abs(running) >= abs(term):
            comp += (running - t) + term
        else:
            comp += (term - t) + running
        running = t
        if ctrl.is_small(term, running + comp):
            small += 1
            if small == 2:
                converged = True
                break
        else:
            small = 0
    else:
        # finite series ran out of terms
        converged = True
    return SeriesResult(math.fsum(accepted), len(accepted), converged, max_term)


def ml_series(spec: MLSpec, z: float,
              ctrl: SeriesControl = DEFAULT_CONTROL) -> SeriesResult:
    """Evaluate the generalized Mittag-Leffler function, never raising on
    truncation; inspect :attr:`SeriesResult.converged` instead."""
    _check_argument(spec, z)
    if z == 0:
        # only the k = 0 term with exponent beta - 1 == 0 survives
        value = recip_gamma(spec.beta) if spec.beta == 1 else 0.0
        return SeriesResult(value, 1, True, abs(value))
    return sum_series(_ml_terms(spec, z), ctrl)


def needs_extended_precision(res: SeriesResult,
                             ctrl: SeriesControl = DEFAULT_CONTROL) -> bool:
    """True when cancellation in a double-precision sum (largest term
    against the result, with a margin for per-term rounding) rules out
    ``ctrl.rel_tol`` accuracy."""
    return res.max_term * TERM_ERROR_ULPS * EPS > ctrl.rel_tol * abs(res.value)


def ml_general(spec: MLSpec, z: float,
               ctrl: SeriesControl = DEFAULT_CONTROL,
               precision: str = "auto") -> float:
    r""":math:`E^{\rho}_{\theta,\beta}(\lambda, z)` for real ``z >= 0``.

    With ``precision="auto"`` the double-precision sum is redone in mpmath
    whenever its cancellation (largest term against the result, with a
    margin for per-term rounding) rules out ``ctrl.rel_tol`` accuracy; this
    is what happens for ``lambda < 0`` and moderate to large ``z``.
    ``"double"`` never escalates, ``"mp"`` always does.

    Raises
    ------
    SingularArgument
        if ``z < 0``, or ``z == 0`` with ``beta < 1``.
    TruncationFailure
        if ``ctrl.max_terms`` terms did not meet the tolerance. The partial
        :class:`SeriesResult` is attached as ``exc.result``.
    """
    res = ml_series(spec, z, ctrl)
    if not res.converged:
        raise TruncationFailure(
            f"Mittag-Leffler series not converged after {res.n_terms} terms "
            f"(z={z}, {spec})", res)
    if precision == "double" or z == 0:
        return res.value
    if precision == "mp" or needs_extended_precision(res, ctrl):
        lost = math.log10(max(res.max_term / abs(res.value), 1.0)) if res.value else 30.0
        dps = int(20 + lost - math.log10(ctrl.rel_tol) - 14)
        return float(ml_general_mp(spec, z, dps=max(dps, 20)))
    return res.value


def ml_general_mp(spec: MLSpec, z, dps: int = 50, tol=None, max_terms: int = 100_000):
    """Arbitrary-precision evaluation of the same series with mpmath.

    Returns an ``mpmath.mpf``. Used where double precision cancellation is
    too large.
    """
    with mpmath.workdps(dps):
        z = mpmath.mpf(z)
        theta, beta = mpmath.mpf(spec.theta), mpmath.mpf(spec.beta)
        rho, lam = mpmath.mpf(spec.rho), mpmath.mpf(spec.lam)
        if z == 0:
            return mpmath.mpf(1) if spec.beta == 1 else mpmath.mpf(0)
        tol = tol if tol is not None else mpmath.mpf(10) ** (-dps)
        total = mpmath.mpf(0)
        poch = mpmath.mpf(1)
        small = 0
        for k in range(max_terms):
            term = (lam ** k * z ** (theta * k + beta - 1) * poch
                    * mpmath.rgamma(theta * k + beta) / mpmath.factorial(k))
            total += term
            if abs(term) <= tol * abs(total):
                small += 1
                if small == 2:
                    break
            else:
                small = 0
            poch *= rho + k
            if poch == 0:
                break
        return +total


def ml_accuracy_limit(spec: MLSpec, ctrl: SeriesControl = DEFAULT_CONTROL,
                      threshold: float = ACCURACY_ADVISORY,
                      z_max: float = 1e4) -> float:
    """Smallest ``z`` (to ~1e-3 relative) at which the double-precision
    cancellation estimate exceeds ``threshold``.

    Returns ``inf`` if no such ``z`` is found below ``z_max``.
    """
    def bad(z):
        try:
            res = ml_series(spec, z, ctrl)
        except SingularArgument:
            return False
        return res.error_estimate > threshold or not res.converged

    lo, hi = 0.0, 1.0
    while not bad(hi):
        lo, hi = hi, 2 * hi
        if hi > z_max:
            return math.inf
    while hi - lo > 1e-3 * hi:
        mid = 0.5 * (lo + hi)
        if bad(mid):
            hi = mid
        else:
            lo = mid
    return hi
