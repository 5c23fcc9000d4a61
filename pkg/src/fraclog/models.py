"""Quadratic and cubic logistic models: right-hand sides, equilibria,
linearized stability, Lipschitz bounds and the existence conditions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence, Union

from scipy.optimize import brentq

from fraclog.errors import NotAnEquilibrium, TruncationFailure
from fraclog.operators import linear_solution
from fraclog.order import FractionalOrder
from fraclog.special import (
    DEFAULT_CONTROL,
    SeriesControl,
    generalized_binomial,
    recip_gamma,
    sum_series,
)

STABLE = "asymptotically-stable"
UNSTABLE = "unstable"
INCONCLUSIVE = "inconclusive"

Classification = Literal["asymptotically-stable", "unstable", "inconclusive"]


def _positive(name: str, value: float):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class Quadratic:
    """``f(x) = r x (1 - x)``."""

    r: float
    kind = "quadratic"

    def __post_init__(self):
        _positive("r", self.r)

    def rhs(self, x: float) -> float:
        return self.r * x * (1 - x)

    def rhs_derivative(self, x: float) -> float:
        return self.r * (1 - 2 * x)

    def equilibria(self) -> list[float]:
        return [0.0, 1.0]

    def lipschitz_bound(self, L: float) -> float:
        _positive("L", L)
        return self.r * (1 + 2 * L)


@dataclass(frozen=True)
class QuadraticCapacity:
    """``f(x) = r x (1 - x/K)``, the form used in the simulations."""

    r: float
    K: float
    kind = "quadratic_capacity"

    def __post_init__(self):
        _positive("r", self.r)
        _positive("K", self.K)

    def rhs(self, x: float) -> float:
        return self.r * x * (1 - x / self.K)

    def rhs_derivative(self, x: float) -> float:
        return self.r * (1 - 2 * x / self.K)

    def equilibria(self) -> list[float]:
        return [0.0, float(self.K)]

    def lipschitz_bound(self, L: float) -> float:
        # same algebra as the unit-capacity case with x -> x/K in the product
        _positive("L", L)
        return self.r * (1 + 2 * L / self.K)


@dataclass(frozen=True)
class Cubic:
    """``f(x) = r x (1 - x/k)(x - m)`` with ``0 < m < k``."""

    r: float
    k: float
    m: float
    kind = "cubic"

    def __post_init__(self):
        _positive("r", self.r)
        _positive("k", self.k)
        _positive("m", self.m)
        if not self.m < self.k:
            raise ValueError(f"threshold m ({self.m}) must be below capacity k ({self.k})")

    def rhs(self, x: float) -> float:
        return self.r * x * (1 - x / self.k) * (x - self.m)

    def rhs_derivative(self, x: float) -> float:
        r, k, m = self.r, self.k, self.m
        return r * ((1 - x / k) * (x - m) + x * (1 - x / k) - x * (x - m) / k)

    def equilibria(self) -> list[float]:
        return [0.0, float(self.m), float(self.k)]

    def lipschitz_bound(self, L: float) -> float:
        """Returned verbatim; it is not positive for every ``L`` (see
        :attr:`ExistenceReport.warnings`)."""
        _positive("L", L)
        r, k, m = self.r, self.k, self.m
        return r * (-m + (1 + m / k) * 2 * L + L ** 2 / k)


LogisticModel = Union[Quadratic, QuadraticCapacity, Cubic]


def rhs(model: LogisticModel, x: float) -> float:
    return model.rhs(x)


def rhs_derivative(model: LogisticModel, x: float) -> float:
    return model.rhs_derivative(x)


def equilibria(model: LogisticModel) -> list[float]:
    return model.equilibria()


def lipschitz_bound(model: LogisticModel, L: float) -> float:
    return model.lipschitz_bound(L)


def as_rhs(model: LogisticModel):
    """Adapt an autonomous model to the solver signature ``f(t, x)``."""
    return _AutonomousRHS(model)


@dataclass(frozen=True)
class _AutonomousRHS:
    model: LogisticModel

    def __call__(self, t: float, x: float) -> float:
        return self.model.rhs(x)


# -- stability --------------------------------------------------------------

@dataclass(frozen=True)
class EquilibriumStability:
    equilibrium: float
    derivative: float
    classification: Classification


@dataclass(frozen=True)
class StabilityReport:
    entries: list[EquilibriumStability]

    def __iter__(self):
        return iter(self.entries)

    def as_dict(self) -> dict[float, str]:
        return {e.equilibrium: e.classification for e in self.entries}

    @property
    def stable(self) -> list[float]:
        return [e.equilibrium for e in self.entries if e.classification == STABLE]


def classify(derivative: float) -> Classification:
    if derivative < 0:
        return STABLE
    if derivative > 0:
        return UNSTABLE
    return INCONCLUSIVE


def classify_stability(model: LogisticModel) -> StabilityReport:
    """Sign of ``f'`` at every equilibrium: negative means the perturbation
    decays, positive that it grows, zero is left undecided."""
    entries = []
    for y in model.equilibria():
        d = model.rhs_derivative(y)
        entries.append(EquilibriumStability(y, d, classify(d)))
    return StabilityReport(entries)


def perturbed_system(model: LogisticModel, y0: float, x0: float) -> tuple[float, float]:
    """Linearization about ``y0``: returns ``(rho, alpha0) = (f'(y0), x0 - y0)``.

    ``alpha(t) = x(t) - y0`` then solves ``D alpha = rho * alpha`` to first
    order, see :func:`fraclog.operators.linear_solution`.
    """
    if not any(math.isclose(y0, e, rel_tol=1e-12, abs_tol=1e-12)
               for e in model.equilibria()):
        raise NotAnEquilibrium(f"{y0} is not an equilibrium of {model}")
    return model.rhs_derivative(y0), x0 - y0


def perturbation_samples(model: LogisticModel, ord: FractionalOrder, x0: float,
                         times: Sequence[float] = (5, 10, 20, 40),
                         ctrl: SeriesControl = DEFAULT_CONTROL) -> dict[float, list[float]]:
    """``|alpha(t)|`` of the linearized perturbation at each equilibrium."""
    out = {}
    for y in model.equilibria():
        rho, alpha0 = perturbed_system(model, y, x0)
        out[y] = [abs(linear_solution(rho, alpha0, ord, t, ctrl)) for t in times]
    return out


# -- existence --------------------------------------------------------------

@dataclass
class ExistenceReport:
    condition_value: float
    lipschitz_A: float
    bound_L: float | None
    horizon_T: float
    satisfied: bool
    branch: Literal["mu-ne-1", "mu-eq-1"]
    warnings: list[str] = field(default_factory=list)


def _condition_terms(theta, mu, gamma, span):
    """Terms of the existence series per unit ``A/B``. Finite for integer
    ``gamma``; the ``mu = 1`` form falls out with ``mu = 1``."""
    K = int(gamma) if float(gamma).is_integer() else None
    i = 0
    while K is None or i <= K:
        e = i * theta - mu + 1
        yield (generalized_binomial(gamma, i) * theta ** i * span ** e
               * recip_gamma(e + 1) / (1 - theta) ** (i - 1))
        i += 1


def existence_condition(ord: FractionalOrder, t0: float, T: float, A: float,
                        ctrl: SeriesControl = DEFAULT_CONTROL,
                        mu_eq_1: bool = False,
                        bound_L: float | None = None) -> ExistenceReport:
    r"""Contraction constant of the fixed-point map on ``[t0, T]``,

    .. math::

        C_1(T, A) = \frac{A}{B(\theta)} \sum_i \binom{\gamma}{i}
            \frac{\theta^i (T-t_0)^{i\theta-\mu+1}}
                 {(1-\theta)^{i-1}\Gamma(i\theta+2-\mu)}.

    ``mu_eq_1=True`` reports the ``mu = 1`` constant instead (using the
    ``theta``, ``gamma`` and ``B`` of ``ord``); the solvers do not support
    that case.
    """
    if not T > t0:
        raise ValueError(f"T ({T}) must exceed t0 ({t0})")
    if A < 0:
        raise ValueError(f"Lipschitz constant must be nonnegative, got {A}")
    mu = 1.0 if mu_eq_1 else ord.mu
    warnings = []
    if mu_eq_1:
        warnings.append("mu = 1 branch: reported only, outside solver scope")
    if A == 0:
        value = 0.0
    else:
        res = sum_series(_condition_terms(ord.theta, mu, ord.gamma, T - t0), ctrl)
        if not res.converged:
            raise TruncationFailure("existence series not converged", res)
        value = A / ord.b_theta * res.value
    return ExistenceReport(value, A, bound_L, T, value < 1,
                           "mu-eq-1" if mu_eq_1 else "mu-ne-1", warnings)


def model_existence(model: LogisticModel, ord: FractionalOrder, t0: float,
                    T: float, L: float, ctrl: SeriesControl = DEFAULT_CONTROL,
                    mu_eq_1: bool = False) -> ExistenceReport:
    """Existence condition with ``A`` from :func:`lipschitz_bound`.

    A nonpositive bound (possible for the cubic model at small ``L``) is kept
    as is and flagged in ``warnings``; the condition is then evaluated with
    ``A = 0``.
    """
    A = model.lipschitz_bound(L)
    report = existence_condition(ord, t0, T, max(A, 0.0), ctrl, mu_eq_1, L)
    report.lipschitz_A = A
    if A <= 0:
        report.warnings.append(
            f"Lipschitz expression is {A:.6g} <= 0 for L={L}; not a valid bound")
    return report


def critical_horizon(ord: FractionalOrder, t0: float, A: float,
                     ctrl: SeriesControl = DEFAULT_CONTROL,
                     xtol: float = 1e-12) -> float:
    """The ``T*`` with ``C_1(T*, A) = 1``; ``inf`` when ``A == 0``.

    ``C_1`` increases in ``T`` for integer ``gamma`` (all terms are
    nonnegative powers), so the root is unique there.
    """
    if A == 0:
        return math.inf

    def excess(T):
        return existence_condition(ord, t0, T, A, ctrl).condition_value - 1.0

    lo, hi = 0.0, 1.0
    while excess(t0 + hi) < 0:
        lo, hi = hi, 2 * hi
    if lo == 0.0:
        # C_1 -> 0 as T -> t0 since every exponent is positive for mu < 1
        lo = hi / 2
        while excess(t0 + lo) >= 0:
            lo /= 2
    return t0 + brentq(lambda s: excess(t0 + s), lo, hi, xtol=xtol)
