r"""Lagrange-interpolation predictor-corrector scheme for

.. math::

    {}^{ABC}D^{\theta,\mu,\gamma} x(t) = f(t, x(t)),\qquad x(t_0) = x_0,

written as ``x(t) = x0 + sum_k A_k int (t-s)^(theta k - mu) f(s, x(s)) ds``.

The explicit (predictor) step is ``x_m = x0 + sum_{j<m} c^m_j f_j`` and the
implicit (corrector) step ``x_m = x0 + sum_{j<=m} c~^m_j f_j``. Both
coefficient arrays are built once per solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from fraclog.errors import NonFiniteState, TruncationFailure
from fraclog.order import FractionalOrder, a_coefficients, coefficient_A, kernel_exponent
from fraclog.quadrature import explicit_kernels, implicit_kernels, lagrange_weight, start_weight
from fraclog.special import DEFAULT_CONTROL, SeriesControl

__all__ = [
    "SolverConfig",
    "Trajectory",
    "WeightTable",
    "build_weight_table",
    "coefficient_A",
    "solve_explicit",
    "solve_pece",
    "weight_w",
    "weight_xi",
]

Kind = Literal["explicit", "implicit"]
RHS = Callable[[float, float], float]


@dataclass(frozen=True)
class SolverConfig:
    t0: float
    t_end: float
    steps: int
    corrector_iterations: int = 1
    corrector_tol: float = 1e-12
    series: SeriesControl = DEFAULT_CONTROL
    k_max: int = 256

    def __post_init__(self):
        if not self.t_end > self.t0:
            raise ValueError(f"t_end ({self.t_end}) must exceed t0 ({self.t0})")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps}")
        if self.corrector_iterations < 0:
            raise ValueError("corrector_iterations must be nonnegative")
        if self.k_max < 1:
            raise ValueError("k_max must be positive")

    @property
    def h(self) -> float:
        return (self.t_end - self.t0) / self.steps


@dataclass
class Trajectory:
    """Solution values ``x_0..x_N`` on ``t_m = t0 + m*h``.

    If the solve stopped early on a non-finite value, ``values`` ends at the
    last finite grid point and ``meta["status"]`` is ``"non_finite"``.
    """

    t0: float
    h: float
    values: np.ndarray
    model: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.values.size)

    @property
    def final(self) -> float:
        return float(self.values[-1])

    @property
    def ok(self) -> bool:
        return self.meta.get("status", "ok") == "ok"


# -- weights --------------------------------------------------------------

def weight_w(m: int, i: int, k: int, j: int, ord: FractionalOrder) -> float:
    """``w^{m,i}_{k,j}`` for ``i`` in {-1, 0, 1} and ``0 <= j <= m-1``."""
    if m < 1 or not 0 <= j <= m - 1:
        raise IndexError(f"need m >= 1 and 0 <= j <= m-1, got m={m}, j={j}")
    if i not in (-1, 0, 1):
        raise IndexError(f"i must be -1, 0 or 1, got {i}")
    return float(lagrange_weight(m - j, i, kernel_exponent(ord, k)))


def weight_xi(m: int, k: int, ord: FractionalOrder) -> float:
    """``xi^m_k``, the first-cell weight of the explicit scheme."""
    if m < 1:
        raise IndexError(f"need m >= 1, got m={m}")
    return float(start_weight(m, kernel_exponent(ord, k)))


@dataclass(frozen=True)
class WeightTable:
    """Scheme coefficients for one ``(ord, h, N)``.

    ``c^m_j`` only depends on ``m - j`` for ``j >= 1``, so the triangular
    array is held as ``interior[n]`` (``n = m - j``) plus ``start[m]``
    (the ``j = 0`` column). :meth:`row` and :meth:`dense` expand it.
    """

    kind: Kind
    h: float
    steps: int
    a_coeffs: np.ndarray
    k_cut: int
    interior: np.ndarray
    start: np.ndarray

    def row(self, m: int) -> np.ndarray:
        """``c^m_j`` for ``j = 0..m-1`` (explicit) or ``0..m`` (implicit)."""
        if not 1 <= m <= self.steps:
            raise IndexError(f"row index must be in 1..{self.steps}, got {m}")
        if self.kind == "explicit":
            out = np.empty(m)
            out[1:] = self.interior[m - 1:0:-1]
        else:
            out = np.empty(m + 1)
            out[1:] = self.interior[m - 1::-1]
        out[0] = self.start[m]
        return out

    def dense(self) -> list[np.ndarray]:
        """The triangular array as a list of rows, ``m = 1..N``."""
        return [self.row(m) for m in range(1, self.steps + 1)]

    @property
    def c(self) -> list[np.ndarray]:
        return self.dense()


def build_weight_table(ord: FractionalOrder, cfg: SolverConfig,
                       kind: Kind = "explicit") -> WeightTable:
    """Assemble ``c^m_j = sum_k h^(theta k - mu + 1) A_k r^m_{k,j}`` (or the
    implicit ``c~``).

    The k-sum ends at ``k = gamma`` for integer ``gamma``; otherwise at the
    first k whose contribution is below ``series.rel_tol`` times the partial
    sum (max norm). :class:`TruncationFailure` is raised after ``k_max``
    terms, or earlier if the grid powers overflow; long horizons with
    ``theta`` near 1 run into this.
    """
    N, h = cfg.steps, cfg.h
    kernels = explicit_kernels if kind == "explicit" else implicit_kernels
    size = N + 1
    interior = np.zeros(size)
    start = np.zeros(size)
    coeffs = []
    converged = ord.integer_gamma is not None
    for k, a_k in a_coefficients(ord):
        if ord.integer_gamma is None and k >= cfg.k_max:
            break
        p = kernel_exponent(ord, k)
        scale = h ** (p + 1) * a_k
        with np.errstate(over="ignore", invalid="ignore"):
            w_int, w_start = kernels(N, p)
            d_int, d_start = scale * w_int[:size], scale * w_start[:size]
        if not (np.all(np.isfinite(d_int)) and np.all(np.isfinite(d_start))):
            # grid powers overflowed: the series cannot be summed in doubles
            break
        coeffs.append(a_k)
        interior += d_int
        start += d_start
        if ord.integer_gamma is None:
            term = max(np.max(np.abs(d_int)), np.max(np.abs(d_start)))
            partial = max(np.max(np.abs(interior)), np.max(np.abs(start)))
            if term < cfg.series.rel_tol * partial:
                converged = True
                break
    table = WeightTable(kind, h, N, np.array(coeffs), len(coeffs) - 1,
                        interior, start)
    if not converged:
        raise TruncationFailure(
            f"coefficient series for gamma={ord.gamma} not converged after "
            f"{len(coeffs)} terms (k_max={cfg.k_max})", table)
    return table


# -- solvers --------------------------------------------------------------

def _solve(rhs: RHS, x0: float, ord: FractionalOrder, cfg: SolverConfig,
           corrections: int, model: str) -> Trajectory:
    N, h, t0 = cfg.steps, cfg.h, cfg.t0
    pred = build_weight_table(ord, cfg, "explicit")
    corr = build_weight_table(ord, cfg, "implicit") if corrections else None
    x = np.empty(N + 1)
    f = np.empty(N + 1)
    x[0] = x0
    f[0] = rhs(t0, x0)
    meta = {
        "scheme": "pece" if corrections else "explicit",
        "corrector_iterations": corrections,
        "max_iterations_used": 0,
        "k_cut": pred.k_cut,
        "gamma_series": "exact" if ord.integer_gamma is not None else "truncated",
        "status": "ok",
    }

    def stop(m: int, what: str):
        meta["status"] = "non_finite"
        meta["failed_step"] = m
        traj = Trajectory(t0, h, x[:m].copy(), model, meta)
        raise NonFiniteState(f"non-finite {what} at step {m}", traj)

    if not math.isfinite(f[0]):
        stop(1, "right-hand side")
    for m in range(1, N + 1):
        tm = t0 + m * h
        hist = pred.start[m] * f[0] + np.dot(pred.interior[m - 1:0:-1], f[1:m])
        xm = x0 + hist
        if corr is not None:
            base = x0 + corr.start[m] * f[0] + np.dot(corr.interior[m - 1:0:-1], f[1:m])
            last = corr.interior[0]
            used = 0
            for _ in range(corrections):
                fm = rhs(tm, xm)
                if not math.isfinite(fm):
                    stop(m, "right-hand side")
                new = base + last * fm
                used += 1
                done = abs(new - xm) < cfg.corrector_tol
                xm = new
                if done:
                    break
            meta["max_iterations_used"] = max(meta["max_iterations_used"], used)
        if not math.isfinite(xm):
            stop(m, "state")
        x[m] = xm
        f[m] = rhs(tm, xm)
        if not math.isfinite(f[m]):
            stop(m + 1, "right-hand side")
    return Trajectory(t0, h, x, model, meta)


def solve_explicit(rhs: RHS, x0: float, ord: FractionalOrder,
                   cfg: SolverConfig, model: str = "") -> Trajectory:
    """Explicit (predictor-only) scheme.

    Raises :class:`NonFiniteState` carrying the partial trajectory if a
    state or right-hand side value is not finite.
    """
    return _solve(rhs, x0, ord, cfg, 0, model)


def solve_pece(rhs: RHS, x0: float, ord: FractionalOrder,
               cfg: SolverConfig, model: str = "") -> Trajectory:
    """Predict with the explicit scheme, then apply the implicit scheme
    ``cfg.corrector_iterations`` times (stopping early once successive
    iterates differ by less than ``cfg.corrector_tol``). Zero iterations is
    exactly :func:`solve_explicit`.
    """
    return _solve(rhs, x0, ord, cfg, cfg.corrector_iterations, model)
