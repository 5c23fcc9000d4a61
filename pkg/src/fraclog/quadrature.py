r"""Product-trapezoidal weights for power-law kernels on a uniform grid.

For a kernel :math:`(t_m - s)^p`, ``p > -1``, and a linear Lagrange
interpolant on a cell :math:`[t_j, t_{j+1}]`, every weight depends on the
cell only through ``n = m - j``. With ``u = (t_m - s)/h`` the cell is
``u in [n-1, n]`` and

.. math::

    W_i(n) = \int_{n-1}^{n} u^p (n + i - u)\, du
           = \int_{t_j}^{t_{j+1}} (t_m-s)^p \frac{s - t_{j-i}}{h}\,ds \Big/ h^{p+1}.

``i = 1, 0`` are the two basis functions of the extrapolating (explicit)
interpolant through :math:`t_{j-1}, t_j`; ``i = 0, -1`` those of the
interpolating (implicit) one through :math:`t_j, t_{j+1}`.

All functions take integer arrays and return float arrays. The triangular
coefficient arrays of the schemes are Toeplitz except for their ``j = 0``
column, so they are stored as one vector over ``n`` plus one over ``m``.
"""

from __future__ import annotations

import numpy as np


# Gauss-Legendre nodes on [0, 1]. For n >= 2 the nearest singularity of
# u**p (u = 0) is at least 3 half-cell-widths from the cell centre, so 20
# nodes are exact to well below double precision.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS


def lagrange_weight(n, i: int, p: float):
    """``W_i(n)`` for ``n >= 1``.

    The antiderivative form cancels badly for large ``n`` and for ``p``
    near -1 (about ``n**2 / (p+1)`` ulp), so cells with ``n >= 2`` are
    integrated by Gauss-Legendre instead. The first cell, where ``u**p`` is
    singular, uses the closed form, which has no cancellation there.
    """
    n = np.asarray(n, dtype=float)
    q = p + 1.0
    first = (1.0 + i) / q - 1.0 / (q + 1.0)
    u = (n[..., None] - 1.0) + _GL_NODES
    quad = np.sum(_GL_WEIGHTS * u ** p * (n[..., None] + i - u), axis=-1)
    return np.where(n == 1.0, first, quad)


def start_weight(m, p: float):
    r"""Weight of the constant extrapolation on the first cell,
    :math:`\xi = (m^{p+1} - (m-1)^{p+1})/(p+1)`, evaluated without
    cancellation."""
    m = np.asarray(m, dtype=float)
    q = p + 1.0
    with np.errstate(divide="ignore"):
        diff = -np.expm1(q * np.log1p(-1.0 / m)) * m ** q
    return np.where(m == 1.0, 1.0, diff) / q


def _shifted(values: np.ndarray) -> np.ndarray:
    """``values[n-1]`` with the convention ``values[-1] = 0``."""
    out = np.zeros_like(values)
    out[1:] = values[:-1]
    return out


def explicit_kernels(N: int, p: float) -> tuple[np.ndarray, np.ndarray]:
    """Explicit-scheme weights, scaled by ``h**-(p+1)``.

    Returns ``(interior, start)``, both of length ``N + 1``:

    * ``interior[n] = W_1(n) - W_0(n-1)`` gives ``r^m_j`` for ``1 <= j <= m-1``
      at ``n = m - j`` (``W_0(0) = 0`` covers ``j = m - 1``);
    * ``start[m] = xi(m) - W_0(m-1)`` gives ``r^m_0`` (just ``xi(1)`` at m=1).

    Index 0 of both arrays is unused and set to 0.
    """
    n = np.arange(1, N + 1)
    w1 = np.zeros(N + 1)
    w0 = np.zeros(N + 1)
    w1[1:] = lagrange_weight(n, 1, p)
    w0[1:] = lagrange_weight(n, 0, p)
    interior = w1 - _shifted(w0)
    start = np.zeros(N + 1)
    start[1:] = start_weight(n, p)
    start -= _shifted(w0)
    interior[0] = 0.0
    start[0] = 0.0
    return interior, start


def implicit_kernels(N: int, p: float) -> tuple[np.ndarray, np.ndarray]:
    """Implicit-scheme weights, scaled by ``h**-(p+1)``.

    Returns ``(interior, start)``, both of length ``N + 1``:

    * ``interior[n] = W_0(n+1) - W_{-1}(n)`` gives ``r~^m_j`` for
      ``1 <= j <= m`` at ``n = m - j`` (``W_{-1}(0) = 0`` covers ``j = m``);
    * ``start[m] = -W_{-1}(m)`` gives ``r~^m_0``.

    ``interior[N]`` needs ``W_0(N+1)``, which is computed too.
    """
    n = np.arange(1, N + 2)
    w0 = np.zeros(N + 2)
    wm = np.zeros(N + 2)
    w0[1:] = lagrange_weight(n, 0, p)
    wm[1:] = lagrange_weight(n, -1, p)
    interior = w0[1:] - wm[:-1]
    start = -wm[:-1].copy()
    start[0] = 0.0
    return interior, start


def explicit_row(m: int, p: float) -> np.ndarray:
    """``r^m_j`` for ``j = 0..m-1``."""
    interior, start = explicit_kernels(m, p)
    row = np.empty(m)
    row[0] = start[m]
    row[1:] = interior[m - 1:0:-1]
    return row


def implicit_row(m: int, p: float) -> np.ndarray:
    """``r~^m_j`` for ``j = 0..m``; integrates ``(t_m-s)^p`` against the
    piecewise-linear interpolant of nodal values (times ``h**-(p+1)``)."""
    interior, start = implicit_kernels(m, p)
    row = np.empty(m + 1)
    row[0] = start[m]
    row[1:] = interior[m - 1::-1]
    return row
