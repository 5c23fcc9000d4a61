"""The fractional order triple and the coefficients of its integral series."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from fraclog.special import generalized_binomial, recip_gamma


@dataclass(frozen=True)
class FractionalOrder:
    r"""Order :math:`(\theta, \mu, \gamma)` of the generalized ABC operator.

    ``b_theta`` is the normalization :math:`B(\theta)`; the kernel rate
    :math:`\lambda = -\theta/(1-\theta)` is derived.

    The library works with ``0 < mu < 1`` only: at ``mu = 1`` the leading
    quadrature kernel stops being integrable.
    """

    theta: float
    mu: float
    gamma: float
    b_theta: float = 1.0

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if not 0 < self.mu < 1:
            raise ValueError(f"mu must lie in (0, 1), got {self.mu}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.b_theta > 0:
            raise ValueError(f"b_theta must be positive, got {self.b_theta}")

    @property
    def lam(self) -> float:
        return -self.theta / (1 - self.theta)

    @property
    def integer_gamma(self) -> int | None:
        """``gamma`` as an int when it is a whole number, else ``None``."""
        g = float(self.gamma)
        return int(g) if g.is_integer() else None

    @property
    def kernel_scale(self) -> float:
        """The prefactor ``B(theta) / (1 - theta)`` of the derivatives."""
        return self.b_theta / (1 - self.theta)


def coefficient_A(ord: FractionalOrder, k: int) -> float:
    r"""Coefficient of the k-th power-law integral in the solution series,

    .. math::

        A_k = \binom{\gamma}{k} \frac{\theta^k}{B(\theta)(1-\theta)^{k-1}}
              \frac{1}{\Gamma(\theta k - \mu + 1)}.
    """
    th = ord.theta
    return (generalized_binomial(ord.gamma, k) * th ** k
            / (ord.b_theta * (1 - th) ** (k - 1))
            * recip_gamma(th * k - ord.mu + 1))


def kernel_exponent(ord: FractionalOrder, k: int) -> float:
    """Exponent ``theta*k - mu`` of ``(t - s)`` in the k-th integral."""
    return ord.theta * k - ord.mu


def a_coefficients(ord: FractionalOrder) -> Iterator[tuple[int, float]]:
    """Yield ``(k, A_k)``; finite (``k <= gamma``) for integer ``gamma``."""
    K = ord.integer_gamma
    k = 0
    while K is None or k <= K:
        yield k, coefficient_A(ord, k)
        k += 1
