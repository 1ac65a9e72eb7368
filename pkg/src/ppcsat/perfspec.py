"""Performance constraints and the derived virtual constraint on the filtered error.

The tracking-error funnel is psi(t) = psi0*exp(-mu*t) + psi_inf.  The filtered
error r = sum(lambda_i * err^(i-1)) + err^(n-1) gets its own funnel psi_r with
parameters chosen so that containment of r inside psi_r implies containment of
the raw error inside psi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "PerformanceSpec",
    "VirtualSpec",
    "lambda_coeffs",
    "derive_vpc",
    "psi_at",
    "weighted_binom_sum",
]


@dataclass(frozen=True)
class PerformanceSpec:
    psi0: float
    psi_inf: float
    mu: float

    def __post_init__(self):
        if self.psi0 <= 0:
            raise ValueError("psi0 must be > 0")
        if self.psi_inf <= 0:
            raise ValueError("psi_inf must be > 0")
        if self.mu < 0:
            raise ValueError("mu must be >= 0")

    def value_at(self, t: float) -> float:
        return psi_at(self.psi0, self.psi_inf, self.mu, t)


@dataclass(frozen=True)
class VirtualSpec:
    a: float
    mu_r: float
    psi_r0: float
    psi_r_inf: float
    lambdas: tuple[float, ...]

    def __post_init__(self):
        if self.a <= self.mu_r:
            raise ValueError("a must be > mu_r")
        if self.psi_r0 <= 0 or self.psi_r_inf <= 0:
            raise ValueError("funnel amplitudes must be > 0")

    def value_at(self, t: float) -> float:
        return psi_at(self.psi_r0, self.psi_r_inf, self.mu_r, t)


def lambda_coeffs(n: int, a: float) -> tuple[float, ...]:
    """Binomial filter weights: coefficients of (s+a)^(n-1) below the leading 1.

    lambda_i = C(n-1, n-i) * a^(n-i) for i = 1..n-1; empty for n = 1.
    Binomials come from exact integer arithmetic before the float conversion.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if a <= 0:
        raise ValueError("a must be > 0")
    return tuple(math.comb(n - 1, n - i) * a ** (n - i) for i in range(1, n))


def derive_vpc(pps: PerformanceSpec, a: float, n: int) -> VirtualSpec:
    """Map the error funnel to the filtered-error funnel.

    mu_r = mu, psi_r0 = (a-mu)^(n-1)*psi0, psi_r_inf = a^(n-1)*psi_inf.
    Requires a > mu strictly; a == mu would collapse the funnel amplitude.
    """
    if a <= pps.mu:
        raise ValueError("a must be > mu")
    return VirtualSpec(
        a=a,
        mu_r=pps.mu,
        psi_r0=(a - pps.mu) ** (n - 1) * pps.psi0,
        psi_r_inf=a ** (n - 1) * pps.psi_inf,
        lambdas=lambda_coeffs(n, a),
    )


def psi_at(psi0: float, psi_inf: float, mu: float, t: float) -> float:
    """Funnel value psi0*exp(-mu*t) + psi_inf at time t >= 0."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return psi0 * math.exp(-mu * t) + psi_inf


def weighted_binom_sum(a: float, h: float, n: int) -> float:
    """Closed form of sum_{i=1}^{n-1} C(n-1, n-i) * a^(n-i) * h^i.

    Equals h*((a+h)^(n-1) - h^(n-1)); zero for n = 1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return h * ((a + h) ** (n - 1) - h ** (n - 1))
