"""Approximation-free saturating feedback on the filtered tracking error.

u = -(2*u_bar/pi) * arctan((pi/(2*u_bar)) * tan(pi*r/(2*psi_r))), which is
bounded by u_bar for every r and needs no model knowledge.  Near |r| = psi_r
the tan argument approaches pi/2; the law is replaced there by its one-sided
limit -sign(r)*u_bar instead of evaluating tan of a near-singular argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .perfspec import VirtualSpec

__all__ = ["ControllerState", "filtered_error", "control_law"]

DEFAULT_CLAMP_EPS = 1e-12


@dataclass
class ControllerState:
    vspec: VirtualSpec
    u_bar: float
    clamp_eps: float = DEFAULT_CLAMP_EPS
    violation_flag: bool = field(default=False)

    def __post_init__(self):
        if self.u_bar <= 0:
            raise ValueError("u_bar must be > 0")
        if not (0.0 < self.clamp_eps < 1e-6):
            raise ValueError("clamp_eps must be in (0, 1e-6)")


def filtered_error(err_derivs: tuple[float, ...], lambdas: tuple[float, ...]) -> float:
    """r = sum(lambda_i * err^(i-1)) + err^(n-1)."""
    if len(err_derivs) != len(lambdas) + 1:
        raise ValueError(
            f"expected {len(lambdas) + 1} error derivatives, got {len(err_derivs)}"
        )
    r = err_derivs[-1]
    for lam, e in zip(lambdas, err_derivs):
        r += lam * e
    return r


def control_law(
    r: float,
    psi_r_t: float,
    u_bar: float,
    clamp_eps: float = DEFAULT_CLAMP_EPS,
) -> tuple[float, bool]:
    """Evaluate the saturating law; returns (u, saturated).

    saturated=True means |r/psi_r| reached 1 - clamp_eps and the one-sided
    limit -sign(r)*u_bar was emitted; a discrete integrator can overshoot the
    funnel boundary by O(dt) even though the continuous theory forbids it.
    """
    if psi_r_t <= 0:
        raise ValueError("psi_r_t must be > 0")
    if u_bar <= 0:
        raise ValueError("u_bar must be > 0")
    ratio = r / psi_r_t
    if abs(ratio) >= 1.0 - clamp_eps:
        return (-math.copysign(u_bar, r), True)
    inner = math.tan(0.5 * math.pi * ratio)
    u = -(2.0 * u_bar / math.pi) * math.atan(0.5 * math.pi / u_bar * inner)
    return (u, False)
