"""Feasibility analysis: bound constants and the input/performance conditions.

The closed-loop derivative of the filtered error is bounded by
psi_r0*c1 + psi_r_inf*c2 + xd_bar*c3 + d_bar + g*u.  The input constraint is
feasible iff u_bar strictly exceeds (psi_r_inf*c2 + xd_bar*c3 + d_bar)/g_lo,
and the performance amplitude psi0 must lie strictly inside the window
(|r(0)|*(a-mu)^(1-n),  (g_lo*u_bar - psi_r_inf*c2 - xd_bar*c3 - d_bar)
                       / ((c1+mu)*(a-mu)^(n-1))).
All inequalities are strict; equality is reported as a boundary case and
counted infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass

from .perfspec import PerformanceSpec, VirtualSpec
from .plant import PlantModel

__all__ = [
    "FeasibilityReport",
    "compute_cbars",
    "compute_constants",
    "check_pic",
    "check_ppc",
    "full_report",
]


@dataclass(frozen=True)
class FeasibilityReport:
    cbar1: float
    cbar2: float
    c1: float
    c2: float
    c3: float
    pic_threshold: float
    pic_margin: float
    pic_ok: bool
    ppc_lower: float
    ppc_upper: float
    ppc_margin_lower: float
    ppc_margin_upper: float
    ppc_ok: bool
    boundary: tuple[str, ...]

    @property
    def feasible(self) -> bool:
        return self.pic_ok and self.ppc_ok

    def lines(self) -> list[tuple[str, str]]:
        """Key/value rows shared by the text and CSV renderings."""
        return [
            ("cbar1", f"{self.cbar1:.9g}"),
            ("cbar2", f"{self.cbar2:.9g}"),
            ("c1", f"{self.c1:.9g}"),
            ("c2", f"{self.c2:.9g}"),
            ("c3", f"{self.c3:.9g}"),
            ("pic_threshold", f"{self.pic_threshold:.9g}"),
            ("pic_margin", f"{self.pic_margin:.9g}"),
            ("pic_ok", str(self.pic_ok).lower()),
            ("ppc_lower", f"{self.ppc_lower:.9g}"),
            ("ppc_upper", f"{self.ppc_upper:.9g}"),
            ("ppc_margin_lower", f"{self.ppc_margin_lower:.9g}"),
            ("ppc_margin_upper", f"{self.ppc_margin_upper:.9g}"),
            ("ppc_ok", str(self.ppc_ok).lower()),
            ("boundary", ";".join(self.boundary) if self.boundary else "none"),
            ("feasible", str(self.feasible).lower()),
        ]


def compute_cbars(a: float, mu_r: float, n: int) -> tuple[float, float]:
    """Closed forms for the filtered-sum bounds (zero for n = 1).

    cbar1 = (2a-mu_r)*((3a-mu_r)^(n-1) - (2a-mu_r)^(n-1))
    cbar2 = 2a*((3a)^(n-1) - (2a)^(n-1))
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (a > mu_r >= 0):
        raise ValueError("need a > mu_r >= 0")
    cbar1 = (2 * a - mu_r) * ((3 * a - mu_r) ** (n - 1) - (2 * a - mu_r) ** (n - 1))
    cbar2 = 2 * a * ((3 * a) ** (n - 1) - (2 * a) ** (n - 1))
    return cbar1, cbar2


def compute_constants(model: PlantModel, a: float, mu_r: float, n: int) -> tuple[float, float, float]:
    """Positive constants of the filtered-error derivative bound.

    c1 = (cbar1 + k_l*n^(1/p*)*(2a-mu_r)^(n-1)) / (a-mu_r)^(n-1)
    c2 = (cbar2 + k_l*n^(1/p*)*(2a)^(n-1)) / a^(n-1)
    c3 = k_l*n^(1/p*) + 1
    """
    if a <= mu_r:
        raise ValueError("need a > mu_r")
    cbar1, cbar2 = compute_cbars(a, mu_r, n)
    kn = model.k_l * model.norm_scale()
    c1 = (cbar1 + kn * (2 * a - mu_r) ** (n - 1)) / (a - mu_r) ** (n - 1)
    c2 = (cbar2 + kn * (2 * a) ** (n - 1)) / a ** (n - 1)
    c3 = kn + 1.0
    return c1, c2, c3


def check_pic(
    model: PlantModel,
    vspec: VirtualSpec,
    xd_bar: float,
    u_bar: float,
) -> tuple[float, bool]:
    """Input-constraint condition: u_bar > (psi_r_inf*c2 + xd_bar*c3 + d_bar)/g_lo."""
    _, c2, c3 = compute_constants(model, vspec.a, vspec.mu_r, model.n)
    threshold = (vspec.psi_r_inf * c2 + xd_bar * c3 + model.d_bar) / model.g_lo
    return threshold, u_bar > threshold


def check_ppc(
    model: PlantModel,
    pps: PerformanceSpec,
    vspec: VirtualSpec,
    xd_bar: float,
    u_bar: float,
    r0: float,
    n: int,
) -> tuple[float, float, bool]:
    """Performance window: |r(0)|*(a-mu)^(1-n) < psi0 < upper.

    When the input condition fails the upper endpoint is nonpositive or
    below the lower endpoint, i.e. the window is empty.
    """
    c1, c2, c3 = compute_constants(model, vspec.a, vspec.mu_r, n)
    lower = abs(r0) * (vspec.a - pps.mu) ** (1 - n)
    upper = (model.g_lo * u_bar - vspec.psi_r_inf * c2 - xd_bar * c3 - model.d_bar) / (
        (c1 + pps.mu) * (vspec.a - pps.mu) ** (n - 1)
    )
    return lower, upper, lower < pps.psi0 < upper


def full_report(
    model: PlantModel,
    pps: PerformanceSpec,
    vspec: VirtualSpec,
    xd_bar: float,
    u_bar: float,
    r0: float,
) -> FeasibilityReport:
    n = model.n
    cbar1, cbar2 = compute_cbars(vspec.a, vspec.mu_r, n)
    c1, c2, c3 = compute_constants(model, vspec.a, vspec.mu_r, n)
    pic_threshold, pic_ok = check_pic(model, vspec, xd_bar, u_bar)
    ppc_lower, ppc_upper, ppc_ok = check_ppc(model, pps, vspec, xd_bar, u_bar, r0, n)
    boundary = []
    if u_bar == pic_threshold:
        boundary.append("pic")
    if pps.psi0 == ppc_lower:
        boundary.append("ppc_lower")
    if pps.psi0 == ppc_upper:
        boundary.append("ppc_upper")
    return FeasibilityReport(
        cbar1=cbar1,
        cbar2=cbar2,
        c1=c1,
        c2=c2,
        c3=c3,
        pic_threshold=pic_threshold,
        pic_margin=u_bar - pic_threshold,
        pic_ok=pic_ok,
        ppc_lower=ppc_lower,
        ppc_upper=ppc_upper,
        ppc_margin_lower=pps.psi0 - ppc_lower,
        ppc_margin_upper=ppc_upper - pps.psi0,
        ppc_ok=ppc_ok,
        boundary=tuple(boundary),
    )
