"""Strict-feedback plant models and desired-trajectory specifications.

A plant of order n is a chain of integrators whose last state obeys
xn' = f(x) + g(x)*u + d(t).  The bound metadata (k_l, p_star, g_lo, g_hi,
d_bar) is user-declared, never inferred from the expressions: the control
law itself uses none of it, only the feasibility analysis does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import expr
from .expr import ExprNode

__all__ = [
    "PlantModel",
    "TrajectorySpec",
    "dynamics",
    "builtin_example",
    "estimate_traj_bound",
]


@dataclass(frozen=True)
class PlantModel:
    n: int
    f_expr: ExprNode
    g_expr: ExprNode
    d_expr: ExprNode
    k_l: float
    p_star: float  # positive integer or math.inf
    g_lo: float
    g_hi: float
    d_bar: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.k_l < 0:
            raise ValueError("k_l must be >= 0")
        if not (self.p_star == math.inf or (self.p_star == int(self.p_star) and self.p_star >= 1)):
            raise ValueError("p_star must be a positive integer or inf")
        if self.g_lo <= 0:
            raise ValueError("g_lo must be > 0")
        if self.g_hi < self.g_lo:
            raise ValueError("g_hi must be >= g_lo")
        if self.d_bar < 0:
            raise ValueError("d_bar must be >= 0")

    @property
    def state_names(self) -> tuple[str, ...]:
        return tuple(f"x{i}" for i in range(1, self.n + 1))

    def norm_scale(self) -> float:
        """Equivalence factor n**(1/p_star) between the p*-norm and the max norm."""
        if self.p_star == math.inf:
            return 1.0
        return self.n ** (1.0 / self.p_star)


@dataclass(frozen=True)
class TrajectorySpec:
    xd_expr: ExprNode
    derivs: tuple[ExprNode, ...]  # orders 0..n
    xd_bar: float

    def __post_init__(self):
        if not self.derivs or self.derivs[0] != self.xd_expr:
            raise ValueError("derivs[0] must be the trajectory expression itself")
        if self.xd_bar <= 0:
            raise ValueError("xd_bar must be > 0")

    @classmethod
    def from_expression(
        cls,
        xd_expr: ExprNode,
        n: int,
        xd_bar: float | None = None,
        t_end: float = 20.0,
        samples: int = 20001,
    ) -> "TrajectorySpec":
        """Build derivative chain up to order n; estimate xd_bar if not given."""
        derivs = [xd_expr]
        for _ in range(n):
            derivs.append(expr.differentiate(derivs[-1], "t"))
        derivs_t = tuple(derivs)
        if xd_bar is None:
            xd_bar = _grid_bound(derivs_t, t_end, samples)
        return cls(xd_expr=xd_expr, derivs=derivs_t, xd_bar=xd_bar)


def dynamics(model: PlantModel, state: Sequence[float], u: float, t: float) -> list[float]:
    """Full state derivative: chain shift plus f + g*u + d in the last slot."""
    if len(state) != model.n:
        raise ValueError(f"state has length {len(state)}, expected {model.n}")
    env = {name: float(x) for name, x in zip(model.state_names, state)}
    env["t"] = t
    try:
        f = expr.evaluate(model.f_expr, env)
        g = expr.evaluate(model.g_expr, env)
        d = expr.evaluate(model.d_expr, {"t": t})
    except expr.EvalError as exc:
        raise expr.EvalError(f"plant expression failed at t={t}: {exc}") from exc
    out = [float(x) for x in state[1:]]
    out.append(f + g * u + d)
    return out


def builtin_example() -> tuple[PlantModel, TrajectorySpec]:
    """Second-order benchmark plant with sinusoidal disturbance and target."""
    model = PlantModel(
        n=2,
        f_expr=expr.parse("-0.5*(sin(x1)+x2)"),
        g_expr=expr.parse("3+cos(x2)"),
        d_expr=expr.parse("0.5*sin(2*t)"),
        k_l=0.5,
        p_star=1,
        g_lo=2.0,
        g_hi=4.0,
        d_bar=0.5,
    )
    traj = TrajectorySpec.from_expression(expr.parse("0.5*sin(t)"), n=2, xd_bar=0.5)
    return model, traj


def _grid_bound(derivs: tuple[ExprNode, ...], t_end: float, samples: int) -> float:
    fns = [expr.compile_fn(node, ("t",)) for node in derivs]
    grid = np.linspace(0.0, t_end, samples)
    worst = 0.0
    for fn in fns:
        worst = max(worst, max(abs(fn(t)) for t in grid))
    return worst


def estimate_traj_bound(spec: TrajectorySpec, t_end: float, samples: int) -> float:
    """Max-norm of the derivative stack (orders 0..n) on a uniform grid."""
    if samples < 2:
        raise ValueError("samples must be >= 2")
    if t_end <= 0:
        raise ValueError("t_end must be > 0")
    return _grid_bound(spec.derivs, t_end, samples)
