"""Fixed-step closed-loop simulation with funnel and input monitors.

Classical RK4 with the control input recomputed at every internal stage;
the input is pure state feedback, so stage re-evaluation is well defined.
Error derivatives are formed exactly from the state and the symbolic
trajectory derivatives, never by numerical differentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr
from .bounds import deriv_envelope
from .controller import DEFAULT_CLAMP_EPS, control_law, filtered_error
from .perfspec import PerformanceSpec, VirtualSpec, psi_at
from .plant import PlantModel, TrajectorySpec, dynamics

__all__ = ["SimConfig", "ViolationEvent", "Trajectory", "rk4_step", "simulate"]

HARD_KINDS = ("PPC", "VPC", "PIC")


@dataclass(frozen=True)
class SimConfig:
    x0: tuple[float, ...]
    dt: float = 1e-3
    t_end: float = 20.0
    record_stride: int = 10

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.t_end <= self.dt:
            raise ValueError("t_end must be > dt")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")


@dataclass(frozen=True)
class ViolationEvent:
    time: float
    kind: str  # PPC | VPC | PIC | envelope_<i>
    value: float
    bound: float

    @property
    def hard(self) -> bool:
        return self.kind in HARD_KINDS


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), n)
    xd: np.ndarray
    err: np.ndarray
    psi: np.ndarray
    r: np.ndarray
    psi_r: np.ndarray
    u: np.ndarray
    saturated: np.ndarray
    violations: list[ViolationEvent] = field(default_factory=list)

    @property
    def hard_violations(self) -> list[ViolationEvent]:
        return [v for v in self.violations if v.hard]


def rk4_step(model: PlantModel, controller, t: float, state: tuple[float, ...], dt: float):
    """One classical RK4 step; `controller(t, state) -> u` is stage feedback."""

    def rhs(ti, xi):
        return dynamics(model, xi, controller(ti, xi), ti)

    k1 = rhs(t, state)
    k2 = rhs(t + 0.5 * dt, _axpy(state, k1, 0.5 * dt))
    k3 = rhs(t + 0.5 * dt, _axpy(state, k2, 0.5 * dt))
    k4 = rhs(t + dt, _axpy(state, k3, dt))
    nxt = tuple(
        x + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d)
        for x, a, b, c, d in zip(state, k1, k2, k3, k4)
    )
    if not all(math.isfinite(x) for x in nxt):
        raise FloatingPointError(f"non-finite state at t={t}: {nxt}")
    return nxt


def _axpy(x, k, h):
    return tuple(xi + h * ki for xi, ki in zip(x, k))


def simulate(
    model: PlantModel,
    trajspec: TrajectorySpec,
    pps: PerformanceSpec,
    vspec: VirtualSpec,
    u_bar: float,
    simcfg: SimConfig,
) -> Trajectory:
    """Integrate the closed loop and log funnel/input monitor events.

    PPC (|err| >= psi), VPC (|r| >= psi_r), and PIC (|u| > u_bar) events are
    hard; envelope events on error derivatives i >= 1 are soft monitors
    because those bounds strictly apply only from zero initial errors.
    """
    n = model.n
    if len(simcfg.x0) != n:
        raise ValueError(f"x0 has length {len(simcfg.x0)}, expected {n}")

    state_names = model.state_names
    f_fn = expr.compile_fn(model.f_expr, state_names)
    g_fn = expr.compile_fn(model.g_expr, state_names)
    d_fn = expr.compile_fn(model.d_expr, ("t",))
    xd_fns = [expr.compile_fn(node, ("t",)) for node in trajspec.derivs[:n]]
    lambdas = vspec.lambdas
    psi_r0, psi_r_inf, mu_r = vspec.psi_r0, vspec.psi_r_inf, vspec.mu_r

    def control(t, x):
        psi_r_t = psi_r0 * math.exp(-mu_r * t) + psi_r_inf
        errs = tuple(xi - fn(t) for xi, fn in zip(x, xd_fns))
        r = filtered_error(errs, lambdas)
        u, _ = control_law(r, psi_r_t, u_bar, DEFAULT_CLAMP_EPS)
        return u

    def rhs(t, x):
        u = control(t, x)
        out = list(x[1:])
        out.append(f_fn(*x) + g_fn(*x) * u + d_fn(t))
        return out, u

    envelopes = [deriv_envelope(vspec, n, i) for i in range(1, n)]

    steps = int(round(simcfg.t_end / simcfg.dt))
    dt = simcfg.dt
    state = tuple(float(x) for x in simcfg.x0)

    times, states_rec, xd_rec, err_rec = [], [], [], []
    psi_rec, r_rec, psi_r_rec, u_rec, sat_rec = [], [], [], [], []
    violations: list[ViolationEvent] = []

    def record(k: int, x):
        t = k * dt
        psi_t = psi_at(pps.psi0, pps.psi_inf, pps.mu, t)
        psi_r_t = psi_at(psi_r0, psi_r_inf, mu_r, t)
        errs = tuple(xi - fn(t) for xi, fn in zip(x, xd_fns))
        r = filtered_error(errs, lambdas)
        u, sat = control_law(r, psi_r_t, u_bar, DEFAULT_CLAMP_EPS)
        times.append(t)
        states_rec.append(x)
        xd_rec.append(xd_fns[0](t))
        err_rec.append(errs[0])
        psi_rec.append(psi_t)
        r_rec.append(r)
        psi_r_rec.append(psi_r_t)
        u_rec.append(u)
        sat_rec.append(sat)
        if abs(errs[0]) >= psi_t:
            violations.append(ViolationEvent(t, "PPC", errs[0], psi_t))
        if abs(r) >= psi_r_t:
            violations.append(ViolationEvent(t, "VPC", r, psi_r_t))
        if abs(u) > u_bar:
            violations.append(ViolationEvent(t, "PIC", u, u_bar))
        for i, envel in enumerate(envelopes, start=1):
            bound = envel.value_at(t)
            if abs(errs[i]) >= bound:
                violations.append(ViolationEvent(t, f"envelope_{i}", errs[i], bound))

    record(0, state)
    for k in range(steps):
        t = k * dt
        # inline RK4 using the compiled rhs (identical math to rk4_step)
        k1, _ = rhs(t, state)
        k2, _ = rhs(t + 0.5 * dt, _axpy(state, k1, 0.5 * dt))
        k3, _ = rhs(t + 0.5 * dt, _axpy(state, k2, 0.5 * dt))
        k4, _ = rhs(t + dt, _axpy(state, k3, dt))
        state = tuple(
            x + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d)
            for x, a, b, c, d in zip(state, k1, k2, k3, k4)
        )
        if not all(math.isfinite(x) for x in state):
            raise FloatingPointError(f"non-finite state at t={t + dt}")
        if (k + 1) % simcfg.record_stride == 0 or k + 1 == steps:
            record(k + 1, state)

    return Trajectory(
        times=np.asarray(times),
        states=np.asarray(states_rec),
        xd=np.asarray(xd_rec),
        err=np.asarray(err_rec),
        psi=np.asarray(psi_rec),
        r=np.asarray(r_rec),
        psi_r=np.asarray(psi_r_rec),
        u=np.asarray(u_rec),
        saturated=np.asarray(sat_rec, dtype=bool),
        violations=violations,
    )
