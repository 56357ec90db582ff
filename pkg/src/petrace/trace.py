"""Physical-frame evolution of the trace system on Z in [0, 1].

State is the pair (a, c): a is the negative horizontal velocity gradient on
the symmetry axis, c the second horizontal derivative of temperature there.
The system is

    a_t = a^2 - (D^-1 a) a_Z - D^-1 c - int_0^1 (2 a^2 - D^-1 c) dZ,
    c_t = 2 a c - (D^-1 a) c_Z + sigma c_ZZ,

with zero mean of a and, for sigma=1, Dirichlet conditions on c, where
D^-1 denotes the running integral from Z=0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded

from .errors import TimeStepUnderflow
from .grid import Field, Grid, cumulative, d1, d1_at_lo, d1_upwind, d2, definite

__all__ = ["TraceState", "SolverConfig", "StepResult", "Trajectory",
           "trace_rhs", "step", "run_to_blowup", "run_to_time"]

_MEAN_TOL = 1e-8    # relative to max(1, max|a|); the compatibility condition
_BC_TOL = 1e-10


@dataclass(frozen=True)
class TraceState:
    """Trace fields on Z in [0,1] at physical time t."""

    a: Field
    c: Field
    sigma: int
    t: float = 0.0

    def __post_init__(self):
        if self.sigma not in (0, 1):
            raise ValueError("sigma must be 0 or 1")
        ga, gc = self.a.grid, self.c.grid
        if ga != gc:
            raise ValueError("a and c must share a grid")
        if abs(ga.lo) > 1e-12 or abs(ga.hi - 1.0) > 1e-12:
            raise ValueError("trace fields live on [0, 1]")
        mean = definite(self.a.values, ga.h)
        scale = max(1.0, self.a.max_abs())
        if abs(mean) > _MEAN_TOL * scale:
            raise ValueError(f"compatibility condition violated: integral(a) = {mean:g}")
        if self.sigma == 1:
            cscale = max(1.0, self.c.max_abs())
            if abs(self.c.values[0]) > _BC_TOL * cscale or abs(self.c.values[-1]) > _BC_TOL * cscale:
                raise ValueError("sigma=1 requires c(0) = c(1) = 0")

    @property
    def grid(self) -> Grid:
        return self.a.grid


@dataclass
class SolverConfig:
    n: int = 1025
    dt_safety: float = 0.5
    blowup_cap: float | None = None   # None: resolved to 1e6 * max|a0| at run start
    dt_floor: float = 1e-15
    upwind: bool = False
    dt_max: float = 1.0
    t_max: float = math.inf
    max_steps: int = 5_000_000
    store_stride: int = 0             # 0: keep no full states
    probe_Z: tuple[float, ...] = (0.0, 0.25, 0.5)

    def __post_init__(self):
        if not (0.0 < self.dt_safety <= 1.0):
            raise ValueError("dt_safety must lie in (0, 1]")
        if self.blowup_cap is not None and self.blowup_cap <= 0:
            raise ValueError("blowup_cap must be positive")
        if self.dt_floor <= 0:
            raise ValueError("dt_floor must be positive")


@dataclass
class StepResult:
    state: TraceState
    dt: float
    blowup: bool
    mean_drift_rate: float = 0.0  # pre-projection d(int a)/dt over the step


# ---------------------------------------------------------------------------
# right-hand side
# ---------------------------------------------------------------------------

def _rhs(va, vc, h, sigma, upwind=False, diffusion=True):
    A = cumulative(va, h)
    C = cumulative(vc, h)
    if upwind:
        aZ = d1_upwind(va, h, A)
        cZ = d1_upwind(vc, h, A)
    else:
        aZ = d1(va, h)
        cZ = d1(vc, h)
    K = definite(2.0 * va * va - C, h)
    da = va * va - A * aZ - C - K
    dc = 2.0 * va * vc - A * cZ
    if sigma == 1:
        if diffusion:
            dc = dc + d2(vc, h)
        dc[0] = 0.0
        dc[-1] = 0.0
    return da, dc


def trace_rhs(state: TraceState, upwind: bool = False) -> tuple[Field, Field]:
    """Instantaneous time derivative (da, dc) of the trace system."""
    da, dc = _rhs(state.a.values, state.c.values, state.grid.h, state.sigma, upwind=upwind)
    return Field(state.grid, da), Field(state.grid, dc)


# ---------------------------------------------------------------------------
# time stepping
# ---------------------------------------------------------------------------

def _cn_half(vc, h, tau):
    """Crank-Nicolson diffusion over time tau with Dirichlet rows pinned."""
    n = vc.shape[0]
    r = 0.5 * tau / (h * h)
    rhs = vc.copy()
    rhs[1:-1] = vc[1:-1] + r * (vc[:-2] - 2.0 * vc[1:-1] + vc[2:])
    rhs[0] = 0.0
    rhs[-1] = 0.0
    ab = np.zeros((3, n))
    ab[0, 1:] = -r
    ab[1, :] = 1.0 + 2.0 * r
    ab[2, :-1] = -r
    ab[1, 0] = ab[1, -1] = 1.0
    ab[0, 1] = 0.0
    ab[2, -2] = 0.0
    return solve_banded((1, 1), ab, rhs)


def _rk4(va, vc, h, sigma, dt, upwind):
    # diffusion excluded here; for sigma=1 it is applied in the Strang halves
    k1a, k1c = _rhs(va, vc, h, sigma, upwind, diffusion=False)
    k2a, k2c = _rhs(va + 0.5 * dt * k1a, vc + 0.5 * dt * k1c, h, sigma, upwind, diffusion=False)
    k3a, k3c = _rhs(va + 0.5 * dt * k2a, vc + 0.5 * dt * k2c, h, sigma, upwind, diffusion=False)
    k4a, k4c = _rhs(va + dt * k3a, vc + dt * k3c, h, sigma, upwind, diffusion=False)
    na = va + (dt / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
    nc = vc + (dt / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c)
    return na, nc


def stable_dt(state: TraceState, cfg: SolverConfig) -> float:
    """Advective/reactive step size: dt_safety * min(h / max|D^-1 a|, 1 / max|a|)."""
    va = state.a.values
    h = state.grid.h
    amax = float(np.max(np.abs(va)))
    Amax = float(np.max(np.abs(cumulative(va, h))))
    dt = cfg.dt_max
    if Amax > 0.0:
        dt = min(dt, h / Amax)
    if amax > 0.0:
        dt = min(dt, 1.0 / amax)
    return cfg.dt_safety * dt


def step(state: TraceState, cfg: SolverConfig, dt_cap: float | None = None) -> StepResult:
    """One time step.

    Explicit RK4 on the advection/reaction part; for sigma=1 the diffusion
    is wrapped around it as two unconditionally stable Crank-Nicolson half
    steps (Strang splitting).  Afterwards the spatial mean of a is projected
    out and Dirichlet values of c re-imposed.  If the state already exceeds
    the blow-up cap, no step is taken and the blow-up flag is set.
    """
    cap = cfg.blowup_cap if cfg.blowup_cap is not None else math.inf
    if state.a.max_abs() >= cap:
        return StepResult(state, 0.0, True)

    dt = stable_dt(state, cfg)
    if dt_cap is not None:
        dt = min(dt, dt_cap)
    if dt < cfg.dt_floor:
        raise TimeStepUnderflow(f"dt={dt:g} below floor {cfg.dt_floor:g} at t={state.t:g}")

    h = state.grid.h
    va = state.a.values.copy()
    vc = state.c.values.copy()
    if state.sigma == 1:
        vc = _cn_half(vc, h, 0.5 * dt)
    na, nc = _rk4(va, vc, h, state.sigma, dt, cfg.upwind)
    if state.sigma == 1:
        nc = _cn_half(nc, h, 0.5 * dt)

    mean_before = definite(state.a.values, h)
    mean_after = definite(na, h)
    drift_rate = (mean_after - mean_before) / dt

    na -= mean_after  # length of [0,1] is 1, so the integral is the mean
    if state.sigma == 1:
        nc[0] = 0.0
        nc[-1] = 0.0

    new = TraceState(Field(state.grid, na), Field(state.grid, nc), state.sigma, state.t + dt)
    return StepResult(new, dt, False, drift_rate)


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    """Per-step diagnostics of a run, plus optional stored states."""

    t: np.ndarray
    max_a: np.ndarray
    max_c: np.ndarray
    mean_a: np.ndarray
    dt: np.ndarray
    a0: np.ndarray                 # a(t, Z=0)
    aZ0: np.ndarray                # a_Z(t, Z=0), one-sided stencil
    drift_rate: np.ndarray         # pre-projection d(int a)/dt
    probe_Z: tuple[float, ...]
    probes: np.ndarray             # samples of a at the probe heights
    reason: str                    # blowup | t_max | dt_underflow | max_steps
    states: list[TraceState] = field(default_factory=list)

    def __post_init__(self):
        if len(self.t) > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("sample times must be strictly increasing")

    @property
    def lam(self) -> np.ndarray:
        """Amplitude scale 1/a(t,0) along the run."""
        return 1.0 / self.a0

    @property
    def nu(self) -> np.ndarray:
        """Width scale -a(t,0)/a_Z(t,0) along the run."""
        return -self.a0 / self.aZ0

    def to_csv(self, path):
        cols = np.column_stack([self.t, self.max_a, self.max_c, self.mean_a, self.dt])
        with open(path, "w") as fh:
            fh.write("t,max_a,max_c,mean_a,dt\n")
            for row in cols:
                fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def _probe_indices(grid: Grid, probe_Z):
    return [int(round(z * (grid.n - 1))) for z in probe_Z]


def run_to_blowup(state0: TraceState, cfg: SolverConfig) -> Trajectory:
    """Step until max|a| reaches the blow-up cap (or another stop reason)."""
    cfg = replace(cfg)
    if cfg.blowup_cap is None:
        cfg.blowup_cap = 1e6 * max(state0.a.max_abs(), 1e-300)
    return _run(state0, cfg, t_end=None)


def run_to_time(state0: TraceState, cfg: SolverConfig, t_end: float) -> Trajectory:
    """Step until physical time t_end, landing on it exactly."""
    cfg = replace(cfg)
    if cfg.blowup_cap is None:
        cfg.blowup_cap = math.inf
    return _run(state0, cfg, t_end=t_end)


def _run(state0: TraceState, cfg: SolverConfig, t_end):
    rows = {k: [] for k in ("t", "max_a", "max_c", "mean_a", "dt", "a0", "aZ0", "drift", "probes")}
    states: list[TraceState] = []
    idx = _probe_indices(state0.grid, cfg.probe_Z)
    h = state0.grid.h

    def record(st: TraceState, dt_used: float, drift: float):
        rows["t"].append(st.t)
        rows["max_a"].append(st.a.max_abs())
        rows["max_c"].append(st.c.max_abs())
        rows["mean_a"].append(definite(st.a.values, h))
        rows["dt"].append(dt_used)
        rows["a0"].append(st.a.values[0])
        rows["aZ0"].append(d1_at_lo(st.a.values, h))
        rows["drift"].append(drift)
        rows["probes"].append([st.a.values[i] for i in idx])

    state = state0
    record(state, 0.0, 0.0)
    reason = "max_steps"
    limit = min(cfg.t_max, t_end) if t_end is not None else cfg.t_max
    for k in range(cfg.max_steps):
        if state.t >= limit:
            reason = "t_max"
            break
        if math.isfinite(limit) and limit - state.t < max(cfg.dt_floor, 1e-15 * limit):
            reason = "t_max"  # within round-off of the landing time
            break
        cap_dt = limit - state.t if math.isfinite(limit) else None
        try:
            res = step(state, cfg, dt_cap=cap_dt)
        except TimeStepUnderflow:
            reason = "dt_underflow"
            break
        if res.blowup:
            reason = "blowup"
            break
        state = res.state
        record(state, res.dt, res.mean_drift_rate)
        if cfg.store_stride and (k % cfg.store_stride == 0):
            states.append(state)
    else:
        reason = "max_steps"
    if reason == "max_steps" and state.t >= limit:
        reason = "t_max"

    probes = np.array(rows["probes"]) if rows["probes"] else np.empty((0, len(idx)))
    traj = Trajectory(
        t=np.array(rows["t"]),
        max_a=np.array(rows["max_a"]),
        max_c=np.array(rows["max_c"]),
        mean_a=np.array(rows["mean_a"]),
        dt=np.array(rows["dt"]),
        a0=np.array(rows["a0"]),
        aZ0=np.array(rows["aZ0"]),
        drift_rate=np.array(rows["drift"]),
        probe_Z=tuple(cfg.probe_Z),
        probes=probes,
        reason=reason,
        states=states,
    )
    traj.final_state = state
    return traj
