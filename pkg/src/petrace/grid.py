"""Uniform 1-D grids, sampled fields, and their calculus.

Everything else in the package is built on the four operations here:
cumulative antiderivative, finite-difference derivatives, definite
integrals, and cubic resampling between grids.  All operations are
deterministic: identical inputs produce bit-identical outputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = ["Grid", "Field", "antiderivative", "derivative", "integral", "resample"]


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [lo, hi] with n nodes (n >= 8)."""

    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if self.n < 8:
            raise ValueError(f"grid needs at least 8 nodes, got {self.n}")
        if not self.hi > self.lo:
            raise ValueError(f"grid endpoints out of order: [{self.lo}, {self.hi}]")

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.linspace(self.lo, self.hi, self.n)
        x.flags.writeable = False
        return x


@dataclass(frozen=True)
class Field:
    """Real function sampled on a grid.  Value semantics: the sample array is copied and frozen."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite samples")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "Field":
        return cls(grid, fn(grid.nodes))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


# ---------------------------------------------------------------------------
# raw-array kernels (shared by the solvers, which avoid Field wrapping in
# inner loops)
# ---------------------------------------------------------------------------

def cumulative(v: np.ndarray, h: float) -> np.ndarray:
    """Antiderivative samples with g[0] = 0.

    Composite Simpson on node pairs gives the even nodes; odd nodes use the
    local half-cell rule h*(5 f_i + 8 f_{i+1} - f_{i+2})/12.  If the node
    count is even the final cell falls back to the trapezoid rule, so the
    last entry always equals the composite-Simpson/trapezoid definite
    integral.
    """
    n = v.shape[0]
    g = np.empty(n)
    g[0] = 0.0
    m = (n - 1) // 2
    if m > 0:
        pair = (h / 3.0) * (v[0:2 * m - 1:2] + 4.0 * v[1:2 * m:2] + v[2:2 * m + 1:2])
        g[2:2 * m + 1:2] = np.cumsum(pair)
        g[1:2 * m:2] = g[0:2 * m - 1:2] + (h / 12.0) * (
            5.0 * v[0:2 * m - 1:2] + 8.0 * v[1:2 * m:2] - v[2:2 * m + 1:2]
        )
    if n % 2 == 0:
        g[-1] = g[-2] + 0.5 * h * (v[-2] + v[-1])
    return g


def definite(v: np.ndarray, h: float) -> float:
    """Definite integral: bit-identical to the last entry of ``cumulative``."""
    return float(cumulative(v, h)[-1])


def d1(v: np.ndarray, h: float) -> np.ndarray:
    """First derivative, 4th order: 5-point central interior, one-sided at the edges."""
    out = np.empty_like(v)
    c = 1.0 / (12.0 * h)
    out[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) * c
    out[0] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) * c
    out[1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) * c
    out[-2] = -(-3.0 * v[-1] - 10.0 * v[-2] + 18.0 * v[-3] - 6.0 * v[-4] + v[-5]) * c
    out[-1] = -(-25.0 * v[-1] + 48.0 * v[-2] - 36.0 * v[-3] + 16.0 * v[-4] - 3.0 * v[-5]) * c
    return out


def d1_at_lo(v: np.ndarray, h: float) -> float:
    """4th-order one-sided first derivative at the left endpoint.

    This single stencil defines "the slope at zero" everywhere in the
    package (decomposition, orthogonality checks), so the different modules
    agree to round-off about what vanishes.
    """
    return float(
        (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h)
    )


def d1_upwind(v: np.ndarray, h: float, speed: np.ndarray) -> np.ndarray:
    """First-order upwind derivative for transport with the given speed field."""
    back = np.empty_like(v)
    fwd = np.empty_like(v)
    back[1:] = (v[1:] - v[:-1]) / h
    back[0] = (v[1] - v[0]) / h
    fwd[:-1] = (v[1:] - v[:-1]) / h
    fwd[-1] = (v[-1] - v[-2]) / h
    return np.where(speed >= 0.0, back, fwd)


def d2(v: np.ndarray, h: float) -> np.ndarray:
    """Second derivative: 3-point central interior, 4-point one-sided at the endpoints."""
    out = np.empty_like(v)
    h2 = h * h
    out[1:-1] = (v[:-2] - 2.0 * v[1:-1] + v[2:]) / h2
    out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2
    out[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / h2
    return out


# ---------------------------------------------------------------------------
# Field-level operations
# ---------------------------------------------------------------------------

def antiderivative(f: Field) -> Field:
    """Running integral from the left endpoint; exact zero at lo."""
    return Field(f.grid, cumulative(f.values, f.grid.h))


def derivative(f: Field, order: int = 1) -> Field:
    if order == 1:
        return Field(f.grid, d1(f.values, f.grid.h))
    if order == 2:
        return Field(f.grid, d2(f.values, f.grid.h))
    raise ValueError(f"order must be 1 or 2, got {order}")


def integral(f: Field) -> float:
    return definite(f.values, f.grid.h)


def resample(f: Field, g: Grid) -> tuple[Field, int]:
    """Sample f on a new grid.

    Cubic interpolation inside f's extent; beyond it the boundary value is
    held constant and each such node is counted in the returned warning
    count.
    """
    if g == f.grid:
        return Field(g, f.values), 0
    x = g.nodes
    below = x < f.grid.lo
    above = x > f.grid.hi
    spl = CubicSpline(f.grid.nodes, f.values)
    vals = spl(np.clip(x, f.grid.lo, f.grid.hi))
    if below.any():
        vals[below] = f.values[0]
    if above.any():
        vals[above] = f.values[-1]
    warnings = int(np.count_nonzero(below) + np.count_nonzero(above))
    return Field(g, vals), warnings
