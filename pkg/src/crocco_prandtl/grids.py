"""Grid and field containers shared by the solver and the measurement layers.

The solver works on a tensor grid of the strip (x, y, t) in
[0, L] x [0, 1] x [0, T].  The regularity laboratory reuses the same
containers on boxes centred at the origin, so coordinate arrays are stored
explicitly instead of being derived from a GridSpec.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import ConfigError


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor grid for the strip problem: nodes include both endpoints."""

    nx: int
    ny: int
    nt: int
    L: float = 1.0
    T: float = 1.0

    def __post_init__(self):
        for name in ("nx", "ny", "nt"):
            n = getattr(self, name)
            if int(n) != n or n < 4:
                raise ConfigError(f"GridSpec.{name} must be an integer >= 4, got {n!r}")
        if self.L <= 0 or self.T <= 0:
            raise ConfigError("GridSpec extents L, T must be positive")

    @property
    def dx(self) -> float:
        return self.L / self.nx

    @property
    def dy(self) -> float:
        return 1.0 / self.ny

    @property
    def dt(self) -> float:
        return self.T / self.nt

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.nx + 1)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.ny + 1)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.nt + 1)

    @property
    def label(self) -> str:
        return f"{self.nx}x{self.ny}x{self.nt}"

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.nx * factor, self.ny * factor, self.nt * factor, self.L, self.T)


@dataclass(frozen=True)
class Forcing:
    """Optional volumetric source term; f None or identically zero recovers
    the unforced evolution."""

    f: Optional[Callable] = None

    def sample(self, x: np.ndarray, y: np.ndarray, t: float) -> Optional[np.ndarray]:
        if self.f is None:
            return None
        xx, yy = np.meshgrid(x, y, indexing="ij")
        vals = np.asarray(self.f(xx, yy, t), dtype=float)
        return np.broadcast_to(vals, xx.shape)


@dataclass
class FieldSnapshot:
    """Single time level of the solution on the (x, y) nodes."""

    x: np.ndarray
    y: np.ndarray
    time: float
    values: np.ndarray  # shape (nx+1, ny+1)
    eps: Optional[float] = None

    def __post_init__(self):
        if self.values.shape != (self.x.size, self.y.size):
            raise ConfigError(
                f"snapshot shape {self.values.shape} does not match nodes "
                f"({self.x.size}, {self.y.size})"
            )


@dataclass
class FieldHistory:
    """Full space-time field with explicit coordinate arrays.

    values has shape (t.size, x.size, y.size).  Arrays are marked read-only
    after construction; derived interpolators are cached lazily.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    eps: Optional[float] = None
    label: str = ""
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.ascontiguousarray(np.asarray(self.t, dtype=float))
        self.x = np.ascontiguousarray(np.asarray(self.x, dtype=float))
        self.y = np.ascontiguousarray(np.asarray(self.y, dtype=float))
        self.values = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        expected = (self.t.size, self.x.size, self.y.size)
        if self.values.shape != expected:
            raise ConfigError(f"history shape {self.values.shape}, expected {expected}")
        for arr in (self.t, self.x, self.y, self.values):
            arr.flags.writeable = False
        self._interp = None
        self._interp_dy = None

    def snapshot(self, n: int) -> FieldSnapshot:
        return FieldSnapshot(self.x, self.y, float(self.t[n]), self.values[n], self.eps)

    def _interpolator(self):
        if self._interp is None:
            self._interp = RegularGridInterpolator(
                (self.t, self.x, self.y), self.values, bounds_error=False, fill_value=None
            )
        return self._interp

    def sample(self, t, x, y) -> np.ndarray:
        """Linear interpolation at broadcastable query coordinates."""
        tq, xq, yq = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float), np.asarray(y, float))
        pts = np.stack([tq.ravel(), xq.ravel(), yq.ravel()], axis=-1)
        return self._interpolator()(pts).reshape(tq.shape)

    def sample_dy(self, t, x, y, step: float = 0.0) -> np.ndarray:
        """Wall-normal derivative, computed on the grid and then interpolated."""
        if self._interp_dy is None:
            dval = np.gradient(self.values, self.y, axis=2)
            self._interp_dy = RegularGridInterpolator(
                (self.t, self.x, self.y), dval, bounds_error=False, fill_value=None
            )
        tq, xq, yq = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float), np.asarray(y, float))
        pts = np.stack([tq.ravel(), xq.ravel(), yq.ravel()], axis=-1)
        return self._interp_dy(pts).reshape(tq.shape)


class AnalyticField:
    """Callable-backed field with the same sampling protocol as FieldHistory.

    Useful for exact control cases.  The wall-normal derivative uses the
    supplied closed form when given, otherwise a central difference with a
    caller-controlled step.
    """

    def __init__(self, f: Callable, dfdy: Optional[Callable] = None):
        self.f = f
        self.dfdy = dfdy

    def sample(self, t, x, y) -> np.ndarray:
        tq, xq, yq = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float), np.asarray(y, float))
        return np.broadcast_to(np.asarray(self.f(tq, xq, yq), float), tq.shape).copy()

    def sample_dy(self, t, x, y, step: float = 1e-4) -> np.ndarray:
        if self.dfdy is not None:
            tq, xq, yq = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float), np.asarray(y, float))
            return np.broadcast_to(np.asarray(self.dfdy(tq, xq, yq), float), tq.shape).copy()
        hi = self.sample(t, x, np.asarray(y, float) + step)
        lo = self.sample(t, x, np.asarray(y, float) - step)
        return (hi - lo) / (2.0 * step)


def trapezoid_weights(coords: np.ndarray) -> np.ndarray:
    """Composite trapezoid weights for possibly non-uniform node coordinates."""
    coords = np.asarray(coords, dtype=float)
    w = np.zeros_like(coords)
    if coords.size == 1:
        return w
    d = np.diff(coords)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def l1_space_norm(diff: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    """L1 norm over the (x, y) cross-section by trapezoid weights."""
    wx = trapezoid_weights(x)
    wy = trapezoid_weights(y)
    return float(np.einsum("i,j,ij->", wx, wy, np.abs(diff)))


def l1_spacetime_norm(diff: np.ndarray, t: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    """L1 norm over the full space-time cylinder by trapezoid weights."""
    wt = trapezoid_weights(t)
    wx = trapezoid_weights(x)
    wy = trapezoid_weights(y)
    return float(np.einsum("n,i,j,nij->", wt, wx, wy, np.abs(diff)))
