"""Outer tangential flow U(x, t) and the induced pressure gradient.

The flow enters the interior problem only through U and its first
derivatives; the pressure gradient is eliminated with the Bernoulli relation

    dxP = -(dtU + U dxU).

A flow is "favorable" when dxP <= 0 everywhere on the sampled domain.
Flows are either named built-ins with closed-form derivatives or bilinear
interpolants of a sampled table with second-order difference derivatives.
"""

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import ConfigError, DataError


@dataclass(frozen=True)
class ExternalFlow:
    """Tangential outer flow on [0, L] x [0, T] with first derivatives."""

    U: Callable
    dxU: Callable
    dtU: Callable
    L: float = 1.0
    T: float = 1.0
    name: str = "custom"

    def sample_lattice(self, nx: int = 33, nt: int = 33):
        x = np.linspace(0.0, self.L, nx)
        t = np.linspace(0.0, self.T, nt)
        xx, tt = np.meshgrid(x, t, indexing="ij")
        return xx, tt


@dataclass(frozen=True)
class PressureGradient:
    """Bernoulli pressure gradient with a favorability flag.

    favorable is decided on a sample lattice; it is a property of the flow,
    not of the lattice density (verified by the test-suite on nested
    lattices).
    """

    dxP: Callable
    favorable: bool
    worst_value: float
    worst_location: tuple


def _as_field(fn: Callable) -> Callable:
    def wrapped(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        out = np.asarray(fn(x, t), dtype=float)
        return np.broadcast_to(out, np.broadcast(x, t).shape)

    return wrapped


def uniform_flow(L: float = 1.0, T: float = 1.0) -> ExternalFlow:
    """U identically 1; the pressure gradient vanishes."""
    return ExternalFlow(
        U=_as_field(lambda x, t: np.ones_like(x * t)),
        dxU=_as_field(lambda x, t: np.zeros_like(x * t)),
        dtU=_as_field(lambda x, t: np.zeros_like(x * t)),
        L=L,
        T=T,
        name="uniform",
    )


def accelerating_flow(L: float = 1.0, T: float = 1.0) -> ExternalFlow:
    """U = 1 + t; favorable since dxP = -1."""
    return ExternalFlow(
        U=_as_field(lambda x, t: 1.0 + t + 0.0 * x),
        dxU=_as_field(lambda x, t: np.zeros_like(x * t)),
        dtU=_as_field(lambda x, t: np.ones_like(x * t)),
        L=L,
        T=T,
        name="accelerating",
    )


def decelerating_flow(L: float = 1.0, T: float = 1.0) -> ExternalFlow:
    """U = 1 - x/4; adverse, dxP = (1 - x/4)/4 > 0."""
    return ExternalFlow(
        U=_as_field(lambda x, t: 1.0 - x / 4.0 + 0.0 * t),
        dxU=_as_field(lambda x, t: -0.25 * np.ones_like(x * t)),
        dtU=_as_field(lambda x, t: np.zeros_like(x * t)),
        L=L,
        T=T,
        name="decelerating",
    )


def load_flow_table(path) -> ExternalFlow:
    """Read a `x,t,U` table (last column of the key pair varying fastest)."""
    xs, ts, U = _read_table(path, ("x", "t", "U"))
    return flow_from_table(xs, ts, U)


def flow_from_table(x: np.ndarray, t: np.ndarray, U: np.ndarray) -> ExternalFlow:
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    U = np.asarray(U, dtype=float)
    if U.shape != (x.size, t.size):
        raise DataError(f"flow table shape {U.shape} does not match ({x.size}, {t.size})")
    if x.size < 3 or t.size < 3:
        raise DataError("flow table needs at least 3 samples per coordinate")
    dxU = np.gradient(U, x, axis=0)
    dtU = np.gradient(U, t, axis=1)

    def interp(table):
        f = RegularGridInterpolator((x, t), table, bounds_error=False, fill_value=None)

        def call(xq, tq):
            xq = np.asarray(xq, dtype=float)
            tq = np.asarray(tq, dtype=float)
            xb, tb = np.broadcast_arrays(xq, tq)
            pts = np.stack([xb.ravel(), tb.ravel()], axis=-1)
            return f(pts).reshape(xb.shape)

        return call

    return ExternalFlow(
        U=interp(U),
        dxU=interp(dxU),
        dtU=interp(dtU),
        L=float(x[-1]),
        T=float(t[-1]),
        name="custom-table",
    )


BUILTIN_FLOWS = {
    "uniform": uniform_flow,
    "accelerating": accelerating_flow,
    "decelerating": decelerating_flow,
}


def make_flow(name: str, L: float = 1.0, T: float = 1.0, table_path=None) -> ExternalFlow:
    if name == "custom-table":
        if table_path is None:
            raise ConfigError("flow 'custom-table' requires a flow_table path")
        return load_flow_table(table_path)
    try:
        builder = BUILTIN_FLOWS[name]
    except KeyError:
        raise ConfigError(f"unknown flow {name!r}; choose from "
                          f"{sorted(BUILTIN_FLOWS) + ['custom-table']}") from None
    return builder(L=L, T=T)


def pressure_gradient(flow: ExternalFlow, nx: int = 65, nt: int = 65) -> PressureGradient:
    """Build dxP = -(dtU + U dxU) and classify favorability on a lattice.

    A non-positive U sample is a data error; the offending (x, t) is named.
    """
    xx, tt = flow.sample_lattice(nx, nt)
    Uv = flow.U(xx, tt)
    if np.any(Uv <= 0.0):
        i, j = np.unravel_index(int(np.argmin(Uv)), Uv.shape)
        raise DataError(
            f"flow U must be positive; U={Uv[i, j]:.6g} at (x={xx[i, j]:.6g}, t={tt[i, j]:.6g})"
        )

    def dxP(x, t):
        return -(flow.dtU(x, t) + flow.U(x, t) * flow.dxU(x, t))

    vals = dxP(xx, tt)
    k = int(np.argmax(vals))
    i, j = np.unravel_index(k, vals.shape)
    worst = float(vals[i, j])
    return PressureGradient(
        dxP=dxP,
        favorable=bool(worst <= 1e-12),
        worst_value=worst,
        worst_location=(float(xx[i, j]), float(tt[i, j])),
    )


def _read_table(path, columns):
    """Parse a comma-separated table with the given header columns.

    Rows are expected row-major with the last key column varying fastest;
    the grid is nevertheless reconstructed from the unique sorted key
    values, so any complete ordering is accepted.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise DataError(f"{path}: empty table")
    header = [c.strip() for c in rows[0]]
    if header != list(columns):
        raise DataError(f"{path}: expected header {','.join(columns)}, got {','.join(header)}")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric entry ({exc})") from None
    if data.ndim != 2 or data.shape[1] != 3:
        raise DataError(f"{path}: expected 3 columns per row")
    avals = np.unique(data[:, 0])
    bvals = np.unique(data[:, 1])
    if avals.size * bvals.size != data.shape[0]:
        raise DataError(f"{path}: table is not a complete {avals.size}x{bvals.size} grid")
    grid = np.full((avals.size, bvals.size), np.nan)
    ia = np.searchsorted(avals, data[:, 0])
    ib = np.searchsorted(bvals, data[:, 1])
    grid[ia, ib] = data[:, 2]
    if np.any(np.isnan(grid)):
        raise DataError(f"{path}: duplicate or missing grid entries")
    return avals, bvals, grid
