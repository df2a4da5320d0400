"""Quantitative functionals of computed histories.

Every bound the well-posedness theory asserts is measured here as a plain
number on the grid: the linear comparison envelope, total variation over
the cylinder, weighted gradient norms, the weighted second-derivative mass,
the weak-form residual against a fixed family of test functions, trace
residuals of all four boundary conditions, and the L1 stability functional
comparing two runs (in Crocco variables and in physical variables).

Quadratures: volume integrals use cell midpoints (which keeps 1/u bounded,
since u vanishes only on the y = 1 node row); staggered first differences
are the midpoint derivative samples; boundary integrals use the trace rows
directly.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .crocco import CroccoProblem
from .errors import ConfigError, NumericalError
from .grids import FieldHistory, l1_space_norm, trapezoid_weights


# ---------------------------------------------------------------------------
# report containers


@dataclass
class ReportEntry:
    key: str
    value: float
    grid: str = ""
    eps: str = ""
    domain: str = "full"


@dataclass
class EstimateReport:
    entries: List[ReportEntry] = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)

    def add(self, key, value, grid="", eps="", domain="full"):
        self.entries.append(ReportEntry(key, float(value), str(grid), str(eps), domain))

    def verdict(self, name: str, ok: bool):
        self.verdicts[name] = bool(ok)

    @property
    def all_pass(self) -> bool:
        return all(self.verdicts.values())

    def to_text(self) -> str:
        lines = [f"{e.key} = {e.value:.17g}" for e in self.entries]
        lines += [f"verdict = {'pass' if ok else 'fail'} [{name}]"
                  for name, ok in self.verdicts.items()]
        return "\n".join(lines) + "\n"

    def csv_rows(self):
        yield "key,value,grid,eps,domain"
        for e in self.entries:
            yield f"{e.key},{e.value:.17g},{e.grid},{e.eps},{e.domain}"


# ---------------------------------------------------------------------------
# pointwise comparison envelope


def comparison_constant(history: FieldHistory, margin: int = 0) -> float:
    """Smallest C with (1-y)/C <= u <= C (1-y); the y = 1 row is excluded.

    Returns inf when the field fails positivity on the included rows.
    """
    y = history.y[:-1]
    u = history.values[:, :, :-1]
    if margin:
        u = u[:, margin:-margin, margin:]
        y = y[margin:]
    if np.min(u) <= 0:
        return float("inf")
    ratio = u / (1.0 - y[None, None, :])
    return float(max(np.max(ratio), np.max(1.0 / ratio)))


# ---------------------------------------------------------------------------
# total variation and weighted norms


def _staggered_mass(diff: np.ndarray, widths: float, cross: Sequence[np.ndarray]) -> float:
    """Integrate |diff| where diff is staggered in one direction (cell width
    `widths`) and node-sampled in the others (trapezoid weights)."""
    w = np.abs(diff) * widths
    for axis, cw in enumerate(cross):
        shape = [1] * w.ndim
        shape[axis] = cw.size
        w = w * cw.reshape(shape)
    return float(np.sum(w))


def _restrict(values, t, x, y, margin):
    if margin == 0:
        return values, t, x, y
    if 2 * margin + 1 >= min(x.size, y.size):
        raise ConfigError("interior margin leaves no cells")
    return (
        values[:, margin:-margin, margin:-margin],
        t,
        x[margin:-margin],
        y[margin:-margin],
    )


def bv_seminorm(history: FieldHistory, margin: int = 0) -> float:
    """Discrete integral of |dt u| + |dx u| + |dy u| over the cylinder."""
    v, t, x, y = _restrict(history.values, history.t, history.x, history.y, margin)
    wt, wx, wy = trapezoid_weights(t), trapezoid_weights(x), trapezoid_weights(y)
    dt = np.diff(t).mean()
    dx = np.diff(x).mean()
    dy = np.diff(y).mean()
    total = _staggered_mass(np.diff(v, axis=0) / dt, dt, [np.ones(v.shape[0] - 1), wx, wy])
    total += _staggered_mass(np.diff(v, axis=1) / dx, dx, [wt, np.ones(v.shape[1] - 1), wy])
    total += _staggered_mass(np.diff(v, axis=2) / dy, dy, [wt, wx, np.ones(v.shape[2] - 1)])
    return total


def weighted_grad_norms(history: FieldHistory, alpha: float, margin: int = 0) -> tuple:
    """(1-y)^alpha weighted L1 and L2 masses of the wall-normal gradient."""
    if alpha <= -1:
        raise ConfigError("weight exponent must exceed -1 for an integrable weight")
    v, t, x, y = _restrict(history.values, history.t, history.x, history.y, margin)
    dy = np.diff(y).mean()
    yc = 0.5 * (y[1:] + y[:-1])
    wgt = (1.0 - yc) ** alpha * dy
    grad = np.diff(v, axis=2) / dy
    wt, wx = trapezoid_weights(t), trapezoid_weights(x)
    n1 = float(np.einsum("n,i,nij,j->", wt, wx, np.abs(grad), wgt))
    n2 = float(np.einsum("n,i,nij,j->", wt, wx, grad**2, wgt))
    return n1, n2


def weighted_dyy_measure(history: FieldHistory, alpha: float, margin: int = 0) -> float:
    """(1-y)^alpha weighted mass of |dyy u|, second differences at all nodes
    (shifted three-point stencils at the two walls); requires alpha > 0 so
    the weight vanishes where the profile degenerates."""
    if alpha <= 0:
        raise ConfigError("the second-derivative mass needs a positive weight exponent")
    v, t, x, y = _restrict(history.values, history.t, history.x, history.y, margin)
    dy = np.diff(y).mean()
    d2 = np.empty_like(v)
    d2[:, :, 1:-1] = (v[:, :, 2:] - 2.0 * v[:, :, 1:-1] + v[:, :, :-2]) / dy**2
    d2[:, :, 0] = (v[:, :, 0] - 2.0 * v[:, :, 1] + v[:, :, 2]) / dy**2
    d2[:, :, -1] = (v[:, :, -1] - 2.0 * v[:, :, -2] + v[:, :, -3]) / dy**2
    wt, wx, wy = trapezoid_weights(t), trapezoid_weights(x), trapezoid_weights(y)
    wgt = (1.0 - y) ** alpha * wy
    return float(np.einsum("n,i,nij,j->", wt, wx, np.abs(d2), wgt))


# ---------------------------------------------------------------------------
# weak-form residual


@dataclass(frozen=True)
class TestFunction:
    """sin(pi k x / L) (1-y)^m t exp(-t/T): vanishes at t=0 and on both
    streamwise faces, with closed-form first derivatives."""

    k: int
    m: int
    L: float
    T: float

    def __call__(self, x, y, t):
        return np.sin(np.pi * self.k * x / self.L) * (1.0 - y) ** self.m * t * np.exp(-t / self.T)

    def dt(self, x, y, t):
        return (np.sin(np.pi * self.k * x / self.L) * (1.0 - y) ** self.m
                * (1.0 - t / self.T) * np.exp(-t / self.T))

    def dx(self, x, y, t):
        return (np.pi * self.k / self.L * np.cos(np.pi * self.k * x / self.L)
                * (1.0 - y) ** self.m * t * np.exp(-t / self.T))

    def dy(self, x, y, t):
        if self.m == 0:
            return np.zeros(np.broadcast(x, y, t).shape)
        return (-self.m * np.sin(np.pi * self.k * x / self.L) * (1.0 - y) ** (self.m - 1)
                * t * np.exp(-t / self.T))

    @property
    def label(self) -> str:
        return f"k{self.k}m{self.m}"


def test_function_family(L: float, T: float) -> List[TestFunction]:
    return [TestFunction(k, m, L, T) for k in (1, 2) for m in (0, 1, 2)]


def _center8(v):
    return 0.125 * (
        v[:-1, :-1, :-1] + v[1:, :-1, :-1] + v[:-1, 1:, :-1] + v[:-1, :-1, 1:]
        + v[1:, 1:, :-1] + v[1:, :-1, 1:] + v[:-1, 1:, 1:] + v[1:, 1:, 1:]
    )


def _center4(v):
    return 0.25 * (v[:-1, :-1] + v[1:, :-1] + v[:-1, 1:] + v[1:, 1:])


def _stagger_y(v):
    # y-difference at y midcells, averaged onto (t, x) midcells
    d = v[:, :, 1:] - v[:, :, :-1]
    return 0.25 * (d[:-1, :-1] + d[1:, :-1] + d[:-1, 1:] + d[1:, 1:])


def _stagger_x(v):
    d = v[:, 1:, :] - v[:, :-1, :]
    return 0.25 * (d[:-1, :, :-1] + d[1:, :, :-1] + d[:-1, :, 1:] + d[1:, :, 1:])


def weak_residual_terms(history: FieldHistory, problem: CroccoProblem, phi: TestFunction,
                        alpha: float = 2.0, margin: int = 0) -> dict:
    """The seven integrals of the weighted weak identity, by midpoint cells.

    Their sum vanishes for exact solutions: interior pairing of 1/u with the
    weight (1-y)^alpha, the time boundary term at t = T, and the wall trace
    paid by the suction data.  Returns the individual terms and their sum.
    """
    g = problem.grid
    if margin and 2 * margin >= min(g.nx, g.ny):
        raise ConfigError("interior margin leaves no cells")
    u = history.values
    t, x, y = history.t, history.x, history.y
    dt, dx, dy = np.diff(t).mean(), np.diff(x).mean(), np.diff(y).mean()
    tc = 0.5 * (t[1:] + t[:-1])
    xc = 0.5 * (x[1:] + x[:-1])
    yc = 0.5 * (y[1:] + y[:-1])

    u_c = _center8(u)
    if np.min(u_c) <= 0.0:
        raise NumericalError("field is not positive at quadrature midpoints")
    uy_c = _stagger_y(u) / dy
    a_c = _center8(problem.a)
    b_c = _center8(problem.b)
    c_c = _center8(problem.c)
    ax_c = _stagger_x(problem.a) / dx
    by_c = _stagger_y(problem.b) / dy

    T3, X3, Y3 = np.meshgrid(tc, xc, yc, indexing="ij")
    W = (1.0 - Y3) ** alpha
    Wp = -alpha * (1.0 - Y3) ** (alpha - 1.0) if alpha != 0 else np.zeros_like(Y3)
    ph = phi(X3, Y3, T3)
    ph_t = phi.dt(X3, Y3, T3)
    ph_x = phi.dx(X3, Y3, T3)
    ph_y = phi.dy(X3, Y3, T3)

    sl = (slice(None), slice(margin, g.nx - margin), slice(margin, g.ny - margin)) if margin else (
        slice(None), slice(None), slice(None))
    cell = dt * dx * dy

    def vol(integrand):
        return float(np.sum(integrand[sl])) * cell

    inv_u = 1.0 / u_c
    term_time_vol = vol(W * ph_t * inv_u)
    term_diffusion = vol((W * ph_y + Wp * ph) * uy_c)
    term_streamwise = vol((ax_c * ph + a_c * ph_x) * W * inv_u)
    term_drift = vol((W * b_c * ph_y + (W * by_c + Wp * b_c) * ph) * inv_u)
    term_reaction = vol(W * ph * c_c * inv_u)

    # final-time surface: nodes in t, midpoints in (x, y)
    XF, YF = np.meshgrid(xc, yc, indexing="ij")
    uT = _center4(u[-1])
    phT = phi(XF, YF, t[-1])
    WT = (1.0 - YF) ** alpha
    sl2 = (slice(margin, g.nx - margin), slice(margin, g.ny - margin)) if margin else (
        slice(None), slice(None))
    term_final = -float(np.sum((WT * phT / uT)[sl2])) * dx * dy

    # wall trace: nodes in y = 0 row, midpoints in (t, x)
    TT, XT = np.meshgrid(tc, xc, indexing="ij")
    v0_c = _center4(problem.v0)
    ph_wall = phi(XT, np.zeros_like(XT), TT)
    slw = (slice(None), slice(margin, g.nx - margin)) if margin else (slice(None), slice(None))
    term_wall = float(np.sum((v0_c * ph_wall)[slw])) * dt * dx

    terms = {
        "final_time": term_final,
        "time_volume": term_time_vol,
        "diffusion": term_diffusion,
        "streamwise": term_streamwise,
        "drift": term_drift,
        "reaction": term_reaction,
        "wall_trace": term_wall,
    }
    terms["residual"] = sum(terms.values())
    return terms


def weak_residual(history: FieldHistory, problem: CroccoProblem,
                  family: Optional[List[TestFunction]] = None,
                  alpha: float = 2.0, margin: int = 0) -> float:
    """Largest absolute weak-identity residual over the test family."""
    family = family or test_function_family(problem.grid.L, problem.grid.T)
    return max(abs(weak_residual_terms(history, problem, p, alpha, margin)["residual"])
               for p in family)


# ---------------------------------------------------------------------------
# trace residuals


@dataclass
class TraceReport:
    initial_sup: float
    outflow_top_sup: float
    inflow_sup: float
    wall_sup: float
    wall_l1: float

    @property
    def worst(self) -> float:
        return max(self.initial_sup, self.outflow_top_sup, self.inflow_sup, self.wall_sup)


def trace_residual(history: FieldHistory, problem: CroccoProblem) -> TraceReport:
    """Residuals of all four trace conditions; the wall gradient uses the
    second-order one-sided stencil so its residual is not polluted by
    first-order noise."""
    u = history.values
    g = problem.grid
    dy = g.dy
    r_init = float(np.max(np.abs(u[0] - problem.w0)))
    r_top = float(np.max(np.abs(u[:, :, -1])))
    r_in = float(np.max(np.abs(u[:, 0, :] - problem.w1)))
    wall = u[:, :, 0]
    if np.min(wall) <= 0:
        raise NumericalError("wall values must stay positive for the flux trace")
    grad = (-3.0 * u[:, :, 0] + 4.0 * u[:, :, 1] - u[:, :, 2]) / (2.0 * dy)
    resid = grad - problem.v0 - problem.px_over_u / wall
    wt = trapezoid_weights(history.t)
    wx = trapezoid_weights(history.x)
    return TraceReport(
        initial_sup=r_init,
        outflow_top_sup=r_top,
        inflow_sup=r_in,
        wall_sup=float(np.max(np.abs(resid))),
        wall_l1=float(np.einsum("n,i,ni->", wt, wx, np.abs(resid))),
    )


# ---------------------------------------------------------------------------
# L1 stability in Crocco and physical variables


@dataclass
class StabilityReport:
    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    c6_hat: float
    exact_match: bool


def l1_stability(hist_a: FieldHistory, hist_b: FieldHistory,
                 prob_a: CroccoProblem, prob_b: CroccoProblem) -> StabilityReport:
    """Continuous-dependence functional: snapshot L1 distance against the
    accumulated data distance (initial + inflow + suction).

    c6_hat is the largest ratio over time levels with nonzero data distance;
    identical data sets exact_match instead.
    """
    if hist_a.values.shape != hist_b.values.shape:
        raise ConfigError("stability comparison requires matching grids")
    t, x, y = hist_a.t, hist_a.x, hist_a.y
    wt, wx, wy = trapezoid_weights(t), trapezoid_weights(x), trapezoid_weights(y)
    lhs = np.einsum("i,j,nij->n", wx, wy, np.abs(hist_a.values - hist_b.values))

    d_init = float(np.einsum("i,j,ij->", wx, wy, np.abs(prob_a.w0 - prob_b.w0)))
    d_in = np.einsum("j,nj->n", wy, np.abs(prob_a.w1 - prob_b.w1))
    d_wall = np.einsum("i,ni->n", wx, np.abs(prob_a.v0 - prob_b.v0))
    rate = d_in + d_wall
    accum = np.concatenate([[0.0], np.cumsum(0.5 * (rate[1:] + rate[:-1]) * np.diff(t))])
    rhs = d_init + accum

    exact = d_init == 0.0 and np.all(d_in == 0.0) and np.all(d_wall == 0.0)
    mask = rhs > 1e-300
    if exact or not np.any(mask):
        c6 = 0.0 if np.max(lhs, initial=0.0) <= 1e-12 else float("inf")
    else:
        c6 = float(np.max(lhs[mask] / rhs[mask]))
        if np.any(lhs[~mask] > 1e-12):
            c6 = float("inf")
    return StabilityReport(times=t.copy(), lhs=lhs, rhs=rhs, c6_hat=c6, exact_match=bool(exact))


@dataclass
class PhysicalStabilityReport:
    times: np.ndarray
    physical_lhs: np.ndarray
    crocco_lhs: np.ndarray
    identity_gap: float
    c6_hat: float


def physical_stability(hist_a: FieldHistory, hist_b: FieldHistory,
                       prob_a: CroccoProblem, prob_b: CroccoProblem) -> PhysicalStabilityReport:
    """Physical-variable form of the stability functional.

    The wall-normal integral matches profile points of equal normalized
    velocity (the second field is evaluated at the matching height), and is
    computed on the first field's reconstructed heights:

        integral |dy u_a - dy u_b(match)| (dy u_a / U^2) dy dx.

    The change of variables makes this equal the Crocco-side L1 distance;
    both values and their gap are reported.
    """
    t, x, y = hist_a.t, hist_a.x, hist_a.y
    wx = trapezoid_weights(x)
    phys = np.zeros(t.size)
    croc = np.zeros(t.size)
    wy = trapezoid_weights(y)
    for n in range(t.size):
        wa = hist_a.values[n]
        wb = hist_b.values[n]
        croc[n] = float(np.einsum("i,j,ij->", wx, wy, np.abs(wa - wb)))
        core_a = wa[:, :-1]
        if np.min(core_a) <= 0:
            raise NumericalError("physical reconstruction needs positive shear below eta=1")
        # heights by cumulative trapezoid of 1/w along eta
        inv = 1.0 / core_a
        heights = np.concatenate(
            [np.zeros((x.size, 1)),
             np.cumsum(0.5 * (inv[:, 1:] + inv[:, :-1]) * np.diff(y[:-1])[None, :], axis=1)],
            axis=1,
        )
        integrand = core_a * np.abs(core_a - wb[:, :-1])
        seg = 0.5 * (integrand[:, 1:] + integrand[:, :-1]) * np.diff(heights, axis=1)
        phys[n] = float(wx @ seg.sum(axis=1))
    base = l1_stability(hist_a, hist_b, prob_a, prob_b)
    mask = base.rhs > 1e-300
    c6 = float(np.max(phys[mask] / base.rhs[mask])) if np.any(mask) else 0.0
    gap = float(np.max(np.abs(phys - croc)))
    return PhysicalStabilityReport(times=t.copy(), physical_lhs=phys, crocco_lhs=croc,
                                   identity_gap=gap, c6_hat=c6)


# ---------------------------------------------------------------------------
# epsilon-uniformity summary


def uniformity_spread(values: Sequence[float]) -> float:
    """Relative spread (max-min)/mid of a family of functional values."""
    vals = np.asarray(list(values), dtype=float)
    if np.any(~np.isfinite(vals)):
        return float("inf")
    mid = 0.5 * (vals.max() + vals.min())
    if mid == 0:
        return 0.0 if vals.max() == vals.min() else float("inf")
    return float((vals.max() - vals.min()) / abs(mid))
