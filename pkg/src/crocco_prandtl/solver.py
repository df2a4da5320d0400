"""Semi-implicit marching scheme for the regularized degenerate problem.

The evolution solved here is

    dt u - (u + eps)^2 dyy u + (a + eps) dx u + b dy u + c u = f

on (0, L) x (0, 1) x (0, T] with u = w1 on the inflow face x = 0, u = 0 on
y = 1, u = w0 at t = 0, and the nonlinear wall flux

    (u + eps) dy u = v0 (u + eps) + dxP/U      at y = 0.

Scheme, per time step:
  * wall-normal diffusion implicit with the coefficient (u + eps)^2 frozen
    at the previous level (one tridiagonal solve per x-column),
  * streamwise transport explicit first-order backward upwind (a + eps > 0),
    inflow column prescribed, free outflow at x = L,
  * b dy u explicit with sign-dependent upwind; at the wall row the Robin
    gradient v0 + (dxP/U)/(u + eps) replaces the one-sided stencil,
  * reaction c u implicit (positivity preserved by division),
  * forcing explicit.

The wall flux is imposed through a ghost node eliminated with the
second-order centered gradient (u_1 - u_ghost) / (2 dy).  That makes the
wall row nonlinear in the wall value alone, so each column reduces to a
scalar Newton iteration on top of two tridiagonal solves (right-hand side
and influence of the wall row).
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .crocco import CroccoProblem
from .errors import ConfigError, NumericalError
from .grids import FieldHistory, FieldSnapshot, Forcing, GridSpec, l1_spacetime_norm

NEWTON_MAX_ITER = 50
NEWTON_TOL = 1e-13
CFL_SAFETY = 0.9


def cfl_margins(problem: CroccoProblem, grid: GridSpec, eps: float) -> dict:
    """Stability margins of the explicit transport terms (must stay <= 0.9)."""
    amax = float(np.max(problem.a)) + eps
    bmax = float(np.max(np.abs(problem.b)))
    return {
        "cfl_x": grid.dt * amax / grid.dx,
        "cfl_y": grid.dt * bmax / grid.dy if bmax > 0 else 0.0,
    }


def check_cfl(problem: CroccoProblem, grid: GridSpec, eps: float) -> dict:
    margins = cfl_margins(problem, grid, eps)
    worst = max(margins.values())
    if worst > CFL_SAFETY + 1e-12:
        raise ConfigError(
            f"time step violates the transport stability bound: "
            f"cfl_x={margins['cfl_x']:.3f}, cfl_y={margins['cfl_y']:.3f} "
            f"(limit {CFL_SAFETY})"
        )
    return margins


def thomas_solve(sub, diag, sup, rhs):
    """Solve tridiagonal systems stacked along trailing axes; unknowns
    along axis 0.  sub[0] and sup[-1] are ignored."""
    n = diag.shape[0]
    cp = np.empty_like(diag)
    dp = np.empty_like(rhs)
    inv = 1.0 / diag[0]
    cp[0] = sup[0] * inv
    dp[0] = rhs[0] * inv
    for j in range(1, n):
        inv = 1.0 / (diag[j] - sub[j] * cp[j - 1])
        cp[j] = sup[j] * inv
        dp[j] = (rhs[j] - sub[j] * dp[j - 1]) * inv
    for j in range(n - 2, -1, -1):
        dp[j] -= cp[j] * dp[j + 1]
    return dp


def _thomas_two_rhs(sub, diag, sup, rhs, e0):
    """Solve tridiagonal systems stacked along the last axis for two
    right-hand sides; unknowns along axis 0."""
    n = diag.shape[0]
    cp = np.empty_like(diag)
    dp = np.empty_like(rhs)
    ep = np.empty_like(e0)
    inv = 1.0 / diag[0]
    cp[0] = sup[0] * inv
    dp[0] = rhs[0] * inv
    ep[0] = e0[0] * inv
    for j in range(1, n):
        inv = 1.0 / (diag[j] - sub[j] * cp[j - 1])
        cp[j] = sup[j] * inv
        dp[j] = (rhs[j] - sub[j] * dp[j - 1]) * inv
        ep[j] = (e0[j] - sub[j] * ep[j - 1]) * inv
    p = dp
    q = ep
    for j in range(n - 2, -1, -1):
        p[j] -= cp[j] * p[j + 1]
        q[j] -= cp[j] * q[j + 1]
    return p, q


def _advance(u, n, problem, grid, eps, forcing) -> tuple:
    """One step t_n -> t_{n+1}; returns (new field, newton iteration count)."""
    dt, dx, dy = grid.dt, grid.dx, grid.dy
    ny = grid.ny
    a_n = problem.a[n]
    b_n = problem.b[n]
    c_n1 = problem.c[n + 1]
    v0_n = problem.v0[n]
    g_n = problem.px_over_u[n]
    v0_n1 = problem.v0[n + 1]
    g_n1 = problem.px_over_u[n + 1]

    rhs = u.copy()
    rhs[1:, :] -= dt * (a_n[1:, :] + eps) * (u[1:, :] - u[:-1, :]) / dx

    dyu = np.zeros_like(u)
    bwd = np.zeros_like(u)
    fwd = np.zeros_like(u)
    bwd[:, 1:] = (u[:, 1:] - u[:, :-1]) / dy
    fwd[:, :-1] = (u[:, 1:] - u[:, :-1]) / dy
    pos = b_n > 0
    dyu[pos] = bwd[pos]
    dyu[~pos] = fwd[~pos]
    # wall row: one-sided stencils have no upwind cell below y=0, so use the
    # Robin gradient the boundary condition itself asserts there
    dyu[:, 0] = v0_n + g_n / (u[:, 0] + eps)
    rhs -= dt * b_n * dyu

    fvals = forcing.sample(grid.x, grid.y, float(grid.t[n])) if forcing is not None else None
    if fvals is not None:
        rhs = rhs + dt * fvals

    # implicit solve per interior column (the inflow column is prescribed)
    cols = slice(1, None)
    D = (u[cols, :ny] + eps) ** 2
    r = dt * D / dy**2                       # (ncol, ny)
    diag = 1.0 + 2.0 * r + dt * c_n1[cols, :ny]
    if np.any(diag <= 0.1):
        raise NumericalError("implicit reaction made the wall-normal system lose dominance")
    sub = np.zeros_like(r)
    sup = np.zeros_like(r)
    sub[:, 1:] = -r[:, 1:]
    sup[:, :-1] = -r[:, :-1]
    sup[:, 0] = -2.0 * r[:, 0]

    b_rhs = rhs[cols, :ny].copy()
    b_rhs[:, 0] -= 2.0 * dy * r[:, 0] * v0_n1[cols]
    e0 = np.zeros_like(b_rhs)
    e0[:, 0] = 1.0

    # unknowns along y: transpose so the Thomas sweep runs down the column
    p, q = _thomas_two_rhs(sub.T, diag.T, sup.T, b_rhs.T, e0.T)
    p = p.T
    q = q.T

    g = g_n1[cols]
    coef = 2.0 * dy * r[:, 0]
    s = u[cols, 0].copy()
    iters = 0
    if np.any(g != 0.0):
        p0 = p[:, 0]
        q0 = q[:, 0]
        for iters in range(1, NEWTON_MAX_ITER + 1):
            lam = coef * g / (s + eps)
            F = p0 - lam * q0 - s
            dlam = -coef * g / (s + eps) ** 2
            dF = -dlam * q0 - 1.0
            step = F / dF
            s = s - step
            if np.max(np.abs(F)) <= NEWTON_TOL * (1.0 + np.max(np.abs(s))):
                break
        else:
            bad = int(np.argmax(np.abs(p0 - coef * g / (s + eps) * q0 - s)))
            raise NumericalError(
                f"wall Newton iteration failed to converge in column x={grid.x[1 + bad]:.6g}"
            )
        lam = coef * g / (s + eps)
        sol = p - lam[:, None] * q
    else:
        sol = p

    u_new = np.empty_like(u)
    u_new[0, :] = problem.w1[n + 1]
    u_new[1:, :ny] = sol
    u_new[:, ny] = 0.0

    if not np.all(np.isfinite(u_new)):
        raise NumericalError(f"non-finite field after step to t={grid.t[n + 1]:.6g}")
    umin = float(np.min(u_new))
    if umin < -1e-12:
        k = int(np.argmin(u_new))
        i, j = np.unravel_index(k, u_new.shape)
        raise NumericalError(
            f"positivity lost at t={grid.t[n + 1]:.6g}, x={grid.x[i]:.6g}, "
            f"y={grid.y[j]:.6g}: u={umin:.3e}"
        )
    return u_new, iters


def step(state: FieldSnapshot, problem: CroccoProblem, grid: GridSpec, eps: float,
         forcing: Optional[Forcing] = None) -> FieldSnapshot:
    """Advance a single snapshot by one grid time step."""
    n = int(round(state.time / grid.dt))
    if abs(state.time - grid.t[n]) > 1e-10 * max(1.0, grid.T):
        raise ConfigError(f"snapshot time {state.time} is not a grid time level")
    if n >= grid.nt:
        raise ConfigError("snapshot already at the final time level")
    u_new, _ = _advance(np.asarray(state.values, float), n, problem, grid, eps, forcing)
    return FieldSnapshot(grid.x, grid.y, float(grid.t[n + 1]), u_new, eps)


def solve(problem: CroccoProblem, grid: GridSpec, eps: float,
          forcing: Optional[Forcing] = None, label: str = "") -> FieldHistory:
    """March the full history from the initial data; CFL is enforced before
    any stepping."""
    if eps <= 0:
        raise ConfigError(f"regularization eps must be positive, got {eps}")
    margins = check_cfl(problem, grid, eps)
    nt = grid.nt
    values = np.empty((nt + 1, grid.nx + 1, grid.ny + 1))
    u = np.array(problem.w0, dtype=float)
    u[0, :] = problem.w1[0]
    u[:, -1] = 0.0
    values[0] = u
    newton_iters = np.zeros(nt, dtype=int)
    for n in range(nt):
        u, it = _advance(u, n, problem, grid, eps, forcing)
        newton_iters[n] = it
        values[n + 1] = u
    return FieldHistory(
        t=grid.t,
        x=grid.x,
        y=grid.y,
        values=values,
        eps=eps,
        label=label or problem.label,
        diagnostics={
            "newton_iterations_max": int(newton_iters.max(initial=0)),
            "newton_iterations": newton_iters,
            "cfl_x": margins["cfl_x"],
            "cfl_y": margins["cfl_y"],
        },
    )


@dataclass
class SweepRow:
    eps_hi: float
    eps_lo: float
    l1_diff: float
    ok: bool


@dataclass
class ConvergenceTable:
    rows: List[SweepRow]

    @property
    def diffs(self) -> np.ndarray:
        return np.array([r.l1_diff for r in self.rows])

    @property
    def strictly_decreasing(self) -> bool:
        d = self.diffs
        finite = np.isfinite(d)
        if not np.all(finite) or d.size < 2:
            return False
        return bool(np.all(np.diff(d) < 0))


def viscosity_sweep(problem: CroccoProblem, grid: GridSpec, eps_list,
                    forcing: Optional[Forcing] = None) -> ConvergenceTable:
    """Solve a decreasing sequence of regularizations and tabulate successive
    L1 differences over the space-time cylinder.

    A failed solve marks its rows and the sweep continues.
    """
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 2:
        raise ConfigError("viscosity sweep needs at least two eps values")
    if np.any(np.diff(eps_list) >= 0):
        raise ConfigError("eps_list must be strictly decreasing")
    histories = []
    for e in eps_list:
        try:
            histories.append(solve(problem, grid, e))
        except NumericalError:
            histories.append(None)
    rows = []
    for hi, lo, h_hi, h_lo in zip(eps_list, eps_list[1:], histories, histories[1:]):
        if h_hi is None or h_lo is None:
            rows.append(SweepRow(hi, lo, float("nan"), False))
        else:
            d = l1_spacetime_norm(h_hi.values - h_lo.values, grid.t, grid.x, grid.y)
            rows.append(SweepRow(hi, lo, d, True))
    return ConvergenceTable(rows=rows)


def grid_refinement_proxy(problem_builder, grid: GridSpec, eps: float, factor: int = 2) -> float:
    """Discretization-error proxy: L1 gap between a run and its refined-grid
    restriction, both at the same eps.

    problem_builder(grid) must return the problem sampled on the given grid.
    """
    coarse = solve(problem_builder(grid), grid, eps)
    fine_grid = grid.refined(factor)
    fine = solve(problem_builder(fine_grid), fine_grid, eps)
    restricted = fine.values[::factor, ::factor, ::factor]
    return l1_spacetime_norm(coarse.values - restricted, grid.t, grid.x, grid.y)
