"""Acceptance checklist.

Twelve numbered criteria, each measuring a pinned quantitative surrogate
at desk scale.  Solves and model runs are memoized in a shared cache so
criteria can reuse each other's fields; the determinism criterion
deliberately bypasses the cache and reruns the full artifact bundle from
scratch.
"""

import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import kolmogorov as ko
from . import mms
from ._version import __version__
from .config import RunConfig
from .errors import ConfigError, CroccoError
from .estimates import (bv_seminorm, comparison_constant, l1_stability,
                        trace_residual, uniformity_spread, weak_residual,
                        weighted_dyy_measure, weighted_grad_norms)
from .grids import AnalyticField, GridSpec, l1_spacetime_norm
from .scenarios import (ACCEL_T, EXACT_T, exact_profile_problem,
                        favorable_accel_problem, perturbed_problems,
                        pinched_initial)
from .solver import solve, viscosity_sweep

EPS_FAMILY = (1e-1, 1e-2, 1e-3, 1e-4)
SWEEP_LIST = (0.1, 0.03, 0.01, 0.003, 0.001)
MODEL_GRID = (48, 192, 300)
MODEL_GRID_FINE = (96, 384, 600)
ROUGH_COEFS = (("checkerboard", 2.0, 0), ("seeded-random", 2.0, 0), ("seeded-random", 4.0, 1))
THETA_DEFAULT = 0.01


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"criterion {self.number:2d} [{tag}] {self.name}: "
                f"{self.detail} ({self.seconds:.1f} s)")


@dataclass
class AcceptanceReport:
    results: List[CriterionResult]

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.results)

    def summary(self) -> str:
        lines = [r.line() for r in self.results]
        lines.append(f"acceptance = {'PASSED' if self.all_pass else 'FAILED'}")
        return "\n".join(lines)


def artifact_bundle():
    """One RunConfig per scenario at its shipped desk-scale settings."""
    return (
        RunConfig(scenario="exact_profile"),
        RunConfig(scenario="favorable_accel"),
        RunConfig(scenario="viscosity_sweep"),
        RunConfig(scenario="stability_perturb"),
        RunConfig(scenario="kolmogorov_checks"),
        RunConfig(scenario="oscillation_lab", nx=48, ny=192, nt=300),
    )


class AcceptanceEngine:
    """Runs the numbered criteria against a shared cache of solves."""

    def __init__(self):
        self._cache = {}

    def _get(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    # cached constructions ---------------------------------------------------
    def exact_problem(self, n: int):
        def build():
            grid = GridSpec(n, n, n, L=1.0, T=EXACT_T)
            return exact_profile_problem(grid)
        return self._get(("exact_problem", n), build)

    def exact_run(self, n: int, eps: float):
        problem = self.exact_problem(n)
        return self._get(("exact_run", n, eps),
                         lambda: solve(problem, problem.grid, eps))

    def favorable_problem(self, n: int):
        def build():
            grid = GridSpec(n, n, n, L=1.0, T=ACCEL_T)
            return favorable_accel_problem(grid)
        return self._get(("favorable_problem", n), build)

    def favorable_run(self, n: int, eps: float):
        problem = self.favorable_problem(n)
        return self._get(("favorable_run", n, eps),
                         lambda: solve(problem, problem.grid, eps))

    def perturbed(self, n: int):
        problem = self.favorable_problem(n)
        return self._get(("perturbed", n),
                         lambda: perturbed_problems(problem.grid, 1e-3))

    def perturbed_run(self, n: int, eps: float, family: str):
        prob = self.perturbed(n)[family]
        return self._get(("perturbed_run", n, eps, family),
                         lambda: solve(prob, prob.grid, eps))

    def model_run(self, kind: str, lam: float, seed: int, grid=MODEL_GRID,
                  pinched: bool = False):
        def build():
            coef = ko.model_scenarios(kind, lam=lam, seed=seed)
            u0 = pinched_initial if pinched else None
            nx, ny, nt = grid
            return ko.solve_model(coef, nx=nx, ny=ny, nt=nt, u0=u0)
        return self._get(("model_run", kind, lam, seed, grid, pinched), build)

    # criteria ---------------------------------------------------------------
    def criterion_1(self) -> CriterionResult:
        grid = self.exact_problem(64).grid
        exact = 1.0 - grid.y[None, None, :]
        worst_err = 0.0
        worst_time = 0.0
        for eps in EPS_FAMILY:
            t0 = time.perf_counter()
            hist = solve(self.exact_problem(64), grid, eps)
            worst_time = max(worst_time, time.perf_counter() - t0)
            self._cache[("exact_run", 64, eps)] = hist
            worst_err = max(worst_err, float(np.max(np.abs(hist.values - exact))))
        passed = worst_err <= 1e-8 and worst_time < 10.0
        return CriterionResult(
            1, "exact stationary reproduction", passed,
            f"max error {worst_err:.3e} (tol 1e-08), slowest solve {worst_time:.2f} s (limit 10 s)")

    def criterion_2(self) -> CriterionResult:
        orders = {d: mms.refinement_study(d).order for d in ("x", "y", "t")}
        passed = orders["x"] >= 0.9 and orders["t"] >= 0.9 and orders["y"] >= 1.9
        return CriterionResult(
            2, "manufactured-solution convergence", passed,
            f"orders x {orders['x']:.2f} (>=0.9), y {orders['y']:.2f} (>=1.9), "
            f"t {orders['t']:.2f} (>=0.9)")

    def criterion_3(self) -> CriterionResult:
        series = {}
        for eps in EPS_FAMILY:
            hist = self.favorable_run(64, eps)
            vals = {
                "comparison": comparison_constant(hist),
                "bv": bv_seminorm(hist),
                "dyy_a1": weighted_dyy_measure(hist, 1.0),
            }
            for alpha in (0, 1, 2):
                l1, l2 = weighted_grad_norms(hist, alpha)
                vals[f"grad_l1_a{alpha}"] = l1
                vals[f"grad_l2_a{alpha}"] = l2
            for k, v in vals.items():
                series.setdefault(k, []).append(v)
        spreads = {k: uniformity_spread(v) for k, v in series.items()}
        worst = max(spreads, key=spreads.get)
        passed = all(s < 0.10 for s in spreads.values())
        return CriterionResult(
            3, "eps-uniform functional bounds", passed,
            f"worst spread {spreads[worst]:.3f} ({worst}) across eps {EPS_FAMILY} (tol 0.10)")

    def criterion_4(self) -> CriterionResult:
        problem = self.favorable_problem(64)
        table = viscosity_sweep(problem, problem.grid, SWEEP_LIST)
        coarse = self.favorable_run(64, SWEEP_LIST[-1])
        fine = self.favorable_run(128, SWEEP_LIST[-1])
        restricted = fine.values[::2, ::2, ::2]
        grid = problem.grid
        proxy = l1_spacetime_norm(coarse.values - restricted, grid.t, grid.x, grid.y)
        final = table.rows[-1].l1_diff
        passed = table.strictly_decreasing and final < 10.0 * proxy
        return CriterionResult(
            4, "vanishing-viscosity Cauchy property", passed,
            f"diffs {['%.2e' % r.l1_diff for r in table.rows]} strictly decreasing: "
            f"{table.strictly_decreasing}; final {final:.2e} < 10 x proxy {proxy:.2e}")

    def criterion_5(self) -> CriterionResult:
        h64 = self.exact_run(64, 1e-3)
        h128 = self.exact_run(128, 1e-3)
        res64 = weak_residual(h64, self.exact_problem(64))
        res128 = weak_residual(h128, self.exact_problem(128))
        wall = trace_residual(h64, self.exact_problem(64)).wall_sup
        ratio = res64 / res128 if res128 > 0 else float("inf")
        passed = res64 <= 1e-2 and ratio >= 1.8 and wall <= 1e-6
        return CriterionResult(
            5, "weak-solution identity", passed,
            f"residual {res64:.3e} (tol 1e-02), refinement ratio {ratio:.2f} (>=1.8), "
            f"wall trace {wall:.3e} (tol 1e-06)")

    def criterion_6(self) -> CriterionResult:
        combos = [(n, eps) for n in (64, 128) for eps in (1e-2, 1e-3)]
        c6 = {}
        for family in ("initial", "inflow", "suction"):
            vals = []
            for n, eps in combos:
                base = self.favorable_run(n, eps)
                pert = self.perturbed_run(n, eps, family)
                stab = l1_stability(base, pert, self.favorable_problem(n),
                                    self.perturbed(n)[family])
                vals.append(stab.c6_hat)
            c6[family] = vals
        spreads = {f: uniformity_spread(v) for f, v in c6.items()}

        problem = self.favorable_problem(64)
        rerun_a = solve(problem, problem.grid, 1e-3)
        rerun_b = solve(problem, problem.grid, 1e-3)
        ident = l1_stability(rerun_a, rerun_b, problem, problem)
        ident_max = float(np.max(ident.lhs))

        finite = all(np.isfinite(v) for vals in c6.values() for v in vals)
        passed = (finite and all(s < 0.20 for s in spreads.values())
                  and ident_max <= 1e-12)
        worst = max(spreads, key=spreads.get)
        return CriterionResult(
            6, "L1 continuous dependence", passed,
            f"c6 per family {({f: '%.3f' % max(v) for f, v in c6.items()})}, worst spread "
            f"{spreads[worst]:.3f} ({worst}, tol 0.20), identical-data lhs {ident_max:.2e} (tol 1e-12)")

    def criterion_7(self) -> CriterionResult:
        mass = max(abs(ko.normalization(s) - 1.0) for s in (0.1, 1.0))
        rng = np.random.default_rng(7)
        dil = max(
            ko.dilation_defect(
                (rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.2, 1.5)),
                rng.uniform(0.5, 2.0))
            for _ in range(100))
        r1 = abs(ko.l0_residual((0.1, 0.2, 1.0), h=1e-3))
        r2 = abs(ko.l0_residual((0.1, 0.2, 1.0), h=5e-4))
        order = float(np.log2(r1 / r2))
        passed = mass <= 1e-8 and dil <= 1e-12 and order >= 1.9
        return CriterionResult(
            7, "fundamental-solution identities", passed,
            f"mass defect {mass:.2e} (tol 1e-08), dilation defect {dil:.2e} (tol 1e-12), "
            f"residual order {order:.2f} (>=1.9)")

    def criterion_8(self) -> CriterionResult:
        report = ko.verify_lemma(ko.CutoffSpec(r=1.0, theta=THETA_DEFAULT), n=33)
        margins = ", ".join(f"{c.name} {c.margin:.3g}" for c in report.checks)
        return CriterionResult(
            8, "cutoff certification", report.ok,
            f"33^3 lattice at theta {THETA_DEFAULT:g}: {margins}")

    def criterion_9(self) -> CriterionResult:
        unit = ko.density_ratio(AnalyticField(
            lambda t, x, y: np.ones_like(np.asarray(t, float))), r=0.5, h=0.01)
        details = [f"unit field {unit.ratio:.3f}"]
        ok = unit.ratio == 1.0
        for kind, lam, seed in ROUGH_COEFS:
            hist = self.model_run(kind, lam, seed)
            den = ko.density_ratio(hist, r=0.5, h=0.01, normalize=True)
            run_ok = (den.verdict is True and
                      all(v >= ko.DENSITY_FLOOR for v in den.h_certificate.values()))
            ok = ok and run_ok
            details.append(f"{kind}-{lam:g}-{seed} min ratio "
                           f"{min(den.h_certificate.values()):.3f}")
        return CriterionResult(
            9, "density estimate", ok,
            "; ".join(details) + f" (floor {ko.DENSITY_FLOOR:.4f} for h <= 0.01)")

    def criterion_10(self) -> CriterionResult:
        spec = ko.CutoffSpec(r=0.8 * THETA_DEFAULT, theta=THETA_DEFAULT)

        def family_constant(grid):
            ratios = []
            violations = 0
            for kind, lam, seed in ROUGH_COEFS:
                hist = self.model_run(kind, lam, seed, grid=grid, pinched=True)
                V = ko.log_field(hist, h=0.01, variant="reciprocal")
                rep = ko.weak_poincare_ratio(V, spec)
                ratios.append(rep.ratio)
                violations += int(rep.hard_violation)
            return max(ratios), violations

        c_base, viol_base = family_constant(MODEL_GRID)
        c_fine, viol_fine = family_constant(MODEL_GRID_FINE)
        both_tiny = c_base <= 1e-6 and c_fine <= 1e-6
        stable = both_tiny or abs(c_base - c_fine) <= 0.25 * max(c_base, c_fine)
        passed = stable and viol_base == 0 and viol_fine == 0
        return CriterionResult(
            10, "weak Poincare functional", passed,
            f"C {c_base:.3e} -> refined {c_fine:.3e} "
            f"({'both negligible' if both_tiny else 'within 25%'}), hard violations "
            f"{viol_base + viol_fine}")

    def criterion_11(self) -> CriterionResult:
        beta = 0.0
        alphas = []
        for kind in ("checkerboard", "seeded-random"):
            for lam in (2.0, 4.0):
                hist = self.model_run(kind, lam, 0)
                osc = ko.oscillation_table(hist, domain=(1.0, 1.0, float(hist.t[0])))
                beta = max(beta, osc.beta_bar)
                alphas.append(osc.alpha_holder)
        control = ko.oscillation_table(AnalyticField(
            lambda t, x, y: 1.0 - np.asarray(y, float)))
        ctl_err = max(abs(row.ratio - 0.3) for row in control.rows)
        passed = beta < 1.0 and all(a > 0 for a in alphas) and ctl_err <= 1e-9
        return CriterionResult(
            11, "oscillation decay", passed,
            f"beta_bar {beta:.3f} (<1), Holder exponents "
            f"{['%.2f' % a for a in alphas]} (>0), linear control defect {ctl_err:.1e}")

    def criterion_12(self) -> CriterionResult:
        from .reporting import write_artifacts
        from .scenarios import run_scenario

        def produce(root: Path):
            files = []
            for cfg in artifact_bundle():
                out = root / cfg.scenario
                result = run_scenario(cfg)
                files.extend(write_artifacts(result, out))
            return sorted(p.relative_to(root) for p in files)

        with tempfile.TemporaryDirectory() as tmp_a, tempfile.TemporaryDirectory() as tmp_b:
            ra, rb = Path(tmp_a), Path(tmp_b)
            files_a = produce(ra)
            files_b = produce(rb)
            if files_a != files_b:
                return CriterionResult(12, "determinism", False,
                                       "artifact sets differ between invocations")
            mismatched = [str(rel) for rel in files_a
                          if (ra / rel).read_bytes() != (rb / rel).read_bytes()]
        passed = not mismatched
        detail = (f"{len(files_a)} artifacts byte-identical across two invocations"
                  if passed else f"byte mismatch in {mismatched}")
        return CriterionResult(12, "determinism", passed, detail)

    def run(self, numbers=None) -> AcceptanceReport:
        numbers = list(numbers or range(1, 13))
        results = []
        for i in numbers:
            method = getattr(self, f"criterion_{i}", None)
            if method is None:
                raise ConfigError(f"no criterion numbered {i}")
            t0 = time.perf_counter()
            try:
                res = method()
            except CroccoError as exc:
                res = CriterionResult(i, f"criterion {i}", False,
                                      f"raised {type(exc).__name__}: {exc}")
            res.seconds = time.perf_counter() - t0
            results.append(res)
        return AcceptanceReport(results=results)


def parse_suite(text: str):
    if text == "full":
        return list(range(1, 13))
    try:
        numbers = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"suite must be 'full' or criterion numbers, got '{text}'") from None
    if not numbers or any(i < 1 or i > 12 for i in numbers):
        raise ConfigError(f"criterion numbers must lie in 1..12, got '{text}'")
    return numbers


def run_acceptance(numbers=None, out_dir=None) -> AcceptanceReport:
    engine = AcceptanceEngine()
    report = engine.run(numbers)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "acceptance.txt").write_text(
            f"# crocco-prandtl {__version__} acceptance\n" + report.summary() + "\n")
        rows = [f"# crocco-prandtl {__version__} acceptance", "number,passed,name"]
        rows += [f"{r.number},{int(r.passed)},{r.name}" for r in report.results]
        (out / "acceptance.csv").write_text("\n".join(rows) + "\n")
    return report
