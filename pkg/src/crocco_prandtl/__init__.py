"""Solver and verification laboratory for the Crocco form of the unsteady
boundary-layer system, plus the constant-coefficient kinetic-transport
model used for the regularity diagnostics.

The package splits into three layers:

* problem assembly: external flows, transformed coefficients, sampled
  data (`flows`, `crocco`, `grids`);
* the regularized marching solver and its estimate battery (`solver`,
  `estimates`, `mms`);
* kernel identities, cutoff geometry, mean-value / Poincare / density /
  oscillation functionals for the model operator (`kolmogorov`).

Scenario runners, artifact writers, the config format, and the numbered
acceptance checklist sit on top (`scenarios`, `reporting`, `config`,
`acceptance`, `cli`).
"""

from ._version import __version__
from .acceptance import AcceptanceEngine, parse_suite, run_acceptance
from .config import RunConfig, load_config, parse_config
from .crocco import (CroccoData, CroccoProblem, coefficients, make_problem,
                     validate)
from .errors import ConfigError, CroccoError, DataError, NumericalError
from .estimates import (EstimateReport, bv_seminorm, comparison_constant,
                        l1_stability, physical_stability, trace_residual,
                        uniformity_spread, weak_residual,
                        weighted_dyy_measure, weighted_grad_norms)
from .flows import (accelerating_flow, decelerating_flow, flow_from_table,
                    make_flow, pressure_gradient, uniform_flow)
from .grids import AnalyticField, FieldHistory, GridSpec
from .kolmogorov import (Box, CutoffSpec, Cutoffs, cutoffs, density_ratio,
                         dilation_defect, gamma0, kernel_reproduction,
                         l0_residual, log_field, log_subsolution, mean_value,
                         model_scenarios, normalization, oscillation_table,
                         solve_model, verify_lemma, weak_poincare_ratio)
from .mms import refinement_study
from .reporting import write_artifacts
from .scenarios import run_scenario, validate_scenario
from .solver import grid_refinement_proxy, solve, thomas_solve, viscosity_sweep

__all__ = [
    "__version__",
    "AcceptanceEngine", "parse_suite", "run_acceptance",
    "RunConfig", "load_config", "parse_config",
    "CroccoData", "CroccoProblem", "coefficients", "make_problem", "validate",
    "ConfigError", "CroccoError", "DataError", "NumericalError",
    "EstimateReport", "bv_seminorm", "comparison_constant", "l1_stability",
    "physical_stability", "trace_residual", "uniformity_spread",
    "weak_residual", "weighted_dyy_measure", "weighted_grad_norms",
    "accelerating_flow", "decelerating_flow", "flow_from_table", "make_flow",
    "pressure_gradient", "uniform_flow",
    "AnalyticField", "FieldHistory", "GridSpec",
    "Box", "CutoffSpec", "Cutoffs", "cutoffs", "density_ratio",
    "dilation_defect", "gamma0", "kernel_reproduction", "l0_residual",
    "log_field", "log_subsolution", "mean_value", "model_scenarios",
    "normalization", "oscillation_table", "solve_model", "verify_lemma",
    "weak_poincare_ratio",
    "refinement_study",
    "write_artifacts",
    "run_scenario", "validate_scenario",
    "grid_refinement_proxy", "solve", "thomas_solve", "viscosity_sweep",
]
