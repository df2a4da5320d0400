"""Flat key = value configuration files for laboratory runs.

One key per line, '#' starts a comment, blank lines are skipped.  Keys are
typed against a fixed schema; unknown or duplicated keys are rejected with
the offending line number so configs stay honest.
"""

from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

SCENARIOS = (
    "exact_profile",
    "favorable_accel",
    "viscosity_sweep",
    "stability_perturb",
    "kolmogorov_checks",
    "oscillation_lab",
)

THETA_MAX = 2.0**-6


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    nx: int = 64
    ny: int = 64
    nt: int = 64
    eps: float = 1e-3
    L: float = 1.0
    eps_list: tuple = (0.1, 0.03, 0.01, 0.003, 0.001)
    perturb: float = 1e-3
    lam: float = 2.0
    seed: int = 0
    h_level: float = 0.01
    theta: float = 0.01
    r: float = 1.0

    @property
    def grid_label(self) -> str:
        return f"{self.nx}x{self.ny}x{self.nt}"


def _parse_int(text: str) -> int:
    return int(text)


def _parse_float(text: str) -> float:
    val = float(text)
    if val != val:
        raise ValueError("nan is not a valid value")
    return val


def _parse_float_list(text: str) -> tuple:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty list")
    return tuple(float(p) for p in parts)


def _parse_str(text: str) -> str:
    return text


SCHEMA = {
    "scenario": _parse_str,
    "nx": _parse_int,
    "ny": _parse_int,
    "nt": _parse_int,
    "eps": _parse_float,
    "L": _parse_float,
    "eps_list": _parse_float_list,
    "perturb": _parse_float,
    "lam": _parse_float,
    "seed": _parse_int,
    "h_level": _parse_float,
    "theta": _parse_float,
    "r": _parse_float,
}

assert set(SCHEMA) == {f.name for f in fields(RunConfig)}


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.scenario not in SCENARIOS:
        raise ConfigError(
            f"unknown scenario '{cfg.scenario}'; choose one of {', '.join(SCENARIOS)}")
    for key in ("nx", "ny", "nt"):
        if getattr(cfg, key) < 4:
            raise ConfigError(f"{key} must be at least 4, got {getattr(cfg, key)}")
    if cfg.eps <= 0:
        raise ConfigError(f"eps must be positive, got {cfg.eps:g}")
    if cfg.L <= 0:
        raise ConfigError(f"L must be positive, got {cfg.L:g}")
    if len(cfg.eps_list) < 2:
        raise ConfigError("eps_list needs at least two values")
    if any(e <= 0 for e in cfg.eps_list):
        raise ConfigError("eps_list values must be positive")
    if any(b >= a for a, b in zip(cfg.eps_list, cfg.eps_list[1:])):
        raise ConfigError("eps_list must be strictly decreasing")
    if cfg.perturb <= 0:
        raise ConfigError(f"perturb must be positive, got {cfg.perturb:g}")
    if cfg.lam <= 1:
        raise ConfigError(f"lam must exceed 1, got {cfg.lam:g}")
    if cfg.seed < 0:
        raise ConfigError(f"seed must be nonnegative, got {cfg.seed}")
    if not 0 < cfg.h_level < 0.5:
        raise ConfigError(f"h_level must lie in (0, 1/2), got {cfg.h_level:g}")
    if not 0 < cfg.theta < THETA_MAX:
        raise ConfigError(f"theta must lie in (0, {THETA_MAX:g}), got {cfg.theta:g}")
    if cfg.r <= 0:
        raise ConfigError(f"r must be positive, got {cfg.r:g}")
    return cfg


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got '{raw.strip()}'")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        try:
            values[key] = SCHEMA[key](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: cannot parse {key} = '{val}' ({exc})") from None
    if "scenario" not in values:
        raise ConfigError("missing required key 'scenario'")
    return _validate(RunConfig(**values))


def load_config(path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config(p.read_text())
