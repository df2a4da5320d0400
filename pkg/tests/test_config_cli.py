import numpy as np
import pytest

from crocco_prandtl import scenarios
from crocco_prandtl._version import __version__
from crocco_prandtl.cli import main
from crocco_prandtl.config import SCENARIOS, RunConfig, load_config, parse_config
from crocco_prandtl.errors import ConfigError, NumericalError
from crocco_prandtl.reporting import fmt

TINY_EXACT = """
# smallest stable exact-profile run
scenario = exact_profile
nx = 16
ny = 16
nt = 24
eps = 1e-2
"""


# ---------------------------------------------------------------------------
# config parsing


def test_parse_config_happy_path():
    cfg = parse_config(TINY_EXACT)
    assert cfg.scenario == "exact_profile"
    assert (cfg.nx, cfg.ny, cfg.nt) == (16, 16, 24)
    assert cfg.eps == 1e-2
    assert cfg.grid_label == "16x16x24"
    # untouched keys keep their defaults
    assert cfg.eps_list == (0.1, 0.03, 0.01, 0.003, 0.001)


def test_parse_config_lists_and_comments():
    cfg = parse_config(
        "scenario = viscosity_sweep  # trailing comment\n"
        "eps_list = 0.1, 0.01, 0.001\n")
    assert cfg.eps_list == (0.1, 0.01, 0.001)


@pytest.mark.parametrize("text,fragment", [
    ("scenario = exact_profile\nwidgets = 3\n", "line 2: unknown key"),
    ("scenario = exact_profile\nscenario = exact_profile\n", "line 2: duplicate"),
    ("scenario exact_profile\n", "line 1: expected"),
    ("scenario = exact_profile\nnx = soon\n", "line 2: cannot parse nx"),
    ("scenario = exact_profile\neps = nan\n", "line 2: cannot parse eps"),
    ("nx = 16\n", "missing required key"),
    ("scenario = warp_drive\n", "unknown scenario"),
])
def test_parse_config_rejects(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(text)


@pytest.mark.parametrize("line", [
    "nx = 3",
    "eps = 0",
    "L = -1",
    "eps_list = 0.1",
    "eps_list = 0.1, 0.2",
    "eps_list = 0.1, -0.01",
    "perturb = 0",
    "lam = 1.0",
    "seed = -1",
    "h_level = 0.6",
    "theta = 0.1",
    "r = 0",
])
def test_parse_config_value_ranges(line):
    with pytest.raises(ConfigError):
        parse_config(f"scenario = exact_profile\n{line}\n")


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.cfg")


def test_runner_registry_covers_every_scenario():
    assert set(scenarios.RUNNERS) == set(SCENARIOS)


def test_shipped_configs_match_acceptance_bundle():
    from pathlib import Path

    from crocco_prandtl.acceptance import artifact_bundle

    cfg_dir = Path(__file__).resolve().parent.parent / "configs"
    for cfg in artifact_bundle():
        parsed = load_config(cfg_dir / f"{cfg.scenario}.cfg")
        assert parsed == cfg, cfg.scenario


def test_fmt_roundtrips_floats():
    for v in (1.0 / 3.0, 1e-17, 0.1, np.pi, 2.0**-52):
        assert float(fmt(v)) == v
    assert fmt(True) == "1"
    assert fmt(7) == "7"
    assert fmt("label") == "label"


# ---------------------------------------------------------------------------
# CLI verbs and exit codes


def write_cfg(tmp_path, text):
    p = tmp_path / "run.cfg"
    p.write_text(text)
    return str(p)


def test_cli_version(capsys):
    assert main(["version"]) == 0
    assert capsys.readouterr().out.strip() == __version__


def test_cli_run_writes_artifacts(tmp_path, capsys):
    cfg = write_cfg(tmp_path, TINY_EXACT)
    out = tmp_path / "artifacts"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "overall = PASSED" in stdout
    report = (out / "report.txt").read_text()
    header = f"# crocco-prandtl {__version__} exact_profile 16x16x24"
    assert report.splitlines()[0].startswith(header)
    assert report.rstrip().endswith("overall = PASSED")
    fields = (out / "fields.csv").read_text().splitlines()
    assert fields[1] == "t,x,y,value"
    assert len(fields) == 2 + 25 * 17 * 17


def test_cli_run_is_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, TINY_EXACT)
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    for name in ("report.txt", "report.csv", "fields.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cli_validate_passes_clean_config(tmp_path, capsys):
    cfg = write_cfg(tmp_path, TINY_EXACT)
    assert main(["validate", "--config", cfg]) == 0
    assert "validation = PASSED" in capsys.readouterr().out


def test_cli_validate_fails_unstable_model_grid(tmp_path, capsys):
    # model time step dt = 0.75/nt exceeds 0.9 dx = 1.8/nx for this pairing
    cfg = write_cfg(tmp_path, "scenario = oscillation_lab\nnx = 64\nny = 64\nnt = 16\n")
    assert main(["validate", "--config", cfg]) == 1
    assert "validation = FAILED" in capsys.readouterr().out


def test_cli_config_error_exits_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "scenario = warp_drive\n")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "configuration error" in capsys.readouterr().err
    assert main(["validate", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_cli_numerical_error_exits_3(tmp_path, capsys, monkeypatch):
    def boom(cfg):
        raise NumericalError("synthetic blow-up")

    monkeypatch.setattr(scenarios, "run_scenario", boom)
    cfg = write_cfg(tmp_path, TINY_EXACT)
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_cli_acceptance_subset(tmp_path, capsys):
    out = tmp_path / "acc"
    assert main(["acceptance", "--suite", "7,8", "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "criterion  7 [PASS]" in stdout
    assert "criterion  8 [PASS]" in stdout
    assert "acceptance = PASSED" in stdout
    assert (out / "acceptance.txt").is_file()
    assert (out / "acceptance.csv").is_file()


def test_cli_acceptance_rejects_bad_suite(capsys):
    assert main(["acceptance", "--suite", "0,99"]) == 2
    assert "configuration error" in capsys.readouterr().err
