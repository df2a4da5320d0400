"""Artifact writers.

Every artifact is plain text, starts with the provenance comment line

    # crocco-prandtl <version> <scenario> <grid> <eps>

and renders every float with the %.17g round-trip format so reruns can be
compared byte for byte.  A failed verdict leaves a FAILED marker in the
text report.
"""

from pathlib import Path
from typing import List

import numpy as np

from ._version import __version__
from .scenarios import RunResult, Table


def artifact_header(result: RunResult) -> str:
    return f"# crocco-prandtl {__version__} {result.scenario} {result.grid_label} {result.eps_label}"


def fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_report_text(path: Path, result: RunResult) -> Path:
    lines = [artifact_header(result), result.report.to_text().rstrip("\n")]
    lines.append(f"overall = {'PASSED' if result.ok else 'FAILED'}")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_report_csv(path: Path, result: RunResult) -> Path:
    lines = [artifact_header(result)]
    lines.extend(result.report.csv_rows())
    path.write_text("\n".join(lines) + "\n")
    return path


def write_table_csv(path: Path, result: RunResult, table: Table) -> Path:
    lines = [artifact_header(result), ",".join(table.columns)]
    lines.extend(",".join(fmt(v) for v in row) for row in table.rows)
    path.write_text("\n".join(lines) + "\n")
    return path


def write_fields_csv(path: Path, result: RunResult) -> Path:
    hist = result.history
    tt, xx, yy = np.meshgrid(hist.t, hist.x, hist.y, indexing="ij")
    flat = np.column_stack([tt.ravel(), xx.ravel(), yy.ravel(), hist.values.ravel()])
    with open(path, "w") as fh:
        fh.write(artifact_header(result) + "\n")
        fh.write("t,x,y,value\n")
        np.savetxt(fh, flat, fmt="%.17g", delimiter=",")
    return path


def write_artifacts(result: RunResult, out_dir) -> List[Path]:
    """Write the full artifact set for one run into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [
        write_report_text(out / "report.txt", result),
        write_report_csv(out / "report.csv", result),
    ]
    if result.history is not None:
        written.append(write_fields_csv(out / "fields.csv", result))
    for table in result.tables:
        written.append(write_table_csv(out / f"{table.name}.csv", result, table))
    return written
