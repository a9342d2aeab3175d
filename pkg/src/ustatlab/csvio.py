"""CSV schemas for paths and reports.

Path files: '#' metadata comment lines (key=value), then a header row
``index,coord_0,...,coord_{d-1}`` with 1-based time indices.  Report files:
``replicate,checkpoint,u_value,limit_value,limit_stderr,abs_error`` with one
row per (replicate, checkpoint); summary rows use replicate = -1 and carry
the L^p error in the u_value column, the mean limit in limit_value, and the
max absolute error in abs_error.  Floats are serialized with 17 significant
digits so a round trip reproduces them bit for bit.  Files are written
atomically (temp file + rename).
"""

from __future__ import annotations

import math
import os
import tempfile
from typing import Optional

import numpy as np

from .core import SamplePath
from .diagnostics import ConvergenceReport

__all__ = [
    "fmt_float",
    "atomic_write_text",
    "write_path_csv",
    "read_path_csv",
    "write_report_csv",
    "write_ustat_csv",
]

REPORT_HEADER = "replicate,checkpoint,u_value,limit_value,limit_stderr,abs_error"


def fmt_float(x: float) -> str:
    return f"{float(x):.17g}"


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_path_csv(path_obj: SamplePath, file_path: str) -> None:
    n, d = path_obj.points.shape
    lines = [
        f"# process_id={path_obj.process_id}",
        f"# seed={path_obj.seed}",
        f"# n={n}",
        f"# d={d}",
    ]
    if path_obj.latent_component is not None:
        lines.append(f"# latent_component={path_obj.latent_component}")
    if path_obj.pair_split is not None:
        lines.append(f"# pair_split={path_obj.pair_split}")
    lines.append("index," + ",".join(f"coord_{j}" for j in range(d)))
    for i in range(n):
        lines.append(f"{i + 1}," + ",".join(fmt_float(v) for v in path_obj.points[i]))
    atomic_write_text(file_path, "\n".join(lines) + "\n")


def read_path_csv(file_path: str) -> SamplePath:
    meta: dict[str, str] = {}
    rows: list[list[float]] = []
    header: Optional[list[str]] = None
    with open(file_path) as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, value = body.split("=", 1)
                    meta[key.strip()] = value.strip()
                continue
            if header is None:
                header = line.split(",")
                if header[0] != "index":
                    raise ValueError(f"{file_path}:{lineno}: first column must be 'index'")
                continue
            cells = line.split(",")
            try:
                rows.append([float(c) for c in cells[1:]])
            except ValueError:
                raise ValueError(f"{file_path}:{lineno}: malformed data row {line!r}") from None
    if header is None or not rows:
        raise ValueError(f"path CSV {file_path} contains no data rows")
    latent = meta.get("latent_component")
    split = meta.get("pair_split")
    return SamplePath(
        np.asarray(rows, dtype=np.float64),
        seed=int(meta.get("seed", 0)),
        process_id=meta.get("process_id", ""),
        latent_component=int(latent) if latent is not None else None,
        pair_split=int(split) if split is not None else None,
    )


def report_csv_text(report: ConvergenceReport) -> str:
    lines = [REPORT_HEADER]
    for r in range(report.replicates):
        est = report.limits[r]
        for k, checkpoint in enumerate(report.checkpoints):
            u = report.u_values[r, k]
            lines.append(
                f"{r},{checkpoint},{fmt_float(u)},{fmt_float(est.value)},"
                f"{fmt_float(est.std_error)},{fmt_float(abs(u - est.value))}"
            )
    mean_limit = float(np.mean([est.value for est in report.limits]))
    for k, checkpoint in enumerate(report.checkpoints):
        lines.append(
            f"-1,{checkpoint},{fmt_float(report.lp_errors[k])},{fmt_float(mean_limit)},"
            f"{fmt_float(0.0)},{fmt_float(report.max_abs_errors[k])}"
        )
    lines.append(f"# p={fmt_float(report.p)}")
    lines.append(f"# mode={report.mode}")
    lines.append(f"# master_seed={report.master_seed}")
    lines.append(f"# kernel={report.kernel_name}")
    lines.append(f"# process={report.process_id}")
    if report.clusters is not None:
        for c in report.clusters:
            mean_u = "nan" if math.isnan(c.mean_terminal_u) else fmt_float(c.mean_terminal_u)
            lines.append(
                f"# component={c.component} weight={fmt_float(c.weight)} "
                f"limit={fmt_float(c.limit_value)} count={c.count} mean_terminal_u={mean_u}"
            )
        lines.append(f"# cluster_agreement={fmt_float(report.cluster_agreement)}")
    for note in report.notes:
        lines.append(f"# note={note}")
    return "\n".join(lines) + "\n"


def write_report_csv(report: ConvergenceReport, file_path: str) -> None:
    atomic_write_text(file_path, report_csv_text(report))


def write_ustat_csv(file_path: str, n: int, value: float) -> None:
    lines = [
        REPORT_HEADER,
        f"0,{n},{fmt_float(value)},nan,nan,nan",
    ]
    atomic_write_text(file_path, "\n".join(lines) + "\n")
