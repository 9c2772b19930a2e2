"""Trace CSV and summary files, written atomically."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path

import numpy as np

from .config import ExperimentConfig

__all__ = ["CSV_COLUMNS", "emit_csv", "read_csv", "emit_summary", "read_summary", "format_float"]

CSV_COLUMNS = ("trial", "checkpoint_t", "cumulative_regret")


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def _atomic_write(path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def emit_csv(traces, path) -> Path:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for tr in traces:
        for t, r in zip(tr.checkpoints, tr.cumulative_regret):
            writer.writerow((tr.trial, int(t), format_float(r)))
    return _atomic_write(path, buf.getvalue())


def read_csv(path) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Map trial id to ``(checkpoints, cumulative_regret)``."""
    rows: dict[int, tuple[list, list]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            ts, rs = rows.setdefault(int(row["trial"]), ([], []))
            ts.append(int(row["checkpoint_t"]))
            rs.append(float(row["cumulative_regret"]))
    return {k: (np.asarray(t, dtype=np.int64), np.asarray(r)) for k, (t, r) in rows.items()}


def emit_summary(config: ExperimentConfig, summary_stats: dict, path) -> Path:
    """``key = value`` lines: statistics, the config hash, then the config echo."""
    lines = []
    for key, value in summary_stats.items():
        lines.append(f"{key} = {format_float(value) if isinstance(value, float) else value}")
    lines.append(f"config_hash = {config.content_hash()}")
    lines.extend(f"config.{line}" for line in config.to_text().splitlines())
    return _atomic_write(path, "\n".join(lines) + "\n")


def read_summary(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if line.strip():
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out
