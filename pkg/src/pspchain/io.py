"""CSV / JSON table output.

Reals are written with 17 significant digits so doubles round-trip; JSON
stores each column as an array under ``"columns"``.
"""
from __future__ import annotations

import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .psp import PspDistribution
from .sampler import EstimateReport


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


class Table:
    """Column names plus rows, in a fixed order."""

    def __init__(self, columns: Sequence[str], rows: Sequence[Sequence[Any]] = (),
                 meta: dict | None = None):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.meta = dict(meta or {})

    def append(self, row: Sequence[Any]) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} cells, table has {len(self.columns)} columns")
        self.rows.append(list(row))

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(_cell(v) for v in row) + "\n")
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "meta": {k: _json_value(v) for k, v in self.meta.items()},
            "columns": {c: [_json_value(v) for v in self.column(c)] for c in self.columns},
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}")

    def write(self, path: str | Path | None, fmt: str = "csv") -> None:
        text = self.render(fmt)
        if path is None or str(path) == "-":
            sys.stdout.write(text)
        else:
            Path(path).write_text(text)


def distribution_table(dist: PspDistribution, fmt: str = "csv") -> Table:
    columns = ["twice_theta", "theta", "probability"]
    if fmt == "json":
        columns.append("log_weight")
    table = Table(columns, meta={"n": dist.n, "beta": dist.beta, "family": dist.family.label,
                                 "log_z": dist.log_z})
    for tw, lw, p in zip(dist.twice_theta, dist.log_weights, dist.probabilities):
        row = [int(tw), tw / 2, float(p)]
        if fmt == "json":
            row.append(float(lw))
        table.append(row)
    return table


def estimate_table(report: EstimateReport) -> Table:
    table = Table(["twice_theta", "theta", "probability", "stderr", "n_samples", "seed"],
                  meta={"n": report.n, "beta": report.beta, "family": report.family,
                        "sweeps": report.sweeps, "burn_in": report.burn_in, "thin": report.thin,
                        "rng_algorithm": report.rng_algorithm})
    for tw, p, se in zip(report.twice_theta, report.probabilities, report.stderr):
        table.append([int(tw), tw / 2, float(p), float(se), report.n_samples, report.seed])
    return table


def read_csv_table(text: str) -> Table:
    """Parse CSV written by :meth:`Table.to_csv` back into strings."""
    lines = text.strip("\n").split("\n")
    columns = lines[0].split(",")
    return Table(columns, [line.split(",") for line in lines[1:]])
