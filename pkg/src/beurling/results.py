"""Result tables and their on-disk forms (CSV, JSON, plot data)."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field

from .errors import BeurlingError


class OutputError(BeurlingError, OSError):
    """Writing results failed; the message names the offending path."""


def _clean(value):
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    value = float(value)
    return value if math.isfinite(value) else None


@dataclass(frozen=True)
class ResultTable:
    """Rows of scalars (str, int, float, bool or None) under a fixed column schema.

    Non-finite floats are stored as ``None`` so that CSV and JSON agree.
    """

    experiment: str
    columns: tuple
    rows: tuple = ()
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        cols = tuple(self.columns)
        rows = []
        for row in self.rows:
            if len(row) != len(cols):
                raise ValueError(f"row of length {len(row)} for {len(cols)} columns")
            rows.append(tuple(_clean(v) for v in row))
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "rows", tuple(rows))
        object.__setattr__(self, "provenance", dict(self.provenance))

    def column(self, name):
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def records(self):
        return [dict(zip(self.columns, row)) for row in self.rows]

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_csv_cell(v) for v in row])
        return buf.getvalue()

    def to_json(self):
        return {
            "experiment": self.experiment,
            "columns": list(self.columns),
            "rows": [list(r) for r in self.rows],
            "provenance": self.provenance,
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=1, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, obj):
        return cls(obj["experiment"], tuple(obj["columns"]), tuple(tuple(r) for r in obj["rows"]), obj["provenance"])

    def to_plot_dat(self):
        lines = ["# " + " ".join(self.columns)]
        for row in self.rows:
            lines.append(" ".join(_dat_cell(v) for v in row))
        return "\n".join(lines) + "\n"


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _dat_cell(v):
    if v is None:
        return "nan"
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, int):
        return str(v)
    text = "".join("_" if ch.isspace() else ch for ch in str(v))
    return text or "-"


def write_results(table, out_dir, fmt="csv"):
    """Write ``<experiment>.csv`` or ``.json`` (per ``fmt``), the other one as well, and ``.plot.dat``.

    Both tabular forms are always written so the CSV stays available for
    diffing; ``fmt`` only selects which path is returned first.
    """
    base = os.path.join(out_dir, table.experiment)
    paths = {"csv": base + ".csv", "json": base + ".json", "dat": base + ".plot.dat"}
    payload = {"csv": table.to_csv(), "json": table.dumps(), "dat": table.to_plot_dat()}
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {out_dir!r}: {exc.strerror or exc}") from exc
    for key in ("csv", "json", "dat"):
        try:
            with open(paths[key], "w", encoding="utf-8", newline="") as fh:
                fh.write(payload[key])
        except OSError as exc:
            raise OutputError(f"cannot write {paths[key]!r}: {exc.strerror or exc}") from exc
    order = ["csv", "json"] if fmt == "csv" else ["json", "csv"]
    return [paths[k] for k in order] + [paths["dat"]]
