"""Column datasets with deterministic CSV/JSON serialization."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def format_number(x: float, precision: int) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    return format(x, f".{precision}g")


def _json_number(x: float, precision: int):
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(format(x, f".{precision}g"))


@dataclass
class CurveDataset:
    """Named, equal-length float columns plus a metadata dict.

    Column names carry their unit, e.g. ``t_ns`` or ``S_fo_nats``.
    """

    columns: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        cols = {str(k): np.asarray(v, dtype=float).ravel() for k, v in self.columns.items()}
        lengths = {v.size for v in cols.values()}
        if len(lengths) > 1:
            raise ValueError(f"columns have unequal lengths: {sorted(lengths)}")
        self.columns = cols

    def __len__(self) -> int:
        return next(iter(self.columns.values())).size if self.columns else 0

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def to_csv(self, precision: int = 9) -> str:
        lines = [",".join(self.names)]
        data = list(self.columns.values())
        for i in range(len(self)):
            lines.append(",".join(format_number(c[i], precision) for c in data))
        return "\n".join(lines) + "\n"

    def to_json(self, precision: int = 9) -> str:
        doc = {
            "meta": self.meta,
            "columns": {k: [_json_number(x, precision) for x in v] for k, v in self.columns.items()},
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"

    def render(self, fmt: str = "csv", precision: int = 9) -> str:
        if fmt == "csv":
            return self.to_csv(precision)
        if fmt == "json":
            return self.to_json(precision)
        raise ValueError(f"unknown format {fmt!r}")

    def write(self, path, fmt: str = "csv", precision: int = 9) -> None:
        text = self.render(fmt, precision)
        with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
