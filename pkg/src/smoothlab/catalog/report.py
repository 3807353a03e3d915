"""Sweep records produced by the catalog and their serialisations."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

CSV_HEADER = ("check", "param_json", "sweep_value", "lhs", "rhs", "ratio")


def _num(v) -> str:
    return repr(float(v))


def _jsonable(obj):
    """Replace non-finite floats so the JSON stays strict."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def param_json(params: dict) -> str:
    return json.dumps(_jsonable(params), sort_keys=True, separators=(",", ":"))


@dataclass
class CheckReport:
    """One check's sweep.

    ``sweep``, ``lhs``, ``rhs`` and ``ratios`` share their length; rows with
    ``rhs == 0`` are dropped before they get here and counted in
    ``excluded``.  ``fitted`` maps a label to ``{slope, intercept,
    residual}``.
    """

    check: str
    params: dict
    sweep_name: str
    sweep: list
    lhs: list
    rhs: list
    ratios: list
    fitted: dict
    passed: bool
    criterion: str
    stats: dict = field(default_factory=dict)
    excluded: int = 0
    extras: dict = field(default_factory=dict)
    runtime: float = 0.0

    def __post_init__(self):
        n = len(self.sweep)
        if not (len(self.lhs) == len(self.rhs) == len(self.ratios) == n):
            raise ValueError("sweep, lhs, rhs and ratios must share their length")

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def summary(self) -> dict:
        return {"verdict": self.verdict, "max_ratio": self.stats.get("max_ratio"),
                "fitted": self.fitted, "runtime": self.runtime}

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict
        return _jsonable(d)

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, obj: dict) -> "CheckReport":
        obj = dict(obj)
        obj.pop("verdict", None)
        return cls(**obj)

    @classmethod
    def from_json(cls, text: str) -> "CheckReport":
        return cls.from_dict(json.loads(text))

    def csv_rows(self) -> list[tuple]:
        pj = param_json(self.params)
        return [(self.check, pj, _num(s), _num(a), _num(b), _num(r))
                for s, a, b, r in zip(self.sweep, self.lhs, self.rhs, self.ratios)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(self.csv_rows())
        return buf.getvalue()
