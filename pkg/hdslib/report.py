from __future__ import annotations

import csv
import enum
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .utils import atomic_writer

log = logging.getLogger(__name__)

#: Stated on every report whose suite compares computed maximal functions
#: with a bound
SOUNDNESS_NOTE = (
    "maximal functions are suprema over finite grids of radii or times, hence lower bounds of the true ones:"
    " discretization can only make a bound check pass, never fail"
)


class ReportEncoder(json.JSONEncoder):
    """
    JSON encoder for numpy values, paths and enums
    """

    def default(self, obj: Any) -> Any:
        if isinstance(obj, Path):
            return obj.as_posix()
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.generic):
            return obj.item()
        if isinstance(obj, enum.Enum):
            return obj.value
        return json.JSONEncoder.default(self, obj)


@dataclass
class TrialResult:
    """
    Empirical constant measured by one trial
    """

    trial: int
    constant: float
    bound: float | None = None
    passed: bool = True
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "trial": self.trial,
            "constant": self.constant,
            "bound": self.bound,
            "pass": self.passed,
            "extra": self.extra,
        }


@dataclass
class VerificationReport:
    """
    Outcome of a verification suite
    """

    suite: str
    config: dict[str, Any]
    per_trial: list[TrialResult]
    bound: float | None
    passed: bool
    witnesses: list[dict[str, Any]] = field(default_factory=list)
    runtime_ms: float | None = None
    summary: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def seed(self) -> int:
        return int(self.config.get("seed", 0))

    @property
    def worst_case(self) -> float:
        """
        Largest per-trial constant
        """
        if not self.per_trial:
            return math.nan
        return max(t.constant for t in self.per_trial)

    @property
    def worst_trial(self) -> TrialResult | None:
        if not self.per_trial:
            return None
        return max(self.per_trial, key=lambda t: t.constant)

    @property
    def basename(self) -> str:
        return f"{self.suite}-{self.seed}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "config": self.config,
            "per_trial": [t.to_dict() for t in self.per_trial],
            "worst_case": self.worst_case,
            "bound": self.bound,
            "pass": self.passed,
            "witnesses": self.witnesses,
            "runtime_ms": self.runtime_ms,
            "summary": self.summary,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), cls=ReportEncoder, sort_keys=True, indent=1) + "\n"

    def to_csv(self) -> str:
        """
        One row per trial: trial, constant, bound, pass
        """
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["trial", "constant", "bound", "pass"])
        for t in self.per_trial:
            bound = "" if t.bound is None else repr(float(t.bound))
            writer.writerow([t.trial, repr(float(t.constant)), bound, t.passed])
        return out.getvalue()


def emit_report(report: VerificationReport, outdir: Path) -> list[Path]:
    """
    Write ``<suite>-<seed>.json`` and ``<suite>-<seed>.csv`` into outdir
    """
    written: list[Path] = []
    for suffix, content in ((".json", report.to_json()), (".csv", report.to_csv())):
        path = outdir / (report.basename + suffix)
        try:
            with atomic_writer(path, "wt", encoding="utf-8") as fd:
                fd.write(content)
        except OSError as e:
            raise OSError(e.errno, f"cannot write report: {e.strerror}", path.as_posix()) from e
        log.info("%s: report written to %s", report.suite, path)
        written.append(path)
    return written


def load_report(path: Path) -> dict[str, Any]:
    """
    Read back a JSON report
    """
    with path.open() as fd:
        return json.load(fd)  # type: ignore[no-any-return]
