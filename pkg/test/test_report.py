from __future__ import annotations

import json
import math
import unittest
from pathlib import Path

import numpy as np

from hdslib.report import ReportEncoder, TrialResult, VerificationReport, emit_report, load_report

from .utils import WorkdirMixin


def make_report(**kwargs: object) -> VerificationReport:
    defaults: dict[str, object] = {
        "suite": "verify-scalar-hds",
        "config": {"seed": 7, "trials": 2},
        "per_trial": [TrialResult(0, 1.5, 2.0, True), TrialResult(1, 1.75, 2.0, True, {"states": 3})],
        "bound": 2.0,
        "passed": True,
    }
    defaults.update(kwargs)
    return VerificationReport(**defaults)  # type: ignore[arg-type]


class TestReport(WorkdirMixin, unittest.TestCase):
    def test_to_dict(self) -> None:
        report = make_report(witnesses=[{"trial": 1, "f": np.array([0.5, 1.0])}])
        data = report.to_dict()
        self.assertEqual(
            sorted(data),
            [
                "bound",
                "config",
                "notes",
                "pass",
                "per_trial",
                "runtime_ms",
                "suite",
                "summary",
                "witnesses",
                "worst_case",
            ],
        )
        self.assertEqual(data["worst_case"], 1.75)
        self.assertEqual(report.worst_trial, report.per_trial[1])
        self.assertIsNone(data["runtime_ms"])
        decoded = json.loads(report.to_json())
        self.assertEqual(decoded["witnesses"][0]["f"], [0.5, 1.0])
        self.assertTrue(decoded["pass"])
        self.assertEqual(decoded["per_trial"][1]["extra"], {"states": 3})

    def test_empty(self) -> None:
        report = make_report(per_trial=[])
        self.assertTrue(math.isnan(report.worst_case))
        self.assertIsNone(report.worst_trial)

    def test_csv(self) -> None:
        report = make_report(
            per_trial=[TrialResult(0, 0.25, None, True), TrialResult(1, 3.0, 2.0, False)], bound=None, passed=False
        )
        self.assertEqual(
            report.to_csv().splitlines(),
            ["trial,constant,bound,pass", "0,0.25,,True", "1,3.0,2.0,False"],
        )

    def test_json_stable(self) -> None:
        self.assertEqual(make_report().to_json(), make_report().to_json())

    def test_encoder(self) -> None:
        data = {"path": Path("/tmp/x"), "value": np.float64(0.5), "count": np.int64(3)}
        self.assertEqual(json.loads(json.dumps(data, cls=ReportEncoder)), {"path": "/tmp/x", "value": 0.5, "count": 3})

    def test_emit(self) -> None:
        report = make_report()
        paths = emit_report(report, self.workdir)
        self.assertEqual([p.name for p in paths], ["verify-scalar-hds-7.json", "verify-scalar-hds-7.csv"])
        loaded = load_report(paths[0])
        self.assertEqual(loaded["suite"], "verify-scalar-hds")
        self.assertEqual(loaded["config"], {"seed": 7, "trials": 2})
        self.assertEqual(paths[1].read_text(), report.to_csv())

    def test_emit_unwritable(self) -> None:
        target = self.workdir / "file"
        target.write_text("")
        with self.assertRaises(OSError):
            emit_report(make_report(), target)
