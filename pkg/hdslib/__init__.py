from __future__ import annotations

from . import utils
from .domain import RootSystem, WeightedGrid
from .report import VerificationReport
from .suites import SUITES, TrialConfig, run_suite

__all__ = ("RootSystem", "SUITES", "TrialConfig", "VerificationReport", "WeightedGrid", "run_suite", "utils")
