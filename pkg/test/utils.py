from __future__ import annotations

import tempfile
from pathlib import Path
from typing import Any
from unittest import TestCase

import numpy as np

from hdslib.domain import Array, WeightedGrid
from hdslib.suites import TrialConfig


class WorkdirMixin(TestCase):
    def setUp(self) -> None:
        super().setUp()
        tmpdir = tempfile.TemporaryDirectory()
        self.addCleanup(tmpdir.cleanup)
        self.workdir = Path(tmpdir.name)


class GridTestMixin(TestCase):
    def grid(self, kappa: float | tuple[float, ...] = 0.0, half_width: float = 10.0, points: int = 256) -> WeightedGrid:
        kappas = kappa if isinstance(kappa, tuple) else (kappa,)
        return WeightedGrid.build(kappas, half_width, points)

    def gaussian(self, grid: WeightedGrid, width: float = 1.0, center: float = 0.0) -> Array:
        r2 = np.sum((grid.points - center) ** 2, axis=-1)
        return np.exp(-r2 / (2 * width**2))

    def assertAllClose(self, actual: Any, desired: Any, rtol: float = 1e-7, atol: float = 0.0) -> None:
        np.testing.assert_allclose(actual, desired, rtol=rtol, atol=atol)


def small_config(**kwargs: Any) -> TrialConfig:
    """
    Configuration small enough for unit tests
    """
    defaults: dict[str, Any] = {
        "trials": 6,
        "state_sizes": (2, 3, 5),
        "sequence_lengths": (1, 2, 4),
        "alpha_start": 1e-2,
        "alpha_stop": 1e2,
        "alpha_ratio": 2.0,
        "half_width": 8.0,
        "points": 64,
        "grid_trials": 1,
        "radius_start": 0.25,
        "radius_ratio": 1.5,
        "time_start": 0.01,
        "time_ratio": 4.0,
        "substeps": 2,
    }
    defaults.update(kwargs)
    return TrialConfig(**defaults)
