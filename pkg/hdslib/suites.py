"""
Verification suites: seeded experiments turning maximal inequalities into
pass/fail reports with empirical constants.

Every trial draws its random inputs from its own generator, seeded with the
configured seed and the trial coordinates, so trials can run concurrently
and reports do not depend on scheduling.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import json
import logging
import math
import time
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any, NamedTuple, TypeVar

import numpy as np

from .domain import (
    Array,
    FiniteMeasureSpace,
    WeightedGrid,
    ball_indicator,
    lp_norm,
    lpq_norm,
    pointwise_lq,
    weak_constant,
)
from .dunkl import SpectralGrid, check_decay, dunkl_laplacian, dunkl_translate, negativity_witness, transform_for
from .maximal import (
    SupGrid,
    SupKind,
    banach_maximal,
    dunkl_heat_maximal,
    dunkl_maximal_direct,
    fefferman_stein,
    hardy_littlewood,
    semigroup_maximal,
    vector_semigroup_maximal,
)
from .report import SOUNDNESS_NOTE, TrialResult, VerificationReport, load_report
from .semigroups import (
    ContractionSemigroup,
    DunklHeatSemigroup,
    HeatSemigroup,
    IdentitySemigroup,
    MarkovSemigroup,
    TimeQuadrature,
    check_contraction,
    check_mass,
    check_positivity,
    check_semigroup_law,
)
from .utils import atomic_writer

log = logging.getLogger(__name__)

T = TypeVar("T")

#: Weak type (1,1) constant of the maximal inequality for positive
#: contraction semigroups
WEAK_BOUND = 2.0


class ConfigValueError(ValueError):
    """
    Invalid value for a configuration key
    """

    def __init__(self, key: str, message: str) -> None:
        super().__init__(f"{key}: {message}")
        self.key = key
        self.message = message


class HypothesisError(ValueError):
    """
    The configuration is outside the hypotheses of the inequality being checked
    """


def strong_bound(p: float) -> float:
    """
    Strong (p, p) constant 2(p/(p-1))^{1/p} of the maximal inequality
    """
    if not p > 1:
        return math.inf
    if math.isinf(p):
        return 2.0
    return float(2 * (p / (p - 1)) ** (1 / p))


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "yes", "true", "on"):
        return True
    if lowered in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"{value!r} is not a boolean")


def _parse_list(convert: Callable[[str], T]) -> Callable[[str], tuple[T, ...]]:
    def parse(value: str) -> tuple[T, ...]:
        return tuple(convert(v) for v in value.replace(",", " ").split())

    return parse


_PARSERS: dict[str, Callable[[str], Any]] = {
    "int": int,
    "float": float,
    "bool": _parse_bool,
    "str": str,
    "tuple[int, ...]": _parse_list(int),
    "tuple[float, ...]": _parse_list(float),
}


@dataclass(frozen=True)
class TrialConfig:
    """
    Parameters of a verification run.

    Identical configurations produce identical reports.
    """

    seed: int = 0
    trials: int = 100
    #: Sizes of the finite state spaces, drawn at random per trial
    state_sizes: tuple[int, ...] = (2, 3, 4, 6, 8)
    #: Numbers of components of vector fields
    sequence_lengths: tuple[int, ...] = (1, 2, 4, 8, 16)
    p: float = 2.0
    q: float = 2.0
    #: Exponents of the scalar strong type checks
    p_values: tuple[float, ...] = (1.25, 2.0, 4.0)
    #: Sup grid over α for finite semigroups
    alpha_start: float = 1e-3
    alpha_stop: float = 1e3
    alpha_ratio: float = 1.2
    #: Sup grid over α for kernel semigroups, capped by the truncation guard
    time_start: float = 1e-3
    time_ratio: float = 2.0
    substeps: int = 4
    #: Sup grid over radii, capped at half_width / 2
    radius_start: float = 0.05
    radius_ratio: float = 1.1
    dimension: int = 1
    half_width: float = 10.0
    points: int = 256
    #: Per-axis multiplicities (a single value applies to every axis)
    kappa: tuple[float, ...] = (0.5,)
    #: Multiplicities swept by transform-check and heat-check
    kappas: tuple[float, ...] = (0.0, 0.5, 1.0)
    #: Trials per component count for grid suites
    grid_trials: int = 4
    #: Use the identity semigroup, or endpoint-only sup grids on grids
    identity: bool = False
    #: Also compute the Dunkl maximal function through translations
    direct: bool = True
    threads: int = 1
    #: Record runtimes (reports are then no longer byte-identical across runs)
    timing: bool = False
    fixtures: str = ""
    tol_contract: float = 1e-3
    tol_mass: float = 1e-3
    tol_semigroup: float = 1e-3
    tol_transform: float = 1e-3
    tol_collapse: float = 0.05
    tol_refine: float = 0.1
    slope_tol: float = 0.05
    baseline_rtol: float = 0.05

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ConfigValueError("seed", "must be nonnegative")
        for key in ("trials", "grid_trials", "threads", "dimension"):
            if getattr(self, key) < 1:
                raise ConfigValueError(key, "must be at least 1")
        for key in ("p", "q"):
            if not getattr(self, key) >= 1:
                raise ConfigValueError(key, "must be in [1, inf]")
        if any(not p >= 1 for p in self.p_values):
            raise ConfigValueError("p_values", "exponents must be in [1, inf]")
        if not self.state_sizes or any(n < 1 for n in self.state_sizes):
            raise ConfigValueError("state_sizes", "must be a nonempty list of positive sizes")
        if not self.sequence_lengths or any(n < 1 for n in self.sequence_lengths):
            raise ConfigValueError("sequence_lengths", "must be a nonempty list of positive lengths")
        for key in ("alpha_start", "alpha_stop", "time_start", "radius_start", "half_width"):
            if not getattr(self, key) > 0:
                raise ConfigValueError(key, "must be positive")
        if self.alpha_stop < self.alpha_start:
            raise ConfigValueError("alpha_stop", "must not be below alpha_start")
        for key in ("alpha_ratio", "time_ratio", "radius_ratio"):
            if not getattr(self, key) > 1:
                raise ConfigValueError(key, "must be greater than 1")
        if self.substeps < 2 or self.substeps % 2:
            raise ConfigValueError("substeps", "must be a positive even integer")
        if self.points < 2 or self.points % 2:
            raise ConfigValueError("points", "must be a positive even integer")
        if not self.kappa or len(self.kappa) not in (1, self.dimension):
            raise ConfigValueError("kappa", f"needs 1 or {self.dimension} values")
        if any(not k >= 0 for k in self.kappa + self.kappas):
            raise ConfigValueError("kappa", "multiplicities must be nonnegative")

    @property
    def grid_kappa(self) -> tuple[float, ...]:
        if len(self.kappa) == 1:
            return self.kappa * self.dimension
        return self.kappa

    def grid(self, kappa: Sequence[float] | None = None, points: int | None = None) -> WeightedGrid:
        return WeightedGrid.build(
            self.grid_kappa if kappa is None else kappa,
            self.half_width,
            self.points if points is None else points,
        )

    def as_dict(self) -> dict[str, Any]:
        """
        Config echo stored in reports
        """
        res = dataclasses.asdict(self)
        for key, value in res.items():
            if isinstance(value, tuple):
                res[key] = list(value)
        return res

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> TrialConfig:
        """
        Rebuild a configuration from its echo
        """
        names = {f.name for f in dataclasses.fields(cls)}
        kwargs: dict[str, Any] = {}
        for key, value in data.items():
            if key not in names:
                raise ConfigValueError(key, "unknown key")
            kwargs[key] = tuple(value) if isinstance(value, list) else value
        return cls(**kwargs)

    @classmethod
    def parse_value(cls, key: str, value: str) -> Any:
        """
        Convert the text of a configuration value to the type of its field
        """
        types = {f.name: str(f.type) for f in dataclasses.fields(cls)}
        if key not in types:
            raise ConfigValueError(key, "unknown key")
        try:
            return _PARSERS[types[key]](value)
        except ValueError as e:
            raise ConfigValueError(key, f"invalid value {value!r}: {e}") from e

    def replace(self, **kwargs: Any) -> TrialConfig:
        return dataclasses.replace(self, **kwargs)


class Baselines:
    """
    Frozen worst-case constants of suites without a theoretical bound
    """

    VERSION = 1

    def __init__(self, path: Path | None = None) -> None:
        self.path = path
        self.values: dict[str, float] = {}
        if path is not None and path.exists():
            with path.open() as fd:
                data = json.load(fd)
            if data.get("version") != self.VERSION:
                raise ValueError(f"{path}: unsupported fixtures version {data.get('version')!r}")
            self.values = {k: float(v) for k, v in data.get("baselines", {}).items()}

    def get(self, key: str) -> float | None:
        return self.values.get(key)

    def check(self, key: str, worst: float, rtol: float) -> bool:
        """
        Compare a worst case with its baseline, if there is one
        """
        baseline = self.get(key)
        if baseline is None:
            return True
        ok = worst <= baseline * (1 + rtol)
        if not ok:
            log.warning("%s: worst case %.6g exceeds the baseline %.6g", key, worst, baseline)
        return ok

    def freeze(self, key: str, worst: float) -> None:
        self.values[key] = float(worst)

    def save(self) -> None:
        if self.path is None:
            raise ValueError("no fixtures file configured")
        data = {"version": self.VERSION, "baselines": dict(sorted(self.values.items()))}
        with atomic_writer(self.path, "wt", encoding="utf-8") as fd:
            json.dump(data, fd, indent=1, sort_keys=True)
            fd.write("\n")


class _Outcome(NamedTuple):
    result: TrialResult
    witness: dict[str, Any]


def _rng(cfg: TrialConfig, *keys: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, *keys])


def _run(cfg: TrialConfig, fn: Callable[[T], _Outcome], items: Iterable[T]) -> list[_Outcome]:
    """
    Run trials, concurrently if configured, keeping their order
    """
    items = list(items)
    if cfg.threads > 1 and len(items) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _finish(
    suite: str,
    cfg: TrialConfig,
    outcomes: Sequence[_Outcome],
    bound: float | None,
    passed: bool,
    started: float,
    summary: dict[str, Any] | None = None,
    witnesses: list[dict[str, Any]] | None = None,
    notes: Sequence[str] = (),
) -> VerificationReport:
    trials = [o.result for o in outcomes]
    passed = passed and all(t.passed for t in trials)
    if witnesses is None:
        witnesses = []
        if outcomes:
            worst = max(outcomes, key=lambda o: o.result.constant)
            witnesses.append(worst.witness)
    runtime = (time.perf_counter() - started) * 1000 if cfg.timing else None
    res = VerificationReport(
        suite=suite,
        config=cfg.as_dict(),
        per_trial=trials,
        bound=bound,
        passed=passed,
        witnesses=witnesses,
        runtime_ms=runtime,
        summary=summary or {},
        notes=list(notes),
    )
    log.info("%s: %d trials, worst case %.6g, pass=%s", suite, len(trials), res.worst_case, res.passed)
    return res


def _finite_semigroup(cfg: TrialConfig, rng: np.random.Generator, size: int) -> ContractionSemigroup:
    if cfg.identity:
        return IdentitySemigroup(FiniteMeasureSpace.counting(size))
    return MarkovSemigroup.random(rng, size)


def _generator_of(semigroup: ContractionSemigroup) -> list[list[float]] | None:
    if isinstance(semigroup, MarkovSemigroup):
        return semigroup.generator.matrix.tolist()  # type: ignore[no-any-return]
    return None


def random_nonnegative(rng: np.random.Generator, size: int) -> Array:
    """
    Random sparse nonnegative function on a finite space, never identically 0
    """
    while True:
        density = rng.uniform(0.2, 1.0)
        f = rng.exponential(1.0, size) * (rng.uniform(size=size) < density)
        if f.any():
            return f


def random_vector_field(rng: np.random.Generator, size: int, components: int) -> Array:
    return np.stack([random_nonnegative(rng, size) for _ in range(components)])


def alpha_sup(cfg: TrialConfig) -> SupGrid:
    return SupGrid.geometric(SupKind.TIME, cfg.alpha_start, cfg.alpha_stop, cfg.alpha_ratio)


def time_sup(cfg: TrialConfig, semigroup: DunklHeatSemigroup | HeatSemigroup) -> SupGrid:
    if cfg.identity:
        return SupGrid.endpoint_only(SupKind.TIME)
    stop = max(semigroup.max_time, cfg.time_start)
    return SupGrid.geometric(SupKind.TIME, cfg.time_start, stop, cfg.time_ratio).capped(semigroup.max_time)


def radius_sup(cfg: TrialConfig) -> SupGrid:
    if cfg.identity:
        return SupGrid.endpoint_only(SupKind.RADIUS)
    stop = max(cfg.half_width / 2, cfg.radius_start)
    return SupGrid.geometric(SupKind.RADIUS, cfg.radius_start, stop, cfg.radius_ratio)


def _growth_slope(worst_by_length: Mapping[int, float]) -> float:
    """
    Slope of log(worst constant) against log(number of components)
    """
    lengths = sorted(worst_by_length)
    if len(lengths) < 2:
        return 0.0
    x = np.log(lengths)
    y = np.log([worst_by_length[n] for n in lengths])
    return float(np.polyfit(x, y, 1)[0])


def _worst_by_length(outcomes: Sequence[_Outcome], key: str = "constant") -> dict[int, float]:
    res: dict[int, float] = {}
    for o in outcomes:
        n = int(o.result.extra["components"])
        value = o.result.constant if key == "constant" else float(o.result.extra[key])
        res[n] = max(res.get(n, -math.inf), value)
    return res


def _require_p_le_q(suite: str, cfg: TrialConfig) -> None:
    if cfg.p > cfg.q:
        raise HypothesisError(f"{suite} requires p <= q, got p={cfg.p:g}, q={cfg.q:g}")
    if not cfg.p > 1:
        raise HypothesisError(f"{suite} requires p > 1, got p={cfg.p:g}")


def verify_scalar_hds(cfg: TrialConfig) -> VerificationReport:
    """
    Weak (1,1) and strong (p,p) constants of the maximal function of random
    positive contraction semigroups on finite spaces
    """
    started = time.perf_counter()
    sup = alpha_sup(cfg)

    def trial(i: int) -> _Outcome:
        rng = _rng(cfg, i)
        size = int(rng.choice(cfg.state_sizes))
        semigroup = _finite_semigroup(cfg, rng, size)
        f = random_nonnegative(rng, size)
        space = semigroup.space
        maximal = semigroup_maximal(semigroup, f, sup)
        weak = weak_constant(space, maximal, lp_norm(space, f, 1))
        strong = {repr(p): lp_norm(space, maximal, p) / lp_norm(space, f, p) for p in cfg.p_values}
        passed = weak <= WEAK_BOUND and all(strong[repr(p)] <= strong_bound(p) for p in cfg.p_values)
        result = TrialResult(i, weak, WEAK_BOUND, passed, {"states": size, "strong": strong})
        witness = {"trial": i, "constant": weak, "states": size, "generator": _generator_of(semigroup), "f": f}
        return _Outcome(result, witness)

    outcomes = _run(cfg, trial, range(cfg.trials))
    summary = {
        "strong_bound": {repr(p): strong_bound(p) for p in cfg.p_values},
        "strong_worst": {repr(p): max(o.result.extra["strong"][repr(p)] for o in outcomes) for p in cfg.p_values},
    }
    return _finish("verify-scalar-hds", cfg, outcomes, WEAK_BOUND, True, started, summary, notes=[SOUNDNESS_NOTE])


def verify_vector_hds(cfg: TrialConfig) -> VerificationReport:
    """
    L^p(ℓ^q) constants of the componentwise maximal function, 1 < p ≤ q
    """
    suite = "verify-vector-hds"
    _require_p_le_q(suite, cfg)
    started = time.perf_counter()
    sup = alpha_sup(cfg)
    bound = strong_bound(cfg.p)
    cases = [(k, n, i) for k, n in enumerate(cfg.sequence_lengths) for i in range(cfg.trials)]

    def trial(case: tuple[int, int, int]) -> _Outcome:
        k, components, i = case
        rng = _rng(cfg, components, i)
        size = int(rng.choice(cfg.state_sizes))
        semigroup = _finite_semigroup(cfg, rng, size)
        F = random_vector_field(rng, size, components)
        _, field = vector_semigroup_maximal(semigroup, F, sup, cfg.q)
        constant = lp_norm(semigroup.space, field, cfg.p) / lpq_norm(semigroup.space, F, cfg.p, cfg.q)
        result = TrialResult(
            k * cfg.trials + i, constant, bound, constant <= bound, {"components": components, "states": size}
        )
        witness = {
            "trial": result.trial,
            "constant": constant,
            "components": components,
            "generator": _generator_of(semigroup),
            "F": F,
        }
        return _Outcome(result, witness)

    outcomes = _run(cfg, trial, cases)
    worst = _worst_by_length(outcomes)
    slope = _growth_slope(worst)
    summary = {"worst_by_length": {str(n): v for n, v in worst.items()}, "slope": slope, "slope_tol": cfg.slope_tol}
    return _finish(suite, cfg, outcomes, bound, slope <= cfg.slope_tol, started, summary, notes=[SOUNDNESS_NOTE])


def verify_banach_hds(cfg: TrialConfig) -> VerificationReport:
    """
    Weak and strong constants of the ℓ^q-valued maximal function
    sup_α ‖A_α F‖_{ℓ^q}
    """
    started = time.perf_counter()
    sup = alpha_sup(cfg)
    p_bound = strong_bound(cfg.p)

    def trial(i: int) -> _Outcome:
        rng = _rng(cfg, i)
        size = int(rng.choice(cfg.state_sizes))
        components = int(rng.choice(cfg.sequence_lengths))
        semigroup = _finite_semigroup(cfg, rng, size)
        F = random_vector_field(rng, size, components)
        space = semigroup.space
        norm_first = banach_maximal(semigroup, F, sup, cfg.q)
        _, sup_first = vector_semigroup_maximal(semigroup, F, sup, cfg.q)
        ordered = bool(np.all(norm_first <= sup_first + 1e-12))
        weak = weak_constant(space, norm_first, lpq_norm(space, F, 1, cfg.q))
        strong = lp_norm(space, norm_first, cfg.p) / lpq_norm(space, F, cfg.p, cfg.q)
        passed = weak <= WEAK_BOUND and strong <= p_bound and ordered
        extra = {"components": components, "states": size, "strong": strong, "ordered": ordered}
        witness = {
            "trial": i,
            "constant": weak,
            "components": components,
            "generator": _generator_of(semigroup),
            "F": F,
        }
        return _Outcome(TrialResult(i, weak, WEAK_BOUND, passed, extra), witness)

    outcomes = _run(cfg, trial, range(cfg.trials))
    summary = {
        "strong_bound": p_bound,
        "strong_worst": max(o.result.extra["strong"] for o in outcomes),
        "ordered": all(o.result.extra["ordered"] for o in outcomes),
    }
    return _finish("verify-banach-hds", cfg, outcomes, WEAK_BOUND, True, started, summary, notes=[SOUNDNESS_NOTE])


FAMILIES = ("gaussian", "indicator", "bumps")


def sample_function(rng: np.random.Generator, grid: WeightedGrid, family: str) -> Array:
    """
    Random nonnegative function from a family, negligible outside the inner
    half of the box
    """
    L = grid.half_width
    d = grid.dimension
    center = rng.uniform(-L / 4, L / 4, size=d)
    amplitude = rng.uniform(0.5, 2.0)
    offset = grid.points - center
    distance = np.sqrt(np.sum(offset**2, axis=-1))
    match family:
        case "gaussian":
            width = rng.uniform(0.3, L / 16)
            return amplitude * np.exp(-(distance**2) / (2 * width**2))
        case "indicator":
            radius = rng.uniform(0.5, L / 8)
            return amplitude * (distance <= radius).astype(float)
        case "bumps":
            res = np.zeros(grid.shape)
            for _ in range(3):
                shift = rng.uniform(-L / 8, L / 8, size=d)
                width = rng.uniform(0.2, L / 20)
                r = np.sqrt(np.sum((offset - shift) ** 2, axis=-1))
                res += rng.uniform(0.2, 1.0) * np.exp(-(r**2) / (2 * width**2))
            return amplitude * res
        case _:
            raise ValueError(f"unknown test function family {family!r}")


def sample_field(rng: np.random.Generator, grid: WeightedGrid, components: int) -> Array:
    return np.stack([sample_function(rng, grid, FAMILIES[int(rng.integers(len(FAMILIES)))]) for _ in range(components)])


def _baseline_key(suite: str, cfg: TrialConfig, kappa: Sequence[float] = ()) -> str:
    key = f"{suite}:p={cfg.p:g}:q={cfg.q:g}:d={cfg.dimension}"
    if kappa:
        key += ":kappa=" + ",".join(f"{k:g}" for k in kappa)
    return key


def _envelope_report(
    suite: str,
    cfg: TrialConfig,
    outcomes: Sequence[_Outcome],
    started: float,
    baselines: Baselines | None,
    key: str,
    extra_summary: dict[str, Any] | None = None,
    extra_pass: bool = True,
) -> VerificationReport:
    worst = _worst_by_length(outcomes)
    slope = _growth_slope(worst)
    overall = max(worst.values())
    finite = all(math.isfinite(o.result.constant) for o in outcomes)
    baseline_ok = baselines.check(key, overall, cfg.baseline_rtol) if baselines else True
    summary: dict[str, Any] = {
        "worst_by_length": {str(n): v for n, v in worst.items()},
        "slope": slope,
        "slope_tol": cfg.slope_tol,
        "baseline_key": key,
        "baseline": baselines.get(key) if baselines else None,
    }
    summary.update(extra_summary or {})
    passed = finite and slope <= cfg.slope_tol and baseline_ok and extra_pass
    return _finish(suite, cfg, outcomes, None, passed, started, summary, notes=[SOUNDNESS_NOTE])


def _grid_cases(cfg: TrialConfig) -> list[tuple[int, int, int]]:
    return [(k, n, i) for k, n in enumerate(cfg.sequence_lengths) for i in range(cfg.grid_trials)]


def verify_fefferman_stein(cfg: TrialConfig, baselines: Baselines | None = None) -> VerificationReport:
    """
    Empirical L^p(ℓ^q) and weak L¹(ℓ^q) constants of the componentwise
    Hardy-Littlewood maximal function
    """
    suite = "verify-fs"
    if not cfg.p > 1:
        raise HypothesisError(f"{suite} requires p > 1, got p={cfg.p:g}")
    started = time.perf_counter()
    grid = cfg.grid(kappa=(0.0,) * cfg.dimension)
    rsup = radius_sup(cfg)

    def trial(case: tuple[int, int, int]) -> _Outcome:
        k, components, i = case
        rng = _rng(cfg, components, i)
        F = sample_field(rng, grid, components)
        _, field = fefferman_stein(grid, F, rsup, cfg.q)
        constant = lp_norm(grid, field, cfg.p) / lpq_norm(grid, F, cfg.p, cfg.q)
        weak = weak_constant(grid, field, lpq_norm(grid, F, 1, cfg.q))
        trial_index = k * cfg.grid_trials + i
        result = TrialResult(
            trial_index, constant, None, math.isfinite(constant), {"components": components, "weak": weak}
        )
        witness = {
            "trial": trial_index,
            "constant": constant,
            "components": components,
            "seed": [cfg.seed, components, i],
        }
        return _Outcome(result, witness)

    outcomes = _run(cfg, trial, _grid_cases(cfg))
    weak_worst = max(o.result.extra["weak"] for o in outcomes)
    return _envelope_report(
        suite, cfg, outcomes, started, baselines, _baseline_key(suite, cfg), {"weak_worst": weak_worst}
    )


def verify_dunkl_fs(cfg: TrialConfig, baselines: Baselines | None = None) -> VerificationReport:
    """
    Empirical L^p_κ(ℓ^q) constants of the componentwise Dunkl heat maximal
    function and, if enabled, of the Dunkl maximal function through
    translations
    """
    suite = "verify-dunkl-fs"
    _require_p_le_q(suite, cfg)
    started = time.perf_counter()
    grid = cfg.grid()
    rs = grid.root_system
    collapse = rs.is_trivial
    semigroup = DunklHeatSemigroup(grid, TimeQuadrature(cfg.substeps))
    tsup = time_sup(cfg, semigroup)
    rsup = radius_sup(cfg)
    sgrid = SpectralGrid.from_grid(grid)
    euclidean = HeatSemigroup(grid, TimeQuadrature(cfg.substeps)) if collapse else None

    def constant_of(field: Array, F: Array) -> float:
        return lp_norm(grid, field, cfg.p) / lpq_norm(grid, F, cfg.p, cfg.q)

    def trial(case: tuple[int, int, int]) -> _Outcome:
        k, components, i = case
        rng = _rng(cfg, components, i)
        F = sample_field(rng, grid, components)
        heat = dunkl_heat_maximal(semigroup, F, tsup)
        heat_constant = constant_of(pointwise_lq(heat, cfg.q), F)
        extra: dict[str, Any] = {"components": components}
        passed = math.isfinite(heat_constant)
        if cfg.direct:
            direct = np.stack([dunkl_maximal_direct(grid, sgrid, rs, f, rsup) for f in F])
            direct_constant = constant_of(pointwise_lq(direct, cfg.q), F)
            extra["direct"] = direct_constant
            passed = passed and math.isfinite(direct_constant)
            if collapse:
                _, hl = fefferman_stein(grid, F, rsup, cfg.q)
                hl_constant = constant_of(hl, F)
                extra["hardy_littlewood"] = hl_constant
                extra["collapse_direct"] = abs(direct_constant - hl_constant) / hl_constant
                passed = passed and extra["collapse_direct"] <= cfg.tol_collapse
        if euclidean is not None:
            _, eh = vector_semigroup_maximal(euclidean, F, tsup, cfg.q)
            eh_constant = constant_of(eh, F)
            extra["collapse_heat"] = abs(heat_constant - eh_constant) / eh_constant
            passed = passed and extra["collapse_heat"] <= cfg.tol_collapse
        trial_index = k * cfg.grid_trials + i
        witness = {
            "trial": trial_index,
            "constant": heat_constant,
            "components": components,
            "seed": [cfg.seed, components, i],
        }
        return _Outcome(TrialResult(trial_index, heat_constant, None, passed, extra), witness)

    outcomes = _run(cfg, trial, _grid_cases(cfg))
    summary: dict[str, Any] = {"kappa": list(rs.axis_kappa)}
    extra_pass = True
    if cfg.direct:
        worst_direct = _worst_by_length(outcomes, "direct")
        summary["direct_worst_by_length"] = {str(n): v for n, v in worst_direct.items()}
        summary["direct_slope"] = _growth_slope(worst_direct)
        extra_pass = summary["direct_slope"] <= cfg.slope_tol
    return _envelope_report(
        suite, cfg, outcomes, started, baselines, _baseline_key(suite, cfg, rs.axis_kappa), summary, extra_pass
    )


def _max_ratio(numerator: Array, denominator: Array, mask: Array) -> float:
    """
    Largest numerator/denominator over the masked nodes where the
    denominator is not negligible
    """
    significant = mask & (denominator > 1e-8 * denominator.max())
    return float(np.max(numerator[significant] / denominator[significant]))


def check_pointwise_domination(cfg: TrialConfig, baselines: Baselines | None = None) -> VerificationReport:
    """
    Ratios between ball maximal functions and heat maximal functions, on a
    grid and on its refinement
    """
    suite = "check-domination"
    started = time.perf_counter()
    kappa = cfg.grid_kappa
    dunkl = any(kappa)
    rsup = radius_sup(cfg)

    class Setup(NamedTuple):
        grid: WeightedGrid
        heat: HeatSemigroup
        dunkl_grid: WeightedGrid
        dunkl_heat: DunklHeatSemigroup

    setups = []
    for points in (cfg.points, 2 * cfg.points):
        grid = cfg.grid(kappa=(0.0,) * cfg.dimension, points=points)
        dunkl_grid = cfg.grid(points=points)
        setups.append(
            Setup(
                grid,
                HeatSemigroup(grid, TimeQuadrature(cfg.substeps)),
                dunkl_grid,
                DunklHeatSemigroup(dunkl_grid, TimeQuadrature(cfg.substeps)),
            )
        )

    def ratios(setup: Setup, family: str, i: int) -> tuple[float, float | None]:
        # Same random parameters on both resolutions
        rng = _rng(cfg, FAMILIES.index(family), i)
        f = sample_function(rng, setup.grid, family)
        mask = setup.grid.interior(0.5)
        tsup = time_sup(cfg, setup.heat)
        hl = hardy_littlewood(setup.grid, f, rsup)
        mh = semigroup_maximal(setup.heat, f, tsup)
        euclidean = _max_ratio(hl, mh, mask)
        if not dunkl:
            return euclidean, None
        rng = _rng(cfg, FAMILIES.index(family), i)
        g = sample_function(rng, setup.dunkl_grid, family)
        sgrid = SpectralGrid.from_grid(setup.dunkl_grid)
        direct = dunkl_maximal_direct(setup.dunkl_grid, sgrid, setup.dunkl_grid.root_system, g, rsup)
        heat = dunkl_heat_maximal(setup.dunkl_heat, g, time_sup(cfg, setup.dunkl_heat))
        return euclidean, _max_ratio(direct, heat, mask)

    cases = [(family, i) for family in FAMILIES for i in range(cfg.grid_trials)]

    def trial(case: tuple[str, int]) -> _Outcome:
        family, i = case
        coarse, coarse_dunkl = ratios(setups[0], family, i)
        fine, fine_dunkl = ratios(setups[1], family, i)
        index = cases.index(case)
        extra: dict[str, Any] = {"family": family, "coarse": coarse}
        finite = math.isfinite(fine) and math.isfinite(coarse)
        if fine_dunkl is not None and coarse_dunkl is not None:
            extra["dunkl"] = fine_dunkl
            extra["dunkl_coarse"] = coarse_dunkl
            finite = finite and math.isfinite(fine_dunkl) and math.isfinite(coarse_dunkl)
        witness = {"trial": index, "constant": fine, "family": family, "seed": [cfg.seed, FAMILIES.index(family), i]}
        return _Outcome(TrialResult(index, fine, None, finite, extra), witness)

    outcomes = _run(cfg, trial, cases)

    def change(fine: float, coarse: float) -> float:
        return abs(fine - coarse) / coarse

    worst_fine = max(o.result.constant for o in outcomes)
    worst_coarse = max(o.result.extra["coarse"] for o in outcomes)
    summary: dict[str, Any] = {"refinement_change": change(worst_fine, worst_coarse), "tol_refine": cfg.tol_refine}
    passed = summary["refinement_change"] <= cfg.tol_refine
    key = f"{suite}:d={cfg.dimension}"
    if baselines is not None:
        passed = baselines.check(key, worst_fine, cfg.baseline_rtol) and passed
    if dunkl:
        worst_dunkl = max(o.result.extra["dunkl"] for o in outcomes)
        worst_dunkl_coarse = max(o.result.extra["dunkl_coarse"] for o in outcomes)
        summary["dunkl_worst"] = worst_dunkl
        summary["dunkl_refinement_change"] = change(worst_dunkl, worst_dunkl_coarse)
        passed = passed and summary["dunkl_refinement_change"] <= cfg.tol_refine
        dunkl_key = key + ":kappa=" + ",".join(f"{k:g}" for k in kappa)
        if baselines is not None:
            passed = baselines.check(dunkl_key, worst_dunkl, cfg.baseline_rtol) and passed
        summary["dunkl_baseline_key"] = dunkl_key
    summary["baseline_key"] = key
    return _finish(suite, cfg, outcomes, None, passed, started, summary)


def explore_conjecture(cfg: TrialConfig) -> VerificationReport:
    """
    Distribution of the weak L¹(ℓ^q) constant of the componentwise maximal
    function of random finite semigroups.

    This only records what is observed: it passes whenever all constants are
    finite.
    """
    suite = "explore-conjecture"
    if not cfg.q > 1:
        raise HypothesisError(f"{suite} requires q > 1, got q={cfg.q:g}")
    started = time.perf_counter()
    sup = alpha_sup(cfg)

    def constant_of(semigroup: ContractionSemigroup, F: Array) -> float:
        _, field = vector_semigroup_maximal(semigroup, F, sup, cfg.q)
        return weak_constant(semigroup.space, field, lpq_norm(semigroup.space, F, 1, cfg.q))

    def trial(i: int) -> _Outcome:
        rng = _rng(cfg, i)
        size = int(rng.choice(cfg.state_sizes))
        components = int(rng.choice(cfg.sequence_lengths))
        semigroup = _finite_semigroup(cfg, rng, size)
        F = random_vector_field(rng, size, components)
        constant = constant_of(semigroup, F)
        extra: dict[str, Any] = {"components": components, "states": size}
        # Repeating a component scales both sides by the same factor
        first = constant_of(semigroup, F[:1])
        duplicated = constant_of(semigroup, np.repeat(F[:1], max(components, 2), axis=0))
        extra["single"] = first
        extra["duplicate_defect"] = abs(duplicated - first) / first
        witness = {
            "trial": i,
            "constant": constant,
            "components": components,
            "generator": _generator_of(semigroup),
            "F": F,
        }
        return _Outcome(TrialResult(i, constant, None, math.isfinite(constant), extra), witness)

    outcomes = _run(cfg, trial, range(cfg.trials))
    constants = np.array([o.result.constant for o in outcomes])
    quantiles = (0.0, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0)
    summary = {
        "mean": float(constants.mean()),
        "quantiles": {repr(q): float(np.quantile(constants, q)) for q in quantiles},
        "single_component_max": max(o.result.extra["single"] for o in outcomes),
        "single_component_bound": WEAK_BOUND,
        "duplicate_defect_max": max(o.result.extra["duplicate_defect"] for o in outcomes),
    }
    top = sorted(outcomes, key=lambda o: (-o.result.constant, o.result.trial))[:5]
    return _finish(suite, cfg, outcomes, None, True, started, summary, witnesses=[o.witness for o in top])


def _transform_test_function(grid: WeightedGrid) -> tuple[Array, Array]:
    """
    Even and odd smooth test functions decaying well inside the box
    """
    r2 = grid.radius**2
    even = np.exp(-r2 / 2)
    odd = grid.coordinates[0] * np.exp(-r2 / 2)
    return even, odd


#: Mollified ball translated by transform-check
TRANSLATED_RADIUS = 1.0
TRANSLATED_EDGE = 0.2
TRANSLATED_SHIFT = 0.5


def transform_check(cfg: TrialConfig) -> VerificationReport:
    """
    Plancherel identity, inversion and parity of the Dunkl transform for each
    multiplicity in ``kappas``.

    The most negative value of a translated mollified ball is recorded but
    does not affect the outcome.
    """
    started = time.perf_counter()

    def trial(index: int) -> _Outcome:
        kappa = cfg.kappas[index]
        grid = cfg.grid(kappa=(kappa,) * cfg.dimension)
        sgrid = SpectralGrid.from_grid(grid)
        transform = transform_for(grid, sgrid)
        even, odd = _transform_test_function(grid)
        f = even + odd
        decays = check_decay(grid, f)
        Ff = transform.transform(f)
        decays = check_decay(sgrid, Ff) and decays
        norm = lp_norm(grid, f, 2)
        plancherel = abs(lp_norm(sgrid, Ff, 2) - norm) / norm
        roundtrip = lp_norm(grid, transform.inverse_transform(Ff) - f, 2) / norm
        even_residue = float(np.max(np.abs(transform.transform(even).imag)))
        odd_residue = float(np.max(np.abs(transform.transform(odd).real)))
        # Translates of a nonnegative function need not be nonnegative when κ > 0
        ball = ball_indicator(grid, TRANSLATED_RADIUS, mollify=TRANSLATED_EDGE)
        shift = (TRANSLATED_SHIFT,) * cfg.dimension
        translated = negativity_witness(grid, dunkl_translate(grid, sgrid, grid.root_system, shift, ball))
        constant = max(plancherel, roundtrip)
        extra = {
            "kappa": kappa,
            "plancherel": plancherel,
            "roundtrip": roundtrip,
            "even_imaginary": even_residue,
            "odd_real": odd_residue,
            "decay": decays,
            "translation_min": translated.value,
            "translation_min_at": list(translated.point),
        }
        passed = constant <= cfg.tol_transform
        witness = {"trial": index, "kappa": kappa}
        return _Outcome(TrialResult(index, constant, cfg.tol_transform, passed, extra), witness)

    outcomes = _run(cfg, trial, range(len(cfg.kappas)))
    return _finish("transform-check", cfg, outcomes, cfg.tol_transform, True, started)


def heat_equation_residual(semigroup: DunklHeatSemigroup, f: Array, t: float, delta: float) -> float:
    """
    Relative residual of (H_{t+δ}f - H_t f)/δ = Δ_κ H_t f on the inner half
    of the box
    """
    grid = semigroup.grid
    u = semigroup.apply(t, f)
    lhs = (semigroup.apply(t + delta, f) - u) / delta
    rhs = dunkl_laplacian(grid, grid.root_system, u)
    inner = grid.interior(0.5)
    return float(np.linalg.norm((lhs - rhs)[inner]) / np.linalg.norm(rhs[inner]))


def heat_check(cfg: TrialConfig) -> VerificationReport:
    """
    Mass, semigroup law, contraction, positivity and heat equation of the Dunkl
    heat semigroup for each multiplicity in ``kappas``
    """
    started = time.perf_counter()

    def trial(index: int) -> _Outcome:
        kappa = cfg.kappas[index]
        # The weight kink at 0 costs O(h²/t) of mass: keep h small and t away from 0
        points = max(cfg.points, 512)
        grid = cfg.grid(kappa=(kappa,) * cfg.dimension, points=points)
        semigroup = DunklHeatSemigroup(grid, TimeQuadrature(cfg.substeps))
        top = semigroup.max_time
        ts = [t for t in (0.25, 0.5, 1.0) if t <= top / 2]
        rng = _rng(cfg, index)
        fs = [sample_function(rng, grid, "gaussian"), sample_function(rng, grid, "bumps")]
        mass = check_mass(semigroup, ts, tol=cfg.tol_mass)
        law = check_semigroup_law(semigroup, [(s, t) for s in ts for t in ts if s + t <= top], fs, cfg.tol_semigroup)
        contraction = check_contraction(semigroup, ts, fs, cfg.tol_contract)
        positivity = check_positivity(semigroup, ts, fs)

        # Residuals at h, h/2, h/4 with δ refined alongside
        residuals = [heat_equation_residual(semigroup, fs[0], 0.5, 1e-3)]
        for level in (1, 2):
            fine_grid = cfg.grid(kappa=(kappa,) * cfg.dimension, points=points * 2**level)
            fine_semigroup = DunklHeatSemigroup(fine_grid, TimeQuadrature(cfg.substeps))
            fine_f = sample_function(_rng(cfg, index), fine_grid, "gaussian")
            residuals.append(heat_equation_residual(fine_semigroup, fine_f, 0.5, 1e-3 / 2**level))
        trend = residuals[0] > residuals[1] > residuals[2]

        constant = max(1 - mass.min_mass, law.defect, contraction.l1_ratio - 1, contraction.linf_ratio - 1, 0.0)
        passed = mass.passed and law.passed and contraction.passed and positivity.passed and trend
        extra = {
            "kappa": kappa,
            "mass_min": mass.min_mass,
            "mass_max": mass.max_mass,
            "semigroup_defect": law.defect,
            "l1_ratio": contraction.l1_ratio,
            "linf_ratio": contraction.linf_ratio,
            "min_value": positivity.min_value,
            "residuals": residuals,
        }
        tol = max(cfg.tol_mass, cfg.tol_semigroup, cfg.tol_contract)
        return _Outcome(TrialResult(index, constant, tol, passed, extra), {"trial": index, "kappa": kappa})

    outcomes = _run(cfg, trial, range(len(cfg.kappas)))
    tol = max(cfg.tol_mass, cfg.tol_semigroup, cfg.tol_contract)
    return _finish("heat-check", cfg, outcomes, tol, True, started)


#: Suites runnable by name, with whether they take a Baselines argument
SUITES: dict[str, tuple[Callable[..., VerificationReport], bool]] = {
    "verify-scalar-hds": (verify_scalar_hds, False),
    "verify-vector-hds": (verify_vector_hds, False),
    "verify-banach-hds": (verify_banach_hds, False),
    "verify-fs": (verify_fefferman_stein, True),
    "verify-dunkl-fs": (verify_dunkl_fs, True),
    "check-domination": (check_pointwise_domination, True),
    "explore-conjecture": (explore_conjecture, False),
    "transform-check": (transform_check, False),
    "heat-check": (heat_check, False),
}


def run_suite(name: str, cfg: TrialConfig, baselines: Baselines | None = None) -> VerificationReport:
    try:
        fn, uses_baselines = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}") from None
    if uses_baselines:
        return fn(cfg, baselines)
    return fn(cfg)


def replay_config(path: Path) -> TrialConfig:
    """
    Configuration echoed in a JSON report
    """
    return TrialConfig.from_dict(load_report(path)["config"])


def freeze_baselines(report: VerificationReport, baselines: Baselines) -> list[str]:
    """
    Record the worst cases of a report as the new baselines, returning the
    keys that were set
    """
    frozen: list[str] = []
    key = report.summary.get("baseline_key")
    if key is not None:
        baselines.freeze(key, report.worst_case)
        frozen.append(key)
    dunkl_key = report.summary.get("dunkl_baseline_key")
    if dunkl_key is not None:
        baselines.freeze(dunkl_key, report.summary["dunkl_worst"])
        frozen.append(dunkl_key)
    return frozen
