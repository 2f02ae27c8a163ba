"""
Maximal operators: semigroup averages and their maximal functions,
Hardy-Littlewood and Fefferman-Stein operators, and the Dunkl maximal
operators.

Suprema run over a finite SupGrid, so every computed maximal function is a
lower bound of the true one.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
import scipy.signal

from .domain import (
    Array,
    GridFunction,
    RootSystem,
    VectorField,
    WeightedGrid,
    ball_indicator,
    ball_measure,
    pointwise_lq,
)
from .dunkl import SpectralGrid, transform_for
from .semigroups import ContractionSemigroup, DunklHeatSemigroup

log = logging.getLogger(__name__)


class SupKind(enum.Enum):
    RADIUS = "radius"
    TIME = "time"


@dataclass(frozen=True)
class SupGrid:
    """
    Geometric nodes start·ratio^k, k = 0..count-1, plus optionally the
    analytic endpoint (α → 0 or r → 0), whose value is |f|
    """

    kind: SupKind
    start: float
    ratio: float
    count: int
    include_endpoint: bool = True

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ValueError(f"count must be nonnegative, got {self.count}")
        if self.count == 0 and not self.include_endpoint:
            raise ValueError("a sup grid needs at least one node")
        if self.count > 0:
            if not self.start > 0:
                raise ValueError(f"start must be positive, got {self.start}")
            if not self.ratio > 1:
                raise ValueError(f"ratio must be greater than 1, got {self.ratio}")

    @classmethod
    def geometric(cls, kind: SupKind, start: float, stop: float, ratio: float) -> SupGrid:
        """
        Nodes from start up to stop (inclusive, within rounding)
        """
        if not start > 0 or not stop >= start:
            raise ValueError(f"invalid node range [{start}, {stop}]")
        count = int(math.floor(math.log(stop / start) / math.log(ratio) + 1e-9)) + 1
        return cls(kind, start, ratio, count)

    @classmethod
    def endpoint_only(cls, kind: SupKind) -> SupGrid:
        return cls(kind, 1.0, 2.0, 0)

    @property
    def nodes(self) -> list[float]:
        return [self.start * self.ratio**k for k in range(self.count)]

    def capped(self, limit: float) -> SupGrid:
        """
        Drop the nodes above limit
        """
        nodes = self.nodes
        kept = sum(1 for n in nodes if n <= limit * (1 + 1e-12))
        if kept < len(nodes):
            log.warning("%s sup grid truncated at %g: %d of %d nodes kept", self.kind.value, limit, kept, len(nodes))
        if kept == 0 and not self.include_endpoint:
            raise ValueError(f"no {self.kind.value} node below {limit}")
        return replace(self, count=kept)

    def refine(self) -> SupGrid:
        """
        Grid over the same range containing all current nodes and their
        geometric midpoints
        """
        return replace(self, ratio=math.sqrt(self.ratio), count=max(2 * self.count - 1, 0))


class MaximalResult(NamedTuple):
    values: GridFunction
    #: Estimated relative error of the time quadrature, 0 when exact
    error: float


def _endpoint(f: GridFunction, sup: SupGrid) -> GridFunction:
    if sup.include_endpoint:
        return np.abs(f)
    return np.zeros(np.shape(f))


def semigroup_average(semigroup: ContractionSemigroup, alpha: float, f: GridFunction) -> GridFunction:
    """
    Compute A_α f = (1/α)∫₀^α T_t f dt, with A₀ f = f
    """
    if not alpha >= 0:
        raise ValueError(f"α must be nonnegative, got {alpha}")
    if alpha == 0:
        return np.array(f, copy=True)
    return semigroup.integrate(alpha, f) / alpha


def maximal_averages(semigroup: ContractionSemigroup, f: GridFunction, sup: SupGrid) -> MaximalResult:
    """
    Pointwise max of |f| and |A_α f| over the sup grid, with the time
    quadrature error
    """
    res = _endpoint(f, sup)
    if not sup.count:
        return MaximalResult(res, 0.0)
    averages = semigroup.averages(sup.nodes, f)
    for values in averages.values:
        res = np.maximum(res, np.abs(values))
    return MaximalResult(res, averages.error)


def semigroup_maximal(semigroup: ContractionSemigroup, f: GridFunction, sup: SupGrid) -> GridFunction:
    """
    Compute M_T f = sup_α |A_α f| over the sup grid
    """
    return maximal_averages(semigroup, f, sup).values


def vector_semigroup_maximal(
    semigroup: ContractionSemigroup, F: VectorField, sup: SupGrid, q: float
) -> tuple[VectorField, Array]:
    """
    Componentwise M_T, and the ℓ^q norm of the result at each node
    """
    if len(F) == 0:
        raise ValueError("a vector field needs at least one component")
    components = semigroup_maximal(semigroup, np.asarray(F), sup)
    return components, pointwise_lq(components, q)


def banach_maximal(semigroup: ContractionSemigroup, F: VectorField, sup: SupGrid, q: float) -> Array:
    """
    Compute sup_α ‖A_α F‖_{ℓ^q}, the norm taken before the supremum
    """
    if len(F) == 0:
        raise ValueError("a vector field needs at least one component")
    F = np.asarray(F)
    res = pointwise_lq(F, q) if sup.include_endpoint else np.zeros(F.shape[1:])
    if not sup.count:
        return res
    for values in semigroup.averages(sup.nodes, F).values:
        res = np.maximum(res, pointwise_lq(values, q))
    return res


def _ball_mask(grid: WeightedGrid, r: float) -> Array:
    """
    Discrete ball of radius r around the central node, as a stencil
    """
    m = int(math.floor(r / grid.h + 1e-9))
    offsets = np.arange(-m, m + 1) * grid.h
    coords = np.meshgrid(*([offsets] * grid.dimension), indexing="ij")
    return (np.sqrt(sum(c**2 for c in coords)) <= r * (1 + 1e-12)).astype(float)


def hardy_littlewood(grid: WeightedGrid, f: GridFunction, rsup: SupGrid) -> GridFunction:
    """
    Centered Hardy-Littlewood maximal function on a κ = 0 grid.

    f vanishes outside the box; radii above L/2 are dropped.
    """
    if not grid.root_system.is_trivial:
        raise ValueError("the Hardy-Littlewood maximal function needs a grid with κ = 0")
    f = np.abs(np.asarray(f, dtype=float))
    rsup = rsup.capped(grid.half_width / 2)
    res = _endpoint(f, rsup)
    for r in rsup.nodes:
        mask = _ball_mask(grid, r)
        average = scipy.signal.fftconvolve(f, mask, mode="same") / mask.sum()
        res = np.maximum(res, average)
    return res


def fefferman_stein(grid: WeightedGrid, F: VectorField, rsup: SupGrid, q: float) -> tuple[VectorField, Array]:
    """
    Componentwise Hardy-Littlewood maximal function and its ℓ^q norm field
    """
    if len(F) == 0:
        raise ValueError("a vector field needs at least one component")
    components = np.stack([hardy_littlewood(grid, f, rsup) for f in F])
    return components, pointwise_lq(components, q)


def dunkl_maximal_direct(
    grid: WeightedGrid,
    sgrid: SpectralGrid,
    rs: RootSystem,
    f: GridFunction,
    rsup: SupGrid,
    mollify: float | None = None,
) -> GridFunction:
    """
    Compute sup_r |∫ f(y) τ_x χ_{B_r}(-y) dμ_κ(y)| / μ_κ(B_r).

    The integral is c_κ⁻¹ F⁻¹(F f · F χ_{B_r})(x), computed for all radii at
    once.
    """
    if grid.root_system != rs:
        raise ValueError("the grid measure was built for a different root system")
    f = np.asarray(f, dtype=float)
    rsup = rsup.capped(grid.half_width / 2)
    res = _endpoint(f, rsup)
    if not rsup.count:
        return res
    radii = rsup.nodes
    if mollify is None:
        measures = np.array([ball_measure(grid, r) for r in radii])
    else:
        measures = np.array([np.sum(grid.weights * ball_indicator(grid, r, mollify)) for r in radii])
    empty = measures <= 0
    if empty.any():
        log.warning(
            "%d of %d radii below the smallest node radius %g skipped", int(empty.sum()), len(radii), grid.radius.min()
        )
        radii = [r for r, e in zip(radii, empty) if not e]
        measures = measures[~empty]
        if not radii:
            return res
    measures = measures.reshape((-1,) + (1,) * grid.dimension)
    averages = transform_for(grid, sgrid).convolve_balls(f, radii, mollify) / measures
    return np.maximum(res, np.abs(averages).max(axis=0))


def dunkl_heat_maximal(semigroup: DunklHeatSemigroup, f: GridFunction, sup: SupGrid) -> GridFunction:
    """
    Compute sup_α (1/α)∫₀^α H_t|f| dt
    """
    return semigroup_maximal(semigroup, np.abs(np.asarray(f)), sup)
