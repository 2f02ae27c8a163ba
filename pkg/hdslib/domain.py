"""
Discretized measure spaces: weighted Euclidean grids and finite measure spaces.

Grid functions are numpy arrays shaped like the space they live on. Vector
fields (finite sequences of grid functions) are arrays with one extra leading
axis indexing the components.
"""

from __future__ import annotations

import enum
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Protocol

import numpy as np
import numpy.typing as npt
import scipy.special

log = logging.getLogger(__name__)

Array = npt.NDArray[np.float64]
# Values on the nodes of a space, real or complex
GridFunction = npt.NDArray[Any]
# Components stacked on a leading axis
VectorField = npt.NDArray[Any]


class TruncationError(ValueError):
    """
    A computation would need values outside of the truncated domain
    """


class RootFamily(enum.Enum):
    TRIVIAL = "trivial"
    RANK1_Z2 = "rank1_Z2"
    PRODUCT_Z2D = "product_Z2d"


def _unit(dimension: int, axis: int, sign: float = 1.0) -> tuple[float, ...]:
    return tuple(sign if i == axis else 0.0 for i in range(dimension))


@dataclass(frozen=True)
class RootSystem:
    """
    Finite reduced root system with a nonnegative multiplicity function.

    Only sign-flip groups are supported: the trivial group (no roots), ℤ₂
    acting on the line, and ℤ₂^d acting on coordinates. All roots are then of
    the form ±e_i, and the reflection σ_α flips the sign of coordinate i.
    """

    family: RootFamily
    dimension: int
    roots: tuple[tuple[float, ...], ...]
    multiplicities: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError(f"dimension must be positive, got {self.dimension}")
        if len(self.roots) != len(self.multiplicities):
            raise ValueError("roots and multiplicities have different lengths")
        for root, kappa in zip(self.roots, self.multiplicities):
            if len(root) != self.dimension:
                raise ValueError(f"root {root} does not have dimension {self.dimension}")
            if not any(root):
                raise ValueError("roots must be nonzero")
            if kappa < 0 or not math.isfinite(kappa):
                raise ValueError(f"multiplicity of {root} must be a nonnegative real, got {kappa}")
            neg = tuple(-c for c in root)
            if neg not in self.roots:
                raise ValueError(f"root system is not closed under negation: {neg} missing")
            if self.multiplicity(neg) != kappa:
                raise ValueError(f"multiplicity is not invariant under {root} -> {neg}")
            self.reflection_axis(root)

        match self.family:
            case RootFamily.TRIVIAL:
                if self.roots:
                    raise ValueError("the trivial root system has no roots")
            case RootFamily.RANK1_Z2:
                if self.dimension != 1 or set(self.roots) != {(1.0,), (-1.0,)}:
                    raise ValueError("rank1_Z2 root systems are {±e₁} on the line")
            case RootFamily.PRODUCT_Z2D:
                expected = {_unit(self.dimension, i, s) for i in range(self.dimension) for s in (1.0, -1.0)}
                if set(self.roots) != expected:
                    raise ValueError(f"product_Z2d root systems are {{±e_1, …, ±e_{self.dimension}}}")

    @classmethod
    def trivial(cls, dimension: int) -> RootSystem:
        return cls(RootFamily.TRIVIAL, dimension, (), ())

    @classmethod
    def rank1(cls, kappa: float) -> RootSystem:
        return cls(RootFamily.RANK1_Z2, 1, ((1.0,), (-1.0,)), (kappa, kappa))

    @classmethod
    def product(cls, kappas: Sequence[float]) -> RootSystem:
        d = len(kappas)
        roots: list[tuple[float, ...]] = []
        mults: list[float] = []
        for i, kappa in enumerate(kappas):
            for sign in (1.0, -1.0):
                roots.append(_unit(d, i, sign))
                mults.append(float(kappa))
        return cls(RootFamily.PRODUCT_Z2D, d, tuple(roots), tuple(mults))

    @classmethod
    def from_kappa(cls, kappas: Sequence[float]) -> RootSystem:
        """
        Build the simplest root system carrying the given per-axis multiplicities
        """
        if not kappas:
            raise ValueError("at least one multiplicity is needed")
        if all(k == 0 for k in kappas):
            return cls.trivial(len(kappas))
        if len(kappas) == 1:
            return cls.rank1(float(kappas[0]))
        return cls.product(kappas)

    def multiplicity(self, root: Sequence[float]) -> float:
        return self.multiplicities[self.roots.index(tuple(root))]

    def reflection_axis(self, root: Sequence[float]) -> int:
        """
        Return the coordinate flipped by the reflection σ_α
        """
        nonzero = [i for i, c in enumerate(root) if c != 0]
        if len(nonzero) != 1 or abs(root[nonzero[0]]) != 1.0:
            raise ValueError(f"only roots of the form ±e_i are supported, got {tuple(root)}")
        return nonzero[0]

    @cached_property
    def axis_kappa(self) -> tuple[float, ...]:
        """
        Multiplicity attached to each coordinate axis (0 where there is no root)
        """
        res = [0.0] * self.dimension
        for root, kappa in zip(self.roots, self.multiplicities):
            res[self.reflection_axis(root)] = kappa
        return tuple(res)

    @property
    def is_trivial(self) -> bool:
        return all(k == 0 for k in self.axis_kappa)


def weight_at(rs: RootSystem, x: Sequence[float] | npt.NDArray[Any]) -> float:
    """
    Evaluate ∏_{α∈R}|⟨x,α⟩|^{κ(α)} at a point
    """
    point = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(point)):
        raise ValueError("weight_at needs a finite point")
    res = 1.0
    for root, kappa in zip(rs.roots, rs.multiplicities):
        # 0.0 ** 0.0 == 1.0
        res *= abs(float(np.dot(point, root))) ** kappa
    return res


def weight_array(rs: RootSystem, points: npt.NDArray[Any]) -> Array:
    """
    Vectorized weight_at over an array of points shaped (..., d)
    """
    res = np.ones(points.shape[:-1])
    for root, kappa in zip(rs.roots, rs.multiplicities):
        res *= np.abs(points @ np.asarray(root)) ** kappa
    return res


def gamma_index(rs: RootSystem) -> float:
    """
    Return γ = ½·Σ_{α∈R} κ(α): the weight is homogeneous of degree 2γ
    """
    return 0.5 * sum(rs.multiplicities)


class MeasureSpace(Protocol):
    @property
    def shape(self) -> tuple[int, ...]: ...

    @property
    def weights(self) -> Array: ...


@dataclass(frozen=True)
class FiniteMeasureSpace:
    """
    Finite set of points with positive masses
    """

    masses: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.masses:
            raise ValueError("a finite measure space needs at least one point")
        if any(m <= 0 or not math.isfinite(m) for m in self.masses):
            raise ValueError("all masses must be positive and finite")

    @classmethod
    def counting(cls, size: int) -> FiniteMeasureSpace:
        return cls((1.0,) * size)

    @property
    def size(self) -> int:
        return len(self.masses)

    @property
    def shape(self) -> tuple[int, ...]:
        return (len(self.masses),)

    @cached_property
    def weights(self) -> Array:
        return np.asarray(self.masses, dtype=float)


@dataclass(frozen=True)
class WeightedGrid:
    """
    Truncated midpoint grid on [-L, L]^d carrying the measure μ_κ.

    Nodes sit at x_j = -L + (j + ½)h with h = 2L/N, so no node lies on a
    reflection hyperplane and the node set is invariant under sign flips.
    """

    root_system: RootSystem
    half_width: float
    points_per_axis: int

    def __post_init__(self) -> None:
        if not self.half_width > 0 or not math.isfinite(self.half_width):
            raise ValueError(f"half_width must be a positive real, got {self.half_width}")
        if self.points_per_axis < 2 or self.points_per_axis % 2:
            raise ValueError(f"points_per_axis must be a positive even integer, got {self.points_per_axis}")

    @classmethod
    def build(cls, kappas: Sequence[float], half_width: float, points_per_axis: int) -> WeightedGrid:
        return cls(RootSystem.from_kappa(kappas), half_width, points_per_axis)

    @property
    def dimension(self) -> int:
        return self.root_system.dimension

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dimension

    @property
    def h(self) -> float:
        return 2 * self.half_width / self.points_per_axis

    @cached_property
    def axis_nodes(self) -> Array:
        return -self.half_width + (np.arange(self.points_per_axis) + 0.5) * self.h

    def axis_weights(self, axis: int) -> Array:
        """
        One-dimensional quadrature weights |x|^{2κ_i}·h along one axis
        """
        return np.abs(self.axis_nodes) ** (2 * self.root_system.axis_kappa[axis]) * self.h

    @cached_property
    def coordinates(self) -> tuple[Array, ...]:
        return tuple(np.meshgrid(*([self.axis_nodes] * self.dimension), indexing="ij"))

    @cached_property
    def points(self) -> Array:
        """
        Node coordinates shaped (*shape, d)
        """
        return np.stack(self.coordinates, axis=-1)

    @cached_property
    def radius(self) -> Array:
        return np.sqrt(sum(c**2 for c in self.coordinates))

    @cached_property
    def weights(self) -> Array:
        return weight_array(self.root_system, self.points) * self.h**self.dimension

    def interior(self, fraction: float = 0.5) -> npt.NDArray[np.bool_]:
        """
        Mask of the nodes inside [-fraction·L, fraction·L]^d
        """
        mask = np.ones(self.shape, dtype=bool)
        for c in self.coordinates:
            mask &= np.abs(c) <= fraction * self.half_width
        return mask


def contract_axes(f: npt.NDArray[Any], matrices: Sequence[npt.NDArray[Any]]) -> npt.NDArray[Any]:
    """
    Apply one matrix along each of the trailing len(matrices) axes of f.

    Leading axes of f are batch axes (vector field components, test functions).
    """
    d = len(matrices)
    res = f
    for i, matrix in enumerate(matrices):
        axis = f.ndim - d + i
        res = np.moveaxis(np.moveaxis(res, axis, -1) @ matrix.T, -1, axis)
    return res


def ball_indicator(grid: WeightedGrid, r: float, mollify: float | None = None) -> Array:
    """
    Indicator of the ball of radius r centered at the origin.

    With mollify=ε the edge is smoothed over a width ε with a complementary
    error function profile.
    """
    if mollify is None:
        return (grid.radius <= r).astype(float)
    return 0.5 * scipy.special.erfc((grid.radius - r) / mollify)


def ball_measure(grid: WeightedGrid, r: float) -> float:
    """
    Quadrature of μ_κ over the ball of radius r centered at the origin
    """
    if r > grid.half_width:
        raise TruncationError(f"ball radius {r} exceeds the half width {grid.half_width} of the grid")
    return float(np.sum(grid.weights[grid.radius <= r]))


def _check_exponent(name: str, p: float) -> None:
    if not p >= 1:
        raise ValueError(f"{name} must be in [1, ∞], got {p}")


def lp_norm(space: MeasureSpace, f: GridFunction, p: float) -> float:
    """
    L^p norm of f with respect to the measure of the space
    """
    _check_exponent("p", p)
    values = np.abs(f)
    if math.isinf(p):
        return float(values.max())
    return float(np.sum(space.weights * values**p) ** (1 / p))


def pointwise_lq(F: VectorField, q: float) -> Array:
    """
    ℓ^q norm across the components of a vector field, node by node
    """
    _check_exponent("q", q)
    if F.shape[0] == 0:
        raise ValueError("a vector field needs at least one component")
    if F.shape[0] == 1:
        return np.asarray(np.abs(F[0]), dtype=float)
    return np.asarray(np.linalg.norm(np.abs(F), ord=q, axis=0), dtype=float)


def lpq_norm(space: MeasureSpace, F: VectorField, p: float, q: float) -> float:
    """
    Mixed L^p(ℓ^q) norm of a vector field
    """
    return lp_norm(space, pointwise_lq(F, q), p)


def distribution(space: MeasureSpace, g: GridFunction, lam: float) -> float:
    """
    Measure of the superlevel set {g > λ}
    """
    if not lam > 0:
        raise ValueError(f"λ must be positive, got {lam}")
    return float(np.sum(space.weights[np.asarray(g) > lam]))


def weak_constant(space: MeasureSpace, g: GridFunction, norm: float) -> float:
    """
    Exact sup_λ λ·m({g > λ}) / norm over λ > 0.

    λ·m({g > λ}) is constant in the measure and increasing in λ between two
    consecutive values of g, so the supremum is max_k v_k·m({g ≥ v_k}) over
    the distinct positive values v_k of g.
    """
    if not norm > 0:
        raise ValueError(f"the normalizing norm must be positive, got {norm}")
    values = np.asarray(g, dtype=float).ravel()
    weights = np.broadcast_to(space.weights, np.shape(g)).ravel()
    order = np.argsort(-values, kind="stable")
    values = values[order]
    cumulative = np.cumsum(weights[order])
    # Last index of each run of equal values
    last = np.flatnonzero(np.append(values[1:] != values[:-1], True))
    levels = values[last] * cumulative[last]
    levels = levels[values[last] > 0]
    if levels.size == 0:
        return 0.0
    return float(levels.max() / norm)
