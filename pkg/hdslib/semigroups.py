"""
One-parameter contraction semigroups and checks of their defining properties.

Functions passed to a semigroup are arrays whose trailing axes have the shape
of the underlying space. Any leading axes are batch axes: the semigroup acts
on each slice independently, which is how vector fields are handled.
"""

from __future__ import annotations

import abc
import functools
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .domain import (
    Array,
    FiniteMeasureSpace,
    GridFunction,
    MeasureSpace,
    RootSystem,
    TruncationError,
    WeightedGrid,
    contract_axes,
    lp_norm,
)
from .kernel import dunkl_kernel_bessel

log = logging.getLogger(__name__)


class Averages(NamedTuple):
    """
    Time averages A_α f for a sorted list of α, with the estimated relative
    quadrature error of the time integration (0 when computed exactly)
    """

    values: list[GridFunction]
    error: float


class ContractionSemigroup(abc.ABC):
    """
    Family T_t of operators contracting both L¹ and L^∞ of a measure space
    """

    def __init__(self, space: MeasureSpace) -> None:
        self.space = space

    def _check_time(self, t: float) -> None:
        if not t >= 0 or not math.isfinite(t):
            raise ValueError(f"semigroup time must be a nonnegative real, got {t}")

    @abc.abstractmethod
    def apply(self, t: float, f: GridFunction) -> GridFunction:
        """
        Compute T_t f
        """

    @abc.abstractmethod
    def integrate(self, alpha: float, f: GridFunction) -> GridFunction:
        """
        Compute ∫₀^α T_t f dt
        """

    def averages(self, alphas: Sequence[float], f: GridFunction) -> Averages:
        """
        Compute A_α f = (1/α)∫₀^α T_t f dt for every α, with A₀ f = f
        """
        values: list[GridFunction] = []
        for alpha in alphas:
            if alpha == 0:
                values.append(np.array(f, copy=True))
            else:
                values.append(self.integrate(alpha, f) / alpha)
        return Averages(values, 0.0)


class IdentitySemigroup(ContractionSemigroup):
    """
    T_t = I for all t
    """

    def apply(self, t: float, f: GridFunction) -> GridFunction:
        self._check_time(t)
        return np.array(f, copy=True)

    def integrate(self, alpha: float, f: GridFunction) -> GridFunction:
        if not alpha > 0:
            raise ValueError(f"α must be positive, got {alpha}")
        return alpha * np.asarray(f)


@dataclass(frozen=True, eq=False)
class MarkovGenerator:
    """
    Generator Q of a doubly substochastic Markov semigroup e^{tQ}
    """

    matrix: Array
    tol: float = 1e-12

    def __post_init__(self) -> None:
        q = np.asarray(self.matrix, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] == 0:
            raise ValueError(f"a generator must be a nonempty square matrix, got shape {q.shape}")
        if not np.all(np.isfinite(q)):
            raise ValueError("generator entries must be finite")
        off = q[~np.eye(q.shape[0], dtype=bool)]
        if np.any(off < 0):
            raise ValueError("generator off-diagonal entries must be nonnegative")
        if np.any(q.sum(axis=1) > self.tol):
            raise ValueError("generator row sums must be nonpositive")
        if np.any(q.sum(axis=0) > self.tol):
            raise ValueError("generator column sums must be nonpositive")
        q.setflags(write=False)
        object.__setattr__(self, "matrix", q)

    @property
    def size(self) -> int:
        return int(self.matrix.shape[0])

    @classmethod
    def zero(cls, size: int) -> MarkovGenerator:
        """
        Generator of the identity semigroup
        """
        return cls(np.zeros((size, size)))

    @classmethod
    def random(cls, rng: np.random.Generator, size: int) -> MarkovGenerator:
        """
        Random symmetric conservative generator.

        Off-diagonal rates are uniform in [0, 1], symmetrized, and the
        diagonal makes row (hence column) sums vanish.
        """
        rates = rng.uniform(0.0, 1.0, size=(size, size))
        rates = (rates + rates.T) / 2
        np.fill_diagonal(rates, 0.0)
        np.fill_diagonal(rates, -rates.sum(axis=1))
        return cls(rates)


def _apply_matrix(matrix: Array, f: GridFunction) -> GridFunction:
    # Rows of a 2D batch: a function and a one-component field share one path
    f = np.asarray(f)
    return (f.reshape(-1, matrix.shape[0]) @ matrix.T).reshape(f.shape)


def _check_finite(f: GridFunction) -> None:
    if not np.all(np.isfinite(f)):
        raise ValueError("non-finite function values")


def markov_propagator(generator: MarkovGenerator, t: float) -> Array:
    """
    Matrix e^{tQ}
    """
    if t == 0:
        return np.eye(generator.size)
    return np.asarray(scipy.linalg.expm(t * generator.matrix))


def markov_integral_operator(generator: MarkovGenerator, alpha: float) -> Array:
    """
    Matrix ∫₀^α e^{tQ} dt = α·φ₁(αQ).

    It is the top right block of exp([[αQ, αI], [0, 0]]), which needs no
    inverse of Q (generators of conservative chains are singular).
    """
    if not alpha > 0 or not math.isfinite(alpha):
        raise ValueError(f"α must be a positive real, got {alpha}")
    n = generator.size
    augmented = np.zeros((2 * n, 2 * n))
    augmented[:n, :n] = alpha * generator.matrix
    augmented[:n, n:] = alpha * np.eye(n)
    return np.asarray(scipy.linalg.expm(augmented)[:n, n:])


def markov_apply(generator: MarkovGenerator, t: float, f: GridFunction) -> GridFunction:
    """
    Compute e^{tQ} f
    """
    if not t >= 0 or not math.isfinite(t):
        raise ValueError(f"t must be a nonnegative real, got {t}")
    _check_finite(f)
    return _apply_matrix(markov_propagator(generator, t), f)


def markov_integral(generator: MarkovGenerator, alpha: float, f: GridFunction) -> GridFunction:
    """
    Compute ∫₀^α e^{tQ} f dt
    """
    _check_finite(f)
    return _apply_matrix(markov_integral_operator(generator, alpha), f)


class MarkovSemigroup(ContractionSemigroup):
    """
    e^{tQ} on a finite space with counting measure
    """

    def __init__(self, generator: MarkovGenerator) -> None:
        super().__init__(FiniteMeasureSpace.counting(generator.size))
        self.generator = generator

    @classmethod
    def random(cls, rng: np.random.Generator, size: int) -> MarkovSemigroup:
        return cls(MarkovGenerator.random(rng, size))

    def apply(self, t: float, f: GridFunction) -> GridFunction:
        return markov_apply(self.generator, t, f)

    def integrate(self, alpha: float, f: GridFunction) -> GridFunction:
        return markov_integral(self.generator, alpha, f)


@dataclass(frozen=True)
class TimeQuadrature:
    """
    Nodes of the composite trapezoid rule used for ∫₀^α T_t f dt.

    Each interval between consecutive requested α (and [0, α₀]) is split into
    ``substeps`` equal parts. ``substeps`` is even so that every other node
    gives a coarser rule, used to estimate the error.
    """

    substeps: int = 8

    def __post_init__(self) -> None:
        if self.substeps < 2 or self.substeps % 2:
            raise ValueError(f"substeps must be a positive even integer, got {self.substeps}")

    def nodes(self, alphas: Sequence[float]) -> Array:
        res = [np.zeros(1)]
        start = 0.0
        for alpha in alphas:
            if alpha <= start:
                continue
            res.append(np.linspace(start, alpha, self.substeps + 1)[1:])
            start = alpha
        return np.concatenate(res)


class KernelSemigroup(ContractionSemigroup):
    """
    Semigroup on a WeightedGrid given by a kernel that factors along axes.

    Subclasses provide the per-axis matrices K[i, j] = k_t(x_i, y_j)·w_j,
    with w_j the one-dimensional quadrature weights.
    """

    def __init__(self, grid: WeightedGrid, quadrature: TimeQuadrature | None = None, cache_size: int = 64) -> None:
        super().__init__(grid)
        self.grid = grid
        self.quadrature = quadrature or TimeQuadrature()
        self._kernels = functools.lru_cache(maxsize=cache_size)(self._build_axis_kernels)

    @property
    def max_time(self) -> float:
        """
        Largest time whose kernel stays well inside the box (√t ≤ L/4)
        """
        return (self.grid.half_width / 4) ** 2

    def _check_time(self, t: float) -> None:
        super()._check_time(t)
        if t > self.max_time:
            raise TruncationError(f"t={t} exceeds the truncation guard √t ≤ L/4 = {self.grid.half_width / 4}")

    @abc.abstractmethod
    def axis_kernel(self, axis: int, t: float) -> Array:
        """
        Return the weighted kernel matrix along one axis for t > 0
        """

    def _build_axis_kernels(self, t: float) -> tuple[Array, ...]:
        log.debug("%s: building kernel tables for t=%g", self.__class__.__name__, t)
        res = []
        for axis in range(self.grid.dimension):
            kernel = self.axis_kernel(axis, t)
            # The quadrature may overshoot the mass of the truncated kernel
            overshoot = float(kernel.sum(axis=1).max())
            if overshoot > 1:
                log.debug("%s: axis %d mass %.17g at t=%g scaled to 1", self.__class__.__name__, axis, overshoot, t)
                kernel = kernel / overshoot
            res.append(kernel)
        return tuple(res)

    def kernels(self, t: float) -> tuple[Array, ...]:
        self._check_time(t)
        return self._kernels(float(t))

    def apply(self, t: float, f: GridFunction) -> GridFunction:
        self._check_time(t)
        _check_finite(f)
        if t == 0:
            return np.array(f, copy=True)
        f = np.asarray(f)
        batch = f.reshape((-1,) + self.grid.shape)
        return contract_axes(batch, self.kernels(t)).reshape(f.shape)

    def integrate(self, alpha: float, f: GridFunction) -> GridFunction:
        if not alpha > 0:
            raise ValueError(f"α must be positive, got {alpha}")
        res = self.averages([alpha], f)
        return alpha * res.values[0]

    def averages(self, alphas: Sequence[float], f: GridFunction) -> Averages:
        """
        Stream a trapezoid rule through all requested α at once.

        The integrand T_t f is evaluated once per time node; partial integrals
        are read off whenever a requested α is reached.
        """
        order = sorted(set(float(a) for a in alphas))
        if order and order[0] < 0:
            raise ValueError(f"α must be nonnegative, got {order[0]}")
        if order:
            self._check_time(order[-1])
        nodes = self.quadrature.nodes(order)
        f = np.asarray(f)

        results: dict[float, GridFunction] = {}
        if order and order[0] == 0:
            results[0.0] = np.array(f, copy=True)
        targets = [a for a in order if a > 0]

        fine = np.zeros_like(f, dtype=np.result_type(f, float))
        coarse = np.zeros_like(fine)
        error = 0.0
        previous = f
        # Value at the start of the current coarse pair
        pair_start = f
        target = 0
        for i in range(1, len(nodes)):
            current = self.apply(nodes[i], f)
            fine += (nodes[i] - nodes[i - 1]) * (previous + current) / 2
            if i % 2 == 0:
                coarse += (nodes[i] - nodes[i - 2]) * (pair_start + current) / 2
                pair_start = current
            previous = current
            if target < len(targets) and nodes[i] == targets[target]:
                alpha = targets[target]
                results[alpha] = fine / alpha
                scale = np.max(np.abs(fine))
                if scale > 0:
                    error = max(error, float(np.max(np.abs(fine - coarse)) / 3 / scale))
                target += 1
        return Averages([results[float(a)] for a in alphas], error)


class HeatSemigroup(KernelSemigroup):
    """
    Euclidean heat semigroup: convolution with (4πt)^{-d/2} e^{-|x-y|²/4t}
    """

    def __init__(self, grid: WeightedGrid, quadrature: TimeQuadrature | None = None) -> None:
        if not grid.root_system.is_trivial:
            raise ValueError("the Euclidean heat semigroup needs a grid with κ = 0")
        super().__init__(grid, quadrature)

    def axis_kernel(self, axis: int, t: float) -> Array:
        x = self.grid.axis_nodes
        diff = x[:, None] - x[None, :]
        return np.exp(-(diff**2) / (4 * t)) / np.sqrt(4 * np.pi * t) * self.grid.h


def heat_apply(grid: WeightedGrid, t: float, f: GridFunction) -> GridFunction:
    """
    Compute the Euclidean heat semigroup at time t > 0
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    return HeatSemigroup(grid).apply(t, f)


def axis_mehta_constant(kappa: float, grid: WeightedGrid) -> float:
    """
    (∫ e^{-u²/2} |u|^{2κ} du)^{-1} by quadrature on the grid nodes
    """
    x = grid.axis_nodes
    return float(1 / np.sum(np.exp(-(x**2) / 2) * np.abs(x) ** (2 * kappa) * grid.h))


def mehta_constant(rs: RootSystem, grid: WeightedGrid) -> float:
    """
    Compute c_κ = (∫ e^{-|u|²/2} dμ_κ(u))^{-1} by quadrature.

    The weight and the Gaussian factor along axes, so this is a product of
    one-dimensional constants.
    """
    if rs.dimension != grid.dimension:
        raise ValueError(f"root system dimension {rs.dimension} does not match grid dimension {grid.dimension}")
    res = 1.0
    for kappa in rs.axis_kappa:
        res *= axis_mehta_constant(kappa, grid)
    return res


def dunkl_heat_axis_kernel(kappa: float, grid: WeightedGrid, t: float, mehta: float) -> Array:
    """
    Weighted rank-one Dunkl heat kernel matrix along one axis.

    Q(x, y, t) = c(2t)^{-½-κ} e^{-(x²+y²)/4t} E_κ(x/√2t, y/√2t) is evaluated
    as c(2t)^{-½-κ} e^{-(|x|-|y|)²/4t}·e^{-|z|}E_κ(z), z = xy/2t, which
    does not overflow for small t.
    """
    x = grid.axis_nodes
    z = np.outer(x, x) / (2 * t)
    gap = (np.abs(x)[:, None] - np.abs(x)[None, :]) ** 2 / (4 * t)
    kernel = mehta * (2 * t) ** (-0.5 - kappa) * np.exp(-gap) * dunkl_kernel_bessel(kappa, z, scaled=True)
    weights = np.abs(x) ** (2 * kappa) * grid.h
    return np.asarray(kernel * weights[None, :], dtype=float)


class DunklHeatSemigroup(KernelSemigroup):
    """
    Heat semigroup of the Dunkl Laplacian for ℤ₂ and ℤ₂^d root systems
    """

    def __init__(self, grid: WeightedGrid, quadrature: TimeQuadrature | None = None) -> None:
        super().__init__(grid, quadrature)
        self.root_system = grid.root_system
        self.axis_mehta = tuple(axis_mehta_constant(k, grid) for k in self.root_system.axis_kappa)

    @property
    def mehta(self) -> float:
        return float(np.prod(self.axis_mehta))

    def axis_kernel(self, axis: int, t: float) -> Array:
        return dunkl_heat_axis_kernel(self.root_system.axis_kappa[axis], self.grid, t, self.axis_mehta[axis])

    def mass(self, t: float) -> GridFunction:
        """
        ∫ Q_κ(x, y, t) dμ_κ(y) at every node x
        """
        return self.apply(t, np.ones(self.grid.shape))


def dunkl_heat_apply(semigroup: DunklHeatSemigroup, t: float, f: GridFunction) -> GridFunction:
    """
    Compute H_t f, with H_0 f = f
    """
    return semigroup.apply(t, f)


@dataclass
class ContractionReport:
    l1_ratio: float
    linf_ratio: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.l1_ratio <= 1 + self.tol and self.linf_ratio <= 1 + self.tol


@dataclass
class PositivityReport:
    min_value: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.min_value >= -self.tol


@dataclass
class SemigroupLawReport:
    defect: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.defect <= self.tol


#: Rounding allowed above mass 1
MASS_ROUNDING = 1e-12


@dataclass
class MassReport:
    min_mass: float
    max_mass: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.min_mass >= 1 - self.tol and self.max_mass <= 1 + MASS_ROUNDING


def _nonempty(name: str, values: Sequence[object]) -> None:
    if not values:
        raise ValueError(f"{name} must not be empty")


def check_contraction(
    semigroup: ContractionSemigroup, ts: Sequence[float], fs: Sequence[GridFunction], tol: float = 1e-3
) -> ContractionReport:
    """
    Largest observed ‖T_t f‖₁/‖f‖₁ and ‖T_t f‖_∞/‖f‖_∞
    """
    _nonempty("sample times", ts)
    _nonempty("sample functions", fs)
    l1 = linf = 0.0
    for f in fs:
        n1 = lp_norm(semigroup.space, f, 1)
        ninf = lp_norm(semigroup.space, f, math.inf)
        if n1 == 0:
            continue
        for t in ts:
            g = semigroup.apply(t, f)
            l1 = max(l1, lp_norm(semigroup.space, g, 1) / n1)
            linf = max(linf, lp_norm(semigroup.space, g, math.inf) / ninf)
    return ContractionReport(l1, linf, tol)


def check_positivity(
    semigroup: ContractionSemigroup, ts: Sequence[float], fs: Sequence[GridFunction], tol: float = 1e-12
) -> PositivityReport:
    """
    Smallest value of T_t f over the nonnegative sample functions
    """
    _nonempty("sample times", ts)
    _nonempty("sample functions", fs)
    lowest = math.inf
    for f in fs:
        if np.any(np.asarray(f) < 0):
            continue
        for t in ts:
            lowest = min(lowest, float(np.min(semigroup.apply(t, f))))
    return PositivityReport(lowest, tol)


def check_semigroup_law(
    semigroup: ContractionSemigroup,
    pairs: Iterable[tuple[float, float]],
    fs: Sequence[GridFunction],
    tol: float = 1e-3,
) -> SemigroupLawReport:
    """
    Largest ‖T_t T_s f - T_{t+s} f‖₂ / ‖f‖₂ over the sample pairs (s, t)
    """
    _nonempty("sample functions", fs)
    defect = 0.0
    for s, t in pairs:
        for f in fs:
            norm = lp_norm(semigroup.space, f, 2)
            if norm == 0:
                continue
            diff = semigroup.apply(t, semigroup.apply(s, f)) - semigroup.apply(s + t, f)
            defect = max(defect, lp_norm(semigroup.space, diff, 2) / norm)
    return SemigroupLawReport(defect, tol)


def check_mass(semigroup: KernelSemigroup, ts: Sequence[float], fraction: float = 0.5, tol: float = 1e-3) -> MassReport:
    """
    Range of ∫ k_t(x, y) dy over nodes x in the inner part of the box
    """
    _nonempty("sample times", ts)
    inner = semigroup.grid.interior(fraction)
    ones = np.ones(semigroup.grid.shape)
    lo, hi = math.inf, -math.inf
    for t in ts:
        mass = semigroup.apply(t, ones)[inner]
        lo = min(lo, float(mass.min()))
        hi = max(hi, float(mass.max()))
    if lo < 1 - tol:
        log.warning("kernel mass %.6g is below 1 - %g", lo, tol)
    if hi > 1 + MASS_ROUNDING:
        log.warning("kernel mass %.17g is above 1", hi)
    return MassReport(lo, hi, tol)
