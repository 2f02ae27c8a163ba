"""
Dunkl operators, Dunkl Laplacian, Dunkl transform and Dunkl translation for
sign-flip root systems on WeightedGrid.

Transforms are dense quadratures: one N×N kernel matrix per axis, applied
along each axis in turn.
"""

from __future__ import annotations

import functools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .domain import Array, GridFunction, RootSystem, WeightedGrid, ball_indicator, contract_axes
from .kernel import dunkl_kernel_bessel
from .semigroups import axis_mehta_constant

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectralGrid(WeightedGrid):
    """
    Frequency nodes mirroring a spatial WeightedGrid
    """

    @classmethod
    def from_grid(
        cls, grid: WeightedGrid, half_width: float | None = None, points_per_axis: int | None = None
    ) -> SpectralGrid:
        return cls(
            grid.root_system,
            grid.half_width if half_width is None else half_width,
            grid.points_per_axis if points_per_axis is None else points_per_axis,
        )


def _check_root_system(grid: WeightedGrid, rs: RootSystem) -> None:
    if grid.root_system != rs:
        raise ValueError("the grid measure was built for a different root system")


def _derivative(f: npt.NDArray[np.generic], h: float, axis: int) -> npt.NDArray[np.generic]:
    """
    Fourth order centered differences, second order one-sided at the edges
    """
    res = np.gradient(f, h, axis=axis, edge_order=2)
    n = f.shape[axis]
    if n < 5:
        return res

    def part(start: int, stop: int) -> npt.NDArray[np.generic]:
        return np.take(f, range(start, n + stop), axis=axis)

    inner = (part(0, -4) - 8 * part(1, -3) + 8 * part(3, -1) - part(4, 0)) / (12 * h)
    index: list[slice] = [slice(None)] * f.ndim
    index[axis] = slice(2, n - 2)
    res[tuple(index)] = inner
    return res


def dunkl_operator_apply(grid: WeightedGrid, rs: RootSystem, xi: Sequence[float], f: GridFunction) -> GridFunction:
    """
    Compute T_ξ f(x) = ∂_ξ f(x) + Σ_i κ_i ξ_i (f(x) - f(σ_i x)) / x_i.

    σ_i flips coordinate i; on a midpoint grid it maps nodes to nodes and no
    node has x_i = 0.
    """
    _check_root_system(grid, rs)
    direction = np.asarray(xi, dtype=float)
    if direction.shape != (grid.dimension,):
        raise ValueError(f"ξ must have {grid.dimension} components, got {direction.shape}")
    if not math.isclose(float(np.linalg.norm(direction)), 1.0, rel_tol=1e-12):
        raise ValueError(f"ξ must be a unit vector, got {tuple(direction)}")
    f = np.asarray(f)
    d = grid.dimension
    res = np.zeros(f.shape, dtype=np.result_type(f, float))
    for i, (component, kappa) in enumerate(zip(direction, rs.axis_kappa)):
        if component == 0:
            continue
        axis = f.ndim - d + i
        term = _derivative(f, grid.h, axis)
        if kappa:
            shape = [1] * f.ndim
            shape[axis] = grid.points_per_axis
            x = grid.axis_nodes.reshape(shape)
            term = term + kappa * (f - np.flip(f, axis=axis)) / x
        res += component * term
    return res


def dunkl_laplacian(grid: WeightedGrid, rs: RootSystem, f: GridFunction) -> GridFunction:
    """
    Compute Δ_κ f = Σ_j T_{e_j}² f
    """
    res: GridFunction | None = None
    for j in range(grid.dimension):
        unit = np.zeros(grid.dimension)
        unit[j] = 1.0
        term = dunkl_operator_apply(grid, rs, unit, dunkl_operator_apply(grid, rs, unit, f))
        res = term if res is None else res + term
    assert res is not None
    return res


def check_decay(grid: WeightedGrid, f: GridFunction, tol: float = 1e-6) -> bool:
    """
    Check that |f| on the boundary nodes of the box is at most tol·max|f|
    """
    values = np.abs(np.asarray(f))
    top = float(values.max())
    if top == 0:
        return True
    d = grid.dimension
    edge = 0.0
    for i in range(d):
        axis = values.ndim - d + i
        edge = max(edge, float(np.take(values, [0, -1], axis=axis).max()))
    if edge > tol * top:
        log.warning("insufficient decay: boundary value %.3g exceeds %.1g of the maximum %.3g", edge, tol, top)
        return False
    return True


class DunklTransform:
    """
    Dense quadrature of the Dunkl transform between a grid and a spectral grid.

    Forward: F f(ξ) = c_κ ∫ E_κ(-iξ, y) f(y) dμ_κ(y).
    Inverse: F⁻¹ g(x) = c_κ ∫ E_κ(ix, ξ) g(ξ) dμ_κ(ξ).
    """

    def __init__(self, grid: WeightedGrid, sgrid: SpectralGrid) -> None:
        if grid.root_system != sgrid.root_system:
            raise ValueError("grid and spectral grid have different root systems")
        self.grid = grid
        self.sgrid = sgrid
        self.root_system = grid.root_system
        self.axis_mehta = tuple(axis_mehta_constant(k, grid) for k in self.root_system.axis_kappa)
        self.forward: list[npt.NDArray[np.complex128]] = []
        self.inverse: list[npt.NDArray[np.complex128]] = []
        x = grid.axis_nodes
        xi = sgrid.axis_nodes
        # Matrices only depend on κ_i: share them between axes with equal κ
        built: dict[float, tuple[npt.NDArray[np.complex128], npt.NDArray[np.complex128]]] = {}
        for kappa, c in zip(self.root_system.axis_kappa, self.axis_mehta):
            if kappa not in built:
                log.debug("building Dunkl transform matrices for κ=%g, N=%d", kappa, len(x))
                wx = np.abs(x) ** (2 * kappa) * grid.h
                wxi = np.abs(xi) ** (2 * kappa) * sgrid.h
                forward = c * dunkl_kernel_bessel(kappa, -np.outer(xi, x), imaginary=True) * wx[None, :]
                inverse = c * dunkl_kernel_bessel(kappa, np.outer(x, xi), imaginary=True) * wxi[None, :]
                built[kappa] = (forward, inverse)
            self.forward.append(built[kappa][0])
            self.inverse.append(built[kappa][1])
        self._balls: dict[tuple[tuple[float, ...], float | None], GridFunction] = {}

    @property
    def mehta(self) -> float:
        return float(np.prod(self.axis_mehta))

    def transform(self, f: GridFunction) -> GridFunction:
        return contract_axes(np.asarray(f, dtype=complex), self.forward)

    def inverse_transform(self, g: GridFunction) -> GridFunction:
        return contract_axes(np.asarray(g, dtype=complex), self.inverse)

    def multiplier(self, x: Sequence[float]) -> GridFunction:
        """
        E_κ(ix, ξ) on the spectral nodes, the transform of translation by x
        """
        if len(x) != self.grid.dimension:
            raise ValueError(f"x must have {self.grid.dimension} components")
        res: npt.NDArray[np.complex128] = np.ones((), dtype=complex)
        for i, (xi, kappa) in enumerate(zip(x, self.root_system.axis_kappa)):
            factor = dunkl_kernel_bessel(kappa, xi * self.sgrid.axis_nodes, imaginary=True)
            shape = [1] * self.grid.dimension
            shape[i] = self.sgrid.points_per_axis
            res = res * factor.reshape(shape)
        return res

    def translate(self, x: Sequence[float], f: GridFunction) -> GridFunction:
        res = self.inverse_transform(self.multiplier(x) * self.transform(f))
        if not np.iscomplexobj(f):
            return np.real(res)
        return res

    def convolve(self, f: GridFunction, g: GridFunction) -> GridFunction:
        """
        Compute x ↦ ∫ f(y) τ_x g(-y) dμ_κ(y) = c_κ⁻¹ F⁻¹(F f · F g)(x).

        f may carry leading batch axes, as may g; they broadcast.
        """
        res = self.inverse_transform(self.transform(f) * self.transform(g)) / self.mehta
        if not np.iscomplexobj(f) and not np.iscomplexobj(g):
            return np.real(res)
        return res

    def convolve_balls(self, f: GridFunction, radii: Sequence[float], mollify: float | None = None) -> Array:
        """
        convolve(f, χ_{B_r}) for every radius, stacked on a leading axis.

        Transforms of the ball indicators are kept for reuse.
        """
        key = (tuple(float(r) for r in radii), mollify)
        balls = self._balls.get(key)
        if balls is None:
            balls = self.transform(np.stack([ball_indicator(self.grid, r, mollify) for r in radii]))
            self._balls[key] = balls
        res = self.inverse_transform(self.transform(f)[None, ...] * balls) / self.mehta
        return np.asarray(np.real(res))


@functools.lru_cache(maxsize=8)
def transform_for(grid: WeightedGrid, sgrid: SpectralGrid) -> DunklTransform:
    """
    Shared DunklTransform for a pair of grids
    """
    return DunklTransform(grid, sgrid)


def dunkl_transform(grid: WeightedGrid, sgrid: SpectralGrid, rs: RootSystem, f: GridFunction) -> GridFunction:
    """
    Compute the Dunkl transform of f on the spectral nodes
    """
    _check_root_system(grid, rs)
    check_decay(grid, f)
    return transform_for(grid, sgrid).transform(f)


def dunkl_inverse_transform(sgrid: SpectralGrid, grid: WeightedGrid, rs: RootSystem, g: GridFunction) -> GridFunction:
    """
    Compute the inverse Dunkl transform of g on the spatial nodes
    """
    _check_root_system(grid, rs)
    check_decay(sgrid, g)
    return transform_for(grid, sgrid).inverse_transform(g)


def dunkl_translate(
    grid: WeightedGrid, sgrid: SpectralGrid, rs: RootSystem, x: Sequence[float], f: GridFunction
) -> GridFunction:
    """
    Compute τ_x f through F(τ_x f)(ξ) = E_κ(ix, ξ)·F f(ξ).

    For κ = 0 this is the shift f(· + x).
    """
    _check_root_system(grid, rs)
    check_decay(grid, f)
    return transform_for(grid, sgrid).translate(x, f)


@dataclass(frozen=True)
class NegativityWitness:
    """
    Most negative value of a function and where it is attained
    """

    value: float
    point: tuple[float, ...]

    @property
    def negative(self) -> bool:
        return self.value < 0


def negativity_witness(grid: WeightedGrid, g: GridFunction) -> NegativityWitness:
    values: Array = np.real(np.asarray(g))
    index = np.unravel_index(int(np.argmin(values)), values.shape)
    return NegativityWitness(float(values[index]), tuple(float(grid.axis_nodes[i]) for i in index))
