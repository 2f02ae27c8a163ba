"""
Dunkl kernel for the sign-flip groups ℤ₂ and ℤ₂^d.

The rank-one kernel E_κ(x, y) only depends on z = x·y. It is evaluated either
by the power series solving the eigenvalue problem T f = y f, or, for whole
tables of arguments, by its closed form in terms of Bessel functions.
"""

from __future__ import annotations

import cmath
import logging
import math
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
import scipy.special

log = logging.getLogger(__name__)

# Below this |z| tables use the power series: the Bessel prefactor is
# singular at 0 when κ > ½
BESSEL_SWITCH = 1.0
# Enough for |z| < BESSEL_SWITCH to reach double precision
TABLE_SERIES_TERMS = 40


class SeriesError(ArithmeticError):
    """
    The Dunkl kernel series cannot reach the requested accuracy
    """


def _check_kappa(kappa: float) -> None:
    if kappa < 0 or not math.isfinite(kappa):
        raise ValueError(f"κ must be a nonnegative real, got {kappa}")


def _positive_series(kappa: float, w: float, tol: float, max_terms: int) -> float:
    """
    Sum ₁F₁(κ; 2κ+1; w) for w ≥ 0 (all terms positive)
    """
    term = 1.0
    total = 1.0
    for k in range(1, max_terms):
        term *= (kappa + k - 1) / (2 * kappa + k) * w / k
        total += term
        if term <= tol * total:
            return total
    raise SeriesError(f"₁F₁({kappa}; {2 * kappa + 1}; {w}) did not converge in {max_terms} terms")


def dunkl_kernel_rank1(
    kappa: float,
    x: float,
    y: complex,
    tol: float = 1e-16,
    max_terms: int = 1000,
    precision: float = 1e-10,
) -> complex:
    """
    Evaluate the rank-one Dunkl kernel E_κ(x, y) by its power series.

    y is either real or purely imaginary. The coefficients of Σ a_k x^k follow
    a_k = y·a_{k-1} / (k + 2κ·[k odd]). For real negative x·y the equivalent
    form e^{xy}·₁F₁(κ; 2κ+1; -2xy) is summed instead, since its terms are all
    positive.

    Raises SeriesError if the series does not converge in max_terms, or if
    cancellation between terms would leave less than ``precision`` relative
    accuracy.
    """
    _check_kappa(kappa)
    if not math.isfinite(x) or not cmath.isfinite(y):
        raise ValueError("the Dunkl kernel needs finite arguments")
    if y.real != 0 and y.imag != 0:
        raise ValueError(f"y must be real or purely imaginary, got {y}")
    if x == 0 or y == 0:
        return 1.0

    if y.imag == 0:
        z = x * y.real
        if z < 0:
            return math.exp(z) * _positive_series(kappa, -2 * z, tol, max_terms)
        # z > 0: every term of the direct expansion is positive
        term = 1.0
        total = 1.0
        for k in range(1, max_terms):
            term *= z / (k + (2 * kappa if k % 2 else 0.0))
            total += term
            if term <= tol * total:
                return total
        raise SeriesError(f"E_{kappa}({x}, {y}) did not converge in {max_terms} terms")

    w = x * y
    cterm: complex = 1.0
    ctotal: complex = 1.0
    largest = 1.0
    for k in range(1, max_terms):
        cterm *= w / (k + (2 * kappa if k % 2 else 0.0))
        ctotal += cterm
        largest = max(largest, abs(cterm))
        if abs(cterm) <= tol * abs(ctotal):
            break
    else:
        raise SeriesError(f"E_{kappa}({x}, {y}) did not converge in {max_terms} terms")
    if largest * np.finfo(float).eps > precision * abs(ctotal):
        raise SeriesError(f"E_{kappa}({x}, {y}): cancellation exceeds the relative precision {precision}")
    return ctotal


def dunkl_kernel_product(
    kappas: Sequence[float], x: Sequence[float], y: Sequence[complex], **kwargs: float
) -> complex:
    """
    ℤ₂^d Dunkl kernel: product of rank-one kernels along each axis
    """
    if not (len(kappas) == len(x) == len(y)):
        raise ValueError(f"dimension mismatch: κ has {len(kappas)} entries, x {len(x)}, y {len(y)}")
    res: complex = 1.0
    for kappa, xi, yi in zip(kappas, x, y):
        res *= dunkl_kernel_rank1(kappa, xi, yi, **kwargs)  # type: ignore[arg-type]
    return res


def _series_table(kappa: float, z: npt.NDArray[np.float64], imaginary: bool) -> npt.NDArray[np.generic]:
    w = 1j * z if imaginary else z
    term = np.ones_like(w)
    total = np.ones_like(w)
    for k in range(1, TABLE_SERIES_TERMS):
        term = term * w / (k + (2 * kappa if k % 2 else 0.0))
        total = total + term
    return total


def dunkl_kernel_bessel(
    kappa: float,
    z: npt.ArrayLike,
    imaginary: bool = False,
    scaled: bool = False,
) -> npt.NDArray[np.generic]:
    """
    Vectorized rank-one kernel as a function of z = x·y.

    With ν = κ - ½ and Γ = Γ(κ + ½):

    * ``imaginary=False``: E_κ(x, y) = Γ(|z|/2)^{-ν}[I_ν(|z|) + sign(z) I_{ν+1}(|z|)]
    * ``imaginary=True``: E_κ(x, iy) = Γ(|z|/2)^{-ν}[J_ν(|z|) + i sign(z) J_{ν+1}(|z|)]

    ``scaled=True`` returns e^{-|z|}·E_κ for real arguments, which stays
    finite where E_κ itself overflows.
    """
    _check_kappa(kappa)
    zz = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(zz)):
        raise ValueError("the Dunkl kernel needs finite arguments")
    a = np.abs(zz)

    if kappa == 0:
        if imaginary:
            return np.exp(1j * zz)
        return np.exp(zz - a) if scaled else np.exp(zz)

    res = np.empty(zz.shape, dtype=complex if imaginary else float)
    small = a < BESSEL_SWITCH
    if np.any(small):
        values = _series_table(kappa, zz[small], imaginary)
        if scaled and not imaginary:
            values = values * np.exp(-a[small])
        res[small] = values

    large = ~small
    if np.any(large):
        al = a[large]
        sign = np.sign(zz[large])
        nu = kappa - 0.5
        prefactor = scipy.special.gamma(kappa + 0.5) * (al / 2) ** (-nu)
        if imaginary:
            res[large] = prefactor * (scipy.special.jv(nu, al) + 1j * sign * scipy.special.jv(nu + 1, al))
        elif scaled:
            res[large] = prefactor * (scipy.special.ive(nu, al) + sign * scipy.special.ive(nu + 1, al))
        else:
            res[large] = prefactor * (scipy.special.iv(nu, al) + sign * scipy.special.iv(nu + 1, al))
    return res


def kernel_slice(kappa: float, x: npt.ArrayLike, y: complex) -> npt.NDArray[np.generic]:
    """
    Values of E_κ(·, y) on an array of points, y real or purely imaginary
    """
    xs = np.asarray(x, dtype=float)
    if y.imag != 0:
        if y.real != 0:
            raise ValueError(f"y must be real or purely imaginary, got {y}")
        return dunkl_kernel_bessel(kappa, xs * y.imag, imaginary=True)
    return dunkl_kernel_bessel(kappa, xs * y.real)
