from __future__ import annotations

import cmath
import math
import unittest

import numpy as np

from hdslib.kernel import SeriesError, dunkl_kernel_bessel, dunkl_kernel_product, dunkl_kernel_rank1, kernel_slice


class TestSeries(unittest.TestCase):
    def test_exponential(self) -> None:
        self.assertAlmostEqual(dunkl_kernel_rank1(0.0, 1.0, 1.0).real, math.e, places=14)
        value = complex(dunkl_kernel_rank1(0.0, 1.0, 1j))
        self.assertAlmostEqual(abs(value - cmath.exp(1j)), 0.0, places=14)

    def test_origin(self) -> None:
        for kappa in (0.0, 0.5, 3.0):
            with self.subTest(kappa=kappa):
                self.assertEqual(dunkl_kernel_rank1(kappa, 0.0, 5.0), 1.0)
                self.assertEqual(dunkl_kernel_rank1(kappa, 5.0, 0.0), 1.0)

    def test_half_integer(self) -> None:
        # κ = ½: E(z) = I₀(z) + I₁(z)
        import scipy.special

        for z in (-2.0, 0.3, 1.7):
            with self.subTest(z=z):
                expected = scipy.special.iv(0, z) + scipy.special.iv(1, z)
                self.assertAlmostEqual(dunkl_kernel_rank1(0.5, z, 1.0).real, expected, places=12)

    def test_homogeneity(self) -> None:
        a = dunkl_kernel_rank1(0.7, 2.0, 3.0)
        b = dunkl_kernel_rank1(0.7, 6.0, 1.0)
        self.assertAlmostEqual(a.real / b.real, 1.0, places=13)
        c = complex(dunkl_kernel_rank1(0.7, 2.0, 1.5j))
        d = complex(dunkl_kernel_rank1(0.7, 3.0, 1j))
        self.assertAlmostEqual(abs(c - d), 0.0, places=13)

    def test_eigenfunction(self) -> None:
        # f'(x) + κ(f(x) - f(-x))/x = y·f(x) for f = E_κ(·, y)
        kappa, x, y, h = 1.0, 1.3, 0.7, 1e-5

        def f(t: float) -> float:
            return float(dunkl_kernel_rank1(kappa, t, y).real)

        lhs = (f(x + h) - f(x - h)) / (2 * h) + kappa * (f(x) - f(-x)) / x
        self.assertAlmostEqual(lhs / (y * f(x)), 1.0, places=7)

    def test_ode(self) -> None:
        # Even and odd parts solve u' = y·v, v' + 2κv/x = y·u with u(0) = 1, v(0) = 0
        import scipy.integrate

        kappa, y, x0 = 1.0, 1.0, 1e-6

        def rhs(x: float, uv: np.ndarray) -> list[float]:
            u, v = uv
            return [y * v, y * u - 2 * kappa * v / x]

        start = [1 + (y * x0) ** 2 / (2 * (1 + 2 * kappa)), y * x0 / (1 + 2 * kappa)]
        sol = scipy.integrate.solve_ivp(rhs, (x0, 1.0), start, method="DOP853", rtol=1e-12, atol=1e-14)
        u, v = sol.y[:, -1]
        self.assertAlmostEqual(dunkl_kernel_rank1(kappa, 1.0, y).real, u + v, delta=1e-8)
        self.assertAlmostEqual(dunkl_kernel_rank1(kappa, -1.0, y).real, u - v, delta=1e-8)

    def test_negative_argument(self) -> None:
        value = dunkl_kernel_rank1(1.0, -30.0, 1.0).real
        self.assertGreater(value, 0.0)
        expected = float(dunkl_kernel_bessel(1.0, np.array([-30.0]))[0])
        self.assertAlmostEqual(value / expected, 1.0, places=7)

    def test_cancellation(self) -> None:
        with self.assertRaises(SeriesError):
            dunkl_kernel_rank1(0.5, 10.0, 10j)

    def test_validation(self) -> None:
        with self.assertRaises(ValueError):
            dunkl_kernel_rank1(-0.5, 1.0, 1.0)
        with self.assertRaises(ValueError):
            dunkl_kernel_rank1(0.5, 1.0, 1 + 1j)
        with self.assertRaises(ValueError):
            dunkl_kernel_rank1(0.5, math.inf, 1.0)

    def test_product(self) -> None:
        value = dunkl_kernel_product([0.0, 0.5], [1.0, 2.0], [1.0, 1.0])
        expected = math.e * dunkl_kernel_rank1(0.5, 2.0, 1.0).real
        self.assertAlmostEqual(value.real, expected, places=12)
        with self.assertRaises(ValueError):
            dunkl_kernel_product([0.5], [1.0, 2.0], [1.0, 1.0])


class TestBessel(unittest.TestCase):
    def test_matches_series(self) -> None:
        zs = np.array([-4.0, -1.5, -0.5, -1e-3, 0.0, 0.2, 0.99, 1.0, 2.5, 6.0])
        for kappa in (0.25, 0.5, 1.0, 2.5):
            expected = np.array([dunkl_kernel_rank1(kappa, z, 1.0).real for z in zs])
            expected_imaginary = np.array([complex(dunkl_kernel_rank1(kappa, z, 1j)) for z in zs])
            with self.subTest(kappa=kappa):
                np.testing.assert_allclose(dunkl_kernel_bessel(kappa, zs), expected, rtol=1e-10)
                np.testing.assert_allclose(
                    dunkl_kernel_bessel(kappa, zs, imaginary=True), expected_imaginary, rtol=1e-10, atol=1e-13
                )

    def test_kappa_zero(self) -> None:
        zs = np.linspace(-3, 3, 7)
        np.testing.assert_allclose(dunkl_kernel_bessel(0.0, zs), np.exp(zs))
        np.testing.assert_allclose(dunkl_kernel_bessel(0.0, zs, imaginary=True), np.exp(1j * zs))

    def test_scaled(self) -> None:
        zs = np.array([-5.0, 0.5, 5.0])
        np.testing.assert_allclose(
            dunkl_kernel_bessel(1.0, zs, scaled=True), np.exp(-np.abs(zs)) * dunkl_kernel_bessel(1.0, zs)
        )
        # Finite where the unscaled kernel overflows
        self.assertTrue(np.isfinite(dunkl_kernel_bessel(1.0, np.array([2000.0]), scaled=True)).all())

    def test_bounded_on_imaginary_axis(self) -> None:
        values = kernel_slice(1.5, np.linspace(-20, 20, 401), 1j)
        self.assertLessEqual(float(np.max(np.abs(values))), 1 + 1e-12)

    def test_slice(self) -> None:
        xs = np.array([-1.0, 0.5, 2.0])
        np.testing.assert_allclose(kernel_slice(0.5, xs, 2.0), dunkl_kernel_bessel(0.5, 2.0 * xs))
        with self.assertRaises(ValueError):
            kernel_slice(0.5, xs, 1 + 1j)

    def test_non_finite(self) -> None:
        with self.assertRaises(ValueError):
            dunkl_kernel_bessel(0.5, np.array([math.nan]))
