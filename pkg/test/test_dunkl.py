from __future__ import annotations

import unittest

import numpy as np

from hdslib.domain import RootSystem, ball_indicator, lp_norm
from hdslib.dunkl import (
    DunklTransform,
    SpectralGrid,
    check_decay,
    dunkl_inverse_transform,
    dunkl_laplacian,
    dunkl_operator_apply,
    dunkl_transform,
    dunkl_translate,
    negativity_witness,
    transform_for,
)
from hdslib.kernel import dunkl_kernel_bessel

from .utils import GridTestMixin


class TestDunklOperator(GridTestMixin, unittest.TestCase):
    def test_derivative(self) -> None:
        grid = self.grid(half_width=8.0, points=400)
        x = grid.axis_nodes
        f = np.exp(-(x**2))
        res = dunkl_operator_apply(grid, grid.root_system, [1.0], f)
        np.testing.assert_allclose(res, -2 * x * f, atol=1e-4)

    def test_eigenfunction(self) -> None:
        kappa, y = 0.5, 1.0
        grid = self.grid(kappa, half_width=3.0, points=600)
        f = dunkl_kernel_bessel(kappa, grid.axis_nodes * y)
        res = dunkl_operator_apply(grid, grid.root_system, [1.0], f)
        inner = grid.interior(0.9)
        np.testing.assert_allclose(res[inner], y * f[inner], rtol=1e-5)

    def test_odd_part(self) -> None:
        # T(x) = 1 + 2κ
        grid = self.grid(1.5, half_width=2.0, points=40)
        res = dunkl_operator_apply(grid, grid.root_system, [1.0], grid.axis_nodes.copy())
        np.testing.assert_allclose(res, 4.0)

    def test_laplacian(self) -> None:
        # Δ_κ x² = 2 + 4κ on the line
        kappa = 0.5
        grid = self.grid(kappa, half_width=2.0, points=80)
        res = dunkl_laplacian(grid, grid.root_system, grid.axis_nodes**2)
        np.testing.assert_allclose(res[grid.interior(0.8)], 2 + 4 * kappa, rtol=1e-8)

    def test_two_dimensional(self) -> None:
        grid = self.grid((0.5, 1.0), half_width=2.0, points=20)
        x, y = grid.coordinates
        xi = [0.6, 0.8]
        res = dunkl_operator_apply(grid, grid.root_system, xi, x + y)
        np.testing.assert_allclose(res, 0.6 * 2.0 + 0.8 * 3.0)

    def test_commute(self) -> None:
        grid = self.grid((0.5, 1.0), half_width=4.0, points=40)
        rs = grid.root_system
        x, y = grid.coordinates
        f = np.exp(-((x - 0.3) ** 2) - 2 * (y + 0.2) ** 2) * (1 + x * y)
        t12 = dunkl_operator_apply(grid, rs, [1.0, 0.0], dunkl_operator_apply(grid, rs, [0.0, 1.0], f))
        t21 = dunkl_operator_apply(grid, rs, [0.0, 1.0], dunkl_operator_apply(grid, rs, [1.0, 0.0], f))
        np.testing.assert_allclose(t12, t21, rtol=1e-12, atol=1e-10)

    def test_validation(self) -> None:
        grid = self.grid(0.5, points=16)
        with self.assertRaisesRegex(ValueError, "unit vector"):
            dunkl_operator_apply(grid, grid.root_system, [2.0], np.zeros(16))
        with self.assertRaises(ValueError):
            dunkl_operator_apply(grid, grid.root_system, [1.0, 0.0], np.zeros(16))
        with self.assertRaisesRegex(ValueError, "different root system"):
            dunkl_operator_apply(grid, RootSystem.rank1(1.0), [1.0], np.zeros(16))


class TestTransform(GridTestMixin, unittest.TestCase):
    def test_decay(self) -> None:
        grid = self.grid(points=64)
        self.assertTrue(check_decay(grid, self.gaussian(grid)))
        with self.assertLogs("hdslib.dunkl", level="WARNING"):
            self.assertFalse(check_decay(grid, np.ones(64)))
        self.assertTrue(check_decay(grid, np.zeros(64)))

    def test_gaussian_fixed_point(self) -> None:
        for kappa in (0.0, 0.5, 1.0):
            grid = self.grid(kappa, half_width=10.0, points=512)
            sgrid = SpectralGrid.from_grid(grid)
            with self.subTest(kappa=kappa):
                Ff = dunkl_transform(grid, sgrid, grid.root_system, self.gaussian(grid))
                np.testing.assert_allclose(Ff, self.gaussian(sgrid), atol=1e-3)

    def test_plancherel_and_inversion(self) -> None:
        for kappa in (0.0, 0.5, 1.0):
            grid = self.grid(kappa, half_width=10.0, points=512)
            sgrid = SpectralGrid.from_grid(grid)
            f = (1 + grid.axis_nodes) * self.gaussian(grid)
            with self.subTest(kappa=kappa):
                Ff = dunkl_transform(grid, sgrid, grid.root_system, f)
                self.assertAlmostEqual(lp_norm(sgrid, Ff, 2) / lp_norm(grid, f, 2), 1.0, delta=1e-3)
                back = dunkl_inverse_transform(sgrid, grid, grid.root_system, Ff)
                np.testing.assert_allclose(back, f, atol=1e-3)

    def test_parity(self) -> None:
        grid = self.grid(0.5, half_width=10.0, points=256)
        transform = DunklTransform(grid, SpectralGrid.from_grid(grid))
        even = self.gaussian(grid)
        odd = grid.axis_nodes * even
        self.assertLess(float(np.abs(transform.transform(even).imag).max()), 1e-12)
        self.assertLess(float(np.abs(transform.transform(odd).real).max()), 1e-12)

    def test_shared(self) -> None:
        grid = self.grid(0.5, points=64)
        sgrid = SpectralGrid.from_grid(grid)
        self.assertIs(transform_for(grid, sgrid), transform_for(grid, sgrid))
        with self.assertRaises(ValueError):
            DunklTransform(grid, SpectralGrid.from_grid(self.grid(1.0, points=64)))

    def test_batch(self) -> None:
        grid = self.grid(0.5, points=64)
        transform = transform_for(grid, SpectralGrid.from_grid(grid))
        F = np.stack([self.gaussian(grid), self.gaussian(grid, width=0.5)])
        np.testing.assert_allclose(transform.transform(F)[1], transform.transform(F[1]))


class TestTranslation(GridTestMixin, unittest.TestCase):
    def test_shift(self) -> None:
        grid = self.grid(half_width=10.0, points=256)
        sgrid = SpectralGrid.from_grid(grid)
        f = self.gaussian(grid, width=0.7)
        res = dunkl_translate(grid, sgrid, grid.root_system, [1.0], f)
        expected = np.exp(-((grid.axis_nodes + 1.0) ** 2) / (2 * 0.7**2))
        np.testing.assert_allclose(res, expected, atol=1e-6)
        self.assertFalse(np.iscomplexobj(res))

    def test_origin(self) -> None:
        grid = self.grid(1.0, half_width=10.0, points=256)
        sgrid = SpectralGrid.from_grid(grid)
        f = self.gaussian(grid, center=0.5)
        res = dunkl_translate(grid, sgrid, grid.root_system, [0.0], f)
        transform = transform_for(grid, sgrid)
        np.testing.assert_allclose(res, transform.inverse_transform(transform.transform(f)).real)

    def test_convolution_with_ball(self) -> None:
        grid = self.grid(half_width=10.0, points=256)
        transform = transform_for(grid, SpectralGrid.from_grid(grid))
        f = self.gaussian(grid)
        stacked = transform.convolve_balls(f, [0.5, 1.0])
        self.assertEqual(stacked.shape, (2, 256))
        single = transform.convolve(f, (grid.radius <= 1.0).astype(float))
        np.testing.assert_allclose(stacked[1], single, atol=1e-12)
        # f is band limited: the result is Σ_k f(x - y_k)·h over the ball nodes y_k
        x = grid.axis_nodes[128]
        ball = grid.axis_nodes[np.abs(grid.axis_nodes) <= 1.0]
        expected = float(np.sum(np.exp(-((x - ball) ** 2) / 2)) * grid.h)
        self.assertAlmostEqual(stacked[1][128], expected, delta=1e-6)


class TestNegativity(GridTestMixin, unittest.TestCase):
    def test_translated_ball(self) -> None:
        for kappa, shift in ((0.5, 0.5), (1.0, 2.0)):
            grid = self.grid(kappa, half_width=10.0, points=256)
            sgrid = SpectralGrid.from_grid(grid)
            ball = ball_indicator(grid, 1.0, mollify=0.2)
            witness = negativity_witness(grid, dunkl_translate(grid, sgrid, grid.root_system, [shift], ball))
            with self.subTest(kappa=kappa):
                self.assertTrue(witness.negative)
                self.assertLess(witness.value, -1e-3)

    def test_witness(self) -> None:
        grid = self.grid(half_width=2.0, points=4)
        witness = negativity_witness(grid, np.array([1.0, -0.5, 0.0, 2.0]))
        self.assertTrue(witness.negative)
        self.assertEqual(witness.value, -0.5)
        self.assertEqual(witness.point, (-0.5,))
        self.assertFalse(negativity_witness(grid, np.ones(4)).negative)
