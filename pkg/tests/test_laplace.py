"""Shifted transforms and contour inversion against closed forms."""

import numpy as np
import pytest

from nmkraus import laplace as lp
from nmkraus.reservoir import LaplaceDomainError

W0 = 3.0
GAM = 0.5


class TestGrids:
    def test_validation(self):
        with pytest.raises(ValueError):
            lp.ContourGrid(2.0, 1.0)
        with pytest.raises(ValueError):
            lp.ContourGrid(0.0, 1.0, n_points=8)
        with pytest.raises(ValueError):
            lp.ContourGrid(0.0, 1.0, rule="Simpson")
        with pytest.raises(ValueError):
            lp.ContourGrid(0.0, 1.0, im_offset=0.0)
        with pytest.raises(ValueError):
            lp.ShiftedTransformSpec(1.0, -0.1)

    def test_clenshaw_curtis_weights(self):
        x, w = lp._clenshaw_curtis(3)
        assert np.allclose(w, [1 / 3, 4 / 3, 1 / 3])
        x, w = lp._clenshaw_curtis(1025)
        assert abs(np.sum(w) - 2.0) < 1e-13
        assert abs(np.sum(w * x * x) - 2.0 / 3.0) < 1e-13
        assert abs(np.sum(w * x**8) - 2.0 / 9.0) < 1e-12


class TestForwardTransform:
    def test_constant_finite_window(self):
        z = W0 + 2.0j
        T = 8.0
        got = lp.forward_transform(lambda t: 1.0 + 0.0j, W0, z, T=T, tail_tol=1.0)
        ref = -1j * (np.exp(1j * (z - W0) * T) - 1.0) / (1j * (z - W0))
        assert abs(got - ref) < 1e-10

    def test_phase_only_pole(self):
        z = W0 + 2.0j
        got = lp.forward_transform(lambda t: np.exp(-1j * W0 * t), 0.0, z, T=20.0)
        assert abs(got - 1.0 / (z - W0)) < 1e-8

    def test_damped_row_frame(self):
        # decaying residue in the frame of its row shift
        z = W0 + 2.0j
        got = lp.forward_transform(lambda t: np.exp(-GAM * t), W0, z, T=20.0)
        assert abs(got - 1.0 / (z - W0 + 1j * GAM)) < 1e-8

    def test_sampled_input(self):
        t = np.linspace(0.0, 20.0, 4001)
        z = 1.0 + 1.5j
        got = lp.forward_transform(np.exp(-0.8 * t), 0.0, z, t=t)
        assert abs(got - 1.0 / (z + 0.8j)) < 1e-8

    def test_domain_error(self):
        with pytest.raises(LaplaceDomainError):
            lp.forward_transform(lambda t: 1.0, 0.0, 1.0 - 0.1j, T=10.0)

    def test_tail_truncation_error(self):
        # non-decaying sample with weak contour damping: tail is large
        with pytest.raises(lp.TailTruncationError):
            lp.forward_transform(lambda t: 1.0 + 0.0j, 0.0, 1.0 + 0.1j, T=20.0)

    def test_linearity(self):
        rng = np.random.default_rng(21)
        z = 2.0 + 1.0j
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        t = np.linspace(0.0, 40.0, 8001)
        f = np.exp(-0.5 * t - 2j * t)
        g = np.exp(-0.9 * t + 1j * t)
        va = lp.forward_transform(f, 0.0, z, t=t)
        vb = lp.forward_transform(g, 0.0, z, t=t)
        vc = lp.forward_transform(a * f + b * g, 0.0, z, t=t)
        assert abs(vc - a * va - b * vb) < 1e-12


class TestInvert:
    def test_oscillator_pole(self):
        # node spacing must resolve the contour height (trapezoid error
        # ~exp(-2 pi eps/h)); 2e6 nodes over +-50 give h = eps/2
        grid = lp.ContourGrid(W0 - 50, W0 + 50, 2_000_001, "Trapezoid", 1e-4)
        F = lambda z: 1.0 / (z - W0)
        for t in (5.0, 7.0, 10.0):
            got = lp.invert(F, grid, t)
            assert abs(got - np.exp(-1j * W0 * t)) <= 1e-3

    def test_initial_time_jump_average(self):
        # one-sided series inverts to the half-sum at the t=0 jump
        grid = lp.ContourGrid(W0 - 50, W0 + 50, 2_000_001, "Trapezoid", 1e-4)
        got = lp.invert(lambda z: 1.0 / (z - W0), grid, 0.0)
        assert abs(got - 0.5) < 2e-3

    def test_window_too_narrow(self):
        grid = lp.ContourGrid(W0 - 50, W0 + 50, 20000, "Trapezoid", 1e-4)
        with pytest.raises(lp.WindowTooNarrowError):
            lp.invert(lambda z: 1.0 / (z - W0 + 1j * GAM), grid, 1.0)

    def test_damped_pole_by_splitting(self):
        # intended workflow for transforms with 1/z tails: peel the pole,
        # invert the flat remainder, add the closed-form series back
        grid = lp.ContourGrid(W0 - 50, W0 + 50, 20000, "Trapezoid", 1e-4)
        p = W0 - 1j * GAM
        rest = lp.subtract_poles(lambda z: 1.0 / (z - p), [p], [1.0])
        t = np.linspace(0.0, 10.0, 21)
        back = lp.invert(rest, grid, t, boundary_tol=np.inf) + lp.pole_series([p], [1.0], t)
        assert np.max(np.abs(back - np.exp(-1j * p * t))) < 1e-12

    def test_damped_pole_direct_window_tail(self):
        # direct inversion carries the ~1/(pi W t) window tail
        grid = lp.ContourGrid(W0 - 50, W0 + 50, 20000, "Trapezoid", 1e-4)
        t = np.array([1.0, 3.0, 7.0])
        got = lp.invert(lambda z: 1.0 / (z - W0 + 1j * GAM), grid, t, boundary_tol=0.05)
        ref = np.exp(-1j * W0 * t - GAM * t)
        assert np.max(np.abs(got - ref)) < 2e-2
        assert abs(got[-1] - ref[-1]) < 2e-3

    def test_rules_agree_on_smooth_integrand(self):
        F = lambda z: 1.0 / (z - W0 + 1j * GAM)
        gt = lp.ContourGrid(W0 - 50, W0 + 50, 20000, "Trapezoid", 1e-4)
        gc = lp.ContourGrid(W0 - 50, W0 + 50, 4097, "ClenshawCurtis", 1e-4)
        a = lp.invert(F, gt, 0.3, boundary_tol=0.05)
        b = lp.invert(F, gc, 0.3, boundary_tol=0.05)
        assert abs(a - b) < 1e-5

    def test_linearity(self):
        rng = np.random.default_rng(11)
        a1, a2 = rng.normal(size=2) + 1j * rng.normal(size=2)
        Fa = lambda z: 1.0 / (z - 2.0 + 0.7j)
        Fb = lambda z: 1.0 / (z - 4.0 + 1.1j)
        Fc = lambda z: a1 * Fa(z) + a2 * Fb(z)
        grid = lp.ContourGrid(W0 - 50, W0 + 50, 20000, "Trapezoid", 1e-4)
        va = lp.invert(Fa, grid, 1.7, boundary_tol=0.05)
        vb = lp.invert(Fb, grid, 1.7, boundary_tol=0.05)
        vc = lp.invert(Fc, grid, 1.7, boundary_tol=0.05)
        assert abs(vc - a1 * va - a2 * vb) < 1e-13

    def test_real_series_conjugation(self):
        # a real time series has F obeying conj(F(-conj z)) = -F(z);
        # the mirrored evaluator must invert to the same (real) series
        F = lambda z: 0.5 / (z - W0 + 1j * GAM) + 0.5 / (z + W0 + 1j * GAM)
        G = lambda z: -np.conj(F(-np.conj(z)))
        grid = lp.ContourGrid(-60, 60, 24000, "Trapezoid", 1e-4)
        t = np.linspace(2.0, 8.0, 13)
        a = lp.invert(F, grid, t, boundary_tol=0.05)
        b = lp.invert(G, grid, t, boundary_tol=0.05)
        ref = np.cos(W0 * t) * np.exp(-GAM * t)
        assert np.max(np.abs(a - b)) < 1e-12
        assert np.max(np.abs(a.imag)) < 2e-3
        assert np.max(np.abs(a - ref)) < 5e-3


class TestRoundTrip:
    def setup_method(self):
        T, ns = 30.0, 3000
        self.tg = np.linspace(0.0, T, ns + 1)
        self.fs = np.exp(-GAM * self.tg - 1j * W0 * self.tg)

    def test_split_pole_route_full_range(self):
        grid = lp.ContourGrid(W0 - 40, W0 + 40, 4000, "Trapezoid", 1e-4)
        om, _ = grid.nodes()
        FT = np.array(
            [lp.forward_transform(self.fs, 0.0, w + 1e-4j, t=self.tg) for w in om]
        )
        p = W0 - 1j * GAM
        restv = FT - 1.0 / (om + 1e-4j - p)
        t = np.linspace(0.0, 10.0, 41)
        back = lp.invert(restv, grid, t, boundary_tol=np.inf) + lp.pole_series([p], [1.0], t)
        assert np.max(np.abs(back - np.exp(-GAM * t - 1j * W0 * t))) < 1e-5

    def test_direct_route_wide_window(self):
        grid = lp.ContourGrid(W0 - 160, W0 + 160, 20000, "Trapezoid", 1e-4)
        om, _ = grid.nodes()
        FT = np.array(
            [lp.forward_transform(self.fs, 0.0, w + 1e-4j, t=self.tg) for w in om]
        )
        t = np.linspace(2.0, 10.0, 33)
        back = lp.invert(FT, grid, t, boundary_tol=0.02)
        assert np.max(np.abs(back - np.exp(-GAM * t - 1j * W0 * t))) <= 1e-3
