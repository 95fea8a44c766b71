"""Propagator solvers: Volterra time stepping, contour-line fixed point."""

import functools

import numpy as np
import pytest

from nmkraus import kraus as kr
from nmkraus import laplace as lp
from nmkraus import reservoir as rv


def two_level(sd, beta_inv=0.0, w21=None):
    if w21 is None:
        w21 = sd.params[1]
    kern = rv.kernel_table(sd, {(2, 1, 1, 2): 1.0}, beta_inv=beta_inv)
    return kr.SystemSpec((0.0, w21), kern)


@functools.lru_cache(maxsize=None)
def far_resonant():
    # line center far from zero: the half-line kernel is close to the
    # full-line one, so the two-pole closed form is a tight oracle
    sd = rv.SpectralDensity.lorentzian(0.5, 200.0, 1.0)
    return two_level(sd)


@functools.lru_cache(maxsize=None)
def far_resonant_solution():
    return kr.solve_time_domain(far_resonant(), 10.0, 2e-3)


def two_pole_reference(t, gam, lam):
    # resonant quadratic closure of the Laplace image: two simple poles
    root = np.sqrt(4.0 * gam - lam**2 + 0j)
    xp, xm = (-1j * lam + root) / 2.0, (-1j * lam - root) / 2.0
    rp = (xp + 1j * lam) / (xp - xm)
    rm = (xm + 1j * lam) / (xm - xp)
    return rp * np.exp(-1j * xp * t) + rm * np.exp(-1j * xm * t)


class TestSystemSpec:
    def test_validation(self):
        sd = rv.SpectralDensity.lorentzian(0.5, 5.0, 1.0)
        kern = rv.kernel_table(sd, {(2, 1, 1, 2): 1.0})
        with pytest.raises(ValueError):
            kr.SystemSpec((5.0, 0.0), kern)
        with pytest.raises(ValueError):
            kr.SystemSpec((0.0,), kern)  # slot label 2 out of range
        sys = kr.SystemSpec((0.0, 5.0), kern)
        assert sys.dim == 2
        assert sys.slot_items() == [((1, 0, 0, 1), 1.0 + 0.0j)]

    def test_degenerate_energies_allowed(self):
        sd = rv.SpectralDensity.lorentzian(0.5, 5.0, 1.0)
        kern = rv.kernel_table(sd, {(2, 1, 1, 2): 1.0})
        sys = kr.SystemSpec((5.0, 5.0), kern)
        sol = kr.solve_time_domain(sys, 0.1, 0.05)
        assert np.all(np.isfinite(sol.values))


class TestTimeDomain:
    def test_zero_kernel_is_identity(self):
        sys = kr.SystemSpec((0.0, 3.0, 7.5), rv.kernel_table(
            rv.SpectralDensity.flat_window(0.1, 1.0, 2.0), {}))
        sol = kr.solve_time_domain(sys, 2.0, 0.01)
        assert np.max(np.abs(sol.values - np.eye(3))) == 0

    def test_initial_identity_exact(self):
        sol = far_resonant_solution()
        assert np.all(sol.values[0] == np.eye(2))

    def test_lorentzian_matches_two_pole_closure(self):
        sol = far_resonant_solution()
        ref = two_pole_reference(sol.grid, 0.5, 1.0)
        assert np.max(np.abs(sol.entry(2, 2) - ref)) < 1e-4
        # single raising-lowering slot leaves the rest of the matrix free
        assert np.max(np.abs(sol.entry(1, 1) - 1.0)) == 0
        assert np.max(np.abs(sol.entry(1, 2))) == 0
        assert np.max(np.abs(sol.entry(2, 1))) == 0

    def test_step_halving_is_second_order(self):
        # self-convergence against a fine grid; the closed-form reference
        # carries its own model error and would floor the ratio
        sys = far_resonant()
        fine = kr.solve_time_domain(sys, 5.0, 1e-3)
        errs = []
        for dt in (8e-3, 4e-3):
            sol = kr.solve_time_domain(sys, 5.0, dt)
            stride = round(dt / 1e-3)
            ref = fine.entry(2, 2)[::stride]
            errs.append(np.max(np.abs(sol.entry(2, 2) - ref)))
        assert 3.0 < errs[0] / errs[1] < 5.5

    def test_wideband_exponential_decay(self):
        w21, half = 5.0, 2.0
        h = half / (40.0 * np.pi)
        gam = np.pi * h
        sys = two_level(rv.SpectralDensity.flat_window(h, w21 - half, w21 + half), w21=w21)
        sol = kr.solve_time_domain(sys, 3.0 / gam, 3.0 / gam / 6000)
        mask = sol.grid > 0
        ref = np.exp(-gam * sol.grid[mask])
        dev = np.abs(np.abs(sol.entry(2, 2)[mask]) - ref) / ref
        assert np.max(dev) < 0.05

    def test_solver_diagnostics(self):
        sol = far_resonant_solution()
        assert sol.max_residual < 1e-11
        assert sol.picard_iters < 10
        assert sol.lipschitz > 0
        assert sol.stability_margin() <= 1e-12

    def test_convergence_error_carries_step(self):
        sys = far_resonant()
        with pytest.raises(kr.ConvergenceError) as exc:
            kr.solve_time_domain(sys, 1.0, 1e-2, picard_tol=1e-16, max_iters=1)
        assert exc.value.step == 1

    def test_grid_validation(self):
        sys = far_resonant()
        with pytest.raises(ValueError):
            kr.solve_time_domain(sys, 1.0, 0.0)
        with pytest.raises(ValueError):
            kr.solve_time_domain(sys, 1.0, 1e-9, max_steps=1000)

    def test_csv_dump_round_trips(self, tmp_path):
        sys = far_resonant()
        sol = kr.solve_time_domain(sys, 0.2, 0.05)
        path = tmp_path / "w.csv"
        sol.dump_csv(path)
        lines = path.read_text().strip().split("\n")
        assert lines[0].split(",")[:3] == ["t", "re_1_1", "im_1_1"]
        assert len(lines) == len(sol.grid) + 1
        last = np.array(lines[-1].split(","), dtype=float)
        assert last[0] == sol.grid[-1]
        w22 = last[7] + 1j * last[8]
        assert abs(w22 - sol.entry(2, 2)[-1]) < 1e-15


@functools.lru_cache(maxsize=None)
def near_resonant():
    return two_level(rv.SpectralDensity.lorentzian(1.0, 5.0, 1.0))


class TestLaplaceDomain:
    def test_zero_kernel_free_resolvent(self):
        sys = kr.SystemSpec((0.0, 3.0), rv.kernel_table(
            rv.SpectralDensity.flat_window(0.1, 1.0, 2.0), {}))
        lk = kr.solve_continued_fraction(sys, 16, [1.0 + 1.0j, -4.0 + 0.3j])
        for z in (1.0 + 1.0j, -4.0 + 0.3j, 2.5 + 7.0j):
            got = lk.evaluate(z)
            ref = np.diag(1.0 / (z - np.array([0.0, 3.0])))
            assert np.max(np.abs(got - ref)) < 1e-15
            assert lk.cauchy_at(z) == 0

    def test_two_level_closes_at_depth_two(self):
        sys = near_resonant()
        sd = sys.base_density()[0]
        z = 5.0 + 0.5j
        lk = kr.solve_continued_fraction(sys, 2, [z])
        exact = 1.0 / (z - 5.0 - rv.correlation_laplace(sd, z - 0.0))
        got = lk.evaluate(z)
        assert abs(got[1, 1] - exact) / abs(exact) < 1e-6
        assert abs(got[0, 0] - 1.0 / z) < 1e-10
        assert lk.cauchy[z] < 1e-12

    def test_cross_solver_agreement(self):
        sol = far_resonant_solution()
        lk = kr.LaplaceKraus(far_resonant(), 32)
        rng = np.random.default_rng(20240817)
        for _ in range(10):
            z = (195.0 + 10.0 * rng.random()) + 1j * (1.0 + 2.0 * rng.random())
            ft = lp.forward_transform(sol.entry(2, 2), 200.0, z, t=sol.grid)
            wz = lk.evaluate(z)[1, 1]
            assert abs(ft - wz) / abs(wz) < 1e-3

    def test_asymptotic_free_behaviour(self):
        sys = near_resonant()
        lk = kr.LaplaceKraus(sys, 16)
        scale = sys.base_density()[0].frequency_scale()
        z = 5.0 + 1e3j * scale
        got = lk.evaluate(z)
        en = np.array(sys.energies)
        assert np.max(np.abs(np.diag(got) * (z - en) - 1.0)) < 1e-3
        # far outside the window the deviation has decayed below floor
        z = 2.0e3 + 5.0j
        got = lk.evaluate(z)
        assert np.max(np.abs(np.diag(got) - 1.0 / (z - en))) < 1e-18

    def test_identity_zero_kernel(self):
        sys = kr.SystemSpec((0.0, 3.0), rv.kernel_table(
            rv.SpectralDensity.flat_window(0.1, 1.0, 2.0), {}))
        z = 0.7 + 0.9j
        out = kr.laplace_inverse_identity(sys, lambda zz: np.eye(2), z)
        assert np.max(np.abs(out - np.diag(z - np.array([0.0, 3.0])))) == 0

    def test_identity_matches_closed_two_level_entry(self):
        sys = near_resonant()
        sd = sys.base_density()[0]
        lk = kr.solve_continued_fraction(sys, 16, [5.0 + 0.5j])
        z = 5.0 + 0.5j
        out = kr.laplace_inverse_identity(sys, lk, z)
        ref = z - 5.0 - rv.correlation_laplace(sd, z - 0.0)
        assert abs(out[1, 1] - ref) < 1e-8
        assert abs(out[0, 0] - (z - 0.0)) < 1e-12

    def test_identity_inverts_converged_image(self):
        sys = near_resonant()
        for z in (5.0 + 0.5j, 3.0 + 2.0j):
            lk = kr.solve_continued_fraction(sys, 32, [z])
            ident = kr.laplace_inverse_identity(sys, lk, z)
            resid = ident @ lk.evaluate(z) - np.eye(2)
            assert np.max(np.abs(resid)) < 1e-6

    def test_contour_ordering_errors(self):
        sys = near_resonant()
        lk = kr.LaplaceKraus(sys, 8)
        with pytest.raises(kr.ContourOrderingError):
            lk.evaluate(5.0 - 0.1j)
        with pytest.raises(kr.ContourOrderingError):
            kr.laplace_inverse_identity(sys, lk, 5.0 + 0.3j, y_height=0.5)
        with pytest.raises(kr.ContourOrderingError):
            kr.solve_continued_fraction(sys, 8, [5.0 + 0.0j])

    def test_singular_near_real_axis(self):
        sys = near_resonant()
        lk = kr.LaplaceKraus(sys, 8)
        with pytest.raises(kr.SingularOperatorError):
            lk.evaluate(5.0 + 1e-13j)

    def test_poles_stay_on_real_axis(self):
        # off the support of the shifted levels the boundary values are
        # insensitive to the approach distance
        sys = near_resonant()
        lk = kr.LaplaceKraus(sys, 32)
        for om in (-8.0, 30.0):
            vals = [np.max(np.abs(lk.evaluate(om + 1j * e))) for e in (1e-2, 1e-3, 1e-4)]
            assert max(vals) / min(vals) < 1.05

    def test_cauchy_riemann_residuals(self):
        sys = near_resonant()
        lk = kr.LaplaceKraus(sys, 32)
        h = 1e-3
        for z in (5.0 + 0.1j, 4.0 + 0.5j, 6.5 + 1.0j):
            fx = (lk.evaluate(z + h) - lk.evaluate(z - h)) / (2 * h)
            fy = (lk.evaluate(z + 1j * h) - lk.evaluate(z - 1j * h)) / (2 * h)
            assert np.max(np.abs(fx + 1j * fy)) / 2 < 1e-5

    def test_collapse_matches_nested_contour_quadrature(self):
        # tabulated density: the omega-axis exchange against an explicit
        # y-line integral of chat(y) W(z - y)
        om = np.linspace(2.0, 8.0, 121)
        g2 = 0.2 * np.exp(-((om - 5.0) ** 2))
        g2[0] = g2[-1] = 0.0
        sd = rv.SpectralDensity.tabulated(om, g2)
        sys = two_level(sd, w21=5.0)
        z = 5.0 + 0.8j
        lk = kr.solve_continued_fraction(sys, 32, [z])
        ident = kr.laplace_inverse_identity(sys, lk, z)
        collapsed = ident[1, 1] - (z - 5.0)
        eta = 0.4
        x = np.linspace(-1000.0, 1000.0, 400_001)
        y = x + 1j * eta
        chat = np.empty(x.size, dtype=complex)
        for lo in range(0, x.size, 20000):
            yy = y[lo:lo + 20000]
            chat[lo:lo + 20000] = np.trapezoid(g2 / (yy[:, None] - om), om, axis=1)
        w11 = 1.0 / (z - y - 0.0)
        nested = np.trapezoid(chat * w11, x) / (2j * np.pi)
        assert abs(collapsed - nested) < 1e-3


class TestWeakCoupling:
    def test_flat_sweep_converges_to_markov_resolvent(self):
        h, w21 = 0.05, 5.0
        sys = two_level(rv.SpectralDensity.flat_window(h, w21 - 2, w21 + 2), w21=w21)
        gamma = np.pi * h
        eps = 1e-3
        wt = np.linspace(-4, 4, 17)
        ref = 1.0 / (wt + 1j * (gamma + eps))
        devs = []
        for lam in (0.5, 0.25, 0.125):
            out = kr.weak_coupling_limit(sys, lam, wt, eps_tilde=eps)
            devs.append(np.max(np.abs(out[:, 1, 1] - ref) / np.abs(ref)))
        assert devs[1] < 0.35 * devs[0]
        assert devs[2] < 0.35 * devs[1]
        assert devs[2] < 1e-2

    def test_width_matches_wideband_damping(self):
        h, w21 = 0.05, 5.0
        sys = two_level(rv.SpectralDensity.flat_window(h, w21 - 2, w21 + 2), w21=w21)
        gamma = np.pi * h
        eps = 1e-3
        out = kr.weak_coupling_limit(sys, 0.125, np.array([0.0]), eps_tilde=eps)
        width = -1.0 / np.imag(out[0, 1, 1]) - eps
        assert abs(width - gamma) / gamma < 0.02

    def test_zero_coupling_gives_bare_resolvent(self):
        sys = kr.SystemSpec((0.0, 5.0), rv.kernel_table(
            rv.SpectralDensity.flat_window(0.1, 4.0, 6.0), {}))
        wt = np.array([-2.0, -0.5, 0.7, 3.0])
        out = kr.weak_coupling_limit(sys, 0.25, wt, eps_tilde=1e-12)
        assert np.max(np.abs(out[:, 1, 1] - 1.0 / wt)) < 1e-9

    def test_offdiagonal_entries_decay_with_lambda(self):
        sd = rv.SpectralDensity.flat_window(0.05, 3.0, 7.0)
        slots = {(2, 1, 1, 2): 1.0, (3, 1, 1, 3): 1.0,
                 (2, 1, 1, 3): 0.5, (3, 1, 1, 2): 0.5}
        sys3 = kr.SystemSpec((0.0, 5.0, 5.4), rv.kernel_table(sd, slots))
        offs = []
        for lam in (0.5, 0.25, 0.125):
            out = kr.weak_coupling_limit(sys3, lam, np.array([0.0]), anchor=2)
            offs.append(abs(out[0, 1, 2]))
        assert offs[1] < 0.5 * offs[0]
        assert offs[2] < 0.5 * offs[1]

    def test_lambda_validation(self):
        sys = near_resonant()
        with pytest.raises(ValueError):
            kr.weak_coupling_limit(sys, 0.0, 1.0)
        with pytest.raises(ValueError):
            kr.weak_coupling_limit(sys, 1.5, 1.0)


class TestThermal:
    def test_cross_solver_and_identity_at_temperature(self):
        sd = rv.SpectralDensity.flat_window(0.04, 4.0, 8.0)
        sys = two_level(sd, beta_inv=2.0, w21=6.0)
        sol = kr.solve_time_domain(sys, 6.0, 2.5e-3)
        z = 6.0 + 3.5j
        lk = kr.solve_continued_fraction(sys, 48, [z])
        ft = lp.forward_transform(sol.entry(2, 2), 6.0, z, t=sol.grid)
        wz = lk.evaluate(z)[1, 1]
        assert abs(ft - wz) / abs(wz) < 1e-5
        ident = kr.laplace_inverse_identity(sys, lk, z)
        assert np.max(np.abs(ident @ lk.evaluate(z) - np.eye(2))) < 1e-6
