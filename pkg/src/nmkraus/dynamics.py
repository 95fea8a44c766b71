"""Two-time density-matrix evolution and closed-form reference channels.

The propagator amplitudes from :mod:`nmkraus.kraus` seed a two-time
matrix whose equal-time diagonal is the reduced density matrix.  This
module integrates that two-time equation, extracts and audits the
resulting trajectory, and supplies the textbook decay laws the solver
must reproduce in its limiting regimes.
"""

from dataclasses import dataclass

import numpy as np

from . import laplace as lp
from . import reservoir as rv
from .kraus import (
    ConvergenceError,
    KrausZero,
    SystemSpec,
    _chat_line,
    _fold_modes,
    _kernel_on_grid,
)

__all__ = [
    "BitemporalState",
    "ConservationReport",
    "DensityTrajectory",
    "GridMismatchError",
    "StateValidationError",
    "audit_conservation",
    "channel_pair",
    "extract_density",
    "markovian_channel",
    "solve_bitemporal",
    "two_level_trajectory",
    "wigner_weisskopf",
]


class GridMismatchError(ValueError):
    """Propagator samples do not line up with the requested time grid."""


class StateValidationError(ValueError):
    """Initial state fails the Hermiticity, trace or positivity checks."""


def _validate_density(rho0, dim):
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (dim, dim):
        raise StateValidationError(f"initial state must be {dim}x{dim}")
    scale = max(1.0, float(np.max(np.abs(rho0))))
    if np.max(np.abs(rho0 - rho0.conj().T)) > 1e-12 * scale:
        raise StateValidationError("initial state is not Hermitian")
    if abs(np.trace(rho0) - 1.0) > 1e-10:
        raise StateValidationError("initial state must have unit trace")
    if np.min(np.linalg.eigvalsh(rho0)) < -1e-10:
        raise StateValidationError("initial state is not positive semidefinite")
    return rho0


@dataclass(frozen=True)
class BitemporalState:
    """Two-time matrix field on a square grid, with solver diagnostics.

    ``values[i, j]`` holds the matrix at ``(t_i, t_j)``; the field is
    Hermitian under exchange of its two times, ``values[0, 0]`` is the
    initial state, and ``max_residual`` is the worst per-node
    fixed-point defect left by the sweep.
    """

    grid: np.ndarray
    values: np.ndarray
    max_residual: float


@dataclass(frozen=True)
class DensityTrajectory:
    """Hermitian density matrices on a time grid.

    ``herm_residual`` records the largest anti-Hermitian part removed
    during extraction; it doubles as an accuracy diagnostic.
    """

    times: np.ndarray
    matrices: np.ndarray
    herm_residual: float

    def trace_errors(self):
        return np.abs(np.einsum("tkk->t", self.matrices) - 1.0)

    def min_eigenvalues(self):
        return np.linalg.eigvalsh(self.matrices)[:, 0]

    def dump_csv(self, path):
        """Write t, re/im of each entry row-major, trace error, min eig."""
        dim = self.matrices.shape[1]
        cols = ["t"]
        for k in range(1, dim + 1):
            for l in range(1, dim + 1):
                cols += [f"re_{k}_{l}", f"im_{k}_{l}"]
        cols += ["trace_err", "min_eig"]
        terr = self.trace_errors()
        mineig = self.min_eigenvalues()
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for i, t in enumerate(self.times):
                row = [f"{t:.17g}"]
                for k in range(dim):
                    for l in range(dim):
                        v = self.matrices[i, k, l]
                        row += [f"{v.real:.17g}", f"{v.imag:.17g}"]
                row += [f"{terr[i]:.17g}", f"{mineig[i]:.17g}"]
                fh.write(",".join(row) + "\n")


def solve_bitemporal(sys: SystemSpec, W: KrausZero, rho0, T, dt, *,
                     node_tol=1e-12, max_iters=8) -> BitemporalState:
    """Integrate the two-time equation by causal forward substitution.

    The explicit free phases are absorbed into the propagator columns,
    which turns the memory term into causal convolutions: per grid
    column the cross-time part collapses to one matrix product plus an
    FFT, and only the same-column couplings walk node by node.  Each
    node's weak self-coupling (it enters its own trapezoid cell) is
    resolved by fixed-point iteration; the worst defect is reported as
    ``max_residual``.

    Raises
    ------
    GridMismatchError
        If ``W`` is not sampled with step ``dt`` on at least ``[0, T]``.
    StateValidationError
        If ``rho0`` is not a density matrix.
    ConvergenceError
        If a node's fixed point stalls, with ``step`` set to its row.
    """
    dim = sys.dim
    rho0 = _validate_density(rho0, dim)
    if dt <= 0 or T <= 0:
        raise ValueError("need T > 0 and dt > 0")
    n = int(round(T / dt))
    if abs(n * dt - T) > 1e-9 * max(T, 1.0):
        raise GridMismatchError("T must be an integer multiple of dt")
    if W.grid.shape[0] < n + 1:
        raise GridMismatchError("propagator grid does not reach T")
    tg = W.grid[: n + 1]
    if np.max(np.abs(tg - np.arange(n + 1) * dt)) > 1e-9 * (T + dt):
        raise GridMismatchError("propagator grid step differs from dt")

    en = np.asarray(sys.energies, dtype=float)
    B = np.exp(-1j * np.outer(tg, en))[:, :, None] * W.values[: n + 1]
    line = _kernel_on_grid(sys, np.arange(-n, n + 1) * dt)
    # KD[s, sp] = kernel((sp - s) dt); a reversed sliding view, no copy
    KD = np.lib.stride_tricks.sliding_window_view(line, n + 1)[::-1]
    slots = sys.slot_items()
    eye = np.eye(dim)

    xi = np.zeros((n + 1, n + 1, dim, dim), dtype=complex)
    base0 = B @ rho0
    xi[:, 0] = base0
    xi[0, :] = np.conj(np.swapaxes(base0, 1, 2))

    nfft = 1
    while nfft < 2 * (n + 1):
        nfft *= 2
    fb_cols = np.fft.fft(B, nfft, axis=0)
    scale = max(1.0, float(np.max(np.abs(rho0))))
    max_resid = 0.0

    for j in range(1, n + 1):
        tw_in = np.full(j, dt)
        tw_in[0] = 0.5 * dt
        Gj = np.conj(B[j:0:-1])
        kap_j = KD[:, j]
        c1 = []
        for (ia, ib, ic, id_), _ in slots:
            M = KD[:, :j] * xi[:, :j, id_, ia] * tw_in
            Rm = M @ Gj[:, :, ib]
            fr = np.fft.fft(Rm, nfft, axis=0)
            conv = np.fft.ifft(fb_cols[:, :, ic, None] * fr[:, None, :], axis=0)[: n + 1]
            part = dt * conv
            part -= 0.5 * dt * B[:, :, ic][:, :, None] * Rm[0][None, None, :]
            part -= 0.5 * dt * eye[:, ic][None, :, None] * Rm[:, None, :]
            c1.append(part)
        RB = rho0 @ B[j].conj().T
        for i in range(j, n + 1):
            fixed = B[i] @ RB
            for s_idx, ((ia, ib, ic, id_), wgt) in enumerate(slots):
                fixed = fixed + wgt * c1[s_idx][i]
                vec = 0.5 * dt * kap_j[:i] * xi[:i, j, id_, ia]
                vec[0] *= 0.5
                vec *= dt
                fixed[:, ib] += wgt * (B[i:0:-1, :, ic].T @ vec)
            x = fixed
            resid = np.inf
            for _ in range(max_iters):
                xn = fixed.copy()
                for (ia, ib, ic, id_), wgt in slots:
                    xn[ic, ib] += wgt * 0.25 * dt * dt * kap_j[i] * x[id_, ia]
                resid = float(np.max(np.abs(xn - x)))
                x = xn
                if resid <= node_tol * scale:
                    break
            else:
                raise ConvergenceError(
                    f"node ({i},{j}) fixed point stalled at {resid:.3e}", step=i
                )
            max_resid = max(max_resid, resid)
            xi[i, j] = x
            if i > j:
                xi[j, i] = x.conj().T

    ph = np.exp(1j * np.outer(tg, en))
    xi *= ph[:, None, :, None]
    xi *= np.conj(ph)[None, :, None, :]
    return BitemporalState(grid=tg, values=xi, max_residual=max_resid)


def extract_density(xi: BitemporalState) -> DensityTrajectory:
    """Equal-time slice of the two-time field, Hermitized.

    The anti-Hermitian residue is averaged away and its maximum norm
    kept as ``herm_residual``.
    """
    npts = xi.grid.shape[0]
    idx = np.arange(npts)
    diag = xi.values[idx, idx]
    adj = np.conj(np.swapaxes(diag, 1, 2))
    herm = 0.5 * float(np.max(np.abs(diag - adj)))
    return DensityTrajectory(times=xi.grid, matrices=0.5 * (diag + adj),
                             herm_residual=herm)


def two_level_trajectory(sys: SystemSpec, W: KrausZero, rho0, *,
                         n_modes=4096) -> DensityTrajectory:
    """Closed refill form for the single raising-lowering slot.

    For a two-level system whose only slot feeds the ground state, the
    memory double integral factorizes over reservoir modes into a sum
    of squared prefix integrals.  That gives the trajectory in O(grid x
    modes) work and keeps every matrix positive semidefinite by
    construction, which makes long weak-coupling runs affordable where
    the full two-time sweep is not.
    """
    if sys.dim != 2:
        raise ValueError("refill form needs a two-level system")
    items = sys.slot_items()
    if [key for key, _ in items] != [(1, 0, 0, 1)]:
        raise ValueError("refill form needs exactly the raising-lowering slot")
    wgt = items[0][1]
    if abs(wgt.imag) > 1e-12 * abs(wgt) or wgt.real < 0:
        raise ValueError("slot weight must be real and nonnegative")
    rho0 = _validate_density(rho0, 2)

    sd, binv = sys.base_density()
    nu, mw = _fold_modes(sd, n_modes, binv)
    tg = W.grid
    dt = tg[1] - tg[0]
    w22 = W.values[:, 1, 1]
    w21 = sys.energies[1] - sys.energies[0]
    refill = np.zeros(tg.shape[0])
    for lo in range(0, nu.shape[0], 256):
        f = np.exp(1j * np.outer(tg, nu[lo:lo + 256] - w21)) * w22[:, None]
        pre = dt * (np.cumsum(f, axis=0) - 0.5 * (f + f[0][None, :]))
        refill += np.abs(pre) ** 2 @ mw[lo:lo + 256]

    mats = np.empty((tg.shape[0], 2, 2), dtype=complex)
    p2 = rho0[1, 1].real
    mats[:, 1, 1] = np.abs(w22) ** 2 * p2
    mats[:, 1, 0] = w22 * rho0[1, 0]
    mats[:, 0, 1] = np.conj(mats[:, 1, 0])
    mats[:, 0, 0] = rho0[0, 0].real + wgt.real * p2 * refill
    return DensityTrajectory(times=tg, matrices=mats, herm_residual=0.0)


@dataclass(frozen=True)
class ConservationReport:
    """Worst trace and positivity violations over a trajectory."""

    max_trace_error: float
    trace_time: float
    min_eigenvalue: float
    eigen_time: float
    trace_ok: bool
    positivity_ok: bool

    @property
    def passed(self):
        return self.trace_ok and self.positivity_ok


def audit_conservation(traj: DensityTrajectory, *, trace_tol=1e-6,
                       eig_tol=1e-10) -> ConservationReport:
    """Check unit trace and positive spectrum against tolerances.

    Small systems get a full spectrum at every step.  Past dimension 64
    a Cholesky probe (with the tolerance folded in as a diagonal shift)
    guards every step and full spectra are sampled every tenth step.
    """
    mats = traj.matrices
    terr = traj.trace_errors()
    it = int(np.argmax(terr))
    dim = mats.shape[1]
    if dim <= 64:
        mins = np.linalg.eigvalsh(mats)[:, 0]
        ie = int(np.argmin(mins))
        min_eig = float(mins[ie])
        probes_ok = True
    else:
        shift = 2.0 * eig_tol * np.eye(dim)
        probes_ok = True
        min_eig, ie = np.inf, 0
        for i in range(mats.shape[0]):
            if i % 10 == 0:
                lo = float(np.linalg.eigvalsh(mats[i])[0])
                if lo < min_eig:
                    min_eig, ie = lo, i
            else:
                try:
                    np.linalg.cholesky(mats[i] + shift)
                except np.linalg.LinAlgError:
                    probes_ok = False
                    lo = float(np.linalg.eigvalsh(mats[i])[0])
                    if lo < min_eig:
                        min_eig, ie = lo, i
    return ConservationReport(
        max_trace_error=float(terr[it]),
        trace_time=float(traj.times[it]),
        min_eigenvalue=min_eig,
        eigen_time=float(traj.times[ie]),
        trace_ok=bool(terr[it] <= trace_tol),
        positivity_ok=bool(probes_ok and min_eig >= -eig_tol),
    )


def wigner_weisskopf(sd: rv.SpectralDensity, omega1, omega2, t, *,
                     n_points=30001, im_offset=1e-6):
    """Excited-state population of the zero-temperature two-level atom.

    For a Lorentzian profile the Laplace image closes into a rational
    function with two poles from a quadratic, and the inversion is the
    corresponding pair of exponentials; the profile is treated on the
    whole frequency axis there, accurate when the line center dwarfs
    its width.  Other profiles go through numeric contour inversion of
    the closed two-level image.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("times must be >= 0")
    if sd.total_strength() == 0:
        return np.ones(t.shape)
    w21 = omega2 - omega1
    if sd.family == "Lorentzian":
        strength, center, width = sd.params
        delta = center - w21
        disc = np.sqrt((delta - 1j * width) ** 2 + 4.0 * strength + 0j)
        xp = 0.5 * ((delta - 1j * width) + disc)
        xm = 0.5 * ((delta - 1j * width) - disc)
        res_p = (xp - delta + 1j * width) / (xp - xm)
        res_m = (xm - delta + 1j * width) / (xm - xp)
        amp = res_p * np.exp(-1j * xp * t) + res_m * np.exp(-1j * xm * t)
        return np.abs(amp) ** 2

    gamma_est = max(-rv.correlation_boundary(sd, w21).imag, 1e-6 * sd.frequency_scale())
    span = 1500.0 * gamma_est + 20.0 * sd.frequency_scale()
    npts = max(n_points, int(16.0 * span / gamma_est) | 1)
    grid = lp.ContourGrid(omega2 - span, omega2 + span, npts,
                          "Trapezoid", im_offset)
    omega, _ = grid.nodes()
    zline = omega + 1j * im_offset
    image = 1.0 / (zline - omega2 - _chat_line(sd, 0.0, zline - omega1))
    # the 1/z asymptote carries the t=0 jump; peel off a reference pole
    # with the same asymptote, pushed below the axis so the contour
    # resolves it, and invert that part exactly
    ref_pole = omega2 - 1j * gamma_est
    rest = image - 1.0 / (zline - ref_pole)
    amp = lp.invert(rest, grid, t) + lp.pole_series([ref_pole], [1.0], t)
    return np.abs(amp) ** 2


def channel_pair(gamma, omega_bar, t):
    """Kraus pair of the amplitude-damping channel at time(s) t."""
    if gamma < 0:
        raise ValueError("decay rate must be >= 0")
    t = np.asarray(t, dtype=float)
    M = np.zeros(t.shape + (2, 2), dtype=complex)
    N = np.zeros(t.shape + (2, 2), dtype=complex)
    M[..., 0, 0] = 1.0
    M[..., 1, 1] = np.exp((-gamma + 1j * omega_bar) * t)
    N[..., 0, 1] = np.sqrt(1.0 - np.exp(-2.0 * gamma * t))
    return M, N


def markovian_channel(gamma, omega_bar, rho0, t):
    """Amplitude-damping evolution of ``rho0``; exactly trace preserving."""
    rho0 = np.asarray(rho0, dtype=complex)
    M, N = channel_pair(gamma, omega_bar, t)
    Mh = np.conj(np.swapaxes(M, -1, -2))
    Nh = np.conj(np.swapaxes(N, -1, -2))
    return M @ rho0 @ Mh + N @ rho0 @ Nh
