"""Resonant atom-cavity ladder with radiative damping.

Dressed two-level-plus-mode eigenbasis, the photon-block continued
fraction for the damping amplitude, the excited-population series, and
closed-form long-time references (plateau shape, maximum-entropy
scaling scan).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import fftconvolve
from scipy.special import gammaln

from . import dynamics as dy
from . import kraus as kr
from . import reservoir as rv

__all__ = [
    "DressedBasis",
    "DressedSystem",
    "EntropyRow",
    "EntropyScalingError",
    "JCInitialState",
    "PhotonCutoffError",
    "PlateauParams",
    "SeriesResult",
    "SingularBlockError",
    "adjoint_recursion",
    "atomic_population_series",
    "build_dressed_system",
    "dressed_initial_state",
    "entropy_limit_scan",
    "kraus_recursion",
    "plateau_oracle",
    "reduce_atomic",
]

_INV_RT2 = 1.0 / math.sqrt(2.0)
_SIGN = np.array([-1.0, 1.0])
_ONES = np.array([1.0, 1.0])


class PhotonCutoffError(ValueError):
    """Initial photon number too close to the basis cutoff."""


class SingularBlockError(ArithmeticError):
    """A photon-level block of the continued fraction failed to invert."""

    def __init__(self, level, z):
        self.level = level
        self.z = z
        super().__init__(f"singular block at photon level {level}, z = {z}")


class EntropyScalingError(ValueError):
    """Scaling exponents outside the admissible wedge."""


@dataclass(frozen=True)
class DressedBasis:
    """Energy eigenbasis of the atom-mode ladder.

    Parameters
    ----------
    omega_a1, omega_a2 : float
        Atomic level energies; the mode is resonant, so its quantum is
        ``omega_a2 - omega_a1``.
    coupling : float
        Atom-mode exchange strength, positive and below the mode
        quantum so the joint ground state stays lowest.
    n_max : int
        Photon cutoff, at least 1.  States carry labels ``(eps, n)``
        with ``eps = +-1`` and ``n = -1..n_max``; ``(-1, -1)`` does not
        exist.
    """

    omega_a1: float
    omega_a2: float
    coupling: float
    n_max: int
    states: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if not self.omega_f > self.coupling > 0:
            raise ValueError("need omega_a2 - omega_a1 > coupling > 0")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError("n_max must be an integer >= 1")
        object.__setattr__(self, "n_max", int(self.n_max))
        states = [(1, -1)]
        for n in range(self.n_max + 1):
            states += [(-1, n), (1, n)]
        object.__setattr__(self, "states", tuple(states))
        en = [self.energy(e, n) for e, n in states]
        if np.any(np.diff(en) <= 0):
            raise ValueError(
                "ladder rungs overlap at this cutoff; lower n_max or coupling"
            )
        object.__setattr__(self, "_pos", {s: i for i, s in enumerate(states)})

    @property
    def omega_f(self):
        return self.omega_a2 - self.omega_a1

    @property
    def dim(self):
        return 2 * self.n_max + 3

    @staticmethod
    def theta(n):
        """Discrete step: 1 for n >= 0, else 0."""
        return 1.0 if n >= 0 else 0.0

    @staticmethod
    def nu(n):
        """Doublet normalization; 1 on the ground rung, 0 below it."""
        if n == -1:
            return 1.0
        return _INV_RT2 if n >= 0 else 0.0

    def energy(self, eps, n):
        """Rung energy for branch ``eps`` at photon label ``n``."""
        return (
            self.omega_a2 * (n + 1)
            - self.omega_a1 * n
            + eps * self.coupling * math.sqrt(n + 1.0)
        )

    def index(self, eps, n):
        """Position of ``(eps, n)`` in the state ordering."""
        return self._pos[(eps, n)]


@dataclass(frozen=True)
class DressedSystem(kr.SystemSpec):
    """System table for the dressed ladder, with its construction data."""

    basis: DressedBasis = None
    sd: rv.SpectralDensity = None


def build_dressed_system(basis: DressedBasis, sd: rv.SpectralDensity):
    """Assemble the ladder's state table and decay-pair kernel.

    Nonzero slots connect neighbouring rungs only: the inner pair sits
    one photon label below the outer pair on each side, with weight
    ``eps_outer_left * eps_outer_right * nu * nu / 2``.  Every other
    index combination vanishes identically.
    """
    lows = [
        (e, n)
        for n in range(-1, basis.n_max)
        for e in ((1,) if n < 0 else (-1, 1))
    ]
    slots = {}
    for e2, n2 in lows:
        for e3, n3 in lows:
            w = 0.5 * basis.nu(n2) * basis.nu(n3)
            for e1 in (-1, 1):
                for e4 in (-1, 1):
                    key = (
                        basis.index(e1, n2 + 1) + 1,
                        basis.index(e2, n2) + 1,
                        basis.index(e3, n3) + 1,
                        basis.index(e4, n3 + 1) + 1,
                    )
                    slots[key] = e1 * e4 * w
    energies = tuple(basis.energy(e, n) for e, n in basis.states)
    return DressedSystem(energies, rv.kernel_table(sd, slots), basis, sd)


@dataclass(frozen=True)
class JCInitialState:
    """Atomic 2x2 state (ground, excited order) with a p-photon mode."""

    rho_a: np.ndarray
    p: int

    def __post_init__(self):
        ra = np.asarray(self.rho_a, dtype=complex)
        dy._validate_density(ra, 2)
        object.__setattr__(self, "rho_a", ra)
        if int(self.p) != self.p or self.p < 0:
            raise ValueError("photon number must be an integer >= 0")
        object.__setattr__(self, "p", int(self.p))


def dressed_initial_state(basis: DressedBasis, init: JCInitialState):
    """Factorized atom (x) p-photon state written in the dressed basis."""
    if init.p > basis.n_max:
        raise PhotonCutoffError(
            f"photon number {init.p} exceeds the basis cutoff {basis.n_max}"
        )
    p = init.p
    ra = init.rho_a
    rho = np.zeros((basis.dim, basis.dim), dtype=complex)
    for e1, n1 in basis.states:
        for e2, n2 in basis.states:
            val = 0.0 + 0.0j
            if n1 == n2 and n1 + 1 == p:
                val += ra[0, 0]
            if n1 == n2 + 1 and n1 == p:
                val += e1 * ra[1, 0]
            if n1 + 1 == n2 and n2 == p:
                val += e2 * ra[0, 1]
            if n1 == n2 and n1 == p:
                val += e1 * e2 * ra[1, 1]
            if val != 0:
                i, j = basis.index(e1, n1), basis.index(e2, n2)
                rho[i, j] = basis.nu(n1) * basis.nu(n2) * val
    return rho


def reduce_atomic(basis: DressedBasis, rho):
    """Trace out the privileged mode: (..., dim, dim) -> (..., 2, 2).

    Output rows are ordered (ground, excited), matching JCInitialState.
    """
    rho = np.asarray(rho)
    im = np.array([basis.index(-1, n) for n in range(basis.n_max + 1)])
    ip = np.array([basis.index(1, n) for n in range(basis.n_max + 1)])
    g = basis.index(1, -1)
    mm = rho[..., im, im]
    pp = rho[..., ip, ip]
    mp = rho[..., im, ip]
    pm = rho[..., ip, im]
    out = np.zeros(rho.shape[:-2] + (2, 2), dtype=complex)
    out[..., 1, 1] = 0.5 * (pp + mm - mp - pm).sum(axis=-1)
    out[..., 0, 0] = rho[..., g, g] + 0.5 * (pp + mm + mp + pm).sum(axis=-1)
    coh = _INV_RT2 * (rho[..., ip[0], g] - rho[..., im[0], g])
    if basis.n_max >= 1:
        coh = coh + 0.5 * (
            rho[..., ip[1:], ip[:-1]]
            + rho[..., ip[1:], im[:-1]]
            - rho[..., im[1:], ip[:-1]]
            - rho[..., im[1:], im[:-1]]
        ).sum(axis=-1)
    out[..., 1, 0] = coh
    out[..., 0, 1] = np.conj(coh)
    return out


# ---------------------------------------------------------------------------
# photon-block continued fraction on uniform frequency combs


def _support(sd: rv.SpectralDensity):
    if sd.family == "Lorentzian":
        g0, wc, lam = sd.params
        return max(0.0, wc - 10.0 * lam), wc + 10.0 * lam
    if sd.family == "FlatWindow":
        return sd.params[1], sd.params[2]
    grid = sd.table[0]
    return float(grid[0]), float(grid[-1])


def _comb(sd, h):
    # integer-aligned uniform quadrature of int dw |g|^2 f(z - w);
    # alignment keeps every shifted argument on one master line
    lo, hi = _support(sd)
    q0 = max(0, math.ceil(lo / h - 1e-9))
    q1 = math.floor(hi / h + 1e-9)
    if q1 - q0 < 8:
        raise ValueError("frequency comb under-resolves the coupling window")
    wq = sd.weight(np.arange(q0, q1 + 1) * h) * h
    wq[0] *= 0.5
    wq[-1] *= 0.5
    return q0, q1, wq.astype(complex)


def _line_blocks(basis, sd, x0, h, n_vis, eta, top_level):
    """Damping-amplitude image blocks on the line ``x0 + j*h + i*eta``.

    Returns ``{level: array}``, each covering exactly the visible range
    ``j = 0..n_vis-1``; level -1 entries are scalars, higher levels 2x2
    blocks.  The recursion extends the line to the left internally so
    every visible value is fully converged, and trims the right edge so
    no level reads past its own coverage.
    """
    q0, q1, wq = _comb(sd, h)
    ext = (top_level + 2) * q1
    n_int = n_vis + ext
    x = x0 - ext * h + h * np.arange(n_int) + 1j * eta
    gnd = basis.energy(1, -1)
    cur = 1.0 / (x - gnd)
    out = {-1: cur[ext:]}
    ssum = cur
    start = 0
    for lev in range(top_level + 1):
        conv = fftconvolve(ssum, wq, mode="full")[q1 - q0 : ssum.size - q0]
        start += q1
        seg = x[start : start + conv.size]
        a = 0.5 * basis.nu(lev - 1) ** 2
        dm = seg - basis.energy(-1, lev) - a * conv
        dp = seg - basis.energy(1, lev) - a * conv
        det = dm * dp - (a * conv) ** 2
        if np.any(det == 0) or not np.all(np.isfinite(det)):
            bad = seg[(det == 0) | ~np.isfinite(det)][0]
            raise SingularBlockError(lev, bad)
        blk = np.empty(seg.shape + (2, 2), dtype=complex)
        blk[..., 0, 0] = dp / det
        blk[..., 1, 1] = dm / det
        blk[..., 0, 1] = -a * conv / det
        blk[..., 1, 0] = -a * conv / det
        out[lev] = blk[ext - start :]
        ssum = blk.sum(axis=(-2, -1))
    return out


def kraus_recursion(sys: DressedSystem, z, *, n_modes=1500):
    """Blockwise damping-amplitude image at one point, ``Im z > 0``.

    Evaluates the finite photon-level recursion down to the ground rung
    and returns the full matrix over the basis, block diagonal with
    exact zeros elsewhere.  The coupling integral runs on a uniform
    comb over the spectral support, so families with slow tails are
    truncated at their support radius.
    """
    z = complex(z)
    if z.imag <= 0:
        raise rv.LaplaceDomainError("kraus_recursion requires Im z > 0")
    basis, sd = sys.basis, sys.sd
    lo, hi = _support(sd)
    h = min((hi - lo) / n_modes, z.imag / 4.0)
    blocks = _line_blocks(basis, sd, z.real, h, 1, z.imag, basis.n_max)
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    out[0, 0] = blocks[-1][0]
    for lev in range(basis.n_max + 1):
        i = basis.index(-1, lev)
        out[i : i + 2, i : i + 2] = blocks[lev][0]
    return out


def adjoint_recursion(sys: DressedSystem, z, *, n_modes=1500):
    """Image of the conjugate-branch amplitude, ``Im z < 0``."""
    return np.conj(kraus_recursion(sys, np.conj(complex(z)), n_modes=n_modes))


# ---------------------------------------------------------------------------
# excited-population series


@dataclass(frozen=True)
class SeriesResult:
    """Excited-state population from the order-by-order expansion."""

    times: np.ndarray
    excited: np.ndarray
    term_peaks: tuple
    truncation_estimate: float

    @property
    def ground(self):
        """Ground population by probability balance."""
        return 1.0 - self.excited


def _line_invert(gline, x0, h, eta, nfft, n_t):
    # (1/2pi) int dx e^{-i(x + i eta) t} G along the uniform line, as an
    # FFT with trapezoid end weights; output on t_k = k * 2pi/(nfft*h)
    gw = np.array(gline, dtype=complex)
    gw[..., 0] *= 0.5
    gw[..., -1] *= 0.5
    spec = np.fft.fft(gw, n=nfft, axis=-1)[..., :n_t]
    tk = (2.0 * np.pi / (nfft * h)) * np.arange(n_t)
    return (h / (2.0 * np.pi)) * np.exp((eta - 1j * x0) * tk) * spec


def atomic_population_series(
    basis: DressedBasis,
    sd: rv.SpectralDensity,
    init: JCInitialState,
    times,
    r_max,
    *,
    im_height=None,
    line_step=None,
    outer_step=None,
    window_pad=4.0,
    truncation_tol=2e-2,
):
    """Excited-state population by iterating the two-time solution.

    Each order ``r`` pairs one image chain with its conjugate over
    identical photon labels, so every term is a nonnegative frequency
    average of a squared amplitude; orders beyond the initial photon
    number vanish identically.  Order ``r`` costs one nested comb sum
    per extra exchanged quantum.

    Parameters
    ----------
    basis, sd : ladder basis and reservoir weight
    init : JCInitialState
    times : ndarray
        Ascending, nonnegative; the final entry sets contour height and
        output resolution.
    r_max : int
        Highest retained order.
    im_height, line_step, outer_step : float, optional
        Contour height, line resolution, and comb step of the
        order >= 1 frequency sums.  Defaults scale with the time span.
    window_pad : float, optional
        Contour margin beyond the outermost pole locations.
    truncation_tol : float, optional
        Warn when the last retained order peaks above this while
        further orders remain.

    Returns
    -------
    SeriesResult
    """
    times = np.asarray(times, dtype=float)
    if (
        times.ndim != 1
        or times.size < 2
        or times[0] < 0
        or np.any(np.diff(times) <= 0)
    ):
        raise ValueError("times must be ascending and nonnegative")
    if int(r_max) != r_max or r_max < 0:
        raise ValueError("r_max must be an integer >= 0")
    p = init.p
    if p > basis.n_max:
        raise PhotonCutoffError(
            f"photon number {p} exceeds the basis cutoff {basis.n_max}"
        )
    T = float(times[-1])
    if T <= 0:
        raise ValueError("the final time must be positive")
    eta = im_height if im_height is not None else 2.0 / T
    lo, hi = _support(sd)
    h = line_step if line_step is not None else min(eta / 4.0, (hi - lo) / 400.0)
    h = min(h, eta / 4.0)
    q0, q1, _ = _comb(sd, h)

    r_cap = int(min(r_max, p))
    ra = init.rho_a
    terms = []
    for r in range(r_cap + 1):
        if ra[1, 1].real > 0 and p - r - 1 >= -1:
            terms.append((r, p - r - 1, ra[1, 1].real, _SIGN))
        if ra[0, 0].real > 0 and p - r - 2 >= -1:
            terms.append((r, p - r - 2, ra[0, 0].real, _ONES))
    if not terms:
        zero = np.zeros_like(times)
        return SeriesResult(times, zero, (), 0.0)

    top = -1
    wlo, whi = np.inf, -np.inf
    for r, n1, _, _ in terms:
        for s in range(r + 1):
            lev = n1 + 1 + s
            top = max(top, lev)
            wlo = min(wlo, basis.energy(-1, lev) - s * q1 * h)
            whi = max(whi, basis.energy(1, lev) - s * q0 * h)
    wlo -= window_pad
    whi += window_pad
    n_line = int(math.ceil((whi - wlo) / h)) + 1
    n_vis = n_line + r_cap * q1
    blocks = _line_blocks(basis, sd, wlo, h, n_vis, eta, top)

    span = (n_vis - 1) * h
    dt_target = min(T / max(256.0, 2.0 * times.size), 1.5 / span)
    nfft = 1 << max(
        int(math.ceil(math.log2(max(n_line, 2.0 * np.pi / (h * dt_target))))), 8
    )
    dt_out = 2.0 * np.pi / (nfft * h)
    n_t = int(T / dt_out) + 2
    while n_t > 0.45 * nfft:
        nfft *= 2
        dt_out = 2.0 * np.pi / (nfft * h)
        n_t = int(T / dt_out) + 2
    tk = dt_out * np.arange(n_t)

    # outer comb for the order >= 1 sums; multiples of h keep every
    # shifted factor argument on the master line
    step_req = (
        outer_step if outer_step is not None else max(2.0 * h, np.pi / (2.0 * T))
    )
    stride = max(1, min(int(round(step_req / h)), (q1 - q0) // 8))
    oidx = np.arange(q0, q1 + 1, stride)
    if oidx[-1] != q1:
        oidx = np.append(oidx, q1)
    gaps = np.diff(oidx) * h
    trap = np.empty(oidx.size)
    trap[0] = 0.5 * gaps[0]
    trap[-1] = 0.5 * gaps[-1]
    trap[1:-1] = 0.5 * (gaps[:-1] + gaps[1:])
    ow = sd.weight(oidx * h) * trap

    total = np.zeros(n_t)
    peaks = {}
    for r, n1, diag_weight, last_vec in terms:
        lev0 = n1 + 1
        coeff = diag_weight / 4.0 ** (r + 1)
        u0 = last_vec if r == 0 else _ONES
        rows = (blocks[lev0] * u0[None, None, :]).sum(axis=-1)
        omegas = np.array([basis.energy(-1, lev0), basis.energy(1, lev0)])
        if r == 0:
            xline = wlo + h * np.arange(n_line) + 1j * eta
            amp = np.zeros(n_t, dtype=complex)
            for ie in (0, 1):
                rest = rows[:n_line, ie] - u0[ie] / (xline - omegas[ie])
                a_rest = _line_invert(rest, wlo, h, eta, nfft, n_t)
                a_full = a_rest - 1j * u0[ie] * np.exp(-1j * omegas[ie] * tk)
                amp += _SIGN[ie] * np.exp(1j * omegas[ie] * tk) * a_full
            term = np.abs(amp) ** 2
        else:
            inner = [
                (
                    (blocks[lev0 + s] * (_ONES if s < r else last_vec)).sum(axis=-1)
                    * _SIGN
                ).sum(axis=-1)
                for s in range(1, r + 1)
            ]
            term = _sum_orders(
                rows, inner, ow, oidx, n_line, wlo, h, eta, nfft, n_t, omegas, tk
            )
        total += coeff * term
        peaks[r] = peaks.get(r, 0.0) + coeff * float(np.max(term))

    last_peak = peaks.get(r_cap, 0.0) if r_cap < p else 0.0
    if last_peak > truncation_tol:
        warnings.warn(
            f"series truncation estimate {last_peak:.2e} exceeds "
            f"{truncation_tol:.1e}; consider r_max = {r_max + 1}",
            stacklevel=2,
        )
    excited = np.clip(np.real(kr._cubic_interp(tk, total, times)), 0.0, None)
    return SeriesResult(
        times, excited, tuple(peaks[r] for r in sorted(peaks)), last_peak
    )


def _sum_orders(rows, inner, ow, oidx, n_line, wlo, h, eta, nfft, n_t, omegas, tk):
    # nested comb sums over the order-r frequency weights; the last
    # level is batched, outer ones recurse (cost grows as comb**r)
    r = len(inner)
    phase = np.exp(1j * np.outer(omegas, tk))

    def accumulate(depth, base, gpart):
        if depth == r - 1:
            win = sliding_window_view(inner[depth], n_line)[base + oidx]
            out = np.zeros(n_t)
            for i0 in range(0, oidx.size, 64):
                seg = win[i0 : i0 + 64] * gpart[None, :]
                amp = np.zeros((seg.shape[0], n_t), dtype=complex)
                for ie in (0, 1):
                    a = _line_invert(
                        seg * rows[:n_line, ie][None, :], wlo, h, eta, nfft, n_t
                    )
                    amp += _SIGN[ie] * phase[ie][None, :] * a
                out += ow[i0 : i0 + 64] @ (np.abs(amp) ** 2)
            return out
        out = np.zeros(n_t)
        for j, o in enumerate(oidx):
            gnext = gpart * inner[depth][base + o : base + o + n_line]
            out += ow[j] * accumulate(depth + 1, base + o, gnext)
        return out

    return accumulate(0, 0, np.ones(n_line))


# ---------------------------------------------------------------------------
# long-time references


@dataclass(frozen=True)
class PlateauParams:
    """Scaled-time evolution parameters for the large-p shape."""

    tau: object
    p: int
    rho_a11: float
    rho_a22: float

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        if np.any(tau < 0):
            raise ValueError("tau must be >= 0")
        object.__setattr__(self, "tau", tau)
        if int(self.p) != self.p or self.p < 1:
            raise ValueError("p must be an integer >= 1")
        if self.rho_a11 < -1e-12 or self.rho_a22 < -1e-12:
            raise ValueError("atomic populations must be nonnegative")


def plateau_oracle(params: PlateauParams):
    """Closed-form excited population at large photon number.

    Evaluates ``rho22 e^-tau + (e^-tau / 2) * sum_{r=1..p}
    (1 - rho11 delta_{r p}) tau^r / r!`` with log-stable terms; the sum
    holds near 1/2 from tau of a few until tau approaches p.
    """
    tau = params.tau
    p = params.p
    out = params.rho_a22 * np.exp(-tau)
    rr = np.arange(1, p + 1)
    with np.errstate(divide="ignore"):
        logt = np.where(tau > 0, np.log(np.maximum(tau, 1e-300)), -np.inf)
    logterm = -tau[..., None] + rr * logt[..., None] - gammaln(rr + 1)
    fac = np.ones(p)
    fac[-1] = 1.0 - params.rho_a11
    out = out + 0.5 * (np.exp(logterm) * fac).sum(axis=-1)
    return out


@dataclass(frozen=True)
class EntropyRow:
    """One coupling value of the maximum-entropy scaling scan."""

    lam: float
    photon_number: int
    tau: float
    excited: float
    distance: float
    coherence_bound: float


def entropy_limit_scan(
    basis: DressedBasis,
    sd: rv.SpectralDensity,
    alpha,
    beta,
    lams,
    *,
    p_tilde,
    t_tilde=1.0,
    rho_a=None,
):
    """Joint small-coupling scan towards the balanced atomic state.

    Couplings scale down by ``lam``, photon number up as
    ``p_tilde / lam**beta`` and time as ``t_tilde / lam**alpha``.  The
    admissible wedge ``2 < alpha < beta + 2``, ``0 < beta < 4/3`` is
    enforced by named rejections, and scaled photon numbers must come
    out integer.  Rows report the plateau value, its distance from the
    balanced point, and the decay envelope of the initial atomic
    coherence.
    """
    if alpha <= 2:
        raise EntropyScalingError("alpha must exceed 2")
    if beta <= 0:
        raise EntropyScalingError("beta must be positive")
    if beta >= 4.0 / 3.0:
        raise EntropyScalingError("beta must stay below 4/3")
    if alpha >= beta + 2:
        raise EntropyScalingError("alpha must stay below beta + 2")
    lams = [float(x) for x in lams]
    if not lams or any(x <= 0 for x in lams):
        raise ValueError("lams must be positive")
    if any(b >= a for a, b in zip(lams, lams[1:])):
        raise ValueError("lams must be strictly decreasing")
    if rho_a is None:
        rho_a = np.array([[0.0, 0.0], [0.0, 1.0]])
    ra = np.asarray(rho_a, dtype=complex)
    dy._validate_density(ra, 2)
    gf2 = float(sd.weight(basis.omega_f))
    rows = []
    for lam in lams:
        praw = p_tilde / lam**beta
        pint = round(praw)
        if abs(praw - pint) > 1e-8 * max(1.0, praw):
            raise ValueError(
                f"p_tilde / lam**beta = {praw} is not an integer at lam = {lam}"
            )
        tau = float(lam ** (2.0 - alpha) * 0.5 * np.pi * gf2 * t_tilde)
        exc = float(
            plateau_oracle(
                PlateauParams(tau, pint, float(ra[0, 0].real), float(ra[1, 1].real))
            )
        )
        rows.append(
            EntropyRow(
                lam,
                int(pint),
                tau,
                exc,
                abs(exc - 0.5),
                float(abs(ra[1, 0]) * math.exp(-0.5 * tau)),
            )
        )
    return rows
