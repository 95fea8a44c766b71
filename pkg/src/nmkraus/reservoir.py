"""Reservoir spectral densities and pair correlation functions.

A reservoir of harmonic modes with coupling weight ``|g(omega)|**2``
supported on the positive half-line enters the dynamics only through
the scalar pair correlation kernel

    kappa(tau) = int_0^inf domega |g(omega)|^2 exp(-i omega tau)

and its one-sided Laplace image

    chat(y) = int_0^inf domega |g(omega)|^2 / (y - omega),   Im y > 0,

which is analytic in the upper half-plane and decays like
``total_strength / y``.  At inverse temperature ``beta`` the kernel
acquires the standard bosonic occupation factors,

    kappa_th(tau) = int_0^inf domega |g|^2 [ (nbar+1) e^{-i omega tau}
                                             + nbar e^{+i omega tau} ],

with ``nbar(omega) = 1/(exp(beta*omega)-1)``.  This thermal form is
standard open-system physics; it is documented here because the
zero-temperature kernel alone does not determine it.

Supported families: a Lorentzian line restricted to the half-line, a
flat window, and tabulated samples.  Closed forms are used wherever
they exist; everything else falls back to adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import integrate, special

__all__ = [
    "SpectralDensity",
    "CorrelationKernel",
    "KernelHandle",
    "DivergentIntegralError",
    "LaplaceDomainError",
    "IndexCollisionError",
    "correlation_time",
    "correlation_laplace",
    "correlation_boundary",
    "kernel_table",
    "kernel_samples",
    "discrete_modes",
    "thermal_occupation",
]


class DivergentIntegralError(ArithmeticError):
    """Raised when a correlation integral fails to converge."""


class LaplaceDomainError(ValueError):
    """Raised when a Laplace-domain evaluator is called off its domain."""


class IndexCollisionError(ValueError):
    """Raised when an index rule defines the same kernel slot twice."""


def thermal_occupation(omega, beta):
    """Bose occupation 1/(exp(beta*omega) - 1) for omega > 0."""
    x = np.asarray(beta * omega, dtype=float)
    with np.errstate(over="ignore"):
        return 1.0 / np.expm1(x)


@dataclass(frozen=True)
class SpectralDensity:
    """Coupling weight ``|g(omega)|**2`` on the positive frequency axis.

    Instances are built through the family constructors
    :meth:`lorentzian`, :meth:`flat_window` and :meth:`tabulated`; the
    raw constructor is not meant for direct use.

    Parameters
    ----------
    family : str
        One of ``"Lorentzian"``, ``"FlatWindow"``, ``"Tabulated"``.
    params : tuple of float
        Family parameters, see the constructors.
    table : tuple of ndarray, optional
        ``(omega, g2)`` samples for the tabulated family.
    """

    family: str
    params: tuple = ()
    table: tuple = field(default=None, repr=False)

    # -- constructors -------------------------------------------------

    @classmethod
    def lorentzian(cls, strength, center, width):
        """Half-line Lorentzian ``(strength*width/pi) / ((w-center)^2 + width^2)``.

        Parameters
        ----------
        strength : float
            Overall weight gamma >= 0; for center >> width the total
            integral approaches gamma.
        center : float
            Line position omega_c.
        width : float
            Half width Lambda > 0.
        """
        if strength < 0:
            raise ValueError("strength must be >= 0")
        if width <= 0:
            raise ValueError("width must be > 0")
        return cls("Lorentzian", (float(strength), float(center), float(width)))

    @classmethod
    def flat_window(cls, height, omega_lo, omega_hi):
        """Constant weight ``height`` on ``[omega_lo, omega_hi]``, zero outside."""
        if height < 0:
            raise ValueError("height must be >= 0")
        if not 0 <= omega_lo < omega_hi:
            raise ValueError("need 0 <= omega_lo < omega_hi")
        return cls("FlatWindow", (float(height), float(omega_lo), float(omega_hi)))

    @classmethod
    def tabulated(cls, omega, g2):
        """Sampled weight on an increasing grid, linearly interpolated."""
        omega = np.asarray(omega, dtype=float)
        g2 = np.asarray(g2, dtype=float)
        if omega.ndim != 1 or omega.shape != g2.shape or omega.size < 2:
            raise ValueError("omega and g2 must be matching 1-d arrays, length >= 2")
        if np.any(np.diff(omega) <= 0):
            raise ValueError("omega grid must be strictly increasing")
        if omega[0] < 0:
            raise ValueError("support must lie in [0, inf)")
        if np.any(g2 < 0):
            raise ValueError("|g|^2 must be >= 0")
        total = np.trapezoid(g2, omega)
        if not np.isfinite(total):
            raise DivergentIntegralError("tabulated weight has non-finite integral")
        return cls("Tabulated", (), (omega, g2))

    # -- pointwise weight and summary scales --------------------------

    def weight(self, omega):
        """``|g(omega)|**2`` at ``omega``; zero for omega < 0."""
        w = np.asarray(omega, dtype=float)
        if self.family == "Lorentzian":
            g0, wc, lam = self.params
            val = (g0 * lam / np.pi) / ((w - wc) ** 2 + lam**2)
        elif self.family == "FlatWindow":
            h, lo, hi = self.params
            val = np.where((w >= lo) & (w <= hi), h, 0.0)
        else:
            grid, g2 = self.table
            val = np.interp(w, grid, g2, left=0.0, right=0.0)
        return np.where(w >= 0, val, 0.0)

    def total_strength(self):
        """``int_0^inf |g|^2 domega``."""
        if self.family == "Lorentzian":
            g0, wc, lam = self.params
            return g0 * (0.5 + np.arctan(wc / lam) / np.pi)
        if self.family == "FlatWindow":
            h, lo, hi = self.params
            return h * (hi - lo)
        grid, g2 = self.table
        return float(np.trapezoid(g2, grid))

    def support_radius(self):
        """Frequency beyond which the weight is negligible."""
        if self.family == "Lorentzian":
            g0, wc, lam = self.params
            return wc + 10.0 * lam
        if self.family == "FlatWindow":
            return self.params[2]
        return float(self.table[0][-1])

    def frequency_scale(self):
        """Characteristic frequency used for default tolerances."""
        if self.family == "Lorentzian":
            return max(abs(self.params[1]), self.params[2])
        if self.family == "FlatWindow":
            return max(self.params[2], self.params[2] - self.params[1])
        return self.support_radius()


# ---------------------------------------------------------------------------
# scalar kernel evaluators


def _quad_complex(f, a, b, **kw):
    re, re_err = integrate.quad(lambda w: f(w).real, a, b, **kw)
    im, im_err = integrate.quad(lambda w: f(w).imag, a, b, **kw)
    return re + 1j * im, re_err + im_err


def _exp1_halfline(z, tau):
    # int_0^inf e^{-i w tau} / (w - z) dw for tau > 0, z off the positive axis.
    # The contour closes through the lower half-plane; a pole with Im z < 0
    # is encircled clockwise, hence the -2*pi*i residue term.
    arg = -1j * z * tau
    val = np.exp(arg) * special.exp1(arg)
    if z.imag < 0:
        val = val - 2j * np.pi * np.exp(arg)
    return val


def _kappa_zero_temp(sd: SpectralDensity, tau):
    """Vectorized zero-temperature kernel kappa(tau) for real tau."""
    tau = np.asarray(tau, dtype=float)
    scalar = tau.ndim == 0
    tau = np.atleast_1d(tau)
    out = np.empty(tau.shape, dtype=complex)
    # kappa(-tau) = conj(kappa(tau)): evaluate on |tau| and conjugate back
    neg = tau < 0
    at = np.abs(tau)
    pos = at > 0
    if sd.family == "Lorentzian":
        g0, wc, lam = sd.params
        zp, zm = wc + 1j * lam, wc - 1j * lam
        tp = at[pos]
        if tp.size:
            ip = _exp1_halfline(zp, tp)
            im = _exp1_halfline(zm, tp)
            out[pos] = (g0 / (2j * np.pi)) * (ip - im)
    elif sd.family == "FlatWindow":
        h, lo, hi = sd.params
        tp = at[pos]
        if tp.size:
            out[pos] = h * (np.exp(-1j * lo * tp) - np.exp(-1j * hi * tp)) / (1j * tp)
    else:
        grid, g2 = sd.table
        tp = at[pos]
        if tp.size:
            phase = np.exp(-1j * np.outer(tp, grid))
            out[pos] = np.trapezoid(phase * g2, grid, axis=1)
    out[~pos] = sd.total_strength()
    out[neg] = np.conj(out[neg])
    return out[0] if scalar else out


def _thermal_integrand(sd, beta, tau):
    def f(w):
        nb = thermal_occupation(w, beta)
        return sd.weight(w) * ((nb + 1.0) * np.exp(-1j * w * tau) + nb * np.exp(1j * w * tau))

    return f


def _check_thermal_convergent(sd: SpectralDensity, beta_inv):
    if beta_inv == 0:
        return
    # nbar ~ 1/(beta*omega) near zero: the thermal integral diverges
    # whenever the weight does not vanish at omega = 0.
    beta = 1.0 / beta_inv
    w_probe = 1e-9 * max(sd.frequency_scale(), 1.0)
    if sd.weight(w_probe) * thermal_occupation(w_probe, beta) * w_probe > 1e-12 * max(
        sd.total_strength(), 1e-300
    ):
        raise DivergentIntegralError(
            "thermal kernel diverges: |g(0)|^2 > 0 gives a non-integrable "
            "1/omega occupation tail"
        )


def correlation_time(sd: SpectralDensity, t, s, beta_inv=0.0):
    """Pair correlation ``c(t, s)`` of the reservoir coupling.

    The kernel is stationary, ``c(t, s) = kappa(t - s)``.  At
    ``beta_inv == 0`` this is the zero-temperature expression
    ``int_0^inf |g|^2 exp(-i omega (t-s)) domega``; for positive
    temperature the bosonic occupation factors are included.

    Parameters
    ----------
    sd : SpectralDensity
    t, s : float
        The two time arguments.
    beta_inv : float, optional
        Temperature in energy units; 0 means zero temperature.

    Returns
    -------
    complex

    Raises
    ------
    DivergentIntegralError
        If the integral does not converge (thermal weight finite at
        omega = 0, or a tabulated quadrature that fails to settle).
    """
    if beta_inv < 0:
        raise ValueError("beta_inv must be >= 0")
    tau = float(t) - float(s)
    if beta_inv == 0:
        return complex(_kappa_zero_temp(sd, tau))
    _check_thermal_convergent(sd, beta_inv)
    beta = 1.0 / beta_inv
    f = _thermal_integrand(sd, beta, tau)
    if sd.family == "Tabulated":
        grid = sd.table[0]
        lo = grid[0] if grid[0] > 0 else grid[1] * 1e-8
        val = _trapz_doubling(f, lo, grid[-1])
    else:
        lo = 1e-12 * sd.frequency_scale()
        hi = sd.support_radius() + 40.0 * sd.frequency_scale()
        val, err = _quad_complex(f, lo, hi, limit=400)
        if not np.isfinite(val):
            raise DivergentIntegralError("thermal quadrature failed")
    return complex(val)


def _trapz_doubling(f, a, b, tol=1e-6):
    # trapezoid with node doubling; mismatch signals a divergent integrand
    n = 2048
    w = np.linspace(a, b, n + 1)
    v1 = np.trapezoid(f(w), w)
    w = np.linspace(a, b, 2 * n + 1)
    v2 = np.trapezoid(f(w), w)
    if abs(v2 - v1) > tol * max(abs(v2), 1e-300):
        raise DivergentIntegralError("quadrature failed to converge under refinement")
    return v2


def correlation_laplace(sd: SpectralDensity, y, beta_inv=0.0):
    """One-sided Laplace image ``int_0^inf |g|^2/(y - omega) domega``.

    Analytic for ``Im y > 0``.  The thermal variant adds the mirrored
    branch ``int_0^inf |g|^2 nbar(omega) [1/(y-omega) + 1/(y+omega)]``.

    Parameters
    ----------
    sd : SpectralDensity
    y : complex
        Evaluation point, ``Im y > 0`` required.
    beta_inv : float, optional

    Returns
    -------
    complex

    Raises
    ------
    LaplaceDomainError
        If ``Im y <= 0``.
    """
    y = complex(y)
    if y.imag <= 0:
        raise LaplaceDomainError("correlation_laplace requires Im y > 0")
    if beta_inv < 0:
        raise ValueError("beta_inv must be >= 0")
    if beta_inv == 0:
        return complex(_laplace_zero_temp(sd, y))
    _check_thermal_convergent(sd, beta_inv)
    beta = 1.0 / beta_inv

    def f(w):
        nb = thermal_occupation(w, beta)
        return sd.weight(w) * ((nb + 1.0) / (y - w) + nb / (y + w))

    lo = 1e-12 * sd.frequency_scale()
    hi = sd.support_radius() + 40.0 * sd.frequency_scale()
    val, _ = _quad_complex(f, lo, hi, limit=400)
    return complex(val)


def _laplace_zero_temp(sd: SpectralDensity, y):
    if sd.family == "Lorentzian":
        g0, wc, lam = sd.params
        zp, zm = wc + 1j * lam, wc - 1j * lam
        # partial fractions of (gamma lam/pi) / ((w-zp)(w-zm)(w-y)) integrated
        # over [0, inf): each simple pole contributes -residue * log(-pole),
        # principal branch; the residues sum to zero so the logs pair up.
        # The y = zp collision is removable; switch to a Taylor form there.
        y = np.asarray(y, dtype=complex)
        d = y - zp
        near = np.abs(d) < 1e-4 * lam
        ds = np.where(near, 1.0, d)
        rp = -1.0 / ((zp - zm) * ds)
        rm = 1.0 / ((zm - zp) * (zm - y))
        ry = 1.0 / (ds * (y - zm))
        acc = rp * np.log(-zp) + rm * np.log(-zm) + ry * np.log(-y)
        if np.any(near):
            a = zp - zm
            n1 = (1.0 / zp) / a - np.log(-zp) / a**2
            n2 = (-1.0 / zp**2) / a - 2.0 * (1.0 / zp) / a**2 + 2.0 * np.log(-zp) / a**3
            taylor = rm * np.log(-zm) + n1 + 0.5 * d * n2
            acc = np.where(near, taylor, acc)
        out = (g0 * lam / np.pi) * acc
        return out if out.ndim else complex(out)
    if sd.family == "FlatWindow":
        h, lo, hi = sd.params
        return h * np.log((y - lo) / (y - hi))
    grid, g2 = sd.table
    return np.trapezoid(g2 / (y - grid), grid)


def correlation_boundary(sd: SpectralDensity, omega, eps_imag=None, richardson=False, beta_inv=0.0):
    """Boundary value of the Laplace image just above the real axis.

    Realizes the ``omega + i0`` prescription with a small positive
    imaginary part.

    Parameters
    ----------
    omega : float
        Real evaluation frequency.
    eps_imag : float, optional
        Contour height; defaults to ``1e-6 * frequency_scale``.
    richardson : bool, optional
        If true, extrapolate eps -> 0 from eps and eps/2.
    """
    if eps_imag is None:
        eps_imag = 1e-6 * sd.frequency_scale()
    if eps_imag <= 0:
        raise ValueError("eps_imag must be > 0")
    v1 = correlation_laplace(sd, omega + 1j * eps_imag, beta_inv)
    if not richardson:
        return v1
    v2 = correlation_laplace(sd, omega + 0.5j * eps_imag, beta_inv)
    return 2.0 * v2 - v1


def kernel_samples(sd: SpectralDensity, tau, beta_inv=0.0):
    """Vectorized kernel ``kappa`` on an array of time differences.

    Solvers sample the kernel on dense grids; this avoids the
    per-point overhead of :func:`correlation_time`.
    """
    if beta_inv == 0:
        return _kappa_zero_temp(sd, tau)
    _check_thermal_convergent(sd, beta_inv)
    return np.array([correlation_time(sd, x, 0.0, beta_inv) for x in np.atleast_1d(tau)])


# ---------------------------------------------------------------------------
# discrete mode expansions


def discrete_modes(sd: SpectralDensity, n_modes, beta_inv=0.0):
    """Discretize the reservoir into weighted oscillator modes.

    Returns frequencies ``omega_q`` and positive weights ``w_q`` such
    that ``kappa(tau) ~= sum_q w_q exp(-i omega_q tau)``.  At positive
    temperature each positive-frequency node splits into an emission
    branch with weight ``(nbar+1) w_q`` and a mirrored absorption
    branch at ``-omega_q`` with weight ``nbar w_q``.

    Parameters
    ----------
    sd : SpectralDensity
    n_modes : int
        Number of quadrature nodes on the positive axis.
    beta_inv : float, optional

    Returns
    -------
    (ndarray, ndarray)
        Frequencies and weights; all weights are positive.
    """
    if n_modes < 2:
        raise ValueError("need at least 2 modes")
    if sd.family == "Lorentzian":
        g0, wc, lam = sd.params
        # tangent map concentrates nodes around the line center and
        # covers the half-line exactly
        u0 = math.atan(-wc / lam)
        du = (math.pi / 2 - u0) / n_modes
        u = u0 + (np.arange(n_modes) + 0.5) * du
        omega = wc + lam * np.tan(u)
        wq = np.full(n_modes, g0 / math.pi * du)
    elif sd.family == "FlatWindow":
        h, lo, hi = sd.params
        x, gw = np.polynomial.legendre.leggauss(n_modes)
        omega = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x
        wq = h * 0.5 * (hi - lo) * gw
    else:
        grid, g2 = sd.table
        if n_modes != grid.size:
            omega = np.linspace(grid[0], grid[-1], n_modes)
            g2 = np.interp(omega, grid, g2)
        else:
            omega = grid
        wq = np.empty(omega.size)
        d = np.diff(omega)
        wq[0] = 0.5 * d[0]
        wq[-1] = 0.5 * d[-1]
        wq[1:-1] = 0.5 * (d[:-1] + d[1:])
        wq = wq * g2
        keep = wq > 0
        omega, wq = omega[keep], wq[keep]
    if beta_inv == 0:
        return omega, wq
    _check_thermal_convergent(sd, beta_inv)
    beta = 1.0 / beta_inv
    nb = thermal_occupation(omega, beta)
    return (
        np.concatenate([omega, -omega]),
        np.concatenate([(nb + 1.0) * wq, nb * wq]),
    )


# ---------------------------------------------------------------------------
# indexed kernel tables


@dataclass(frozen=True)
class KernelHandle:
    """Evaluators for one nonzero slot of an indexed kernel."""

    sd: SpectralDensity
    weight: complex
    beta_inv: float = 0.0

    def time(self, t, s):
        return self.weight * correlation_time(self.sd, t, s, self.beta_inv)

    def laplace(self, y):
        return self.weight * correlation_laplace(self.sd, y, self.beta_inv)


@dataclass(frozen=True)
class CorrelationKernel:
    """Indexed table of pair correlation functions.

    Maps slot indices ``(k, l, m, n)`` to :class:`KernelHandle`
    objects.  All nonzero slots share one scalar kernel, scaled by the
    slot weight from the index rule.
    """

    slots: Mapping[tuple, KernelHandle]
    beta_inv: float = 0.0

    def time(self, index, t, s):
        """Slot value c_index(t, s); zero for absent slots."""
        h = self.slots.get(tuple(index))
        return 0.0 + 0.0j if h is None else h.time(t, s)

    def laplace(self, index, y):
        h = self.slots.get(tuple(index))
        return 0.0 + 0.0j if h is None else h.laplace(y)

    def hermiticity_defect(self, t, s):
        """Max mismatch of c_(kl)(mn)(t,s) against conj(c_(nm)(lk)(s,t))."""
        worst = 0.0
        for (k, l, m, n), h in self.slots.items():
            partner = self.time((n, m, l, k), s, t)
            worst = max(worst, abs(h.time(t, s) - np.conj(partner)))
        return worst


def kernel_table(sd: SpectralDensity, index_rule, beta_inv=0.0) -> CorrelationKernel:
    """Package the scalar kernel under a multi-index slot scheme.

    Parameters
    ----------
    sd : SpectralDensity
    index_rule : mapping or iterable
        Either ``{(k,l,m,n): weight}`` or an iterable of
        ``((k,l,m,n), weight)`` pairs naming the nonzero slots.
    beta_inv : float, optional

    Returns
    -------
    CorrelationKernel

    Raises
    ------
    IndexCollisionError
        If the same slot appears twice in the rule.
    """
    if isinstance(index_rule, Mapping):
        pairs = index_rule.items()
    else:
        pairs = list(index_rule)
    slots = {}
    for idx, weight in pairs:
        key = tuple(int(i) for i in idx)
        if len(key) != 4:
            raise ValueError("slot index must have four entries")
        if key in slots:
            raise IndexCollisionError(f"slot {key} defined twice")
        if weight != 0:
            slots[key] = KernelHandle(sd, complex(weight), beta_inv)
    return CorrelationKernel(slots, beta_inv)
