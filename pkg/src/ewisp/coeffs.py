"""Per-mode weights of the exponential wave integrator.

Each sine mode obeys ``-eps^2 y'' + i y' - mu^2 y + g(t) = 0`` whose free
solutions are ``exp(i beta^+ t)`` (fast, ``beta^+ ~ 1/eps^2``) and
``exp(i beta^- t)`` (slow, ``beta^- -> -mu^2``).  The weights below integrate
that ODE exactly for a nonlinearity that is linear in time over one step.

Phase handling: ``tau * beta^+`` reaches ``1e12`` for ``eps = 2**-20``, so the
fast phase is never evaluated from ``beta^+`` directly.  It is assembled as
``exp(i tau/(2 eps^2))`` (reduced in extended precision) times
``exp(+-i tau delta / 2)`` built from the accurately known slow phase.  This
keeps ``phase_plus * phase_minus == exp(i tau/eps^2)`` to roundoff, which is
what makes the two-level recurrence reproduce the slow branch exactly.

The recurrence is advanced in increment form (see :mod:`ewisp.stepper`),
which needs ``kappa = c + d - 1 = -(1 - e^{i tau beta+})(1 - e^{i tau beta-})``.
Both factors vanish as ``tau -> 0``, so they are formed from half-angle sines
rather than by subtracting phases from 1.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import mpmath
import numpy as np

from .spectral import Grid

SINC_TAYLOR_MAX = 1e-4
QUOTIENT_SERIES_MAX = 1e-3


@dataclass(frozen=True)
class CharRoots:
    beta_plus: np.ndarray | float
    beta_minus: np.ndarray | float
    delta: np.ndarray | float


def char_roots(mu, eps: float) -> CharRoots:
    """Roots of ``eps^2 beta^2 - beta - mu^2 = 0`` without cancellation."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    mu = np.asarray(mu, dtype=float)
    if np.any(mu < 0):
        raise ValueError("mu must be non-negative")
    root = np.sqrt(1.0 + 4.0 * eps**2 * mu**2)
    beta_plus = (1.0 + root) / (2.0 * eps**2)
    beta_minus = -2.0 * mu**2 / (1.0 + root)
    delta = root / eps**2
    if beta_plus.ndim == 0:
        return CharRoots(float(beta_plus), float(beta_minus), float(delta))
    return CharRoots(beta_plus, beta_minus, delta)


def half_fast_phase(tau: float, eps: float) -> complex:
    """``exp(i tau / (2 eps^2))`` with the argument reduced in 50-digit arithmetic."""
    with mpmath.workdps(50):
        z = mpmath.expj(mpmath.mpf(tau) / (2 * mpmath.mpf(eps) ** 2))
        return complex(z)


def _one_minus_phase(theta, phase):
    """``1 - exp(i theta)``; half-angle form while ``theta`` is a trustworthy angle."""
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) <= 1.0
    half_angle = -2j * np.sin(0.5 * theta) * np.exp(0.5j * theta)
    return np.where(small, half_angle, 1.0 - np.asarray(phase))


def _sinc(x):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < SINC_TAYLOR_MAX
    safe = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)


def sigma(beta, tau: float, phase=None):
    """Filtered phase ``exp(i tau beta/2) sinc(tau beta/2)``.

    ``phase`` may carry an accurately reduced ``exp(i tau beta)``; it is used
    when ``tau beta`` is too large to be trusted as a floating-point angle.
    """
    beta = np.asarray(beta, dtype=float)
    x = 0.5 * tau * beta
    out = np.exp(1j * x) * _sinc(x)
    if phase is not None:
        big = np.abs(x) > 1.0
        if np.any(big):
            safe = np.where(big, x, 1.0)
            out = np.where(big, (np.asarray(phase) - 1.0) / (2j * safe), out)
    return out[()] if out.ndim == 0 else out


def one_minus_sigma_over_beta(beta, tau: float, phase=None):
    """``(1 - sigma(beta, tau)) / beta`` with its ``beta -> 0`` limit ``-i tau/2``."""
    beta = np.asarray(beta, dtype=float)
    theta = tau * beta
    small = np.abs(theta) < QUOTIENT_SERIES_MAX
    # -i tau sum_{k>=1} (i theta)^{k-1} / (k+1)!
    z = 1j * theta
    series = -1j * tau * (
        0.5 + z * (1 / 6 + z * (1 / 24 + z * (1 / 120 + z * (1 / 720 + z / 5040))))
    )
    safe = np.where(small, 1.0, beta)
    direct = (1.0 - sigma(safe, tau, phase)) / safe
    out = np.where(small, series, direct)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class SchemeCoefficients:
    """Mode-wise weights for fixed ``(grid, eps, tau)``; arrays of length M-1."""

    eps: float
    tau: float
    mu: np.ndarray
    beta_plus: np.ndarray
    beta_minus: np.ndarray
    c0: np.ndarray
    d0: np.ndarray
    c: np.ndarray
    d: np.ndarray
    kappa: np.ndarray
    p: np.ndarray
    q: np.ndarray
    p_star: np.ndarray
    q_star: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray
    q_plus: np.ndarray
    q_minus: np.ndarray
    phase_plus: np.ndarray
    phase_minus: np.ndarray
    fast_phase: complex

    _COMPLEX = (
        "c0", "d0", "c", "d", "kappa", "p", "q", "p_star", "q_star",
        "p_plus", "p_minus", "q_plus", "q_minus", "phase_plus", "phase_minus",
    )

    def to_csv(self, path) -> None:
        """Debug dump: one row per mode, real/imag column pairs per weight."""
        header = ["l", "mu", "beta_plus", "beta_minus"]
        for name in self._COMPLEX:
            header += [f"{name}_re", f"{name}_im"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for i in range(self.mu.size):
                row = [i + 1, repr(float(self.mu[i])),
                       repr(float(self.beta_plus[i])), repr(float(self.beta_minus[i]))]
                for name in self._COMPLEX:
                    v = complex(getattr(self, name)[i])
                    row += [repr(v.real), repr(v.imag)]
                writer.writerow(row)


def build_coefficients(grid: Grid, eps: float, tau: float) -> SchemeCoefficients:
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps!r}")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    roots = char_roots(grid.mu, eps)
    bp, bm, delta = roots.beta_plus, roots.beta_minus, roots.delta
    scale = eps**2 * delta  # sqrt(1 + 4 eps^2 mu^2), >= 1

    half = half_fast_phase(tau, eps)
    fast = half * half
    phase_minus = np.exp(1j * tau * bm)
    half_split = half * np.conj(phase_minus)  # exp(i tau delta / 2)
    phase_plus = half * half_split

    sig_p = sigma(bp, tau, phase_plus)
    sig_m = sigma(bm, tau, phase_minus)
    quot_p = one_minus_sigma_over_beta(bp, tau, phase_plus)
    quot_m = one_minus_sigma_over_beta(bm, tau, phase_minus)

    c0 = (bp * phase_minus - bm * phase_plus) / delta
    d0 = tau * half * _sinc(0.5 * tau * delta)
    c = np.full(grid.M - 1, -fast, dtype=complex)
    d = 2.0 * half * half_split.real
    kappa = -_one_minus_phase(tau * bp, phase_plus) * _one_minus_phase(tau * bm, phase_minus)

    p_plus = -1j * tau / scale * np.conj(sig_p)
    p_minus = -1j * tau / scale * np.conj(sig_m)
    q_plus = tau / scale * quot_p * np.conj(phase_plus)
    q_minus = tau / scale * quot_m * np.conj(phase_minus)

    p = -1j * tau / scale * (sig_p - sig_m)
    q = tau / scale * (quot_p - quot_m)
    p_star = -1j * tau * fast / scale * (np.conj(sig_p) - np.conj(sig_m))
    q_star = tau * fast / scale * (
        quot_p * np.conj(phase_plus) - quot_m * np.conj(phase_minus)
    )

    return SchemeCoefficients(
        eps=float(eps), tau=float(tau), mu=np.array(grid.mu), beta_plus=bp,
        beta_minus=bm, c0=c0, d0=d0, c=c, d=d, kappa=kappa, p=p, q=q, p_star=p_star,
        q_star=q_star, p_plus=p_plus, p_minus=p_minus, q_plus=q_plus,
        q_minus=q_minus, phase_plus=phase_plus, phase_minus=phase_minus,
        fast_phase=fast,
    )
