"""Independent high-precision / brute-force oracles used by the tests.

Nothing here imports the package's numerical kernels.
"""
import mpmath
import numpy as np

DPS = 60


def direct_dst_modes(u):
    """(2/M) sum_j u_j sin(j l pi / M) by explicit double loop."""
    M = len(u) + 1
    out = np.zeros(M - 1, dtype=complex)
    for l in range(1, M):
        acc = 0j
        for j in range(1, M):
            acc += u[j - 1] * np.sin(j * l * np.pi / M)
        out[l - 1] = 2.0 * acc / M
    return out


def roots(mu, eps):
    with mpmath.workdps(DPS):
        mu, eps = mpmath.mpf(mu), mpmath.mpf(eps)
        r = mpmath.sqrt(1 + 4 * eps**2 * mu**2)
        return (1 + r) / (2 * eps**2), (1 - r) / (2 * eps**2), r / eps**2


def mp_sigma(beta, tau):
    with mpmath.workdps(DPS):
        x = mpmath.mpf(tau) * beta / 2
        s = mpmath.mpf(1) if x == 0 else mpmath.sin(x) / x
        return mpmath.expj(x) * s


def mp_quot(beta, tau):
    with mpmath.workdps(DPS):
        if beta == 0:
            return -1j * mpmath.mpf(tau) / 2
        return (1 - mp_sigma(beta, tau)) / beta


def duhamel_integrals(beta, tau):
    """int_0^tau e^{i beta (tau - s)} ds and int_0^tau e^{i beta (tau - s)} s ds, closed form."""
    with mpmath.workdps(DPS):
        tau = mpmath.mpf(tau)
        E = mpmath.expj(beta * tau)
        if beta == 0:
            return tau, tau**2 / 2
        return (E - 1) / (1j * beta), 1j * tau / beta - (E - 1) / beta**2


def scheme_coefficients(mu, eps, tau):
    """Per-mode weights of one step, derived independently at 60 digits.

    ``c0``, ``d0`` are the weights of ``y(0)`` and ``y'(0)`` in the free
    solution at ``tau``; ``c``, ``d`` come from ``lambda^2 = d lambda + c``
    with ``lambda = e^{i beta tau}``; ``p``, ``q`` are the Duhamel weights of
    a forcing ``g0 + s g1`` with Green's function
    ``(e^{i beta+ t} - e^{i beta- t}) / (i eps^2 delta)``.
    """
    with mpmath.workdps(DPS):
        tau_m, eps_m = mpmath.mpf(tau), mpmath.mpf(eps)
        bp, bm, delta = roots(mu, eps)
        ep, em = mpmath.expj(tau_m * bp), mpmath.expj(tau_m * bm)
        i0p, i1p = duhamel_integrals(bp, tau)
        i0m, i1m = duhamel_integrals(bm, tau)
        green = 1j * eps_m**2 * delta
        out = {
            "c0": (bp * em - bm * ep) / delta,
            "d0": 1j * (em - ep) / delta,
            "c": -ep * em,
            "d": ep + em,
            "kappa": -(1 - ep) * (1 - em),
            "p": (i0p - i0m) / green,
            "q": (i1p - i1m) / green,
            "phase_plus": ep,
            "phase_minus": em,
        }
        return {k: complex(v) for k, v in out.items()}


def affine_forced_mode(mu, eps, y0, v0, g0, g1, t):
    """Exact solution at ``t`` of ``-eps^2 y'' + i y' - mu^2 y + g0 + g1 s = 0``."""
    with mpmath.workdps(DPS):
        mu, eps, t = mpmath.mpf(mu), mpmath.mpf(eps), mpmath.mpf(t)
        g0, g1 = mpmath.mpc(g0), mpmath.mpc(g1)
        B = g1 / mu**2
        A = (g0 + 1j * B) / mu**2
        hy0, hv0 = mpmath.mpc(y0) - A, mpmath.mpc(v0) - B
        bp, bm, delta = roots(mu, eps)
        gamma = -(bm * hy0 + 1j * hv0) / delta
        nu = (bp * hy0 + 1j * hv0) / delta
        return complex(A + B * t + gamma * mpmath.expj(bp * t) + nu * mpmath.expj(bm * t))


def linear_mode_evolution(psi0, vel0, mu, eps, t):
    """gamma e^{i beta+ t} + nu e^{i beta- t} per mode, at 60 digits."""
    out = np.zeros(len(mu), dtype=complex)
    with mpmath.workdps(DPS):
        for i, m in enumerate(mu):
            bp, bm, delta = roots(m, eps)
            p0 = mpmath.mpc(psi0[i])
            v0 = mpmath.mpc(vel0[i])
            gamma = -(bm * p0 + 1j * v0) / delta
            nu = (bp * p0 + 1j * v0) / delta
            tt = mpmath.mpf(t)
            out[i] = complex(gamma * mpmath.expj(bp * tt) + nu * mpmath.expj(bm * tt))
    return out
