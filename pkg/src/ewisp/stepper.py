"""EWI-SP time stepping for ``i psi_t - eps^2 psi_tt + psi_xx + f(|psi|^2) psi = 0``.

The state is advanced in sine-mode space with the weights from
:mod:`ewisp.coeffs`; the nonlinearity ``Tf(z) = f(|z|^2) z`` is evaluated
pointwise on the grid.  Per step: one inverse DST (to get nodal values) and
one forward DST (of ``Tf``).  The finite difference ``D(psi^n)`` is formed
from cached mode coefficients, which is the nodal difference by linearity.

The two-level recurrence ``psi^{n+1} = c psi^{n-1} + d psi^n + F^n`` is
carried in increment form, ``Delta^{n+1} = kappa psi^n - c Delta^n + F^n``
and ``psi^{n+1} = psi^n + Delta^{n+1}`` with ``kappa = c + d - 1``.  For
small ``tau`` both characteristic roots approach 1, and rounding in ``c``
and ``d`` would shift them by ``O(u / tau)``, an error that grows like
``1 / tau^2`` over a unit time interval.  The increment form keeps that
perturbation ``O(u)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from .coeffs import SchemeCoefficients, build_coefficients
from .errors import BlowUpError, ConfigurationError
from .spectral import Grid, GridField, SpectralField, forward_modes, inverse_modes

SPECTRAL_APPROX = "spectral"
EXACT = "exact"


# --- nonlinearity -----------------------------------------------------------

def _power_law(s, strength):
    return strength * s


def _constant(s, value):
    return np.full_like(np.asarray(s, dtype=float), value)


@dataclass(frozen=True)
class Nonlinearity:
    """``f`` and ``f'`` acting on ``s = |z|^2``, with the derived maps."""

    f: Callable
    f_prime: Callable
    name: str = "custom"

    def tf(self, z):
        z = np.asarray(z)
        s = z.real**2 + z.imag**2
        return self.f(s) * z

    def g(self, z):
        z = np.asarray(z)
        s = z.real**2 + z.imag**2
        return self.f(s) + self.f_prime(s) * s

    def h(self, z):
        z = np.asarray(z)
        s = z.real**2 + z.imag**2
        return self.f_prime(s) * z * z


def cubic(strength: float = -1.0) -> Nonlinearity:
    """``f(s) = strength * s``; the default is the focusing-sign case used in the tables."""
    return Nonlinearity(
        partial(_power_law, strength=float(strength)),
        partial(_constant, value=float(strength)),
        name=f"cubic({strength:g})",
    )


def linear() -> Nonlinearity:
    """``f = 0``: the scheme is exact for this case."""
    return Nonlinearity(
        partial(_constant, value=0.0), partial(_constant, value=0.0), name="none"
    )


# --- initial data -----------------------------------------------------------

def _gaussian_psi0(x):
    return np.pi**-0.25 * np.exp(-0.5 * np.asarray(x) ** 2)


def _gaussian_psi0_xx(x):
    x = np.asarray(x)
    return (x**2 - 1.0) * _gaussian_psi0(x)


def _gaussian(x):
    return np.exp(-0.5 * np.asarray(x) ** 2)


def _sine_mode(x, a, mu, amplitude):
    return amplitude * np.sin(mu * (np.asarray(x) - a))


def _zero(x):
    return np.zeros(np.shape(x))


@dataclass(frozen=True)
class InitialData:
    """Closed-form ``psi_0``, ``omega`` and optionally ``psi_0''`` (needed for exact velocity)."""

    psi0: Callable
    omega: Callable
    psi0_xx: Callable | None = None

    def fields(self, grid: Grid, nl: Nonlinearity):
        """Sampled ``(psi0, omega, psi1)``; ``psi1`` is None without ``psi0_xx``."""
        psi0 = GridField.from_function(grid, self.psi0)
        omega = GridField.from_function(grid, self.omega)
        psi1 = None
        if self.psi0_xx is not None:
            xx = np.asarray(self.psi0_xx(grid.x), dtype=complex)
            psi1 = GridField(grid, 1j * (xx + nl.tf(psi0.values)))
        return psi0, omega, psi1


def gaussian_data() -> InitialData:
    """``psi0 = pi^(-1/4) exp(-x^2/2)``, ``omega = exp(-x^2/2)``."""
    return InitialData(_gaussian_psi0, _gaussian, _gaussian_psi0_xx)


def sine_mode_data(grid_or_interval, mode: int, amplitude: complex = 1.0,
                   omega: Callable | None = None) -> InitialData:
    """Single sine mode ``amplitude * sin(mu_l (x - a))`` on ``[a, b]``."""
    if isinstance(grid_or_interval, Grid):
        a, b = grid_or_interval.a, grid_or_interval.b
    else:
        a, b = grid_or_interval
    mu = math.pi * mode / (b - a)
    return InitialData(
        partial(_sine_mode, a=a, mu=mu, amplitude=amplitude),
        omega if omega is not None else _zero,
        partial(_sine_mode, a=a, mu=mu, amplitude=-(mu**2) * amplitude),
    )


# --- configuration and state ------------------------------------------------

@dataclass(frozen=True)
class SolverConfig:
    grid: Grid
    eps: float
    alpha: float
    tau: float
    t_final: float
    nonlinearity: Nonlinearity = field(default_factory=cubic)
    initial_velocity_mode: str = SPECTRAL_APPROX

    def __post_init__(self):
        if not 0 < self.eps <= 1:
            raise ConfigurationError(f"eps must lie in (0, 1], got {self.eps!r}")
        if not self.alpha >= 0:
            raise ConfigurationError(f"alpha must be >= 0, got {self.alpha!r}")
        if not self.tau > 0:
            raise ConfigurationError(f"tau must be positive, got {self.tau!r}")
        if not self.t_final > 0:
            raise ConfigurationError(f"t_final must be positive, got {self.t_final!r}")
        if self.initial_velocity_mode not in (SPECTRAL_APPROX, EXACT):
            raise ConfigurationError(
                f"initial_velocity_mode must be {SPECTRAL_APPROX!r} or {EXACT!r}"
            )
        self.n_steps  # validates divisibility

    @property
    def n_steps(self) -> int:
        ratio = self.t_final / self.tau
        n = round(ratio)
        if n < 1 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
            raise ConfigurationError(
                f"t_final={self.t_final!r} is not an integer multiple of tau={self.tau!r}"
            )
        return int(n)


@dataclass(frozen=True, eq=False)
class SolverState:
    """Two time levels in mode space plus the cached nonlinear transforms.

    ``increment`` is ``psi_curr - psi_prev`` as propagated by the recurrence;
    it is the authoritative copy, ``psi_prev`` is kept for inspection.
    """

    grid: Grid
    n: int
    psi_prev: np.ndarray
    psi_curr: np.ndarray
    increment: np.ndarray
    tf_prev: np.ndarray
    td_prev: np.ndarray
    nodal_curr: np.ndarray

    @property
    def current(self) -> SpectralField:
        return SpectralField(self.grid, self.psi_curr)

    @property
    def previous(self) -> SpectralField:
        return SpectralField(self.grid, self.psi_prev)

    @property
    def nodal(self) -> GridField:
        return GridField(self.grid, self.nodal_curr)


def _same_grid(*fields_):
    grid = fields_[0].grid
    for f in fields_[1:]:
        if f is not None and f.grid != grid:
            raise ConfigurationError("fields live on different grids")
    return grid


def initial_fields(config: SolverConfig, psi0: GridField, omega: GridField,
                   psi1: GridField | None = None) -> tuple[GridField, GridField]:
    """Return ``(psi0, psi1_eps)`` with ``psi1_eps = psi1 + eps^alpha omega``.

    In spectral mode ``psi1 = i(psi0'' + Tf(psi0))`` is formed from sine
    coefficients; in exact mode the caller supplies ``psi1`` nodally.
    """
    grid = _same_grid(psi0, omega, psi1)
    if grid != config.grid:
        raise ConfigurationError("initial data grid differs from the configured grid")
    weight = config.eps**config.alpha
    if config.initial_velocity_mode == EXACT:
        if psi1 is None:
            raise ConfigurationError("exact initial velocity requires psi1")
        return psi0, GridField(grid, psi1.values + weight * omega.values)
    modes = (
        -1j * grid.mu**2 * forward_modes(psi0.values)
        + 1j * forward_modes(config.nonlinearity.tf(psi0.values))
        + weight * forward_modes(omega.values)
    )
    return psi0, GridField(grid, inverse_modes(modes))


def td_initial(nl: Nonlinearity, psi0: GridField, psi1_eps: GridField) -> GridField:
    """Time derivative of ``Tf(psi)`` at ``t = 0``: ``G(psi0) psi1 + H(psi0) conj(psi1)``."""
    _same_grid(psi0, psi1_eps)
    z, v = psi0.values, psi1_eps.values
    return GridField(psi0.grid, nl.g(z) * v + nl.h(z) * np.conj(v))


def _check_finite(values: np.ndarray, n: int, tau: float):
    if not np.all(np.isfinite(values)):
        raise BlowUpError(n, n * tau)


def first_step(coeffs: SchemeCoefficients, nl: Nonlinearity, psi0: GridField,
               psi1_eps: GridField) -> SolverState:
    grid = _same_grid(psi0, psi1_eps)
    psi0_m = forward_modes(psi0.values)
    vel_m = forward_modes(psi1_eps.values)
    tf0 = forward_modes(nl.tf(psi0.values))
    td0 = forward_modes(td_initial(nl, psi0, psi1_eps).values)
    psi1_m = coeffs.c0 * psi0_m + coeffs.d0 * vel_m + coeffs.p * tf0 + coeffs.q * td0
    nodal = inverse_modes(psi1_m)
    _check_finite(nodal, 1, coeffs.tau)
    return SolverState(grid, 1, psi0_m, psi1_m, psi1_m - psi0_m, tf0, td0, nodal)


def step(state: SolverState, coeffs: SchemeCoefficients, nl: Nonlinearity) -> SolverState:
    """Advance ``(psi^{n-1}, psi^n)`` to ``(psi^n, psi^{n+1})``."""
    tau = coeffs.tau
    tf = forward_modes(nl.tf(state.nodal_curr))
    td = (tf - state.tf_prev) / tau
    increment = (
        coeffs.kappa * state.psi_curr
        - coeffs.c * state.increment
        + coeffs.p * tf
        + coeffs.q * td
        - coeffs.p_star * state.tf_prev
        - coeffs.q_star * state.td_prev
    )
    new = state.psi_curr + increment
    nodal = inverse_modes(new)
    _check_finite(nodal, state.n + 1, tau)
    return SolverState(state.grid, state.n + 1, state.psi_curr, new, increment, tf, td, nodal)


@dataclass(eq=False)
class IntegrationResult:
    psi: GridField
    modes: SpectralField
    t: float
    n_steps: int
    snapshots: list = field(default_factory=list)  # (t, GridField) pairs
    max_abs: float = 0.0  # sup over all levels of max_j |psi_j^n|


def integrate(config: SolverConfig, psi0: GridField, omega: GridField,
              psi1: GridField | None = None, snapshot_stride: int | None = None,
              coeffs: SchemeCoefficients | None = None) -> IntegrationResult:
    """Run the first step and ``N - 1`` recurrence steps up to ``t_final``."""
    nl = config.nonlinearity
    n_steps = config.n_steps
    if coeffs is None:
        coeffs = build_coefficients(config.grid, config.eps, config.tau)
    psi0, psi1_eps = initial_fields(config, psi0, omega, psi1)

    snapshots = []
    if snapshot_stride:
        snapshots.append((0.0, psi0))
    max_abs = float(np.max(np.abs(psi0.values)))

    state = first_step(coeffs, nl, psi0, psi1_eps)
    while True:
        max_abs = max(max_abs, float(np.max(np.abs(state.nodal_curr))))
        if snapshot_stride and (state.n % snapshot_stride == 0 or state.n == n_steps):
            snapshots.append((state.n * config.tau, state.nodal))
        if state.n >= n_steps:
            break
        state = step(state, coeffs, nl)

    return IntegrationResult(
        psi=state.nodal, modes=state.current, t=n_steps * config.tau,
        n_steps=n_steps, snapshots=snapshots, max_abs=max_abs,
    )


def run_problem(config: SolverConfig, data: InitialData, **kwargs) -> IntegrationResult:
    """Sample ``data`` on the configured grid and integrate."""
    psi0, omega, psi1 = data.fields(config.grid, config.nonlinearity)
    if config.initial_velocity_mode == SPECTRAL_APPROX:
        psi1 = None
    return integrate(config, psi0, omega, psi1, **kwargs)


def write_snapshot_csv(path, t: float, psi: GridField) -> None:
    """Write ``# t=<time>`` then ``x, re, im`` rows on all nodes (boundary zeros included)."""
    full = psi.full()
    x = psi.grid.x_full
    with open(path, "w") as fh:
        fh.write(f"# t={t!r}\n")
        for xi, v in zip(x, full):
            fh.write(f"{float(xi)!r}, {float(v.real)!r}, {float(v.imag)!r}\n")
