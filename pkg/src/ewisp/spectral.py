"""Sine pseudospectral substrate: grids, DST-I and Parseval norms.

Nodal values live on the interior points ``x_j = a + j h`` (``j = 1..M-1``);
the Dirichlet boundary values are implicitly zero and never stored.  Mode
``l`` corresponds to ``sin(mu_l (x - a))`` with ``mu_l = pi l / (b - a)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigurationError

# Transforms at or below this size use the O(M^2) direct sum.
DIRECT_MAX_M = 16


@dataclass(frozen=True)
class Grid:
    """Uniform grid on ``[a, b]`` with ``M`` subintervals (``M`` a power of two)."""

    a: float
    b: float
    M: int

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or not self.b > self.a:
            raise ConfigurationError(f"degenerate interval [{self.a}, {self.b}]")
        if (
            isinstance(self.M, bool)
            or int(self.M) != self.M
            or self.M < 4
            or (int(self.M) & (int(self.M) - 1))
        ):
            raise ConfigurationError(f"M must be a power of two >= 4, got {self.M!r}")
        object.__setattr__(self, "M", int(self.M))

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.M

    @cached_property
    def mu(self) -> np.ndarray:
        mu = np.pi * np.arange(1, self.M) / (self.b - self.a)
        mu.flags.writeable = False
        return mu

    @cached_property
    def x(self) -> np.ndarray:
        """Interior nodes ``x_1..x_{M-1}``."""
        x = self.a + np.arange(1, self.M) * self.h
        x.flags.writeable = False
        return x

    @property
    def x_full(self) -> np.ndarray:
        """All nodes ``x_0..x_M`` including the boundary."""
        return self.a + np.arange(self.M + 1) * self.h

    def nests(self, coarse: Grid) -> bool:
        """True if ``coarse`` has the same interval and its M divides ours."""
        return (
            coarse.a == self.a
            and coarse.b == self.b
            and coarse.M <= self.M
            and self.M % coarse.M == 0
        )


def build_grid(a: float, b: float, M: int) -> Grid:
    return Grid(float(a), float(b), M)


def _checked(grid: Grid, arr, name: str) -> np.ndarray:
    arr = np.asarray(arr, dtype=complex)
    if arr.shape != (grid.M - 1,):
        raise ConfigurationError(
            f"{name} must have length M-1 = {grid.M - 1}, got shape {arr.shape}"
        )
    return arr


@dataclass(frozen=True, eq=False)
class GridField:
    """Complex nodal values on the interior points of ``grid``."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _checked(self.grid, self.values, "values"))

    @classmethod
    def from_function(cls, grid: Grid, func) -> GridField:
        return cls(grid, np.asarray(func(grid.x), dtype=complex))

    def full(self) -> np.ndarray:
        """Values on all ``M + 1`` nodes, boundary zeros included."""
        out = np.zeros(self.grid.M + 1, dtype=complex)
        out[1:-1] = self.values
        return out


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Sine coefficients ``l = 1..M-1`` of a field on ``grid``."""

    grid: Grid
    modes: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "modes", _checked(self.grid, self.modes, "modes"))

    @classmethod
    def zeros(cls, grid: Grid) -> SpectralField:
        return cls(grid, np.zeros(grid.M - 1, dtype=complex))


# --- raw-array kernels (used directly by the time stepper) -----------------

def _sine_matrix(M: int) -> np.ndarray:
    j = np.arange(1, M)
    return np.sin(np.outer(j, j) * np.pi / M)


def _odd_fft(u: np.ndarray) -> np.ndarray:
    """Return ``sum_j u_j sin(j l pi / M)`` for ``l = 1..M-1`` via a 2M-point FFT."""
    M = u.shape[-1] + 1
    v = np.zeros(u.shape[:-1] + (2 * M,), dtype=complex)
    v[..., 1:M] = u
    v[..., M + 1 :] = -u[..., ::-1]
    # FFT of the odd extension is -2i times the sine sum
    return 0.5j * np.fft.fft(v)[..., 1:M]


def dst1(u: np.ndarray, direct: bool | None = None) -> np.ndarray:
    """Unnormalised DST-I, ``(S u)_l = sum_{j=1}^{M-1} u_j sin(j l pi / M)``."""
    M = u.shape[-1] + 1
    if direct is None:
        direct = M <= DIRECT_MAX_M
    if direct:
        return u @ _sine_matrix(M)
    return _odd_fft(u)


def forward_modes(values: np.ndarray, direct: bool | None = None) -> np.ndarray:
    M = values.shape[-1] + 1
    return dst1(values, direct) * (2.0 / M)


def inverse_modes(modes: np.ndarray, direct: bool | None = None) -> np.ndarray:
    return dst1(modes, direct)


# --- public field operations -----------------------------------------------

def dst_forward(u: GridField) -> SpectralField:
    """Sine coefficients ``(2/M) sum_j u_j sin(j l pi / M)`` of nodal data."""
    return SpectralField(u.grid, forward_modes(u.values))


def dst_inverse(c: SpectralField) -> GridField:
    """Nodal values of the sine interpolant, exact inverse of :func:`dst_forward`."""
    return GridField(c.grid, inverse_modes(c.modes))


def spectral_l2_norm(c: SpectralField) -> float:
    """L2 norm of the sine interpolant (Parseval)."""
    return float(np.sqrt(0.5 * c.grid.length * np.sum(np.abs(c.modes) ** 2)))


def spectral_semi_h1_norm(c: SpectralField) -> float:
    """L2 norm of the derivative of the sine interpolant."""
    return float(
        np.sqrt(0.5 * c.grid.length * np.sum((c.grid.mu * np.abs(c.modes)) ** 2))
    )


def restrict_modes(c: SpectralField, coarse: Grid) -> SpectralField:
    """L2 projection onto the sine space of a nested coarser grid."""
    if not c.grid.nests(coarse):
        raise ConfigurationError(
            f"grid M={coarse.M} on [{coarse.a}, {coarse.b}] does not nest in "
            f"M={c.grid.M} on [{c.grid.a}, {c.grid.b}]"
        )
    return SpectralField(coarse, c.modes[: coarse.M - 1].copy())


def prolong_modes(c: SpectralField, fine: Grid) -> SpectralField:
    """Embed the coefficients of a coarse field into a nested finer grid."""
    if not fine.nests(c.grid):
        raise ConfigurationError(
            f"grid M={c.grid.M} does not nest in M={fine.M}"
        )
    modes = np.zeros(fine.M - 1, dtype=complex)
    modes[: c.grid.M - 1] = c.modes
    return SpectralField(fine, modes)


def sample_nodes(u: GridField, coarse: Grid) -> GridField:
    """Restrict nodal data by sampling at the nodes shared with a nested grid."""
    if not u.grid.nests(coarse):
        raise ConfigurationError(
            f"grid M={coarse.M} does not nest in M={u.grid.M}"
        )
    stride = u.grid.M // coarse.M
    return GridField(coarse, u.values[stride - 1 :: stride].copy())


def discrete_l2_norm(u: GridField) -> float:
    """``sqrt(h sum_j |u_j|^2)`` over interior nodes."""
    return float(np.sqrt(u.grid.h * np.sum(np.abs(u.values) ** 2)))


def discrete_semi_h1_norm(u: GridField) -> float:
    """Forward-difference seminorm ``||delta_x^+ u||`` including the boundary cells."""
    diff = np.diff(u.full()) / u.grid.h
    return float(np.sqrt(u.grid.h * np.sum(np.abs(diff) ** 2)))


def linf_norm(u: GridField) -> float:
    return float(np.max(np.abs(u.values))) if u.values.size else 0.0
