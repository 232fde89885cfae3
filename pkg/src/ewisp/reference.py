"""Reference solutions.

* a fine-grid, fine-step EWI-SP run used as the "exact" solution in error
  tables, with an optional on-disk cache;
* a Strang time-splitting sine-spectral solver for the limiting NLS
  ``i psi_t + psi_xx + f(|psi|^2) psi = 0``, an independent discretisation
  used to measure the ``O(eps^2)`` distance between the two models.

Cache format (little-endian): a fixed header
``magic(4s) version(u4) a(f8) b(f8) M(u8) t(f8) eps(f8) alpha(f8)`` followed by
``M-1`` complex coefficients stored as interleaved ``(re, im)`` float64
pairs, plus a JSON sidecar ``<hash>.json`` holding the full config and hash.
"""
from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .spectral import (
    Grid,
    GridField,
    SpectralField,
    build_grid,
    forward_modes,
    inverse_modes,
    spectral_l2_norm,
    spectral_semi_h1_norm,
)
from .stepper import (
    SPECTRAL_APPROX,
    InitialData,
    Nonlinearity,
    SolverConfig,
    cubic,
    gaussian_data,
    run_problem,
)

CACHE_MAGIC = b"EWSP"
CACHE_VERSION = 1
_HEADER = struct.Struct("<4sIddQddd")

DEFAULT_FINE_M = 2048
DEFAULT_FINE_TAU = 1e-5
PAPER_FINE_M = 4096
PAPER_FINE_TAU = 1e-6


@dataclass(frozen=True)
class ReferenceSpec:
    """Problem template plus the fine resolution of its reference run."""

    eps: float
    alpha: float
    t_final: float = 1.0
    a: float = -16.0
    b: float = 16.0
    fine_M: int = DEFAULT_FINE_M
    fine_tau: float = DEFAULT_FINE_TAU
    nonlinearity: Nonlinearity = field(default_factory=cubic)
    data: InitialData = field(default_factory=gaussian_data)
    initial_velocity_mode: str = SPECTRAL_APPROX
    label: str = "gaussian"

    @property
    def grid(self) -> Grid:
        return build_grid(self.a, self.b, self.fine_M)

    def config(self) -> SolverConfig:
        return SolverConfig(
            self.grid, self.eps, self.alpha, self.fine_tau, self.t_final,
            self.nonlinearity, self.initial_velocity_mode,
        )

    def check_targets(self, grids=(), taus=()) -> None:
        """Reject target grids that do not nest, or steps not 16x coarser."""
        fine = self.grid
        for g in grids:
            if not fine.nests(g):
                raise ConfigurationError(
                    f"reference M={self.fine_M} does not nest target M={g.M}"
                )
        for tau in taus:
            if self.fine_tau > tau / 16 * (1 + 1e-12):
                raise ConfigurationError(
                    f"reference step {self.fine_tau} is not <= target step {tau}/16"
                )

    def key(self) -> dict:
        """Canonical description used for hashing; identical configs hash identically."""
        return {
            "kind": "ewi-reference",
            "a": self.a, "b": self.b, "M": self.fine_M, "tau": self.fine_tau,
            "t_final": self.t_final, "eps": self.eps, "alpha": self.alpha,
            "nonlinearity": self.nonlinearity.name, "data": self.label,
            "initial_velocity_mode": self.initial_velocity_mode,
            "format": CACHE_VERSION,
        }


def config_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


class ReferenceCache:
    """Binary reference states keyed by config hash."""

    def __init__(self, directory):
        self.directory = Path(directory)

    def _paths(self, digest):
        return self.directory / f"{digest}.bin", self.directory / f"{digest}.json"

    def load(self, spec: ReferenceSpec) -> SpectralField | None:
        key = spec.key()
        digest = config_hash(key)
        bin_path, json_path = self._paths(digest)
        if not (bin_path.exists() and json_path.exists()):
            return None
        meta = json.loads(json_path.read_text())
        if meta.get("hash") != digest or meta.get("config") != key:
            return None
        return read_state(bin_path, spec.grid)

    def store(self, spec: ReferenceSpec, state: SpectralField) -> Path:
        key = spec.key()
        digest = config_hash(key)
        self.directory.mkdir(parents=True, exist_ok=True)
        bin_path, json_path = self._paths(digest)
        write_state(bin_path, state, t=spec.t_final, eps=spec.eps, alpha=spec.alpha)
        json_path.write_text(
            json.dumps({"hash": digest, "config": key}, sort_keys=True, indent=1)
        )
        return bin_path


def write_state(path, state: SpectralField, t: float, eps: float, alpha: float) -> None:
    g = state.grid
    header = _HEADER.pack(CACHE_MAGIC, CACHE_VERSION, g.a, g.b, g.M, t, eps, alpha)
    body = np.ascontiguousarray(state.modes, dtype="<c16").tobytes()
    Path(path).write_bytes(header + body)


def read_state(path, grid: Grid | None = None) -> SpectralField:
    raw = Path(path).read_bytes()
    magic, version, a, b, M, _t, _eps, _alpha = _HEADER.unpack_from(raw)
    if magic != CACHE_MAGIC or version != CACHE_VERSION:
        raise ConfigurationError(f"{path}: not a version-{CACHE_VERSION} state file")
    stored = build_grid(a, b, M)
    if grid is not None and grid != stored:
        raise ConfigurationError(f"{path}: stored grid differs from the requested grid")
    modes = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size)
    if modes.size != M - 1:
        raise ConfigurationError(f"{path}: truncated state file")
    return SpectralField(stored, modes.astype(complex))


def ewi_reference(spec: ReferenceSpec, cache: ReferenceCache | None = None) -> SpectralField:
    """Fine EWI-SP solution at ``t_final``; restrict with :func:`ewisp.spectral.restrict_modes`."""
    if cache is not None:
        hit = cache.load(spec)
        if hit is not None:
            return hit
    result = run_problem(spec.config(), spec.data)
    if cache is not None:
        cache.store(spec, result.modes)
    return result.modes


# --- limiting NLS -----------------------------------------------------------

def _nonlinear_phase(values, tau, nl: Nonlinearity):
    s = values.real**2 + values.imag**2
    return np.exp(1j * tau * nl.f(s)) * values


def nls_strang_step(state: SpectralField, tau: float, nl: Nonlinearity) -> SpectralField:
    """Half nonlinear phase, exact linear step, half nonlinear phase."""
    mu = state.grid.mu
    u = _nonlinear_phase(inverse_modes(state.modes), 0.5 * tau, nl)
    modes = np.exp(-1j * mu**2 * tau) * forward_modes(u)
    u = _nonlinear_phase(inverse_modes(modes), 0.5 * tau, nl)
    return SpectralField(state.grid, forward_modes(u))


def nls_solve(psi0: GridField, tau: float, t_final: float, nl: Nonlinearity) -> SpectralField:
    """Strang splitting to ``t_final``; consecutive nonlinear half steps are fused."""
    n = round(t_final / tau)
    if n < 1 or abs(t_final / tau - n) > 1e-9 * max(1.0, t_final / tau):
        raise ConfigurationError(f"t_final={t_final} is not a multiple of tau={tau}")
    linear = np.exp(-1j * psi0.grid.mu**2 * tau)
    u = _nonlinear_phase(psi0.values.astype(complex), 0.5 * tau, nl)
    for k in range(n):
        u = inverse_modes(linear * forward_modes(u))
        u = _nonlinear_phase(u, tau if k < n - 1 else 0.5 * tau, nl)
    return SpectralField(psi0.grid, forward_modes(u))


@dataclass
class DistanceTable:
    eps: np.ndarray
    distance: np.ndarray  # H1 = L2 + semi-H1
    slope: float
    meta: dict = field(default_factory=dict)


def h1_distance(u: SpectralField, v: SpectralField) -> float:
    diff = SpectralField(u.grid, u.modes - v.modes)
    return spectral_l2_norm(diff) + spectral_semi_h1_norm(diff)


def model_distance(eps_sweep, template: ReferenceSpec, nls_tau: float | None = None) -> DistanceTable:
    """H1 distance at ``t_final`` between the EWI-SP solution and the limiting NLS.

    Both solvers run on ``template.fine_M`` points; the EWI-SP run uses
    ``template.fine_tau`` and the splitting run ``nls_tau`` (same by default).
    """
    eps_sweep = [float(e) for e in eps_sweep]
    if len(eps_sweep) < 2 or any(x <= y for x, y in zip(eps_sweep, eps_sweep[1:])):
        raise ConfigurationError("eps_sweep must hold >= 2 strictly decreasing values")
    nls_tau = template.fine_tau if nls_tau is None else nls_tau
    grid = template.grid
    psi0 = GridField.from_function(grid, template.data.psi0)
    limit = nls_solve(psi0, nls_tau, template.t_final, template.nonlinearity)
    dist = []
    for eps in eps_sweep:
        spec = replace(template, eps=eps)
        dist.append(h1_distance(ewi_reference(spec), limit))
    dist = np.array(dist)
    slope = float(np.polyfit(np.log(eps_sweep), np.log(dist), 1)[0])
    return DistanceTable(
        np.array(eps_sweep), dist, slope,
        meta={"M": template.fine_M, "ewi_tau": template.fine_tau, "nls_tau": nls_tau,
              "alpha": template.alpha, "t_final": template.t_final},
    )


def linear_nls_solution(psi0: SpectralField, t: float) -> SpectralField:
    """Closed-form limiting solution for ``f = 0``: each mode rotates by ``exp(-i mu^2 t)``."""
    return SpectralField(psi0.grid, np.exp(-1j * psi0.grid.mu**2 * t) * psi0.modes)


def linear_nlsw_solution(psi0: SpectralField, vel0: SpectralField, eps: float,
                         t: float) -> SpectralField:
    """Closed-form NLSW solution for ``f = 0`` from mode data ``(psi, psi_t)`` at 0."""
    mu = psi0.grid.mu
    root = np.sqrt(1.0 + 4.0 * eps**2 * mu**2)
    bp = (1.0 + root) / (2.0 * eps**2)
    bm = -2.0 * mu**2 / (1.0 + root)
    delta = root / eps**2
    gamma = -(bm * psi0.modes + 1j * vel0.modes) / delta
    nu = (bp * psi0.modes + 1j * vel0.modes) / delta
    # fast phase via t/eps^2 - t*beta^- to avoid forming t*beta^+ directly
    x = t / eps**2
    fast = complex(math.cos(x), math.sin(x)) * np.exp(-1j * t * bm)
    return SpectralField(psi0.grid, gamma * fast + nu * np.exp(1j * t * bm))
