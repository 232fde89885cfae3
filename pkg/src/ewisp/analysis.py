"""Error metrics, convergence rates and the three sweep drivers.

Errors follow the table convention: the H1 norm is ``||e||_L2 + ||e_x||_L2``
of ``e(x) = psi_ref(x) - I_M(psi^n)(x)``, measured at ``t_final``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError
from .reference import ReferenceCache, ReferenceSpec, ewi_reference
from .spectral import (
    SpectralField,
    build_grid,
    dst_forward,
    dst_inverse,
    prolong_modes,
    restrict_modes,
    sample_nodes,
    spectral_l2_norm,
    spectral_semi_h1_norm,
)
from .stepper import SolverConfig, run_problem

EMBED = "embed"
TRUNCATE = "truncate"
NODAL = "nodal"
RESTRICTIONS = (EMBED, TRUNCATE, NODAL)


@dataclass(frozen=True)
class ErrorReport:
    l2: float
    semi_h1: float
    h1: float
    linf: float
    eps: float | None = None
    alpha: float | None = None
    tau: float | None = None
    h: float | None = None
    t: float | None = None


def error_report(numeric: SpectralField, reference: SpectralField,
                 restriction: str = EMBED, **meta) -> ErrorReport:
    """Error of ``numeric`` against a reference on an equal or nested finer grid.

    ``restriction`` selects how the reference meets the coarse solution:
    ``embed`` compares on the fine grid (the full interpolant error),
    ``truncate`` keeps only the coarse modes of the reference, ``nodal``
    samples the reference at the coarse nodes.  ``linf`` is always the nodal
    maximum on the coarse grid.
    """
    coarse, fine = numeric.grid, reference.grid
    if not fine.nests(coarse):
        raise ConfigurationError(
            f"reference grid M={fine.M} does not nest numeric grid M={coarse.M}"
        )
    ref_nodal = sample_nodes(dst_inverse(reference), coarse)
    if restriction == EMBED:
        diff = SpectralField(fine, reference.modes - prolong_modes(numeric, fine).modes)
    elif restriction == TRUNCATE:
        diff = SpectralField(coarse, restrict_modes(reference, coarse).modes - numeric.modes)
    elif restriction == NODAL:
        diff = SpectralField(coarse, dst_forward(ref_nodal).modes - numeric.modes)
    else:
        raise ConfigurationError(f"unknown restriction {restriction!r}")
    l2 = spectral_l2_norm(diff)
    semi = spectral_semi_h1_norm(diff)
    linf = float(np.max(np.abs(ref_nodal.values - dst_inverse(numeric).values)))
    meta.setdefault("h", coarse.h)
    return ErrorReport(l2, semi, l2 + semi, linf, **meta)


def _check_errors(errs):
    errs = np.asarray(errs, dtype=float)
    if errs.ndim != 1 or errs.size < 1:
        raise ValueError("expected a one-dimensional sequence of errors")
    if np.any(~np.isfinite(errs)) or np.any(errs <= 0):
        raise ValueError("errors must be finite and positive")
    return errs


def temporal_rate(errs) -> np.ndarray:
    """``log2(e(4 tau) / e(tau)) / 2`` for consecutive entries of a 4x step sweep."""
    errs = _check_errors(errs)
    return np.log2(errs[:-1] / errs[1:]) / 2.0


def diagonal_rate(errs) -> np.ndarray:
    """``log2(e(4 tau, 2 eps) / e(tau, eps)) / 2`` along the ``tau ~ eps^2`` path."""
    return temporal_rate(errs)


def spatial_rate(errs) -> np.ndarray:
    """``log2(e(2h) / e(h))``: algebraic order per mesh halving (grows for spectral decay)."""
    errs = _check_errors(errs)
    return np.log2(errs[:-1] / errs[1:])


def in_degeneracy_band(tau: float, eps: float, width: float = 4.0) -> bool:
    """True if ``tau`` lies within a factor ``width`` of ``eps^2``."""
    return eps**2 / width <= tau <= eps**2 * width


def rate_touches_band(tau_fine: float, tau_coarse: float, eps: float,
                      width: float = 4.0) -> bool:
    """True if the step interval ``[tau_fine, tau_coarse]`` of a rate meets the
    band ``[eps^2 / width, eps^2 * width]`` where the order may plateau."""
    return tau_fine <= eps**2 * width and tau_coarse >= eps**2 / width


@dataclass
class RateTable:
    """Errors on a (row x axis) grid with per-row rates.

    ``rates[i, k]`` relates columns ``k`` and ``k + 1`` (the tables print it
    under column ``k + 1``; column 0 has no rate).
    """

    axis_name: str
    axis: np.ndarray
    row_name: str
    rows: np.ndarray
    errors: np.ndarray
    rates: np.ndarray
    rate_tag: str
    reports: list = field(default_factory=list)
    flags: np.ndarray | None = None  # degeneracy-band cells (temporal, alpha < 2)
    rate_flags: np.ndarray | None = None  # rates whose step interval meets the band
    meta: dict = field(default_factory=dict)


# --- sweep machinery --------------------------------------------------------

@dataclass(frozen=True)
class StudyConfig:
    """Shared problem setup for a sweep (the per-cell eps/tau/M vary)."""

    alpha: float
    template: ReferenceSpec
    restriction: str = EMBED

    def solver_config(self, M: int, eps: float, tau: float) -> SolverConfig:
        t = self.template
        return SolverConfig(
            build_grid(t.a, t.b, M), eps, self.alpha, tau, t.t_final,
            t.nonlinearity, t.initial_velocity_mode,
        )

    def reference_spec(self, eps: float, fine_M: int | None = None,
                       fine_tau: float | None = None) -> ReferenceSpec:
        changes = {"eps": eps, "alpha": self.alpha}
        if fine_M is not None:
            changes["fine_M"] = fine_M
        if fine_tau is not None:
            changes["fine_tau"] = fine_tau
        return replace(self.template, **changes)


def _run_cell(config: SolverConfig, data) -> SpectralField:
    return run_problem(config, data).modes


def _run_reference(spec: ReferenceSpec, cache_dir) -> SpectralField:
    cache = ReferenceCache(cache_dir) if cache_dir is not None else None
    return ewi_reference(spec, cache)


def _map(fn, arglists, jobs: int):
    """Apply ``fn`` to each argument tuple; results in input order."""
    if jobs <= 1 or len(arglists) <= 1:
        return [fn(*args) for args in arglists]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn, *args) for args in arglists]
        return [f.result() for f in futures]


def _references(specs, jobs, cache_dir):
    return _map(_run_reference, [(s, cache_dir) for s in specs], jobs)


def spatial_sweep(study: StudyConfig, h_list, eps_list, tau: float = 1e-5,
                  jobs: int = 1, cache_dir=None) -> RateTable:
    """H1 errors for each mesh size and eps at a fixed (small) time step.

    The reference runs on ``study.template.fine_M`` points with the same
    ``tau`` as the cells, so temporal errors largely cancel.
    """
    t = study.template
    eps_list = [float(e) for e in eps_list]
    if not eps_list or not len(h_list):
        raise ConfigurationError("spatial sweep needs non-empty eps and h lists")
    Ms = []
    for h in h_list:
        M = (t.b - t.a) / h
        if abs(M - round(M)) > 1e-9:
            raise ConfigurationError(f"h={h} does not divide the interval")
        Ms.append(int(round(M)))
    specs = [study.reference_spec(e, fine_tau=tau) for e in eps_list]
    for s in specs:
        s.check_targets(grids=[build_grid(t.a, t.b, M) for M in Ms])
    refs = _references(specs, jobs, cache_dir)

    cells = [(study.solver_config(M, e, tau), t.data) for e in eps_list for M in Ms]
    sols = _map(_run_cell, cells, jobs)

    errors = np.empty((len(eps_list), len(Ms)))
    reports = []
    for i, e in enumerate(eps_list):
        for k, M in enumerate(Ms):
            rep = error_report(sols[i * len(Ms) + k], refs[i], study.restriction,
                               eps=e, alpha=study.alpha, tau=tau, t=t.t_final)
            reports.append(rep)
            errors[i, k] = rep.h1
    rates = np.array([spatial_rate(row) for row in errors])
    return RateTable(
        "h", np.array(h_list, dtype=float), "eps", np.array(eps_list), errors, rates,
        "log2(e(2h)/e(h))", reports,
        meta={"tau": tau, "alpha": study.alpha, "reference_M": t.fine_M,
              "reference_tau": tau, "restriction": study.restriction},
    )


def temporal_sweep(study: StudyConfig, tau_list, eps_list, M: int = 512,
                   fine_tau: float | None = None, fine_M: int | None = None,
                   jobs: int = 1, cache_dir=None) -> RateTable:
    """H1 errors for each (eps, tau) at fixed ``M``; rates per eps row.

    The reference for each eps runs on ``fine_M`` points (default: ``M``,
    since the spatial error is negligible at these resolutions) with step
    ``fine_tau`` (default: the template's).
    """
    t = study.template
    eps_list = [float(e) for e in eps_list]
    tau_list = [float(x) for x in tau_list]
    if not eps_list or not tau_list:
        raise ConfigurationError("temporal sweep needs non-empty eps and tau lists")
    fine_M = M if fine_M is None else fine_M
    specs = [study.reference_spec(e, fine_M=fine_M, fine_tau=fine_tau) for e in eps_list]
    for s in specs:
        s.check_targets(grids=[build_grid(t.a, t.b, M)], taus=tau_list)
    refs = _references(specs, jobs, cache_dir)

    cells = [(study.solver_config(M, e, tau), t.data) for e in eps_list for tau in tau_list]
    sols = _map(_run_cell, cells, jobs)

    n = len(tau_list)
    errors = np.empty((len(eps_list), n))
    flags = np.zeros((len(eps_list), n), dtype=bool)
    reports = []
    for i, e in enumerate(eps_list):
        for k, tau in enumerate(tau_list):
            rep = error_report(sols[i * n + k], refs[i], study.restriction,
                               eps=e, alpha=study.alpha, tau=tau, t=t.t_final)
            reports.append(rep)
            errors[i, k] = rep.h1
            flags[i, k] = study.alpha < 2 and in_degeneracy_band(tau, e)
    rates = np.array([temporal_rate(row) for row in errors])
    rate_flags = np.array([
        [rate_touches_band(*sorted(tau_list[k:k + 2]), e) for k in range(n - 1)]
        for e in eps_list
    ]).reshape(len(eps_list), n - 1)
    return RateTable(
        "tau", np.array(tau_list), "eps", np.array(eps_list), errors, rates,
        "log2(e(4tau)/e(tau))/2", reports, flags, rate_flags,
        meta={"M": M, "alpha": study.alpha, "reference_M": fine_M,
              "reference_tau": specs[0].fine_tau, "restriction": study.restriction},
    )


def diagonal_sweep(study: StudyConfig, eps0: float = 0.5, tau0: float = 0.2,
                   count: int = 5, M: int = 512, fine_tau: float | None = None,
                   fine_M: int | None = None, jobs: int = 1, cache_dir=None) -> RateTable:
    """Errors along ``(eps, tau) = (eps0 / 2^k, tau0 / 4^k)``; a single-row table."""
    t = study.template
    if count < 1:
        raise ConfigurationError("diagonal sweep needs at least one point")
    eps_list = [eps0 / 2**k for k in range(count)]
    tau_list = [tau0 / 4**k for k in range(count)]
    fine_M = M if fine_M is None else fine_M
    specs = [study.reference_spec(e, fine_M=fine_M, fine_tau=fine_tau) for e in eps_list]
    for s, tau in zip(specs, tau_list):
        s.check_targets(grids=[build_grid(t.a, t.b, M)], taus=[tau])
    refs = _references(specs, jobs, cache_dir)
    cells = [(study.solver_config(M, e, tau), t.data) for e, tau in zip(eps_list, tau_list)]
    sols = _map(_run_cell, cells, jobs)
    reports = [
        error_report(s, r, study.restriction, eps=e, alpha=study.alpha, tau=tau, t=t.t_final)
        for s, r, e, tau in zip(sols, refs, eps_list, tau_list)
    ]
    errors = np.array([[rep.h1 for rep in reports]])
    return RateTable(
        "tau", np.array(tau_list), "eps", np.array(eps_list), errors,
        np.array([diagonal_rate(errors[0])]), "log2(e(4tau,2eps)/e(tau,eps))/2",
        reports,
        meta={"M": M, "alpha": study.alpha, "reference_M": fine_M,
              "reference_tau": specs[0].fine_tau, "restriction": study.restriction},
    )


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def format_sci(v: float) -> str:
    """Fixed 6-significant-digit scientific formatting used in all CSV output."""
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "---"
    return f"{v:.5e}"
