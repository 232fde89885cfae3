"""Command-line driver: single runs and the convergence studies.

Usage::

    ewisp run      --config run.json      --out OUT [--snapshot-stride K]
    ewisp spatial  --config spatial.json  --out OUT [--paper-exact] [--jobs N]
    ewisp temporal --config temporal.json --out OUT [--paper-exact] [--jobs N]
    ewisp diagonal --config diagonal.json --out OUT [--paper-exact] [--jobs N]
    ewisp distance --config distance.json --out OUT

Exit codes: 0 success, 1 configuration error, 2 numerical blow-up.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from . import analysis
from .errors import BlowUpError, ConfigurationError
from .reference import (
    PAPER_FINE_M,
    PAPER_FINE_TAU,
    ReferenceSpec,
    config_hash,
    model_distance,
)
from .spectral import build_grid
from .stepper import (
    SolverConfig,
    cubic,
    gaussian_data,
    linear,
    run_problem,
    sine_mode_data,
    write_snapshot_csv,
)

try:
    TOOL_VERSION = version("artifact")
except PackageNotFoundError:  # running from a source tree
    TOOL_VERSION = "0.1.0"

PAPER_TAUS = [0.2 / 4**k for k in range(8)]
PAPER_SPATIAL_EPS = [2.0**-k for k in (1, 2, 3, 4, 5, 6, 10, 20)]
PAPER_TEMPORAL_EPS = {
    2: [2.0**-k for k in (1, 2, 3, 4, 5, 6, 10, 20)],
    0: [2.0**-k for k in (1, 2, 3, 4, 5, 6, 7, 8, 10, 20)],
}
DESK_EPS = [2.0**-k for k in (1, 2, 3, 4, 5, 6, 10)]
DESK_TAUS = [0.2 / 4**k for k in range(5)]
DESK_H = [2.0, 1.0, 0.5, 0.25]


# --- configuration ----------------------------------------------------------

def load_config(path) -> dict:
    """Read a JSON object, or ``key = value`` lines whose values are JSON literals."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
        return cfg
    cfg = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            cfg[key] = json.loads(value)
        except json.JSONDecodeError:
            cfg[key] = value.strip("'\"")
    return cfg


def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigurationError(f"missing required key '{key}'")
    return cfg[key]


def _number(cfg, key, default=None):
    value = cfg.get(key, default) if default is not None else _require(cfg, key)
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"key '{key}' must be a number, got {value!r}") from None


def _number_list(cfg, key, default=None):
    value = cfg.get(key, default) if default is not None else _require(cfg, key)
    if not isinstance(value, list):
        raise ConfigurationError(f"key '{key}' must be a list")
    if not value:
        raise ConfigurationError(f"key '{key}' must not be empty")
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigurationError(f"key '{key}' must hold numbers") from None


def _nonlinearity(cfg):
    kind = cfg.get("nonlinearity", "cubic")
    if kind == "cubic":
        return cubic(_number(cfg, "nonlinearity_strength", -1.0))
    if kind in ("none", "linear"):
        return linear()
    raise ConfigurationError(f"unknown nonlinearity {kind!r}")


def _domain(cfg):
    dom = cfg.get("domain", [-16.0, 16.0])
    if not (isinstance(dom, list) and len(dom) == 2):
        raise ConfigurationError("key 'domain' must be [a, b]")
    return float(dom[0]), float(dom[1])


def _data(cfg, a, b):
    kind = cfg.get("initial_data", "gaussian")
    if kind == "gaussian":
        return gaussian_data(), "gaussian"
    if kind == "sine":
        mode = int(cfg.get("mode", 1))
        amp = complex(cfg.get("amplitude", 1.0))
        return sine_mode_data((a, b), mode, amp), f"sine({mode},{amp})"
    raise ConfigurationError(f"unknown initial_data {kind!r}")


def _template(cfg, alpha, eps=0.5) -> ReferenceSpec:
    a, b = _domain(cfg)
    data, label = _data(cfg, a, b)
    nl = _nonlinearity(cfg)
    return ReferenceSpec(
        eps=eps, alpha=alpha, t_final=_number(cfg, "t_final", 1.0), a=a, b=b,
        fine_M=int(cfg.get("reference_M", 2048)),
        fine_tau=_number(cfg, "reference_tau", 1e-5),
        nonlinearity=nl, data=data,
        initial_velocity_mode=cfg.get("initial_velocity", "spectral"), label=label,
    )


# --- output -----------------------------------------------------------------

def _write_table_csv(path: Path, table: analysis.RateTable, values) -> None:
    cols = [analysis.format_sci(v) for v in table.axis]
    lines = [",".join([f"{table.row_name}\\{table.axis_name}"] + cols)]
    for row_value, row in zip(table.rows, values):
        lines.append(",".join([analysis.format_sci(row_value)] +
                              [analysis.format_sci(v) for v in row]))
    path.write_text("\n".join(lines) + "\n")


def _emit_table(out: Path, name: str, table: analysis.RateTable, cfg: dict) -> list:
    csv_path = out / f"{name}.csv"
    rates_path = out / f"{name}_rates.csv"
    json_path = out / f"{name}.json"
    _write_table_csv(csv_path, table, table.errors)
    padded = np.full(table.errors.shape, np.nan)
    padded[:, 1:] = table.rates
    _write_table_csv(rates_path, table, padded)
    doc = {
        "config": cfg,
        "axis_name": table.axis_name,
        "axis": table.axis.tolist(),
        "row_name": table.row_name,
        "rows": table.rows.tolist(),
        "h1_errors": table.errors.tolist(),
        "rates": table.rates.tolist(),
        "rate_definition": table.rate_tag,
        "degeneracy_band": table.flags.tolist() if table.flags is not None else None,
        "rate_touches_band": (table.rate_flags.tolist()
                              if table.rate_flags is not None else None),
        "reports": [rep.__dict__ for rep in table.reports],
        "meta": table.meta,
    }
    json_path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return [csv_path, rates_path, json_path]


def _write_manifest(out: Path, subcommand: str, cfg: dict, files, started: float) -> Path:
    path = out / "manifest.json"
    names = sorted(p.name for p in files) + ["manifest.json"]
    manifest = {
        "config_hash": config_hash(cfg),
        "tool_version": TOOL_VERSION,
        "subcommand": subcommand,
        "wall_time_s": time.perf_counter() - started,
        "outputs": names,
    }
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return path


# --- subcommands -------------------------------------------------------------

def cmd_run(cfg: dict, args) -> list:
    M = int(_require(cfg, "M"))
    eps = _number(cfg, "eps")
    alpha = _number(cfg, "alpha")
    tau = _number(cfg, "tau")
    template = _template(cfg, alpha, eps)
    config = SolverConfig(
        build_grid(template.a, template.b, M), eps, alpha, tau, template.t_final,
        template.nonlinearity, template.initial_velocity_mode,
    )
    stride = args.snapshot_stride if args.snapshot_stride is not None else cfg.get("snapshot_stride")
    result = run_problem(config, template.data, snapshot_stride=int(stride) if stride else None)
    snapshots = result.snapshots or [(result.t, result.psi)]
    files = []
    for t, psi in snapshots:
        path = args.out / f"snapshot_{round(t / tau):08d}.csv"
        write_snapshot_csv(path, t, psi)
        files.append(path)
    return files


def cmd_spatial(cfg: dict, args) -> list:
    alpha = _number(cfg, "alpha")
    if args.paper_exact:
        cfg = {**cfg, "eps": PAPER_SPATIAL_EPS, "h": DESK_H, "tau": PAPER_FINE_TAU,
               "reference_M": PAPER_FINE_M}
    study = analysis.StudyConfig(alpha, _template(cfg, alpha), cfg.get("restriction", "embed"))
    table = analysis.spatial_sweep(
        study, _number_list(cfg, "h", DESK_H), _number_list(cfg, "eps", DESK_EPS),
        tau=_number(cfg, "tau", 1e-5), jobs=args.jobs, cache_dir=args.reference_cache,
    )
    return _emit_table(args.out, "spatial", table, cfg)


def cmd_temporal(cfg: dict, args) -> list:
    alpha = _number(cfg, "alpha")
    if args.paper_exact:
        eps = PAPER_TEMPORAL_EPS.get(int(alpha), PAPER_TEMPORAL_EPS[0])
        cfg = {**cfg, "eps": eps, "tau": PAPER_TAUS, "M": 1024,
               "reference_M": PAPER_FINE_M, "reference_tau": PAPER_FINE_TAU}
    study = analysis.StudyConfig(alpha, _template(cfg, alpha), cfg.get("restriction", "embed"))
    M = int(cfg.get("M", 512))
    table = analysis.temporal_sweep(
        study, _number_list(cfg, "tau", DESK_TAUS), _number_list(cfg, "eps", DESK_EPS),
        M=M, fine_M=int(cfg.get("reference_M", M)), jobs=args.jobs,
        cache_dir=args.reference_cache,
    )
    return _emit_table(args.out, "temporal", table, cfg)


def cmd_diagonal(cfg: dict, args) -> list:
    alpha = _number(cfg, "alpha", 0.0)
    if args.paper_exact:
        cfg = {**cfg, "count": 6, "M": 1024, "reference_M": PAPER_FINE_M,
               "reference_tau": PAPER_FINE_TAU}
    study = analysis.StudyConfig(alpha, _template(cfg, alpha), cfg.get("restriction", "embed"))
    M = int(cfg.get("M", 512))
    table = analysis.diagonal_sweep(
        study, eps0=_number(cfg, "eps0", 0.5), tau0=_number(cfg, "tau0", 0.2),
        count=int(cfg.get("count", 5)), M=M, fine_M=int(cfg.get("reference_M", M)),
        jobs=args.jobs, cache_dir=args.reference_cache,
    )
    return _emit_table(args.out, "diagonal", table, cfg)


def cmd_distance(cfg: dict, args) -> list:
    alpha = _number(cfg, "alpha", 2.0)
    eps = _number_list(cfg, "eps", [0.5, 0.25, 0.125, 0.0625])
    template = _template({"reference_M": 512, "reference_tau": 1e-4, **cfg}, alpha, eps[0])
    table = model_distance(eps, template, cfg.get("nls_tau"))
    path = args.out / "distance.csv"
    lines = ["eps,h1_distance"] + [
        f"{analysis.format_sci(e)},{analysis.format_sci(d)}"
        for e, d in zip(table.eps, table.distance)
    ]
    lines.append(f"slope,{analysis.format_sci(table.slope)}")
    path.write_text("\n".join(lines) + "\n")
    json_path = args.out / "distance.json"
    json_path.write_text(json.dumps(
        {"config": cfg, "eps": table.eps.tolist(), "h1_distance": table.distance.tolist(),
         "slope": table.slope, "meta": table.meta}, indent=1, sort_keys=True) + "\n")
    return [path, json_path]


COMMANDS = {
    "run": cmd_run,
    "spatial": cmd_spatial,
    "temporal": cmd_temporal,
    "diagonal": cmd_diagonal,
    "distance": cmd_distance,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ewisp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=Path("."))
        p.add_argument("--paper-exact", action="store_true",
                       help="use the full published parameter grids (overnight runs)")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--snapshot-stride", type=int, default=None)
        p.add_argument("--reference-cache", type=Path, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        cfg = load_config(args.config)
        if not isinstance(cfg, dict):
            raise ConfigurationError("configuration must be a mapping")
        if args.jobs < 1:
            raise ConfigurationError("--jobs must be >= 1")
        args.out.mkdir(parents=True, exist_ok=True)
        files = COMMANDS[args.command](cfg, args)
    except BlowUpError as exc:
        print(f"ewisp: blow-up: {exc}", file=sys.stderr)
        return 2
    except (ConfigurationError, ValueError, OSError) as exc:
        print(f"ewisp: configuration error: {exc}", file=sys.stderr)
        return 1
    _write_manifest(args.out, args.command, cfg, files, started)
    return 0


if __name__ == "__main__":
    sys.exit(main())
