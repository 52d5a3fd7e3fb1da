"""Command-line interface.

Subcommands
-----------
ho-figure1     oscillator study: work moments, excess fluctuations, the
               duration bound chain and the 1/tau fit
ising-figure2  critical sweep: excess trajectories and the finite-size
               scaling fit
ion-waveforms  export the Raman drive realizing a frequency ramp
verify         run every module's invariant suite

Outputs are CSV (with '#'-prefixed metadata lines) or JSON; identical
configurations produce byte-identical files.  Exit codes: 0 success,
1 numerical or physics failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CdworkError, ConfigError
from .figures import ho_figure1_data, ising_figure2_data
from .oscillator import HOConfig, ion_waveforms
from .verify import run_verification

_COMMON_KEYS = {
    "omega_i": 1.0,
    "omega_f": 3.0,
    "beta": 1.0,
    "tau": 0.8,
    "tau_list": None,
    "fock_dim": 120,
    "grid": 401,
    "n_list": None,
    "delta": 1.0,
    "seed": 20260809,
    "out": None,
    "format": "csv",
}

_SUBCOMMAND_KEYS = {
    "ho-figure1": {"omega_i", "omega_f", "beta", "tau", "tau_list",
                   "fock_dim", "grid", "seed", "out", "format"},
    "ising-figure2": {"n_list", "delta", "tau_list", "grid",
                      "trajectory_sites", "seed", "out", "format"},
    "ion-waveforms": {"omega_i", "omega_f", "tau", "nu", "grid", "seed",
                      "out", "format"},
    "verify": {"seed", "fock_dim", "chain_samples", "h1_scale", "out",
               "format"},
}

_EXTRA_DEFAULTS = {
    "nu": 3.0,
    "trajectory_sites": 64,
    "chain_samples": 12,
    "h1_scale": 1.0,
}


def _parse_float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad list {text!r}") from exc


def _parse_int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad list {text!r}") from exc


def _parse_beta(text):
    if text.lower() in {"inf", "infinity"}:
        return math.inf
    try:
        return float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad beta {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdwork",
        description="Counterdiabatic-driving work statistics and "
                    "geometric speed limits (hbar = m = 1 units).")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, keys):
        p.add_argument("--config", type=Path, default=None,
                       help="JSON file with configuration keys; explicit "
                            "flags override it")
        if "omega_i" in keys:
            p.add_argument("--omega-i", dest="omega_i", type=float)
            p.add_argument("--omega-f", dest="omega_f", type=float)
        if "beta" in keys:
            p.add_argument("--beta", type=_parse_beta)
        if "tau" in keys:
            p.add_argument("--tau", type=float)
        if "tau_list" in keys:
            p.add_argument("--tau-list", dest="tau_list",
                           type=_parse_float_list)
        if "fock_dim" in keys:
            p.add_argument("--fock-dim", dest="fock_dim", type=int)
        if "grid" in keys:
            p.add_argument("--grid", type=int)
        if "n_list" in keys:
            p.add_argument("--n-list", dest="n_list", type=_parse_int_list)
        if "delta" in keys:
            p.add_argument("--delta", type=float)
        if "nu" in keys:
            p.add_argument("--nu", type=float)
        if "trajectory_sites" in keys:
            p.add_argument("--trajectory-sites", dest="trajectory_sites",
                           type=int)
        if "chain_samples" in keys:
            p.add_argument("--chain-samples", dest="chain_samples", type=int)
        if "h1_scale" in keys:
            p.add_argument("--h1-scale", dest="h1_scale", type=float,
                           help="test hook: rescale the auxiliary term in "
                                "the transitionless certificate")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", type=Path)
        p.add_argument("--format", choices=("csv", "json"))

    for name, keys in _SUBCOMMAND_KEYS.items():
        add_common(sub.add_parser(name), keys)
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge defaults, the optional config file and explicit flags.

    Unknown config-file keys are rejected by name.
    """
    keys = _SUBCOMMAND_KEYS[args.command]
    resolved = {k: _COMMON_KEYS.get(k, _EXTRA_DEFAULTS.get(k)) for k in keys}
    if args.config is not None:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in loaded.items():
            norm = key.replace("-", "_")
            if norm not in keys:
                raise ConfigError(f"unknown config key {key!r}")
            if norm == "beta" and isinstance(value, str):
                value = _parse_beta(value)
            resolved[norm] = value
    for key in keys:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            resolved[key] = flag_value
    _validate_config(args.command, resolved)
    return resolved


def _validate_config(command: str, cfg: dict) -> None:
    positive = {"omega_i", "omega_f", "beta", "tau", "delta", "nu",
                "h1_scale"}
    for key in positive & cfg.keys():
        value = cfg[key]
        if value is not None and not value > 0:
            raise ConfigError(f"{key} must be positive, got {value!r}")
    for key in {"fock_dim", "grid", "trajectory_sites", "chain_samples"} & cfg.keys():
        value = cfg[key]
        if value is not None and value <= 0:
            raise ConfigError(f"{key} must be a positive integer")
    for key in ("tau_list", "n_list"):
        if key in cfg and cfg[key] is not None and len(cfg[key]) == 0:
            raise ConfigError(f"{key} must not be empty")
    if cfg.get("format") not in (None, "csv", "json"):
        raise ConfigError(f"unknown format {cfg.get('format')!r}")


def _config_hash(cfg: dict) -> str:
    # the hash names the computation: where the files land is irrelevant
    content = {k: v for k, v in cfg.items() if k != "out"}
    canon = json.dumps(content, sort_keys=True, default=str)
    return hashlib.sha256(canon.encode()).hexdigest()


def _format_value(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, columns: dict, metadata: dict) -> None:
    lines = [f"# cdwork {__version__}"]
    for key in sorted(metadata):
        lines.append(f"# {key}={metadata[key]}")
    names = list(columns)
    lines.append(",".join(names))
    arrays = [np.asarray(columns[n]) for n in names]
    for row in zip(*arrays):
        lines.append(",".join(_format_value(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True,
                               default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _emit_series(outdir: Path, stem: str, columns: dict, metadata: dict,
                 fmt: str) -> None:
    if fmt == "csv":
        write_csv(outdir / f"{stem}.csv", columns, metadata)
    else:
        payload = {"metadata": metadata,
                   "columns": {k: np.asarray(v).tolist()
                               for k, v in columns.items()}}
        write_json(outdir / f"{stem}.json", payload)


def _outdir(cfg: dict) -> Path:
    out = cfg.get("out") or Path("results")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _use_color() -> bool:
    return sys.stdout.isatty() and not os.environ.get("NO_COLOR")


def _status(passed: bool) -> str:
    word = "PASS" if passed else "FAIL"
    if _use_color():
        code = "32" if passed else "31"
        return f"\x1b[{code}m{word}\x1b[0m"
    return word


def cmd_ho_figure1(cfg: dict) -> int:
    data = ho_figure1_data(
        omega_i=cfg["omega_i"], omega_f=cfg["omega_f"], beta=cfg["beta"],
        tau=cfg["tau"], tau_list=cfg["tau_list"], dim=cfg["fock_dim"],
        grid_points=cfg["grid"])
    outdir = _outdir(cfg)
    meta = {"config-hash": _config_hash(cfg), "command": "ho-figure1"}
    fmt = cfg["format"] or "csv"
    _emit_series(outdir, "ho_figure1_mean_work", data.mean_series, meta, fmt)
    _emit_series(outdir, "ho_figure1_variance", data.variance_series, meta, fmt)
    _emit_series(outdir, "ho_figure1_excess", data.excess_series, meta, fmt)
    fluct = {
        "tau": np.array([r.tau for r in data.tau_table]),
        "avg_excess_dev": np.array([r.avg_excess_dev for r in data.tau_table]),
        "avg_energy_dev": np.array([r.avg_energy_dev for r in data.tau_table]),
    }
    _emit_series(outdir, "ho_figure1_fluctuation_average", fluct, meta, fmt)
    summary = dict(data.summary(), config=_plain(cfg))
    write_json(outdir / "ho_figure1_summary.json", summary)
    print(f"{_status(data.passed)} ho-figure1: ell={data.ell:.6f} "
          f"bures={data.bures_len:.6f} "
          + (f"fit coefficient={data.fit.coefficient:.4f}"
             if data.fit else "fit skipped"))
    return 0 if data.passed else 1


def cmd_ising_figure2(cfg: dict) -> int:
    n_list = cfg["n_list"] if cfg["n_list"] is not None \
        else [32, 64, 128, 256, 512, 1024]
    data = ising_figure2_data(
        n_list=n_list, delta=cfg["delta"], tau_list=cfg["tau_list"],
        grid_points=cfg["grid"], trajectory_sites=cfg["trajectory_sites"])
    outdir = _outdir(cfg)
    meta = {"config-hash": _config_hash(cfg), "command": "ising-figure2"}
    fmt = cfg["format"] or "csv"
    _emit_series(outdir, "ising_figure2_trajectories", data.trajectories,
                 meta, fmt)
    passed = True
    if data.scaling is not None:
        _emit_series(outdir, "ising_figure2_scaling",
                     {"n": data.scaling.n_values,
                      "cost_integral": data.scaling.integrals}, meta, fmt)
        passed = data.scaling.residual_rms < data.scaling.MAX_RESIDUAL
        note = f"alpha={data.scaling.alpha:.4f}"
    else:
        note = "single size: trajectory only, no fit"
    write_json(outdir / "ising_figure2_summary.json",
               dict(data.summary(), config=_plain(cfg)))
    print(f"{_status(passed)} ising-figure2: {note}")
    return 0 if passed else 1


def cmd_ion_waveforms(cfg: dict) -> int:
    config = HOConfig(cfg["omega_i"], cfg["omega_f"], cfg["tau"])
    table = ion_waveforms(config, cfg["nu"], grid_points=cfg["grid"])
    outdir = _outdir(cfg)
    meta = {"config-hash": _config_hash(cfg), "command": "ion-waveforms",
            "nu": cfg["nu"], "m_eff": table.ion.effective_mass}
    write_csv(outdir / "ion_waveforms.csv", table.columns(), meta)
    validity = {
        "nu": cfg["nu"],
        "effective_mass": table.ion.effective_mass,
        "min_validity_ratio": table.min_validity(),
        "validity_min_required": table.ion.validity_min,
        "within_validity": bool(table.min_validity() >= table.ion.validity_min),
        "config": _plain(cfg),
    }
    write_json(outdir / "ion_waveforms_validity.json", validity)
    print(f"{_status(True)} ion-waveforms: min validity ratio "
          f"{table.min_validity():.3g}")
    return 0


def cmd_verify(cfg: dict) -> int:
    results = run_verification(seed=cfg["seed"], fock_dim=cfg["fock_dim"],
                               chain_samples=cfg["chain_samples"],
                               h1_scale=cfg["h1_scale"])
    for res in results:
        print(f"{_status(res.passed)} {res.name}: {res.detail}")
    if cfg.get("out") is not None:
        outdir = _outdir(cfg)
        write_json(outdir / "verify_report.json", {
            "config": _plain(cfg),
            "checks": [{"name": r.name, "passed": r.passed,
                        "detail": r.detail} for r in results],
            "passed": all(r.passed for r in results),
        })
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(results)} checks failed",
              file=sys.stderr)
        return 1
    print(f"all {len(results)} checks passed")
    return 0


def _plain(cfg: dict) -> dict:
    # echoed configuration identifies the computation; the destination
    # directory is not part of it (and would break byte-determinism)
    return {k: (str(v) if isinstance(v, Path) else v)
            for k, v in cfg.items() if k != "out"}


_HANDLERS = {
    "ho-figure1": cmd_ho_figure1,
    "ising-figure2": cmd_ising_figure2,
    "ion-waveforms": cmd_ion_waveforms,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return _HANDLERS[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except CdworkError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
