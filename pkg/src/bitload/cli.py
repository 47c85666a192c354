"""Command-line entry point: ``bitload {allocate,sweep,channel-gen}``.

Exit status: 0 success, 2 invalid config, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channel import RNG_ALGORITHM, target_bitrate
from .experiments import (
    SUMMARY_COLUMNS,
    ConfigError,
    allocate_point,
    channel_at,
    format_cell,
    preset,
    resolve,
    run_sweep,
)

log = logging.getLogger("bitload")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _methods(text: str) -> list[str]:
    return [m.strip() for m in text.split(",") if m.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--config", type=Path, help="JSON experiment config")
    src.add_argument("--preset", help="fig2, fig3, fig4, fig6 or table1")
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--jobs", type=int, default=1, help="parallel sweep points")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--method", type=_methods, help="comma-separated method list")
    common.add_argument("--beta", type=int, choices=(1, 2))
    common.add_argument("--rmax", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="bitload", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("allocate", parents=[common], help="allocate bits on one channel")
    sub.add_parser("sweep", parents=[common], help="run a sweep or preset to CSV")
    sub.add_parser("channel-gen", parents=[common], help="write a channel SNR profile")
    return parser


def _load_config(args) -> dict:
    if args.preset:
        cfg = preset(args.preset)
    elif args.config:
        try:
            cfg = json.loads(args.config.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    else:
        raise ConfigError("one of --config or --preset is required")
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    return resolve(cfg, beta=args.beta, r_max=args.rmax, methods=args.method)


def _write_csv(path: Path, columns, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([format_cell(row.get(col)) for col in columns])


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _provenance(cfg: dict, seed: int) -> dict:
    return {"config": cfg, "seed": seed, "rng": RNG_ALGORITHM, "version": __version__}


def cmd_allocate(args, cfg: dict) -> None:
    if cfg.get("sweep"):
        axis, values = next(iter(cfg["sweep"].items()))
        if not isinstance(values, list) or len(values) != 1:
            raise ConfigError("allocate runs a single point; use sweep for several")
        value = values[0]
    else:
        axis, value = None, None
    if isinstance(cfg["beta"], list):
        raise ConfigError("allocate needs a single beta")
    if cfg["kind"] != "summary":
        raise ConfigError(f"{cfg['kind']} presets only run under sweep")
    profile, seed = channel_at(cfg, axis, value, args.seed)
    R = value if axis == "R" else cfg["R"]
    result = allocate_point(profile, cfg, cfg["beta"], R)
    args.out.mkdir(parents=True, exist_ok=True)
    for method, alloc in result["allocations"].items():
        _write_csv(args.out / f"alloc_{method}.csv", ["channel", "bits"],
                   [{"channel": i, "bits": b} for i, b in enumerate(alloc.tolist())])
    _write_csv(args.out / "summary.csv", SUMMARY_COLUMNS, result["rows"])
    _write_json(args.out / "report.json", {
        **_provenance(cfg, seed),
        "R": result["R"],
        "methods": result["reports"],
        "dissimilarity": result["dissimilarity"],
    })


def cmd_sweep(args, cfg: dict) -> None:
    columns, rows = run_sweep(cfg, args.seed, args.jobs)
    args.out.mkdir(parents=True, exist_ok=True)
    _write_csv(args.out / "summary.csv", columns, rows)
    _write_json(args.out / "report.json", {
        **_provenance(cfg, args.seed), "columns": columns, "rows": len(rows),
    })


def cmd_channel_gen(args, cfg: dict) -> None:
    sweep = cfg.get("sweep") or {}
    axis = "psdnr_db" if "psdnr_db" in sweep else None
    value = sweep["psdnr_db"][0] if axis else None
    profile, seed = channel_at(cfg, axis, value, args.seed)
    snr = profile.snr
    args.out.mkdir(parents=True, exist_ok=True)
    with np.errstate(divide="ignore"):
        snr_db = 10.0 * np.log10(snr)
    rows = [{"channel": i, "snr": float(s), "snr_db": float(d) if s > 0 else None}
            for i, (s, d) in enumerate(zip(snr, snr_db))]
    _write_csv(args.out / "channel.csv", ["channel", "snr", "snr_db"], rows)
    pos = snr[snr > 0]
    _write_json(args.out / "report.json", {
        **_provenance(cfg, seed),
        "n": profile.n,
        "psdnr_db": profile.psdnr_db(),
        "spread_db": float(10.0 * np.log10(pos.max() / pos.min())),
        "target_bitrate": target_bitrate(profile, cfg["r_max"]),
    })


COMMANDS = {"allocate": cmd_allocate, "sweep": cmd_sweep, "channel-gen": cmd_channel_gen}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load_config(args)
        COMMANDS[args.command](args, cfg)
    except (ArithmeticError, RuntimeError) as exc:
        print(f"bitload: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError, TypeError) as exc:
        print(f"bitload: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
