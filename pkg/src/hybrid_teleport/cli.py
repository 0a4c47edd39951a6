"""Command-line front end: ``hybrid-teleport run|wigner|presets|config``."""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import os
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__, fock
from .config import PRESETS, SweepConfig, expand_grid, parse_number, preset_config
from .errors import ConfigError, HybridTeleportError
from .experiments import WIGNER_STATES, columns_for, run_rows, wigner_state

OUTDIR_ENV = "HYBRID_TELEPORT_OUTDIR"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FLAGGED = 3
EXIT_RUNTIME = 4


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    return "0" if v == 0 else f"{v:.9g}"


def _json_value(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return int(value)
    return float(_fmt(value))


def provenance(cfg: SweepConfig, timestamp: bool = False) -> str:
    parts = [
        f"hybrid-teleport {__version__}",
        f"experiment={cfg.experiment}",
        f"preset={cfg.name or '-'}",
        f"seed={cfg.seed}",
        f"config_sha256={cfg.fingerprint()}",
        f"numpy={np.__version__}",
        f"scipy={scipy.__version__}",
    ]
    if timestamp:
        parts.append(f"generated={datetime.datetime.now(datetime.timezone.utc).isoformat(timespec='seconds')}")
    return " ".join(parts)


def render(rows: list[dict], columns: list[str], fmt: str, header: str) -> str:
    if fmt == "json":
        doc = {"provenance": header, "columns": columns,
               "rows": [{c: _json_value(r[c]) for c in columns} for r in rows]}
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# {header}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _output_path(explicit: str | None, default_name: str) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get(OUTDIR_ENV, ".")) / default_name


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


# --- config assembly -------------------------------------------------------------


def _load_config(args) -> SweepConfig:
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be an object")
        cfg = SweepConfig.from_dict(data)
        if args.preset and cfg.name is None:
            cfg.name = args.preset
    elif args.preset:
        cfg = preset_config(args.preset)
    else:
        raise ConfigError("preset", "give a preset name or --config PATH")
    overrides = {
        "output_path": args.out, "output_format": args.format, "seed": args.seed,
        "fock_dim": args.dim, "measurement_model": args.model, "jobs": args.jobs,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    return cfg.validate()


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    jobs = cfg.jobs or os.cpu_count() or 1
    rows = run_rows(cfg, jobs)
    text = render(rows, columns_for(cfg), cfg.output_format, provenance(cfg, args.timestamp))
    stem = cfg.name or cfg.experiment
    path = _output_path(cfg.output_path, f"{stem}.{cfg.output_format}")
    _write(path, text)
    flagged = sum(1 for r in rows if r["error"])
    print(f"wrote {len(rows)} rows to {path}" + (f" ({flagged} flagged)" if flagged else ""))
    return EXIT_FLAGGED if flagged else EXIT_OK


def _cmd_wigner(args) -> int:
    alpha = parse_number(args.alpha, "alpha")
    if args.state not in WIGNER_STATES:
        raise ConfigError("state", f"unknown state {args.state!r} (have {', '.join(WIGNER_STATES)})")
    if args.points < 1:
        raise ConfigError("points", "must be positive")
    lo, hi = parse_number(args.min, "min"), parse_number(args.max, "max")
    if hi < lo:
        raise ConfigError("max", "must not be below min")
    xs = np.linspace(lo, hi, args.points)
    if args.dim is not None:
        fock.check_truncation(alpha, args.dim)
    rho = wigner_state(args.state, alpha, args.dim, parse_number(args.theta, "theta"),
                       parse_number(args.phi, "phi"), args.outcome)
    grid = fock.wigner_grid(rho, xs, xs)
    header = (f"hybrid-teleport {__version__} wigner state={args.state} alpha={_fmt(alpha)} "
              f"numpy={np.__version__} scipy={scipy.__version__}")
    fmt = args.format or "csv"
    if fmt == "json":
        doc = {"provenance": header, "x": [_json_value(v) for v in xs], "y": [_json_value(v) for v in xs],
               "W": [[_json_value(v) for v in row] for row in grid]}
        text = json.dumps(doc) + "\n"
    else:
        buf = io.StringIO()
        buf.write(f"# {header}\n# rows: y (Im beta), columns: x (Re beta)\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["y\\x", *(_fmt(v) for v in xs)])
        for y, row in zip(xs, grid):
            writer.writerow([_fmt(y), *(_fmt(v) for v in row)])
        text = buf.getvalue()
    path = _output_path(args.out, f"wigner-{args.state}.{fmt}")
    _write(path, text)
    print(f"wrote {args.points}x{args.points} Wigner grid to {path}")
    return EXIT_OK


def _cmd_presets(args) -> int:
    for name, entry in PRESETS.items():
        print(f"{name:14s} {entry['config']['experiment']:18s} {entry['description']}")
    return EXIT_OK


def _cmd_config_dump(args) -> int:
    cfg = preset_config(args.preset)
    text = json.dumps(cfg.to_dict(), indent=2) + "\n"
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybrid-teleport", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset or a JSON sweep config")
    run.add_argument("preset", nargs="?", help=f"one of: {', '.join(PRESETS)}")
    run.add_argument("--config", help="JSON sweep config (flags override its fields)")
    run.add_argument("--out", help=f"output file (default: ${OUTDIR_ENV} or ., named after the preset)")
    run.add_argument("--format", choices=["csv", "json"])
    run.add_argument("--seed", type=int)
    run.add_argument("--dim", type=int, help="Fock cutoff per cavity")
    run.add_argument("--model", choices=["ideal", "displaced"])
    run.add_argument("--jobs", type=int, help="worker processes (default: CPU count)")
    run.add_argument("--timestamp", action="store_true", help="add a generation time to the header")
    run.set_defaults(func=_cmd_run)

    wig = sub.add_parser("wigner", help="Wigner function on a square grid")
    wig.add_argument("state", help=f"one of: {', '.join(WIGNER_STATES)}")
    wig.add_argument("--alpha", default="2")
    wig.add_argument("--theta", default="pi/2", help="teleport-output only")
    wig.add_argument("--phi", default="0", help="teleport-output only")
    wig.add_argument("--outcome", default="g+", help="teleport-output only: g+, g-, e+ or e-")
    wig.add_argument("--min", default="-3")
    wig.add_argument("--max", default="3")
    wig.add_argument("--points", type=int, default=41)
    wig.add_argument("--dim", type=int)
    wig.add_argument("--out")
    wig.add_argument("--format", choices=["csv", "json"])
    wig.set_defaults(func=_cmd_wigner)

    presets = sub.add_parser("presets", help="preset utilities")
    psub = presets.add_subparsers(dest="action", required=True)
    psub.add_parser("list", help="list presets").set_defaults(func=_cmd_presets)

    config = sub.add_parser("config", help="config utilities")
    csub = config.add_subparsers(dest="action", required=True)
    dump = csub.add_parser("dump", help="print a preset as a JSON config")
    dump.add_argument("preset")
    dump.add_argument("--out")
    dump.set_defaults(func=_cmd_config_dump)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HybridTeleportError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
