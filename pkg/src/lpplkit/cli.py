"""Command-line front end.

Exit status: 0 success, 1 input/format error, 2 config error, 3 fit,
scan or forecast failure.  Every file written is accompanied by a
``<stem>.manifest.json`` recording the command, resolved configuration,
input checksums and outputs.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, InputError, LpplError
from .fitting import FitConfig, FitResult, fit
from .forecast import crash_window
from .model import LpplParams, evaluate, residuals
from .series import PriceSeries, last_per_month, log_transform, read_csv, slice_window
from .series import to_csv as series_to_csv
from .synth import SynthSpec, generate
from .timebase import decimal_year_to_date, parse_time
from .windows import DEFAULT_MIN_SUCCESSES, DEFAULT_STABILITY_THRESHOLD, scan_windows

log = logging.getLogger("lpplkit")

SCHEMA_VERSION = 1
CURVE_POINTS = 1000


# ----------------------------------------------------------------------
# output helpers


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def sidecar(out: Path, suffix: str) -> Path:
    return out.with_name(f"{out.stem}.{suffix}")


def write_manifest(out: Path, command: str, argv: list[str], config: dict, inputs: list, outputs: list) -> None:
    manifest = {
        "schema": "lpplkit.manifest",
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "argv": argv,
        "config": config,
        "inputs": {str(p): sha256(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
    }
    path = sidecar(out, "manifest.json")
    write_atomic(path, dump_json(manifest))


def emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        write_atomic(out, text)


# ----------------------------------------------------------------------
# shared loading


def resolve_config(args) -> FitConfig:
    cfg = FitConfig.load(args.config) if args.config else FitConfig()
    overrides = {}
    if args.scale:
        overrides["scale"] = args.scale
    if args.workers:
        overrides["workers"] = args.workers
    if overrides:
        cfg = FitConfig.from_dict({**cfg.to_dict(), **overrides})
    return cfg


def load_series(args, cfg: FitConfig) -> PriceSeries:
    try:
        s = read_csv(args.input, column=args.column)
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc}") from exc
    if args.monthly:
        s = last_per_month(s)
    if cfg.scale == "log":
        s = log_transform(s)
    return s


def window_bounds(args, s: PriceSeries) -> tuple[float, float]:
    start = parse_time(args.window_start) if args.window_start else s.start
    end = parse_time(args.window_end) if args.window_end else s.end
    return start, end


def residual_csv(params: LpplParams, s: PriceSeries) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["Date", "Time", "Price", "Model", "Residual"])
    model = evaluate(params, s.times)
    for t, p, m, r in zip(s.times, s.prices, model, residuals(params, s)):
        w.writerow([decimal_year_to_date(t).isoformat(), repr(float(t)), repr(float(p)),
                    repr(float(m)), repr(float(r))])
    return out.getvalue()


def curve_csv(params: LpplParams, start: float, end: float, n: int = CURVE_POINTS) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["Date", "Time", "Model"])
    times = np.linspace(start, end, n)
    for t, m in zip(times, evaluate(params, times)):
        w.writerow([decimal_year_to_date(t).isoformat(), repr(float(t)), repr(float(m))])
    return out.getvalue()


def load_document(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path} does not hold a JSON object")
    return doc


def fit_from_document(doc: dict) -> FitResult:
    body = doc.get("result", doc)
    try:
        return FitResult.from_dict(body)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"not a fit document: {exc}") from exc


# ----------------------------------------------------------------------
# commands


def cmd_fit(args) -> int:
    cfg = resolve_config(args)
    s = load_series(args, cfg)
    start, end = window_bounds(args, s)
    w = slice_window(s, start, end, cfg.min_points)
    result = fit(w, cfg)
    doc = {
        "schema": "lpplkit.fit",
        "schema_version": SCHEMA_VERSION,
        "input": {
            "path": str(args.input),
            "column": args.column,
            "monthly": args.monthly,
            "window_start": decimal_year_to_date(w.start).isoformat(),
            "window_end": decimal_year_to_date(w.end).isoformat(),
        },
        "config": cfg.to_dict(),
        "result": result.to_dict(),
    }
    out = Path(args.out) if args.out else None
    emit(dump_json(doc), out)
    if out is not None:
        res_path, curve_path = sidecar(out, "residuals.csv"), sidecar(out, "curve.csv")
        write_atomic(res_path, residual_csv(result.params, w))
        write_atomic(curve_path, curve_csv(result.params, w.start, w.end))
        write_manifest(out, "fit", args.argv, cfg.to_dict(), [args.input], [out, res_path, curve_path])
    log.info("tc = %.4f (%s), sse = %.6g", result.params.tc,
             decimal_year_to_date(result.params.tc).isoformat(), result.sse)
    return 0


def cmd_scan(args) -> int:
    cfg = resolve_config(args)
    s = load_series(args, cfg)
    starts = [parse_time(x) for x in args.starts.split(",") if x.strip()]
    end = parse_time(args.end) if args.end else s.end
    result = scan_windows(s, starts, end, cfg, args.stability_threshold, args.min_successes)
    doc = {
        "schema": "lpplkit.scan",
        "schema_version": SCHEMA_VERSION,
        "input": {"path": str(args.input), "column": args.column, "monthly": args.monthly},
        "config": cfg.to_dict(),
        "result": result.to_dict(),
    }
    out = Path(args.out) if args.out else None
    emit(dump_json(doc), out)
    if out is not None:
        win_path = sidecar(out, "windows.csv")
        write_atomic(win_path, result.to_csv())
        write_manifest(out, "scan", args.argv,
                       {**cfg.to_dict(), "stability_threshold": args.stability_threshold,
                        "min_successes": args.min_successes},
                       [args.input], [out, win_path])
    for e in result.entries:
        if not e.ok:
            log.warning("window [%s, %s] failed: %s", e.start, e.end, e.error)
    return 0


def cmd_forecast(args) -> int:
    fr = fit_from_document(load_document(args.input))
    fc = crash_window(fr)
    doc = {"schema": "lpplkit.forecast", "schema_version": SCHEMA_VERSION, "forecast": fc.to_dict()}
    text = fc.summary() + "\n"
    if args.out:
        out = Path(args.out)
        txt_path = sidecar(out, "txt")
        write_atomic(out, dump_json(doc))
        write_atomic(txt_path, text)
        write_manifest(out, "forecast", args.argv, {}, [args.input], [out, txt_path])
        sys.stdout.write(text)
    else:
        sys.stdout.write(dump_json(doc))
        sys.stderr.write(text)
    return 0


def cmd_synth(args) -> int:
    spec = SynthSpec.load(args.config)
    if args.seed is not None:
        spec = SynthSpec.from_dict({**spec.to_dict(), "seed": args.seed})
    text = series_to_csv(generate(spec))
    out = Path(args.out) if args.out else None
    emit(text, out)
    if out is not None:
        write_manifest(out, "synth", args.argv, spec.to_dict(), [args.config], [out])
    return 0


def cmd_eval(args) -> int:
    doc = load_document(args.params)
    body = doc.get("result", doc)
    try:
        params = LpplParams.from_dict(body.get("linear", body))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"not a parameter document: {exc}") from exc
    start, end = parse_time(args.start), parse_time(args.end)
    if not start < end:
        raise InputError("--start must precede --end")
    if args.points < 2:
        raise ConfigError("--points must be at least 2")
    out = Path(args.out) if args.out else None
    emit(curve_csv(params, start, end, args.points), out)
    if out is not None:
        write_manifest(out, "eval", args.argv, {"start": start, "end": end, "points": args.points},
                       [args.params], [out])
    return 0


# ----------------------------------------------------------------------


def _series_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--in", dest="input", required=True, help="price CSV (Date + price column)")
    p.add_argument("--out", help="output document path (default: stdout, no side files)")
    p.add_argument("--config", help="flat JSON fit configuration")
    p.add_argument("--column", default="close", choices=["close", "adjclose"])
    p.add_argument("--scale", choices=["raw", "log"], help="override config scale")
    p.add_argument("--workers", type=int, help="threads for the grid search")
    p.add_argument("--monthly", action="store_true", help="keep only the last close of each month")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser = argparse.ArgumentParser(prog="lpplkit", description="Log-periodic power-law fitting toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit one window", parents=[common])
    _series_flags(p)
    p.add_argument("--window-start", help="ISO date or decimal year")
    p.add_argument("--window-end", help="ISO date or decimal year")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("scan", help="fit many windows sharing one end", parents=[common])
    _series_flags(p)
    p.add_argument("--starts", required=True, help="comma-separated ISO dates or decimal years")
    p.add_argument("--end", help="common window end (default: last observation)")
    p.add_argument("--stability-threshold", type=float, default=DEFAULT_STABILITY_THRESHOLD)
    p.add_argument("--min-successes", type=int, default=DEFAULT_MIN_SUCCESSES)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("forecast", help="crash window from a fit document", parents=[common])
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("synth", help="generate a synthetic series", parents=[common])
    p.add_argument("--config", required=True, help="flat JSON synth spec")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="evaluate a parameter document on a time grid", parents=[common])
    p.add_argument("--params", required=True)
    p.add_argument("--start", required=True)
    p.add_argument("--end", required=True)
    p.add_argument("--points", type=int, default=CURVE_POINTS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except LpplError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for line in getattr(exc, "diagnostics", []):
            print(f"  {line}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
