"""Command-line entry point ``bernquant``.

Exit codes: 0 success, 2 validation error, 3 coefficient or sigma-delta overflow.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .bernstein import GridSamples, check_unit_point
from .config import Config, config_from_dict, parse_config
from .errors import (
    AlphabetViolation,
    CoefficientOverflow,
    ConfigError,
    DomainError,
    InfeasibleParameters,
    NetFormatError,
    PreconditionError,
    ResourceCapExceeded,
    StabilityOverflow,
)
from .qnn import load_net, save_net
from .quad import attach_sign_layer, build_bernstein_quad
from .relu import attach_sign_layer_relu, build_bernstein_relu
from .sigma_delta import ONE_BIT, SignTensor, quantize_directional
from .smoothing import SmoothnessSpec, iterated_coeffs
from .tensorio import load_tensor, save_tensor
from .verify import CSV_COLUMNS, fit_rate, run_binary_bernstein

log = logging.getLogger("bernquant")

EXIT_OK, EXIT_VALIDATION, EXIT_OVERFLOW = 0, 2, 3
_VALIDATION = (
    ConfigError,
    DomainError,
    PreconditionError,
    NetFormatError,
    AlphabetViolation,
    InfeasibleParameters,
    ResourceCapExceeded,
)


def thread_cap() -> int:
    raw = os.environ.get("BERNQUANT_THREADS")
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError([f"BERNQUANT_THREADS: expected a positive integer, got {raw!r}"]) from None


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _emit(obj):
    sys.stdout.write(_dump(obj) + "\n")


def _load_config(args) -> Config:
    cfg = parse_config(args.config) if getattr(args, "config", None) else config_from_dict({})
    over = {
        "n": getattr(args, "n", None),
        "s": getattr(args, "s", None),
        "mu": getattr(args, "mu", None),
        "activation": getattr(args, "activation", None),
        "ell": getattr(args, "ell", None),
        "grid_resolution": getattr(args, "grid", None),
        "d": getattr(args, "d", None),
        "eps": getattr(args, "eps", None),
    }
    if getattr(args, "function", None):
        over["function"] = {"name": args.function, "scale": args.scale}
    return cfg.with_overrides(**over)


def _sweep(cfg: Config):
    f = cfg.target()

    def one(n):
        log.debug("running n=%d", n)
        report, _ = run_binary_bernstein(
            f,
            n,
            cfg.s,
            cfg.mu,
            cfg.activation,
            cfg.ell,
            cfg.region,
            cfg.grid_resolution,
            cfg.eps,
            cfg.u_bound,
            output_dir=cfg.output_dir,
            cap=cfg.caps["max_outputs"],
        )
        return report

    workers = min(thread_cap(), len(cfg.n_values))
    if workers <= 1:
        return [one(n) for n in cfg.n_values]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, cfg.n_values))


def _fits(reports):
    ns = [r.n for r in reports]
    if len(ns) < 4:
        return {}
    return {
        term: fit_rate(ns, [getattr(r, term) for r in reports]).to_dict()
        for term in ("approx_sup", "quant_sup", "impl_sup", "total_sup")
    }


def _csv_text(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r.csv_row()])
    return buf.getvalue()


# ----------------------------------------------------------------------- commands
def cmd_coeffs(args):
    cfg = _load_config(args)
    if len(cfg.n_values) != 1:
        raise ConfigError(["n: coeffs needs a single n"])
    f = cfg.target()
    samples = GridSamples.from_function(f, cfg.n_values[0], cfg.d)
    a = iterated_coeffs(samples, SmoothnessSpec(cfg.s, cfg.mu, f.c2_norm))
    save_tensor(args.out, a.values)
    _emit({"n": a.n, "d": a.d, "inf_norm": a.inf_norm, "path": str(args.out)})


def cmd_quantize(args):
    a = load_tensor(args.coeffs)
    r = args.r if args.r is not None else args.s
    sigma, state = quantize_directional(a, r, args.ell, ONE_BIT, args.u_bound)
    save_tensor(args.out, sigma.values)
    _emit(
        {
            "order": r,
            "direction": args.ell,
            "max_abs_u": state.max_abs_u,
            "plus_fraction": float(np.mean(sigma.values > 0)),
            "path": str(args.out),
        }
    )


def cmd_build(args):
    if args.activation == "quad":
        net = build_bernstein_quad(args.n, args.d)
    else:
        net = build_bernstein_relu(args.n, args.d, args.eps)
    if args.signs:
        sigma = SignTensor(load_tensor(args.signs))
        attach = attach_sign_layer if args.activation == "quad" else attach_sign_layer_relu
        net = attach(net, sigma)
    save_net(net, args.out)
    s = net.size()
    _emit({"L": s.layers, "N": s.neurons, "P": s.params, "outputs": len(net.outputs), "path": str(args.out)})


def _parse_points(text: str) -> np.ndarray:
    try:
        rows = [[float(v) for v in row.split(",")] for row in text.split(";") if row.strip()]
    except ValueError as exc:
        raise ConfigError([f"points: {exc}"]) from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise ConfigError(["points: rows must be non-empty and of equal length"])
    return np.array(rows)


def cmd_eval(args):
    net = load_net(args.net)
    pts = load_tensor(args.points_file) if args.points_file else _parse_points(args.points or "")
    pts = np.atleast_2d(pts)
    check_unit_point(pts, d=net.input_arity)
    vals = net.evaluate(pts)
    _emit({"values": vals.tolist()})


def cmd_verify(args):
    cfg = _load_config(args)
    if args.out:
        cfg = cfg.with_overrides(output_dir=args.out)
    reports = _sweep(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = {"config": cfg.to_dict(), "reports": [r.to_dict() for r in reports], "fits": _fits(reports)}
    (out / "report.json").write_text(_dump(doc) + "\n")
    (out / "errors.csv").write_text(_csv_text(reports))
    summary = {"report": str(out / "report.json"), "csv": str(out / "errors.csv")}
    if doc["fits"]:
        summary["total_slope"] = doc["fits"]["total_sup"]["slope"]
    _emit(summary)


def cmd_rates(args):
    cfg = _load_config(args)
    if args.out:
        cfg = cfg.with_overrides(output_dir=args.out)
    if len(cfg.n_values) < 4:
        raise ConfigError(["n_sweep: a rate fit needs at least 4 values of n"])
    reports = _sweep(cfg)
    fits = _fits(reports)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "rates.json").write_text(_dump(fits) + "\n")
    (out / "errors.csv").write_text(_csv_text(reports))
    _emit({term: fit["slope"] for term, fit in fits.items()})


def cmd_report(args):
    try:
        doc = json.loads(Path(args.input).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError([f"input: cannot read report: {exc}"]) from None
    cfg = doc.get("config", {})
    lines = [
        f"function {cfg.get('function')}  d={cfg.get('d')}  s={cfg.get('s')}  mu={cfg.get('mu')}  "
        f"activation={cfg.get('activation')}  direction={cfg.get('ell')}  region={cfg.get('region')}",
        f"{'n':>6} {'approx':>11} {'quant':>11} {'impl':>11} {'total':>11} {'max|u|':>8} {'L':>6} {'N':>9} {'P':>9}",
    ]
    for r in doc.get("reports", []):
        size = r.get("net_size") or {"L": 0, "N": 0, "P": 0}
        lines.append(
            f"{r['n']:>6} {r['approx_sup']:>11.4e} {r['quant_sup']:>11.4e} {r['impl_sup']:>11.4e} "
            f"{r['total_sup']:>11.4e} {r['max_abs_u']:>8.3f} {size['L']:>6} {size['N']:>9} {size['P']:>9}"
        )
    for term, fit in sorted(doc.get("fits", {}).items()):
        flag = "  (saturated points excluded)" if fit.get("saturated") else ""
        lines.append(f"slope[{term}] = {fit['slope']:.4f}  r2 = {fit['r2']:.4f}{flag}")
    sys.stdout.write("\n".join(lines) + "\n")


# ------------------------------------------------------------------------ parser
def _add_run_flags(p, with_out_dir=True):
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--function", help="built-in function name (overrides config)")
    p.add_argument("--scale", type=float, default=0.4, help="built-in function scale")
    p.add_argument("--d", type=int, help="input dimension")
    p.add_argument("--n", type=int, help="polynomial degree")
    p.add_argument("--s", type=int, help="smoothness order")
    p.add_argument("--mu", type=float, help="bound on ||f||_inf, in (0, 1)")
    p.add_argument("--activation", choices=("quad", "relu"))
    p.add_argument("--ell", type=int, help="sigma-delta direction (1-based)")
    p.add_argument("--grid", type=int, help="grid points per axis")
    p.add_argument("--eps", type=float, help="ReLU implementation accuracy")
    if with_out_dir:
        p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bernquant", description="One-bit Bernstein network toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="grid samples -> coefficient tensor")
    _add_run_flags(p, with_out_dir=False)
    p.add_argument("--out", required=True, help="coefficient tensor file")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("quantize", help="coefficient tensor -> sign tensor")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--r", type=int, help="sigma-delta order (defaults to --s)")
    p.add_argument("--s", type=int, default=2)
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--u-bound", type=float, default=50.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("build", help="build a Bernstein network (.qnn)")
    p.add_argument("--activation", choices=("quad", "relu"), default="quad")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--signs", help="sign tensor file for the one-bit output layer")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("eval", help="evaluate a network at points")
    p.add_argument("--net", required=True)
    p.add_argument("--points", help="points as 'x1,x2;x1,x2;...'")
    p.add_argument("--points-file", help="tensor file of shape (P, d)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="full pipeline with error report and CSV table")
    _add_run_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rates", help="n-sweep with slope fits")
    _add_run_flags(p)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("report", help="human-readable summary of a report JSON")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except (CoefficientOverflow, StabilityOverflow) as exc:
        sys.stderr.write(f"overflow: {exc}\n")
        return EXIT_OVERFLOW
    except _VALIDATION as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
