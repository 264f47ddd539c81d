"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 insufficient data,
4 optimizer non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import replace
from pathlib import Path

import yaml

from . import curves
from .errors import ConfigError, InsufficientData, NonConvergence, NotUnimodal
from .estimation import ClickLedger, detect_pns, transmittivity_ratio
from .hom import HomParams, calibrate, noisy_calibrate
from .mu import mu_curve
from .report import dump_json, emit_report, format_float
from .rng import make_stream
from .session import SessionConfig, run_session, throughput

log = logging.getLogger("fockdecoy")

EXIT_OK, EXIT_CONFIG, EXIT_INSUFFICIENT, EXIT_NONCONVERGENCE = 0, 2, 3, 4


def load_config(path) -> SessionConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    return SessionConfig.from_mapping(data or {})


def _config(args) -> SessionConfig:
    cfg = load_config(args.config) if args.config else SessionConfig()
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _write(text: str, out) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format_float(r[h]) if isinstance(r[h], float) else r[h] for h in header])
    return buf.getvalue()


def cmd_simulate(args) -> int:
    cfg = _config(args)
    report = run_session(cfg, workers=args.workers)
    _write(emit_report(report, args.format), args.out)
    if report.insufficient_data:
        log.warning("not enough decoy pulses on tags 1 and 2 for a verdict")
        return EXIT_INSUFFICIENT
    return EXIT_OK


def cmd_detect(args) -> int:
    cfg = _config(args)
    overrides = {k: getattr(args, k) for k in ("lambda_sq", "eta_a", "eta_b", "dark_prob", "alpha")}
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    try:
        ledger = ClickLedger.from_csv(Path(args.ledger).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read ledger {args.ledger}: {exc}") from exc
    v = detect_pns(ledger, cfg.src, cfg.spd, cfg.alpha)
    lo, point, hi = transmittivity_ratio(v)
    e1, e2 = v.estimates
    row = {
        "attack_detected": v.attack_detected,
        "alpha": v.alpha,
        "eta1": e1.eta,
        "eta1_low": e1.eta_low,
        "eta1_high": e1.eta_high,
        "eta2": e2.eta,
        "eta2_low": e2.eta_low,
        "eta2_high": e2.eta_high,
        "ratio": point,
        "ratio_low": lo,
        "ratio_high": hi,
    }
    if args.format == "json":
        text = dump_json(row) + "\n"
    else:
        row["attack_detected"] = "true" if v.attack_detected else "false"
        text = _csv([row], list(row))
    _write(text, args.out)
    return EXIT_OK


def _grid(args):
    if args.grid:
        return [float(x) for x in args.grid.split(",") if x.strip()]
    n = args.points
    if args.family == "loss":
        return [(i + 1) / n for i in range(n)]
    return [i / (n - 1) for i in range(n)] if n > 1 else [1.0]


def cmd_optimize_mu(args) -> int:
    rows = [
        {"param": x, "mu_star": o.mu_star, "D_star": o.d_star, "flag": o.flag}
        for x, o in mu_curve(args.family, _grid(args), kappa_m=args.kappa_m)
    ]
    header = ["param", "mu_star", "D_star", "flag"]
    _write(dump_json(rows) + "\n" if args.format == "json" else _csv(rows, header), args.out)
    if args.figure:
        from .plotting import plot_mu_curve

        label = r"channel efficiency $\eta_c$" if args.family == "loss" else r"$\kappa_1/\kappa_m$"
        plot_mu_curve(rows, args.figure, label)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    p = HomParams(args.sigma1, args.sigma2, args.omega1, args.omega2, args.t)
    adjustable = [a.strip() for a in args.adjust.split(",") if a.strip()]
    trace: list = []
    if args.counts:
        rng = make_stream(args.seed if args.seed is not None else 0, "hom")
        noisy_calibrate(p, args.counts, rng, adjustable, gamma=args.gamma, trace=trace)
    else:
        calibrate(p, adjustable, gamma=args.gamma, trace=trace)
    rows = [dict(zip(("iteration", "t", "sigma1", "visibility"), r)) for r in trace]
    for r in rows:
        r["t"], r["sigma1"], r["visibility"] = float(r["t"]), float(r["sigma1"]), float(r["visibility"])
    _write(_csv(rows, ["iteration", "t", "sigma1", "visibility"]), args.out)
    return EXIT_OK


def cmd_curves(args) -> int:
    out = Path(args.out or "curves")
    out.mkdir(parents=True, exist_ok=True)
    tables = {
        "conditional_photon_number": (curves.fock_panels(), ["panel", "eta_a", "lambda_abs", "k", "n", "probability"]),
        "hom_visibility": (curves.visibility_curve(), ["s", "visibility"]),
        "mu_vs_loss": (curves.loss_mu_curve(args.points), ["param", "mu_star", "D_star", "flag"]),
        "mu_vs_attack_ratio": (curves.pns_mu_curve(args.points + 1), ["param", "mu_star", "D_star", "flag"]),
        "mu_small_loss_limit": (curves.small_loss_limit(), ["quantity", "value"]),
    }
    for name, (rows, header) in tables.items():
        (out / f"{name}.csv").write_text(_csv(rows, header))
    if not args.no_figures:
        from . import plotting

        plotting.plot_fock_panels(tables["conditional_photon_number"][0], out / "conditional_photon_number.png")
        plotting.plot_visibility(tables["hom_visibility"][0], out / "hom_visibility.png")
        plotting.plot_mu_curve(
            tables["mu_vs_loss"][0], out / "mu_vs_loss.png", r"channel efficiency $\eta_c$",
            reference=curves.REFERENCE_SMALL_LOSS_BOUND,
        )
        plotting.plot_mu_curve(tables["mu_vs_attack_ratio"][0], out / "mu_vs_attack_ratio.png", r"$\kappa_1/\kappa_m$")
    for row in tables["mu_small_loss_limit"][0]:
        log.info("%s = %.7f", row["quantity"], row["value"])
    return EXIT_OK


def cmd_throughput(args) -> int:
    tp = throughput(_config(args))
    _write(dump_json(tp.__dict__) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat YAML file with SessionConfig keys")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--out", help="output path (stdout if omitted)")

    ap = argparse.ArgumentParser(prog="fockdecoy", description="Decoy number-state QKD simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="run a Monte Carlo QKD session")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_simulate, format_default="json")

    s = sub.add_parser("detect", parents=[common], help="PNS-attack verdict from a ledger CSV")
    s.add_argument("--ledger", required=True, help="CSV with header tag,sent,clicked")
    s.add_argument("--lambda-sq", dest="lambda_sq", type=float)
    s.add_argument("--eta-a", dest="eta_a", type=float)
    s.add_argument("--eta-b", dest="eta_b", type=float)
    s.add_argument("--dark-prob", dest="dark_prob", type=float)
    s.add_argument("--alpha", type=float)
    s.set_defaults(func=cmd_detect, format_default="json")

    s = sub.add_parser("optimize-mu", parents=[common], help="optimal WCP mean photon number")
    s.add_argument("--family", choices=("loss", "pns"), default="loss")
    s.add_argument("--grid", help="comma-separated eta_c (loss) or kappa_1/kappa_m (pns) values")
    s.add_argument("--points", type=int, default=100)
    s.add_argument("--kappa-m", dest="kappa_m", type=float, default=1.0)
    s.add_argument("--figure", help="also render the curve to this image file")
    s.set_defaults(func=cmd_optimize_mu, format_default="csv")

    s = sub.add_parser("calibrate", parents=[common], help="HOM delay/bandwidth calibration trace")
    s.add_argument("--sigma1", type=float, default=3.0)
    s.add_argument("--sigma2", type=float, default=1.0)
    s.add_argument("--omega1", type=float, default=0.0)
    s.add_argument("--omega2", type=float, default=0.0)
    s.add_argument("--t", type=float, default=5.0)
    s.add_argument("--adjust", default="t,sigma1")
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--counts", type=int, help="coincidence trials per point (noisy calibration)")
    s.set_defaults(func=cmd_calibrate, format_default="csv")

    s = sub.add_parser("curves", parents=[common], help="write figure tables (CSV) and plots (PNG)")
    s.add_argument("--points", type=int, default=100)
    s.add_argument("--no-figures", action="store_true")
    s.set_defaults(func=cmd_curves, format_default="csv")

    s = sub.add_parser("throughput", parents=[common], help="dead-time limited clock rates")
    s.set_defaults(func=cmd_throughput, format_default="json")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.format is None:
        args.format = args.format_default
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except InsufficientData as exc:
        log.error("insufficient data: %s", exc)
        return EXIT_INSUFFICIENT
    except (NonConvergence, NotUnimodal) as exc:
        log.error("no convergence: %s", exc)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
