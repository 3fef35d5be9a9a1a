"""Command-line entry point: region thresholds, fidelity-vs-n sweeps, single evaluations and verification.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 resource cap.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import oracle
from .errors import InputError, ResourceError
from .feedback import (
    MeasurementPartition,
    RecoveryStrategy,
    classify_region,
    corrected_fidelity,
    optimize_mixture,
    optimize_recovery,
    region_strategy,
    theoretical_fidelity,
    thresholds,
)
from .noise import DEFAULT_ENUM_CAP, DepolarizingParams, NoiseModel, convex_mixture
from .verification import run_verification

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_RESOURCE = 0, 1, 2, 3

REGIONS_HEADER = ["n", "p", "mu_AB", "mu_BC"]
SWEEP_HEADER = ["n", "mu", "F_theoretical", "F_optimized", "F_oracle", "region"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def fmt(x) -> str:
    """Shortest round-trip text of ``x`` after rounding to 12 significant digits."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    value = float(f"{float(x):.12g}")
    if value == 0:
        value = 0.0
    return repr(value)


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def regions_rows(ns, p_steps: int) -> list[list]:
    if p_steps < 1:
        raise InputError("--p-steps must be positive")
    if not ns or min(ns) < 2:
        raise InputError("region thresholds need n >= 2")
    rows = []
    for n in ns:
        for p in np.linspace(0.0, 1.0, p_steps):
            mu_ab, mu_bc = thresholds(float(p), n)
            rows.append([n, float(p), mu_ab, mu_bc])
    return rows


def sweep_rows(p: float, mus, n_max: int, oracle_cap: int, enum_cap: int = DEFAULT_ENUM_CAP) -> list[list]:
    if n_max < 2:
        raise InputError("--n-max must be at least 2")
    if not mus:
        raise InputError("--mu needs at least one value")
    rows = []
    for mu in mus:
        for n in range(2, n_max + 1):
            params = DepolarizingParams(p, mu, n)
            theory = theoretical_fidelity(params)
            best = optimize_mixture(params)
            f_oracle = None
            if n <= min(oracle_cap, enum_cap):
                model = convex_mixture(params, enum_cap)
                kraus = oracle.corrected_kraus(
                    oracle.selected_outputs(model, MeasurementPartition(n)), best.strategy
                )
                f_oracle = oracle.entanglement_fidelity_dense(kraus, oracle_cap)
            rows.append([n, mu, theory.total, best.total, f_oracle, str(theory.region)])
    return rows


def _emit(rows, header, args) -> str:
    if args.format == "json":
        text = json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for r in rows:
            writer.writerow([fmt(v) for v in r])
        text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return text


def svg_plot(series: dict[str, list[tuple[float, float]]], xlabel: str, ylabel: str,
             width: int = 480, height: int = 360) -> str:
    """Bare-bones SVG line plot, one polyline per series."""
    pad = 48
    pts = [pt for line in series.values() for pt in line]
    xs = [x for x, _ in pts] or [0.0, 1.0]
    ys = [y for _, y in pts] or [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(0.0, min(ys)), max(1.0, max(ys))
    x1 = x1 if x1 > x0 else x0 + 1
    sx = lambda x: pad + (x - x0) / (x1 - x0) * (width - 2 * pad)
    sy = lambda y: height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
        'fill="none" stroke="black"/>',
        f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle">{xlabel}</text>',
        f'<text x="14" y="{height / 2}" transform="rotate(-90 14 {height / 2})" '
        f'text-anchor="middle">{ylabel}</text>',
    ]
    for i, (name, line) in enumerate(series.items()):
        if not line:
            continue
        color = colors[i % len(colors)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in line)
        parts.append(f'<polyline fill="none" stroke="{color}" points="{coords}"/>')
        parts.append(f'<text x="{width - pad + 4}" y="{pad + 14 * (i + 1)}" fill="{color}" '
                     f'font-size="10">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_regions(args) -> int:
    rows = regions_rows(args.n or [2, 3, 4, 5], args.p_steps)
    _emit(rows, REGIONS_HEADER, args)
    if args.svg:
        series = {}
        for n, p, ab, bc in rows:
            series.setdefault(f"n={n}", [])
            mu = ab if ab is not None else bc
            series[f"n={n}"].append((p, mu))
        Path(args.svg).write_text(svg_plot(series, "p", "threshold mu"))
    return EXIT_OK


def cmd_sweep_n(args) -> int:
    mus = args.mu if args.mu is not None else [0.9, 0.7, 0.5]
    p = 0.4 if args.p is None else args.p
    rows = sweep_rows(p, mus, args.n_max, args.oracle_cap, args.enum_cap)
    _emit(rows, SWEEP_HEADER, args)
    if args.svg:
        series = {}
        for n, mu, ft, *_ in rows:
            series.setdefault(f"mu={fmt(mu)}", []).append((n, ft))
        Path(args.svg).write_text(svg_plot(series, "n", "entanglement fidelity"))
    return EXIT_OK


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def cmd_fidelity(args) -> int:
    if args.noise_file:
        model = NoiseModel.from_json(_load_json(args.noise_file))
        params = None
        n = model.n
    else:
        if args.p is None or args.mu is None or args.n is None:
            raise UsageError("fidelity needs --p, --mu and --n (or --noise-file)")
        (n,) = args.n
        params = DepolarizingParams(args.p, args.mu[0], n)
        model = convex_mixture(params, args.enum_cap) if n <= args.enum_cap else None
    if args.dump_noise:
        if model is None:
            raise ResourceError(f"cannot tabulate 4**{n} strings above the enumeration cap")
        Path(args.dump_noise).write_text(json.dumps(model.to_json(), indent=2) + "\n")

    partition = MeasurementPartition(n)
    selector = args.strategy
    if selector == "optimal":
        report = optimize_recovery(model, partition, args.enum_cap) if model else optimize_mixture(params)
    else:
        if model is None:
            raise ResourceError(f"n={n} exceeds the enumeration cap; only 'optimal' is available")
        if selector.startswith("file:"):
            strategy = RecoveryStrategy.from_json(_load_json(selector[5:]))
        elif selector.upper() in ("A", "B", "C"):
            strategy = region_strategy(selector, n)
        else:
            raise UsageError(f"unknown strategy selector {selector!r}")
        report = corrected_fidelity(model, partition, strategy)

    out = report.to_json()
    if params is not None and n >= 2:
        label, mu_ab, mu_bc = classify_region(params)
        out["region"] = str(label)
        out["thresholds"] = {"mu_AB": mu_ab, "mu_BC": mu_bc}
    text = json.dumps(out, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    (n,) = args.n or [2]
    report = run_verification(args.seed, args.trials, n, args.oracle_cap)
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_VERIFY if report["failures"] else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pauli-feedback", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--enum-cap", type=int, default=DEFAULT_ENUM_CAP,
                       help="largest n for which 4**n strings are enumerated")
        p.add_argument("--oracle-cap", type=int, default=oracle.DEFAULT_DENSE_CAP,
                       help="largest n for the dense oracle")

    p = sub.add_parser("regions", help="thresholds mu_AB, mu_BC over a p grid")
    common(p)
    p.add_argument("--n", type=_int_list, help="comma-separated qubit counts (default 2,3,4,5)")
    p.add_argument("--p-steps", type=int, default=401)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("sweep-n", help="optimal fidelity versus n")
    common(p)
    p.add_argument("--p", type=float)
    p.add_argument("--mu", type=_float_list, help="comma-separated correlations (default 0.9,0.7,0.5)")
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_sweep_n)

    p = sub.add_parser("fidelity", help="fidelity report for one strategy")
    common(p)
    p.add_argument("--p", type=float)
    p.add_argument("--mu", type=_float_list)
    p.add_argument("--n", type=_int_list)
    p.add_argument("--strategy", default="optimal", help="A, B, C, optimal or file:<path>")
    p.add_argument("--noise-file", help="JSON noise table to use instead of the mixture model")
    p.add_argument("--dump-noise", help="write the noise table used as JSON")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("verify", help="cross-check against the dense oracle")
    common(p)
    p.add_argument("--n", type=_int_list)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=25)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command in ("fidelity", "verify") and args.n is not None and len(args.n) != 1:
            raise UsageError("--n takes a single value for this command")
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
