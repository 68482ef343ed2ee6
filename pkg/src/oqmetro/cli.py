"""Command-line front-end emitting figure data as CSV or JSON.

Subcommands: ``fi-sweep`` (information vs sharpness), ``advantage-map``
(theta-phi advantage grids), ``estimate`` (Monte-Carlo estimator
comparison), ``compat`` (compatibility certificate for a Bloch pair).
Output is data only; plotting is left to external tools.

Exit codes: 0 success, 2 configuration error, 3 runtime statistical
failure.  ``OQMETRO_THREADS`` caps internal parallelism.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import AllTrialsOmitted, NegativeOq, OqMetroError
from .estimation import CSV_FIELDS, TrialConfig, run_trials, summary_csv_rows
from .fisher import advantage, oqfi, qfi_pure
from .measurement import (
    build_hovm,
    bloch_povm,
    busch_compatible,
    hovm_is_povm,
    mutually_unbiased_pair,
    sequential_povm,
    sharpness_threshold,
)
from .oq import POSITIVITY_TOL, evaluate_oq
from .probe import ProbeParams, Target, make_state

SCHEMA_VERSION = "oqmetro-csv v1"


def _eval_number(token: str) -> float:
    """Parse a number, allowing 'pi' arithmetic like 'pi/2' or '7*pi/10'."""
    try:
        return float(token)
    except ValueError:
        return float(eval(token, {"__builtins__": {}}, {"pi": math.pi}))


def parse_values(spec: str) -> list:
    """A value, a comma list, or an inclusive range 'start:stop:step'."""
    if ":" in spec:
        start, stop, step = (_eval_number(t) for t in spec.split(":"))
        if step <= 0:
            raise ValueError("range step must be positive")
        vals = list(np.arange(start, stop + step / 2, step))
        return [float(min(v, stop)) for v in vals]
    return [_eval_number(t) for t in spec.split(",")]


def _target(name: str) -> Target:
    return Target.POLAR if name == "theta" else Target.AZIMUTHAL


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("OQMETRO_THREADS", "1")))
    except ValueError:
        return 1


def _map_ordered(fn, items):
    workers = _threads()
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def _write_table(path: str | None, fmt: str, name: str, header: list,
                 rows: list) -> None:
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(f"# {SCHEMA_VERSION} {name}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else _fmt(v) for v in row])
        text = buf.getvalue()
    else:
        def jsonify(v):
            if isinstance(v, (float, np.floating)):
                v = float(v)
                if math.isinf(v):
                    return "inf" if v > 0 else "-inf"
            elif isinstance(v, (bool, np.bool_)):
                v = bool(v)
            elif isinstance(v, np.integer):
                v = int(v)
            return v

        payload = {
            "schema": f"{SCHEMA_VERSION} {name}",
            "rows": [dict(zip(header, map(jsonify, row))) for row in rows],
        }
        text = json.dumps(payload, indent=1) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_fi_sweep(args) -> int:
    target = _target(args.target)
    lams = parse_values(args.lam)
    thetas = parse_values(args.theta)
    phis = parse_values(args.phi)
    tol = POSITIVITY_TOL
    rows = []
    for lam in lams:
        a, b = mutually_unbiased_pair(lam)
        w = build_hovm(a, b, sequential_povm(a, b))
        for theta in thetas:
            for phi in phis:
                params = ProbeParams(theta, phi, target)
                dist = evaluate_oq(make_state(params), w)
                q = qfi_pure(params)
                positive = dist.negativity <= tol
                if positive:
                    f = oqfi(params, w)
                    f_out = math.inf if f.diverged else f.value
                else:
                    f_out = None
                rows.append(
                    [lam, theta, phi, args.target, f_out, q,
                     dist.negativity, positive]
                )
    _write_table(args.out, args.format, "fi-sweep",
                 ["lambda", "theta", "phi", "target", "oqfi", "qfi",
                  "negativity", "positive"], rows)
    return 0


def cmd_advantage_map(args) -> int:
    target = _target(args.target)
    lam = _eval_number(args.lam)
    thetas = parse_values(args.theta)
    phis = parse_values(args.phi)
    a, b = mutually_unbiased_pair(lam)
    w = build_hovm(a, b, sequential_povm(a, b))
    tol = POSITIVITY_TOL
    rows = []
    for theta in thetas:
        for phi in phis:
            params = ProbeParams(theta, phi, target)
            dist = evaluate_oq(make_state(params), w)
            if dist.negativity > tol:
                adv = None
            else:
                try:
                    adv = advantage(params, w)
                except NegativeOq:
                    adv = None
            rows.append([theta, phi, adv, dist.negativity])
    _write_table(args.out, args.format, "advantage-map",
                 ["theta", "phi", "advantage", "negativity"], rows)
    return 0


def _segment_points(thetas: list, phis: list) -> list:
    if len(thetas) > 1 and len(phis) > 1:
        if len(thetas) != len(phis):
            raise ValueError(
                "theta and phi ranges must pair up into a segment"
            )
        return list(zip(thetas, phis))
    if len(thetas) > 1:
        return [(t, phis[0]) for t in thetas]
    return [(thetas[0], p) for p in phis]


def cmd_estimate(args) -> int:
    if args.trials < 2:
        raise ValueError("at least 2 trials are required")
    target = _target(args.target)
    lam = _eval_number(args.lam)
    points = _segment_points(parse_values(args.theta), parse_values(args.phi))
    domain = None
    if args.domain:
        lo, hi = (_eval_number(t) for t in args.domain.split(":"))
        domain = (lo, hi)
    point_seeds = np.random.SeedSequence(args.seed).generate_state(
        len(points), np.uint64
    )

    def one(point_and_seed):
        (theta0, phi0), seed = point_and_seed
        config = TrialConfig(
            theta0=theta0, phi0=phi0, target=target, sharpness=lam,
            n=args.n, trials=args.trials, seed=int(seed), domain=domain,
            inject_expected=args.inject_expected,
        )
        try:
            return run_trials(config)
        except AllTrialsOmitted as exc:
            return exc

    results = _map_ordered(one, list(zip(points, point_seeds)))
    rows = []
    failed = False
    for (theta0, phi0), result in zip(points, results):
        if isinstance(result, AllTrialsOmitted):
            print(f"point theta={theta0} phi={phi0}: {result}",
                  file=sys.stderr)
            failed = True
            continue
        for row in summary_csv_rows(result):
            rows.append(row + [_fmt(result.advantage)])
    header = CSV_FIELDS.split(",") + ["advantage"]
    _write_table(args.out, args.format, "estimate", header, rows)
    return 3 if failed else 0


def cmd_compat(args) -> int:
    mu = np.array([_eval_number(t) for t in args.mu.split(",")])
    nu = np.array([_eval_number(t) for t in args.nu.split(",")])
    busch = bool(busch_compatible(mu, nu))
    a, b = bloch_povm(mu), bloch_povm(nu)
    povm = bool(hovm_is_povm(build_hovm(a, b, sequential_povm(a, b)), 1e-10))
    assert busch == povm, "compatibility predicates disagree"
    boundary = None
    if np.linalg.norm(mu) > 0 and np.linalg.norm(nu) > 0:
        boundary = sharpness_threshold(mu, nu)
        if boundary is not None:
            boundary = float(boundary)
    verdict = {"busch": busch, "hovm_povm": povm, "boundary_lambda": boundary}
    text = json.dumps(verdict) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oqmetro",
        description="Quasiprobability metrology with incompatible qubit "
                    "measurements: Fisher-information sweeps, advantage "
                    "maps and Monte-Carlo estimation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, lam_default=None):
        p.add_argument("--target", choices=("theta", "phi"), default="theta")
        p.add_argument("--lambda", dest="lam", default=lam_default,
                       help="sharpness value or range start:stop:step")
        p.add_argument("--theta", default="pi/2",
                       help="value, comma list, or range start:stop:step")
        p.add_argument("--phi", default="0",
                       help="value, comma list, or range start:stop:step")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("fi-sweep", help="OQFI and QFI over a sharpness grid")
    common(p, lam_default="0:0.995:0.005")
    p.set_defaults(func=cmd_fi_sweep)

    p = sub.add_parser("advantage-map", help="advantage over a theta-phi grid")
    common(p, lam_default="0.995")
    p.set_defaults(func=cmd_advantage_map)

    p = sub.add_parser("estimate", help="Monte-Carlo MLE/LEP comparison")
    common(p, lam_default="0.9")
    p.add_argument("--n", type=int, default=100_000,
                   help="samples per measurement setting")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--domain", default=None,
                   help="search interval lo:hi (default 0:pi)")
    p.add_argument("--inject-expected", action="store_true",
                   help="replace sampling with exact expected counts")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("compat", help="compatibility certificate for a Bloch pair")
    p.add_argument("--mu", required=True, help="Bloch vector x,y,z")
    p.add_argument("--nu", required=True, help="Bloch vector x,y,z")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compat)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OqMetroError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
