"""Command line entry point: ``botnet-rgg <subcommand> ...``.

Exit status is 0 on success, 2 for invalid input and 3 for parameters that
admit no model (connection radius above 1/2).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from botnet_rgg.detection import (
    DEFAULT_EXACT_CAP,
    CalibrationTable,
    average_distance_test,
    calibrate,
    isolated_star_test,
)
from botnet_rgg.estimation import DEFAULT_D_MAX, estimate_parameters
from botnet_rgg.geometry import RadiusTooLargeError
from botnet_rgg.graph import Graph, read_edge_list, write_edge_list
from botnet_rgg.harness.config import ExperimentConfig
from botnet_rgg.harness.experiments import (
    CALIBRATION_HEADER,
    calibration_rows,
    feasible_grid,
    run_histogram,
    run_null_calibration_audit,
    run_power_sweep,
    run_risk_sweep,
    run_theorem1_probe,
    to_csv,
)
from botnet_rgg.identification import identify_botnet
from botnet_rgg.samplers import ModelParams, derive_rng, sample, write_botnet, write_locations

log = logging.getLogger("botnet_rgg")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3


class UsageError(ValueError):
    pass


class Infeasible(ValueError):
    pass


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="\n")


def _emit(text: str, path: str | None) -> None:
    out = _open_out(path)
    try:
        out.write(text)
        if not text.endswith("\n"):
            out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()


def _load_graph(path: str) -> Graph:
    with open(path, "rb") as fh:
        return read_edge_list(fh)


def _params_from_args(args, k: int = 0) -> ModelParams:
    return ModelParams.from_density(args.n, args.d, k=k, p=args.p, r=args.r, avg_degree=args.np)


def _add_density(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--np", type=float, help="expected degree n*p")
    g.add_argument("--p", type=float, help="edge probability")
    g.add_argument("--r", type=float, help="connection radius")


# ----------------------------------------------------------------- commands


def cmd_generate(args) -> int:
    params = _params_from_args(args, args.k)
    s = sample(params, derive_rng(args.seed, "generate"))
    out = _open_out(args.out)
    try:
        write_edge_list(s.graph, out)
    finally:
        if out is not sys.stdout:
            out.close()
    if args.locations:
        with open(args.locations, "w", encoding="utf-8", newline="\n") as fh:
            write_locations(s.locations, fh)
    if args.botnet:
        with open(args.botnet, "w", encoding="utf-8", newline="\n") as fh:
            write_botnet(s.botnet, fh)
    return EXIT_OK


def _load_calibrations(paths: Sequence[str]) -> dict[str, CalibrationTable]:
    tables: dict[str, CalibrationTable] = {}
    for path in paths:
        obj = json.loads(Path(path).read_text("utf-8"))
        items = [obj] if "stat" in obj else list(obj.values())
        for item in items:
            t = CalibrationTable.from_dict(item)
            tables[t.stat] = t
    return tables


def cmd_detect(args) -> int:
    g = _load_graph(args.graph)
    d, r = args.d, args.r
    result: dict = {}
    if args.estimate_params:
        report = estimate_parameters(g, args.d_max)
        result["estimated"] = report.to_dict()
        d = report.d_hat if d is None else d
        r = report.r_hat if r is None else r
    if d is None:
        raise UsageError("--d is required unless --estimate-params is given")
    tables = _load_calibrations(args.calibration or [])
    tests = ("star", "distance") if args.test == "both" else (args.test,)
    if "star" in tests:
        table = tables.get("max_star")
        if table is not None:
            method = table.star_method or args.star_method
            v = isolated_star_test(g, d, method=method, cap=args.cap, threshold=table.threshold(args.alpha))
            v.notes["alpha"] = args.alpha
        else:
            v = isolated_star_test(g, d, method=args.star_method, cap=args.cap)
        result["star"] = v.to_dict()
    if "distance" in tests:
        table = tables.get("avg_distance")
        rng = derive_rng(args.seed, "detect:pairs") if args.sample_pairs else None
        if table is not None:
            v = average_distance_test(
                g, d, threshold=table.threshold(args.alpha), sample_pairs=args.sample_pairs, rng=rng
            )
            v.notes["alpha"] = args.alpha
        elif r is None:
            raise UsageError("the distance test needs --r, --estimate-params or a calibration file")
        else:
            v = average_distance_test(g, d, r, args.epsilon, sample_pairs=args.sample_pairs, rng=rng)
        result["distance"] = v.to_dict()
    _emit(json.dumps(result, indent=2), args.out)
    return EXIT_OK


def cmd_estimate(args) -> int:
    g = _load_graph(args.graph)
    _emit(estimate_parameters(g, args.d_max).to_json(), args.out)
    return EXIT_OK


def cmd_identify(args) -> int:
    g = _load_graph(args.graph)
    notes = {}
    d, p = args.d, args.p
    if d is None or p is None:
        report = estimate_parameters(g, args.d_max)
        if d is None:
            d = report.d_hat
            notes["d_source"] = "estimated"
        if p is None:
            p = report.p_hat
            notes["p_source"] = "estimated"
            log.info("using estimated edge probability %.6g", p)
    est = identify_botnet(g, d, args.k, p, args.epsilon, method=args.star_method, cap=args.cap)
    out = est.to_dict()
    out.update(d=int(d), p=float(p), k=args.k, **notes)
    _emit(json.dumps(out, indent=2), args.out)
    if args.suspects:
        with open(args.suspects, "w", encoding="utf-8", newline="\n") as fh:
            write_botnet(est.suspects, fh)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    params = _params_from_args(args)
    stats = ("max_star", "avg_distance") if args.stat == "both" else (args.stat,)
    tables = calibrate(
        params, args.replicates, args.alpha or [0.05], args.seed,
        stats=stats, star_method=args.star_method, cap=args.cap,
    )
    if len(stats) == 1:
        text = tables[stats[0]].to_json()
    else:
        text = json.dumps({s: t.to_dict() for s, t in tables.items()}, indent=2)
    _emit(text, args.out)
    return EXIT_OK


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.load(args.config)
    if args.workers is not None:
        config.workers = args.workers
    if not feasible_grid(config, warn=False):
        raise Infeasible("no grid point has a connection radius of at most 1/2")
    return config


def cmd_power(args) -> int:
    _emit(to_csv(run_power_sweep(_load_config(args))), args.out)
    return EXIT_OK


def cmd_audit(args) -> int:
    config = _load_config(args)
    _emit(to_csv(run_null_calibration_audit(config, use_true_params=args.true_params)), args.out)
    return EXIT_OK


def cmd_risk(args) -> int:
    _emit(to_csv(run_risk_sweep(_load_config(args))), args.out)
    return EXIT_OK


def cmd_histogram(args) -> int:
    _emit(to_csv(run_histogram(_load_config(args)).rows), args.out)
    return EXIT_OK


def cmd_calibrate_grid(args) -> int:
    from botnet_rgg.harness.experiments import run_calibration

    _emit(to_csv(calibration_rows(run_calibration(_load_config(args))), CALIBRATION_HEADER), args.out)
    return EXIT_OK


def cmd_probe(args) -> int:
    res = run_theorem1_probe(args.n, args.np, args.k, args.replicates, args.seed, d=args.d)
    _emit(to_csv([res]), args.out)
    return EXIT_OK


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="botnet-rgg", description="Botnet detection in random geometric graphs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def star_opts(sp, default="auto"):
        sp.add_argument("--star-method", choices=("auto", "exact", "greedy"), default=default)
        sp.add_argument("--cap", type=int, default=DEFAULT_EXACT_CAP, help="largest neighbourhood solved exactly")

    sp = sub.add_parser("generate", help="sample a graph")
    _add_density(sp)
    sp.add_argument("--k", type=int, default=0, help="botnet size (0 samples the null model)")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", default="-", help="edge list path ('-' for stdout)")
    sp.add_argument("--locations", help="write vertex locations here")
    sp.add_argument("--botnet", help="write botnet vertex ids here")
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("detect", help="run the isolated-star and/or average-distance tests")
    sp.add_argument("graph")
    sp.add_argument("--test", choices=("star", "distance", "both"), default="both")
    sp.add_argument("--d", type=int)
    sp.add_argument("--r", type=float)
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--calibration", action="append", help="calibration JSON (repeatable)")
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--estimate-params", action="store_true", help="fill in missing d and r from the graph")
    sp.add_argument("--d-max", type=int, default=DEFAULT_D_MAX)
    sp.add_argument("--sample-pairs", type=int, help="estimate the average distance from this many pairs")
    sp.add_argument("--seed", type=int, default=0, help="seed for pair sampling")
    sp.add_argument("--out", default="-")
    star_opts(sp)
    sp.set_defaults(func=cmd_detect)

    sp = sub.add_parser("estimate", help="estimate d, p and r from a graph")
    sp.add_argument("graph")
    sp.add_argument("--d-max", type=int, default=DEFAULT_D_MAX)
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("identify", help="list suspected botnet vertices")
    sp.add_argument("graph")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--p", type=float, help="edge probability (estimated when omitted)")
    sp.add_argument("--d", type=int, help="dimension (estimated when omitted)")
    sp.add_argument("--d-max", type=int, default=DEFAULT_D_MAX)
    sp.add_argument("--suspects", help="write suspect ids here")
    sp.add_argument("--out", default="-")
    star_opts(sp)
    sp.set_defaults(func=cmd_identify)

    sp = sub.add_parser("calibrate", help="Monte Carlo null thresholds for one parameter set")
    _add_density(sp)
    sp.add_argument("--stat", choices=("max_star", "avg_distance", "both"), default="both")
    sp.add_argument("--alpha", type=float, action="append")
    sp.add_argument("--replicates", type=int, default=1000)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", default="-")
    star_opts(sp, default="greedy")
    sp.set_defaults(func=cmd_calibrate)

    for name, func, help_ in (
        ("power", cmd_power, "power sweep over a config grid"),
        ("audit", cmd_audit, "type-1 error audit (k = 0) over a config grid"),
        ("risk", cmd_risk, "identification risk sweep"),
        ("histogram", cmd_histogram, "binned null and alternative statistics"),
        ("calibrate-grid", cmd_calibrate_grid, "calibration thresholds over a config grid"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default="-")
        sp.add_argument("--workers", type=int, help="worker processes (default: $BOTNET_RGG_WORKERS or 1)")
        if name == "audit":
            sp.add_argument("--true-params", action="store_true", help="analytic thresholds from the true d and r")
        sp.set_defaults(func=func)

    sp = sub.add_parser("probe", help="frequency with which every botnet vertex is isolated")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--np", type=float, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--replicates", type=int, default=1000)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_probe)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (RadiusTooLargeError, Infeasible) as exc:
        print(f"infeasible parameters: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, OSError, KeyError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
