"""Command line interface: ``sweep``, ``bench``, ``feedback-demo``, ``compute``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .bench import bench_complexity, fit_slopes
from .channel import ChannelConfig, NoiseModel, ebno_to_noise_var, effective_channel_g, sample_channels
from .filters import METHODS, design, design_from_feedback
from .scheduling import make_plan
from .sim import arithmetic_mean, compute_function, compute_function_planned, geometric_mean
from .sweep import ConfigError, build_config, load_config_file, parse_int_list, run_sweep

log = logging.getLogger("nomacomac")

FUNCTIONS = {"mean": arithmetic_mean, "geomean": geometric_mean}


def _add_sweep_flags(p):
    p.add_argument("--config", type=Path, help="flat key = value file; flags override it")
    p.add_argument("--nodes", help="comma-separated K values, e.g. 2,5,8")
    p.add_argument("--subcarriers", help="comma-separated N values")
    p.add_argument("--ebno", help="Eb/N0 grid in dB, 'start:step:stop' and/or comma list")
    p.add_argument("--methods", help=f"subset of {','.join(METHODS)} (default: all)")
    p.add_argument("--trials", help="Monte-Carlo trials per point (default 10000)")
    p.add_argument("--p0", help="per-node transmit power budget (default 1)")
    p.add_argument("--plan-m", help="nodes per subfunction M (default K)")
    p.add_argument("--plan-d", help="subcarrier groups D (default 1)")
    p.add_argument("--seed", help="master seed (default 42)")
    p.add_argument("--out", help="output directory (default results)")
    p.add_argument("--normalize-by-n", action="store_true", default=None,
                   help="report MSE per subcarrier")
    p.add_argument("--ofdm-symbols", help="OFDM symbols per trial (default 1)")
    p.add_argument("--workers", help="worker processes (results do not depend on this)")
    p.add_argument("--no-plots", action="store_true", help="skip the SVG charts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nomacomac", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="Monte-Carlo MSE sweep over (K, N, method, Eb/N0)")
    _add_sweep_flags(p)

    p = sub.add_parser("bench", help="operation-count complexity benchmark")
    p.add_argument("--nodes", default="8,32,128")
    p.add_argument("--subcarriers", type=int, default=8)
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, help="write bench.csv and bench.svg here")

    p = sub.add_parser("feedback-demo", help="run the feedback protocol and report the Z = G residual")
    p.add_argument("--nodes", type=int, default=8)
    p.add_argument("--subcarriers", type=int, default=6)
    p.add_argument("--p0", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--draws", type=int, default=1)

    p = sub.add_parser("compute", help="one-shot over-the-air nomographic computation")
    p.add_argument("--function", choices=sorted(FUNCTIONS), default="mean")
    p.add_argument("--readings", required=True, help="comma-separated per-node readings")
    p.add_argument("--subcarriers", type=int, default=1)
    p.add_argument("--method", choices=METHODS, default="a2")
    p.add_argument("--ebno", type=float, help="Eb/N0 in dB (default: noiseless)")
    p.add_argument("--p0", type=float, default=1.0)
    p.add_argument("--plan-m", type=int)
    p.add_argument("--plan-d", type=int, default=1)
    p.add_argument("--seed", type=int, default=42)
    return parser


def _cmd_sweep(args) -> int:
    values = dict(load_config_file(args.config)) if args.config else {}
    for key in ("nodes", "subcarriers", "ebno", "methods", "trials", "p0", "plan_m", "plan_d",
                "seed", "out", "normalize_by_n", "ofdm_symbols", "workers"):
        v = getattr(args, key)
        if v is not None:
            values[key] = v if isinstance(v, bool) else str(v)
    # file keys may use either spelling; normalize so flags win
    if "ebno" in values and "ebno_db" in values:
        values.pop("ebno_db")
    cfg = build_config(values)

    out = Path(cfg.out)
    csv_path = out / "results.csv"
    rows = run_sweep(cfg, csv_path)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["method", "K", "N", "ebno_db", "mse_mean", "mse_stderr", "analytic_mean"])
    for r in rows:
        writer.writerow([r.method, r.K, r.N, f"{r.ebno_db:g}", f"{r.mse_mean:.6g}",
                         f"{r.mse_stderr:.3g}", f"{r.analytic_mean:.6g}"])
    print(f"# wrote {csv_path}", file=sys.stderr)
    if not args.no_plots:
        from .plotting import emit_bar_chart, emit_chart

        print(f"# wrote {emit_chart(rows, out / 'mse_vs_ebno.svg')}", file=sys.stderr)
        bars = emit_bar_chart(rows, out / "mse_bars.svg")
        if bars is not None:
            print(f"# wrote {bars}", file=sys.stderr)
    return 0


def _cmd_bench(args) -> int:
    ks = parse_int_list(args.nodes, "nodes")
    rows = bench_complexity(ks, args.repetitions, args.subcarriers, seed=args.seed)
    header = ["method", "K", "N", "unitary_ops", "design_ops", "seconds"]
    table = [[r.method, r.K, r.N, r.unitary_ops, r.design_ops, f"{r.seconds:.3e}"] for r in rows]
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(table)
    for method, slope in fit_slopes(rows).items():
        print(f"# {method}: log-log slope of unitary_ops vs K*N = {slope:.3f}")
    for method, slope in fit_slopes(rows, "design_ops").items():
        print(f"# {method}: log-log slope of design_ops vs K*N = {slope:.3f}")
    if args.out:
        from .plotting import emit_bench_chart

        args.out.mkdir(parents=True, exist_ok=True)
        with open(args.out / "bench.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(table)
        emit_bench_chart(rows, args.out / "bench.svg")
        print(f"# wrote {args.out / 'bench.csv'} and {args.out / 'bench.svg'}", file=sys.stderr)
    return 0


def _cmd_feedback(args) -> int:
    worst_z = worst_f = 0.0
    for draw in range(args.draws):
        ch = sample_channels(ChannelConfig(args.nodes, args.subcarriers, seed=args.seed), trial=draw)
        g = effective_channel_g(ch, 0)
        fb_sol, rec = design_from_feedback(ch, 0, args.p0)
        csi_sol = design("a3", ch, 0, args.p0)
        rz = np.linalg.norm(rec.z.entries - g.entries) / np.linalg.norm(g.entries)
        rf = max(np.max(np.abs(fb_sol.a.entries - csi_sol.a.entries)),
                 max(np.max(np.abs(x.entries - y.entries)) for x, y in zip(fb_sol.b, csi_sol.b)))
        worst_z, worst_f = max(worst_z, rz), max(worst_f, rf)
    print(f"draws={args.draws} K={args.nodes} N={args.subcarriers}")
    print(f"max ||Z - G|| / ||G|| = {worst_z:.3e}")
    print(f"max |feedback filters - CSI filters| = {worst_f:.3e}")
    return 0


def _cmd_compute(args) -> int:
    readings = np.array([float(t) for t in args.readings.split(",") if t.strip()])
    K = readings.size
    if K == 0:
        raise ConfigError("readings", "must not be empty")
    spec = FUNCTIONS[args.function]()
    ch = sample_channels(ChannelConfig(K, args.subcarriers, seed=args.seed))
    noise = NoiseModel(0.0 if args.ebno is None else ebno_to_noise_var(args.ebno))
    rng = np.random.default_rng(args.seed)
    if args.plan_m is not None and args.plan_m != K:
        plan = make_plan(K, args.plan_m, args.plan_d)
        value = compute_function_planned(spec, readings, plan, ch, args.method, args.p0, noise=noise, rng=rng)
    else:
        sol = design(args.method, ch, 0, args.p0)
        value = compute_function(spec, readings, sol, ch, 0, noise, rng)
    exact = float(spec.exact(readings))
    print(f"{spec.name}: over-the-air = {value:.12g}  exact = {exact:.12g}  error = {value - exact:.3e}")
    return 0


COMMANDS = {"sweep": _cmd_sweep, "bench": _cmd_bench, "feedback-demo": _cmd_feedback, "compute": _cmd_compute}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"nomacomac {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
