"""Command-line front end.

Every command prints a plain ``key: value`` report followed by fixed-width
tables. Output depends only on the flags, so identical invocations produce
identical bytes; wall time goes to stderr.

Exit codes: 0 positive / consistent, 1 negative / not found, 2 error.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from . import __version__
from .dynamics import (
    DEFAULT_MAX_STEPS,
    DEFAULT_STEP,
    DEFAULT_TOL,
    ModelParams,
    energy,
    integrate_to_convergence,
    kuramoto_rhs,
    mean_frequency,
)
from .fixedpoint import DEFAULT_RESIDUAL_TOL, classify, multistart_search, residual
from .gadgets import (
    DEFAULT_FACTOR,
    InvalidWitnessError,
    build_clique_blowup,
    build_unweighted_gadget,
    build_weighted_gadget,
    unweighted_gadget_fixed_point,
    verify_reduction,
    weighted_gadget_fixed_point,
)
from .graph import (
    TWO_PI,
    FormatError,
    descriptor_comments,
    parse_graph,
    parse_state,
    serialize_graph,
    serialize_state,
)
from .partition import (
    Status,
    kuramoto_partition_feasible,
    solve_partition_dp,
    surd_partition,
)
from .stability import DEFAULT_STABILITY_TOL, cut_check, edge_angle_check, stability_verdict

OMEGA_HEADER = "kuramoto-omega v1"

EXIT_POSITIVE, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


def fmt(x: float) -> str:
    return f"{x:.12g}"


def int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from None


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}") from None


class Report:
    def __init__(self, out: TextIO):
        self.out = out

    def kv(self, key: str, value) -> None:
        if isinstance(value, bool):
            value = str(value).lower()
        elif isinstance(value, float):
            value = fmt(value)
        self.out.write(f"{key}: {value}\n")

    def table(self, header: Sequence[str], rows: Sequence[Sequence]) -> None:
        cells = [[c if isinstance(c, str) else fmt(c) if isinstance(c, float) else str(c) for c in r] for r in rows]
        widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(header)]
        self.out.write("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip() + "\n")
        for r in cells:
            self.out.write("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")

    def state(self, theta, roles: Sequence[str] | None = None) -> None:
        rows = []
        for i, x in enumerate(np.asarray(theta)):
            row = [i, fmt(float(x))]
            if roles is not None:
                row.append(roles[i])
            rows.append(row)
        self.table(["node", "angle", "role"] if roles is not None else ["node", "angle"], rows)


def _load_graph(args):
    return parse_graph(_read(args.graph))


def _load_params(args, n: int) -> ModelParams:
    if getattr(args, "omega", None):
        omega = parse_state(_read(args.omega), header=OMEGA_HEADER, normalize=False)
        if len(omega) != n:
            raise CliError(f"omega file has {len(omega)} entries, graph has {n} nodes")
    else:
        omega = np.zeros(n)
    return ModelParams(omega, args.k)


def _subset_text(subset) -> str:
    return ",".join(str(i) for i in subset) if subset else "-"


# ------------------------------------------------------------------ commands

def cmd_simulate(args, rep: Report) -> int:
    g = _load_graph(args)
    p = _load_params(args, g.n)
    if args.state:
        s0 = parse_state(_read(args.state))
        if len(s0) != g.n:
            raise CliError(f"state has {len(s0)} angles, graph has {g.n} nodes")
        start = f"file {args.state}"
    else:
        s0 = np.random.default_rng(args.seed).uniform(0.0, TWO_PI, g.n)
        start = f"uniform random (seed {args.seed})"

    rep.kv("command", "simulate")
    rep.kv("graph", args.graph)
    rep.kv("n", g.n)
    rep.kv("m", g.m)
    rep.kv("start", start)
    rep.kv("seed", args.seed)
    rep.kv("k", float(p.k))
    rep.kv("mean_frequency", mean_frequency(p))
    rep.kv("h", args.h)
    rep.kv("tol", args.tol)
    rep.kv("max_steps", args.steps)

    trace_rows = []
    wbar = mean_frequency(p)

    def on_step(step, theta, rhs):
        if args.trace and step % args.trace_every == 0:
            trace_rows.append([step, energy(g, theta), float(np.max(np.abs(rhs - wbar)))])

    traj = integrate_to_convergence(g, s0, p, args.h, args.tol, args.steps, on_step=on_step)
    rhs = kuramoto_rhs(g, traj.state, p)
    rep.kv("converged", traj.converged)
    rep.kv("steps", traj.steps)
    rep.kv("energy", energy(g, traj.state))
    rep.kv("frequency_spread", float(np.max(np.abs(rhs - wbar))))
    rep.kv("classification", classify(traj.state))
    if args.trace:
        rep.out.write("trace:\n")
        rep.table(["step", "energy", "frequency_spread"], trace_rows)
    rep.out.write("state:\n")
    rep.state(traj.state.theta)
    if args.out:
        _write(args.out, serialize_state(traj.state))
        rep.kv("written", args.out)
    return EXIT_POSITIVE if traj.converged else EXIT_NEGATIVE


def cmd_fixed_points(args, rep: Report) -> int:
    g = _load_graph(args)
    p = _load_params(args, g.n)
    result = multistart_search(g, p, args.samples, args.seed, args.tol)
    rep.kv("command", "fixed-points")
    rep.kv("graph", args.graph)
    rep.kv("n", g.n)
    rep.kv("m", g.m)
    rep.kv("seed", args.seed)
    rep.kv("samples", args.samples)
    rep.kv("tol", args.tol)
    rep.kv("k", float(p.k))
    rep.kv("dropped_flow", result.dropped_flow)
    rep.kv("dropped_newton", result.dropped_newton)
    rep.kv("distinct", len(result))
    nonzero_stable = sum(1 for r in result if r.is_nonzero_stable)
    rep.kv("nonzero_stable", nonzero_stable)
    rows = []
    for i, r in enumerate(result):
        head = ",".join(fmt(float(x)) for x in r.spectrum[::-1][:3])
        rows.append([i, str(r.verdict), str(r.classification), f"{r.residual_norm:.3e}", head])
    rep.table(["record", "verdict", "class", "residual", "spectrum_top"], rows)
    for i, r in enumerate(result):
        rep.out.write(f"record {i}:\n")
        rep.state(r.state.theta)
    return EXIT_POSITIVE if nonzero_stable else EXIT_NEGATIVE


def cmd_stability(args, rep: Report) -> int:
    g = _load_graph(args)
    s = parse_state(_read(args.state))
    if len(s) != g.n:
        raise CliError(f"state has {len(s)} angles, graph has {g.n} nodes")
    report = stability_verdict(g, s, args.tol)
    rep.kv("command", "stability")
    rep.kv("graph", args.graph)
    rep.kv("state", args.state)
    rep.kv("n", g.n)
    rep.kv("residual_norm", float(np.max(np.abs(residual(g, s)))))
    rep.kv("spectrum", " ".join(fmt(float(x)) for x in report.spectrum))
    rep.kv("zero_modes", report.zero_mode_count)
    rep.kv("verdict", report.verdict)
    rep.kv("edge_angles", edge_angle_check(g, s))
    rep.kv("classification", classify(s))
    if args.cut is not None:
        sin_sum, cos_sum = cut_check(g, s, args.cut)
        rep.kv("cut", _subset_text(args.cut))
        rep.kv("cut_sin", 0.0 if abs(sin_sum) < 1e-12 else sin_sum)
        rep.kv("cut_cos", cos_sum)
    return EXIT_POSITIVE if report.verdict.value == "Stable" else EXIT_NEGATIVE


def cmd_partition(args, rep: Report) -> int:
    rep.kv("command", "partition")
    rep.kv("variant", args.variant)
    rep.kv("values", _subset_text(args.values))
    if args.variant == "integer":
        sol = solve_partition_dp(args.values)
        status = Status.YES if sol is not None else Status.NO
        exhaustive = True
    else:
        n = args.n if args.n is not None else len(args.values)
        rep.kv("n", n)
        solver = kuramoto_partition_feasible if args.variant == "kuramoto" else surd_partition
        ans = solver(n, args.values)
        sol, status, exhaustive = ans.solution, ans.status, ans.exhaustive
        if args.variant == "kuramoto":
            rep.kv("padded", _subset_text(list(args.values) + [n] * (2 * n)))
    rep.kv("exhaustive", exhaustive)
    rep.kv("answer", status)
    if sol is not None:
        rep.kv("subset", _subset_text(sol.subset))
        if sol.epsilon is not None:
            rep.kv("epsilon", float(sol.epsilon))
        rep.kv("gap", float(sol.achieved_gap))
    return EXIT_POSITIVE if status is Status.YES else EXIT_NEGATIVE


def cmd_gadget(args, rep: Report) -> int:
    rep.kv("command", "gadget")
    rep.kv("variant", args.variant)
    rep.kv("values", _subset_text(args.values))
    desc = None
    if args.variant == "weighted":
        g, desc = build_weighted_gadget(args.values, args.factor)
        rep.kv("factor", float(args.factor))
        rep.kv("t", float(desc.param))
    elif args.variant == "unweighted":
        n = args.n if args.n is not None else len(args.values)
        g, desc = build_unweighted_gadget(n, args.values)
        rep.kv("n", n)
    else:
        g = build_clique_blowup(args.values)
    rep.kv("nodes", g.n)
    rep.kv("edges", g.m)

    text = serialize_graph(g, descriptor_comments(desc) if desc is not None else ())
    if args.out:
        _write(args.out, text)
        rep.kv("graph_file", args.out)

    code = EXIT_POSITIVE
    want_witness = args.witness is not None or args.subset is not None
    if want_witness:
        if desc is None:
            raise CliError("witness construction is only available for weighted and unweighted gadgets")
        state = None
        if args.variant == "weighted":
            subset = args.subset
            if subset is None:
                sol = solve_partition_dp(args.values)
                subset = sol.subset if sol is not None else None
            if subset is not None:
                state = weighted_gadget_fixed_point(desc, subset)
            eps = None
        else:
            subset, eps = args.subset, args.eps
            if subset is None:
                ans = kuramoto_partition_feasible(int(desc.param), args.values)
                if ans.solution is not None:
                    subset, eps = ans.solution.subset, ans.solution.epsilon
            if subset is not None:
                state = unweighted_gadget_fixed_point(desc, subset, eps if eps is not None else 0.0)
        if state is None:
            rep.kv("witness", "none")
            code = EXIT_NEGATIVE
        else:
            report = stability_verdict(g, state)
            rep.kv("witness_subset", _subset_text(subset))
            if eps is not None:
                rep.kv("witness_epsilon", float(eps))
            rep.kv("residual_norm", float(np.max(np.abs(residual(g, state)))))
            rep.kv("verdict", report.verdict)
            rep.kv("edge_angles", edge_angle_check(g, state))
            rep.kv("classification", classify(state))
            if args.witness:
                _write(args.witness, serialize_state(state))
                rep.kv("state_file", args.witness)
            rep.out.write("phase_diagram:\n")
            rep.state(state.theta, desc.role_names())
    if not args.out:
        rep.out.write("graph:\n")
        rep.out.write(text)
    return code


def cmd_verify(args, rep: Report) -> int:
    report = verify_reduction(args.variant, args.values, args.samples, args.seed, n=args.n, factor=args.factor)
    rep.kv("command", "verify")
    rep.kv("variant", args.variant)
    rep.kv("values", _subset_text(args.values))
    if args.variant == "weighted":
        rep.kv("factor", float(args.factor))
        rep.kv("t", float(report.param))
    else:
        rep.kv("n", int(report.param))
    rep.kv("seed", args.seed)
    rep.kv("samples", args.samples)
    rep.kv("structured_seeds", report.search.seeds)
    rep.kv("partition_answer", report.answer)
    if report.solution is not None:
        rep.kv("subset", _subset_text(report.solution.subset))
        if report.solution.epsilon is not None:
            rep.kv("epsilon", float(report.solution.epsilon))
    if report.analytic_fp is not None:
        fp = report.analytic_fp
        rep.kv("analytic_residual", f"{fp.residual_norm:.3e}")
        rep.kv("analytic_verdict", fp.verdict)
        rep.kv("analytic_class", fp.classification)
    rep.kv("distinct_fixed_points", len(report.search))
    rep.kv("stable_zero", report.stable_zero)
    rep.kv("stable_nonzero", report.stable_nonzero)
    rep.kv("dropped_flow", report.search.dropped_flow)
    rep.kv("dropped_newton", report.search.dropped_newton)
    for note in report.anomalies:
        rep.kv("anomaly", note)
    if report.consistent is None:
        rep.kv("consistent", "undetermined")
    else:
        rep.kv("consistent", report.consistent)
        if report.answer is Status.NO:
            rep.kv("note", f"no non-zero stable fixed point found in {args.samples} samples (not a proof)")
    return EXIT_POSITIVE if report.consistent else EXIT_NEGATIVE


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kuramoto-hardness",
        description="Kuramoto fixed points, stability, partition solvers and reduction gadgets.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def model_flags(p):
        p.add_argument("--graph", required=True, help="graph file")
        p.add_argument("--omega", help="natural frequencies (kuramoto-omega v1 file); default all zero")
        p.add_argument("--k", type=float, default=1.0, help="coupling constant")

    p = sub.add_parser("simulate", help="integrate the model from a start state")
    model_flags(p)
    p.add_argument("--state", help="start state file; default uniform random from --seed")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--h", type=float, default=DEFAULT_STEP)
    p.add_argument("--steps", type=int, default=DEFAULT_MAX_STEPS)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--trace", action="store_true", help="print energy and frequency spread per step")
    p.add_argument("--trace-every", type=int, default=1)
    p.add_argument("--out", help="write the final state here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fixed-points", help="multistart fixed-point survey")
    model_flags(p)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tol", type=float, default=DEFAULT_RESIDUAL_TOL)
    p.set_defaults(func=cmd_fixed_points)

    p = sub.add_parser("stability", help="stability report for one state")
    p.add_argument("--graph", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--cut", type=int_list, help="node subset X for the cut sums, e.g. 0,2,5")
    p.add_argument("--tol", type=float, default=DEFAULT_STABILITY_TOL)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("partition", help="solve a partition instance")
    p.add_argument("--variant", choices=["integer", "kuramoto", "surd"], default="integer")
    p.add_argument("--values", type=int_list, required=True)
    p.add_argument("--n", type=int, help="instance size n (kuramoto/surd); default len(values)")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("gadget", help="build a reduction graph and optional analytic witness")
    p.add_argument("--variant", choices=["weighted", "blowup", "unweighted"], required=True)
    p.add_argument("--values", type=int_list, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--factor", type=float, default=DEFAULT_FACTOR, help="v-y weight factor c (weighted)")
    p.add_argument("--out", help="graph file to write; printed to stdout when absent")
    p.add_argument("--subset", type=int_list, help="witness subset S (0-based)")
    p.add_argument("--eps", type=float, help="witness epsilon (unweighted)")
    p.add_argument("--witness", help="write the analytic fixed-point state here")
    p.set_defaults(func=cmd_gadget)

    p = sub.add_parser("verify", help="check partition answer against the gadget's fixed points")
    p.add_argument("--variant", choices=["weighted", "unweighted"], required=True)
    p.add_argument("--values", type=int_list, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--factor", type=float, default=DEFAULT_FACTOR)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0, None) else 0
    started = time.perf_counter()
    try:
        code = args.func(args, Report(out))
    except (CliError, FormatError, InvalidWitnessError, ValueError, IndexError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"wall_time: {time.perf_counter() - started:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
