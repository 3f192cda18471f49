"""Command-line front end.

Subcommands: ``gen``, ``solve``, ``exact``, ``verify``, ``sweep``,
``instrument``.  Every output is a pure function of the input files, flags,
and seeds, so re-running a command reproduces CSV bodies byte for byte.

Exit codes: 0 success (and all checks hold), 1 verification failure,
2 input error, 3 resource/budget refusal.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

from . import analysis, io
from .errors import BudgetExceededError, InputError, KMedianError
from .generators import (gen_k_copies, gen_random, gen_star, gen_tree_lb,
                         RANDOM_KINDS)
from .report import BoundReport, write_report_csv
from .solvers import (TiePolicy, exact_kmedian, forward_greedy, read_trace_csv,
                      reverse_greedy_chain, truncate_chain, write_trace_csv)
from .space import verify_metric

LARGE_INSTANCE = 50_000

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3


def _parse_tie(text: str, space) -> TiePolicy:
    if text == "lex":
        return TiePolicy.lexicographic()
    if text == "priority":
        if space is None or space.tie_priority is None:
            raise InputError("--tie priority needs an instance with a tie_priority list")
        return TiePolicy.from_priority(space.tie_priority)
    if text.startswith("random:"):
        try:
            return TiePolicy.seeded_random(int(text.split(":", 1)[1]))
        except ValueError:
            raise InputError(f"bad tie spec {text!r}; expected random:SEED") from None
    raise InputError(f"bad tie spec {text!r}; expected lex, priority, or random:SEED")


def _parse_range(text: str, name: str) -> list[int]:
    """Accept N, A:B (inclusive), or comma lists."""
    try:
        values = []
        for part in text.split(","):
            if ":" in part:
                a, b = part.split(":")
                values.extend(range(int(a), int(b) + 1))
            elif part:
                values.append(int(part))
        if not values:
            raise ValueError
        return values
    except ValueError:
        raise InputError(f"--{name}: cannot parse range {text!r}") from None


def _parse_floats(text: str, name: str) -> list[float]:
    try:
        values = [float(p) for p in text.split(",") if p]
        if not values:
            raise ValueError
        return values
    except ValueError:
        raise InputError(f"--{name}: cannot parse list {text!r}") from None


def _guard_large(space, allow_large: bool):
    if space.n_points > LARGE_INSTANCE and not allow_large:
        raise BudgetExceededError(
            f"instance has {space.n_points:,} points; pass --allow-large to "
            f"run anyway (this may take hours)")


# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.family == "tree":
        space = gen_tree_lb(args.h)
    elif args.family == "star":
        space = gen_star(args.j, args.w)
    elif args.family == "random":
        space = gen_random(args.n, args.kind, args.seed)
    else:  # copies
        space = gen_k_copies(io.load_instance(args.base), args.k, args.separation)
    io.save_instance(space, args.output, expand_graph=args.expand_graph)
    print(f"wrote {args.output}: {space.n_points} points, "
          f"total weight {space.total_weight:g}")
    return EXIT_OK


def cmd_solve(args) -> int:
    space = io.load_instance(args.instance)
    _guard_large(space, args.allow_large)
    tie = _parse_tie(args.tie, space)
    if args.alg == "forward":
        trace = forward_greedy(space, args.k, tie)
    else:
        algorithm = "reference" if args.alg == "rgreedy-ref" else "fast"
        trace = truncate_chain(reverse_greedy_chain(space, tie, algorithm), args.k)
    if args.output:
        write_trace_csv(trace, args.output)
    cost = trace.final_cost
    line = f"alg={args.alg} k={args.k} cost={cost!r} final={','.join(map(str, trace.final_set))}"
    if args.exact:
        _, opt = exact_kmedian(space, args.k, args.budget)
        ratio = cost / opt if opt else (1.0 if cost == 0 else math.inf)
        line += f" exact={opt!r} ratio={ratio!r}"
    print(line)
    return EXIT_OK


def cmd_exact(args) -> int:
    space = io.load_instance(args.instance)
    members, cost = exact_kmedian(space, args.k, args.budget)
    payload = {"k": args.k, "cost": cost, "members": list(members)}
    if args.format == "json":
        print(json.dumps(payload))
    else:
        print(f"k={args.k} cost={cost!r} members={','.join(map(str, members))}")
    if args.output:
        with open(args.output, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["k", "cost", "members"])
            writer.writerow([args.k, repr(cost), " ".join(map(str, members))])
    return EXIT_OK


CHECKS = ("lemma1", "supermod", "stepbound", "harmonic", "general", "metric", "all")


def _verify_instance(space, name, check, args) -> list[BoundReport]:
    """Checks against one loaded instance."""
    import random as _random

    reports = []
    rng = _random.Random(args.seed)
    n = space.n_points
    tie = _parse_tie(args.tie, space)
    if check in ("metric", "all"):
        rep = verify_metric(space)
        rep.instance = name
        reports.append(rep)
    if check in ("lemma1", "supermod", "general") or check == "all":
        for trial in range(args.trials):
            if check in ("lemma1", "all"):
                rep = analysis.check_serving_set_bound(
                    space, analysis._random_subset(rng, n),
                    analysis._random_subset(rng, n))
                rep.instance, rep.params = name, f"trial={trial}"
                reports.append(rep)
            if n >= 2 and (check in ("supermod", "all")):
                R = analysis._random_subset(rng, n, lo=2)
                Q = tuple(sorted(rng.sample(R, rng.randint(1, len(R) - 1))))
                rep = analysis.check_supermodularity(space, Q, R)
                rep.instance, rep.params = name, f"trial={trial}"
                reports.append(rep)
            if n >= 2 and (check in ("general", "all")):
                rep = analysis.check_min_removal_bound(
                    space, analysis._random_subset(rng, n, lo=2))
                rep.instance, rep.params = name, f"trial={trial}"
                reports.append(rep)
    if check in ("harmonic", "stepbound", "all"):
        k = args.k if args.k is not None else 1
        chain = reverse_greedy_chain(space, tie)
        trace = truncate_chain(chain, k)
        if check in ("harmonic", "all"):
            rep = analysis.check_harmonic_ratio(space, k, trace=chain)
            rep.instance = name
            reports.append(rep)
        if check in ("stepbound", "all"):
            for rep in analysis.check_step_bounds(space, trace, k):
                rep.instance = name
                reports.append(rep)
    return reports


def _verify_corpus(check, args) -> list[BoundReport]:
    """Checks against freshly drawn random instances."""
    reports = []
    if check in ("lemma1", "all"):
        reports += analysis.fuzz_serving_set(args.trials, args.seed)
    if check in ("supermod", "all"):
        reports += analysis.fuzz_supermodularity(args.trials, args.seed + 1)
    if check in ("harmonic", "all"):
        reports += analysis.fuzz_harmonic(args.trials, args.seed + 2)
    if check in ("stepbound", "all"):
        reports += analysis.fuzz_step_bounds(args.trials, args.seed + 3)
    if check in ("general", "all"):
        reports += analysis.fuzz_min_removal(args.trials, args.seed + 4)
    if check == "metric":
        raise InputError("--check metric needs an instance file")
    return reports


def cmd_verify(args) -> int:
    if args.instance:
        space = io.load_instance(args.instance)
        reports = _verify_instance(space, args.instance, args.check, args)
    else:
        reports = _verify_corpus(args.check, args)
    if args.output:
        write_report_csv(reports, args.output)
    failed = [r for r in reports if not r.holds]
    for r in failed:
        print(f"FAIL {r.check} instance={r.instance} lhs={r.lhs!r} rhs={r.rhs!r} "
              f"witness={r.witness}")
    print(f"{len(reports) - len(failed)}/{len(reports)} checks hold")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


SWEEP_HEADER = ["family", "params", "n_points", "total_weight", "k", "alg",
                "alg_cost", "exact_cost", "ratio", "harmonic_bound",
                "tree_ratio_ref", "error"]


def _sweep_points(args):
    """(params-string, sweep-x, space) triples for the requested family."""
    if args.family == "tree":
        for h in _parse_range(args.h, "h"):
            yield f"h={h}", float(h), gen_tree_lb(h)
    elif args.family == "star":
        for j in _parse_range(args.j, "j"):
            for w in _parse_floats(args.w, "w"):
                yield f"j={j},w={w:g}", float(w), gen_star(j, w)
    else:
        for n in _parse_range(args.n, "n"):
            for seed in range(args.seeds):
                yield (f"n={n},seed={seed}", float(n),
                       gen_random(n, args.kind, seed))


def _sweep_instance_rows(args, params, x, space, k_values):
    """All rows for one instance; the reverse chain is computed once and
    truncated per k.  Returns (rows, ratio-points-per-k)."""
    rows, points = [], []
    tie = _parse_tie(args.tie, space)
    chain = None
    for k in k_values:
        row = {"family": args.family, "params": params,
               "n_points": space.n_points,
               "total_weight": repr(space.total_weight), "k": k,
               "alg": args.alg, "alg_cost": "", "exact_cost": "",
               "ratio": "", "harmonic_bound": "", "tree_ratio_ref": "",
               "error": ""}
        try:
            if k > space.n_points:
                raise InputError(f"k={k} exceeds {space.n_points} points")
            if args.alg == "forward":
                trace = forward_greedy(space, k, tie)
            else:
                if chain is None:
                    chain = reverse_greedy_chain(space, tie)
                trace = truncate_chain(chain, k)
            cost = trace.final_cost
            _, opt = exact_kmedian(space, k, args.budget)
            ratio = cost / opt if opt else (1.0 if cost == 0 else math.inf)
            row["alg_cost"] = repr(cost)
            row["exact_cost"] = repr(opt)
            row["ratio"] = repr(ratio)
            row["harmonic_bound"] = repr(2.0 * analysis.harmonic_number(
                space.n_points - k))
            if args.family == "tree":
                h = int(params.split("=")[1])
                row["tree_ratio_ref"] = repr((h - 1) / 8.0)
            points.append((f"k={k}", (x, ratio)))
        except KMedianError as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows, points


def cmd_sweep(args) -> int:
    k_values = _parse_range(args.k, "k")
    tasks = []
    for params, x, space in _sweep_points(args):
        _guard_large(space, args.allow_large)
        tasks.append((params, x, space))
    rows = []
    series = {}
    if args.jobs > 1:
        # instances are immutable and rows independent; order is fixed by
        # submission, so concurrency cannot change the output
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_sweep_instance_rows, args, p, x, s, k_values)
                       for p, x, s in tasks]
            results = [f.result() for f in futures]
    else:
        results = [_sweep_instance_rows(args, p, x, s, k_values)
                   for p, x, s in tasks]
    for task_rows, points in results:
        rows.extend(task_rows)
        for key, pt in points:
            series.setdefault(key, []).append(pt)
    any_error = any(r["error"] for r in rows)
    with open(args.output, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_HEADER, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    if args.svg:
        from .svg import line_chart

        x_label = {"tree": "h", "star": "w", "random": "n"}[args.family]
        chart = line_chart(sorted(series.items()), x_label, "cost ratio",
                           title=f"{args.family} sweep ({args.alg})")
        with open(args.svg, "w", newline="") as fh:
            fh.write(chart)
    print(f"wrote {args.output}: {len(rows)} rows")
    return EXIT_BUDGET if any_error else EXIT_OK


def cmd_instrument(args) -> int:
    space = io.load_instance(args.instance)
    trace = read_trace_csv(args.trace, space)
    inst = analysis.ball_instrumentation(space, trace, radius=args.radius)
    items = [("center", inst.center), ("radius", repr(inst.radius)),
             ("ball_size", len(inst.ball)), ("h_max", inst.h_max),
             ("max_consecutive_empty_zones", inst.max_consecutive_empty),
             ("never_serving_weight", repr(inst.never_serving_weight))]
    for i in sorted(inst.zones):
        items.append((f"zone_size[{i}]", len(inst.zones[i])))
        items.append((f"zone_weight[{i}]", repr(inst.m_static[i])))
    for j in sorted(inst.t):
        items.append((f"t[{j}]", inst.t[j]))
    for j in sorted(inst.m_operational):
        items.append((f"m_operational[{j}]", repr(inst.m_operational[j])))
    items.append(("weighted_sum_all", repr(inst.weighted_sum_all)))
    items.append(("weighted_sum_tail", repr(inst.weighted_sum_tail)))
    items.append(("sum_to_weight_ratio",
                  repr(inst.weighted_sum_all / space.total_weight)))
    if args.format == "json":
        print(json.dumps(dict(items)))
    else:
        for key, value in items:
            print(f"{key},{value}")
    if args.output:
        with open(args.output, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["key", "value"])
            writer.writerows(items)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kmedian",
        description="k-median greedy heuristics, adversarial instances, and "
                    "bound verification")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate an instance file")
    gen_sub = p_gen.add_subparsers(dest="family", required=True)
    g_tree = gen_sub.add_parser("tree", help="layered-tree adversarial instance")
    g_tree.add_argument("--h", type=int, required=True, help="tree levels (1..4)")
    g_star = gen_sub.add_parser("star", help="star tightness instance")
    g_star.add_argument("--j", type=int, required=True, help="number of arms")
    g_star.add_argument("--w", type=float, required=True, help="arm cluster weight")
    g_rand = gen_sub.add_parser("random", help="seeded random instance")
    g_rand.add_argument("--n", type=int, required=True)
    g_rand.add_argument("--kind", choices=RANDOM_KINDS, default="unit_square_points")
    g_rand.add_argument("--seed", type=int, default=0)
    g_cop = gen_sub.add_parser("copies", help="widely separated copies of a base instance")
    g_cop.add_argument("--base", required=True, help="base instance file")
    g_cop.add_argument("--k", type=int, required=True, help="number of copies")
    g_cop.add_argument("--separation", type=float, default=None)
    for g in (g_tree, g_star, g_rand, g_cop):
        g.add_argument("-o", "--output", required=True)
        g.add_argument("--expand-graph", action="store_true",
                       help="serialize tree instances as explicit edge lists")
        g.set_defaults(func=cmd_gen)

    p_solve = sub.add_parser("solve", help="run a greedy solver")
    p_solve.add_argument("instance")
    p_solve.add_argument("-k", type=int, required=True)
    p_solve.add_argument("--alg", choices=("rgreedy", "rgreedy-ref", "forward"),
                         default="rgreedy")
    p_solve.add_argument("--tie", default="lex",
                         help="lex | priority | random:SEED")
    p_solve.add_argument("--exact", action="store_true",
                         help="also run the exact oracle and print the ratio")
    p_solve.add_argument("--budget", type=int, default=10_000_000)
    p_solve.add_argument("--allow-large", action="store_true")
    p_solve.add_argument("-o", "--output", help="trace CSV path")
    p_solve.set_defaults(func=cmd_solve)

    p_exact = sub.add_parser("exact", help="exact k-median by enumeration")
    p_exact.add_argument("instance")
    p_exact.add_argument("-k", type=int, required=True)
    p_exact.add_argument("--budget", type=int, default=10_000_000)
    p_exact.add_argument("--format", choices=("csv", "json"), default="csv")
    p_exact.add_argument("-o", "--output")
    p_exact.set_defaults(func=cmd_exact)

    p_verify = sub.add_parser("verify", help="run inequality/axiom checks")
    p_verify.add_argument("instance", nargs="?",
                          help="instance file; omit to fuzz random instances")
    p_verify.add_argument("--check", choices=CHECKS, required=True)
    p_verify.add_argument("--trials", type=int, default=100)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("-k", type=int, default=None)
    p_verify.add_argument("--tie", default="lex")
    p_verify.add_argument("-o", "--output", help="report CSV path")
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="parameter sweep with ratio report")
    sweep_sub = p_sweep.add_subparsers(dest="family", required=True)
    s_tree = sweep_sub.add_parser("tree")
    s_tree.add_argument("--h", required=True, help="range, e.g. 1:3")
    s_star = sweep_sub.add_parser("star")
    s_star.add_argument("--j", required=True, help="range, e.g. 10")
    s_star.add_argument("--w", required=True, help="list, e.g. 10,100,1000")
    s_rand = sweep_sub.add_parser("random")
    s_rand.add_argument("--n", required=True, help="range, e.g. 8:12")
    s_rand.add_argument("--seeds", type=int, default=3)
    s_rand.add_argument("--kind", choices=RANDOM_KINDS, default="unit_square_points")
    for s in (s_tree, s_star, s_rand):
        s.add_argument("-k", required=True, help="k values, e.g. 1,2")
        s.add_argument("--alg", choices=("rgreedy", "forward"), default="rgreedy")
        s.add_argument("--tie", default="lex")
        s.add_argument("--budget", type=int, default=10_000_000)
        s.add_argument("--allow-large", action="store_true")
        s.add_argument("--jobs", type=int, default=1,
                       help="evaluate instances concurrently")
        s.add_argument("-o", "--output", required=True)
        s.add_argument("--svg", help="also draw a ratio-vs-parameter chart")
        s.set_defaults(func=cmd_sweep)

    p_inst = sub.add_parser("instrument",
                            help="ball instrumentation over a stored trace")
    p_inst.add_argument("instance")
    p_inst.add_argument("--trace", required=True, help="trace CSV from solve")
    p_inst.add_argument("--radius", type=float, default=1.0)
    p_inst.add_argument("--format", choices=("csv", "json"), default="csv")
    p_inst.add_argument("-o", "--output")
    p_inst.set_defaults(func=cmd_instrument)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except KMedianError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
