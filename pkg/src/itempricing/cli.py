"""Command-line entry point: ``itempricing <subcommand> ...``.

Exit codes: 0 ok, 1 a check failed, 2 bad input, 3 a size cap was hit.
"""
from __future__ import annotations

import argparse
import csv
import io as _stdio
import sys
from fractions import Fraction

from . import io
from .config import DEFAULT_LIMITS, Limits
from .errors import ChargingViolationError, ItemPricingError, OversizedInstanceError
from .generators import GenSpec, generate, generate_batch
from .item_halving import Adversarial, Fixed, RandomSampling, sample_count, solve_xos
from .market import social_welfare
from .mechanisms import UniformOrders, all_orders, sequential_run
from .multiunit import check_multiunit, solve_multiunit
from .price_doubling import BLACK_BOXES, check_reduction, price_doubling_run
from .rational import as_fraction, format_rational
from .verify import brute_optimal_welfare, verify_core_trace

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


class InputError(Exception):
    pass


def _limits(args) -> Limits:
    kw = {}
    if getattr(args, "max_goods", None) is not None:
        kw.update(demand_goods=args.max_goods, brute_goods=args.max_goods)
    if getattr(args, "max_buyers", None) is not None:
        kw.update(brute_buyers=args.max_buyers, factorial_buyers=args.max_buyers)
    return DEFAULT_LIMITS.with_overrides(**kw)


def _emit(data, out):
    text = io.write_json(data, out)
    if out is None:
        print(text)


def _rational_arg(text: str) -> Fraction:
    try:
        x = as_fraction(text)
    except (TypeError, ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}")
    return x


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _load_instance(args):
    if not args.instance:
        raise InputError("--instance is required")
    return io.instance_from_json(io.read_json(args.instance))


def _orders(args, n: int, limits: Limits):
    if args.orders_file:
        data = io.read_json(args.orders_file)
        orders = data["orders"] if isinstance(data, dict) else data
        return [tuple(int(j) for j in o) for o in orders]
    return all_orders(n, limits.factorial_buyers)


def _strategy(args, inst, limits: Limits):
    if args.arrival == "adversarial":
        return Adversarial(tuple(_orders(args, inst.n_buyers, limits)))
    if args.arrival == "fixed":
        orders = _orders(args, inst.n_buyers, limits) if args.orders_file else [tuple(range(inst.n_buyers))]
        return Fixed(orders[0])
    samples = args.samples if args.samples is not None else sample_count(inst)
    if args.orders_file:
        data = io.read_json(args.orders_file)
        sampler = io.distribution_from_json(data, inst.n_buyers) if isinstance(data, dict) and "type" in data \
            else io.distribution_from_json({"type": "explicit", "orders": data}, inst.n_buyers)
    else:
        sampler = UniformOrders(inst.n_buyers)
    return RandomSampling(sampler, samples, args.seed)


def cmd_gen(args):
    if args.spec:
        spec = GenSpec.from_json(io.read_json(args.spec))
    else:
        if not args.cls or args.m is None or args.buyers is None:
            raise InputError("gen needs --spec or all of --class, --m and --buyers")
        spec = GenSpec(args.cls, args.m, args.buyers, seed=args.seed)
    if args.count == 1:
        _emit(io.instance_to_json(generate(spec)), args.out)
    else:
        _emit({"spec": spec.to_json(), "instances": [io.instance_to_json(x) for x in generate_batch(spec, args.count)]},
              args.out)
    return EXIT_OK


def cmd_solve_xos(args):
    limits = _limits(args)
    inst = _load_instance(args)
    strategy = _strategy(args, inst, limits)
    sol, trace = solve_xos(inst, strategy, args.initial, args.gamma, args.epsilon, limits=limits)
    rev = trace.revenues[trace.selected]
    _emit({"revenue": format_rational(rev), "welfare_initial": format_rational(social_welfare(inst, trace.initial)),
           "gamma": trace.gamma, "selected_round": trace.selected + 1,
           "solution": io.solution_to_json(sol), "trace": io.core_trace_to_json(trace)}, args.out)
    return EXIT_OK


def cmd_solve_multiunit(args):
    limits = _limits(args)
    inst = _load_instance(args)
    sol = solve_multiunit(inst, gamma=args.gamma, epsilon=args.epsilon, limits=limits)
    reports = check_multiunit(inst, sol)
    data = io.multiunit_to_json(sol)
    data.update(revenue=format_rational(sol.revenue), instance=io.instance_to_json(inst),
                reports=[r.to_json() for r in reports])
    _emit(data, args.out)
    return EXIT_OK if all(reports) else EXIT_CHECK


def cmd_price_double(args):
    inst = _load_instance(args)
    sol, trace = price_doubling_run(inst, args.black_box, args.gamma)
    rev = trace.revenue(trace.selected)
    _emit({"revenue": format_rational(rev), "gamma": trace.gamma, "selected_step": trace.selected + 1,
           "solution": io.solution_to_json(sol), "trace": io.reduction_trace_to_json(trace)}, args.out)
    return EXIT_OK


def cmd_simulate(args):
    limits = _limits(args)
    inst = _load_instance(args)
    if not args.solution:
        raise InputError("simulate needs --solution")
    data = io.read_json(args.solution)
    sol = io.solution_from_json(data.get("solution", data))
    rows = []
    for order in _orders(args, inst.n_buyers, limits):
        A = sequential_run(inst, sol.prices, sol.caps, order, limits.demand_goods)
        rev = sum((sol.prices[i] for b in A.bundles for i in b), Fraction(0))
        rows.append({"order": list(order), "revenue": format_rational(rev),
                     "welfare": format_rational(social_welfare(inst, A)), **io.allocation_to_json(A)})
    worst = min(range(len(rows)), key=lambda t: (as_fraction(rows[t]["revenue"]), t))
    _emit({"runs": rows, "worst": worst}, args.out)
    return EXIT_OK


def cmd_verify(args):
    limits = _limits(args)
    path = args.trace or args.instance
    if not path:
        raise InputError("verify needs --trace (a trace or solver output file)")
    data = io.read_json(path)
    data = data.get("trace", data) if isinstance(data, dict) and "kind" not in data else data
    kind = data.get("kind")
    if kind == "core_trace":
        trace = io.core_trace_from_json(data)
        orders = _orders(args, trace.instance.n_buyers, limits) if trace.instance.n_buyers <= limits.factorial_buyers \
            else None
        reports = verify_core_trace(trace, orders)
    elif kind == "reduction_trace":
        trace = io.reduction_trace_from_json(data)
        opt = None
        try:
            opt = brute_optimal_welfare(trace.instance, limits)[1]
        except OversizedInstanceError:
            pass
        reports = check_reduction(trace, opt)
    elif kind == "multiunit_solution":
        if "instance" not in data:
            raise InputError("multi-unit solution file must embed its instance")
        reports = check_multiunit(io.instance_from_json(data["instance"]), io.multiunit_from_json(data))
    else:
        raise InputError(f"unrecognised trace kind {kind!r}")
    _emit({"passed": all(reports), "reports": [r.to_json() for r in reports]}, args.out)
    failed = [r for r in reports if not r]
    for r in failed:
        print(f"FAIL {r.claim} at index {r.index}: lhs={r.lhs} rhs={r.rhs} {r.detail}".rstrip(), file=sys.stderr)
    return EXIT_CHECK if failed else EXIT_OK


def cmd_bench(args):
    limits = _limits(args)
    if args.spec:
        spec = GenSpec.from_json(io.read_json(args.spec))
    elif args.cls and args.m is not None and args.buyers is not None:
        spec = GenSpec(args.cls, args.m, args.buyers, seed=args.seed)
    else:
        raise InputError("bench needs --spec or all of --class, --m and --buyers")
    buf = _stdio.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["instance", "benchmark_welfare", "revenue", "welfare", "ratio", "bound", "tag"])
    failures = 0
    for idx, inst in enumerate(generate_batch(spec, args.count)):
        if spec.cls == "multi_unit":
            try:
                sol = solve_multiunit(inst, gamma=args.gamma, epsilon=args.epsilon, limits=limits)
            except ItemPricingError as exc:
                writer.writerow([idx, "", "", "", "", "", f"skipped: {type(exc).__name__}"])
                continue
            bench = sum((v.at(q) for v, q in zip(inst.buyers, sol.initial)), Fraction(0))
            rev = sol.revenue
            welfare = sum((v.at(q) for v, q in zip(inst.buyers, sol.quantities)), Fraction(0))
            bound = Fraction(4 if sol.case == "threshold" else 8) * sol.gamma
            tag = sol.case
        else:
            try:
                sol, trace = solve_xos(inst, None if args.arrival == "adversarial" else _strategy(args, inst, limits),
                                       args.initial, args.gamma, args.epsilon, limits=limits)
            except ItemPricingError as exc:
                writer.writerow([idx, "", "", "", "", "", f"skipped: {type(exc).__name__}"])
                continue
            bench = social_welfare(inst, trace.initial)
            t = trace.selected
            rev = trace.revenues[t]
            welfare = social_welfare(inst, trace.rounds[t].sold)
            bound = Fraction(4 * trace.gamma ** 2)
            tag = trace.rounds[t].branch
        ratio = bench / rev if rev else None
        if ratio is None or ratio > bound:
            failures += 1
        writer.writerow([idx, format_rational(bench), format_rational(rev), format_rational(welfare),
                         "inf" if ratio is None else f"{float(ratio):.6f}", format_rational(bound), tag])
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_CHECK if failures else EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "solve-xos": cmd_solve_xos,
    "solve-multiunit": cmd_solve_multiunit,
    "price-double": cmd_price_double,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "bench": cmd_bench,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="itempricing", description="Static item pricing with exact verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--instance", help="instance JSON file")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--gamma", type=_positive_int, help="override the loop length")
        p.add_argument("--epsilon", type=_rational_arg, help="absolute tail epsilon, e.g. 1/1000")
        p.add_argument("--arrival", choices=("adversarial", "random", "fixed"), default="adversarial")
        p.add_argument("--orders-file", help="JSON list of orders, or a distribution object")
        p.add_argument("--samples", type=_positive_int, help="sample count T for random arrival")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--initial", choices=("brute", "greedy"), default="brute")
        p.add_argument("--max-goods", type=_positive_int)
        p.add_argument("--max-buyers", type=_positive_int)
        return p

    for name in ("solve-xos", "solve-multiunit", "simulate"):
        p = common(sub.add_parser(name))
        if name == "simulate":
            p.add_argument("--solution", help="pricing solution JSON (solve-xos output works)")
    p = common(sub.add_parser("price-double"))
    p.add_argument("--black-box", choices=sorted(BLACK_BOXES), default="unit_demand_walrasian")
    p = common(sub.add_parser("verify"))
    p.add_argument("--trace", help="trace or solver output JSON")
    for name in ("gen", "bench"):
        p = common(sub.add_parser(name))
        p.add_argument("--spec", help="GenSpec JSON file")
        p.add_argument("--class", dest="cls", help="valuation class for a quick spec")
        p.add_argument("--m", type=_positive_int)
        p.add_argument("--buyers", type=_positive_int)
        p.add_argument("--count", type=_positive_int, default=1 if name == "gen" else 200)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except OversizedInstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ChargingViolationError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (InputError, ItemPricingError, OSError, KeyError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
