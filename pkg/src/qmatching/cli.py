"""Command-line interface.

Every subcommand prints one JSON document on standard output.  Exit codes:
0 success (and MATCHING for ``decide``), 1 NOT_MATCHING, 2 malformed input,
3 a resource cap was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .errors import QMatchingError, ResourceLimitError
from .exactmat import matrix_from_json
from .hardness import Gadget, scan
from .hmip import DEFAULT_ROUND_BITS, HmipInstance, decide_matching
from .instances import EXAMPLES, InstanceError, dumps_instance, format_cq, generate_example, load_instance
from .matroid import edmonds_rado_check, mi_rank_bruteforce
from .permanents import barvinok_estimate, matroidal_permanent, mixed_discriminant, permanent, quantum_permanent
from .scaling import MODES, capacity_upper, osi_run

EXIT_OK = 0
EXIT_NOT_MATCHING = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _write_log(path, records) -> None:
    if not path:
        return
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r.to_json()) + "\n")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _expect(inst, *kinds):
    if inst.kind not in kinds:
        raise InstanceError(f"expected instance kind {' or '.join(kinds)}, got {inst.kind!r}")


# ---------------------------------------------------------------------------


def cmd_qp(args) -> int:
    inst = load_instance(args.instance)
    _expect(inst, "choi", "kraus", "pairs", "subspace")
    value = quantum_permanent(inst.budm(), args.formula, max_n=args.max_n)
    _emit(format_cq(value))
    return EXIT_OK


def cmd_mixdisc(args) -> int:
    inst = load_instance(args.instance)
    _expect(inst, "tuple")
    _emit(format_cq(mixed_discriminant(inst.payload, args.method)))
    return EXIT_OK


def cmd_perm(args) -> int:
    inst = load_instance(args.instance)
    _expect(inst, "matrix")
    _emit(format_cq(permanent(inst.payload)))
    return EXIT_OK


def cmd_mp(args) -> int:
    inst = load_instance(args.instance)
    _expect(inst, "pairs")
    _emit(format_cq(matroidal_permanent(inst.payload)))
    return EXIT_OK


def cmd_estimate(args) -> int:
    inst = load_instance(args.instance)
    _expect(inst, "pairs")
    mean, stderr = barvinok_estimate(inst.payload, args.samples, args.seed)
    _emit({"mean": mean, "stderr": stderr, "samples": args.samples, "seed": args.seed})
    return EXIT_OK


def cmd_scale(args) -> int:
    inst = load_instance(args.instance)
    _expect(inst, "choi", "kraus", "pairs", "subspace")
    t = inst.operator()
    state, reached = osi_run(
        t,
        args.max_iter,
        args.eps,
        args.mode,
        round_bits=args.round_bits if args.mode == "exact" else None,
        pseudo_inverse=args.pseudo_inverse,
    )
    _write_log(args.log, state.log)
    ds = state.ds
    out = {
        "reached": reached,
        "iter": state.iter,
        "ds": format_cq(ds) if isinstance(ds, Fraction) else float(ds),
        "capacity_upper": capacity_upper(t, state),
    }
    _emit(out)
    return EXIT_OK


def cmd_decide(args) -> int:
    inst = load_instance(args.instance)
    _expect(inst, "choi", "kraus", "pairs", "subspace")
    if inst.kind == "pairs":
        h = HmipInstance.from_pairs(inst.payload)
    else:
        h = HmipInstance.from_operator(inst.operator(), kind=inst.kind, separable=args.separable)
    rb = None if args.round_bits is not None and args.round_bits <= 0 else args.round_bits
    v = decide_matching(h, mode=args.mode, round_bits=rb)
    _write_log(args.log, v.log)
    _emit(v.to_json())
    return EXIT_OK if v.matching else EXIT_NOT_MATCHING


def cmd_matroid_rank(args) -> int:
    inst = load_instance(args.instance)
    _expect(inst, "pairs")
    p = inst.payload
    rank = mi_rank_bruteforce(p)
    full, cert = edmonds_rado_check(p)
    _emit({"rank": rank, "full": full, "certificate": None if cert is None else list(cert)})
    return EXIT_OK


def cmd_gadget(args) -> int:
    try:
        with open(args.a, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InstanceError(f"{args.a}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{args.a}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    mats = obj.get("matrices") if isinstance(obj, dict) else obj
    if not isinstance(mats, list) or not mats:
        raise InstanceError(f"{args.a}: expected a nonempty list of matrices")
    try:
        g = Gadget.of([matrix_from_json(m) for m in mats])
    except (ValueError, TypeError) as exc:
        raise InstanceError(f"{args.a}: {exc}") from None
    res = scan(g, args.grid, refine=not args.no_refine)
    _emit(res.to_json())
    return EXIT_OK


def cmd_examples(args) -> int:
    inst = generate_example(args.name, n=args.n, k=args.k, seed=args.seed)
    text = dumps_instance(inst)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--max-n", type=int, default=None, help="largest N accepted by the quantum permanent")
    common.add_argument("--log", default=None, help="write per-iteration JSON lines to this file")

    parser = argparse.ArgumentParser(prog="qmatching", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qp", parents=[common], help="quantum permanent of a bipartite state or operator")
    p.add_argument("instance")
    p.add_argument("--formula", type=int, choices=(9, 10, 11), default=9,
                   help="9: signed sum of block mixed discriminants (default); "
                        "10: triple permutation sum; 11: quadruple sum over N!")
    p.set_defaults(func=cmd_qp)

    p = sub.add_parser("mixdisc", parents=[common], help="mixed discriminant of a matrix tuple")
    p.add_argument("instance")
    p.add_argument("--method", choices=("polarization", "definition"), default="polarization")
    p.set_defaults(func=cmd_mixdisc)

    p = sub.add_parser("perm", parents=[common], help="permanent of a square matrix")
    p.add_argument("instance")
    p.set_defaults(func=cmd_perm)

    p = sub.add_parser("mp", parents=[common], help="matroidal permanent of a pair family")
    p.add_argument("instance")
    p.set_defaults(func=cmd_mp)

    p = sub.add_parser("estimate", parents=[common],
                       help="random-phase estimate of the matroidal permanent")
    p.add_argument("instance")
    p.add_argument("--samples", type=int, default=10000)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("scale", parents=[common], help="run operator Sinkhorn scaling")
    p.add_argument("instance")
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--eps", type=_fraction, default=Fraction(1, 10**6), help="stop once DS <= eps (rational)")
    p.add_argument("--mode", choices=MODES, default="exact")
    p.add_argument("--round-bits", type=int, default=None, help="exact mode: round Q to this many bits")
    p.add_argument("--pseudo-inverse", action="store_true", help="float mode: use pseudo-inverses")
    p.set_defaults(func=cmd_scale)

    p = sub.add_parser("decide", parents=[common],
                       help="decide whether the subspace/operator is a matching (exit 0) or not (exit 1)")
    p.add_argument("instance")
    p.add_argument("--separable", action="store_true", help="use the iteration bound for separable input")
    p.add_argument("--mode", choices=("exact", "float"), default="exact")
    p.add_argument("--round-bits", type=int, default=DEFAULT_ROUND_BITS,
                   help=f"bits kept in Q per step (default {DEFAULT_ROUND_BITS}; 0 disables rounding)")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("matroid-rank", parents=[common], help="matroid intersection rank by enumeration")
    p.add_argument("instance")
    p.set_defaults(func=cmd_matroid_rank)

    p = sub.add_parser("gadget", parents=[common], help="grid maxima for the symmetric block gadget")
    p.add_argument("--a", required=True, help="JSON file with a list of symmetric matrices")
    p.add_argument("--grid", type=int, default=10000)
    p.add_argument("--no-refine", action="store_true", help="do not double the grid until stable")
    p.set_defaults(func=cmd_gadget)

    p = sub.add_parser("examples", parents=[common], help="write a named example instance")
    p.add_argument("name", choices=EXAMPLES)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_examples)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        sys.stderr.write(f"qmatching: resource limit: {exc}\n")
        return EXIT_RESOURCE
    except (QMatchingError, ValueError) as exc:
        sys.stderr.write(f"qmatching: error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
