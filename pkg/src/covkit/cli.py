"""covkit command line.

Exit codes: 0 success / covering, 1 checked and negative, 2 usage or format
error, 3 internal limit exceeded.  Data goes to stdout, messages to stderr.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from covkit import bounds
from covkit.arrays import (
    ArrayFormatError,
    InfeasibleSchemeError,
    PartitionClass,
    find_deficiencies,
    parse_array,
    serialize_array,
)
from covkit.constructors import ConstructionError, construct
from covkit.recipes import Model
from covkit.reproduce import run_checks
from covkit.search import TABLE1, InstanceTooLargeError, SearchLimitError, min_rows_exact

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2, 3

EPILOG = ("Symbols in array files are 1-based (1..d); column indices in JSON "
          "output are 0-based.  COVKIT_THREADS caps verifier threads.")


def _err(msg: str) -> None:
    print(f"covkit: {msg}", file=sys.stderr)


def _fmt_class(c) -> str:
    if isinstance(c, PartitionClass):
        blocks: dict[int, list[str]] = {}
        for pos, lab in enumerate(c.rgs):
            blocks.setdefault(lab, []).append(str(pos + 1))
        return "|".join("".join(b) for b in blocks.values())
    return f"w={c.w}"


def cmd_verify(args) -> int:
    try:
        if args.input == "-":
            text = sys.stdin.read()
        else:
            with open(args.input) as fh:
                text = fh.read()
        array, scheme = parse_array(text)
        report = find_deficiencies(array, scheme, cap=args.cap)
    except (OSError, ArrayFormatError, InfeasibleSchemeError, ValueError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    if args.json:
        print(json.dumps(report.to_json()))
    else:
        state = "covering" if report.covering else "NOT covering"
        print(f"{array.k}x{array.n} d={array.d} {scheme}: {state}")
        for dfc in report.deficiencies:
            cols = " ".join(str(c) for c in dfc.columns)
            print(f"  columns {cols} missing {', '.join(_fmt_class(c) for c in dfc.missing)}")
        if report.truncated:
            print(f"  ... {report.deficient_count} deficient subsets in total")
    return EXIT_OK if report.covering else EXIT_NEGATIVE


def cmd_construct(args) -> int:
    seed = args.seed
    if seed is None:
        if args.json:
            _err("--seed is required with --json")
            return EXIT_USAGE
        seed = random.SystemRandom().randrange(2**63)
        _err(f"seed {seed}")
    try:
        out = construct(args.n, args.t, args.d, args.scheme, args.model, seed,
                        k_random=args.k_random, max_restarts=args.max_restarts,
                        max_rounds=args.max_rounds)
    except (InfeasibleSchemeError, ValueError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except ConstructionError as exc:
        _err(str(exc))
        return EXIT_LIMIT
    text = serialize_array(out.array, out.scheme)
    summary = {"rows": out.array.k, "random_rows": out.k_random, "rounds": out.rounds,
               "restarts": len(out.attempts) - 1, "seed": seed}
    line = json.dumps(summary) if args.json else " ".join(f"{k}={v}" for k, v in summary.items())
    if args.output:
        with open(args.output, "w", newline="\n") as fh:
            fh.write(text)
        print(line)
    else:
        sys.stdout.write(text)
        print(line, file=sys.stderr)
    return EXIT_OK


def cmd_bounds(args) -> int:
    try:
        if args.scheme == "weight" and args.d is None:
            raise ValueError("--d is required for the weight scheme")
        reps = [bounds.asymptotic_constant(args.scheme, args.t, args.d, args.model, args.variant),
                bounds.first_moment_constant(args.scheme, args.t, args.d, args.model, args.variant)]
        payload = {"bounds": [r.to_json() for r in reps]}
        if args.n is not None:
            if args.d is None:
                raise ValueError("--n needs --d")
            k = bounds.lll_min_k(args.n, args.t, args.d, args.scheme, args.model, mc_seed=args.seed)
            est = bounds.lll_is_estimated(args.n, args.t, args.d, args.scheme, args.model)
            payload["lll_min_k"] = {"n": args.n, "k_random": k, "estimated": est}
    except (InfeasibleSchemeError, ValueError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    print(json.dumps(payload))
    return EXIT_OK


def cmd_search(args) -> int:
    try:
        res = min_rows_exact(args.n, args.t, args.d, args.scheme, args.kmax, args.node_limit)
    except InstanceTooLargeError as exc:
        _err(str(exc))
        return EXIT_LIMIT
    except SearchLimitError as exc:
        _err(str(exc))
        return EXIT_LIMIT
    except (InfeasibleSchemeError, ValueError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    print(json.dumps(res.to_json()))
    return EXIT_OK if res.k0 is not None else EXIT_NEGATIVE


def cmd_check(args) -> int:
    table1 = TABLE1
    if args.perturb_table1:
        table1 = TABLE1[:1] + ((1, 2, 3, 3),) + TABLE1[2:]
    checks = run_checks(table1=table1)
    if args.json:
        print(json.dumps({c.name: c.passed for c in checks}))
    else:
        for c in checks:
            print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    failed = [c.name for c in checks if not c.passed]
    if failed:
        _err("failed: " + ", ".join(failed))
    return EXIT_NEGATIVE if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="covkit", description=__doc__.splitlines()[0], epilog=EPILOG)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check an array file", epilog=EPILOG)
    v.add_argument("--input", required=True, help="array file ('-' for stdin)")
    v.add_argument("--json", action="store_true")
    v.add_argument("--cap", type=int, default=100, help="max deficiencies listed")
    v.set_defaults(func=cmd_verify)

    def scheme_args(sp, need_d=True):
        sp.add_argument("--t", type=int, required=True)
        sp.add_argument("--d", type=int, required=need_d)
        sp.add_argument("--scheme", choices=["partition", "weight"], required=True)

    c = sub.add_parser("construct", help="randomized construction", epilog=EPILOG)
    c.add_argument("--n", type=int, required=True)
    scheme_args(c)
    c.add_argument("--model", choices=[m.value for m in Model], default="uniform")
    c.add_argument("--seed", type=int)
    c.add_argument("--output")
    c.add_argument("--k-random", type=int, help="override the number of random rows")
    c.add_argument("--max-restarts", type=int, default=20)
    c.add_argument("--max-rounds", type=int, help="resampling cap per attempt (default 1000*C(n,t))")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_construct)

    b = sub.add_parser("bounds", help="asymptotic constants and LLL row counts", epilog=EPILOG)
    scheme_args(b, need_d=False)
    b.add_argument("--model", choices=[m.value for m in Model], default="uniform")
    b.add_argument("--variant", choices=["alpha", "beta"],
                   help="partition presets: alpha = alphabet of size n, beta = alphabet of size t")
    b.add_argument("--n", type=int)
    b.add_argument("--seed", type=int, default=0, help="Monte-Carlo seed (balanced, no closed form)")
    b.set_defaults(func=cmd_bounds)

    s = sub.add_parser("search", help="exact minimum for small instances", epilog=EPILOG)
    s.add_argument("--n", type=int, required=True)
    scheme_args(s)
    s.add_argument("--kmax", type=int, default=10)
    s.add_argument("--node-limit", type=int)
    s.set_defaults(func=cmd_search)

    pc = sub.add_parser("paper-check", help="reproduce published tables and constants", epilog=EPILOG)
    pc.add_argument("--json", action="store_true")
    pc.add_argument("--perturb-table1", action="store_true", help=argparse.SUPPRESS)
    pc.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
