"""Command-line entry point: construct / verify / analyze / search / dynamics / report.

Exit codes: 0 on success, 1 when a hard assertion fails on certified input
(a theorem-contradiction event), 2 on usage or input-format errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .constructions import ConstructionSpec, make
from .deviations import BEST_RESPONSE_LIMIT, DEVIATION_CLASSES, best_response_dynamics
from .errors import FormatError, LimitExceededError, NcgError
from .formats import (
    load_profile,
    parse_rational,
    profile_to_json_dict,
    profile_to_text,
    rational_to_text,
)
from .game import Game
from .reports import analyze_profile, hard_failures
from .deviations import verify_equilibrium
from .search import (
    ExperimentConfig,
    enumerate_equilibria,
    hunt_equilibria,
    read_records,
    theorem_sweep,
    write_records,
)

USAGE_ERROR = 2
ASSERTION_ERROR = 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncg",
        description="Verifiers, generators, and search harnesses for the "
        "sum-distance network creation game.",
    )
    parser.add_argument("--version", action="version", version=f"ncg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="emit a canonical profile")
    p.add_argument("--kind", required=True,
                   choices=["star", "clique", "path", "cycle", "tree_from_pruefer",
                            "clique_of_stars", "random"])
    p.add_argument("--params", default="",
                   help="comma-separated key=value pairs, e.g. k=3,l=3 or n=5")
    p.add_argument("--orientation", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", default="1", help="alpha as p/q or integer")
    p.add_argument("-o", "--output", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=["text", "json"], default="text")

    p = sub.add_parser("verify", help="equilibrium verification of a profile file")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--alpha", default=None, help="override the file's alpha")
    p.add_argument("--class", dest="deviation_class", default="exact",
                   choices=list(DEVIATION_CLASSES))
    p.add_argument("--limit", type=int, default=BEST_RESPONSE_LIMIT)
    p.add_argument("--format", choices=["text", "json"], default="text")

    p = sub.add_parser("analyze", help="structural analysis report of a profile file")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--alpha", default=None)
    p.add_argument("--epsilon", action="append", default=[],
                   help="repeatable, p/q in (0,1); default 1/2 and 1/4")
    p.add_argument("--class", dest="certify", default="auto",
                   choices=["auto", "exact", "buying", "none"],
                   help="verification attached to the report")
    p.add_argument("--limit", type=int, default=BEST_RESPONSE_LIMIT)
    p.add_argument("--format", choices=["text", "json"], default="json")

    p = sub.add_parser("search", help="enumerate or hunt equilibria, write records")
    p.add_argument("--n", action="append", type=int, required=True)
    p.add_argument("--alpha", action="append", required=True)
    p.add_argument("--family", default="all",
                   choices=["all", "graphs_with_orientations", "trees", "hunt"])
    p.add_argument("--class", dest="verifier_class", default="exact",
                   choices=["exact", "buying"])
    p.add_argument("--seeds", type=int, default=10,
                   help="number of seeded starts (hunt family)")
    p.add_argument("--edge-prob", type=float, default=0.3)
    p.add_argument("--schedule", default="round_robin",
                   choices=["round_robin", "random_permutation"])
    p.add_argument("--max-rounds", type=int, default=60)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("dynamics", help="run best-response dynamics from a profile")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--alpha", default=None)
    p.add_argument("--schedule", default="round_robin",
                   choices=["round_robin", "random_permutation"])
    p.add_argument("--max-rounds", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--limit", type=int, default=BEST_RESPONSE_LIMIT)
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("report", help="theorem sweep over stored records")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", default=None, help="CSV path (default stdout)")

    return parser


def _parse_params(text: str) -> dict:
    params = {}
    if text:
        for part in text.split(","):
            if "=" not in part:
                raise FormatError(f"bad --params entry {part!r}, expected key=value")
            key, value = part.split("=", 1)
            params[key.strip()] = value.strip()
    return params


def _load(args) -> tuple[Game, object]:
    game, profile = load_profile(args.input)
    if args.alpha is not None:
        game = Game(game.n, parse_rational(args.alpha))
    return game, profile


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_construct(args) -> int:
    spec = ConstructionSpec(
        kind=args.kind,
        params=_parse_params(args.params),
        orientation=args.orientation,
        seed=args.seed,
    )
    profile = make(spec)
    game = Game(profile.n, parse_rational(args.alpha))
    if args.format == "json":
        _emit(json.dumps(profile_to_json_dict(game, profile), sort_keys=True), args.output)
    else:
        _emit(profile_to_text(game, profile), args.output)
    return 0


def cmd_verify(args) -> int:
    game, profile = _load(args)
    report = verify_equilibrium(game, profile, args.deviation_class, limit=args.limit)
    payload = report.to_json_dict()
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        print(f"class={payload['class']} verdict={payload['verdict']}"
              f"{' (restricted class: necessary condition only)' if payload['restricted'] else ''}")
        if payload["witness"]:
            w = payload["witness"]
            print(f"witness: player {w['player']} sells {w['sell']} buys {w['buy']}"
                  f" delta={w['delta']}")
    return 0


def cmd_analyze(args) -> int:
    game, profile = _load(args)
    epsilons = [parse_rational(e) for e in args.epsilon] or None
    kwargs = {"certify": args.certify, "br_limit": args.limit}
    if epsilons:
        kwargs["epsilons"] = tuple(epsilons)
    analysis = analyze_profile(game, profile, **kwargs)
    if args.format == "json":
        print(json.dumps(analysis, sort_keys=True))
    else:
        verification = analysis.get("verification") or {}
        print(f"graph {analysis['graph_id']}  n={analysis['n']}"
              f"  alpha={rational_to_text(Fraction(game.alpha))}"
              f"  diam={analysis['diam']}  tree={analysis['is_tree']}")
        print(f"verification: {verification.get('verdict', 'skipped')}")
        for entry in analysis["uniformity"]:
            eps = entry["epsilon"]
            print(f"uniformity eps={eps['num']}/{eps['den']}: ok={entry['ok']}"
                  f" r={entry['r']} x={entry['x']}")
        if analysis["prop1"] is not None:
            print(f"window inequality: ok={analysis['prop1']['ok']}"
                  f" r={analysis['prop1']['r']}")
        for check in analysis["checks"]:
            print(f"check {check['name']}: ok={check['ok']}")
    certified = (analysis.get("verification") or {}).get("verdict") == "equilibrium"
    if certified and hard_failures(analysis):
        print("hard assertion failed on certified input", file=sys.stderr)
        for check in hard_failures(analysis):
            print(f"  {check}", file=sys.stderr)
        return ASSERTION_ERROR
    return 0


def cmd_search(args) -> int:
    config = ExperimentConfig(
        ns=tuple(args.n),
        alphas=tuple(parse_rational(a) for a in args.alpha),
        family=args.family,
        verifier_class=args.verifier_class,
        seeds=tuple(range(args.seeds)),
        workers=args.workers,
        edge_prob=args.edge_prob,
        schedule=args.schedule,
        max_rounds=args.max_rounds,
    )
    source = hunt_equilibria(config) if args.family == "hunt" else enumerate_equilibria(config)
    count = write_records(args.output, config, source)
    print(f"wrote {count} certified records to {args.output}")
    return 0


def cmd_dynamics(args) -> int:
    game, profile = _load(args)
    trace = best_response_dynamics(
        game,
        profile,
        schedule=args.schedule,
        max_rounds=args.max_rounds,
        seed=args.seed,
        limit=args.limit,
    )
    payload = json.dumps(trace.to_json_dict(), sort_keys=True)
    _emit(payload, args.output)
    if args.output is not None:
        print(f"dynamics outcome: {trace.outcome} after {trace.rounds} rounds,"
              f" {len(trace.moves)} moves")
    return 0


def cmd_report(args) -> int:
    _, records = read_records(args.input)
    sweep = theorem_sweep(records)
    _emit(sweep.csv_text, args.output)
    certified = sum(
        1
        for r in records
        if ((r.get("analysis", {}).get("verification") or {}).get("verdict"))
        == "equilibrium"
    )
    print(f"{len(sweep.rows)} rows, {certified} certified, "
          f"{len(sweep.failures)} hard failures", file=sys.stderr)
    if not sweep.ok:
        for failure in sweep.failures:
            print(f"FAIL {failure['profile_id']}: {failure['check']}", file=sys.stderr)
        return ASSERTION_ERROR
    return 0


COMMANDS = {
    "construct": cmd_construct,
    "verify": cmd_verify,
    "analyze": cmd_analyze,
    "search": cmd_search,
    "dynamics": cmd_dynamics,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except FormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (LimitExceededError, NcgError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
