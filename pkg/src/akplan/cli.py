"""Command-line front end.

Subcommands: validate, exec, verify, prove, check, db {add,query,stats}.
Exit codes: 0 success / property holds; 1 property fails, not derivable or
no path; 2 usage or parse error; 3 validation error. Every report has a
``--format json`` mirror. Set AK_COLOR=never to disable styling.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import plandb
from .core import (
    DomainDescription,
    DomainValidationError,
    KnowsQuery,
    KWTriple,
    LiteralSet,
    Triple,
    validate_domain,
)
from .parser import (
    ParseError,
    parse_domain,
    parse_literal,
    parse_literal_set,
    parse_plan,
    parse_query,
    parse_triple,
    serialize_plan,
)
from .proof import (
    DerivationFormatError,
    NotDerivableError,
    check_derivation,
    derive_knows,
    derive_kw,
    load_derivation,
    save_derivation,
)
from .semantics0 import (
    AState,
    Evaluator,
    MultipleGuardsTrueError,
    Witness,
    knows_failure,
    kwhether_failure,
)

OK, FAIL, USAGE, INVALID = 0, 1, 2, 3


class _CliInputError(Exception):
    def __init__(self, message: str, code: int = INVALID):
        super().__init__(message)
        self.code = code


def _color_enabled() -> bool:
    mode = os.environ.get("AK_COLOR", "auto")
    if mode == "never":
        return False
    return sys.stdout.isatty()


def _tag(text: str, code: str) -> str:
    if _color_enabled():
        return f"\x1b[{code}m{text}\x1b[0m"
    return text


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _load_domain(path: str) -> DomainDescription:
    return validate_domain(parse_domain(_read(path)))


def _literal_set_arg(text: str, what: str) -> LiteralSet:
    literals = parse_literal_set(text)
    if not literals.is_consistent():
        raise _CliInputError(f"inconsistent {what} {literals}")
    return literals


def _initial_literals(args, domain: DomainDescription) -> LiteralSet:
    if getattr(args, "init", None):
        return _literal_set_arg(args.init, "initial literals")
    return domain.initial


def _witness_payload(witness: Witness | None) -> dict | None:
    if witness is None:
        return None
    return {
        "kind": witness.kind,
        "state": str(witness.state.literals()),
        "detail": witness.detail,
    }


# ---------------------------------------------------------------------------
# Commands


def cmd_validate(args) -> int:
    try:
        props = parse_domain(_read(args.domain))
        domain = validate_domain(props)
    except DomainValidationError as exc:
        payload = {
            "status": "invalid",
            "issues": [
                {"code": issue.code, "message": issue.message,
                 "propositions": [f"{p}." for p in issue.propositions]}
                for issue in exc.issues
            ],
        }
        lines = [_tag("invalid domain:", "31")]
        lines += [f"  [{i.code}] {i.message}" for i in exc.issues]
        _emit(args, payload, lines)
        return INVALID
    sensing = {
        a: sorted(domain.sensed_fluents(a))
        for a in sorted(domain.sensing_actions)
    }
    payload = {
        "status": "valid",
        "propositions": len(domain.propositions),
        "fluents": sorted(domain.fluents),
        "sensing": sensing,
        "non_sensing": sorted(domain.non_sensing_actions),
        "initially": str(domain.initial),
        "digest": domain.digest,
    }
    lines = [
        f"domain: {len(domain.propositions)} propositions, "
        f"{len(domain.fluents)} fluents, {len(domain.actions)} actions",
    ]
    for action, sensed in sensing.items():
        lines.append(f"sensing: {action} determines {', '.join(sensed)}")
    lines.append("non-sensing: " + (
        ", ".join(sorted(domain.non_sensing_actions)) or "(none)"
    ))
    lines.append(f"initially: {domain.initial}")
    lines.append(_tag("status: valid", "32"))
    _emit(args, payload, lines)
    return OK


def cmd_exec(args) -> int:
    domain = _load_domain(args.domain)
    plan = parse_plan(_read(args.plan))
    init = _initial_literals(args, domain)
    outcome = Evaluator(domain).run(plan, AState.from_literals(init))
    states = [str(s.literals()) for s in outcome.sorted_states()]
    payload = {"states": states, "bottom": outcome.bottom}
    lines = list(states)
    if outcome.bottom:
        lines.append("BOTTOM")
    _emit(args, payload, lines)
    return FAIL if outcome.bottom else OK


def cmd_verify(args) -> int:
    domain = _load_domain(args.domain)
    evaluator = Evaluator(domain)
    if args.kw is not None:
        if args.plan is None:
            raise _CliInputError("--kw needs --plan", code=USAGE)
        literal = parse_literal(args.kw)
        plan = parse_plan(_read(args.plan))
        pre = _initial_literals(args, domain)
        witness = kwhether_failure(domain, pre, plan, literal,
                                   evaluator=evaluator)
        claim = str(KWTriple(pre, plan, literal))
    else:
        if args.triple is None:
            print("error: need a triple file or --kw", file=sys.stderr)
            return USAGE
        judgment = _read_triple_or_query(args.triple, domain)
        if isinstance(judgment, Triple):
            witness = knows_failure(domain, judgment.pre, judgment.plan,
                                    judgment.post, evaluator=evaluator)
        else:
            witness = kwhether_failure(domain, judgment.pre, judgment.plan,
                                       judgment.literal, evaluator=evaluator)
        claim = str(judgment)
    holds = witness is None
    payload = {"claim": claim, "holds": holds,
               "witness": _witness_payload(witness)}
    lines = [f"{_tag('holds' if holds else 'fails', '32' if holds else '31')}"
             f": {claim}"]
    if witness is not None and args.witness:
        lines.append(f"witness: {witness}")
    _emit(args, payload, lines)
    return OK if holds else FAIL


def _read_triple_or_query(path: str, domain: DomainDescription):
    """A .q file holds either a triple (explicit precondition) or a query
    (precondition from the domain's initially-propositions)."""
    text = _read(path)
    if text.lstrip().startswith("{"):
        return parse_triple(text)
    query = parse_query(text)
    if isinstance(query, KnowsQuery):
        return Triple(domain.initial, query.plan, query.goal)
    return KWTriple(domain.initial, query.plan, query.literal)


def cmd_prove(args) -> int:
    domain = _load_domain(args.domain)
    judgment = _read_triple_or_query(args.triple, domain)
    try:
        if isinstance(judgment, Triple):
            derivation = derive_knows(domain, judgment.pre, judgment.plan,
                                      judgment.post)
        else:
            derivation = derive_kw(domain, judgment.pre, judgment.plan,
                                   judgment.literal)
    except NotDerivableError as exc:
        payload = {"claim": str(judgment), "derivable": False,
                   "witness": _witness_payload(exc.witness)}
        lines = [f"{_tag('not derivable', '31')}: {judgment}",
                 f"witness: {exc.witness}"]
        _emit(args, payload, lines)
        return FAIL
    result = check_derivation(domain, derivation)
    assert result.ok, f"prover produced a rejected derivation: {result}"
    if args.out:
        save_derivation(derivation, args.out)
        location = args.out
    else:
        from .proof import derivation_to_dict
        print(json.dumps(derivation_to_dict(derivation), indent=2,
                         sort_keys=True))
        location = "(stdout)"
    payload = {"claim": str(judgment), "derivable": True,
               "steps": len(derivation.steps), "out": location}
    lines = [f"{_tag('derived', '32')}: {judgment}",
             f"steps: {len(derivation.steps)}  ->  {location}"]
    if args.out:
        _emit(args, payload, lines)
    return OK


def cmd_check(args) -> int:
    domain = _load_domain(args.domain)
    derivation = load_derivation(args.derivation)
    result = check_derivation(domain, derivation)
    payload = {
        "accepted": result.ok,
        "code": result.code,
        "step": result.step,
        "diagnostic": result.diagnostic,
        "final": str(derivation.final) if result.ok else None,
    }
    if result.ok:
        lines = [f"{_tag('accepted', '32')}: {derivation.final} "
                 f"({len(derivation.steps)} steps)"]
        _emit(args, payload, lines)
        return OK
    lines = [f"{_tag('rejected', '31')}: {result}"]
    _emit(args, payload, lines)
    return INVALID if result.code == "domain-mismatch" else FAIL


def cmd_db_add(args) -> int:
    domain = _load_domain(args.domain)
    if os.path.exists(args.graph):
        graph = plandb.load(args.graph, domain=domain)
    else:
        graph = plandb.ProofGraph.for_domain(domain)
    added = []
    for path in args.derivations:
        derivation = load_derivation(path)
        final = derivation.final
        if not isinstance(final, Triple):
            print(f"error: {path} proves a KW judgment; only Knows triples "
                  "become edges", file=sys.stderr)
            return INVALID
        edge_id = graph.add_triple(final, derivation)
        added.append({"edge": edge_id, "triple": str(final)})
    plandb.save(graph, args.graph)
    payload = {"added": added, **graph.stats()}
    lines = [f"{item['edge']}  {item['triple']}" for item in added]
    stats = graph.stats()
    lines.append(f"graph: {stats['nodes']} nodes, {stats['edges']} edges")
    _emit(args, payload, lines)
    return OK


def cmd_db_query(args) -> int:
    domain = _load_domain(args.domain)
    graph = plandb.load(args.graph, domain=domain)
    start = parse_literal_set(args.init) if args.init else domain.initial
    goal = parse_literal_set(args.goal)
    result = plandb.query_path(graph, start, goal, max_len=args.max_len)
    if result is None:
        payload = {"found": False, "start": str(start), "goal": str(goal)}
        _emit(args, payload, [f"{_tag('no path', '31')}: "
                              f"{start} -> {goal} (max {args.max_len} edges)"])
        return FAIL
    recheck = check_derivation(domain, result.derivation)
    assert recheck.ok, f"stitched derivation rejected: {recheck}"
    if args.out:
        save_derivation(result.derivation, args.out)
    payload = {
        "found": True,
        "start": str(start),
        "goal": str(goal),
        "plan": serialize_plan(result.plan),
        "steps": len(result.derivation.steps),
        "out": args.out,
    }
    lines = [f"{_tag('plan', '32')}: {serialize_plan(result.plan)}"]
    if args.out:
        lines.append(f"derivation: {len(result.derivation.steps)} steps "
                     f"->  {args.out}")
    _emit(args, payload, lines)
    return OK


def cmd_db_stats(args) -> int:
    graph = plandb.load(args.graph, validate=False)
    stats = graph.stats()
    payload = {**stats, "domain_hash": graph.domain_hash,
               "validated": graph.validated}
    lines = [f"nodes: {stats['nodes']}", f"edges: {stats['edges']}",
             f"domain: {graph.domain_hash}"]
    _emit(args, payload, lines)
    return OK


# ---------------------------------------------------------------------------
# Wiring


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")

    parser = argparse.ArgumentParser(
        prog="akplan",
        description="Verify and synthesize conditional plans for A_K "
                    "domains under 0-approximation semantics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common],
                       help="parse and validate a domain file")
    p.add_argument("domain")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("exec", parents=[common],
                       help="print the outcome states of a plan")
    p.add_argument("domain")
    p.add_argument("--plan", required=True, metavar="FILE")
    p.add_argument("--init", metavar="LITERALS")
    p.set_defaults(func=cmd_exec)

    p = sub.add_parser("verify", parents=[common],
                       help="decide a Knows/Kwhether triple semantically")
    p.add_argument("domain")
    p.add_argument("triple", nargs="?")
    p.add_argument("--kw", metavar="LITERAL")
    p.add_argument("--plan", metavar="FILE")
    p.add_argument("--init", metavar="LITERALS")
    p.add_argument("--witness", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("prove", parents=[common],
                       help="produce a checkable derivation for a triple")
    p.add_argument("domain")
    p.add_argument("triple")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("check", parents=[common],
                       help="check a derivation file against a domain")
    p.add_argument("domain")
    p.add_argument("derivation")
    p.set_defaults(func=cmd_check)

    db = sub.add_parser("db", help="proof-graph database")
    dbsub = db.add_subparsers(dest="db_command", required=True)

    p = dbsub.add_parser("add", parents=[common],
                         help="gate derivations into a graph file")
    p.add_argument("domain")
    p.add_argument("graph")
    p.add_argument("derivations", nargs="+", metavar="DERIVATION")
    p.set_defaults(func=cmd_db_add)

    p = dbsub.add_parser("query", parents=[common],
                         help="search the graph for a plan")
    p.add_argument("domain")
    p.add_argument("graph")
    p.add_argument("--init", metavar="LITERALS")
    p.add_argument("--goal", required=True, metavar="LITERALS")
    p.add_argument("--max-len", type=int, default=8)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_db_query)

    p = dbsub.add_parser("stats", parents=[common],
                         help="node and edge counts of a graph file")
    p.add_argument("graph")
    p.set_defaults(func=cmd_db_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return USAGE
    except (plandb.CorruptFileError, DerivationFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except DomainValidationError as exc:
        for issue in exc.issues:
            print(f"validation error: [{issue.code}] {issue.message}",
                  file=sys.stderr)
        return INVALID
    except MultipleGuardsTrueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return INVALID
    except (plandb.DomainMismatchError, plandb.RejectedDerivationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
