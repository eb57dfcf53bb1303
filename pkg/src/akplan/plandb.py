"""Persistent proof graph for off-line planning.

Verified Knows triples are stored as labelled edges between literal-set
nodes. An on-line query walks the graph breadth-first: an edge applies at a
set S when its precondition is contained in S (weakening licenses this), and
taking it lands exactly on its postcondition. The answer is the composed
plan together with a stitched derivation built from the stored ones, which
the checker accepts like any other.

On disk a graph is one JSON-lines file: a header record, then one record per
edge in canonical order, so saving is byte-deterministic.
"""

from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass

from .core import (
    ConditionalPlan,
    DomainDescription,
    EMPTY,
    LiteralSet,
    Seq,
    Triple,
    normalize_plan,
    plan_to_text,
)
from .parser import ParseError, parse_triple
from .proof import (
    AXIOM1,
    RULE5,
    RULE6,
    CheckResult,
    Derivation,
    DerivationBuilder,
    DerivationFormatError,
    Justification,
    check_derivation,
    derivation_from_dict,
    derivation_to_dict,
)

FORMAT_VERSION = 1


class PlanDBError(Exception):
    pass


class RejectedDerivationError(PlanDBError):
    def __init__(self, message: str, result: CheckResult | None = None):
        super().__init__(message)
        self.result = result


class DomainMismatchError(PlanDBError):
    pass


class CorruptFileError(PlanDBError):
    pass


@dataclass(frozen=True)
class Edge:
    pre: LiteralSet
    plan: ConditionalPlan
    post: LiteralSet
    derivation: Derivation

    def key(self) -> tuple[str, str, str]:
        return (str(self.pre), plan_to_text(self.plan), str(self.post))

    def edge_id(self) -> str:
        return hashlib.sha256("|".join(self.key()).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class PathResult:
    plan: ConditionalPlan
    derivation: Derivation


class ProofGraph:
    """In-memory proof graph; single writer, any number of readers of a
    quiescent instance."""

    def __init__(self, domain: DomainDescription | None,
                 domain_hash: str | None = None, validated: bool = True):
        if domain is None and domain_hash is None:
            raise ValueError("need a domain or at least its hash")
        self.domain = domain
        self.domain_hash = domain.digest if domain else domain_hash
        self.validated = validated
        self._edges: dict[tuple[str, str, str], Edge] = {}

    @classmethod
    def for_domain(cls, domain: DomainDescription) -> ProofGraph:
        return cls(domain)

    @property
    def edges(self) -> list[Edge]:
        return [self._edges[k] for k in sorted(self._edges)]

    @property
    def nodes(self) -> set[LiteralSet]:
        found: set[LiteralSet] = set()
        for edge in self._edges.values():
            found.add(edge.pre)
            found.add(edge.post)
        return found

    def stats(self) -> dict[str, int]:
        return {"nodes": len(self.nodes), "edges": len(self._edges)}

    def add_triple(self, judgment: Triple, derivation: Derivation) -> str:
        """Insert a verified edge; idempotent on duplicates. The derivation
        must be checker-accepted for this graph's domain and must end in the
        given judgment."""
        if not isinstance(judgment, Triple):
            raise RejectedDerivationError(
                "only Knows triples can be stored as edges"
            )
        if self.domain is None:
            raise PlanDBError("graph was loaded without a domain; cannot add")
        if derivation.domain_hash != self.domain_hash:
            raise DomainMismatchError(
                f"derivation is for domain {derivation.domain_hash}, "
                f"graph is for {self.domain_hash}"
            )
        result = check_derivation(self.domain, derivation)
        if not result.ok:
            raise RejectedDerivationError(
                f"derivation rejected: {result}", result
            )
        if derivation.final != judgment:
            raise RejectedDerivationError(
                f"derivation proves {derivation.final}, not {judgment}"
            )
        edge = Edge(judgment.pre, judgment.plan, judgment.post, derivation)
        existing = self._edges.get(edge.key())
        if existing is not None:
            return existing.edge_id()
        self._edges[edge.key()] = edge
        return edge.edge_id()


def query_path(graph: ProofGraph, start: LiteralSet, goal: LiteralSet,
               max_len: int = 8) -> PathResult | None:
    """Breadth-first search for a plan from `start` to a set covering
    `goal`, at most `max_len` edges long. Deterministic: edges are explored
    in canonical order, so equal graphs and queries give equal answers."""
    if not start.is_consistent():
        raise ValueError(f"inconsistent start set {start}")
    if not goal.is_consistent():
        raise ValueError(f"inconsistent goal set {goal}")
    if goal.issubset(start):
        return _stitch(graph, start, goal, [])
    edges = graph.edges
    parents: dict[LiteralSet, tuple[LiteralSet, Edge]] = {}
    depth = {start: 0}
    queue: deque[LiteralSet] = deque([start])
    while queue:
        current = queue.popleft()
        if depth[current] >= max_len:
            continue
        for edge in edges:
            if not edge.pre.issubset(current):
                continue
            successor = edge.post
            if successor in depth:
                continue
            depth[successor] = depth[current] + 1
            parents[successor] = (current, edge)
            if goal.issubset(successor):
                path: list[Edge] = []
                node = successor
                while node != start:
                    node, used = parents[node]
                    path.append(used)
                path.reverse()
                return _stitch(graph, start, goal, path)
            queue.append(successor)
    return None


def _stitch(graph: ProofGraph, start: LiteralSet, goal: LiteralSet,
            path: list[Edge]) -> PathResult:
    """Compose the path's plans and splice their derivations together with
    weakening at junctions and composition along the chain."""
    builder = DerivationBuilder()
    if not path:
        index = builder.add(
            Triple(start, EMPTY, start), Justification(AXIOM1)
        )
        if goal != start:
            index = builder.add(
                Triple(start, EMPTY, goal), Justification(RULE6, (index,))
            )
        return PathResult(
            EMPTY, builder.build(graph.domain_hash)
        )

    plan: ConditionalPlan | None = None
    acc_index = -1
    acc: Triple | None = None
    for edge in path:
        stored = builder.embed(edge.derivation)
        stored_triple = Triple(edge.pre, edge.plan, edge.post)
        source = start if acc is None else acc.post
        if edge.pre != source:
            lifted = Triple(source, edge.plan, edge.post)
            stored = builder.add(lifted, Justification(RULE6, (stored,)))
            stored_triple = lifted
        if acc is None:
            acc, acc_index = stored_triple, stored
            plan = edge.plan
        else:
            plan = normalize_plan(Seq(plan, edge.plan))
            acc = Triple(start, plan, edge.post)
            acc_index = builder.add(
                acc, Justification(RULE5, (acc_index, stored))
            )
    assert acc is not None and plan is not None
    if goal != acc.post:
        builder.add(
            Triple(start, plan, goal), Justification(RULE6, (acc_index,))
        )
    return PathResult(plan, builder.build(graph.domain_hash))


# ---------------------------------------------------------------------------
# On-disk format (.akg)


def _dump_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"


def save(graph: ProofGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(_dump_line({
            "format_version": FORMAT_VERSION,
            "kind": "proof-graph",
            "domain_hash": graph.domain_hash,
        }))
        for edge in graph.edges:
            pre, plan, post = edge.key()
            handle.write(_dump_line({
                "pre": pre,
                "plan": plan,
                "post": post,
                "derivation": derivation_to_dict(edge.derivation),
            }))


def load(path: str, domain: DomainDescription | None = None,
         validate: bool = True) -> ProofGraph:
    """Read a graph file. With a domain, the header hash is checked and, by
    default, every edge derivation is re-checked; validate=False fast-loads
    and records that the graph is unverified."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise CorruptFileError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise CorruptFileError(f"{path} is empty")
    header = _parse_record(lines[0], 1)
    if header.get("kind") != "proof-graph" or "domain_hash" not in header:
        raise CorruptFileError(f"{path} has no proof-graph header")
    if header.get("format_version") != FORMAT_VERSION:
        raise CorruptFileError(
            f"unsupported format_version {header.get('format_version')!r}"
        )
    if domain is not None and domain.digest != header["domain_hash"]:
        raise DomainMismatchError(
            f"graph is for domain {header['domain_hash']}, not {domain.digest}"
        )
    graph = ProofGraph(
        domain, domain_hash=header["domain_hash"],
        validated=bool(domain is not None and validate),
    )
    for number, line in enumerate(lines[1:], start=2):
        record = _parse_record(line, number)
        try:
            judgment = parse_triple(
                f"{record['pre']} {record['plan']} {record['post']}"
            )
            derivation = derivation_from_dict(record["derivation"])
        except KeyError as exc:
            raise CorruptFileError(
                f"{path}:{number}: missing field {exc}"
            ) from exc
        except (ParseError, ValueError, DerivationFormatError) as exc:
            raise CorruptFileError(f"{path}:{number}: {exc}") from exc
        if not isinstance(judgment, Triple):
            raise CorruptFileError(f"{path}:{number}: edge is not a Knows triple")
        if domain is not None and validate:
            graph.add_triple(judgment, derivation)
        else:
            edge = Edge(judgment.pre, judgment.plan, judgment.post, derivation)
            graph._edges[edge.key()] = edge
    return graph


def _parse_record(line: str, number: int) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorruptFileError(f"line {number}: not JSON: {exc}") from exc
    if not isinstance(record, dict):
        raise CorruptFileError(f"line {number}: not an object")
    return record
