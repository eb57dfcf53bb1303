"""Syntax for the action language A_K: fluent literals, literal sets, domain
propositions, conditional plans, queries and verification triples.

Everything here is an immutable value with structural equality, safe to share
across threads and usable as a dictionary key. Literal sets keep their
elements in a canonical order (fluent name, positive before negative) so that
equality, hashing and serialization are deterministic.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

# Name grammar shared with the parser: lowercase start, then letters, digits
# or underscores. Keywords are reserved and never valid fluent/action names.
NAME_RE = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")
RESERVED = frozenset({
    "initially", "causes", "if", "executable", "determines",
    "case", "endcase", "knows", "kwhether", "after", "KW",
})


def valid_name(name: str) -> bool:
    return bool(NAME_RE.match(name)) and name not in RESERVED


def _check_name(name: str, what: str) -> None:
    if not isinstance(name, str) or not valid_name(name):
        raise ValueError(f"invalid {what} name: {name!r}")


@dataclass(frozen=True)
class FluentLiteral:
    """A fluent name or its negation."""

    fluent: str
    positive: bool = True

    def __post_init__(self) -> None:
        _check_name(self.fluent, "fluent")

    def negate(self) -> FluentLiteral:
        return FluentLiteral(self.fluent, not self.positive)

    def sort_key(self) -> tuple[str, bool]:
        # positive literal sorts immediately before its negation
        return (self.fluent, not self.positive)

    def __str__(self) -> str:
        return self.fluent if self.positive else "~" + self.fluent


def negate(p: FluentLiteral) -> FluentLiteral:
    """Flip the sign of a literal; involutive."""
    return p.negate()


@dataclass(frozen=True)
class LiteralSet:
    """A finite set of fluent literals in canonical order.

    A set is *consistent* when it contains no literal together with its
    negation; consistency is a queryable property, not a construction
    invariant, so validators can talk about inconsistent sets.
    """

    literals: tuple[FluentLiteral, ...] = ()

    def __post_init__(self) -> None:
        canon = tuple(sorted(set(self.literals), key=FluentLiteral.sort_key))
        object.__setattr__(self, "literals", canon)

    @classmethod
    def of(cls, *literals: FluentLiteral) -> LiteralSet:
        return cls(literals)

    def __iter__(self) -> Iterator[FluentLiteral]:
        return iter(self.literals)

    def __len__(self) -> int:
        return len(self.literals)

    def __contains__(self, literal: FluentLiteral) -> bool:
        return literal in self.literals

    def is_consistent(self) -> bool:
        present = set(self.literals)
        return not any(lit.negate() in present for lit in present)

    def fluent_names(self) -> frozenset[str]:
        """The underlying fluent names, signs stripped."""
        return frozenset(lit.fluent for lit in self.literals)

    def negated(self) -> LiteralSet:
        return LiteralSet(tuple(lit.negate() for lit in self.literals))

    def union(self, other: Iterable[FluentLiteral]) -> LiteralSet:
        return LiteralSet(self.literals + tuple(other))

    def issubset(self, other: LiteralSet) -> bool:
        return set(self.literals) <= set(other.literals)

    def inner(self) -> str:
        """Comma-separated body, used inside guards and preconditions."""
        return ", ".join(str(lit) for lit in self.literals)

    def __str__(self) -> str:
        return "{" + self.inner() + "}"


def fluent_names(x: LiteralSet) -> frozenset[str]:
    """Fluent names occurring in a literal set; |result| <= |x|."""
    return x.fluent_names()


# ---------------------------------------------------------------------------
# Domain propositions


@dataclass(frozen=True)
class Initially:
    """Asserts a literal is known to hold in the initial situation."""

    literal: FluentLiteral

    def __str__(self) -> str:
        return f"initially {self.literal}"


@dataclass(frozen=True)
class Effect:
    """Effect proposition: the action makes `effect` true whenever every
    precondition literal holds."""

    action: str
    effect: FluentLiteral
    precondition: LiteralSet = LiteralSet()

    def __post_init__(self) -> None:
        _check_name(self.action, "action")

    def __str__(self) -> str:
        if len(self.precondition) == 0:
            return f"{self.action} causes {self.effect}"
        return f"{self.action} causes {self.effect} if {self.precondition.inner()}"


@dataclass(frozen=True)
class Executable:
    """Executability proposition: the action can run whenever every
    precondition literal holds."""

    action: str
    precondition: LiteralSet = LiteralSet()

    def __post_init__(self) -> None:
        _check_name(self.action, "action")

    def __str__(self) -> str:
        if len(self.precondition) == 0:
            return f"executable {self.action}"
        return f"executable {self.action} if {self.precondition.inner()}"


@dataclass(frozen=True)
class Determines:
    """Knowledge proposition: executing the action reveals whether the
    fluent holds."""

    action: str
    fluent: str

    def __post_init__(self) -> None:
        _check_name(self.action, "action")
        _check_name(self.fluent, "fluent")

    def __str__(self) -> str:
        return f"{self.action} determines {self.fluent}"


Proposition = Union[Initially, Effect, Executable, Determines]


# ---------------------------------------------------------------------------
# Conditional plans


@dataclass(frozen=True)
class Empty:
    """The empty plan."""

    def __str__(self) -> str:
        return "[]"


@dataclass(frozen=True)
class Act:
    """A single action occurrence."""

    action: str

    def __post_init__(self) -> None:
        _check_name(self.action, "action")

    def __str__(self) -> str:
        return self.action


@dataclass(frozen=True)
class CaseBranch:
    guard: LiteralSet
    body: "ConditionalPlan"


@dataclass(frozen=True)
class Seq:
    first: "ConditionalPlan"
    rest: "ConditionalPlan"

    def __str__(self) -> str:
        return plan_to_text(self)


@dataclass(frozen=True)
class Case:
    """Guarded branching. Guards must be consistent and nonempty; they are
    required to be mutually exclusive only semantically, which the evaluator
    enforces per state."""

    branches: tuple[CaseBranch, ...]

    def __post_init__(self) -> None:
        if not self.branches:
            raise ValueError("case plan needs at least one branch")
        for branch in self.branches:
            if len(branch.guard) == 0:
                raise ValueError("case guard must be nonempty")
            if not branch.guard.is_consistent():
                raise ValueError(f"inconsistent case guard {branch.guard}")

    def __str__(self) -> str:
        return plan_to_text(self)


ConditionalPlan = Union[Empty, Act, Seq, Case]

EMPTY = Empty()


def _display_atoms(plan: ConditionalPlan) -> list[ConditionalPlan]:
    if isinstance(plan, Empty):
        return []
    if isinstance(plan, Seq):
        return _display_atoms(plan.first) + _display_atoms(plan.rest)
    return [plan]


def plan_to_text(plan: ConditionalPlan) -> str:
    """Concrete DSL text for a plan; sequences are flattened."""
    atoms = _display_atoms(plan)
    if not atoms:
        return "[]"
    return "; ".join(_atom_text(a) for a in atoms)


def _atom_text(plan: ConditionalPlan) -> str:
    if isinstance(plan, Act):
        return plan.action
    if isinstance(plan, Case):
        branches = " ".join(
            f"{b.guard.inner()} -> {plan_to_text(b.body)}." for b in plan.branches
        )
        return f"case {branches} endcase"
    return "[]"


def normalize_plan(plan: ConditionalPlan) -> ConditionalPlan:
    """Drop empty units from sequences and right-associate them.

    Idempotent, and preserves plan outcomes pointwise on every a-state.
    """
    atoms = _normal_atoms(plan)
    if not atoms:
        return EMPTY
    result = atoms[-1]
    for atom in reversed(atoms[:-1]):
        result = Seq(atom, result)
    return result


def _normal_atoms(plan: ConditionalPlan) -> list[ConditionalPlan]:
    if isinstance(plan, Empty):
        return []
    if isinstance(plan, Act):
        return [plan]
    if isinstance(plan, Seq):
        return _normal_atoms(plan.first) + _normal_atoms(plan.rest)
    branches = tuple(
        CaseBranch(b.guard, normalize_plan(b.body)) for b in plan.branches
    )
    return [Case(branches)]


def is_normalized(plan: ConditionalPlan) -> bool:
    return normalize_plan(plan) == plan


# ---------------------------------------------------------------------------
# Queries and judgments


@dataclass(frozen=True)
class KnowsQuery:
    """Asks whether every goal literal becomes known true after the plan."""

    goal: LiteralSet
    plan: ConditionalPlan

    def __post_init__(self) -> None:
        if not self.goal.is_consistent():
            raise ValueError(f"inconsistent query goal {self.goal}")

    def __str__(self) -> str:
        return f"knows {self.goal} after {plan_to_text(self.plan)}"


@dataclass(frozen=True)
class KwhetherQuery:
    """Asks whether the literal becomes known (either way) after the plan."""

    literal: FluentLiteral
    plan: ConditionalPlan

    def __str__(self) -> str:
        return f"kwhether {self.literal} after {plan_to_text(self.plan)}"


Query = Union[KnowsQuery, KwhetherQuery]


@dataclass(frozen=True)
class Triple:
    """Judgment: from any state where `pre` is known, running `plan` ends in
    states where all of `post` is known."""

    pre: LiteralSet
    plan: ConditionalPlan
    post: LiteralSet

    def __post_init__(self) -> None:
        if not self.pre.is_consistent():
            raise ValueError(f"inconsistent precondition set {self.pre}")
        if not self.post.is_consistent():
            raise ValueError(f"inconsistent postcondition set {self.post}")
        if not is_normalized(self.plan):
            raise ValueError("triple plan must be normalized")

    def __str__(self) -> str:
        return f"{self.pre} {plan_to_text(self.plan)} {self.post}"


@dataclass(frozen=True)
class KWTriple:
    """Judgment: after `plan`, `literal` is known true or known false."""

    pre: LiteralSet
    plan: ConditionalPlan
    literal: FluentLiteral

    def __post_init__(self) -> None:
        if not self.pre.is_consistent():
            raise ValueError(f"inconsistent precondition set {self.pre}")
        if not is_normalized(self.plan):
            raise ValueError("triple plan must be normalized")

    def __str__(self) -> str:
        return f"{self.pre} {plan_to_text(self.plan)} {{KW {self.literal}}}"


Judgment = Union[Triple, KWTriple]


# ---------------------------------------------------------------------------
# Domain descriptions


@dataclass(frozen=True)
class DomainIssue:
    """One violated domain invariant, with the offending propositions."""

    code: str
    message: str
    propositions: tuple[Proposition, ...]

    def __str__(self) -> str:
        return self.message


class DomainValidationError(Exception):
    def __init__(self, issues: Iterable[DomainIssue]):
        self.issues = tuple(issues)
        super().__init__("; ".join(i.message for i in self.issues))


CONTRADICTORY_INITIALLY = "ContradictoryInitially"
CONTRADICTORY_EFFECTS = "ContradictoryEffects"
SENSING_OVERLAP = "SensingNonSensingOverlap"
INCONSISTENT_PRECONDITION = "InconsistentPrecondition"


@dataclass(frozen=True, eq=False)
class DomainDescription:
    """A validated domain with derived indexes.

    Constructed only through `validate_domain`; compare by `digest`.
    """

    propositions: tuple[Proposition, ...]
    sensing_actions: frozenset[str]
    non_sensing_actions: frozenset[str]
    actions: frozenset[str]
    fluents: frozenset[str]
    effects: dict[str, tuple[Effect, ...]]
    executables: dict[str, tuple[Executable, ...]]
    sensed: dict[str, frozenset[str]]
    initial: LiteralSet
    digest: str

    def is_sensing(self, action: str) -> bool:
        return action in self.sensing_actions

    def sensed_fluents(self, action: str) -> frozenset[str]:
        return self.sensed.get(action, frozenset())

    def effect_props(self, action: str) -> tuple[Effect, ...]:
        return self.effects.get(action, ())

    def exec_props(self, action: str) -> tuple[Executable, ...]:
        return self.executables.get(action, ())


def canonical_domain_text(propositions: Iterable[Proposition]) -> str:
    """Order-independent serialization used for content digests."""
    return "\n".join(sorted({f"{p}." for p in propositions}))


def domain_digest(propositions: Iterable[Proposition]) -> str:
    text = canonical_domain_text(propositions)
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def _contradictory_effects(a: Effect, b: Effect) -> bool:
    if a.action != b.action or a.effect != b.effect.negate():
        return False
    # contradictory only when no precondition of one clashes with the other,
    # i.e. both may fire in a single state
    return not any(p.negate() in b.precondition for p in a.precondition)


def validate_domain(propositions: Iterable[Proposition]) -> DomainDescription:
    """Check the four domain invariants and build the derived indexes.

    Raises DomainValidationError carrying every violated invariant together
    with the offending proposition pair.
    """
    props = tuple(propositions)
    issues: list[DomainIssue] = []

    initials = [p for p in props if isinstance(p, Initially)]
    effects = [p for p in props if isinstance(p, Effect)]
    executables = [p for p in props if isinstance(p, Executable)]
    k_props = [p for p in props if isinstance(p, Determines)]

    for i, a in enumerate(initials):
        for b in initials[i + 1:]:
            if a.literal == b.literal.negate():
                issues.append(DomainIssue(
                    CONTRADICTORY_INITIALLY,
                    f"contradictory initial knowledge: '{a}' vs '{b}'",
                    (a, b),
                ))

    for i, a in enumerate(effects):
        for b in effects[i + 1:]:
            if _contradictory_effects(a, b):
                issues.append(DomainIssue(
                    CONTRADICTORY_EFFECTS,
                    f"contradictory effect propositions: '{a}' vs '{b}'",
                    (a, b),
                ))

    for p in effects + executables:
        if not p.precondition.is_consistent():
            issues.append(DomainIssue(
                INCONSISTENT_PRECONDITION,
                f"inconsistent precondition in '{p}'",
                (p,),
            ))

    sensing = frozenset(p.action for p in k_props)
    effect_actions = frozenset(p.action for p in effects)
    for action in sorted(sensing & effect_actions):
        offenders = tuple(
            p for p in props
            if isinstance(p, (Effect, Determines)) and p.action == action
        )
        issues.append(DomainIssue(
            SENSING_OVERLAP,
            f"action '{action}' is both sensing and non-sensing",
            offenders,
        ))

    if issues:
        raise DomainValidationError(issues)

    exec_actions = frozenset(p.action for p in executables)
    actions = sensing | effect_actions | exec_actions
    non_sensing = actions - sensing

    fluents: set[str] = set()
    for p in props:
        if isinstance(p, Initially):
            fluents.add(p.literal.fluent)
        elif isinstance(p, Effect):
            fluents.add(p.effect.fluent)
            fluents.update(p.precondition.fluent_names())
        elif isinstance(p, Executable):
            fluents.update(p.precondition.fluent_names())
        else:
            fluents.add(p.fluent)

    effect_map: dict[str, tuple[Effect, ...]] = {}
    for p in effects:
        effect_map[p.action] = effect_map.get(p.action, ()) + (p,)
    exec_map: dict[str, tuple[Executable, ...]] = {}
    for p in executables:
        exec_map[p.action] = exec_map.get(p.action, ()) + (p,)
    sensed: dict[str, frozenset[str]] = {}
    for p in k_props:
        sensed[p.action] = sensed.get(p.action, frozenset()) | {p.fluent}

    initial = LiteralSet(tuple(p.literal for p in initials))

    return DomainDescription(
        propositions=props,
        sensing_actions=sensing,
        non_sensing_actions=non_sensing,
        actions=actions,
        fluents=frozenset(fluents),
        effects=effect_map,
        executables=exec_map,
        sensed=sensed,
        initial=initial,
        digest=domain_digest(props),
    )
