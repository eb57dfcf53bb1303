"""0-approximation semantics for A_K.

An a-state is a pair (T, F) of disjoint fluent-name sets: fluents in T are
known true, fluents in F known false, everything else unknown. Executing a
non-sensing action rewrites the state through its effect sets; executing a
sensing action splits the state into every completion of the sensed fluents;
a non-executable action (or a case plan with no true guard) yields bottom.

Evaluation is pure. `Evaluator` memoizes plan outcomes for one domain and is
meant to be confined to a single thread; the module-level functions build a
private instance per call, so concurrent calls over a shared domain always
see sequential results.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import product
from typing import Iterable

from .core import (
    Act,
    Case,
    ConditionalPlan,
    DomainDescription,
    Empty,
    FluentLiteral,
    LiteralSet,
    Seq,
)


class SemanticsError(Exception):
    """Base class for misuse of the transition functions."""


class UnknownActionError(SemanticsError):
    pass


class NotNonSensingError(SemanticsError):
    pass


class NotExecutableError(SemanticsError):
    pass


class MultipleGuardsTrueError(SemanticsError):
    """More than one case guard holds in a state, which breaks the
    mutual-exclusivity side condition on case plans."""

    def __init__(self, state: "AState", guards: tuple[LiteralSet, ...]):
        self.state = state
        self.guards = guards
        shown = ", ".join(str(g) for g in guards)
        super().__init__(f"guards {shown} all hold in state {state}")


class Truth(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class AState:
    """Approximate state: fluents known true / known false."""

    true_set: frozenset[str]
    false_set: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "true_set", frozenset(self.true_set))
        object.__setattr__(self, "false_set", frozenset(self.false_set))
        overlap = self.true_set & self.false_set
        if overlap:
            raise ValueError(f"a-state has overlapping T and F: {sorted(overlap)}")

    @classmethod
    def from_literals(cls, literals: LiteralSet) -> AState:
        if not literals.is_consistent():
            raise ValueError(f"inconsistent literal set {literals}")
        return cls(
            frozenset(p.fluent for p in literals if p.positive),
            frozenset(p.fluent for p in literals if not p.positive),
        )

    def literals(self) -> LiteralSet:
        pos = tuple(FluentLiteral(f) for f in self.true_set)
        neg = tuple(FluentLiteral(f, False) for f in self.false_set)
        return LiteralSet(pos + neg)

    def known(self) -> frozenset[str]:
        return self.true_set | self.false_set

    def sort_key(self) -> tuple[tuple[str, ...], tuple[str, ...]]:
        return (tuple(sorted(self.true_set)), tuple(sorted(self.false_set)))

    def __str__(self) -> str:
        return str(self.literals())


class _Bottom:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "BOTTOM"


BOTTOM = _Bottom()


@dataclass(frozen=True)
class StateOutcome:
    """Result of running a plan: a set of a-states, possibly alongside
    bottom when some execution path got stuck."""

    states: frozenset[AState]
    bottom: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", frozenset(self.states))
        if not self.states and not self.bottom:
            raise ValueError("outcome must contain a state or bottom")

    @classmethod
    def single(cls, state: AState) -> StateOutcome:
        return cls(frozenset((state,)))

    @classmethod
    def stuck(cls) -> StateOutcome:
        return cls(frozenset(), True)

    def is_executable(self) -> bool:
        return not self.bottom

    def sorted_states(self) -> list[AState]:
        return sorted(self.states, key=AState.sort_key)


@dataclass(frozen=True)
class EffectSets:
    """Definite (e) and possible (f) positive/negative effects of one
    non-sensing action in one state; e_plus <= f_plus, e_minus <= f_minus."""

    e_plus: frozenset[str]
    e_minus: frozenset[str]
    f_plus: frozenset[str]
    f_minus: frozenset[str]


def truth(literal: FluentLiteral, state: AState) -> Truth:
    if literal.fluent in state.true_set:
        return Truth.TRUE if literal.positive else Truth.FALSE
    if literal.fluent in state.false_set:
        return Truth.FALSE if literal.positive else Truth.TRUE
    return Truth.UNKNOWN


def _lit_true(literal: FluentLiteral, state: AState) -> bool:
    side = state.true_set if literal.positive else state.false_set
    return literal.fluent in side


def _lit_possibly_true(literal: FluentLiteral, state: AState) -> bool:
    side = state.false_set if literal.positive else state.true_set
    return literal.fluent not in side


def set_true(literals: LiteralSet, state: AState) -> bool:
    return all(_lit_true(p, state) for p in literals)


def leq(s1: AState, s2: AState) -> bool:
    """Extension order: s2 knows at least as much as s1."""
    return s1.true_set <= s2.true_set and s1.false_set <= s2.false_set


def set_leq(states1: Iterable[AState], states2: Iterable[AState]) -> bool:
    """Every state of states2 extends some state of states1."""
    lower = list(states1)
    return all(any(leq(s, d) for s in lower) for d in states2)


def _require_action(domain: DomainDescription, action: str) -> None:
    if action not in domain.actions:
        raise UnknownActionError(f"action '{action}' does not occur in the domain")


def executable0(domain: DomainDescription, action: str, state: AState) -> bool:
    """True iff some executability proposition for the action has all of its
    preconditions true in the state. No proposition means never executable."""
    _require_action(domain, action)
    return any(
        set_true(p.precondition, state) for p in domain.exec_props(action)
    )


def effect_sets(domain: DomainDescription, action: str, state: AState) -> EffectSets:
    if action in domain.sensing_actions:
        raise NotNonSensingError(f"action '{action}' is a sensing action")
    _require_action(domain, action)
    e_plus, e_minus, f_plus, f_minus = set(), set(), set(), set()
    for prop in domain.effect_props(action):
        definite = set_true(prop.precondition, state)
        possible = all(_lit_possibly_true(p, state) for p in prop.precondition)
        target = prop.effect.fluent
        if prop.effect.positive:
            if definite:
                e_plus.add(target)
            if possible:
                f_plus.add(target)
        else:
            if definite:
                e_minus.add(target)
            if possible:
                f_minus.add(target)
    return EffectSets(
        frozenset(e_plus), frozenset(e_minus),
        frozenset(f_plus), frozenset(f_minus),
    )


def res0(domain: DomainDescription, action: str, state: AState) -> AState:
    """Deterministic successor state of a 0-executable non-sensing action:
    definite effects are added, fluents with a possible opposite effect drop
    out of the known sets."""
    eff = effect_sets(domain, action, state)
    if not executable0(domain, action, state):
        raise NotExecutableError(
            f"action '{action}' is not 0-executable in {state}"
        )
    return AState(
        (state.true_set | eff.e_plus) - eff.f_minus,
        (state.false_set | eff.e_minus) - eff.f_plus,
    )


def phi0(domain: DomainDescription, action: str, state: AState) -> StateOutcome:
    """One-step transition. Non-executable actions yield bottom; a sensing
    action yields every extension of the state that decides exactly its
    sensed fluents, 2**u states for u unknown sensed fluents."""
    if not executable0(domain, action, state):
        return StateOutcome.stuck()
    if action in domain.sensing_actions:
        unknown = sorted(domain.sensed_fluents(action) - state.known())
        states = []
        for signs in product((True, False), repeat=len(unknown)):
            extra_true = {f for f, s in zip(unknown, signs) if s}
            extra_false = {f for f, s in zip(unknown, signs) if not s}
            states.append(AState(
                state.true_set | extra_true, state.false_set | extra_false
            ))
        return StateOutcome(frozenset(states))
    return StateOutcome.single(res0(domain, action, state))


class Evaluator:
    """Plan evaluation with memoized outcomes, for one domain.

    Not thread-safe; confine an instance to one thread (the module-level
    helpers build a fresh instance per call).
    """

    def __init__(self, domain: DomainDescription):
        self.domain = domain
        self._memo: dict[tuple[ConditionalPlan, AState], StateOutcome] = {}

    def run(self, plan: ConditionalPlan, state: AState) -> StateOutcome:
        key = (plan, state)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        out = self._eval(plan, state)
        self._memo[key] = out
        return out

    def _eval(self, plan: ConditionalPlan, state: AState) -> StateOutcome:
        if isinstance(plan, Empty):
            return StateOutcome.single(state)
        if isinstance(plan, Act):
            return phi0(self.domain, plan.action, state)
        if isinstance(plan, Case):
            live = [b for b in plan.branches if set_true(b.guard, state)]
            if len(live) > 1:
                raise MultipleGuardsTrueError(
                    state, tuple(b.guard for b in live)
                )
            if not live:
                return StateOutcome.stuck()
            return self.run(live[0].body, state)
        out = self.run(plan.first, state)
        states: set[AState] = set()
        bottom = out.bottom
        for mid in out.states:
            tail = self.run(plan.rest, mid)
            states.update(tail.states)
            bottom = bottom or tail.bottom
        return StateOutcome(frozenset(states), bottom)

    def run_states(self, plan: ConditionalPlan,
                   states: Iterable[AState]) -> StateOutcome:
        collected: set[AState] = set()
        bottom = False
        for state in states:
            out = self.run(plan, state)
            collected.update(out.states)
            bottom = bottom or out.bottom
        return StateOutcome(frozenset(collected), bottom)


def phi0_hat(domain: DomainDescription, plan: ConditionalPlan,
             state: AState | _Bottom) -> StateOutcome:
    """Plan-level transition; bottom is absorbing."""
    if state is BOTTOM:
        return StateOutcome.stuck()
    return Evaluator(domain).run(plan, state)


def phi0_hat_states(domain: DomainDescription, plan: ConditionalPlan,
                    states: Iterable[AState]) -> StateOutcome:
    return Evaluator(domain).run_states(plan, states)


def least_initial(domain: DomainDescription) -> AState:
    """The least initial a-state, read off the initially-propositions."""
    return AState.from_literals(domain.initial)


# ---------------------------------------------------------------------------
# Entailment and failure witnesses


@dataclass(frozen=True)
class Witness:
    """Counterexample for a failed Knows/Kwhether claim."""

    kind: str  # "stuck" or "goal"
    state: AState
    detail: str

    def __str__(self) -> str:
        return f"{self.detail} in state {self.state}"


def entails_knows(domain: DomainDescription, pre: LiteralSet,
                  plan: ConditionalPlan, post: LiteralSet,
                  evaluator: Evaluator | None = None) -> bool:
    """Whether every run of the plan from `pre` terminates with all of
    `post` known true. Evaluated on the single a-state determined by `pre`,
    which by monotonicity decides the claim for every extension."""
    ev = evaluator or Evaluator(domain)
    out = ev.run(plan, AState.from_literals(pre))
    return not out.bottom and all(set_true(post, s) for s in out.states)


def entails_kwhether(domain: DomainDescription, pre: LiteralSet,
                     plan: ConditionalPlan, literal: FluentLiteral,
                     evaluator: Evaluator | None = None) -> bool:
    """Whether every run of the plan from `pre` decides the literal; the
    claim is symmetric in the literal and its negation."""
    ev = evaluator or Evaluator(domain)
    out = ev.run(plan, AState.from_literals(pre))
    return not out.bottom and all(
        literal.fluent in s.known() for s in out.states
    )


def knows_failure(domain: DomainDescription, pre: LiteralSet,
                  plan: ConditionalPlan, post: LiteralSet,
                  evaluator: Evaluator | None = None) -> Witness | None:
    ev = evaluator or Evaluator(domain)
    start = AState.from_literals(pre)
    out = ev.run(plan, start)
    if out.bottom:
        return _stuck_witness(ev, plan, start)
    for state in out.sorted_states():
        for p in post:
            if not _lit_true(p, state):
                return Witness("goal", state, f"literal '{p}' is not known true")
    return None


def kwhether_failure(domain: DomainDescription, pre: LiteralSet,
                     plan: ConditionalPlan, literal: FluentLiteral,
                     evaluator: Evaluator | None = None) -> Witness | None:
    ev = evaluator or Evaluator(domain)
    start = AState.from_literals(pre)
    out = ev.run(plan, start)
    if out.bottom:
        return _stuck_witness(ev, plan, start)
    for state in out.sorted_states():
        if literal.fluent not in state.known():
            return Witness("goal", state, f"'{literal.fluent}' is still unknown")
    return None


def _stuck_witness(ev: Evaluator, plan: ConditionalPlan,
                   state: AState) -> Witness:
    # invariant: ev.run(plan, state) contains bottom
    if isinstance(plan, Act):
        return Witness(
            "stuck", state, f"action '{plan.action}' is not 0-executable"
        )
    if isinstance(plan, Case):
        live = [b for b in plan.branches if set_true(b.guard, state)]
        if not live:
            return Witness("stuck", state, "no case guard holds")
        return _stuck_witness(ev, live[0].body, state)
    if isinstance(plan, Seq):
        head = ev.run(plan.first, state)
        if head.bottom:
            return _stuck_witness(ev, plan.first, state)
        for mid in head.sorted_states():
            if ev.run(plan.rest, mid).bottom:
                return _stuck_witness(ev, plan.rest, mid)
    raise AssertionError("no stuck point found")  # pragma: no cover
