"""Derivation objects, a step-by-step checker for the Knows and
Knows-Whether calculi, and a prover that follows plan structure.

A derivation is a sequence of judgments, each labelled with the axiom it
instantiates or the rule and premise indices (earlier steps) it applies.
The checker re-validates every side condition against the domain, so a
derivation is trustworthy independently of whoever produced it. The prover
recurses on plan structure: axioms at actions and the empty plan, the
sensing rule over every consistent completion of the sensed fluents, the
case rule at the known-true branch, and composition through the computed
intermediate state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product
from typing import Sequence

from .core import (
    Act,
    Case,
    ConditionalPlan,
    DomainDescription,
    Empty,
    EMPTY,
    FluentLiteral,
    Judgment,
    KWTriple,
    LiteralSet,
    Seq,
    Triple,
    normalize_plan,
)
from .parser import parse_triple, serialize_triple, ParseError
from .semantics0 import (
    AState,
    Evaluator,
    SemanticsError,
    Witness,
    _lit_true,
    executable0,
    knows_failure,
    kwhether_failure,
    res0,
)

FORMAT_VERSION = 1

AXIOM1 = "AXIOM1"
AXIOM2 = "AXIOM2"
RULE3 = "RULE3"
RULE4 = "RULE4"
RULE5 = "RULE5"
RULE6 = "RULE6"
AXIOM7 = "AXIOM7"
RULE8 = "RULE8"
RULE9 = "RULE9"
RULE10 = "RULE10"
RULE11 = "RULE11"
RULE12 = "RULE12"

RULES = frozenset({
    AXIOM1, AXIOM2, RULE3, RULE4, RULE5, RULE6,
    AXIOM7, RULE8, RULE9, RULE10, RULE11, RULE12,
})


class NotSensingError(SemanticsError):
    pass


class NotDerivableError(Exception):
    """The judgment is not semantically valid, hence not derivable."""

    def __init__(self, judgment: Judgment, witness: Witness):
        self.judgment = judgment
        self.witness = witness
        super().__init__(f"not derivable: {judgment} ({witness})")


class DerivationFormatError(Exception):
    """Malformed derivation document."""


@dataclass(frozen=True)
class Justification:
    rule: str
    premises: tuple[int, ...] = ()
    branch: int | None = None


@dataclass(frozen=True)
class ProofStep:
    judgment: Judgment
    justification: Justification


@dataclass(frozen=True)
class Derivation:
    domain_hash: str
    steps: tuple[ProofStep, ...]

    def __post_init__(self) -> None:
        if not self.steps:
            raise ValueError("derivation needs at least one step")

    @property
    def final(self) -> Judgment:
        return self.steps[-1].judgment


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    code: str  # "accepted" | "domain-mismatch" | "bad-step"
    step: int | None = None
    diagnostic: str = ""

    def __str__(self) -> str:
        if self.ok:
            return "accepted"
        if self.step is None:
            return f"rejected: {self.diagnostic}"
        return f"rejected at step {self.step}: {self.diagnostic}"


def sensing_completions(domain: DomainDescription, pre: LiteralSet,
                        action: str) -> list[LiteralSet]:
    """All consistent extensions of `pre` that decide exactly the fluents the
    sensing action senses, in canonical order (sensed fluents sorted,
    positive sign enumerated first)."""
    if action not in domain.sensing_actions:
        raise NotSensingError(f"action '{action}' is not a sensing action")
    sensed = sorted(domain.sensed_fluents(action))
    completions = []
    for signs in product((True, False), repeat=len(sensed)):
        extra = tuple(FluentLiteral(f, s) for f, s in zip(sensed, signs))
        candidate = pre.union(extra)
        if candidate.is_consistent():
            completions.append(candidate)
    return completions


# ---------------------------------------------------------------------------
# Checking


def _split_leading_action(plan: ConditionalPlan) -> tuple[str, ConditionalPlan] | None:
    if isinstance(plan, Act):
        return plan.action, EMPTY
    if isinstance(plan, Seq) and isinstance(plan.first, Act):
        return plan.first.action, plan.rest
    return None


def _split_leading_case(plan: ConditionalPlan) -> tuple[Case, ConditionalPlan] | None:
    if isinstance(plan, Case):
        return plan, EMPTY
    if isinstance(plan, Seq) and isinstance(plan.first, Case):
        return plan.first, plan.rest
    return None


def _state(pre: LiteralSet) -> AState:
    return AState.from_literals(pre)


def justify_step(domain: DomainDescription, step: ProofStep,
                 context: Sequence[Judgment]) -> tuple[bool, str]:
    """Check that the step's justification is an exact axiom or rule
    instance given the previously derived judgments.

    A trailing sensing action or case plan counts as followed by the empty
    plan, so the sensing and case rules also conclude bare `a` / bare case
    judgments.
    """
    just = step.justification
    if just.rule not in RULES:
        return False, f"unknown rule {just.rule!r}"
    for idx in just.premises:
        if not 0 <= idx < len(context):
            return False, f"premise index {idx} is not an earlier step"
    cited = [context[i] for i in just.premises]
    try:
        return _JUSTIFIERS[just.rule](domain, step.judgment, just, cited)
    except SemanticsError as exc:
        return False, str(exc)


def _expect_arity(cited: list, n: int, rule: str) -> str | None:
    if len(cited) != n:
        return f"{rule} takes exactly {n} premise(s), got {len(cited)}"
    return None


def _check_axiom1(domain, j, just, cited):
    if not isinstance(j, Triple):
        return False, "AXIOM1 concludes a Knows triple"
    if cited:
        return False, "AXIOM1 takes no premises"
    if not isinstance(j.plan, Empty):
        return False, "AXIOM1 requires the empty plan"
    if j.pre != j.post:
        return False, "AXIOM1 requires identical pre and post sets"
    return True, ""


def _check_axiom2(domain, j, just, cited):
    if not isinstance(j, Triple):
        return False, "AXIOM2 concludes a Knows triple"
    if cited:
        return False, "AXIOM2 takes no premises"
    if not isinstance(j.plan, Act):
        return False, "AXIOM2 requires a single action"
    action = j.plan.action
    if action not in domain.non_sensing_actions:
        return False, f"'{action}' is not a non-sensing action"
    state = _state(j.pre)
    if not executable0(domain, action, state):
        return False, f"'{action}' is not 0-executable in {j.pre}"
    expected = res0(domain, action, state).literals()
    if j.post != expected:
        return False, f"postcondition must be the action result {expected}"
    return True, ""


def _check_sensing(domain, j, just, cited, make_premise, rule):
    split = _split_leading_action(j.plan)
    if split is None:
        return False, f"{rule} requires a plan starting with an action"
    action, rest = split
    if action not in domain.sensing_actions:
        return False, f"'{action}' is not a sensing action"
    if not executable0(domain, action, _state(j.pre)):
        return False, f"'{action}' is not 0-executable in {j.pre}"
    expected = {make_premise(comp, rest)
                for comp in sensing_completions(domain, j.pre, action)}
    cited_set = set(cited)
    missing = expected - cited_set
    if missing:
        shown = "; ".join(sorted(str(m) for m in missing))
        return False, f"MissingSensingBranch: {shown}"
    extra = cited_set - expected
    if extra:
        shown = "; ".join(sorted(str(e) for e in extra))
        return False, f"premise is not a sensing completion: {shown}"
    return True, ""


def _check_rule3(domain, j, just, cited):
    if not isinstance(j, Triple):
        return False, "RULE3 concludes a Knows triple"
    return _check_sensing(
        domain, j, just, cited,
        lambda comp, rest: Triple(comp, rest, j.post), RULE3,
    )


def _check_rule10(domain, j, just, cited):
    if not isinstance(j, KWTriple):
        return False, "RULE10 concludes a KW triple"
    return _check_sensing(
        domain, j, just, cited,
        lambda comp, rest: KWTriple(comp, rest, j.literal), RULE10,
    )


def _check_case(domain, j, just, cited, make_premise, rule):
    err = _expect_arity(cited, 1, rule)
    if err:
        return False, err
    split = _split_leading_case(j.plan)
    if split is None:
        return False, f"{rule} requires a plan starting with a case plan"
    case, rest = split
    if just.branch is None or not 0 <= just.branch < len(case.branches):
        return False, f"{rule} needs a valid branch index"
    branch = case.branches[just.branch]
    if not branch.guard.issubset(j.pre):
        return False, (
            f"guard {branch.guard} is not contained in {j.pre}"
        )
    expected = make_premise(normalize_plan(Seq(branch.body, rest)))
    if cited[0] != expected:
        return False, f"premise must be {expected}"
    return True, ""


def _check_rule4(domain, j, just, cited):
    if not isinstance(j, Triple):
        return False, "RULE4 concludes a Knows triple"
    return _check_case(
        domain, j, just, cited,
        lambda plan: Triple(j.pre, plan, j.post), RULE4,
    )


def _check_rule12(domain, j, just, cited):
    if not isinstance(j, KWTriple):
        return False, "RULE12 concludes a KW triple"
    return _check_case(
        domain, j, just, cited,
        lambda plan: KWTriple(j.pre, plan, j.literal), RULE12,
    )


def _check_rule5(domain, j, just, cited):
    if not isinstance(j, Triple):
        return False, "RULE5 concludes a Knows triple"
    err = _expect_arity(cited, 2, RULE5)
    if err:
        return False, err
    first, second = cited
    if not (isinstance(first, Triple) and isinstance(second, Triple)):
        return False, "RULE5 premises must be Knows triples"
    if first.pre != j.pre:
        return False, "first premise must start from the conclusion's set"
    if second.post != j.post:
        return False, "second premise must end at the conclusion's set"
    if first.post != second.pre:
        return False, (
            f"intermediate sets differ: {first.post} vs {second.pre}"
        )
    if normalize_plan(Seq(first.plan, second.plan)) != j.plan:
        return False, "premise plans do not compose to the conclusion plan"
    return True, ""


def _check_rule6(domain, j, just, cited):
    if not isinstance(j, Triple):
        return False, "RULE6 concludes a Knows triple"
    err = _expect_arity(cited, 1, RULE6)
    if err:
        return False, err
    premise = cited[0]
    if not isinstance(premise, Triple):
        return False, "RULE6 premise must be a Knows triple"
    if premise.plan != j.plan:
        return False, "RULE6 does not change the plan"
    if not premise.pre.issubset(j.pre):
        return False, f"premise set {premise.pre} must be contained in {j.pre}"
    if not j.post.issubset(premise.post):
        return False, f"conclusion set {j.post} must be contained in {premise.post}"
    return True, ""


def _check_axiom7(domain, j, just, cited):
    if not isinstance(j, KWTriple):
        return False, "AXIOM7 concludes a KW triple"
    if cited:
        return False, "AXIOM7 takes no premises"
    if not isinstance(j.plan, Act):
        return False, "AXIOM7 requires a single action"
    action = j.plan.action
    if action not in domain.sensing_actions:
        return False, f"'{action}' is not a sensing action"
    if not executable0(domain, action, _state(j.pre)):
        return False, f"'{action}' is not 0-executable in {j.pre}"
    if not j.literal.positive:
        return False, "AXIOM7 concludes KW of a plain fluent"
    if j.literal.fluent not in domain.sensed_fluents(action):
        return False, f"'{action}' does not determine '{j.literal.fluent}'"
    return True, ""


def _check_rule8(domain, j, just, cited):
    if not isinstance(j, KWTriple):
        return False, "RULE8 concludes a KW triple"
    err = _expect_arity(cited, 1, RULE8)
    if err:
        return False, err
    premise = cited[0]
    expected = Triple(j.pre, j.plan, LiteralSet.of(j.literal))
    if premise != expected:
        return False, f"premise must be {expected}"
    return True, ""


def _check_rule9(domain, j, just, cited):
    if not isinstance(j, KWTriple):
        return False, "RULE9 concludes a KW triple"
    err = _expect_arity(cited, 1, RULE9)
    if err:
        return False, err
    premise = cited[0]
    expected = KWTriple(j.pre, j.plan, j.literal.negate())
    if premise != expected:
        return False, f"premise must be {expected}"
    return True, ""


def _check_rule11(domain, j, just, cited):
    if not isinstance(j, KWTriple):
        return False, "RULE11 concludes a KW triple"
    err = _expect_arity(cited, 2, RULE11)
    if err:
        return False, err
    first, second = cited
    if not isinstance(first, Triple) or not isinstance(second, KWTriple):
        return False, "RULE11 premises are a Knows triple then a KW triple"
    if first.pre != j.pre:
        return False, "first premise must start from the conclusion's set"
    if second.literal != j.literal:
        return False, "second premise must decide the conclusion's literal"
    if first.post != second.pre:
        return False, (
            f"intermediate sets differ: {first.post} vs {second.pre}"
        )
    if normalize_plan(Seq(first.plan, second.plan)) != j.plan:
        return False, "premise plans do not compose to the conclusion plan"
    return True, ""


_JUSTIFIERS = {
    AXIOM1: _check_axiom1,
    AXIOM2: _check_axiom2,
    RULE3: _check_rule3,
    RULE4: _check_rule4,
    RULE5: _check_rule5,
    RULE6: _check_rule6,
    AXIOM7: _check_axiom7,
    RULE8: _check_rule8,
    RULE9: _check_rule9,
    RULE10: _check_rule10,
    RULE11: _check_rule11,
    RULE12: _check_rule12,
}


def check_derivation(domain: DomainDescription,
                     derivation: Derivation) -> CheckResult:
    """Accept iff the derivation is for this domain and every step is a
    valid axiom or rule instance citing earlier steps only."""
    if derivation.domain_hash != domain.digest:
        return CheckResult(
            False, "domain-mismatch", None,
            f"derivation is for domain {derivation.domain_hash}, "
            f"not {domain.digest}",
        )
    context: list[Judgment] = []
    for index, step in enumerate(derivation.steps):
        for premise in step.justification.premises:
            if premise >= index:
                return CheckResult(
                    False, "bad-step", index,
                    f"premise index {premise} is not an earlier step",
                )
        ok, diagnostic = justify_step(domain, step, context)
        if not ok:
            return CheckResult(False, "bad-step", index, diagnostic)
        context.append(step.judgment)
    return CheckResult(True, "accepted")


# ---------------------------------------------------------------------------
# Proving


class DerivationBuilder:
    """Accumulates steps, reusing the index of any already-derived judgment."""

    def __init__(self) -> None:
        self.steps: list[ProofStep] = []
        self._by_judgment: dict[Judgment, int] = {}

    def add(self, judgment: Judgment, justification: Justification) -> int:
        existing = self._by_judgment.get(judgment)
        if existing is not None:
            return existing
        self.steps.append(ProofStep(judgment, justification))
        index = len(self.steps) - 1
        self._by_judgment[judgment] = index
        return index

    def embed(self, derivation: Derivation) -> int:
        """Append a whole derivation, remapping its premise indices; returns
        the index of its final judgment."""
        mapping: dict[int, int] = {}
        for old_index, step in enumerate(derivation.steps):
            just = step.justification
            remapped = Justification(
                just.rule,
                tuple(mapping[p] for p in just.premises),
                just.branch,
            )
            mapping[old_index] = self.add(step.judgment, remapped)
        return mapping[len(derivation.steps) - 1]

    def build(self, domain_hash: str) -> Derivation:
        return Derivation(domain_hash, tuple(self.steps))


class _Prover:
    def __init__(self, domain: DomainDescription, evaluator: Evaluator):
        self.domain = domain
        self.ev = evaluator
        self.builder = DerivationBuilder()

    # All prove_* methods assume the judgment they are asked for is
    # semantically valid; the public entry points establish that first.

    def prove_knows(self, pre: LiteralSet, plan: ConditionalPlan,
                    post: LiteralSet) -> int:
        judgment = Triple(pre, plan, post)
        done = self.builder._by_judgment.get(judgment)
        if done is not None:
            return done
        if isinstance(plan, Empty):
            base = self.builder.add(
                Triple(pre, EMPTY, pre), Justification(AXIOM1)
            )
            if post == pre:
                return base
            return self.builder.add(judgment, Justification(RULE6, (base,)))
        if isinstance(plan, Act):
            if plan.action in self.domain.sensing_actions:
                return self._knows_sensing(pre, plan.action, EMPTY, post)
            return self._knows_action_axiom(pre, plan.action, post)
        if isinstance(plan, Case):
            return self._knows_case(pre, plan, EMPTY, post)
        # sequence: dispatch on the head
        head, rest = plan.first, plan.rest
        if isinstance(head, Act):
            if head.action in self.domain.sensing_actions:
                return self._knows_sensing(pre, head.action, rest, post)
            state = AState.from_literals(pre)
            mid = res0(self.domain, head.action, state).literals()
            first = self.builder.add(
                Triple(pre, head, mid), Justification(AXIOM2)
            )
            second = self.prove_knows(mid, rest, post)
            return self.builder.add(
                judgment, Justification(RULE5, (first, second))
            )
        return self._knows_case(pre, head, rest, post)

    def _knows_action_axiom(self, pre: LiteralSet, action: str,
                            post: LiteralSet) -> int:
        state = AState.from_literals(pre)
        result = res0(self.domain, action, state).literals()
        base = self.builder.add(
            Triple(pre, Act(action), result), Justification(AXIOM2)
        )
        if post == result:
            return base
        return self.builder.add(
            Triple(pre, Act(action), post), Justification(RULE6, (base,))
        )

    def _knows_sensing(self, pre: LiteralSet, action: str,
                       rest: ConditionalPlan, post: LiteralSet) -> int:
        premises = tuple(
            self.prove_knows(completion, rest, post)
            for completion in sensing_completions(self.domain, pre, action)
        )
        plan = normalize_plan(Seq(Act(action), rest))
        return self.builder.add(
            Triple(pre, plan, post), Justification(RULE3, premises)
        )

    def _knows_case(self, pre: LiteralSet, case: Case,
                    rest: ConditionalPlan, post: LiteralSet) -> int:
        index = self._true_branch(case, pre)
        body = case.branches[index].body
        premise = self.prove_knows(pre, normalize_plan(Seq(body, rest)), post)
        plan = normalize_plan(Seq(case, rest))
        return self.builder.add(
            Triple(pre, plan, post),
            Justification(RULE4, (premise,), branch=index),
        )

    def _true_branch(self, case: Case, pre: LiteralSet) -> int:
        for index, branch in enumerate(case.branches):
            if branch.guard.issubset(pre):
                return index
        raise AssertionError("no true guard, claim was not valid")

    def prove_kw(self, pre: LiteralSet, plan: ConditionalPlan,
                 literal: FluentLiteral) -> int:
        judgment = KWTriple(pre, plan, literal)
        done = self.builder._by_judgment.get(judgment)
        if done is not None:
            return done
        if isinstance(plan, Empty):
            return self._kw_via_knows(pre, plan, literal)
        if isinstance(plan, Act):
            decided = literal in pre or literal.negate() in pre
            if decided or plan.action in self.domain.non_sensing_actions:
                return self._kw_via_knows(pre, plan, literal)
            # sensing action deciding a previously unknown literal
            axiom = self.builder.add(
                KWTriple(pre, plan, FluentLiteral(literal.fluent)),
                Justification(AXIOM7),
            )
            if literal.positive:
                return axiom
            return self.builder.add(judgment, Justification(RULE9, (axiom,)))
        if isinstance(plan, Case):
            return self._kw_case(pre, plan, EMPTY, literal)
        head, rest = plan.first, plan.rest
        if isinstance(head, Act):
            if head.action in self.domain.sensing_actions:
                premises = tuple(
                    self.prove_kw(completion, rest, literal)
                    for completion in sensing_completions(
                        self.domain, pre, head.action
                    )
                )
                return self.builder.add(
                    judgment, Justification(RULE10, premises)
                )
            state = AState.from_literals(pre)
            mid = res0(self.domain, head.action, state).literals()
            first = self.builder.add(
                Triple(pre, head, mid), Justification(AXIOM2)
            )
            second = self.prove_kw(mid, rest, literal)
            return self.builder.add(
                judgment, Justification(RULE11, (first, second))
            )
        return self._kw_case(pre, head, rest, literal)

    def _kw_via_knows(self, pre: LiteralSet, plan: ConditionalPlan,
                      literal: FluentLiteral) -> int:
        """Derive KW p from a Knows derivation of {p} or {~p}."""
        for candidate in (literal, literal.negate()):
            if self._known_after(pre, plan, candidate):
                base = self.prove_knows(pre, plan, LiteralSet.of(candidate))
                step = self.builder.add(
                    KWTriple(pre, plan, candidate),
                    Justification(RULE8, (base,)),
                )
                if candidate == literal:
                    return step
                return self.builder.add(
                    KWTriple(pre, plan, literal),
                    Justification(RULE9, (step,)),
                )
        raise AssertionError("literal undecided, claim was not valid")

    def _known_after(self, pre: LiteralSet, plan: ConditionalPlan,
                     literal: FluentLiteral) -> bool:
        out = self.ev.run(plan, AState.from_literals(pre))
        return not out.bottom and all(_lit_true(literal, s) for s in out.states)

    def _kw_case(self, pre: LiteralSet, case: Case, rest: ConditionalPlan,
                 literal: FluentLiteral) -> int:
        index = self._true_branch(case, pre)
        body = case.branches[index].body
        premise = self.prove_kw(pre, normalize_plan(Seq(body, rest)), literal)
        plan = normalize_plan(Seq(case, rest))
        return self.builder.add(
            KWTriple(pre, plan, literal),
            Justification(RULE12, (premise,), branch=index),
        )


def derive_knows(domain: DomainDescription, pre: LiteralSet,
                 plan: ConditionalPlan, post: LiteralSet,
                 evaluator: Evaluator | None = None) -> Derivation:
    """Produce a checker-accepted derivation of {pre} plan {post}, or raise
    NotDerivableError with a semantic counterexample."""
    plan = normalize_plan(plan)
    ev = evaluator or Evaluator(domain)
    witness = knows_failure(domain, pre, plan, post, evaluator=ev)
    if witness is not None:
        raise NotDerivableError(Triple(pre, plan, post), witness)
    prover = _Prover(domain, ev)
    prover.prove_knows(pre, plan, post)
    return prover.builder.build(domain.digest)


def derive_kw(domain: DomainDescription, pre: LiteralSet,
              plan: ConditionalPlan, literal: FluentLiteral,
              evaluator: Evaluator | None = None) -> Derivation:
    """KW analogue of derive_knows."""
    plan = normalize_plan(plan)
    ev = evaluator or Evaluator(domain)
    witness = kwhether_failure(domain, pre, plan, literal, evaluator=ev)
    if witness is not None:
        raise NotDerivableError(KWTriple(pre, plan, literal), witness)
    prover = _Prover(domain, ev)
    prover.prove_kw(pre, plan, literal)
    return prover.builder.build(domain.digest)


# ---------------------------------------------------------------------------
# Serialization (JSON document, judgments in DSL surface syntax)


def derivation_to_dict(derivation: Derivation) -> dict:
    steps = []
    for step in derivation.steps:
        record: dict = {
            "judgment": serialize_triple(step.judgment),
            "rule": step.justification.rule,
            "premises": list(step.justification.premises),
        }
        if step.justification.branch is not None:
            record["branch"] = step.justification.branch
        steps.append(record)
    return {
        "format_version": FORMAT_VERSION,
        "kind": "derivation",
        "domain_hash": derivation.domain_hash,
        "steps": steps,
    }


def derivation_from_dict(data: dict) -> Derivation:
    if not isinstance(data, dict):
        raise DerivationFormatError("derivation document must be an object")
    if data.get("format_version") != FORMAT_VERSION:
        raise DerivationFormatError(
            f"unsupported format_version {data.get('format_version')!r}"
        )
    domain_hash = data.get("domain_hash")
    raw_steps = data.get("steps")
    if not isinstance(domain_hash, str) or not isinstance(raw_steps, list):
        raise DerivationFormatError("missing domain_hash or steps")
    if not raw_steps:
        raise DerivationFormatError("derivation has no steps")
    steps = []
    for i, record in enumerate(raw_steps):
        if not isinstance(record, dict):
            raise DerivationFormatError(f"step {i} is not an object")
        try:
            judgment = parse_triple(record["judgment"])
            rule = record["rule"]
            premises = tuple(record.get("premises", ()))
            branch = record.get("branch")
        except (KeyError, TypeError) as exc:
            raise DerivationFormatError(f"step {i}: missing field {exc}") from exc
        except (ParseError, ValueError) as exc:
            raise DerivationFormatError(f"step {i}: {exc}") from exc
        if rule not in RULES:
            raise DerivationFormatError(f"step {i}: unknown rule {rule!r}")
        if not all(isinstance(p, int) and p >= 0 for p in premises):
            raise DerivationFormatError(f"step {i}: bad premise indices")
        if branch is not None and not isinstance(branch, int):
            raise DerivationFormatError(f"step {i}: bad branch index")
        steps.append(ProofStep(judgment, Justification(rule, premises, branch)))
    return Derivation(domain_hash, tuple(steps))


def save_derivation(derivation: Derivation, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(derivation_to_dict(derivation), handle,
                  indent=2, sort_keys=True)
        handle.write("\n")


def load_derivation(path: str) -> Derivation:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise DerivationFormatError(f"not a JSON document: {exc}") from exc
    return derivation_from_dict(data)
