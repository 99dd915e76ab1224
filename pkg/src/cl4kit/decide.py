"""Provability decision procedure for blind-quantifier-free input, with a
budgeted best-effort extension to formulas containing A/E.

The search recurses on aggregate complexity, testing the four rules in the
fixed order A, B1, B2, C (first success wins, occurrences left to right).
Positive answers come with a machine-checkable proof.  In certified mode
(blind-free input) stability is decided exactly, so the answer is never
Unknown; the extension marks any branch whose stability check ran out of
budget, and a failed search with a marked branch reports Unknown instead
of Unprovable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .calculus import (
    CL4,
    Proof,
    ProofStep,
    RULE_A,
    RuleApplication,
    b1_targets,
    b2_scope_ok,
    b2_targets,
    c_pairs,
    rule_a_premises,
)
from .classical import Budget, elementarize, is_stable, tautology_qf
from .syntax import (
    Atom,
    Const,
    Formula,
    Term,
    Var,
    aggregate_complexity,
    constants,
    elem_letter,
    free_variables,
    fresh_elem_name,
    fresh_variable,
    is_blind_free,
    is_formula,
    letter_names,
    pretty,
    replace_at,
    substitute,
    variables,
)


@dataclass(frozen=True)
class Decision:
    status: str  # "provable" | "unprovable" | "unknown"
    proof: Proof | None = None
    reason: str = ""

    @property
    def is_provable(self) -> bool:
        return self.status == "provable"


@dataclass
class _Derivation:
    formula: Formula
    rule: RuleApplication
    children: list["_Derivation"] = field(default_factory=list)


class _DepthExceeded(AssertionError):
    pass


@dataclass
class _Search:
    certified: bool
    budget: Budget
    max_depth: int
    tainted: bool = False
    trace: list[str] | None = None
    stats: dict | None = None

    def note(self, depth: int, message: str) -> None:
        if self.trace is not None:
            self.trace.append("  " * depth + message)

    def observe(self, depth: int) -> None:
        if self.stats is not None:
            self.stats["nodes"] = self.stats.get("nodes", 0) + 1
            self.stats["max_depth"] = max(self.stats.get("max_depth", 0), depth)
            self.stats["depth_bound"] = self.max_depth


def _stable(f: Formula, search: _Search) -> bool:
    """Stability test; exact on quantifier-free elementarizations, budgeted
    otherwise.  An exhausted budget taints the search and counts as 'not
    shown stable'."""
    e = elementarize(f)
    if is_blind_free(e):
        return tautology_qf(e)
    verdict = is_stable(f, search.budget)
    if verdict.is_unknown:
        search.tainted = True
        return False
    return verdict.is_valid


def _b2_candidates(f: Formula) -> list[Term]:
    """Free variables of f, constants of f, plus one fresh variable."""
    out: list[Term] = [Var(x) for x in sorted(free_variables(f))]
    out.extend(Const(c) for c in sorted(constants(f)))
    out.append(Var(fresh_variable(variables(f))))
    return out


def _prove(f: Formula, depth: int, search: _Search) -> _Derivation | None:
    if depth > search.max_depth:
        raise _DepthExceeded(
            f"recursion depth {depth} exceeds aggregate complexity bound {search.max_depth}"
        )
    search.observe(depth)

    # Rule A
    if _stable(f, search):
        premises = rule_a_premises(f)
        children = []
        for req in premises:
            sub = _prove(req.formula, depth + 1, search)
            if sub is None:
                break
            children.append(sub)
        else:
            search.note(depth, f"A: {pretty(f)}")
            return _Derivation(f, RULE_A, children)

    # Rule B1
    for occ in b1_targets(f):
        for i in range(1, len(occ.quasiatom.parts) + 1):
            premise = replace_at(f, occ.address, occ.quasiatom.parts[i - 1])
            sub = _prove(premise, depth + 1, search)
            if sub is not None:
                search.note(depth, f"B1[{i}]: {pretty(f)}")
                return _Derivation(
                    f, RuleApplication("B1", addr=occ.address, index=i), [sub]
                )

    # Rule B2
    for occ in b2_targets(f):
        for t in _b2_candidates(f):
            if not b2_scope_ok(f, occ.address, t):
                continue
            qa = occ.quasiatom
            premise = replace_at(f, occ.address, substitute(qa.body, qa.var, t))
            sub = _prove(premise, depth + 1, search)
            if sub is not None:
                search.note(depth, f"B2[{t}]: {pretty(f)}")
                return _Derivation(
                    f, RuleApplication("B2", addr=occ.address, term=t), [sub]
                )

    # Rule C
    taken = letter_names(f) | {"T", "F"}
    for pos, neg in c_pairs(f):
        letter = pos.quasiatom.letter
        q = elem_letter(fresh_elem_name(taken), letter.arity)
        premise = replace_at(f, pos.address, Atom(q, pos.quasiatom.args))
        premise = replace_at(premise, neg.address, Atom(q, neg.quasiatom.args))
        sub = _prove(premise, depth + 1, search)
        if sub is not None:
            search.note(depth, f"C[{q.name}]: {pretty(f)}")
            return _Derivation(
                f,
                RuleApplication("C", pos=pos.address, neg=neg.address, elem=q.name),
                [sub],
            )

    search.note(depth, f"fail: {pretty(f)}")
    return None


def _linearize(root: _Derivation) -> Proof:
    steps: list[ProofStep] = []
    index: dict[Formula, int] = {}

    def emit(node: _Derivation) -> int:
        if node.formula in index:
            return index[node.formula]
        child_ids = tuple(emit(c) for c in node.children)
        step_id = len(steps) + 1
        steps.append(ProofStep(step_id, node.formula, node.rule, child_ids))
        index[node.formula] = step_id
        return step_id

    emit(root)
    return Proof(CL4, steps)


def _decide(
    f: Formula,
    certified: bool,
    budget: Budget,
    trace: list[str] | None,
    stats: dict | None = None,
) -> Decision:
    if not is_formula(f):
        raise ValueError("input must be hybrid-free")
    if certified and not is_blind_free(f):
        raise ValueError("decide_blindfree rejects blind quantifiers; use decide_extended")
    search = _Search(
        certified=certified,
        budget=budget,
        max_depth=aggregate_complexity(f) + 1,
        trace=trace,
        stats=stats,
    )
    derivation = _prove(f, 1, search)
    if derivation is not None:
        return Decision("provable", _linearize(derivation))
    if search.tainted:
        return Decision("unknown", reason="a stability check exhausted its budget")
    return Decision("unprovable")


def decide_blindfree(
    f: Formula, trace: list[str] | None = None, stats: dict | None = None
) -> Decision:
    """Certified decision for blind-free, hybrid-free formulas: Provable
    with a checkable proof, or Unprovable.  Never Unknown."""
    return _decide(f, certified=True, budget=Budget(), trace=trace, stats=stats)


def decide_extended(
    f: Formula,
    budget: Budget = Budget(),
    trace: list[str] | None = None,
    stats: dict | None = None,
) -> Decision:
    """Best-effort decision for formulas that may contain blind quantifiers.
    Provable answers stay fully certified; negative answers degrade to
    Unknown when some stability check ran out of budget."""
    return _decide(f, certified=False, budget=budget, trace=trace, stats=stats)
