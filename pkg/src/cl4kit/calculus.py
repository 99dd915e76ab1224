"""Proof objects for CL4 and CL4o, per-rule checking, whole-proof
verification, and the hybridize / make-reasonable transformations.

A proof is a sequence of steps; each step carries a hyperformula, a rule
tag with its parameters, and references to earlier steps (DAG sharing is
allowed).  CL4 proofs contain formulas only and may use Rule C; CL4o
proofs contain balanced hyperformulas and use Rule Co instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .classical import Budget, is_stable, tautology_qf, elementarize
from .syntax import (
    Address,
    Atom,
    BlindAll,
    BlindEx,
    ChoAll,
    ChoAnd,
    ChoEx,
    ChoOr,
    Const,
    Formula,
    Implies,
    Neg,
    Occurrence,
    ParAnd,
    ParOr,
    Term,
    Var,
    addr_str,
    elem_letter,
    free_variables,
    fresh_elem_name,
    fresh_variable,
    gen_letter,
    hybrid_letter,
    is_blind_free,
    is_formula,
    is_reasonable,
    letter_names,
    letters,
    parse,
    parse_addr,
    pretty,
    replace_at,
    replace_letter,
    resolve,
    substitute,
    surface_occurrences,
    variables,
)

CL4 = "CL4"
CL4O = "CL4o"


@dataclass(frozen=True)
class RuleApplication:
    tag: str  # "A" | "B1" | "B2" | "C" | "Co"
    addr: Address | None = None  # B1 / B2
    index: int | None = None  # B1
    term: Term | None = None  # B2
    pos: Address | None = None  # C
    neg: Address | None = None  # C
    elem: str | None = None  # C
    hybrid: str | None = None  # Co

    def params_json(self) -> dict:
        out: dict = {}
        if self.addr is not None:
            out["addr"] = addr_str(self.addr)
        if self.index is not None:
            out["index"] = self.index
        if self.term is not None:
            out["term"] = str(self.term)
        if self.pos is not None:
            out["pos"] = addr_str(self.pos)
        if self.neg is not None:
            out["neg"] = addr_str(self.neg)
        if self.elem is not None:
            out["elem"] = self.elem
        if self.hybrid is not None:
            out["hybrid"] = self.hybrid
        return out


RULE_A = RuleApplication("A")


@dataclass(frozen=True)
class ProofStep:
    id: int
    formula: Formula
    rule: RuleApplication
    premises: tuple[int, ...] = ()


@dataclass
class Proof:
    system: str  # CL4 | CL4o
    steps: list[ProofStep] = field(default_factory=list)

    @property
    def conclusion(self) -> Formula:
        return self.steps[-1].formula

    def step(self, step_id: int) -> ProofStep:
        for s in self.steps:
            if s.id == step_id:
                return s
        raise KeyError(f"no step {step_id}")


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    step_id: int | None = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


# ---------------------------------------------------------------------------
# Rule A premises
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class APremise:
    """One required premise of Rule A: the occurrence it resolves, the
    choice made (component index or the fresh variable), and the result."""

    occurrence: Occurrence
    kind: str  # "component" | "variable"
    index: int | None
    var: str | None
    formula: Formula


def rule_a_targets(e: Formula) -> list[Occurrence]:
    """Surface occurrences Rule A quantifies over: positive cap-type and
    negative cup-type choice quasiatoms."""
    out = []
    for occ in surface_occurrences(e):
        qa, pol = occ.quasiatom, occ.polarity
        if isinstance(qa, (ChoAnd, ChoAll)) and pol > 0:
            out.append(occ)
        elif isinstance(qa, (ChoOr, ChoEx)) and pol < 0:
            out.append(occ)
    return out


def rule_a_premises(e: Formula) -> list[APremise]:
    used_vars = variables(e)
    out: list[APremise] = []
    for occ in rule_a_targets(e):
        qa = occ.quasiatom
        if isinstance(qa, (ChoAnd, ChoOr)):
            for i, comp in enumerate(qa.parts, start=1):
                out.append(
                    APremise(occ, "component", i, None, replace_at(e, occ.address, comp))
                )
        else:
            y = fresh_variable(used_vars)
            body = substitute(qa.body, qa.var, Var(y))
            out.append(APremise(occ, "variable", None, y, replace_at(e, occ.address, body)))
    return out


def premises_A(e: Formula) -> list[Formula]:
    """The required Rule A premise set for e, deduplicated, in occurrence
    order, with the deterministic fresh variable for quantifier targets."""
    seen = set()
    out = []
    for p in rule_a_premises(e):
        if p.formula not in seen:
            seen.add(p.formula)
            out.append(p.formula)
    return out


# ---------------------------------------------------------------------------
# Side conditions
# ---------------------------------------------------------------------------


def _binders_on_path(e: Formula, addr: Address) -> set[str]:
    """Variables bound by quantifiers on the path from the root to the
    quasiatom at addr (only blind quantifiers can occur on such a path)."""
    node, rest, bound = e, list(addr), set()
    while True:
        if isinstance(node, Neg):
            node = node.body
        elif isinstance(node, (BlindAll, BlindEx)):
            bound.add(node.var)
            node = node.body
        elif isinstance(node, (ParAnd, ParOr)):
            i = rest.pop(0)
            node = node.parts[i - 1]
        elif isinstance(node, Implies):
            i = rest.pop(0)
            node = node.lhs if i == 1 else node.rhs
        else:
            return bound


def _free_occurrence_binders(g: Formula, x: str) -> list[set[str]]:
    """For each free occurrence of x in g, the set of variables bound by
    quantifiers enclosing that occurrence within g."""
    out: list[set[str]] = []

    def walk(node: Formula, bound: frozenset[str]) -> None:
        if isinstance(node, Atom):
            if any(isinstance(t, Var) and t.name == x for t in node.args) and x not in bound:
                out.append(set(bound))
        elif isinstance(node, Neg):
            walk(node.body, bound)
        elif isinstance(node, (ParAnd, ParOr, ChoAnd, ChoOr)):
            for p in node.parts:
                walk(p, bound)
        elif isinstance(node, Implies):
            walk(node.lhs, bound)
            walk(node.rhs, bound)
        elif isinstance(node, (BlindAll, BlindEx, ChoAll, ChoEx)):
            walk(node.body, bound | {node.var})
        else:  # pragma: no cover
            raise TypeError(f"unknown node {node!r}")

    walk(g, frozenset())
    return out


def b2_scope_ok(e: Formula, addr: Address, t: Term) -> bool:
    """Rule B2 side condition: when t is a variable, neither the quantifier
    occurrence at addr nor any free occurrence of its variable inside the
    body lies in the scope of a quantifier binding t."""
    if isinstance(t, Const):
        return True
    occ = resolve(e, addr)
    qa = occ.quasiatom
    if t.name in _binders_on_path(e, addr):
        return False
    for binders in _free_occurrence_binders(qa.body, qa.var):
        if t.name in binders:
            return False
    return True


def b1_targets(e: Formula) -> list[Occurrence]:
    """Negative cap / positive cup surface connective occurrences."""
    out = []
    for occ in surface_occurrences(e):
        qa, pol = occ.quasiatom, occ.polarity
        if isinstance(qa, ChoAnd) and pol < 0:
            out.append(occ)
        elif isinstance(qa, ChoOr) and pol > 0:
            out.append(occ)
    return out


def b2_targets(e: Formula) -> list[Occurrence]:
    """Negative cap-quantifier / positive cup-quantifier occurrences."""
    out = []
    for occ in surface_occurrences(e):
        qa, pol = occ.quasiatom, occ.polarity
        if isinstance(qa, ChoAll) and pol < 0:
            out.append(occ)
        elif isinstance(qa, ChoEx) and pol > 0:
            out.append(occ)
    return out


def c_pairs(e: Formula) -> list[tuple[Occurrence, Occurrence]]:
    """(positive, negative) surface occurrence pairs of one general letter."""
    occs = surface_occurrences(e)
    out = []
    for pos in occs:
        if not (isinstance(pos.quasiatom, Atom) and pos.quasiatom.letter.kind == "general"):
            continue
        if pos.polarity <= 0:
            continue
        for neg in occs:
            if neg.polarity >= 0:
                continue
            if not isinstance(neg.quasiatom, Atom):
                continue
            if neg.quasiatom.letter == pos.quasiatom.letter:
                out.append((pos, neg))
    return out


# ---------------------------------------------------------------------------
# Step checking
# ---------------------------------------------------------------------------


def _match_a_premise(e: Formula, required: APremise, supplied: list[Formula]) -> bool:
    """Does some supplied premise realize this required Rule A premise?
    Quantifier premises match modulo the choice of fresh variable."""
    if required.formula in supplied:
        return True
    if required.kind != "variable":
        return False
    qa = required.occurrence.quasiatom
    e_vars = variables(e)
    for h in supplied:
        for y in variables(h) - e_vars:
            body = substitute(qa.body, qa.var, Var(y))
            if replace_at(e, required.occurrence.address, body) == h:
                return True
        # vacuous quantifier: the bound variable has no free occurrence
        if replace_at(e, required.occurrence.address, qa.body) == h and qa.var not in free_variables(
            qa.body
        ):
            return True
    return False


def check_step(
    conclusion: Formula,
    rule: RuleApplication,
    premises: list[Formula],
    budget: Budget = Budget(),
    system: str = CL4,
) -> str | None:
    """None when the step is fine, else a description of the violation."""
    if system == CL4 and rule.tag == "Co":
        return "Rule Co is not part of CL4"
    if system == CL4O and rule.tag == "C":
        return "Rule C is not part of CL4o"

    if rule.tag == "A":
        ee = elementarize(conclusion)
        if is_blind_free(ee):
            if not tautology_qf(ee):
                return "conclusion is instable"
        else:
            verdict = is_stable(conclusion, budget)
            if verdict.is_invalid:
                return "conclusion is instable"
            if verdict.is_unknown:
                return f"stability unverified: {verdict.reason}"
        for req in rule_a_premises(conclusion):
            if not _match_a_premise(conclusion, req, premises):
                return (
                    f"missing Rule A premise for occurrence {addr_str(req.occurrence.address) or 'e'}: "
                    f"{pretty(req.formula)}"
                )
        return None

    if rule.tag == "B1":
        if rule.addr is None or rule.index is None:
            return "Rule B1 needs an address and a component index"
        if len(premises) != 1:
            return "Rule B1 takes exactly one premise"
        try:
            occ = resolve(conclusion, rule.addr)
        except KeyError as ex:
            return str(ex)
        qa, pol = occ.quasiatom, occ.polarity
        if not (
            (isinstance(qa, ChoAnd) and pol < 0) or (isinstance(qa, ChoOr) and pol > 0)
        ):
            return "Rule B1 requires a negative cap or positive cup occurrence"
        if not 1 <= rule.index <= len(qa.parts):
            return f"component index {rule.index} out of range"
        expected = replace_at(conclusion, rule.addr, qa.parts[rule.index - 1])
        if premises[0] != expected:
            return f"premise should be {pretty(expected)}"
        return None

    if rule.tag == "B2":
        if rule.addr is None or rule.term is None:
            return "Rule B2 needs an address and a term"
        if len(premises) != 1:
            return "Rule B2 takes exactly one premise"
        try:
            occ = resolve(conclusion, rule.addr)
        except KeyError as ex:
            return str(ex)
        qa, pol = occ.quasiatom, occ.polarity
        if not (
            (isinstance(qa, ChoAll) and pol < 0) or (isinstance(qa, ChoEx) and pol > 0)
        ):
            return "Rule B2 requires a negative cap-quantifier or positive cup-quantifier occurrence"
        if not b2_scope_ok(conclusion, rule.addr, rule.term):
            return f"term {rule.term} violates the scope side condition"
        expected = replace_at(
            conclusion, rule.addr, substitute(qa.body, qa.var, rule.term)
        )
        if premises[0] != expected:
            return f"premise should be {pretty(expected)}"
        return None

    if rule.tag == "C":
        if rule.pos is None or rule.neg is None or rule.elem is None:
            return "Rule C needs positive/negative addresses and an elementary letter"
        if len(premises) != 1:
            return "Rule C takes exactly one premise"
        try:
            pos_occ = resolve(conclusion, rule.pos)
            neg_occ = resolve(conclusion, rule.neg)
        except KeyError as ex:
            return str(ex)
        if not (isinstance(pos_occ.quasiatom, Atom) and pos_occ.quasiatom.letter.kind == "general"):
            return "positive address must name a general atom"
        if not (isinstance(neg_occ.quasiatom, Atom) and neg_occ.quasiatom.letter.kind == "general"):
            return "negative address must name a general atom"
        if pos_occ.polarity <= 0 or neg_occ.polarity >= 0:
            return "Rule C needs one positive and one negative occurrence"
        if pos_occ.quasiatom.letter != neg_occ.quasiatom.letter:
            return "the two occurrences must share their general letter"
        if rule.elem in letter_names(conclusion) or rule.elem in ("T", "F"):
            return f"letter {rule.elem} is not fresh for the conclusion"
        letter = pos_occ.quasiatom.letter
        q = elem_letter(rule.elem, letter.arity)
        expected = replace_at(
            conclusion, rule.pos, Atom(q, pos_occ.quasiatom.args)
        )
        expected = replace_at(expected, rule.neg, Atom(q, neg_occ.quasiatom.args))
        if premises[0] != expected:
            return f"premise should be {pretty(expected)}"
        return None

    if rule.tag == "Co":
        if rule.hybrid is None:
            return "Rule Co needs a hybrid letter"
        if len(premises) != 1:
            return "Rule Co takes exactly one premise"
        h = premises[0]
        hyb = next(
            (lt for lt in letters(h) if lt.kind == "hybrid" and lt.name == rule.hybrid),
            None,
        )
        if hyb is None:
            return f"hybrid letter {rule.hybrid} does not occur in the premise"
        expected = replace_letter(h, hyb, gen_letter(hyb.general, hyb.arity))
        if conclusion != expected:
            return f"conclusion should be {pretty(expected)}"
        return None

    return f"unknown rule tag {rule.tag!r}"


def check_proof(proof: Proof, budget: Budget = Budget()) -> CheckResult:
    """Verify every step in its system; report the first bad step."""
    if proof.system not in (CL4, CL4O):
        return CheckResult(False, None, f"unknown system {proof.system!r}")
    if not proof.steps:
        return CheckResult(False, None, "empty proof")
    by_id: dict[int, ProofStep] = {}
    for step in proof.steps:
        if step.id in by_id:
            return CheckResult(False, step.id, "duplicate step id")
        if any(p >= step.id for p in step.premises):
            return CheckResult(False, step.id, "premise ids must be smaller than the step id")
        if any(p not in by_id for p in step.premises):
            return CheckResult(False, step.id, "premise id does not exist")
        if proof.system == CL4:
            if not is_formula(step.formula):
                return CheckResult(False, step.id, "CL4 steps must be hybrid-free formulas")
        else:
            r = is_reasonable(step.formula)
            if r.status == "unbalanced":
                return CheckResult(False, step.id, f"CL4o steps must be balanced: {r.detail}")
        premise_formulas = [by_id[p].formula for p in step.premises]
        why = check_step(step.formula, step.rule, premise_formulas, budget, proof.system)
        if why is not None:
            return CheckResult(False, step.id, why)
        by_id[step.id] = step
    return CheckResult(True)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _term_from_str(s: str) -> Term:
    s = s.strip()
    if s.isdigit():
        return Const(int(s))
    return Var(s)


def rule_from_json(tag: str, params: dict) -> RuleApplication:
    return RuleApplication(
        tag=tag,
        addr=parse_addr(params["addr"]) if "addr" in params else None,
        index=params.get("index"),
        term=_term_from_str(params["term"]) if "term" in params else None,
        pos=parse_addr(params["pos"]) if "pos" in params else None,
        neg=parse_addr(params["neg"]) if "neg" in params else None,
        elem=params.get("elem"),
        hybrid=params.get("hybrid"),
    )


def proof_to_json(proof: Proof) -> dict:
    return {
        "system": proof.system,
        "steps": [
            {
                "id": s.id,
                "formula": pretty(s.formula),
                "rule": s.rule.tag,
                "premises": list(s.premises),
                "params": s.rule.params_json(),
            }
            for s in proof.steps
        ],
    }


def proof_from_json(doc: dict) -> Proof:
    steps = [
        ProofStep(
            id=entry["id"],
            formula=parse(entry["formula"]),
            rule=rule_from_json(entry["rule"], entry.get("params", {})),
            premises=tuple(entry.get("premises", ())),
        )
        for entry in doc["steps"]
    ]
    return Proof(system=doc["system"], steps=steps)


def save_proof(proof: Proof, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(proof_to_json(proof), fh, indent=2)


def load_proof(path: str) -> Proof:
    with open(path) as fh:
        return proof_from_json(json.load(fh))


# ---------------------------------------------------------------------------
# CL4 -> CL4o (hybridization of Rule C)
# ---------------------------------------------------------------------------


@dataclass
class _Node:
    formula: Formula
    rule: RuleApplication
    children: list["_Node"]


def _expand_tree(proof: Proof, step_id: int | None = None) -> _Node:
    step = proof.steps[-1] if step_id is None else proof.step(step_id)
    return _Node(
        step.formula, step.rule, [_expand_tree(proof, p) for p in step.premises]
    )


def _tree_letters(node: _Node) -> set[str]:
    out = set(letter_names(node.formula))
    for c in node.children:
        out |= _tree_letters(c)
    return out


def _rewrite_subtree(node: _Node, old, new) -> None:
    node.formula = replace_letter(node.formula, old, new)
    for c in node.children:
        _rewrite_subtree(c, old, new)


def to_cl4o(proof: Proof, budget: Budget = Budget()) -> Proof:
    """Convert a checked CL4 proof into a CL4o proof of the same conclusion:
    each Rule C application becomes Rule Co, with the introduced elementary
    letter rewritten to the matching hybrid letter throughout its subproof.
    """
    result = check_proof(proof, budget)
    if not result:
        raise ValueError(f"input proof fails at step {result.step_id}: {result.message}")
    if proof.system != CL4:
        raise ValueError("to_cl4o expects a CL4 proof")

    root = _expand_tree(proof)
    all_letters = set(_tree_letters(root))
    claimed: set[str] = set()

    def hybridize(node: _Node) -> None:
        if node.rule.tag == "C":
            occ = resolve(node.formula, node.rule.pos)
            general = occ.quasiatom.letter
            q_name = node.rule.elem
            if q_name in claimed:
                # Another application already introduced this letter; give
                # this subproof its own, so the rewrite below stays local.
                q_name = fresh_elem_name(all_letters | claimed | {"t", "u"})
                all_letters.add(q_name)
                old = elem_letter(node.rule.elem, general.arity)
                for child in node.children:
                    _rewrite_subtree(child, old, elem_letter(q_name, general.arity))
            claimed.add(q_name)
            hyb = hybrid_letter(general.name, q_name, general.arity)
            old = elem_letter(q_name, general.arity)
            for child in node.children:
                _rewrite_subtree(child, old, hyb)
            node.rule = RuleApplication("Co", hybrid=hyb.name)
        for child in node.children:
            hybridize(child)

    hybridize(root)

    steps: list[ProofStep] = []
    index: dict[tuple, int] = {}

    def emit(node: _Node) -> int:
        child_ids = tuple(emit(c) for c in node.children)
        key = (node.formula, node.rule, child_ids)
        if key in index:
            return index[key]
        step_id = len(steps) + 1
        steps.append(ProofStep(step_id, node.formula, node.rule, child_ids))
        index[key] = step_id
        return step_id

    emit(root)
    return Proof(CL4O, steps)


# ---------------------------------------------------------------------------
# Reasonable CL4o proofs
# ---------------------------------------------------------------------------


def _unreasonable_letters(f: Formula) -> set[str]:
    # is_reasonable reports only the first unreasonable letter, so probe
    # each hybrid letter with the others replaced by their general parts.
    out = set()
    hybrids = [lt for lt in letters(f) if lt.kind == "hybrid"]
    for lt in hybrids:
        g = f
        for other in hybrids:
            if other != lt:
                g = replace_letter(g, other, gen_letter(other.general, other.arity))
        r = is_reasonable(g)
        if r.status == "unreasonable" and r.detail == lt.name:
            out.add(lt.name)
    return out


def _tilde(f: Formula) -> Formula:
    """Replace every unreasonable hybrid letter by its general component."""
    for lt in letters(f):
        if lt.kind == "hybrid" and lt.name in _unreasonable_letters(f):
            f = replace_letter(f, lt, gen_letter(lt.general, lt.arity))
    return f


def make_reasonable(proof: Proof, budget: Budget = Budget()) -> Proof:
    """Turn a CL4o proof of a reasonable hyperformula into one whose every
    step is reasonable.  Co steps whose hybrid letter was unreasonable in
    the premise collapse onto that premise."""
    result = check_proof(proof, budget)
    if not result:
        raise ValueError(f"input proof fails at step {result.step_id}: {result.message}")
    if proof.system != CL4O:
        raise ValueError("make_reasonable expects a CL4o proof")
    if not is_reasonable(proof.conclusion):
        raise ValueError("the conclusion is not reasonable")

    by_id = {s.id: s for s in proof.steps}
    new_steps: list[ProofStep] = []
    remap: dict[int, int] = {}
    index: dict[tuple, int] = {}

    def emit(formula: Formula, rule: RuleApplication, premises: tuple[int, ...]) -> int:
        key = (formula, rule, premises)
        if key in index:
            return index[key]
        step_id = len(new_steps) + 1
        new_steps.append(ProofStep(step_id, formula, rule, premises))
        index[key] = step_id
        return step_id

    for step in proof.steps:
        tilded = _tilde(step.formula)
        if step.rule.tag == "Co":
            premise = by_id[step.premises[0]]
            if step.rule.hybrid in _unreasonable_letters(premise.formula):
                # the tilde collapses this application: reuse the premise
                remap[step.id] = remap[premise.id]
                continue
        remap[step.id] = emit(
            tilded, step.rule, tuple(remap[p] for p in step.premises)
        )

    # The collapse can leave steps that nothing references; keep only the
    # conclusion's cone.
    needed: set[int] = set()

    def mark(step_id: int) -> None:
        if step_id in needed:
            return
        needed.add(step_id)
        for p in new_steps[step_id - 1].premises:
            mark(p)

    mark(remap[proof.steps[-1].id])
    kept = [s for s in new_steps if s.id in needed]
    renumber = {s.id: i + 1 for i, s in enumerate(kept)}
    final = [
        ProofStep(renumber[s.id], s.formula, s.rule, tuple(renumber[p] for p in s.premises))
        for s in kept
    ]
    return Proof(CL4O, final)
