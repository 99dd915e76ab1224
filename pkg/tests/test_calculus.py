import json
import random

import pytest

from cl4kit.calculus import (
    CL4,
    CL4O,
    Proof,
    ProofStep,
    RULE_A,
    RuleApplication,
    check_proof,
    check_step,
    make_reasonable,
    premises_A,
    proof_from_json,
    proof_to_json,
    to_cl4o,
)
from cl4kit.classical import tautology_qf
from cl4kit.syntax import Var, is_reasonable, parse, pretty

from helpers import random_qf_elementary


def golden_choice_proof() -> Proof:
    """The four-step derivation of the choice version of the
    for-all-exists matching principle."""
    return Proof(
        CL4,
        [
            ProofStep(1, parse("p(z) -> p(z)"), RULE_A, ()),
            ProofStep(
                2,
                parse("P(z) -> P(z)"),
                RuleApplication("C", pos=(2,), neg=(1,), elem="p"),
                (1,),
            ),
            ProofStep(
                3,
                parse("!E y. (P(z) -> P(y))"),
                RuleApplication("B2", addr=(), term=Var("z")),
                (2,),
            ),
            ProofStep(4, parse("!A x. !E y. (P(x) -> P(y))"), RULE_A, (3,)),
        ],
    )


def golden_blind_proof() -> Proof:
    """The two-step derivation of the blind version."""
    return Proof(
        CL4,
        [
            ProofStep(1, parse("E y. A x. (p(x) -> p(y))"), RULE_A, ()),
            ProofStep(
                2,
                parse("E y. A x. (P(x) -> P(y))"),
                RuleApplication("C", pos=(2,), neg=(1,), elem="p"),
                (1,),
            ),
        ],
    )


class TestPremisesA:
    def test_choice_quantifier_with_fresh_variable(self):
        f = parse("!A x. !E y. (P(x) -> P(y))")
        ps = premises_A(f)
        # deterministic fresh variable: u is the first unused name
        assert ps == [parse("!E y. (P(u) -> P(y))")]

    def test_no_qualifying_occurrences(self):
        assert premises_A(parse("p(z) -> p(z)")) == []

    def test_negative_cups_enumerate_components(self):
        f = parse("(P !\\/ Q) /\\ (P !\\/ R) -> P !\\/ (Q /\\ R)")
        assert len(premises_A(f)) == 4

    def test_deduplication(self):
        f = parse("(P !\\/ P) -> p")
        assert len(premises_A(f)) == 1


class TestCheckStep:
    def test_rule_c_on_identity(self):
        why = check_step(
            parse("P(z) -> P(z)"),
            RuleApplication("C", pos=(2,), neg=(1,), elem="p"),
            [parse("p(z) -> p(z)")],
        )
        assert why is None

    def test_rule_b2_on_cup(self):
        why = check_step(
            parse("!E y. (P(z) -> P(y))"),
            RuleApplication("B2", addr=(), term=Var("z")),
            [parse("P(z) -> P(z)")],
        )
        assert why is None

    def test_instable_conclusion_rejected(self):
        why = check_step(parse("!E y. !A x. (P(x) -> P(y))"), RULE_A, [])
        assert why is not None and "instable" in why

    def test_b2_scope_side_condition(self):
        # choosing the bound variable of an inner choice quantifier is barred
        conclusion = parse("!E x. !A y. p(x, y)")
        why = check_step(
            conclusion,
            RuleApplication("B2", addr=(), term=Var("y")),
            [parse("!A y. p(y, y)")],
        )
        assert why is not None and "scope" in why

    def test_c_letter_freshness(self):
        why = check_step(
            parse("P(z) -> P(z) \\/ p(z)"),
            RuleApplication("C", pos=(2, 1), neg=(1,), elem="p"),
            [parse("p(z) -> p(z) \\/ p(z)")],
        )
        assert why is not None and "fresh" in why

    def test_c_needs_opposite_polarities(self):
        why = check_step(
            parse("P(z) \\/ P(z)"),
            RuleApplication("C", pos=(1,), neg=(2,), elem="p"),
            [parse("p(z) \\/ p(z)")],
        )
        assert why is not None


class TestCheckProof:
    def test_golden_choice(self):
        assert check_proof(golden_choice_proof()).ok

    def test_golden_blind(self):
        assert check_proof(golden_blind_proof()).ok

    def test_tampered_rule_tag_fails_at_step(self):
        p = golden_choice_proof()
        p.steps[1] = ProofStep(
            2, p.steps[1].formula, RuleApplication("B1", addr=(2,), index=1), (1,)
        )
        r = check_proof(p)
        assert not r.ok and r.step_id == 2

    def test_tampered_formula_fails(self):
        p = golden_choice_proof()
        p.steps[0] = ProofStep(1, parse("p(z) -> q(z)"), RULE_A, ())
        r = check_proof(p)
        assert not r.ok and r.step_id in (1, 2)

    def test_tampered_premise_reference_fails(self):
        p = golden_choice_proof()
        p.steps[3] = ProofStep(4, p.steps[3].formula, RULE_A, (2,))
        r = check_proof(p)
        assert not r.ok and r.step_id == 4

    def test_tampered_term_fails(self):
        p = golden_choice_proof()
        p.steps[2] = ProofStep(
            3, p.steps[2].formula, RuleApplication("B2", addr=(), term=Var("y")), (2,)
        )
        r = check_proof(p)
        assert not r.ok and r.step_id == 3

    def test_hybrids_forbidden_in_cl4(self):
        p = Proof(CL4, [ProofStep(1, parse("P#q \\/ ~P#q"), RULE_A, ())])
        r = check_proof(p)
        assert not r.ok

    def test_well_foundedness(self):
        p = Proof(CL4, [ProofStep(1, parse("p \\/ ~p"), RULE_A, (1,))])
        assert not check_proof(p).ok


class TestToCl4o:
    def test_golden_choice_transforms(self):
        h = to_cl4o(golden_choice_proof())
        assert h.system == CL4O
        assert check_proof(h).ok
        assert h.conclusion == golden_choice_proof().conclusion
        assert h.steps[0].formula == parse("P#p(z) -> P#p(z)")
        assert h.steps[1].rule.tag == "Co"

    def test_c_free_proof_is_relabelled(self):
        p = Proof(CL4, [ProofStep(1, parse("p \\/ ~p"), RULE_A, ())])
        h = to_cl4o(p)
        assert h.system == CL4O
        assert [s.formula for s in h.steps] == [s.formula for s in p.steps]
        assert check_proof(h).ok

    def test_duplicate_c_letters_in_parallel_branches(self):
        # both branches introduce the letter "a"; the transform must keep
        # their hybridizations separate
        p = Proof(
            CL4,
            [
                ProofStep(1, parse("a \\/ ~a"), RULE_A, ()),
                ProofStep(
                    2,
                    parse("P \\/ ~P"),
                    RuleApplication("C", pos=(1,), neg=(2,), elem="a"),
                    (1,),
                ),
                ProofStep(3, parse("a \\/ ~a"), RULE_A, ()),
                ProofStep(
                    4,
                    parse("Q \\/ ~Q"),
                    RuleApplication("C", pos=(1,), neg=(2,), elem="a"),
                    (3,),
                ),
                ProofStep(5, parse("(P \\/ ~P) !/\\ (Q \\/ ~Q)"), RULE_A, (2, 4)),
            ],
        )
        assert check_proof(p).ok
        h = to_cl4o(p)
        r = check_proof(h)
        assert r.ok, (r.step_id, r.message)
        assert h.conclusion == p.conclusion

    def test_rejects_broken_input(self):
        p = Proof(CL4, [ProofStep(1, parse("P \\/ ~P"), RULE_A, ())])
        with pytest.raises(ValueError):
            to_cl4o(p)


class TestMakeReasonable:
    def test_identity_on_reasonable_proof(self):
        h = to_cl4o(golden_choice_proof())
        m = make_reasonable(h)
        assert check_proof(m).ok
        assert m.conclusion == h.conclusion
        assert all(is_reasonable(s.formula) for s in m.steps)

    def test_unreasonable_co_step_collapses(self):
        p = Proof(
            CL4O,
            [
                ProofStep(1, parse("P#q(1) \\/ ~P#q(2) \\/ s \\/ ~s"), RULE_A, ()),
                ProofStep(
                    2,
                    parse("P(1) \\/ ~P(2) \\/ s \\/ ~s"),
                    RuleApplication("Co", hybrid="P#q"),
                    (1,),
                ),
            ],
        )
        assert check_proof(p).ok
        m = make_reasonable(p)
        assert check_proof(m).ok
        assert len(m.steps) == 1
        assert m.conclusion == p.conclusion
        assert all(is_reasonable(s.formula) for s in m.steps)

    def test_rejects_unreasonable_conclusion(self):
        p = Proof(
            CL4O,
            [ProofStep(1, parse("P#q(1) \\/ ~P#q(2) \\/ s \\/ ~s"), RULE_A, ())],
        )
        with pytest.raises(ValueError):
            make_reasonable(p)


class TestElementaryFragment:
    """An elementary formula has a one-step derivation exactly when it is a
    propositional tautology."""

    def test_two_hundred_random_formulas(self):
        rng = random.Random(101)
        for _ in range(200):
            f = random_qf_elementary(rng, max_atoms=6, depth=4)
            one_step = Proof(CL4, [ProofStep(1, f, RULE_A, ())])
            assert check_proof(one_step).ok == tautology_qf(f), pretty(f)


class TestSerialization:
    def test_round_trip(self):
        for proof in (golden_choice_proof(), golden_blind_proof()):
            doc = proof_to_json(proof)
            again = proof_from_json(json.loads(json.dumps(doc)))
            assert proof_to_json(again) == doc
            assert check_proof(again).ok

    def test_cl4o_round_trip(self):
        h = to_cl4o(golden_choice_proof())
        doc = proof_to_json(h)
        again = proof_from_json(json.loads(json.dumps(doc)))
        assert proof_to_json(again) == doc
        assert check_proof(again).ok


class TestMakeReasonableChains:
    def test_two_collapsing_co_steps(self):
        base = "s \\/ ~s"
        p = Proof(
            CL4O,
            [
                ProofStep(
                    1,
                    parse(f"P#a(1) \\/ ~P#a(2) \\/ (Q#b(1) \\/ ~Q#b(2)) \\/ ({base})"),
                    RULE_A,
                    (),
                ),
                ProofStep(
                    2,
                    parse(f"P(1) \\/ ~P(2) \\/ (Q#b(1) \\/ ~Q#b(2)) \\/ ({base})"),
                    RuleApplication("Co", hybrid="P#a"),
                    (1,),
                ),
                ProofStep(
                    3,
                    parse(f"P(1) \\/ ~P(2) \\/ (Q(1) \\/ ~Q(2)) \\/ ({base})"),
                    RuleApplication("Co", hybrid="Q#b"),
                    (2,),
                ),
            ],
        )
        assert check_proof(p).ok
        m = make_reasonable(p)
        assert check_proof(m).ok
        assert len(m.steps) == 1
        assert m.conclusion == p.conclusion
        assert all(is_reasonable(s.formula) for s in m.steps)

    def test_mixed_reasonable_and_unreasonable_hybrids(self):
        # P#a is unreasonable (differing free constants), Q#b is reasonable:
        # only the former collapses
        p = Proof(
            CL4O,
            [
                ProofStep(
                    1,
                    parse("P#a(1) \\/ ~P#a(2) \\/ (Q#b \\/ ~Q#b) \\/ s \\/ ~s"),
                    RULE_A,
                    (),
                ),
                ProofStep(
                    2,
                    parse("P(1) \\/ ~P(2) \\/ (Q#b \\/ ~Q#b) \\/ s \\/ ~s"),
                    RuleApplication("Co", hybrid="P#a"),
                    (1,),
                ),
                ProofStep(
                    3,
                    parse("P(1) \\/ ~P(2) \\/ (Q \\/ ~Q) \\/ s \\/ ~s"),
                    RuleApplication("Co", hybrid="Q#b"),
                    (2,),
                ),
            ],
        )
        assert check_proof(p).ok
        m = make_reasonable(p)
        assert check_proof(m).ok
        assert m.conclusion == p.conclusion
        assert len(m.steps) == 2  # the P#a application collapsed, Q#b stayed
        assert m.steps[-1].rule.tag == "Co"
        assert all(is_reasonable(s.formula) for s in m.steps)
