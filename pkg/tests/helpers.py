"""Shared generators for randomized suites.

Everything is driven by an explicit random.Random so failures reproduce
from the seed printed by the test.
"""

from __future__ import annotations

import random

from cl4kit.games import (
    BOT_PLAYER,
    GeneralDef,
    Interpretation,
    LabMove,
    Run,
    TOP_PLAYER,
    legal_moves,
)
from cl4kit.syntax import (
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
    ParAnd,
    ParOr,
    Var,
    elem_letter,
    gen_letter,
    hybrid_letter,
)

ELEM_NAMES = ["p", "q", "r", "s"]
GEN_NAMES = ["P", "Q", "R"]


def random_qf_elementary(rng: random.Random, max_atoms: int = 8, depth: int = 4) -> Formula:
    """Quantifier-free elementary formula over 0-ary letters."""
    atoms = [Atom(elem_letter(f"p{i}")) for i in range(max_atoms)]

    def build(d: int) -> Formula:
        if d == 0 or rng.random() < 0.3:
            return rng.choice(atoms)
        kind = rng.randrange(4)
        if kind == 0:
            return Neg(build(d - 1))
        if kind == 1:
            return ParAnd(tuple(build(d - 1) for _ in range(rng.randint(2, 3))))
        if kind == 2:
            return ParOr(tuple(build(d - 1) for _ in range(rng.randint(2, 3))))
        return Implies(build(d - 1), build(d - 1))

    return build(depth)


def random_blindfree(rng: random.Random, depth: int = 3, n_general: int = 2) -> Formula:
    """Closed blind-free formula mixing parallel and choice structure with
    general and elementary 0-ary atoms."""
    leaves = [Atom(gen_letter(GEN_NAMES[i])) for i in range(n_general)]
    leaves += [Atom(elem_letter(n)) for n in ELEM_NAMES[:2]]

    def build(d: int) -> Formula:
        if d == 0 or rng.random() < 0.35:
            return rng.choice(leaves)
        kind = rng.randrange(6)
        if kind == 0:
            return Neg(build(d - 1))
        if kind == 1:
            return ParAnd(tuple(build(d - 1) for _ in range(2)))
        if kind == 2:
            return ParOr(tuple(build(d - 1) for _ in range(2)))
        if kind == 3:
            return Implies(build(d - 1), build(d - 1))
        if kind == 4:
            return ChoAnd(tuple(build(d - 1) for _ in range(2)))
        return ChoOr(tuple(build(d - 1) for _ in range(2)))

    return build(depth)


def random_game_formula(
    rng: random.Random,
    depth: int = 3,
    universe: int = 2,
    with_hybrids: bool = False,
    with_blind: bool = False,
) -> tuple[Formula, Interpretation]:
    """A closed formula paired with an interpretation defining its letters.
    General letters get small interactive defining formulas so both players
    have moves inside atoms."""
    defs = {
        "P": GeneralDef(("x",), ChoOr((Atom(elem_letter("l1", 1), (Var("x"),)),
                                       Atom(elem_letter("l2", 1), (Var("x"),))))),
        "Q": GeneralDef((), ChoAnd((Atom(elem_letter("l3")), Atom(elem_letter("l4"))))),
        "R": GeneralDef((), Atom(elem_letter("l5"))),
    }
    elementary = {}
    for c in range(universe):
        elementary[("l1", (c,))] = rng.random() < 0.5
        elementary[("l2", (c,))] = rng.random() < 0.5
    for name in ("l3", "l4", "l5", "e1", "e2"):
        elementary[(name, ())] = rng.random() < 0.5
    interp = Interpretation(universe=universe, elementary=elementary, general=defs)

    def const() -> Const:
        return Const(rng.randrange(universe))

    def leaf() -> Formula:
        k = rng.randrange(4)
        if k == 0:
            return Atom(gen_letter("P", 1), (const(),))
        if k == 1:
            return Atom(gen_letter("Q"))
        if k == 2:
            return Atom(elem_letter("e1"))
        return Atom(elem_letter("e2"))

    def build(d: int) -> Formula:
        if d == 0 or rng.random() < 0.3:
            return leaf()
        kinds = ["neg", "and", "or", "imp", "cand", "cor", "call", "cex"]
        if with_blind:
            kinds += ["ball", "bex"]
        kind = rng.choice(kinds)
        if kind == "neg":
            return Neg(build(d - 1))
        if kind == "and":
            return ParAnd(tuple(build(d - 1) for _ in range(2)))
        if kind == "or":
            return ParOr(tuple(build(d - 1) for _ in range(2)))
        if kind == "imp":
            return Implies(build(d - 1), build(d - 1))
        if kind == "cand":
            return ChoAnd(tuple(build(d - 1) for _ in range(2)))
        if kind == "cor":
            return ChoOr(tuple(build(d - 1) for _ in range(2)))
        if kind == "call":
            return ChoAll("x", Atom(gen_letter("P", 1), (Var("x"),)))
        if kind == "cex":
            return ChoEx("x", Atom(elem_letter("l1", 1), (Var("x"),)))
        if kind == "ball":
            return BlindAll("x", Atom(elem_letter("l1", 1), (Var("x"),)))
        return BlindEx("x", Atom(elem_letter("l2", 1), (Var("x"),)))

    f = build(depth)
    if with_hybrids:
        c = const()
        pair = ParOr(
            (
                Atom(hybrid_letter("P", "h1", 1), (c,)),
                Neg(Atom(hybrid_letter("P", "h1", 1), (c,))),
            )
        )
        f = ParAnd((pair, f)) if rng.random() < 0.5 else ParOr((f, pair))
    return f, interp


def all_legal_runs(
    f: Formula, interp: Interpretation, max_len: int, cap: int = 20000
) -> list[Run]:
    """Every legal run of the game up to max_len moves (both players)."""
    out: list[Run] = [()]
    frontier: list[Run] = [()]
    for _ in range(max_len):
        nxt: list[Run] = []
        for run in frontier:
            for player in (TOP_PLAYER, BOT_PLAYER):
                for move in legal_moves(f, interp, run, player):
                    extended = run + (LabMove(player, move),)
                    nxt.append(extended)
                    if len(out) + len(nxt) > cap:
                        raise AssertionError("run enumeration exploded; shrink the game")
        out.extend(nxt)
        frontier = nxt
    return out


def random_legal_run(
    rng: random.Random, f: Formula, interp: Interpretation, max_len: int
) -> Run:
    run: Run = ()
    for _ in range(max_len):
        options = []
        for player in (TOP_PLAYER, BOT_PLAYER):
            options.extend((player, m) for m in legal_moves(f, interp, run, player))
        if not options or rng.random() < 0.25:
            break
        player, move = rng.choice(options)
        run = run + (LabMove(player, move),)
    return run


def interleavings(tops: list[LabMove], bots: list[LabMove]) -> list[Run]:
    """All merges of two move sequences keeping each one's internal order."""
    if not tops:
        return [tuple(bots)]
    if not bots:
        return [tuple(tops)]
    first_top = [(tops[0],) + rest for rest in interleavings(tops[1:], bots)]
    first_bot = [(bots[0],) + rest for rest in interleavings(tops, bots[1:])]
    return first_top + first_bot


def rearrangements(run: Run) -> list[Run]:
    tops = [m for m in run if m.player == TOP_PLAYER]
    bots = [m for m in run if m.player == BOT_PLAYER]
    return interleavings(tops, bots)
