"""Compile a reasonable CL4o proof into an interactive strategy and play it
against a scripted environment.

The engine walks the proof from its conclusion.  Steps justified by B1, B2
or Co prescribe machine moves (a choice, a quantifier choice, or a copy-cat
burst synchronizing the two occurrences of a hybrid letter); a step
justified by A waits for the environment.  An environment move inside a
general quasiatom is recorded; one inside a hybrid quasiatom is mirrored
at the matching occurrence; a choice move steps the engine to the premise
that reflects it.  An exhausted script counts as the environment passing
forever, at which point the accumulated run is scored.
"""

from __future__ import annotations

from dataclasses import dataclass

from .calculus import Proof, ProofStep, check_proof
from .classical import Budget
from .games import (
    BOT_PLAYER,
    Interpretation,
    LabMove,
    Run,
    TOP_PLAYER,
    choice_mover,
    hybrid_pairs,
    is_manageable,
    is_unilegal,
    legal_moves,
    parse_move,
    project,
    residual,
    winner,
)
from .syntax import (
    Address,
    Atom,
    ChoAll,
    ChoAnd,
    ChoEx,
    ChoOr,
    Const,
    Formula,
    Var,
    addr_str,
    apply_valuation,
    free_variables,
    general_dehybridization,
    is_blind_free,
    is_reasonable,
    pretty,
    replace_at,
    substitute,
    variables,
)


@dataclass(frozen=True)
class MachineState:
    """Snapshot at the top of one loop iteration: the proof hyperformula in
    play, the quasiatom-play position, and the valuation record."""

    formula: Formula
    omega: Run
    valuation: tuple[tuple[str, int], ...]

    def val_dict(self) -> dict[str, int]:
        return dict(self.valuation)

    def ground(self) -> Formula:
        return apply_valuation(self.formula, self.val_dict())


@dataclass(frozen=True)
class PlayEvent:
    loop: str  # "main" | "inner"
    case: str  # "B1" | "B2" | "Co" | "env-general" | "env-hybrid" |
    #            "env-choice" | "env-choice-const" | "pass"
    state: MachineState
    theta_before: Run
    moves: Run  # moves appended during this iteration (env + machine)


MACHINE_WINS = "machine-wins"
MACHINE_LOSES = "machine-loses"
ENVIRONMENT_ILLEGAL = "environment-illegal"
ABORTED = "aborted"


@dataclass
class PlayTranscript:
    final_run: Run
    events: list[PlayEvent]
    verdict: str
    reason: str = ""

    @property
    def won(self) -> bool:
        return self.verdict in (MACHINE_WINS, ENVIRONMENT_ILLEGAL)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "run": [{"player": m.player, "move": m.move} for m in self.final_run],
            "iterations": [
                {
                    "loop": e.loop,
                    "case": e.case,
                    "formula": pretty(e.state.formula),
                    "valuation": dict(e.state.valuation),
                    "omega": [{"player": m.player, "move": m.move} for m in e.state.omega],
                    "moves": [{"player": m.player, "move": m.move} for m in e.moves],
                }
                for e in self.events
            ],
        }


class StrategyError(ValueError):
    pass


def _premise_for_choice(
    proof: Proof, step: ProofStep, expected: Formula
) -> ProofStep | None:
    for pid in step.premises:
        p = proof.step(pid)
        if p.formula == expected:
            return p
    return None


def _premise_for_constant(
    proof: Proof, step: ProofStep, e: Formula, addr: Address
) -> tuple[ProofStep, str] | None:
    """The Rule A premise reflecting a quantifier choice at addr: the step
    whose formula is e with the quantifier body on a variable fresh for e.
    Returns the step and that variable."""
    from .syntax import resolve

    qa = resolve(e, addr).quasiatom
    e_vars = variables(e)
    for pid in step.premises:
        p = proof.step(pid)
        for y in sorted(variables(p.formula) - e_vars):
            body = substitute(qa.body, qa.var, Var(y))
            if replace_at(e, addr, body) == p.formula:
                return p, y
        if qa.var not in free_variables(qa.body):
            if replace_at(e, addr, qa.body) == p.formula:
                return p, qa.var
    return None


def extract_and_play(
    proof: Proof,
    interp: Interpretation,
    env_moves: list[str],
    max_steps: int = 1000,
    budget: Budget = Budget(),
    check: bool = True,
) -> PlayTranscript:
    """Play the strategy the proof encodes against a scripted environment.

    env_moves is consumed one entry per wait; "pass" (or running out of
    entries) ends the play, which is then scored by the winner evaluator.
    """
    if check:
        result = check_proof(proof, budget)
        if not result:
            raise StrategyError(
                f"proof fails at step {result.step_id}: {result.message}"
            )
        for s in proof.steps:
            if not is_reasonable(s.formula):
                raise StrategyError(f"step {s.id} is not reasonable")
    conclusion = proof.conclusion
    if free_variables(conclusion):
        raise StrategyError("the played formula must be closed")
    if not is_blind_free(conclusion):
        raise StrategyError("certified play requires a blind-free formula")

    current = proof.steps[-1]
    valuation: dict[str, int] = {}
    omega: list[LabMove] = []
    theta: list[LabMove] = []
    events: list[PlayEvent] = []
    script = list(env_moves)
    root_game = conclusion  # closed, so the valuation record starts empty

    def snapshot() -> MachineState:
        # the valuation record mirrors exactly the free variables in play
        assert set(valuation) == free_variables(current.formula)
        return MachineState(current.formula, tuple(omega), tuple(sorted(valuation.items())))

    def record(loop: str, case: str, state: MachineState, before: Run, new: list[LabMove]) -> None:
        events.append(PlayEvent(loop, case, state, before, tuple(new)))

    def finish(verdict: str, reason: str = "") -> PlayTranscript:
        return PlayTranscript(tuple(theta), events, verdict, reason)

    steps_taken = 0
    while True:
        steps_taken += 1
        if steps_taken > max_steps:
            break
        state = snapshot()
        theta_before = tuple(theta)
        tag = current.rule.tag
        K = state.ground()

        if tag == "B1":
            addr, i = current.rule.addr, current.rule.index
            move = LabMove(TOP_PLAYER, f"{addr_str(addr)}{i}")
            theta.append(move)
            premise = proof.step(current.premises[0])
            keep = free_variables(premise.formula)
            for z in list(valuation):
                if z not in keep:
                    del valuation[z]
            current = premise
            record("main", "B1", state, theta_before, [move])
            continue

        if tag == "B2":
            addr, t = current.rule.addr, current.rule.term
            c = t.value if isinstance(t, Const) else valuation.get(t.name, 0)
            move = LabMove(TOP_PLAYER, f"{addr_str(addr)}{c}")
            theta.append(move)
            premise = proof.step(current.premises[0])
            if isinstance(t, Var) and t.name in free_variables(premise.formula):
                valuation[t.name] = c
            current = premise
            record("main", "B2", state, theta_before, [move])
            continue

        if tag == "Co":
            premise = proof.step(current.premises[0])
            hyb_name = current.rule.hybrid
            pos, neg = next(
                (p, n)
                for p, n in hybrid_pairs(premise.formula)
                if p.quasiatom.letter.name == hyb_name
            )
            pi, nu = pos.address, neg.address
            omega_run = tuple(omega)
            pi_payloads = [m.move for m in project(omega_run, pi, "raw")]
            nu_payloads = [m.move for m in project(omega_run, nu, "raw")]
            new_moves = [
                LabMove(TOP_PLAYER, f"{addr_str(pi)}{payload}") for payload in nu_payloads
            ] + [
                LabMove(TOP_PLAYER, f"{addr_str(nu)}{payload}") for payload in pi_payloads
            ]
            theta.extend(new_moves)
            omega.extend(new_moves)
            current = premise
            record("main", "Co", state, theta_before, new_moves)
            continue

        if tag != "A":
            return finish(ABORTED, f"step {current.id} has unsupported rule {tag}")

        # Rule A: wait for the environment.
        if not script:
            break
        entry = script.pop(0)
        if entry == "pass":
            record("inner", "pass", state, theta_before, [])
            break
        env_move = LabMove(BOT_PLAYER, entry)
        if not is_unilegal(root_game, interp, tuple(theta) + (env_move,)):
            theta.append(env_move)
            record("inner", "env-illegal", state, theta_before, [env_move])
            return finish(ENVIRONMENT_ILLEGAL, f"environment move {entry!r} is illegal")
        parsed = parse_move(K, entry)
        if parsed is None:
            theta.append(env_move)
            record("inner", "env-illegal", state, theta_before, [env_move])
            return finish(ENVIRONMENT_ILLEGAL, f"environment move {entry!r} does not resolve")
        occ, payload = parsed
        qa = occ.quasiatom

        if isinstance(qa, Atom) and qa.letter.kind == "general":
            theta.append(env_move)
            omega.append(env_move)
            record("inner", "env-general", state, theta_before, [env_move])
            continue

        if isinstance(qa, Atom) and qa.letter.kind == "hybrid":
            pos, neg = next(
                (p, n)
                for p, n in hybrid_pairs(current.formula)
                if p.quasiatom.letter.name == qa.letter.name
            )
            sigma = neg.address if occ.address == pos.address else pos.address
            reply = LabMove(TOP_PLAYER, f"{addr_str(sigma)}{payload}")
            theta.append(env_move)
            theta.append(reply)
            omega.append(env_move)
            omega.append(reply)
            record("inner", "env-hybrid", state, theta_before, [env_move, reply])
            continue

        if isinstance(qa, (ChoAnd, ChoOr)):
            if env_move.player != choice_mover(qa, occ.polarity):
                theta.append(env_move)
                return finish(ENVIRONMENT_ILLEGAL, f"move {entry!r} at a machine choice")
            i = int(payload)
            expected = replace_at(current.formula, occ.address, qa.parts[i - 1])
            premise = _premise_for_choice(proof, current, expected)
            if premise is None:
                return finish(
                    ABORTED,
                    f"no premise of step {current.id} matches {pretty(expected)}",
                )
            theta.append(env_move)
            keep = free_variables(premise.formula)
            for z in list(valuation):
                if z not in keep:
                    del valuation[z]
            current = premise
            record("inner", "env-choice", state, theta_before, [env_move])
            continue

        if isinstance(qa, (ChoAll, ChoEx)):
            if env_move.player != choice_mover(qa, occ.polarity):
                theta.append(env_move)
                return finish(ENVIRONMENT_ILLEGAL, f"move {entry!r} at a machine choice")
            c = int(payload)
            found = _premise_for_constant(proof, current, current.formula, occ.address)
            if found is None:
                return finish(
                    ABORTED, f"no quantifier premise of step {current.id} found"
                )
            premise, y = found
            theta.append(env_move)
            if y in free_variables(premise.formula):
                valuation[y] = c
            current = premise
            record("inner", "env-choice-const", state, theta_before, [env_move])
            continue

        theta.append(env_move)
        return finish(ENVIRONMENT_ILLEGAL, f"move {entry!r} fits no subcase")

    record("main", "final", snapshot(), tuple(theta), [])
    final = tuple(theta)
    won = winner(root_game, interp, final) == TOP_PLAYER
    return finish(MACHINE_WINS if won else MACHINE_LOSES)


# ---------------------------------------------------------------------------
# Claim 1 invariants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Claim1Result:
    ok: bool
    iteration: int | None = None
    which: str = ""

    def __bool__(self) -> bool:
        return self.ok


def assert_claim1(
    transcript: PlayTranscript, proof: Proof, interp: Interpretation
) -> Claim1Result:
    """Per iteration: the quasiatom-play position is manageable for the
    current (grounded) hyperformula, and the residual of the original game
    under theta matches the residual of the current game under omega."""
    root = proof.conclusion

    for idx, event in enumerate(transcript.events):
        K = event.state.ground()
        omega = event.state.omega
        manageable = is_manageable(K, omega)
        if not manageable:
            return Claim1Result(
                False, idx, f"manageability clause {manageable.clause} at {manageable.address}"
            )
        left = residual(root, interp, event.theta_before)
        right = residual(K, interp, omega)
        if general_dehybridization(left.formula) != general_dehybridization(right.formula):
            return Claim1Result(
                False,
                idx,
                f"residual formulas diverge: {pretty(left.formula)} vs {pretty(right.formula)}",
            )
        if left.stored != right.stored:
            return Claim1Result(False, idx, "stored quasiatom runs diverge")
    return Claim1Result(True)


# ---------------------------------------------------------------------------
# Exhaustive environment enumeration (testing aid)
# ---------------------------------------------------------------------------


def enumerate_plays(
    proof: Proof,
    interp: Interpretation,
    max_env_moves: int,
    budget: Budget = Budget(),
) -> list[tuple[list[str], PlayTranscript]]:
    """Play every legal environment script of at most max_env_moves moves
    (each script implicitly ends with a pass).  The proof is checked once.

    Scripts are grown move by move: after replaying a prefix, every legal
    environment continuation at the reached position branches."""
    result = check_proof(proof, budget)
    if not result:
        raise StrategyError(f"proof fails at step {result.step_id}: {result.message}")
    root = proof.conclusion
    out: list[tuple[list[str], PlayTranscript]] = []

    def explore(prefix: list[str]) -> None:
        transcript = extract_and_play(
            proof, interp, prefix + ["pass"], check=False, budget=budget
        )
        out.append((prefix + ["pass"], transcript))
        if len(prefix) >= max_env_moves:
            return
        if transcript.verdict in (ENVIRONMENT_ILLEGAL, ABORTED):
            return
        for move in legal_moves(root, interp, transcript.final_run, BOT_PLAYER):
            explore(prefix + [move])

    explore([])
    return out
