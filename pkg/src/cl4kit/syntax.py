"""Formulas and hyperformulas: AST, parser, printer, occurrence analysis.

The operator vocabulary has three families:

* parallel: ``~`` (negation), ``/\\`` (conjunction), ``\\/`` (disjunction),
  ``->`` (implication);
* choice: ``!/\\`` and ``!\\/`` (connectives), ``!A x.`` and ``!E x.``
  (quantifiers) -- resolved by a single move of one player;
* blind: ``A x.`` and ``E x.`` -- classical quantifiers with no moves.

Atoms are built from three sorts of letters.  Elementary letters are
lowercase identifiers (``p``, ``q1``), general letters are uppercase
identifiers (``P``, ``Chess``), and a hybrid letter ``P#q`` pairs a general
letter with the elementary letter that stands in for it inside a proof.
``T`` and ``F`` are the logical 0-ary elementary letters (truth / falsehood).

Identifiers from {u,v,w,x,y,z} with an optional digit suffix are variables,
never letters.  Terms are variables or natural-number constants.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

ELEMENTARY = "elementary"
GENERAL = "general"
HYBRID = "hybrid"

_VAR_RE = re.compile(r"[uvwxyz][0-9]*\Z")
_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


def is_variable_name(name: str) -> bool:
    return bool(_VAR_RE.match(name))


# ---------------------------------------------------------------------------
# Terms and letters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    value: int

    def __str__(self) -> str:
        return str(self.value)


Term = Union[Var, Const]


@dataclass(frozen=True)
class Letter:
    """A letter: elementary, general, or hybrid (general # elementary)."""

    kind: str
    name: str
    arity: int
    general: str | None = None
    elementary: str | None = None

    @property
    def logical(self) -> bool:
        return self.kind == ELEMENTARY and self.name in ("T", "F") and self.arity == 0

    def __str__(self) -> str:
        return self.name


def elem_letter(name: str, arity: int = 0) -> Letter:
    return Letter(ELEMENTARY, name, arity)


def gen_letter(name: str, arity: int = 0) -> Letter:
    return Letter(GENERAL, name, arity)


def hybrid_letter(general: str, elementary: str, arity: int = 0) -> Letter:
    return Letter(HYBRID, f"{general}#{elementary}", arity, general, elementary)


# ---------------------------------------------------------------------------
# Hyperformula nodes
# ---------------------------------------------------------------------------


class Formula:
    """Base class for hyperformula nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Atom(Formula):
    letter: Letter
    args: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        if len(self.args) != self.letter.arity:
            raise ValueError(
                f"letter {self.letter.name} has arity {self.letter.arity}, "
                f"got {len(self.args)} argument(s)"
            )


@dataclass(frozen=True)
class Neg(Formula):
    body: Formula


@dataclass(frozen=True)
class ParAnd(Formula):
    parts: tuple[Formula, ...]

    def __post_init__(self) -> None:
        if len(self.parts) < 2:
            raise ValueError("parallel conjunction needs at least 2 parts")


@dataclass(frozen=True)
class ParOr(Formula):
    parts: tuple[Formula, ...]

    def __post_init__(self) -> None:
        if len(self.parts) < 2:
            raise ValueError("parallel disjunction needs at least 2 parts")


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class ChoAnd(Formula):
    parts: tuple[Formula, ...]

    def __post_init__(self) -> None:
        if len(self.parts) < 2:
            raise ValueError("choice conjunction needs at least 2 parts")


@dataclass(frozen=True)
class ChoOr(Formula):
    parts: tuple[Formula, ...]

    def __post_init__(self) -> None:
        if len(self.parts) < 2:
            raise ValueError("choice disjunction needs at least 2 parts")


@dataclass(frozen=True)
class BlindAll(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class BlindEx(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class ChoAll(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class ChoEx(Formula):
    var: str
    body: Formula


TOP = Atom(elem_letter("T"))
BOT = Atom(elem_letter("F"))

_QUANTS = (BlindAll, BlindEx, ChoAll, ChoEx)
_CHOICE = (ChoAnd, ChoOr, ChoAll, ChoEx)


def is_choice(f: Formula) -> bool:
    return isinstance(f, _CHOICE)


def is_quasiatom(f: Formula) -> bool:
    return isinstance(f, Atom) or is_choice(f)


# ---------------------------------------------------------------------------
# Addresses and occurrences
# ---------------------------------------------------------------------------

Address = tuple[int, ...]


def addr_str(addr: Address) -> str:
    return "".join(f"{i}." for i in addr)


def parse_addr(s: str) -> Address:
    s = s.strip()
    if not s:
        return ()
    if not re.fullmatch(r"(\d+\.)+", s):
        raise ValueError(f"bad address {s!r}")
    return tuple(int(tok) for tok in s.split(".")[:-1])


@dataclass(frozen=True)
class Occurrence:
    address: Address
    quasiatom: Formula
    polarity: int  # +1 positive, -1 negative


def surface_occurrences(f: Formula) -> list[Occurrence]:
    """All quasiatoms of f with address and polarity, left to right."""

    out: list[Occurrence] = []

    def walk(node: Formula, addr: Address, pol: int) -> None:
        if is_quasiatom(node):
            out.append(Occurrence(addr, node, pol))
        elif isinstance(node, Neg):
            walk(node.body, addr, -pol)
        elif isinstance(node, (BlindAll, BlindEx)):
            walk(node.body, addr, pol)
        elif isinstance(node, (ParAnd, ParOr)):
            for i, part in enumerate(node.parts, start=1):
                walk(part, addr + (i,), pol)
        elif isinstance(node, Implies):
            walk(node.lhs, addr + (1,), -pol)
            walk(node.rhs, addr + (2,), pol)
        else:  # pragma: no cover
            raise TypeError(f"unknown node {node!r}")

    walk(f, (), 1)
    return out


def resolve(f: Formula, addr: Address) -> Occurrence:
    """The quasiatom addressed by addr (negation and blind quantifiers are
    transparent; only parallel connectives consume indices)."""

    node, pol, rest = f, 1, list(addr)
    while True:
        if isinstance(node, Neg):
            node, pol = node.body, -pol
        elif isinstance(node, (BlindAll, BlindEx)):
            node = node.body
        elif isinstance(node, (ParAnd, ParOr, Implies)):
            if not rest:
                raise KeyError(f"address {addr_str(addr)} stops at a parallel node")
            i = rest.pop(0)
            if isinstance(node, Implies):
                if i == 1:
                    node, pol = node.lhs, -pol
                elif i == 2:
                    node = node.rhs
                else:
                    raise KeyError(f"address {addr_str(addr)} does not resolve")
            else:
                if not 1 <= i <= len(node.parts):
                    raise KeyError(f"address {addr_str(addr)} does not resolve")
                node = node.parts[i - 1]
        elif is_quasiatom(node):
            if rest:
                raise KeyError(f"address {addr_str(addr)} overshoots a quasiatom")
            return Occurrence(addr, node, pol)
        else:  # pragma: no cover
            raise TypeError(f"unknown node {node!r}")


def replace_at(f: Formula, addr: Address, new: Formula) -> Formula:
    """f with the quasiatom at addr replaced by new."""

    def rebuild(node: Formula, rest: tuple[int, ...]) -> Formula:
        if isinstance(node, Neg):
            return Neg(rebuild(node.body, rest))
        if isinstance(node, BlindAll):
            return BlindAll(node.var, rebuild(node.body, rest))
        if isinstance(node, BlindEx):
            return BlindEx(node.var, rebuild(node.body, rest))
        if isinstance(node, (ParAnd, ParOr)):
            if not rest:
                raise KeyError(f"address {addr_str(addr)} stops at a parallel node")
            i = rest[0]
            if not 1 <= i <= len(node.parts):
                raise KeyError(f"address {addr_str(addr)} does not resolve")
            parts = tuple(
                rebuild(p, rest[1:]) if j == i else p
                for j, p in enumerate(node.parts, start=1)
            )
            return type(node)(parts)
        if isinstance(node, Implies):
            if not rest:
                raise KeyError(f"address {addr_str(addr)} stops at a parallel node")
            if rest[0] == 1:
                return Implies(rebuild(node.lhs, rest[1:]), node.rhs)
            if rest[0] == 2:
                return Implies(node.lhs, rebuild(node.rhs, rest[1:]))
            raise KeyError(f"address {addr_str(addr)} does not resolve")
        if is_quasiatom(node):
            if rest:
                raise KeyError(f"address {addr_str(addr)} overshoots a quasiatom")
            return new
        raise TypeError(f"unknown node {node!r}")  # pragma: no cover

    return rebuild(f, tuple(addr))


# ---------------------------------------------------------------------------
# Structural queries
# ---------------------------------------------------------------------------


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Neg):
        yield from subformulas(f.body)
    elif isinstance(f, (ParAnd, ParOr, ChoAnd, ChoOr)):
        for p in f.parts:
            yield from subformulas(p)
    elif isinstance(f, Implies):
        yield from subformulas(f.lhs)
        yield from subformulas(f.rhs)
    elif isinstance(f, _QUANTS):
        yield from subformulas(f.body)


def atoms(f: Formula) -> Iterator[Atom]:
    for g in subformulas(f):
        if isinstance(g, Atom):
            yield g


def letters(f: Formula) -> set[Letter]:
    return {a.letter for a in atoms(f)}


def letter_names(f: Formula) -> set[str]:
    """Every letter name occurring in f, with hybrid components spelled out."""
    names: set[str] = set()
    for lt in letters(f):
        if lt.kind == HYBRID:
            names.add(lt.general)
            names.add(lt.elementary)
        else:
            names.add(lt.name)
    return names


def variables(f: Formula) -> set[str]:
    """All variable names occurring in f, free or bound."""
    out: set[str] = set()
    for g in subformulas(f):
        if isinstance(g, Atom):
            out.update(t.name for t in g.args if isinstance(t, Var))
        elif isinstance(g, _QUANTS):
            out.add(g.var)
    return out


def constants(f: Formula) -> set[int]:
    out: set[int] = set()
    for a in atoms(f):
        out.update(t.value for t in a.args if isinstance(t, Const))
    return out


def free_variables(f: Formula) -> set[str]:
    def walk(node: Formula, bound: frozenset[str]) -> set[str]:
        if isinstance(node, Atom):
            return {t.name for t in node.args if isinstance(t, Var) and t.name not in bound}
        if isinstance(node, Neg):
            return walk(node.body, bound)
        if isinstance(node, (ParAnd, ParOr, ChoAnd, ChoOr)):
            out: set[str] = set()
            for p in node.parts:
                out |= walk(p, bound)
            return out
        if isinstance(node, Implies):
            return walk(node.lhs, bound) | walk(node.rhs, bound)
        if isinstance(node, _QUANTS):
            return walk(node.body, bound | {node.var})
        raise TypeError(f"unknown node {node!r}")  # pragma: no cover

    return walk(f, frozenset())


def is_closed(f: Formula) -> bool:
    return not free_variables(f)


def substitute(f: Formula, x: str, t: Term) -> Formula:
    """Replace every free occurrence of variable x by term t.

    Plain textual substitution; callers that substitute a variable are
    responsible for capture (the proof rules' side conditions rule it out).
    """

    def walk(node: Formula) -> Formula:
        if isinstance(node, Atom):
            args = tuple(t if isinstance(a, Var) and a.name == x else a for a in node.args)
            return Atom(node.letter, args) if args != node.args else node
        if isinstance(node, Neg):
            return Neg(walk(node.body))
        if isinstance(node, (ParAnd, ParOr, ChoAnd, ChoOr)):
            return type(node)(tuple(walk(p) for p in node.parts))
        if isinstance(node, Implies):
            return Implies(walk(node.lhs), walk(node.rhs))
        if isinstance(node, _QUANTS):
            if node.var == x:
                return node
            return type(node)(node.var, walk(node.body))
        raise TypeError(f"unknown node {node!r}")  # pragma: no cover

    return walk(f)


def apply_valuation(f: Formula, valuation: dict[str, int]) -> Formula:
    """Replace every free variable by the constant the valuation assigns to
    it (unmapped variables read as 0)."""
    out = f
    for x in sorted(free_variables(f)):
        out = substitute(out, x, Const(valuation.get(x, 0)))
    return out


def is_elementary(f: Formula) -> bool:
    """No choice operators, no general atoms, no hybrid atoms."""
    for g in subformulas(f):
        if is_choice(g):
            return False
        if isinstance(g, Atom) and g.letter.kind != ELEMENTARY:
            return False
    return True


def is_formula(f: Formula) -> bool:
    """A formula is a hyperformula without hybrid letters."""
    return all(a.letter.kind != HYBRID for a in atoms(f))


def is_blind_free(f: Formula) -> bool:
    return not any(isinstance(g, (BlindAll, BlindEx)) for g in subformulas(f))


def aggregate_complexity(f: Formula) -> int:
    """Occurrences of logical operators plus occurrences of general atoms.

    An n-ary connective node counts as n-1 operator occurrences, matching
    the count in the written chain.
    """
    if isinstance(f, Atom):
        return 1 if f.letter.kind == GENERAL else 0
    if isinstance(f, Neg):
        return 1 + aggregate_complexity(f.body)
    if isinstance(f, (ParAnd, ParOr, ChoAnd, ChoOr)):
        return len(f.parts) - 1 + sum(aggregate_complexity(p) for p in f.parts)
    if isinstance(f, Implies):
        return 1 + aggregate_complexity(f.lhs) + aggregate_complexity(f.rhs)
    if isinstance(f, _QUANTS):
        return 1 + aggregate_complexity(f.body)
    raise TypeError(f"unknown node {f!r}")  # pragma: no cover


def general_dehybridization(f: Formula) -> Formula:
    """Replace every hybrid letter by its general component."""

    def walk(node: Formula) -> Formula:
        if isinstance(node, Atom):
            if node.letter.kind == HYBRID:
                return Atom(gen_letter(node.letter.general, node.letter.arity), node.args)
            return node
        if isinstance(node, Neg):
            return Neg(walk(node.body))
        if isinstance(node, (ParAnd, ParOr, ChoAnd, ChoOr)):
            return type(node)(tuple(walk(p) for p in node.parts))
        if isinstance(node, Implies):
            return Implies(walk(node.lhs), walk(node.rhs))
        if isinstance(node, _QUANTS):
            return type(node)(node.var, walk(node.body))
        raise TypeError(f"unknown node {node!r}")  # pragma: no cover

    return walk(f)


def replace_letter(f: Formula, old: Letter, new: Letter) -> Formula:
    """Replace every atom based on `old` by the same-argument atom on `new`."""
    if old.arity != new.arity:
        raise ValueError("letters must have the same arity")

    def walk(node: Formula) -> Formula:
        if isinstance(node, Atom):
            return Atom(new, node.args) if node.letter == old else node
        if isinstance(node, Neg):
            return Neg(walk(node.body))
        if isinstance(node, (ParAnd, ParOr, ChoAnd, ChoOr)):
            return type(node)(tuple(walk(p) for p in node.parts))
        if isinstance(node, Implies):
            return Implies(walk(node.lhs), walk(node.rhs))
        if isinstance(node, _QUANTS):
            return type(node)(node.var, walk(node.body))
        raise TypeError(f"unknown node {node!r}")  # pragma: no cover

    return walk(f)


# ---------------------------------------------------------------------------
# Reasonableness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Reasonableness:
    status: str  # "reasonable" | "unbalanced" | "unreasonable"
    detail: str = ""

    def __bool__(self) -> bool:
        return self.status == "reasonable"


def _letter_occurrences(f: Formula) -> list[tuple[Atom, int, frozenset[str]]]:
    """Every atom occurrence with its polarity and enclosing binder set,
    including occurrences inside choice subformulas."""
    out: list[tuple[Atom, int, frozenset[str]]] = []

    def walk(node: Formula, pol: int, bound: frozenset[str], surface: bool) -> None:
        if isinstance(node, Atom):
            out.append((node, pol if surface else 0, bound))
        elif isinstance(node, Neg):
            walk(node.body, -pol, bound, surface)
        elif isinstance(node, (ParAnd, ParOr)):
            for p in node.parts:
                walk(p, pol, bound, surface)
        elif isinstance(node, Implies):
            walk(node.lhs, -pol, bound, surface)
            walk(node.rhs, pol, bound, surface)
        elif isinstance(node, (BlindAll, BlindEx)):
            walk(node.body, pol, bound | {node.var}, surface)
        elif isinstance(node, (ChoAnd, ChoOr)):
            for p in node.parts:
                walk(p, pol, bound, False)
        elif isinstance(node, (ChoAll, ChoEx)):
            walk(node.body, pol, bound | {node.var}, False)
        else:  # pragma: no cover
            raise TypeError(f"unknown node {node!r}")

    walk(f, 1, frozenset(), True)
    return out


def is_reasonable(f: Formula) -> Reasonableness:
    """Balanced (each hybrid letter: one positive and one negative surface
    occurrence, elementary component fresh) and no hybrid letter whose two
    atoms disagree on a free argument position."""

    occurrences = _letter_occurrences(f)
    elem_names = {
        a.letter.name for a, _, _ in occurrences if a.letter.kind == ELEMENTARY
    }
    by_hybrid: dict[Letter, list[tuple[Atom, int, frozenset[str]]]] = {}
    for a, pol, bound in occurrences:
        if a.letter.kind == HYBRID:
            by_hybrid.setdefault(a.letter, []).append((a, pol, bound))

    for lt, occs in by_hybrid.items():
        if len(occs) != 2:
            return Reasonableness("unbalanced", f"{lt.name} occurs {len(occs)} time(s)")
        pols = sorted(p for _, p, _ in occs)
        if 0 in pols:
            return Reasonableness("unbalanced", f"{lt.name} has a non-surface occurrence")
        if pols != [-1, 1]:
            return Reasonableness("unbalanced", f"{lt.name} occurrences have the same polarity")
        if lt.elementary in elem_names:
            return Reasonableness(
                "unbalanced", f"elementary component {lt.elementary} occurs in the hyperformula"
            )
        for other in by_hybrid:
            if other != lt and other.elementary == lt.elementary:
                return Reasonableness(
                    "unbalanced",
                    f"{lt.name} and {other.name} share elementary component {lt.elementary}",
                )

    for lt, occs in by_hybrid.items():
        (a1, _, bound1), (a2, _, bound2) = occs
        for t1, t2 in zip(a1.args, a2.args):
            free1 = isinstance(t1, Const) or t1.name not in bound1
            free2 = isinstance(t2, Const) or t2.name not in bound2
            if free1 and free2 and t1 != t2:
                return Reasonableness("unreasonable", lt.name)

    return Reasonableness("reasonable")


# ---------------------------------------------------------------------------
# Fresh names
# ---------------------------------------------------------------------------

_VAR_BASES = "uvwxyz"
_ELEM_BASES = "abcdefghijklmnopqrs"  # t is reserved-looking in prose but fine; keep to s


def _shortlex(bases: str) -> Iterator[str]:
    for b in bases:
        yield b
    k = 0
    while True:
        for b in bases:
            yield f"{b}{k}"
        k += 1


def fresh_variable(used: set[str]) -> str:
    """Shortlex-smallest variable name not in `used`."""
    for name in _shortlex(_VAR_BASES):
        if name not in used:
            return name
    raise AssertionError("unreachable")


def fresh_elem_name(used: set[str]) -> str:
    """Shortlex-smallest elementary letter name not in `used`."""
    for name in _shortlex(_ELEM_BASES):
        if name not in used:
            return name
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------


def _print_term(t: Term) -> str:
    return str(t)


def _atom_str(a: Atom) -> str:
    if not a.args:
        return a.letter.name
    return f"{a.letter.name}({', '.join(_print_term(t) for t in a.args)})"


_QUANT_SYMBOL = {BlindAll: "A", BlindEx: "E", ChoAll: "!A", ChoEx: "!E"}


def pretty(f: Formula) -> str:
    """Canonical ASCII rendering; parse(pretty(f)) == f."""

    def needs_parens_in_chain(g: Formula) -> bool:
        return not isinstance(g, (Atom, Neg))

    def render(g: Formula) -> str:
        if isinstance(g, Atom):
            return _atom_str(g)
        if isinstance(g, Neg):
            inner = render(g.body)
            if isinstance(g.body, (Atom, Neg)):
                return f"~{inner}"
            return f"~({inner})"
        if isinstance(g, (ParAnd, ChoAnd)):
            op = " /\\ " if isinstance(g, ParAnd) else " !/\\ "
            return op.join(
                f"({render(p)})" if needs_parens_in_chain(p) else render(p)
                for p in g.parts
            )
        if isinstance(g, (ParOr, ChoOr)):
            op = " \\/ " if isinstance(g, ParOr) else " !\\/ "

            def sub(p: Formula) -> str:
                if isinstance(p, (Atom, Neg, ParAnd, ChoAnd)):
                    return render(p)
                return f"({render(p)})"

            return op.join(sub(p) for p in g.parts)
        if isinstance(g, Implies):
            lhs = render(g.lhs)
            if isinstance(g.lhs, (Implies, *_QUANTS)):
                lhs = f"({lhs})"
            return f"{lhs} -> {render(g.rhs)}"
        if isinstance(g, _QUANTS):
            body = render(g.body)
            if isinstance(g.body, (ParAnd, ParOr, ChoAnd, ChoOr, Implies)):
                body = f"({body})"
            return f"{_QUANT_SYMBOL[type(g)]} {g.var}. {body}"
        raise TypeError(f"unknown node {g!r}")  # pragma: no cover

    return render(f)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    col: int


_UNICODE_MAP = {
    "¬": "~",  # negation
    "∧": "/\\",
    "∨": "\\/",
    "→": "->",
    "⊔": "CHO_OR",  # square cup: choice disjunction / quantifier
    "⊓": "CHO_AND",  # square cap
    "∀": "A",
    "∃": "E",
    "⊤": "T",
    "⊥": "F",
}


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        start_line, start_col = line, col

        def emit(kind: str, text_: str, length: int) -> None:
            nonlocal i, col
            tokens.append(_Token(kind, text_, start_line, start_col))
            i += length
            col += length

        if ch in _UNICODE_MAP:
            mapped = _UNICODE_MAP[ch]
            if mapped in ("CHO_OR", "CHO_AND"):
                emit(mapped, ch, 1)
            elif mapped in ("A", "E"):
                emit("QUANT_" + mapped, ch, 1)
            elif mapped == "T":
                emit("IDENT", "T", 1)
            elif mapped == "F":
                emit("IDENT", "F", 1)
            else:
                emit(mapped, ch, 1)
            continue
        if text.startswith("!/\\", i):
            emit("CHO_AND", "!/\\", 3)
        elif text.startswith("!\\/", i):
            emit("CHO_OR", "!\\/", 3)
        elif text.startswith("!A", i) and not text[i + 2 : i + 3].isalnum():
            emit("CHO_A", "!A", 2)
        elif text.startswith("!E", i) and not text[i + 2 : i + 3].isalnum():
            emit("CHO_E", "!E", 2)
        elif text.startswith("/\\", i):
            emit("/\\", "/\\", 2)
        elif text.startswith("\\/", i):
            emit("\\/", "\\/", 2)
        elif text.startswith("->", i):
            emit("->", "->", 2)
        elif ch == "~":
            emit("~", "~", 1)
        elif ch in "(),.#":
            emit(ch, ch, 1)
        elif ch.isdigit():
            m = re.match(r"\d+", text[i:])
            emit("NUMBER", m.group(), len(m.group()))
        elif ch.isalpha():
            m = re.match(r"[A-Za-z][A-Za-z0-9_]*", text[i:])
            emit("IDENT", m.group(), len(m.group()))
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], arities: dict[str, int]):
        self.tokens = tokens
        self.pos = 0
        self.arities = arities  # letter name -> arity seen so far

    def peek(self, offset: int = 0) -> _Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text or 'end of input'!r}", tok.line, tok.col)
        return self.next()

    def error(self, msg: str) -> ParseError:
        tok = self.peek()
        return ParseError(msg, tok.line, tok.col)

    # -- grammar ----------------------------------------------------------

    def formula(self) -> Formula:
        lhs = self.or_chain()
        if self.peek().kind == "->":
            self.next()
            return Implies(lhs, self.formula())
        return lhs

    def _chain(self, sub, par_kind: str, cho_kind: str, par_cls, cho_cls) -> Formula:
        first = sub()
        kind = self.peek().kind
        if kind not in (par_kind, cho_kind):
            return first
        node_kind = kind
        parts = [first]
        while self.peek().kind in (par_kind, cho_kind):
            tok = self.peek()
            if tok.kind != node_kind:
                raise ParseError(
                    "mixing parallel and choice connectives at one level "
                    "requires parentheses",
                    tok.line,
                    tok.col,
                )
            self.next()
            parts.append(sub())
        cls = par_cls if node_kind == par_kind else cho_cls
        return cls(tuple(parts))

    def or_chain(self) -> Formula:
        return self._chain(self.and_chain, "\\/", "CHO_OR", ParOr, ChoOr)

    def and_chain(self) -> Formula:
        return self._chain(self.unary, "/\\", "CHO_AND", ParAnd, ChoAnd)

    def _quantifier_ahead(self) -> str | None:
        """Return the quantifier class name when the upcoming tokens read as
        a quantifier prefix, else None."""
        tok = self.peek()
        if tok.kind in ("CHO_A", "CHO_E", "QUANT_A", "QUANT_E"):
            return {"CHO_A": "ChoAll", "CHO_E": "ChoEx", "QUANT_A": "BlindAll", "QUANT_E": "BlindEx"}[tok.kind]
        if tok.kind in ("CHO_AND", "CHO_OR") and tok.text in ("⊓", "⊔"):
            nxt = self.peek(1)
            if nxt.kind == "IDENT" and is_variable_name(nxt.text):
                return "ChoAll" if tok.kind == "CHO_AND" else "ChoEx"
            return None
        if tok.kind == "IDENT" and tok.text in ("A", "E"):
            nxt = self.peek(1)
            if nxt.kind == "IDENT" and is_variable_name(nxt.text):
                after = self.peek(2)
                if after.kind == ".":
                    return "BlindAll" if tok.text == "A" else "BlindEx"
        return None

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "~":
            self.next()
            return Neg(self.unary())
        quant = self._quantifier_ahead()
        if quant is not None:
            self.next()
            var_tok = self.expect("IDENT")
            if not is_variable_name(var_tok.text):
                raise ParseError(
                    f"{var_tok.text!r} is not a variable (variables are u..z with "
                    "an optional digit suffix)",
                    var_tok.line,
                    var_tok.col,
                )
            if self.peek().kind == ".":
                self.next()
            body = self.formula()
            cls = {"ChoAll": ChoAll, "ChoEx": ChoEx, "BlindAll": BlindAll, "BlindEx": BlindEx}[quant]
            return cls(var_tok.text, body)
        return self.atom_expr()

    def atom_expr(self) -> Formula:
        tok = self.peek()
        if tok.kind == "(":
            self.next()
            inner = self.formula()
            self.expect(")")
            return inner
        if tok.kind == "IDENT":
            return self.atom()
        raise self.error(f"expected a formula, found {tok.text or 'end of input'!r}")

    def atom(self) -> Formula:
        name_tok = self.expect("IDENT")
        name = name_tok.text
        if is_variable_name(name):
            raise ParseError(f"{name!r} is a variable, not a letter", name_tok.line, name_tok.col)
        hybrid_elem: str | None = None
        if self.peek().kind == "#":
            self.next()
            elem_tok = self.expect("IDENT")
            if not name[0].isupper() or name in ("T", "F"):
                raise ParseError(
                    f"{name!r} cannot be the general component of a hybrid letter",
                    name_tok.line,
                    name_tok.col,
                )
            if not elem_tok.text[0].islower() or is_variable_name(elem_tok.text):
                raise ParseError(
                    f"{elem_tok.text!r} cannot be the elementary component of a hybrid letter",
                    elem_tok.line,
                    elem_tok.col,
                )
            hybrid_elem = elem_tok.text
        args: tuple[Term, ...] = ()
        if self.peek().kind == "(":
            self.next()
            arg_list = [self.term()]
            while self.peek().kind == ",":
                self.next()
                arg_list.append(self.term())
            self.expect(")")
            args = tuple(arg_list)
        if name == "T" and not args and hybrid_elem is None:
            return TOP
        if name == "F" and not args and hybrid_elem is None:
            return BOT
        arity = len(args)
        key = f"{name}#{hybrid_elem}" if hybrid_elem else name
        seen = self.arities.setdefault(key, arity)
        if seen != arity:
            raise ParseError(
                f"letter {key} used with arity {arity} after arity {seen}",
                name_tok.line,
                name_tok.col,
            )
        if hybrid_elem is not None:
            return Atom(hybrid_letter(name, hybrid_elem, arity), args)
        if name[0].isupper():
            return Atom(gen_letter(name, arity), args)
        return Atom(elem_letter(name, arity), args)

    def term(self) -> Term:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.next()
            return Const(int(tok.text))
        if tok.kind == "IDENT" and is_variable_name(tok.text):
            self.next()
            return Var(tok.text)
        raise self.error(f"expected a term, found {tok.text or 'end of input'!r}")


def parse(text: str) -> Formula:
    """Parse a formula/hyperformula from its ASCII (or Unicode) rendering."""
    parser = _Parser(_tokenize(text), {})
    f = parser.formula()
    tok = parser.peek()
    if tok.kind != "EOF":
        raise ParseError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)
    return f
