"""Probabilistic Turing machines: spec files, an exact simulator, a compiler, recognition checks.

Every (state, symbol) pair has exactly two transition triples, picked by a
fair coin; equal triples make the step deterministic.  The simulator here is
the reference the compiled terms are checked against.

Tape layout, shared by the simulator and the compiled term: a configuration
is ``<left, head, right, state>``.  Both tape halves keep the cell nearest
the head at the end of their list, so ``left`` is in reading order and
``right`` is reversed.  Moving off either end reads the blank.  The machine
starts in the initial state on the last input symbol, with the rest of the
input to its left.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .ast import MODAL, NONMODAL, RAND, Case, N, Num, Proj, Rec, Term, app, arrow, lam, pair, prod, var
from .bigstep import eval as evaluate
from .dist import Distribution
from .stdlib import (
    Alphabet,
    compile_polynomial,
    eval_polynomial,
    mk_append,
    mk_encode,
    mk_ntos,
    mk_ston,
    mk_switch,
    mk_tail,
)
from .types import TypeCheckError, check_first_order

MOVES = ("L", "S", "R")


class TMSpecError(ValueError):
    def __init__(self, message: str, line: int | None = None) -> None:
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class Triple(NamedTuple):
    state: str
    symbol: str
    move: str


@dataclass(frozen=True)
class TMSpec:
    states: tuple[str, ...]
    initial: str
    finals: frozenset[str]
    alphabet: Alphabet
    transitions: dict[tuple[str, str], tuple[Triple, Triple]] = field(hash=False)
    budget: tuple[int, ...]

    @property
    def blank(self) -> str:
        return self.alphabet.symbols[0]

    def budget_at(self, n: int) -> int:
        return eval_polynomial(self.budget, n)


# ------------------------------------------------------------ spec files

_NAME = r"[^\s,()|:#]+"
_TRIPLE = rf"\(\s*({_NAME})\s*,\s*({_NAME})\s*,\s*([LSR])\s*\)"
_TRANS_RE = re.compile(rf"^(?:trans\s+)?({_NAME})\s*,\s*({_NAME})\s*->\s*{_TRIPLE}\s*\|\s*{_TRIPLE}$")
_KEYS = ("states", "initial", "finals", "alphabet", "budget")


def _strip_comment(line: str) -> str:
    for marker in ("#", "--"):
        i = line.find(marker)
        if i >= 0:
            line = line[:i]
    return line.strip()


def _names(value: str, lineno: int) -> list[str]:
    items = [v.strip() for v in value.split(",")] if value.strip() else []
    for v in items:
        if not re.fullmatch(_NAME, v):
            raise TMSpecError(f"bad name {v!r}", lineno)
    return items


def parse_tm_spec(text: str) -> TMSpec:
    """Parse and validate a machine description.

    Final states with no transitions for a symbol get an implicit
    self-loop that rewrites the symbol and stays put.
    """
    fields: dict[str, tuple[str, int]] = {}
    raw: list[tuple[re.Match, int]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = _strip_comment(line)
        if not line or line == "trans:":
            continue
        m = _TRANS_RE.match(line)
        if m:
            raw.append((m, lineno))
            continue
        key, sep, value = line.partition(":")
        key = key.strip()
        if not sep or key not in _KEYS:
            raise TMSpecError(f"cannot parse {line!r}", lineno)
        if key in fields:
            raise TMSpecError(f"duplicate field {key!r}", lineno)
        fields[key] = (value, lineno)
    for key in _KEYS:
        if key not in fields and key != "finals":
            raise TMSpecError(f"missing field {key!r}")

    states = _names(*fields["states"])
    if not states or len(set(states)) != len(states):
        raise TMSpecError("states must be a non-empty list of distinct names", fields["states"][1])
    initial_list = _names(*fields["initial"])
    if len(initial_list) != 1 or initial_list[0] not in states:
        raise TMSpecError("initial must name one declared state", fields["initial"][1])
    finals = _names(*fields.get("finals", ("", 0)))
    for q in finals:
        if q not in states:
            raise TMSpecError(f"undeclared final state {q!r}", fields["finals"][1])
    try:
        alphabet = Alphabet(tuple(_names(*fields["alphabet"])))
    except ValueError as exc:
        raise TMSpecError(str(exc), fields["alphabet"][1]) from None
    value, lineno = fields["budget"]
    try:
        budget = tuple(int(c) for c in _names(value, lineno))
    except ValueError:
        raise TMSpecError("budget must be a list of natural coefficients", lineno) from None
    if not budget or any(c < 0 for c in budget):
        raise TMSpecError("budget must be a non-empty list of natural coefficients", lineno)

    transitions: dict[tuple[str, str], tuple[Triple, Triple]] = {}
    for m, ln in raw:
        q, s = m.group(1), m.group(2)
        t1 = Triple(m.group(3), m.group(4), m.group(5))
        t2 = Triple(m.group(6), m.group(7), m.group(8))
        for name in (q, t1.state, t2.state):
            if name not in states:
                raise TMSpecError(f"undeclared state {name!r}", ln)
        for name in (s, t1.symbol, t2.symbol):
            if name not in alphabet.symbols:
                raise TMSpecError(f"undeclared symbol {name!r}", ln)
        if (q, s) in transitions:
            raise TMSpecError(f"duplicate transitions for ({q}, {s})", ln)
        transitions[(q, s)] = (t1, t2)

    for q in states:
        for s in alphabet.symbols:
            if (q, s) in transitions:
                continue
            if q in finals:
                loop = Triple(q, s, "S")
                transitions[(q, s)] = (loop, loop)
            else:
                raise TMSpecError(f"missing pair of transitions for ({q}, {s})")
    for q in finals:
        for s in alphabet.symbols:
            loop = Triple(q, s, "S")
            if transitions[(q, s)] != (loop, loop):
                warnings.warn(f"final state {q!r} does not self-loop on {s!r}", stacklevel=2)
    ordered = {(q, s): transitions[(q, s)] for q in states for s in alphabet.symbols}
    return TMSpec(tuple(states), initial_list[0], frozenset(finals), alphabet, ordered, budget)


def emit_tm_spec(spec: TMSpec) -> str:
    """Canonical text form; ``parse_tm_spec`` inverts it exactly."""
    fmt = lambda t: f"({t.state}, {t.symbol}, {t.move})"  # noqa: E731
    lines = [
        f"states: {', '.join(spec.states)}",
        f"initial: {spec.initial}",
        f"finals: {', '.join(q for q in spec.states if q in spec.finals)}",
        f"alphabet: {', '.join(spec.alphabet.symbols)}",
        f"budget: {', '.join(map(str, spec.budget))}",
    ]
    for (q, s), (t1, t2) in spec.transitions.items():
        lines.append(f"trans {q}, {s} -> {fmt(t1)} | {fmt(t2)}")
    return "\n".join(lines) + "\n"


# -------------------------------------------------------------- simulator


@dataclass(frozen=True, order=True)
class TMConfig:
    left: tuple[str, ...]
    head: str
    right: tuple[str, ...]
    state: str


def input_symbols(x: int) -> tuple[str, ...]:
    """Binary digits of ``x``, most significant first; empty for 0."""
    return tuple(bin(x)[2:]) if x else ()


def initial_config(spec: TMSpec, word: tuple[str, ...]) -> TMConfig:
    if not word:
        return TMConfig((), spec.blank, (), spec.initial)
    return TMConfig(tuple(word[:-1]), word[-1], (), spec.initial)


def _apply(spec: TMSpec, c: TMConfig, t: Triple) -> TMConfig:
    if t.move == "S":
        return TMConfig(c.left, t.symbol, c.right, t.state)
    if t.move == "R":
        left = c.left + (t.symbol,)
        if c.right:
            return TMConfig(left, c.right[-1], c.right[:-1], t.state)
        return TMConfig(left, spec.blank, (), t.state)
    right = c.right + (t.symbol,)
    if c.left:
        return TMConfig(c.left[:-1], c.left[-1], right, t.state)
    return TMConfig((), spec.blank, right, t.state)


def simulate_tm(spec: TMSpec, word: tuple[str, ...] | str, steps: int) -> Distribution:
    """Exact distribution over configurations after ``steps`` steps."""
    word = tuple(word)
    for s in word:
        if s not in spec.alphabet.symbols:
            raise TMSpecError(f"input symbol {s!r} is not in the alphabet")
    current: dict[TMConfig, Fraction] = {initial_config(spec, word): Fraction(1)}
    half = Fraction(1, 2)
    for _ in range(steps):
        nxt: dict[TMConfig, Fraction] = {}
        for c, p in current.items():
            for t in spec.transitions[(c.state, c.head)]:
                d = _apply(spec, c, t)
                nxt[d] = nxt.get(d, Fraction(0)) + p * half
        current = nxt
    return Distribution(current)


def output_projection(c: TMConfig) -> int:
    """Read the whole tape left to right, keep the digit symbols, parse as binary."""
    digits = "".join(s for s in c.left + (c.head,) + tuple(reversed(c.right)) if s in ("0", "1"))
    return int(digits, 2) if digits else 0


def run_oracle(spec: TMSpec, x: int) -> Distribution:
    """Output distribution of the machine on numeral ``x`` after ``p(|x|)`` steps."""
    steps = spec.budget_at(x.bit_length())
    return simulate_tm(spec, input_symbols(x), steps).map(output_projection)


def config_value(spec: TMSpec, c: TMConfig) -> tuple:
    """The numeral tuple ``(left, (head, (right, state)))`` the compiled term uses for ``c``."""
    sym = spec.alphabet.index
    enc = lambda cells: _encode_cells(spec.alphabet, cells)  # noqa: E731
    return (enc(c.left), (1 << sym(c.head), (enc(c.right), 1 << spec.states.index(c.state))))


def _encode_cells(alphabet: Alphabet, cells: tuple[str, ...]) -> int:
    from .stdlib import encode_string

    return encode_string(alphabet, [alphabet.index(s) for s in cells])


# --------------------------------------------------------------- compiler

_NN = prod(N, N)


def config_type() -> object:
    return prod(N, N, N, N)


def compile_tm(spec: TMSpec) -> Term:
    """Closed term of type ``!N -> N`` with the machine's output distribution.

    It runs ``p(|x|)`` transition steps from the initial configuration on the
    digits of ``x`` and reads the final tape back as a binary numeral.
    """
    sigma = spec.alphabet
    for digit in ("0", "1"):
        if digit not in sigma.symbols:
            raise TMSpecError("the alphabet must contain the symbols '0' and '1'")
    if sigma.symbols[0] in ("0", "1"):
        raise TMSpecError("the first alphabet symbol is the blank and cannot be a digit")
    C = config_type()
    append, tail = mk_append(sigma), mk_tail(sigma)

    def sym(s: str) -> Num:
        return Num(1 << sigma.index(s))

    def st(q: str) -> Num:
        return Num(1 << spec.states.index(q))

    c = var("c")
    left, head = Proj(1, c), Proj(1, Proj(2, c))
    right, state = Proj(1, Proj(2, Proj(2, c))), Proj(2, Proj(2, Proj(2, c)))
    tr = var("tr")

    def step(t: Triple) -> Term:
        if t.move == "S":
            return pair(left, sym(t.symbol), right, st(t.state))
        if t.move == "R":
            body = pair(app(append, pair(left, sym(t.symbol))), Proj(2, tr), Proj(1, tr), st(t.state))
            return app(lam("tr", NONMODAL, _NN, body), app(tail, right))
        body = pair(Proj(1, tr), Proj(2, tr), app(append, pair(right, sym(t.symbol))), st(t.state))
        return app(lam("tr", NONMODAL, _NN, body), app(tail, left))

    def transition(q: str, s: str) -> Term:
        t1, t2 = spec.transitions[(q, s)]
        if t1 == t2:
            return step(t1)
        return Case(C, RAND, step(t1), step(t1), step(t2))

    # switch over functions C -> C so only the selected transition is evaluated
    cc = arrow(NONMODAL, C, C)
    ident = lam("c", NONMODAL, C, c)
    sym_switch = mk_switch(cc, sigma)
    state_switch = mk_switch(cc, len(spec.states))

    def on_head(q: str) -> Term:
        branches = [lam("c", NONMODAL, C, transition(q, s)) for s in sigma.symbols]
        return lam("c", NONMODAL, C, app(sym_switch, head, *branches, ident, c))

    delta = lam("c", NONMODAL, C, app(state_switch, state, *map(on_head, spec.states), ident, c))

    init = lam(
        "w",
        NONMODAL,
        N,
        app(lam("tr", NONMODAL, _NN, pair(Proj(1, tr), Proj(2, tr), Num(0), st(spec.initial))), app(tail, var("w"))),
    )

    # pour the right half onto the left one cell at a time; extra pops read blanks
    stt = var("st")
    move_one = app(
        lam("tr", NONMODAL, _NN, pair(Proj(1, tr), app(append, pair(Proj(2, stt), Proj(2, tr))))),
        app(tail, Proj(1, stt)),
    )
    pour = lam("k", MODAL, N, lam("st", NONMODAL, _NN, move_one))
    output = lam("c", MODAL, C, Proj(2, Rec(_NN, right, pair(right, app(append, pair(left, head))), pour)))

    x = var("x")
    budget = lam("x", MODAL, N, app(compile_polynomial(spec.budget), app(mk_encode(), x)))
    run = Rec(
        C,
        app(budget, x),
        app(init, app(mk_ntos(sigma), x)),
        lam("y", NONMODAL, N, lam("z", NONMODAL, C, app(delta, var("z")))),
    )
    return lam("x", MODAL, N, app(mk_ston(sigma), app(output, run)))


# ------------------------------------------------------------ recognition


@dataclass(frozen=True)
class SampleCheck:
    input: int
    member: bool
    correct_mass: Fraction
    passed: bool
    margin: Fraction
    slack: Fraction


@dataclass(frozen=True)
class RecognitionReport:
    epsilon: Fraction
    results: tuple[SampleCheck, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def min_margin(self) -> Fraction | None:
        return min((r.margin for r in self.results), default=None)


def _check_unary(t: Term) -> None:
    ty = check_first_order(t)
    if ty != 1:
        raise TypeCheckError("arg-mismatch", (), "first-order", f"expected arity 1, got arity {ty}")


def check_error_recognition(t: Term, samples, epsilon: Fraction | str | int) -> RecognitionReport:
    """Check recognition with error ``epsilon`` on labelled samples.

    Output 0 means accept.  A member passes when ``D(0) > 1 - eps`` and a
    non-member when the mass on positive outputs exceeds ``1 - eps``.
    ``margin`` is the correct mass minus ``eps``; ``slack`` is how far the
    correct mass clears the threshold ``1 - eps``.
    """
    eps = Fraction(epsilon)
    if not 0 < eps <= Fraction(1, 2):
        raise ValueError("epsilon must lie in (0, 1/2]")
    _check_unary(t)
    results = []
    for x, member in samples:
        d = evaluate(app(t, Num(x)), check_types=False)
        zero = d[0]
        correct = zero if member else d.mass - zero
        results.append(SampleCheck(x, bool(member), correct, correct > 1 - eps, correct - eps, correct - (1 - eps)))
    return RecognitionReport(eps, tuple(results))


ACCEPT = "accept"
REJECT = "reject"


def majority_decision(t: Term, x: int) -> str:
    """Accept when the mass on 0 is at least the mass on positive outputs."""
    _check_unary(t)
    d = evaluate(app(t, Num(x)), check_types=False)
    return ACCEPT if d[0] >= d.mass - d[0] else REJECT
