"""Shared terms for the test suite: worked examples and the evaluation corpus."""

from __future__ import annotations

import random
from pathlib import Path

from rslr.ast import NONMODAL, RAND, S0, S1, Case, N, Num, P, Pair, Proj, Term, app, arrow, lam, var
from rslr.stdlib import (
    BINARY,
    compile_polynomial,
    encode_string,
    mk_add,
    mk_append,
    mk_coin,
    mk_encode,
    mk_mult,
    mk_ntos,
    mk_parity,
    mk_ston,
    mk_switch,
    mk_tail,
    unary,
)
from rslr.syntax import parse_term, print_term
from rslr.types import typechecks

MACHINES = Path(__file__).resolve().parent.parent / "machines"

# xor of two copies of one coin flip: the coin is resolved before duplication
XOR_SRC = r"""
(\x:~N.
   (\a:~N. case[N ~-> N] a {
       zero -> \y:~N. case[N] y { zero -> 0 | even -> 1 | odd -> 1 }
     | even -> \y:~N. case[N] y { zero -> 1 | even -> 0 | odd -> 0 }
     | odd  -> \y:~N. case[N] y { zero -> 1 | even -> 0 | odd -> 0 } })
   x x) rand
"""

# recursion over 0b1110 with a coin-driven step, seeded with 0b10
SIDEWAYS_SRC = r"""
(\z:~N. \h:!N.
   rec[N](h; z; \x:!N. \y:~N. (case[N ~-> N] rand { zero -> S1 | even -> S1 | odd -> S0 }) y))
  0b10 0b1110
"""

# iterated squaring; must be rejected
EXPONENTIAL_SRC_TEMPLATE = r"\h:!N. rec[N](h; 11; \x:!N. \y:~N. ({mult}) y y)"


def xor_term() -> Term:
    return parse_term(XOR_SRC)


def sideways_term() -> Term:
    return parse_term(SIDEWAYS_SRC)


def exponential_term() -> Term:
    return parse_term(EXPONENTIAL_SRC_TEMPLATE.replace("{mult}", print_term(mk_mult())))


# ------------------------------------------------------------ random explicit terms


def random_explicit(rng: random.Random, depth: int = 3) -> Term:
    """A closed explicit term built to have type N, drawn from ``rng``."""
    if depth == 0:
        return rng.choice([Num(rng.randrange(8)), RAND, RAND])
    k = rng.randrange(7)
    sub = lambda: random_explicit(rng, depth - 1)  # noqa: E731
    if k == 0:
        return app(rng.choice([S0, S1, P]), sub())
    if k == 1:
        return Case(N, sub(), sub(), sub(), sub())
    if k == 2:
        # a non-modal binder used at most once
        body = rng.choice([app(S1, var("v")), Case(N, var("v"), Num(1), Num(2), Num(3)), app(P, var("v"))])
        return app(lam("v", NONMODAL, N, body), sub())
    if k == 3:
        return Proj(rng.choice([1, 2]), Pair(sub(), sub()))
    if k == 4:
        f = lam("f", NONMODAL, arrow(NONMODAL, N, N), app(var("f"), sub()))
        return app(f, lam("u", NONMODAL, N, app(S0, var("u"))))
    if k == 5:
        return app(lam("v", NONMODAL, N, app(S0, var("v"))), RAND)
    return random_explicit(rng, 0)


def random_corpus(count: int = 10, seed: int = 2024) -> list[Term]:
    """``count`` typable random terms, each containing at least one ``rand``."""
    rng = random.Random(seed)
    out: list[Term] = []
    while len(out) < count:
        t = random_explicit(rng, rng.randrange(2, 5))
        if "rand" in str(t) and typechecks(t):
            out.append(t)
    return out


def stdlib_corpus() -> list[tuple[str, Term]]:
    """Library terms applied to small arguments; every entry is closed and N-typed."""
    add, mult, enc = mk_add(), mk_mult(), mk_encode()
    items: list[tuple[str, Term]] = [
        ("add 2 3", app(add, unary(2), unary(3))),
        ("add 0 4", app(add, unary(0), unary(4))),
        ("add 3 0", app(add, unary(3), unary(0))),
        ("mult 2 3", app(mult, unary(2), unary(3))),
        ("mult 0 3", app(mult, unary(0), unary(3))),
        ("mult 3 1", app(mult, unary(3), unary(1))),
        ("encode 5", app(enc, Num(5))),
        ("encode 0", app(enc, Num(0))),
        ("poly n^2 @3", app(compile_polynomial([0, 0, 1]), unary(3))),
        ("poly 2n+3 @2", app(compile_polynomial([3, 2]), unary(2))),
        ("switch 2", app(mk_switch(N, BINARY), Num(4), Num(10), Num(11), Num(12), Num(99))),
        ("switch 0", app(mk_switch(N, BINARY), Num(0), Num(10), Num(11), Num(12), Num(99))),
        ("append", app(mk_append(BINARY), Pair(Num(encode_string(BINARY, [1, 2])), Num(2)))),
        ("p1 tail", Proj(1, app(mk_tail(BINARY), Num(18)))),
        ("p2 tail", Proj(2, app(mk_tail(BINARY), Num(18)))),
        ("ntos 5", app(mk_ntos(BINARY), Num(5))),
        ("ston", app(mk_ston(BINARY), Num(encode_string(BINARY, [2, 1, 2])))),
        ("parity 0", app(mk_parity(), Num(0))),
        ("parity 5", app(mk_parity(), Num(5))),
        ("parity 6", app(mk_parity(), Num(6))),
        ("coin 3", app(mk_coin(), Num(3))),
        ("add rand", app(add, unary(2), RAND)),
        ("xor", xor_term()),
        ("sideways", sideways_term()),
    ]
    return items


def full_corpus() -> list[tuple[str, Term]]:
    return stdlib_corpus() + [(f"random {i}", t) for i, t in enumerate(random_corpus())]
