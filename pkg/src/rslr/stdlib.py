"""Standard encodings: unary arithmetic, polynomials, finite sets and strings.

Unary numbers, finite-set elements and strings are all plain numerals:

* the unary encoding of ``i`` is the numeral ``1^i`` in binary (``2**i - 1``);
* element ``a_i`` of a finite set is ``10^i`` in binary (``2**i``);
* the string ``a_{j1} ... a_{jk}`` is the concatenation ``10^{j1} ... 10^{jk}``.

Every builder returns a closed term.  The terms typecheck at the types given
in their docstrings.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache

from .ast import (
    MODAL,
    NONMODAL,
    RAND,
    S0,
    S1,
    N,
    P,
    Case,
    Num,
    Proj,
    Rec,
    Term,
    Type,
    app,
    arrow,
    lam,
    pair,
    prod,
    var,
)

NN = prod(N, N)


@dataclass(frozen=True)
class Alphabet:
    """Ordered, duplicate-free list of symbol names; index 0 is the default element."""

    symbols: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.symbols:
            raise ValueError("an alphabet needs at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet symbols must be distinct")

    def __len__(self) -> int:
        return len(self.symbols)

    def index(self, name: str) -> int:
        try:
            return self.symbols.index(name)
        except ValueError:
            raise KeyError(f"symbol {name!r} not in alphabet") from None

    def code(self, i: int) -> int:
        """Numeral encoding ``2**i`` of symbol ``i``."""
        if not 0 <= i < len(self.symbols):
            raise IndexError(f"symbol index {i} out of range")
        return 1 << i


BINARY = Alphabet(("_", "0", "1"))


# ------------------------------------------------------------------- unary


def unary(i: int) -> Num:
    return Num((1 << i) - 1)


def unary_length(n: int) -> int:
    """Inverse of ``unary`` on well-formed inputs."""
    return n.bit_length()


def _step(body_fn, x_aspect=MODAL, acc_type: Type = N, acc_name: str = "y") -> Term:
    """Step function ``\\x:!N. \\acc:~A. body`` for a recursor."""
    return lam("x", x_aspect, N, lam(acc_name, NONMODAL, acc_type, body_fn(var("x"), var(acc_name))))


@lru_cache(maxsize=None)
def mk_encode() -> Term:
    """Unary length of a numeral: ``!N -> N``."""
    return lam("t", MODAL, N, Rec(N, var("t"), Num(0), _step(lambda x, y: app(S1, y))))


@lru_cache(maxsize=None)
def mk_add() -> Term:
    """Unary addition: ``!N -> ~N -> N``."""
    body = Rec(N, var("x"), var("y"), _step(lambda x, y: app(S1, y)))
    return lam("x", MODAL, N, lam("y", NONMODAL, N, body))


@lru_cache(maxsize=None)
def mk_mult_literal() -> Term:
    """Multiplication recursing on ``P x`` with base ``y``: ``!N -> !N -> N``.

    Correct for ``x >= 1`` but yields ``y`` when ``x`` is zero; ``mk_mult``
    is the total version.
    """
    step = lam("x", MODAL, N, lam("z", NONMODAL, N, app(mk_add(), var("y"), var("z"))))
    body = Rec(N, app(P, var("x")), var("y"), step)
    return lam("x", MODAL, N, lam("y", MODAL, N, body))


@lru_cache(maxsize=None)
def mk_mult() -> Term:
    """Unary multiplication ``!N -> !N -> N``: adds ``y`` once per digit of ``x``, starting from 0."""
    step = lam("u", MODAL, N, lam("z", NONMODAL, N, app(mk_add(), var("y"), var("z"))))
    body = Rec(N, var("x"), Num(0), step)
    return lam("x", MODAL, N, lam("y", MODAL, N, body))


def compile_polynomial(coeffs: list[int] | tuple[int, ...]) -> Term:
    """Unary polynomial ``c0 + c1 n + ... + cd n^d`` as a term of type ``!N -> N``.

    Built in Horner form from ``mk_add`` and ``mk_mult``.
    """
    coeffs = list(coeffs)
    if not coeffs:
        raise ValueError("a polynomial needs at least one coefficient")
    if any(c < 0 for c in coeffs):
        raise ValueError("coefficients must be natural numbers")
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    x = var("n")
    acc: Term = unary(coeffs[-1])
    for c in reversed(coeffs[:-1]):
        acc = app(mk_mult(), x, acc)
        if c:
            acc = app(mk_add(), unary(c), acc)
    return lam("n", MODAL, N, acc)


def eval_polynomial(coeffs, n: int) -> int:
    return sum(c * n**k for k, c in enumerate(coeffs))


# ------------------------------------------------------------- finite sets


def fs_element(alphabet: Alphabet | int, i: int) -> Num:
    size = alphabet if isinstance(alphabet, int) else len(alphabet)
    if not 0 <= i < size:
        raise IndexError(f"element index {i} out of range for a set of size {size}")
    return Num(1 << i)


def mk_switch(result: Type, alphabet: Alphabet | int) -> Term:
    """Case analysis on a finite-set element.

    Type ``~N -> ~A -> ... -> ~A -> ~A -> A`` with one branch per element
    followed by the default, which is taken when the scrutinee encodes no
    element.
    """
    k = alphabet if isinstance(alphabet, int) else len(alphabet)
    return _switch(result, k)


@lru_cache(maxsize=None)
def _switch(a: Type, k: int) -> Term:
    if k == 0:
        return lam("x", NONMODAL, N, lam("z", NONMODAL, a, var("z")))
    ys = [f"y{i}" for i in range(k)]
    ha = arrow(NONMODAL, a, a)
    h = var("h")
    even = lam("h", NONMODAL, a, app(_switch(a, k - 1), app(P, var("x")), *map(var, ys[1:]), h))
    odd = lam("h", NONMODAL, a, var(ys[0]))
    zero = lam("h", NONMODAL, a, h)
    body: Term = app(Case(ha, var("x"), zero, even, odd), var("z"))
    body = lam("z", NONMODAL, a, body)
    for y in reversed(ys):
        body = lam(y, NONMODAL, a, body)
    return lam("x", NONMODAL, N, body)


# ----------------------------------------------------------------- strings


def encode_string(alphabet: Alphabet, s: list[int] | tuple[int, ...]) -> int:
    bits = ""
    for j in s:
        if not 0 <= j < len(alphabet):
            raise IndexError(f"symbol index {j} out of range")
        bits += "1" + "0" * j
    return int(bits, 2) if bits else 0


class DecodeError(ValueError):
    pass


def decode_string(alphabet: Alphabet, n: int) -> list[int]:
    if n < 0:
        raise DecodeError("negative numeral")
    if n == 0:
        return []
    out: list[int] = []
    for block in bin(n)[2:].split("1")[1:]:
        if block.strip("0"):
            raise DecodeError(f"{n} is not block-structured")
        if len(block) >= len(alphabet):
            raise DecodeError(f"block 10^{len(block)} names no symbol of the alphabet")
        out.append(len(block))
    return out


def _proj(i: int, t: Term) -> Term:
    return Proj(i, t)


def _unpair(fn: Callable[[Term, Term], Term], names: tuple[str, str] = ("u", "v")) -> Term:
    """``\\p:~(N * N). (\\u:~N. \\v:~N. fn(u, v)) (p1 p) (p2 p)``.

    Binding both components to numerals first means the pair itself is
    copied only twice, however often ``fn`` uses its arguments.
    """
    u, v = names
    inner = lam(u, NONMODAL, N, lam(v, NONMODAL, N, fn(var(u), var(v))))
    return lam("p", NONMODAL, NN, app(inner, _proj(1, var("p")), _proj(2, var("p"))))


@lru_cache(maxsize=None)
def _append(k: int) -> Term:
    def body(w: Term, sym: Term) -> Term:
        branches = []
        for j in range(k):
            t: Term = app(S1, w)
            for _ in range(j):
                t = app(S0, t)
            branches.append(t)
        return app(_switch(N, k), sym, *branches, w)

    return _unpair(body, ("w", "s"))


def mk_append(alphabet: Alphabet) -> Term:
    """``~(N * N) -> N``: append the symbol in the second component to the string in the first.

    An invalid symbol leaves the string unchanged.
    """
    return _append(len(alphabet))


@lru_cache(maxsize=None)
def _tail(k: int) -> Term:
    empty = pair(Num(0), Num(1))

    def level(j: int, u: Term) -> Term:
        # u is the string with j trailing zeros already stripped
        if j >= k:
            return empty
        return Case(NN, u, empty, level(j + 1, app(P, u)), pair(app(P, u), Num(1 << j)))

    return lam("w", NONMODAL, N, level(0, var("w")))


def mk_tail(alphabet: Alphabet) -> Term:
    """``~N -> N * N``: split off the last symbol, giving ``<rest, symbol>``.

    On the empty string (or a malformed last block) the result is ``<0, a0>``.
    The recursion over trailing zeros is unrolled to alphabet depth, since a
    non-modal argument cannot drive a recursor.
    """
    return _tail(len(alphabet))


def _digit_indices(alphabet: Alphabet) -> tuple[int, int]:
    try:
        return alphabet.index("0"), alphabet.index("1")
    except KeyError:
        raise ValueError("the alphabet must contain the symbols '0' and '1'") from None


def mk_ntos(alphabet: Alphabet) -> Term:
    """``!N -> N``: the binary digits of a numeral, most significant first, as a string."""
    i0, i1 = _digit_indices(alphabet)
    return _ntos(len(alphabet), i0, i1)


@lru_cache(maxsize=None)
def _ntos(k: int, i0: int, i1: int) -> Term:
    a0, a1 = Num(1 << i0), Num(1 << i1)
    digit = Case(N, var("p"), a0, a0, a1)
    step = lam("p", NONMODAL, N, lam("y", NONMODAL, N, app(_append(k), pair(var("y"), digit))))
    return lam("x", MODAL, N, Rec(N, var("x"), Num(0), step))


def _fold_symbol(k: int, i0: int, i1: int, prev: Term, sym: Term) -> Term:
    branches: list[Term] = []
    for j in range(k):
        branches.append(app(S0, prev) if j == i0 else app(S1, prev) if j == i1 else prev)
    return app(_switch(N, k), sym, *branches, prev)


@lru_cache(maxsize=None)
def _finalize(k: int, i0: int, i1: int) -> Term:
    """``~(N * N) -> N``: fold a pending symbol into the number being built."""
    return _unpair(lambda prev, sym: _fold_symbol(k, i0, i1, prev, sym), ("a", "b"))


def mk_ston(alphabet: Alphabet) -> Term:
    """``!N -> N``: read a string's digit symbols as a binary numeral; other symbols are skipped."""
    i0, i1 = _digit_indices(alphabet)
    return _ston(len(alphabet), i0, i1)


@lru_cache(maxsize=None)
def _ston(k: int, i0: int, i1: int) -> Term:
    # accumulator: <number so far, code of the symbol whose block is being read (0 = none)>
    def step_body(u: Term, v: Term) -> Term:
        return Case(
            NN,
            var("x"),
            pair(u, v),
            pair(u, app(S0, v)),
            pair(_fold_symbol(k, i0, i1, u, v), Num(1)),
        )

    step = lam("x", MODAL, N, _unpair(step_body))
    return lam("x", MODAL, N, app(_finalize(k, i0, i1), Rec(NN, var("x"), pair(Num(0), Num(0)), step)))


# ------------------------------------------------------------------- misc


def mk_parity() -> Term:
    """``!N -> N``: 0 on odd inputs, 1 otherwise."""
    return lam("x", MODAL, N, Case(N, var("x"), Num(1), Num(1), Num(0)))


def mk_coin() -> Term:
    """``!N -> N``: ignores its input and returns a fair bit."""
    return lam("x", MODAL, N, RAND)


def catalogue() -> dict[str, Term]:
    """Named closed terms addressable from the command line."""
    return {
        "add": mk_add(),
        "mult": mk_mult(),
        "mult-literal": mk_mult_literal(),
        "encode": mk_encode(),
        "switch": mk_switch(N, BINARY),
        "append": mk_append(BINARY),
        "tail": mk_tail(BINARY),
        "ntos": mk_ntos(BINARY),
        "ston": mk_ston(BINARY),
        "parity": mk_parity(),
        "coin": mk_coin(),
    }
