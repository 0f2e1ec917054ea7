"""Terms and types of the calculus.

Terms are locally nameless: variables bound by a lambda are de Bruijn
indices (``Var``) and free variables are names (``FVar``).  Binders keep a
name hint for printing, but the hint takes no part in equality, so two terms
compare equal exactly when they are alpha-equivalent.

Every node caches its hash, its sizes and a little binding information at
construction time, which keeps substitution and memoised evaluation cheap.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Union


class Aspect(enum.Enum):
    """Aspect of a binder or arrow.

    ``MODAL`` variables may drive recursion; ``NONMODAL`` ones may not.
    """

    MODAL = "!"
    NONMODAL = "~"

    def __le__(self, other: Aspect) -> bool:
        return self is other or (self is Aspect.MODAL and other is Aspect.NONMODAL)

    def __lt__(self, other: Aspect) -> bool:
        return self is Aspect.MODAL and other is Aspect.NONMODAL


MODAL = Aspect.MODAL
NONMODAL = Aspect.NONMODAL


# --------------------------------------------------------------------- types


class Type:
    __slots__ = ()

    def __str__(self) -> str:
        from .syntax import print_type

        return print_type(self)


@dataclass(frozen=True, slots=True)
class Nat(Type):
    """The base type of binary naturals."""

    def __str__(self) -> str:
        return "N"


N = Nat()


@dataclass(frozen=True, slots=True)
class Arrow(Type):
    aspect: Aspect
    arg: Type
    res: Type


@dataclass(frozen=True, slots=True)
class Prod(Type):
    """Product of two base types."""

    left: Type
    right: Type

    def __post_init__(self) -> None:
        if not (is_base_type(self.left) and is_base_type(self.right)):
            raise ValueError("product components must be base types")


def is_base_type(ty: Type) -> bool:
    return isinstance(ty, (Nat, Prod))


def arrow(aspect: Aspect, *types: Type) -> Type:
    """Right-nested arrow chain ``t1 -> t2 -> ... -> tn``, all with one aspect."""
    result = types[-1]
    for ty in reversed(types[:-1]):
        result = Arrow(aspect, ty, result)
    return result


def prod(*types: Type) -> Type:
    """Right-nested product, so ``prod(A, B, C) == Prod(A, Prod(B, C))``."""
    result = types[-1]
    for ty in reversed(types[:-1]):
        result = Prod(ty, result)
    return result


# --------------------------------------------------------------------- terms

_EMPTY: frozenset[str] = frozenset()


class ConstKind(enum.Enum):
    S0 = "S0"
    S1 = "S1"
    P = "P"
    RAND = "rand"


class Term:
    """Base class for term nodes.

    Cached fields: ``_hash``; ``_depth`` (one more than the largest loose de
    Bruijn index, 0 when locally closed); ``_fvs`` (free names); ``_rec``
    (contains a recursor); and the three size measures.
    """

    __slots__ = ("_hash", "_depth", "_fvs", "_rec", "_size", "_wonum", "_numsize")

    def _key(self) -> tuple:
        raise NotImplementedError

    def children(self) -> tuple[Term, ...]:
        return ()

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other):
            return False
        assert isinstance(other, Term)
        return self._hash == other._hash and self._key() == other._key()

    def __ne__(self, other: object) -> bool:
        return not self.__eq__(other)

    def __str__(self) -> str:
        from .syntax import print_term

        return print_term(self)

    @property
    def is_closed(self) -> bool:
        return self._depth == 0 and not self._fvs

    @property
    def is_explicit(self) -> bool:
        """True when the term contains no recursor."""
        return not self._rec

    @property
    def free_names(self) -> frozenset[str]:
        return self._fvs

    def _init(self, depth: int, fvs: frozenset[str], rec: bool, size: int, wonum: int, numsize: int) -> None:
        s = object.__setattr__
        s(self, "_hash", hash((type(self).__name__,) + self._key()))
        s(self, "_depth", depth)
        s(self, "_fvs", fvs)
        s(self, "_rec", rec)
        s(self, "_size", size)
        s(self, "_wonum", wonum)
        s(self, "_numsize", numsize)

    def _init_from(self, *kids: Term, rec: bool = False) -> None:
        fvs = _EMPTY
        for k in kids:
            if k._fvs:
                fvs = k._fvs if not fvs else fvs | k._fvs
        self._init(
            max((k._depth for k in kids), default=0),
            fvs,
            rec or any(k._rec for k in kids),
            1 + sum(k._size for k in kids),
            1 + sum(k._wonum for k in kids),
            max((k._numsize for k in kids), default=0),
        )


@dataclass(frozen=True, eq=False, slots=True, repr=False)
class Var(Term):
    """Bound variable, as a de Bruijn index."""

    index: int

    def __post_init__(self) -> None:
        self._init(self.index + 1, _EMPTY, False, 1, 1, 0)

    def _key(self) -> tuple:
        return (self.index,)

    def __repr__(self) -> str:
        return f"Var({self.index})"


@dataclass(frozen=True, eq=False, slots=True, repr=False)
class FVar(Term):
    """Free variable."""

    name: str

    def __post_init__(self) -> None:
        self._init(0, frozenset((self.name,)), False, 1, 1, 0)

    def _key(self) -> tuple:
        return (self.name,)

    def __repr__(self) -> str:
        return f"FVar({self.name!r})"


@dataclass(frozen=True, eq=False, slots=True, repr=False)
class Num(Term):
    value: int

    def __post_init__(self) -> None:
        if self.value < 0:
            raise ValueError("numerals are non-negative")
        digits = max(1, self.value.bit_length())
        self._init(0, _EMPTY, False, digits, 1, digits)

    def _key(self) -> tuple:
        return (self.value,)

    def __repr__(self) -> str:
        return f"Num({self.value})"


@dataclass(frozen=True, eq=False, slots=True, repr=False)
class Const(Term):
    kind: ConstKind

    def __post_init__(self) -> None:
        self._init(0, _EMPTY, False, 1, 1, 0)

    def _key(self) -> tuple:
        return (self.kind,)

    def __repr__(self) -> str:
        return self.kind.value


S0 = Const(ConstKind.S0)
S1 = Const(ConstKind.S1)
P = Const(ConstKind.P)
RAND = Const(ConstKind.RAND)


@dataclass(frozen=True, eq=False, slots=True, repr=False)
class Abs(Term):
    aspect: Aspect
    annot: Type
    body: Term
    name: str = field(default="x")

    def __post_init__(self) -> None:
        b = self.body
        self._init(max(0, b._depth - 1), b._fvs, b._rec, b._size + 1, b._wonum + 1, b._numsize)

    def _key(self) -> tuple:
        return (self.aspect, self.annot, self.body)

    def children(self) -> tuple[Term, ...]:
        return (self.body,)

    def __repr__(self) -> str:
        return f"Abs({self.name!r}, {self.aspect.name}, {self.annot}, {self.body!r})"


@dataclass(frozen=True, eq=False, slots=True, repr=False)
class App(Term):
    fun: Term
    arg: Term

    def __post_init__(self) -> None:
        f, a = self.fun, self.arg
        fvs = f._fvs | a._fvs if (f._fvs and a._fvs) else (f._fvs or a._fvs)
        # |t s| = |t| + |s|: application adds no node of its own
        self._init(
            max(f._depth, a._depth),
            fvs,
            f._rec or a._rec,
            f._size + a._size,
            f._wonum + a._wonum,
            max(f._numsize, a._numsize),
        )

    def _key(self) -> tuple:
        return (self.fun, self.arg)

    def children(self) -> tuple[Term, ...]:
        return (self.fun, self.arg)

    def __repr__(self) -> str:
        return f"App({self.fun!r}, {self.arg!r})"


@dataclass(frozen=True, eq=False, slots=True, repr=False)
class Case(Term):
    annot: Type
    scrut: Term
    zero: Term
    even: Term
    odd: Term

    def __post_init__(self) -> None:
        self._init_from(self.scrut, self.zero, self.even, self.odd)

    def _key(self) -> tuple:
        return (self.annot, self.scrut, self.zero, self.even, self.odd)

    def children(self) -> tuple[Term, ...]:
        return (self.scrut, self.zero, self.even, self.odd)

    def __repr__(self) -> str:
        return f"Case({self.annot}, {self.scrut!r}, {self.zero!r}, {self.even!r}, {self.odd!r})"


@dataclass(frozen=True, eq=False, slots=True, repr=False)
class Rec(Term):
    annot: Type
    arg: Term
    base: Term
    step: Term

    def __post_init__(self) -> None:
        self._init_from(self.arg, self.base, self.step, rec=True)

    def _key(self) -> tuple:
        return (self.annot, self.arg, self.base, self.step)

    def children(self) -> tuple[Term, ...]:
        return (self.arg, self.base, self.step)

    def __repr__(self) -> str:
        return f"Rec({self.annot}, {self.arg!r}, {self.base!r}, {self.step!r})"


@dataclass(frozen=True, eq=False, slots=True, repr=False)
class Pair(Term):
    left: Term
    right: Term

    def __post_init__(self) -> None:
        self._init_from(self.left, self.right)

    def _key(self) -> tuple:
        return (self.left, self.right)

    def children(self) -> tuple[Term, ...]:
        return (self.left, self.right)

    def __repr__(self) -> str:
        return f"Pair({self.left!r}, {self.right!r})"


@dataclass(frozen=True, eq=False, slots=True, repr=False)
class Proj(Term):
    """Projection ``p1`` (index 1) or ``p2`` (index 2)."""

    index: int
    arg: Term

    def __post_init__(self) -> None:
        if self.index not in (1, 2):
            raise ValueError("projection index must be 1 or 2")
        self._init_from(self.arg)

    def _key(self) -> tuple:
        return (self.index, self.arg)

    def children(self) -> tuple[Term, ...]:
        return (self.arg,)

    def __repr__(self) -> str:
        return f"Proj({self.index}, {self.arg!r})"


Value = Union[int, tuple]


# ------------------------------------------------------------ size measures


def size(t: Term) -> int:
    """Size with numerals counted by their binary length."""
    return t._size


def size_wonum(t: Term) -> int:
    """Size with every numeral counted as 1."""
    return t._wonum


def size_num(t: Term) -> int:
    """Largest numeral size occurring in ``t`` (0 if there is none)."""
    return t._numsize


# ---------------------------------------------------------- binding helpers


def rebuild(t: Term, kids: tuple[Term, ...]) -> Term:
    """Copy of ``t`` with its children replaced (same arity and order as ``children``)."""
    if isinstance(t, Abs):
        return Abs(t.aspect, t.annot, kids[0], t.name)
    if isinstance(t, App):
        return App(kids[0], kids[1])
    if isinstance(t, Case):
        return Case(t.annot, *kids)
    if isinstance(t, Rec):
        return Rec(t.annot, *kids)
    if isinstance(t, Pair):
        return Pair(kids[0], kids[1])
    if isinstance(t, Proj):
        return Proj(t.index, kids[0])
    return t


def _map_under(t: Term, fn, k: int) -> Term:
    """Apply ``fn(child, binders)`` to each child, tracking binder depth."""
    if isinstance(t, Abs):
        body = fn(t.body, k + 1)
        return t if body is t.body else Abs(t.aspect, t.annot, body, t.name)
    kids = t.children()
    new = tuple(fn(c, k) for c in kids)
    if all(a is b for a, b in zip(new, kids)):
        return t
    return rebuild(t, new)


def shift(t: Term, d: int, cutoff: int = 0) -> Term:
    """Add ``d`` to every de Bruijn index ``>= cutoff``."""
    if d == 0 or t._depth <= cutoff:
        return t
    if isinstance(t, Var):
        return Var(t.index + d) if t.index >= cutoff else t
    return _map_under(t, lambda c, k: shift(c, d, k), cutoff)


def instantiate(body: Term, arg: Term) -> Term:
    """Replace the outermost bound variable of ``body`` by ``arg``.

    ``body`` is the body of a lambda; the result lives one binder further out.
    """

    def go(t: Term, k: int) -> Term:
        if t._depth <= k:
            return t
        if isinstance(t, Var):
            if t.index == k:
                return shift(arg, k)
            return Var(t.index - 1) if t.index > k else t
        return _map_under(t, go, k)

    return go(body, 0)


def abstract(t: Term, name: str) -> Term:
    """Turn free occurrences of ``name`` into the outermost bound variable."""

    def go(u: Term, k: int) -> Term:
        if name not in u._fvs:
            return shift(u, 1, k)
        if isinstance(u, FVar):
            return Var(k)
        return _map_under(u, go, k)

    return go(t, 0)


def substitute(t: Term, name: str, s: Term) -> Term:
    """Capture-avoiding substitution of ``s`` for the free variable ``name``."""

    def go(u: Term, k: int) -> Term:
        if name not in u._fvs:
            return u
        if isinstance(u, FVar):
            return shift(s, k)
        return _map_under(u, go, k)

    return go(t, 0)


def free_vars(t: Term) -> frozenset[str]:
    return t._fvs


def open_abs(t: Abs, name: str) -> Term:
    """Body of ``t`` with its bound variable replaced by ``FVar(name)``."""
    return instantiate(t.body, FVar(name))


def subterms(t: Term) -> Iterator[Term]:
    """Pre-order walk over all subterms (bound variables stay as indices)."""
    stack = [t]
    while stack:
        u = stack.pop()
        yield u
        stack.extend(reversed(u.children()))


# ------------------------------------------------------------ construction


def lam(name: str, aspect: Aspect, annot: Type, body: Term) -> Abs:
    """Lambda binding the free name ``name`` in ``body``."""
    return Abs(aspect, annot, abstract(body, name), name)


def app(f: Term, *args: Term) -> Term:
    for a in args:
        f = App(f, a)
    return f


def var(name: str) -> FVar:
    return FVar(name)


def num(n: int) -> Num:
    return Num(n)


def pair(*items: Term) -> Term:
    """Right-nested tuple, so ``pair(a, b, c) == Pair(a, Pair(b, c))``."""
    result = items[-1]
    for item in reversed(items[:-1]):
        result = Pair(item, result)
    return result


def unwind(t: Term) -> tuple[Term, list[Term]]:
    """Split an application spine into its head and argument list."""
    args: list[Term] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def is_value(t: Term) -> bool:
    """Numerals and (nested) pairs of numerals."""
    if isinstance(t, Num):
        return True
    if isinstance(t, Pair):
        return is_value(t.left) and is_value(t.right)
    return False


def to_value(t: Term) -> Value:
    """Python view of a value term: ``int`` for numerals, tuples for pairs."""
    if isinstance(t, Num):
        return t.value
    if isinstance(t, Pair):
        return (to_value(t.left), to_value(t.right))
    raise ValueError(f"not a value: {t}")


def from_value(v: Value) -> Term:
    if isinstance(v, int):
        return Num(v)
    return Pair(from_value(v[0]), from_value(v[1]))
