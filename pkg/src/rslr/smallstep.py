"""One-step reduction and exhaustive evaluation to an exact distribution.

Redex positions are tuples of child indices (see ``Term.children``), listed
in pre-order.  Reduction may happen anywhere, including under lambdas,
except inside the base and step arguments of a recursor.
"""

from __future__ import annotations

from collections.abc import Callable, Iterator
from dataclasses import dataclass
from fractions import Fraction

from .ast import (
    Abs,
    App,
    Case,
    Const,
    ConstKind,
    Num,
    Pair,
    Proj,
    Rec,
    Term,
    instantiate,
    is_base_type,
    is_value,
    rebuild,
    shift,
    to_value,
)
from .dist import Distribution
from .types import EMPTY, infer

Pos = tuple[int, ...]

DEFAULT_FUEL = 10**6
_HALF = Fraction(1, 2)


class EvaluationError(Exception):
    """Base class for evaluator failures."""


class ResourceExhausted(EvaluationError):
    """Evaluation ran out of fuel or stack."""


class FuelExhausted(ResourceExhausted):
    def __init__(self, fuel: int, term: Term) -> None:
        super().__init__(f"fuel exhausted after {fuel} steps; pending term: {term}")
        self.fuel = fuel
        self.term = term


class StuckTerm(EvaluationError):
    def __init__(self, term: Term, why: str = "normal form is not a value") -> None:
        super().__init__(f"{why}: {term}")
        self.term = term


@dataclass(frozen=True, slots=True)
class StepResult:
    """Outcome of one step: empty ``branches`` means the term was normal."""

    branches: tuple[Term, ...]

    @property
    def is_normal(self) -> bool:
        return not self.branches

    @property
    def probability(self) -> Fraction:
        return Fraction(1, len(self.branches))


NORMAL = StepResult(())


def _contract(t: Term) -> tuple[Term, ...] | None:
    """Successors of ``t`` if it is itself a redex, else ``None``."""
    if isinstance(t, Const):
        return (Num(0), Num(1)) if t.kind is ConstKind.RAND else None
    if isinstance(t, App):
        f, a = t.fun, t.arg
        if isinstance(f, Const) and isinstance(a, Num):
            n = a.value
            if f.kind is ConstKind.S0:
                return (Num(2 * n),)
            if f.kind is ConstKind.S1:
                return (Num(2 * n + 1),)
            if f.kind is ConstKind.P:
                return (Num(n >> 1),)
            return None
        if isinstance(f, Abs):
            if not is_base_type(f.annot) or is_value(a):
                return (instantiate(f.body, a),)
            return None
        if isinstance(f, App) and isinstance(f.fun, Abs):
            # (\x.t) s r -> (\x. t r) s
            lam = f.fun
            moved = Abs(lam.aspect, lam.annot, App(lam.body, shift(a, 1)), lam.name)
            return (App(moved, f.arg),)
        return None
    if isinstance(t, Case):
        s = t.scrut
        if isinstance(s, Num):
            if s.value == 0:
                return (t.zero,)
            return (t.even,) if s.value % 2 == 0 else (t.odd,)
        return None
    if isinstance(t, Rec):
        s = t.arg
        if isinstance(s, Num):
            if s.value == 0:
                return (t.base,)
            smaller = Rec(t.annot, Num(s.value >> 1), t.base, t.step)
            return (App(App(t.step, s), smaller),)
        return None
    if isinstance(t, Proj):
        if isinstance(t.arg, Pair):
            return (t.arg.left if t.index == 1 else t.arg.right,)
        return None
    return None


def _is_redex(t: Term) -> bool:
    """Same test as ``_contract(t) is not None``, without building successors."""
    if isinstance(t, Const):
        return t.kind is ConstKind.RAND
    if isinstance(t, App):
        f, a = t.fun, t.arg
        if isinstance(f, Const):
            return f.kind is not ConstKind.RAND and isinstance(a, Num)
        if isinstance(f, Abs):
            return not is_base_type(f.annot) or is_value(a)
        return isinstance(f, App) and isinstance(f.fun, Abs)
    if isinstance(t, (Case, Rec)):
        return isinstance(t.scrut if isinstance(t, Case) else t.arg, Num)
    if isinstance(t, Proj):
        return isinstance(t.arg, Pair)
    return False


def _reducible_children(t: Term) -> tuple[Term, ...]:
    # the base and step of a recursor are frozen
    if isinstance(t, Rec):
        return (t.arg,)
    return t.children()


def _iter_redexes(t: Term) -> Iterator[Pos]:
    """Redex positions in pre-order."""
    stack: list[tuple[Term, Pos]] = [(t, ())]
    while stack:
        u, pos = stack.pop()
        if _is_redex(u):
            yield pos
        kids = _reducible_children(u)
        for i in range(len(kids) - 1, -1, -1):
            stack.append((kids[i], pos + (i,)))


def _iter_redexes_reversed(t: Term) -> Iterator[Pos]:
    """Redex positions in reverse pre-order (last one first)."""
    # reverse pre-order = visit children right-to-left, then the node
    stack: list[tuple[Term, Pos, bool]] = [(t, (), False)]
    while stack:
        u, pos, expanded = stack.pop()
        if expanded:
            if _is_redex(u):
                yield pos
            continue
        stack.append((u, pos, True))
        kids = _reducible_children(u)
        for i, k in enumerate(kids):
            stack.append((k, pos + (i,), False))


def redexes(t: Term) -> list[Pos]:
    """All redex positions of ``t``, in pre-order."""
    return list(_iter_redexes(t))


def subterm_at(t: Term, pos: Pos) -> Term:
    for i in pos:
        t = t.children()[i]
    return t


def replace_at(t: Term, pos: Pos, new: Term) -> Term:
    if not pos:
        return new
    kids = list(t.children())
    kids[pos[0]] = replace_at(kids[pos[0]], pos[1:], new)
    return rebuild(t, tuple(kids))


def step_at(t: Term, pos: Pos) -> StepResult:
    """Contract the redex at ``pos``."""
    target = t
    for i in pos:
        if isinstance(target, Rec) and i != 0:
            raise ValueError(f"position {pos} lies in a frozen recursor argument")
        target = target.children()[i]
    succ = _contract(target)
    if succ is None:
        raise ValueError(f"no redex at position {pos}")
    return StepResult(tuple(replace_at(t, pos, s) for s in succ))


STRATEGIES = ("leftmost", "rightmost")


def choose_redex(t: Term, strategy: str = "leftmost") -> Pos | None:
    if strategy == "leftmost":
        it = _iter_redexes(t)
    elif strategy == "rightmost":
        it = _iter_redexes_reversed(t)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return next(it, None)


def step(t: Term, strategy: str = "leftmost") -> StepResult:
    pos = choose_redex(t, strategy)
    if pos is None:
        return NORMAL
    return step_at(t, pos)


def format_pos(pos: Pos) -> str:
    return ".".join(map(str, pos)) if pos else "ε"


def format_step(pos: Pos, before: Term, result: StepResult) -> str:
    return f"{format_pos(pos)} ⊢ {before} → " + ", ".join(str(s) for s in result.branches)


TraceHook = Callable[[Pos, Term, StepResult], None]


def eval_distribution_smallstep(
    t: Term,
    fuel: int = DEFAULT_FUEL,
    strategy: str = "leftmost",
    *,
    check_types: bool = True,
    trace: TraceHook | None = None,
) -> Distribution:
    """Exact distribution of normal forms of ``t``.

    Explores the whole reduction tree with an explicit stack, merging
    repeated states through a memo table.  ``fuel`` bounds the number of
    steps along any single path.
    """
    if check_types:
        if not t.is_closed:
            raise EvaluationError("term is not closed")
        infer(EMPTY, t)
    memo: dict[Term, Distribution] = {}
    # frames: [term, depth, successors or None]
    stack: list[list] = [[t, 0, None]]
    while stack:
        frame = stack[-1]
        term, depth, succs = frame
        if term in memo:
            stack.pop()
            continue
        if succs is None:
            pos = choose_redex(term, strategy)
            if pos is None:
                if not is_value(term):
                    raise StuckTerm(term)
                memo[term] = Distribution.dirac(to_value(term))
                stack.pop()
                continue
            if depth >= fuel:
                raise FuelExhausted(fuel, term)
            res = step_at(term, pos)
            if trace is not None:
                trace(pos, term, res)
            frame[2] = res.branches
            for s in res.branches:
                if s not in memo:
                    stack.append([s, depth + 1, None])
            continue
        stack.pop()
        if len(succs) == 1:
            memo[term] = memo[succs[0]]
        else:
            memo[term] = Distribution.mix((_HALF, memo[s]) for s in succs)
    return memo[t]


def reduction_trace(t: Term, strategy: str = "leftmost", max_steps: int = 500) -> list[tuple[Pos, Term, StepResult]]:
    """Steps taken by exhaustive evaluation, in exploration order, up to ``max_steps``."""
    out: list[tuple[Pos, Term, StepResult]] = []

    class _Stop(Exception):
        pass

    def hook(pos: Pos, term: Term, res: StepResult) -> None:
        out.append((pos, term, res))
        if len(out) >= max_steps:
            raise _Stop

    try:
        eval_distribution_smallstep(t, strategy=strategy, check_types=False, trace=hook)
    except _Stop:
        pass
    return out
