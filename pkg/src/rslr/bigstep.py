"""Two-phase big-step evaluation.

``rf`` unfolds every recursor into an explicit (recursion-free) term and
``nf`` normalises explicit terms to values.  Composing them gives ``eval``.

Both phases enumerate every probabilistic branch.  An outcome table maps
``(result, metrics)`` to its probability; when metrics are not tracked the
second component is ``None`` and branches with equal results merge.  The
same code also serves the sampler, which resolves each ``rand`` with one
pseudo-random bit and keeps a single branch.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from ._deep import deep_call
from .ast import (
    MODAL,
    Abs,
    App,
    Case,
    Const,
    ConstKind,
    FVar,
    Num,
    Pair,
    Proj,
    Rec,
    Term,
    Var,
    app,
    instantiate,
    is_base_type,
    is_value,
    shift,
    to_value,
    unwind,
)
from .dist import Distribution
from .smallstep import DEFAULT_FUEL, EvaluationError, FuelExhausted, ResourceExhausted, StuckTerm
from .types import EMPTY, infer

_HALF = Fraction(1, 2)
_ONE = Fraction(1)


class NotExplicit(EvaluationError):
    def __init__(self, term: Term) -> None:
        super().__init__(f"term contains a recursor: {term}")
        self.term = term


@dataclass(frozen=True, slots=True, order=True)
class DerivationMetrics:
    """Size measures of one derivation.

    ``derivation_size`` counts rule instances.  The ``max_*`` fields are
    maxima over every subject and result term occurring in the derivation.
    """

    derivation_size: int
    max_subterm_size: int
    max_wonum: int = 0
    max_numsize: int = 0


@dataclass(frozen=True, slots=True)
class WeightedOutcome:
    probability: Fraction
    result: Term
    metrics: Optional[DerivationMetrics]


Table = dict  # (Term, DerivationMetrics | None) -> Fraction


class _EnumCoin:
    def flip(self) -> tuple[tuple[Fraction, int], ...]:
        return ((_HALF, 0), (_HALF, 1))


class _SampleCoin:
    def __init__(self, rng: random.Random) -> None:
        self.rng = rng

    def flip(self) -> tuple[tuple[Fraction, int], ...]:
        return ((_HALF, self.rng.getrandbits(1)),)


def _add(out: Table, key, p: Fraction) -> None:
    out[key] = out.get(key, 0) + p


class _Engine:
    def __init__(self, coin, track: bool, memo: bool, fuel: int = DEFAULT_FUEL) -> None:
        self.coin = coin
        self.fuel = fuel
        self.spent = 0
        self.track = track
        self.memo = memo
        self.nf_memo: dict[Term, Table] = {}
        self.rf_memo: dict[Term, Table] = {}

    def metrics(self, subject: Term, result: Term, *subs: Optional[DerivationMetrics]) -> Optional[DerivationMetrics]:
        if not self.track:
            return None
        return DerivationMetrics(
            1 + sum(s.derivation_size for s in subs),
            max([subject._size, result._size] + [s.max_subterm_size for s in subs]),
            max([subject._wonum, result._wonum] + [s.max_wonum for s in subs]),
            max([subject._numsize, result._numsize] + [s.max_numsize for s in subs]),
        )

    def burn(self, t: Term) -> None:
        self.spent += 1
        if self.spent > self.fuel:
            raise FuelExhausted(self.fuel, t)

    # ------------------------------------------------------------- nf

    def nf(self, t: Term) -> Table:
        if self.memo:
            hit = self.nf_memo.get(t)
            if hit is not None:
                return hit
        self.burn(t)
        out = self._nf(t)
        if self.memo:
            self.nf_memo[t] = out
        return out

    def _nf(self, t: Term) -> Table:
        head, args = unwind(t)
        out: Table = {}
        m = self.metrics
        if isinstance(head, Num) and not args:
            return {(t, m(t, t)): _ONE}
        if isinstance(head, Const):
            if head.kind is ConstKind.RAND and not args:
                for p, bit in self.coin.flip():
                    r = Num(bit)
                    _add(out, (r, m(t, r)), p)
                return out
            if head.kind is not ConstKind.RAND and len(args) == 1:
                for (v, mv), p in self.nf(args[0]).items():
                    if not isinstance(v, Num):
                        raise StuckTerm(t, "successor or predecessor of a non-numeral")
                    n = v.value
                    r = Num(2 * n if head.kind is ConstKind.S0 else 2 * n + 1 if head.kind is ConstKind.S1 else n >> 1)
                    _add(out, (r, m(t, r, mv)), p)
                return out
        if isinstance(head, Case):
            for (v, mv), p in self.nf(head.scrut).items():
                if not isinstance(v, Num):
                    raise StuckTerm(t, "case on a non-numeral")
                branch = head.zero if v.value == 0 else head.even if v.value % 2 == 0 else head.odd
                for (w, mw), q in self.nf(app(branch, *args)).items():
                    _add(out, (w, m(t, w, mv, mw)), p * q)
            return out
        if isinstance(head, Abs) and args:
            rest = args[1:]
            if is_base_type(head.annot):
                for (v, mv), p in self.nf(args[0]).items():
                    for (w, mw), q in self.nf(app(instantiate(head.body, v), *rest)).items():
                        _add(out, (w, m(t, w, mv, mw)), p * q)
            else:
                for (w, mw), q in self.nf(app(instantiate(head.body, args[0]), *rest)).items():
                    _add(out, (w, m(t, w, mw)), q)
            return out
        if isinstance(head, Pair) and not args:
            left = self.nf(head.left)
            right = self.nf(head.right)
            for (a, ma), p in left.items():
                for (b, mb), q in right.items():
                    r = Pair(a, b)
                    _add(out, (r, m(t, r, ma, mb)), p * q)
            return out
        if isinstance(head, Proj) and not args:
            for (v, mv), p in self.nf(head.arg).items():
                if not isinstance(v, Pair):
                    raise StuckTerm(t, "projection from a non-pair")
                r = v.left if head.index == 1 else v.right
                _add(out, (r, m(t, r, mv)), p)
            return out
        if isinstance(head, Rec):
            raise NotExplicit(t)
        raise StuckTerm(t, "no evaluation rule applies")

    # ------------------------------------------------------------- rf

    def rf(self, t: Term) -> Table:
        if self.memo:
            hit = self.rf_memo.get(t)
            if hit is not None:
                return hit
        self.burn(t)
        out = self._rf(t)
        if self.memo:
            self.rf_memo[t] = out
        return out

    def _congruence(self, t: Term, parts: list[Term], build) -> Table:
        """rf every part independently and rebuild from each combination."""
        out: Table = {}
        tables = [list(self.rf(p).items()) for p in parts]
        for combo in itertools.product(*tables):
            prob = _ONE
            kids = []
            subs = []
            for (v, mv), p in combo:
                prob *= p
                kids.append(v)
                subs.append(mv)
            r = build(kids)
            _add(out, (r, self.metrics(t, r, *subs)), prob)
        return out

    def _rf(self, t: Term) -> Table:
        head, args = unwind(t)
        m = self.metrics
        if isinstance(head, (Num, Const)) and not args:
            return {(t, m(t, t)): _ONE}
        if isinstance(head, Const) and head.kind is not ConstKind.RAND and len(args) == 1:
            return self._congruence(t, [args[0]], lambda k: App(head, k[0]))
        if isinstance(head, (Var, FVar)):
            return self._congruence(t, args, lambda k: app(head, *k))
        if isinstance(head, Case):
            parts = [head.scrut, head.zero, head.even, head.odd] + args
            return self._congruence(t, parts, lambda k: app(Case(head.annot, *k[:4]), *k[4:]))
        if isinstance(head, Pair) and not args:
            return self._congruence(t, [head.left, head.right], lambda k: Pair(k[0], k[1]))
        if isinstance(head, Proj) and not args:
            return self._congruence(t, [head.arg], lambda k: Proj(head.index, k[0]))
        if isinstance(head, Abs) and not args:
            return self._congruence(t, [head.body], lambda k: Abs(head.aspect, head.annot, k[0], head.name))
        if isinstance(head, Abs):
            return self._rf_beta(t, head, args)
        if isinstance(head, Rec):
            return self._rf_rec(t, head, args)
        raise StuckTerm(t, "no unfolding rule applies")

    def _rf_beta(self, t: Term, head: Abs, args: list[Term]) -> Table:
        m = self.metrics
        out: Table = {}
        rest = args[1:]
        if not is_base_type(head.annot):
            for (u, mu), p in self.rf(app(instantiate(head.body, args[0]), *rest)).items():
                _add(out, (u, m(t, u, mu)), p)
            return out
        shifted = [shift(r, 1) for r in rest]
        for (z, mz), p in self.rf(args[0]).items():
            if not z.is_closed:
                # argument depends on an enclosing binder: keep the redex
                for (u, mu), q in self.rf(app(head.body, *shifted)).items():
                    r = App(Abs(head.aspect, head.annot, u, head.name), z)
                    _add(out, (r, m(t, r, mz, mu)), p * q)
                continue
            for (n, mn), q in self.nf(z).items():
                if head.aspect is MODAL:
                    for (u, mu), s in self.rf(app(instantiate(head.body, n), *rest)).items():
                        _add(out, (u, m(t, u, mz, mn, mu)), p * q * s)
                else:
                    for (u, mu), s in self.rf(app(head.body, *shifted)).items():
                        r = App(Abs(head.aspect, head.annot, u, head.name), n)
                        _add(out, (r, m(t, r, mz, mn, mu)), p * q * s)
        return out

    def _rf_rec(self, t: Term, head: Rec, args: list[Term]) -> Table:
        m = self.metrics
        out: Table = {}
        for (a, ma), p in self.rf(head.arg).items():
            if not a.is_closed:
                raise StuckTerm(t, "recursion argument is not closed")
            for (n, mn), q in self.nf(a).items():
                if not isinstance(n, Num):
                    raise StuckTerm(t, "recursion on a non-numeral")
                k = n.value.bit_length()
                parts = [head.base] + [App(head.step, Num(n.value >> j)) for j in range(k)] + args

                def build(kids: list[Term], k: int = k) -> Term:
                    acc = kids[0]
                    for j in range(k, 0, -1):
                        acc = App(kids[j], acc)
                    return app(acc, *kids[k + 1 :])

                for (r, mr), s in self._congruence(t, parts, build).items():
                    extra = [mr] if mr is None else [DerivationMetrics(mr.derivation_size - 1, mr.max_subterm_size, mr.max_wonum, mr.max_numsize)]
                    _add(out, (r, m(t, r, ma, mn, *extra)), p * q * s)
        return out


# ------------------------------------------------------------- public API


def _outcomes(table: Table) -> list[WeightedOutcome]:
    items = [WeightedOutcome(p, r, mt) for (r, mt), p in table.items()]
    items.sort(key=lambda o: (str(o.result), o.metrics or DerivationMetrics(0, 0)))
    return items


def _gate(t: Term, check_types: bool) -> None:
    if not t.is_closed:
        raise EvaluationError("term is not closed")
    if check_types:
        infer(EMPTY, t)


def _run(phase: str, t: Term, coin, track: bool, memo: bool, fuel: int) -> Table:
    # the engine is built inside the (possibly retried) call so state never leaks across attempts
    eng = _Engine(coin() if callable(coin) else coin, track, memo, fuel)
    if phase == "nf":
        return eng.nf(t)
    if phase == "rf":
        return eng.rf(t)
    return _eval(eng, t)


def _run_deep(phase: str, t: Term, coin, track: bool, memo: bool, fuel: int) -> Table:
    try:
        return deep_call(_run, phase, t, coin, track, memo, fuel)
    except RecursionError:
        raise ResourceExhausted("evaluation nests too deeply") from None


def eval_nf(t: Term, *, check_types: bool = True, metrics: bool = True, fuel: int = DEFAULT_FUEL) -> list[WeightedOutcome]:
    """All ``nf`` outcomes of an explicit closed term."""
    _gate(t, check_types)
    if not t.is_explicit:
        raise NotExplicit(t)
    return _outcomes(_run_deep("nf", t, _EnumCoin, metrics, True, fuel))


def eval_rf(t: Term, *, check_types: bool = True, metrics: bool = True, fuel: int = DEFAULT_FUEL) -> list[WeightedOutcome]:
    """All ``rf`` outcomes: explicit terms with the recursors unfolded."""
    _gate(t, check_types)
    return _outcomes(_run_deep("rf", t, _EnumCoin, metrics, True, fuel))


def _eval(eng: _Engine, t: Term) -> Table:
    out: Table = {}
    for (s, ms), p in eng.rf(t).items():
        for (v, mv), q in eng.nf(s).items():
            if not is_value(v):
                raise StuckTerm(v)
            _add(out, (v, None), p * q)
    return out


def eval(t: Term, *, check_types: bool = True, fuel: int = DEFAULT_FUEL) -> Distribution:  # noqa: A001
    """Exact output distribution: ``rf`` followed by ``nf`` on each outcome."""
    _gate(t, check_types)
    table = _run_deep("eval", t, _EnumCoin, False, True, fuel)
    return Distribution({to_value(v): p for (v, _), p in table.items()})


def derivation_metrics(t: Term, phase: str = "nf", *, check_types: bool = True) -> DerivationMetrics:
    """Per-field maxima of the metrics over every branch of the given phase."""
    if phase == "nf":
        outs = eval_nf(t, check_types=check_types)
    elif phase == "rf":
        outs = eval_rf(t, check_types=check_types)
    else:
        raise ValueError(f"unknown phase {phase!r}")
    return _max_metrics(o.metrics for o in outs)


def _max_metrics(ms) -> DerivationMetrics:
    ms = [m for m in ms if m is not None]
    return DerivationMetrics(
        max(x.derivation_size for x in ms),
        max(x.max_subterm_size for x in ms),
        max(x.max_wonum for x in ms),
        max(x.max_numsize for x in ms),
    )


def eval_metrics(t: Term, *, check_types: bool = True, fuel: int = DEFAULT_FUEL) -> tuple[DerivationMetrics, DerivationMetrics]:
    """Maximal metrics of the ``rf`` phase and of ``nf`` over all ``rf`` results."""
    rf_outs = eval_rf(t, check_types=check_types, fuel=fuel)
    nf_ms = []
    for o in rf_outs:
        nf_ms.extend(x.metrics for x in eval_nf(o.result, check_types=False, fuel=fuel))
    return _max_metrics(o.metrics for o in rf_outs), _max_metrics(nf_ms)


def sample(t: Term, seed: int, *, check_types: bool = True, fuel: int = DEFAULT_FUEL) -> int | tuple:
    """One run of ``t``, resolving each ``rand`` with a bit from ``random.Random(seed)``."""
    _gate(t, check_types)
    return _sample_unchecked(t, seed, fuel)


def _sample_unchecked(t: Term, seed: int, fuel: int = DEFAULT_FUEL) -> int | tuple:
    coin = lambda: _SampleCoin(random.Random(seed))  # noqa: E731
    ((v, _),) = _run_deep("eval", t, coin, False, False, fuel).keys()
    return to_value(v)


def sample_many(t: Term, seeds, *, check_types: bool = True, fuel: int = DEFAULT_FUEL) -> dict:
    """Frequency count of ``sample`` over the given seeds."""
    _gate(t, check_types)
    counts: dict = {}
    for s in seeds:
        v = _sample_unchecked(t, s, fuel)
        counts[v] = counts.get(v, 0) + 1
    return counts
