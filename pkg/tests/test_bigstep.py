from __future__ import annotations

import math
from fractions import Fraction as F

import pytest

from corpus import full_corpus, sideways_term, xor_term
from rslr.ast import MODAL, NONMODAL, RAND, S0, S1, P, Abs, App, N, Num, Rec, app, arrow, lam, var
from rslr.bigstep import (
    DerivationMetrics,
    NotExplicit,
    derivation_metrics,
    eval,
    eval_metrics,
    eval_nf,
    eval_rf,
    sample,
    sample_many,
)
from rslr.smallstep import EvaluationError, FuelExhausted, ResourceExhausted, eval_distribution_smallstep
from rslr.stdlib import compile_polynomial, mk_add, mk_mult, unary
from rslr.syntax import parse_term
from rslr.types import TypeCheckError

half = F(1, 2)


def outcomes(ws):
    return sorted(((w.probability, w.result) for w in ws), key=lambda pr: (pr[0], str(pr[1])))


def test_nf_axioms():
    assert outcomes(eval_nf(RAND)) == [(half, Num(0)), (half, Num(1))]
    assert outcomes(eval_nf(app(S0, Num(3)))) == [(1, Num(6))]
    assert outcomes(eval_nf(app(P, Num(0)))) == [(1, Num(0))]


def test_nf_refuses_recursion():
    r = parse_term(r"rec[N](3; 0; \x:!N. \y:~N. S1 y)")
    with pytest.raises(NotExplicit):
        eval_nf(r)


def test_rf_constant_is_fixed():
    assert outcomes(eval_rf(Num(6))) == [(1, Num(6))]


def test_rf_unfolds_sideways_example():
    (w,) = eval_rf(sideways_term())
    assert w.probability == 1
    assert w.result.is_explicit
    # (\z:~N. g1 (g2 (g3 (g4 z)))) 2, with each gi = \y:~N. (case rand ...) y
    assert isinstance(w.result, App) and w.result.arg == Num(2)
    chain = w.result.fun.body
    links = 0
    while isinstance(chain, App):
        assert isinstance(chain.fun, Abs) and chain.fun.aspect is NONMODAL
        chain, links = chain.arg, links + 1
    assert links == 4


def test_rf_congruence_under_variable_head():
    # inside a lambda, an application headed by a variable keeps its shape
    f = arrow(NONMODAL, N, N)
    t = lam("f", NONMODAL, f, app(var("f"), App(lam("x", MODAL, N, app(S1, var("x"))), RAND)))
    ws = eval_rf(t)
    assert outcomes(ws) == [
        (half, lam("f", NONMODAL, f, app(var("f"), app(S1, Num(0))))),
        (half, lam("f", NONMODAL, f, app(var("f"), app(S1, Num(1))))),
    ]


def test_rf_modal_beta_substitutes_and_nonmodal_beta_keeps():
    modal = App(lam("x", MODAL, N, app(S1, var("x"))), app(S0, Num(1)))
    assert outcomes(eval_rf(modal)) == [(1, app(S1, Num(2)))]
    nonmodal = App(lam("x", NONMODAL, N, app(S1, var("x"))), app(S0, Num(1)))
    assert outcomes(eval_rf(nonmodal)) == [(1, App(lam("x", NONMODAL, N, app(S1, var("x"))), Num(2)))]


def test_eval_examples():
    assert eval(Num(3)) == {3: 1}
    assert eval(xor_term()) == {0: 1}
    d = eval(sideways_term())
    assert d == {k: F(1, 16) for k in range(32, 48)}
    assert d[0b100110] == F(1, 16)


def test_higher_order_argument():
    assert eval(parse_term(r"(\f:~(N ~-> N). f 3) (\x:~N. S1 x)")) == {7: 1}


@pytest.mark.parametrize("name, t", full_corpus(), ids=[n for n, _ in full_corpus()])
def test_adequacy(name, t):
    d = eval(t)
    assert d == eval_distribution_smallstep(t)
    assert d.mass == 1
    assert d.is_dyadic()


def test_metrics_examples():
    assert derivation_metrics(Num(5)).derivation_size == 1
    branches = eval_nf(RAND)
    assert len(branches) == 2
    assert all(w.metrics.derivation_size == 1 for w in branches)
    assert all(w.metrics.derivation_size == 2 for w in eval_nf(app(S1, RAND)))
    m = derivation_metrics(app(S1, RAND))
    assert m == DerivationMetrics(2, 2, 2, 2)


def test_eval_metrics_phases():
    rf_m, nf_m = eval_metrics(app(mk_add(), unary(2), unary(3)))
    assert rf_m.derivation_size >= 1
    assert nf_m.derivation_size >= 1


def _slope(xs, ys):
    lx = [math.log(x) for x in xs]
    ly = [math.log(y) for y in ys]
    mx, my = sum(lx) / len(lx), sum(ly) / len(ly)
    return sum((a - mx) * (b - my) for a, b in zip(lx, ly)) / sum((a - mx) ** 2 for a in lx)


@pytest.mark.parametrize(
    "build, bound",
    [
        (lambda n: app(mk_add(), unary(n), unary(n)), 1.5),
        (lambda n: app(mk_mult(), unary(n), unary(n)), 2.5),
        (lambda n: app(compile_polynomial([0, 0, 1]), unary(n)), 2.5),
    ],
)
def test_work_grows_polynomially(build, bound):
    ns = [2, 4, 8, 16, 32]
    sizes = [sum(m.derivation_size for m in eval_metrics(build(n))) for n in ns]
    assert _slope(ns, sizes) <= bound


def test_gate_refuses_untyped_and_open_terms():
    omega = parse_term(r"(\x:~(N ~-> N). x x) (\x:~(N ~-> N). x x)")
    with pytest.raises(TypeCheckError):
        eval(omega)
    with pytest.raises(EvaluationError):
        eval(var("y"))


def test_unsafe_nontermination_is_a_resource_error():
    omega = parse_term(r"(\x:~(N ~-> N). x x) (\x:~(N ~-> N). x x)")
    with pytest.raises(ResourceExhausted):
        eval(omega, check_types=False, fuel=1000)
    with pytest.raises(FuelExhausted):
        eval(omega, check_types=False, fuel=50)


def test_sample_basics():
    assert sample(Num(5), 123) == 5
    assert sample(RAND, 7) in (0, 1)
    assert sample(RAND, 7) == sample(RAND, 7)
    assert sample(sideways_term(), 11) in range(32, 48)


def test_sample_rand_frequency():
    counts = sample_many(RAND, range(10_000))
    assert 0.47 <= counts.get(1, 0) / 10_000 <= 0.53


def test_sample_unfolds_large_recursion():
    t = Rec(N, Num(2**40), Num(0), lam("x", MODAL, N, lam("y", NONMODAL, N, app(S1, var("y")))))
    assert sample(t, 0) == 2**41 - 1
