from __future__ import annotations

import warnings
from fractions import Fraction as F

import pytest

from corpus import MACHINES
from rslr.ast import MODAL, N, Num, app, arrow
from rslr.bigstep import eval
from rslr.stdlib import mk_encode, unary
from rslr.syntax import parse_term, print_term
from rslr.tm import (
    ACCEPT,
    REJECT,
    TMConfig,
    TMSpecError,
    Triple,
    check_error_recognition,
    compile_tm,
    config_value,
    emit_tm_spec,
    initial_config,
    input_symbols,
    majority_decision,
    output_projection,
    parse_tm_spec,
    run_oracle,
    simulate_tm,
)
from rslr.types import EMPTY, TypeCheckError, infer

half = F(1, 2)

HEADER = """\
states: a, f
initial: a
finals: f
alphabet: _, 0, 1
budget: 1
"""


def load(name):
    return parse_tm_spec((MACHINES / f"{name}.tm").read_text())


def test_parse_machine_files():
    spec = load("walk")
    assert spec.states == ("a", "b", "c")
    assert spec.finals == frozenset({"c"})
    assert spec.blank == "_"
    # coefficients run from the constant term up
    assert spec.budget_at(3) == 5
    assert spec.transitions[("a", "_")] == (Triple("b", "1", "R"), Triple("c", "_", "S"))
    # the final state was filled in with self-loops
    assert spec.transitions[("c", "0")] == (Triple("c", "0", "S"),) * 2


@pytest.mark.parametrize("name", ["bitflip", "coin", "walk"])
def test_emit_roundtrip(name):
    spec = load(name)
    text = emit_tm_spec(spec)
    again = parse_tm_spec(text)
    assert again == spec
    assert again.transitions == spec.transitions
    assert emit_tm_spec(again) == text


def test_arrow_less_trans_lines_and_comments():
    text = HEADER + "a, _ -> (f, _, S) | (f, 1, S)  -- comment\na, 0 -> (a, 0, R) | (a, 0, R)\ntrans:\na, 1 -> (a, 1, R) | (a, 1, R)\n"
    spec = parse_tm_spec(text)
    assert spec.transitions[("a", "_")][1] == Triple("f", "1", "S")


@pytest.mark.parametrize(
    "text, fragment",
    [
        (HEADER.replace("initial: a", "initial: z"), "initial"),
        (HEADER.replace("budget: 1", "budget: -1"), "budget"),
        (HEADER.replace("budget: 1", "budget: x"), "budget"),
        (HEADER.replace("states: a, f", "states: a, a"), "distinct"),
        (HEADER.replace("alphabet: _, 0, 1\n", ""), "missing field"),
        (HEADER + "a, _ -> (f, _, S)\n", "cannot parse"),
        (HEADER + "a, 2 -> (f, _, S) | (f, _, S)\n", "undeclared symbol"),
        (HEADER + "a, _ -> (q, _, S) | (f, _, S)\n", "undeclared state"),
        (HEADER + "a, _ -> (f, _, S) | (f, _, S)\na, _ -> (f, _, S) | (f, _, S)\n", "duplicate"),
        (HEADER + "a, _ -> (f, _, S) | (f, _, S)\n", "missing pair"),
    ],
)
def test_spec_errors(text, fragment):
    with pytest.raises(TMSpecError) as info:
        parse_tm_spec(text)
    assert fragment in str(info.value)


def test_error_reports_line():
    with pytest.raises(TMSpecError) as info:
        parse_tm_spec(HEADER + "nonsense here\n")
    assert info.value.line == 6


def test_final_state_without_self_loop_warns():
    text = HEADER + (
        "a, _ -> (f, _, S) | (f, _, S)\na, 0 -> (f, 0, S) | (f, 0, S)\na, 1 -> (f, 1, S) | (f, 1, S)\n"
        "f, 0 -> (a, 0, S) | (f, 0, S)\n"
    )
    with pytest.warns(UserWarning, match="self-loop"):
        parse_tm_spec(text)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        load("coin")


def test_input_conventions():
    assert input_symbols(0) == ()
    assert input_symbols(6) == ("1", "1", "0")
    spec = load("bitflip")
    assert initial_config(spec, ("1", "0")) == TMConfig(("1",), "0", (), "flip")
    assert initial_config(spec, ()) == TMConfig((), "_", (), "flip")


def test_output_projection():
    c = TMConfig(("_", "1"), "0", ("1", "_"), "x")
    # right half is stored reversed: tape reads _ 1 0 _ 1
    assert output_projection(c) == 0b101
    assert output_projection(TMConfig((), "_", (), "x")) == 0


def test_simulator_steps():
    spec = load("coin")
    d = simulate_tm(spec, "1", 1)
    assert d == {TMConfig(("1",), "_", (), "go"): 1}
    d = simulate_tm(spec, "1", 2)
    assert d == {TMConfig(("1",), "0", (), "done"): half, TMConfig(("1",), "1", (), "done"): half}
    with pytest.raises(TMSpecError):
        simulate_tm(spec, "2", 1)


def test_simulator_moves_off_the_left_end():
    spec = load("bitflip")
    d = simulate_tm(spec, "10", 2)
    assert d == {TMConfig((), "_", ("1", "0"), "flip"): 1}


def test_config_value():
    spec = load("bitflip")
    c = TMConfig(("1",), "0", (), "done")
    # "1" is symbol 2, block 100; "0" is symbol 1; state done is index 1
    assert config_value(spec, c) == (0b100, (0b10, (0, 0b10)))


def bitflip_oracle(x):
    return (1 << x.bit_length()) - 1 - x


def coin_oracle(x):
    return {2 * x: half, 2 * x + 1: half}


@pytest.mark.parametrize("x", range(16))
def test_oracle_matches_closed_forms(x):
    assert run_oracle(load("bitflip"), x) == {bitflip_oracle(x): 1}
    assert run_oracle(load("coin"), x) == coin_oracle(x)
    assert run_oracle(load("walk"), x).mass == 1


def test_walk_oracle_example():
    # three steps from state a on "1", traced by hand through the table
    assert run_oracle(load("walk"), 1) == {1: F(5, 8), 4: F(1, 8), 0: F(1, 4)}


def test_compiled_type():
    for name in ("bitflip", "coin", "walk"):
        assert infer(EMPTY, compile_tm(load(name))) == arrow(MODAL, N, N)


def test_compiled_source_reparses():
    t = compile_tm(load("coin"))
    assert parse_term(print_term(t)) == t


@pytest.mark.parametrize("name", ["bitflip", "coin", "walk"])
def test_compiled_matches_oracle(name):
    spec = load(name)
    t = compile_tm(spec)
    for x in range(16):
        assert eval(app(t, Num(x)), check_types=False) == run_oracle(spec, x), x


def test_compile_requires_digit_symbols():
    text = "states: a, f\ninitial: a\nfinals: f\nalphabet: _, 0, x\nbudget: 1\n"
    text += "a, _ -> (f, _, S) | (f, _, S)\na, 0 -> (f, 0, S) | (f, 0, S)\na, x -> (f, x, S) | (f, x, S)\n"
    with pytest.raises(TMSpecError, match="'0' and '1'"):
        compile_tm(parse_tm_spec(text))
    blank_digit = "states: a\ninitial: a\nfinals: a\nalphabet: 0, 1, _\nbudget: 1\n"
    with pytest.raises(TMSpecError, match="blank"):
        compile_tm(parse_tm_spec(blank_digit))


# ------------------------------------------------------------ recognition

parity = parse_term(r"\x:!N. case[N] x { zero -> 0 | even -> 0 | odd -> 1 }")
coin = compile_tm(load("coin"))


def test_recognition_parity():
    samples = [(x, x % 2 == 0) for x in range(10)]
    for eps in ("1/4", "1/2"):
        report = check_error_recognition(parity, samples, eps)
        assert report.passed
        assert report.min_margin == 1 - F(eps)


def test_recognition_coin_fails():
    # on 0 the machine writes one fair bit; elsewhere the output is never 0
    report = check_error_recognition(coin, [(0, True), (0, False), (3, True)], "1/4")
    assert not report.passed
    assert [r.correct_mass for r in report.results] == [half, half, 0]
    assert [r.margin for r in report.results] == [F(1, 4), F(1, 4), F(-1, 4)]


def test_recognition_argument_checks():
    with pytest.raises(ValueError):
        check_error_recognition(parity, [(0, True)], "3/4")
    with pytest.raises(TypeCheckError):
        check_error_recognition(Num(0), [(0, True)], "1/4")


def test_majority():
    assert majority_decision(parity, 4) == ACCEPT
    assert majority_decision(parity, 5) == REJECT
    # the coin machine ties on 0, and ties accept
    assert majority_decision(coin, 0) == ACCEPT
    assert majority_decision(coin, 3) == REJECT
    assert majority_decision(mk_encode(), 0) == ACCEPT
    assert eval(app(mk_encode(), unary(0))) == {0: 1}
