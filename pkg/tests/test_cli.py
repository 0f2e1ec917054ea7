from __future__ import annotations

import io
import json
import math
from fractions import Fraction as F

import pytest

from corpus import EXPONENTIAL_SRC_TEMPLATE, MACHINES, SIDEWAYS_SRC
from rslr.cli import CliConfig, UsageError, main, parse_samples
from rslr.dist import Distribution
from rslr.stdlib import mk_mult
from rslr.syntax import print_term

OMEGA = r"(\x:~(N ~-> N). x x) (\x:~(N ~-> N). x x)"
COIN = r"\x:!N. rand"
PARITY = r"\x:!N. case[N] x { zero -> 0 | even -> 0 | odd -> 1 }"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_typecheck(capsys):
    assert run(capsys, "typecheck", "--stdlib", "add") == (0, "N !-> N ~-> N\n", "")
    code, out, _ = run(capsys, "typecheck", "-e", "0")
    assert (code, out) == (0, "N\n")


def test_typecheck_rejects_exponential(capsys):
    src = EXPONENTIAL_SRC_TEMPLATE.replace("{mult}", print_term(mk_mult()))
    code, out, err = run(capsys, "typecheck", "-e", src)
    assert code == 1
    assert out == ""
    assert "aspect-violation" in err and "T-Rec" in err


def test_parse_error(capsys):
    code, _, err = run(capsys, "parse", "-e", r"\x:N. x")
    assert code == 1
    assert err.startswith("parse error")


def test_parse_and_emit(capsys):
    code, out, _ = run(capsys, "parse", "-e", r"(\x : ~N . S1 x) 0b11")
    assert (code, out) == (0, "(\\x:~N. S1 x) 3\n")
    code, out, _ = run(capsys, "emit", "--stdlib", "add")
    assert code == 0
    assert run(capsys, "typecheck", "-e", out)[1] == "N !-> N ~-> N\n"


def test_term_from_file_and_stdin(capsys, tmp_path, monkeypatch):
    f = tmp_path / "t.rslr"
    f.write_text("S1 3\n")
    assert run(capsys, "eval", str(f))[1] == "7\t1/1\t1\n"
    monkeypatch.setattr("sys.stdin", io.StringIO("S0 3"))
    assert run(capsys, "eval", "-")[1] == "6\t1/1\t1\n"


def test_exactly_one_source(capsys):
    code, _, err = run(capsys, "eval", "-e", "0", "--stdlib", "add")
    assert code == 1 and "exactly one" in err
    code, _, err = run(capsys, "eval", "--stdlib", "nope")
    assert code == 1 and "unknown stdlib" in err


def test_eval_with_args(capsys):
    # unary 2 plus unary 3
    assert run(capsys, "eval", "--stdlib", "add", "--arg", "3", "--arg", "7") == (0, "31\t1/1\t1\n", "")


def test_eval_sideways(capsys):
    code, out, _ = run(capsys, "eval", "-e", SIDEWAYS_SRC)
    assert code == 0
    lines = out.splitlines()
    assert lines == [f"{k}\t1/16\t0.0625" for k in range(32, 48)]


def test_eval_json_lines_and_metrics(capsys):
    code, out, _ = run(capsys, "eval", "-e", "S1 rand", "--metrics", "--format", "json-lines")
    assert code == 0
    records = [json.loads(line) for line in out.splitlines()]
    assert records[0] == {"outcome": 1, "probability": "1/2", "decimal": 0.5}
    assert [r["metrics"]["phase"] for r in records[2:]] == ["rf", "nf"]
    d = Distribution.from_json_lines("\n".join(out.splitlines()[:2]))
    assert d == {1: F(1, 2), 3: F(1, 2)}


def test_eval_text_metrics(capsys):
    out = run(capsys, "eval", "-e", "S1 rand", "--metrics")[1]
    assert out.splitlines()[2].startswith("# metrics rf: derivation_size=")
    assert "max_numsize=" in out.splitlines()[3]


def test_reduce_and_trace(capsys):
    code, out, _ = run(capsys, "reduce", "-e", r"(\x:~N. S1 x) rand", "--trace", "--strategy", "rightmost")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == r"1 ⊢ (\x:~N. S1 x) rand → (\x:~N. S1 x) 0, (\x:~N. S1 x) 1"
    assert lines[-2:] == ["1\t1/2\t0.5", "3\t1/2\t0.5"]


def test_sample_rand_frequency(capsys):
    code, out, _ = run(capsys, "sample", "-e", "rand", "--count", "10000")
    assert code == 0
    rows = dict((int(v), int(c)) for v, c, _ in (line.split("\t") for line in out.splitlines()))
    assert sum(rows.values()) == 10000
    # three standard deviations of a fair binomial
    assert abs(rows[1] - 5000) <= 3 * math.sqrt(10000 * 0.25)


def test_sample_is_seeded(capsys):
    a = run(capsys, "sample", "-e", SIDEWAYS_SRC, "--seed", "5", "--count", "20")[1]
    b = run(capsys, "sample", "-e", SIDEWAYS_SRC, "--seed", "5", "--count", "20")[1]
    assert a == b


def test_fuel_exhaustion_exit_code(capsys):
    code, _, err = run(capsys, "eval", "-e", OMEGA, "--unsafe", "--fuel", "100")
    assert code == 2
    assert err.startswith("error:")
    code, _, _ = run(capsys, "reduce", "-e", OMEGA, "--unsafe", "--fuel", "100")
    assert code == 2
    # without --unsafe the term is refused before evaluation
    assert run(capsys, "eval", "-e", OMEGA)[0] == 1


def test_stuck_term(capsys):
    assert run(capsys, "reduce", "-e", "1 2", "--unsafe")[0] == 1


def test_bad_flags_exit_through_argparse(capsys):
    with pytest.raises(SystemExit) as info:
        main(["eval", "-e", "0", "--fuel", "0"])
    assert info.value.code == 2
    with pytest.raises(SystemExit):
        main(["frobnicate"])


@pytest.mark.parametrize("name", ["bitflip", "coin", "walk"])
def test_compile_tm_matches_oracle(capsys, tmp_path, name):
    spec = str(MACHINES / f"{name}.tm")
    code, src, _ = run(capsys, "compile-tm", spec)
    assert code == 0
    f = tmp_path / f"{name}.rslr"
    f.write_text(src)
    for x in (0, 5, 6):
        compiled = run(capsys, "eval", str(f), "--arg", str(x))
        oracle = run(capsys, "compile-tm", spec, "--oracle", str(x))
        assert compiled[0] == oracle[0] == 0
        assert compiled[1] == oracle[1]


def test_emit_tm(capsys):
    code, out, _ = run(capsys, "emit-tm", str(MACHINES / "coin.tm"))
    assert code == 0
    assert out.splitlines()[0] == "states: go, done"
    assert "trans done, _ -> (done, _, S) | (done, _, S)" in out


def test_bad_tm_spec(capsys, tmp_path):
    f = tmp_path / "bad.tm"
    f.write_text("states: a\n")
    code, _, err = run(capsys, "compile-tm", str(f))
    assert code == 1 and "missing field" in err


def test_check_lang(capsys, tmp_path):
    f = tmp_path / "samples.txt"
    f.write_text("# parity\n0 yes\n1 no\n2 member\n3 nonmember\n")
    code, out, _ = run(capsys, "check-lang", "-e", PARITY, "--samples", str(f))
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "0\tmember\t1\tmargin=3/4\tok"
    assert lines[-1] == "# epsilon=1/4 min_margin=3/4 PASS"
    code, out, _ = run(capsys, "check-lang", "-e", COIN, "--samples", str(f), "--epsilon", "1/2")
    assert code == 0
    assert out.splitlines()[-1].endswith("FAIL")


def test_check_lang_json(capsys, tmp_path):
    f = tmp_path / "samples.txt"
    f.write_text("4, 1\n")
    out = run(capsys, "check-lang", "-e", PARITY, "--samples", str(f), "--format", "json-lines")[1]
    assert json.loads(out) == {"input": 4, "member": True, "correct_mass": "1", "margin": "3/4", "passed": True}


def test_majority(capsys):
    code, out, _ = run(capsys, "majority", "-e", PARITY, "--input", "4", "--input", "5")
    assert (code, out) == (0, "4\taccept\n5\treject\n")
    assert run(capsys, "majority", "-e", COIN, "--input", "9")[1] == "9\taccept\n"


def test_parse_samples():
    assert parse_samples("1 yes\n2,no # comment\n\n") == [(1, True), (2, False)]
    for bad in ("1\n", "x yes\n", "1 maybe\n"):
        with pytest.raises(UsageError):
            parse_samples(bad)


def test_config_validation():
    with pytest.raises(UsageError):
        CliConfig("eval", fuel=0)
    with pytest.raises(UsageError):
        CliConfig("sample", count=-1)
