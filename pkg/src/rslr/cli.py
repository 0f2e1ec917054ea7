"""Command-line interface.

Exit codes: 0 on success, 1 for user errors (syntax, typing, malformed
specs, stuck terms), 2 when evaluation runs out of fuel or stack.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import bigstep
from .ast import Num, Term, app
from .bigstep import DerivationMetrics, eval_metrics, sample_many
from .dist import Distribution, _fmt_outcome, _jsonable, _sort_key
from .smallstep import (
    STRATEGIES,
    EvaluationError,
    ResourceExhausted,
    eval_distribution_smallstep,
    format_step,
)
from .stdlib import catalogue
from .syntax import ParseError, parse_term, print_term, print_type
from .tm import (
    TMSpecError,
    check_error_recognition,
    compile_tm,
    emit_tm_spec,
    majority_decision,
    parse_tm_spec,
    run_oracle,
)
from .types import EMPTY, TypeCheckError, infer

FORMATS = ("text", "json-lines")


class UsageError(Exception):
    """Bad command-line input that argparse cannot catch by itself."""


@dataclass
class CliConfig:
    subcommand: str
    inputs: list[str] = field(default_factory=list)
    fuel: int = bigstep.DEFAULT_FUEL
    seed: int = 0
    count: int = 1
    strategy: str = "leftmost"
    unsafe: bool = False
    fmt: str = "text"

    def __post_init__(self) -> None:
        if self.fuel <= 0:
            raise UsageError("--fuel must be positive")
        if self.count < 0:
            raise UsageError("--count must be nonnegative")


def _positive(s: str) -> int:
    n = int(s)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def _natural(s: str) -> int:
    n = int(s)
    if n < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return n


# ------------------------------------------------------------ input helpers


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_term(args: argparse.Namespace) -> Term:
    sources = [x is not None for x in (args.file, args.expr, args.stdlib)]
    if sum(sources) != 1:
        raise UsageError("give exactly one of FILE, -e EXPR or --stdlib NAME")
    if args.stdlib is not None:
        lib = catalogue()
        if args.stdlib not in lib:
            raise UsageError(f"unknown stdlib term {args.stdlib!r}; choose from {', '.join(sorted(lib))}")
        t = lib[args.stdlib]
    else:
        t = parse_term(args.expr if args.expr is not None else _read(args.file))
    for n in getattr(args, "arg", None) or ():
        t = app(t, Num(n))
    return t


def _config(args: argparse.Namespace) -> CliConfig:
    inputs = [x for x in (getattr(args, "file", None), getattr(args, "samples", None)) if x]
    return CliConfig(
        subcommand=args.command,
        inputs=inputs,
        fuel=getattr(args, "fuel", bigstep.DEFAULT_FUEL),
        seed=getattr(args, "seed", 0),
        count=getattr(args, "count", 1),
        strategy=getattr(args, "strategy", "leftmost"),
        unsafe=getattr(args, "unsafe", False),
        fmt=getattr(args, "format", "text"),
    )


def _metrics_record(label: str, m: DerivationMetrics) -> dict:
    return {
        "phase": label,
        "derivation_size": m.derivation_size,
        "max_subterm_size": m.max_subterm_size,
        "max_wonum": m.max_wonum,
        "max_numsize": m.max_numsize,
    }


# ------------------------------------------------------------ commands


def cmd_parse(args, cfg: CliConfig, out) -> int:
    t = _load_term(args)
    out.write(print_term(t) + "\n")
    return 0


def cmd_typecheck(args, cfg: CliConfig, out) -> int:
    t = _load_term(args)
    out.write(print_type(infer(EMPTY, t)) + "\n")
    return 0


def cmd_emit(args, cfg: CliConfig, out) -> int:
    return cmd_parse(args, cfg, out)


def cmd_reduce(args, cfg: CliConfig, out) -> int:
    t = _load_term(args)
    hook = None
    if args.trace:
        def hook(pos, term, res):
            out.write(format_step(pos, term, res) + "\n")
    d = eval_distribution_smallstep(t, cfg.fuel, cfg.strategy, check_types=not cfg.unsafe, trace=hook)
    out.write(d.serialize(cfg.fmt))
    return 0


def cmd_eval(args, cfg: CliConfig, out) -> int:
    t = _load_term(args)
    d = bigstep.eval(t, check_types=not cfg.unsafe, fuel=cfg.fuel)
    out.write(d.serialize(cfg.fmt))
    if args.metrics:
        rf_m, nf_m = eval_metrics(t, check_types=not cfg.unsafe, fuel=cfg.fuel)
        for label, m in (("rf", rf_m), ("nf", nf_m)):
            rec = _metrics_record(label, m)
            if cfg.fmt == "json-lines":
                out.write(json.dumps({"metrics": rec}) + "\n")
            else:
                fields = " ".join(f"{k}={v}" for k, v in rec.items() if k != "phase")
                out.write(f"# metrics {label}: {fields}\n")
    return 0


def cmd_sample(args, cfg: CliConfig, out) -> int:
    t = _load_term(args)
    seeds = range(cfg.seed, cfg.seed + cfg.count)
    counts = sample_many(t, seeds, check_types=not cfg.unsafe, fuel=cfg.fuel)
    for k in sorted(counts, key=_sort_key):
        c = counts[k]
        freq = c / cfg.count if cfg.count else 0.0
        if cfg.fmt == "json-lines":
            out.write(json.dumps({"outcome": _jsonable(k), "count": c, "frequency": freq}) + "\n")
        else:
            out.write(f"{_fmt_outcome(k)}\t{c}\t{format(freq, '.6g')}\n")
    return 0


def cmd_compile_tm(args, cfg: CliConfig, out) -> int:
    spec = parse_tm_spec(_read(args.spec))
    if args.oracle is not None:
        out.write(run_oracle(spec, args.oracle).serialize(cfg.fmt))
        return 0
    out.write(print_term(compile_tm(spec)) + "\n")
    return 0


def cmd_emit_tm(args, cfg: CliConfig, out) -> int:
    out.write(emit_tm_spec(parse_tm_spec(_read(args.spec))))
    return 0


_YES = {"1", "yes", "true", "member", "accept", "in"}
_NO = {"0", "no", "false", "nonmember", "reject", "out"}


def parse_samples(text: str) -> list[tuple[int, bool]]:
    """Read ``INPUT LABEL`` lines; ``#`` starts a comment."""
    samples = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise UsageError(f"samples line {lineno}: expected 'INPUT LABEL'")
        try:
            x = int(parts[0])
        except ValueError:
            raise UsageError(f"samples line {lineno}: input must be a natural number") from None
        label = parts[1].lower()
        if label in _YES:
            samples.append((x, True))
        elif label in _NO:
            samples.append((x, False))
        else:
            raise UsageError(f"samples line {lineno}: unknown label {parts[1]!r}")
    return samples


def cmd_check_lang(args, cfg: CliConfig, out) -> int:
    t = _load_term(args)
    samples = parse_samples(_read(args.samples))
    report = check_error_recognition(t, samples, Fraction(args.epsilon))
    for r in report.results:
        if cfg.fmt == "json-lines":
            rec = {
                "input": r.input,
                "member": r.member,
                "correct_mass": str(r.correct_mass),
                "margin": str(r.margin),
                "passed": r.passed,
            }
            out.write(json.dumps(rec) + "\n")
        else:
            verdict = "ok" if r.passed else "FAIL"
            out.write(f"{r.input}\t{'member' if r.member else 'nonmember'}\t{r.correct_mass}\tmargin={r.margin}\t{verdict}\n")
    summary = "PASS" if report.passed else "FAIL"
    if cfg.fmt == "text":
        out.write(f"# epsilon={report.epsilon} min_margin={report.min_margin} {summary}\n")
    return 0


def cmd_majority(args, cfg: CliConfig, out) -> int:
    t = _load_term(args)
    for x in args.input:
        out.write(f"{x}\t{majority_decision(t, x)}\n")
    return 0


COMMANDS = {
    "parse": cmd_parse,
    "typecheck": cmd_typecheck,
    "reduce": cmd_reduce,
    "eval": cmd_eval,
    "sample": cmd_sample,
    "emit": cmd_emit,
    "compile-tm": cmd_compile_tm,
    "emit-tm": cmd_emit_tm,
    "check-lang": cmd_check_lang,
    "majority": cmd_majority,
}


# ------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rslr", description="Probabilistic lambda calculus with safe linear recursion.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def term_source(sp: argparse.ArgumentParser, with_args: bool = True) -> None:
        sp.add_argument("file", nargs="?", help="source file, or '-' for stdin")
        sp.add_argument("-e", "--expr", help="term given inline")
        sp.add_argument("--stdlib", metavar="NAME", help="use a named library term")
        if with_args:
            sp.add_argument("--arg", type=_natural, action="append", metavar="N", help="apply to numeral N (repeatable)")

    def run_flags(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--fuel", type=_positive, default=bigstep.DEFAULT_FUEL, help="step budget (default %(default)s)")
        sp.add_argument("--unsafe", action="store_true", help="skip the type check")
        sp.add_argument("--format", choices=FORMATS, default="text")

    sp = sub.add_parser("parse", help="parse and pretty-print a term")
    term_source(sp)
    sp = sub.add_parser("emit", help="print a term (e.g. a library term) as source")
    term_source(sp)
    sp = sub.add_parser("typecheck", help="print the minimal type of a closed term")
    term_source(sp)

    sp = sub.add_parser("reduce", help="evaluate by small-step reduction")
    term_source(sp)
    run_flags(sp)
    sp.add_argument("--strategy", choices=STRATEGIES, default="leftmost")
    sp.add_argument("--trace", action="store_true", help="print every step taken")

    sp = sub.add_parser("eval", help="evaluate to an exact distribution (big-step)")
    term_source(sp)
    run_flags(sp)
    sp.add_argument("--metrics", action="store_true", help="append derivation metrics")

    sp = sub.add_parser("sample", help="draw seeded samples")
    term_source(sp)
    run_flags(sp)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=_natural, default=1)

    sp = sub.add_parser("compile-tm", help="compile a machine spec to a term")
    sp.add_argument("spec", help="machine spec file, or '-'")
    sp.add_argument("--oracle", type=_natural, metavar="X", help="print the simulator's output distribution on X instead")
    sp.add_argument("--format", choices=FORMATS, default="text")

    sp = sub.add_parser("emit-tm", help="print a machine spec in canonical form")
    sp.add_argument("spec", help="machine spec file, or '-'")

    sp = sub.add_parser("check-lang", help="check recognition with error epsilon on labelled samples")
    term_source(sp, with_args=False)
    sp.add_argument("--samples", required=True, help="file of 'INPUT LABEL' lines")
    sp.add_argument("--epsilon", default="1/4", help="error bound in (0, 1/2] (default %(default)s)")
    sp.add_argument("--format", choices=FORMATS, default="text")

    sp = sub.add_parser("majority", help="decide inputs by majority")
    term_source(sp, with_args=False)
    sp.add_argument("--input", type=_natural, action="append", required=True, metavar="X")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = sys.stdout
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg, out)
    except ResourceExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    except TypeCheckError as exc:
        print(f"type error: {exc}", file=sys.stderr)
        return 1
    except (TMSpecError, UsageError, EvaluationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
