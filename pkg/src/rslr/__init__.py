"""Toolkit for a probabilistic lambda calculus with safe linear recursion."""

from __future__ import annotations

from .ast import MODAL, NONMODAL, Abs, App, Arrow, Aspect, Case, N, Num, Pair, Prod, Proj, Rec, Term, Type
from .bigstep import derivation_metrics, eval_nf, eval_rf, sample
from .bigstep import eval as evaluate
from .dist import Distribution
from .smallstep import eval_distribution_smallstep
from .syntax import parse_term, parse_type, print_term, print_type
from .types import TypeCheckError, infer, subtype

__all__ = [
    "MODAL",
    "NONMODAL",
    "Abs",
    "App",
    "Arrow",
    "Aspect",
    "Case",
    "Distribution",
    "N",
    "Num",
    "Pair",
    "Prod",
    "Proj",
    "Rec",
    "Term",
    "Type",
    "TypeCheckError",
    "derivation_metrics",
    "eval_distribution_smallstep",
    "eval_nf",
    "eval_rf",
    "evaluate",
    "infer",
    "parse_term",
    "parse_type",
    "print_term",
    "print_type",
    "sample",
    "subtype",
]
