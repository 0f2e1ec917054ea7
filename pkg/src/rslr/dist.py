"""Exact finite distributions with rational weights.

Outcomes are plain Python values (``int`` for numerals, nested tuples for
pairs).  Weights are ``fractions.Fraction``; zero weights are dropped.  A
distribution may be sub-probabilistic (mass below 1).
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Iterator, Mapping
from fractions import Fraction
from typing import Union

Outcome = Union[int, tuple]


def _as_fraction(p: Fraction | int | str) -> Fraction:
    f = Fraction(p)
    if f < 0 or f > 1:
        raise ValueError(f"probability out of range: {f}")
    return f


class Distribution(Mapping[Outcome, Fraction]):
    __slots__ = ("_w",)

    def __init__(self, weights: Mapping[Outcome, Fraction | int | str] | Iterable[tuple[Outcome, Fraction]] = ()) -> None:
        items = weights.items() if isinstance(weights, Mapping) else weights
        w: dict[Outcome, Fraction] = {}
        for k, p in items:
            p = Fraction(p)
            if p < 0:
                raise ValueError(f"negative weight {p} for {k!r}")
            if p:
                w[k] = w.get(k, Fraction(0)) + p
        if sum(w.values()) > 1:
            raise ValueError("total mass exceeds 1")
        self._w = w

    @classmethod
    def dirac(cls, outcome: Outcome) -> Distribution:
        return cls({outcome: Fraction(1)})

    @classmethod
    def mix(cls, parts, weights=None) -> Distribution:
        """Convex combination ``sum_i w_i * D_i``.

        Accepts either an iterable of ``(weight, distribution)`` pairs, or a
        list of distributions together with a list of weights.
        """
        if weights is not None:
            parts, weights = list(parts), list(weights)
            if len(parts) != len(weights):
                raise ValueError(f"{len(parts)} distributions but {len(weights)} weights")
            parts = zip(weights, parts)
        acc: dict[Outcome, Fraction] = {}
        total = Fraction(0)
        for w, d in parts:
            w = _as_fraction(w)
            total += w
            for k, p in d.items():
                acc[k] = acc.get(k, Fraction(0)) + w * p
        if total > 1:
            raise ValueError(f"weights sum to {total} > 1")
        return cls(acc)

    def __getitem__(self, k: Outcome) -> Fraction:
        return self._w.get(k, Fraction(0))

    def __contains__(self, k: object) -> bool:
        return k in self._w

    def __iter__(self) -> Iterator[Outcome]:
        return iter(self._w)

    def __len__(self) -> int:
        return len(self._w)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Distribution):
            return self._w == other._w
        if isinstance(other, Mapping):
            return self._w == {k: Fraction(v) for k, v in other.items() if v}
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._w.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{k!r}: {p}" for k, p in self.sorted_items())
        return f"Distribution({{{body}}})"

    @property
    def mass(self) -> Fraction:
        return sum(self._w.values(), Fraction(0))

    def support(self) -> list[Outcome]:
        return [k for k, _ in self.sorted_items()]

    def sorted_items(self) -> list[tuple[Outcome, Fraction]]:
        return sorted(self._w.items(), key=lambda kv: _sort_key(kv[0]))

    def total_variation(self, other: Distribution) -> Fraction:
        keys = set(self._w) | set(other._w)
        return sum((abs(self[k] - other[k]) for k in keys), Fraction(0)) / 2

    def is_dyadic(self) -> bool:
        """All weights have a power-of-two denominator."""
        return all(p.denominator & (p.denominator - 1) == 0 for p in self._w.values())

    def map(self, fn) -> Distribution:
        acc: dict[Outcome, Fraction] = {}
        for k, p in self._w.items():
            k2 = fn(k)
            acc[k2] = acc.get(k2, Fraction(0)) + p
        return Distribution(acc)

    # serialisation

    def to_text(self) -> str:
        """One ``outcome<TAB>num/den<TAB>decimal`` line per outcome, ascending."""
        lines = []
        for k, p in self.sorted_items():
            lines.append(f"{_fmt_outcome(k)}\t{p.numerator}/{p.denominator}\t{format(float(p), '.12g')}")
        return "\n".join(lines) + ("\n" if lines else "")

    def to_json_lines(self) -> str:
        lines = []
        for k, p in self.sorted_items():
            rec = {"outcome": _jsonable(k), "probability": f"{p.numerator}/{p.denominator}", "decimal": float(p)}
            lines.append(json.dumps(rec))
        return "\n".join(lines) + ("\n" if lines else "")

    def serialize(self, fmt: str = "text") -> str:
        if fmt == "text":
            return self.to_text()
        if fmt == "json-lines":
            return self.to_json_lines()
        raise ValueError(f"unknown format {fmt!r}")

    @classmethod
    def from_text(cls, text: str) -> Distribution:
        weights = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, frac, _ = line.split("\t")
            weights[_parse_outcome(key)] = Fraction(frac)
        return cls(weights)

    @classmethod
    def from_json_lines(cls, text: str) -> Distribution:
        weights = {}
        for line in text.splitlines():
            if line.strip():
                rec = json.loads(line)
                weights[_from_jsonable(rec["outcome"])] = Fraction(rec["probability"])
        return cls(weights)


def _sort_key(k):
    if isinstance(k, int):
        return (0, k)
    if isinstance(k, tuple):
        return (1, tuple(_sort_key(x) for x in k))
    return (2, repr(k))


def _fmt_outcome(k: Outcome) -> str:
    if not isinstance(k, tuple):
        return str(k)
    return "<" + ",".join(_fmt_outcome(x) for x in k) + ">"


def _parse_outcome(s: str) -> Outcome:
    s = s.strip()
    if not s.startswith("<"):
        return int(s)
    depth, parts, start = 0, [], 1
    for i, ch in enumerate(s[1:-1], start=1):
        if ch == "<":
            depth += 1
        elif ch == ">":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(s[start:i])
            start = i + 1
    parts.append(s[start:-1])
    return tuple(_parse_outcome(p) for p in parts)


def _jsonable(k: Outcome):
    return k if isinstance(k, int) else [_jsonable(x) for x in k]


def _from_jsonable(k) -> Outcome:
    return k if isinstance(k, int) else tuple(_from_jsonable(x) for x in k)
