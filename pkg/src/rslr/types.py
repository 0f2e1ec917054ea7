"""Subtyping and the affine, aspect-aware type checker.

The checker is syntax-directed.  It infers the least type of a term and only
applies subsumption where a premise meets an expected type: arguments of
applications, case branches, and the base and step of a recursor.

Affinity is enforced by tracking which variables each subterm uses:
higher-order variables may be used by at most one premise of any rule,
while base-type variables can be shared freely.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass

from .ast import (
    MODAL,
    NONMODAL,
    Abs,
    App,
    Arrow,
    Aspect,
    Case,
    Const,
    ConstKind,
    FVar,
    N,
    Nat,
    Num,
    Pair,
    Prod,
    Proj,
    Rec,
    Term,
    Type,
    Var,
    is_base_type,
)

ERROR_KINDS = (
    "unbound-variable",
    "aspect-violation",
    "affinity-violation",
    "not-box-free",
    "subtype-failure",
    "scrutinee-not-base",
    "rec-context-not-modal",
    "arg-mismatch",
)


class TypeCheckError(Exception):
    """Typing failure.

    ``kind`` is one of ``ERROR_KINDS``; ``path`` locates the offending
    subterm as a list of steps from the root; ``rule`` names the typing rule
    whose premise failed.
    """

    def __init__(self, kind: str, path: tuple[str, ...], rule: str, detail: str) -> None:
        where = "/".join(path) or "<root>"
        super().__init__(f"{kind} at {where} ({rule}): {detail}")
        self.kind = kind
        self.path = path
        self.rule = rule
        self.detail = detail


# --------------------------------------------------------------- subtyping


def subtype(a: Type, b: Type) -> bool:
    """``a <: b``.  Arrows are contravariant in argument and aspect."""
    if isinstance(a, Nat):
        return isinstance(b, Nat)
    if isinstance(a, Prod):
        return isinstance(b, Prod) and subtype(a.left, b.left) and subtype(a.right, b.right)
    if isinstance(a, Arrow):
        return (
            isinstance(b, Arrow)
            and b.aspect <= a.aspect
            and subtype(b.arg, a.arg)
            and subtype(a.res, b.res)
        )
    return False


def box_free(ty: Type) -> bool:
    """No modal arrow anywhere in ``ty``."""
    if isinstance(ty, Arrow):
        return ty.aspect is NONMODAL and box_free(ty.arg) and box_free(ty.res)
    return True


def positively_box_free(ty: Type) -> bool:
    """No modal arrow in positive position."""
    if isinstance(ty, Arrow):
        if ty.aspect is MODAL:
            return False
        return negatively_box_free(ty.arg) and positively_box_free(ty.res)
    return True


def negatively_box_free(ty: Type) -> bool:
    """No modal arrow in negative position."""
    if isinstance(ty, Arrow):
        return positively_box_free(ty.arg) and negatively_box_free(ty.res)
    return True


# ----------------------------------------------------------------- contexts


@dataclass(frozen=True, slots=True)
class Binding:
    aspect: Aspect
    type: Type


class Context(Mapping[str, Binding]):
    """Typing context for free variables, split into base and higher-order parts."""

    def __init__(self, entries: Mapping[str, Binding | tuple[Aspect, Type]] | None = None) -> None:
        self._entries: dict[str, Binding] = {}
        for name, b in (entries or {}).items():
            self._entries[name] = b if isinstance(b, Binding) else Binding(*b)

    def __getitem__(self, name: str) -> Binding:
        return self._entries[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def extend(self, name: str, aspect: Aspect, ty: Type) -> Context:
        out = Context(self._entries)
        out._entries[name] = Binding(aspect, ty)
        return out

    @property
    def base(self) -> dict[str, Binding]:
        return {k: b for k, b in self._entries.items() if is_base_type(b.type)}

    @property
    def higher(self) -> dict[str, Binding]:
        return {k: b for k, b in self._entries.items() if not is_base_type(b.type)}


EMPTY = Context()

_SUCC = Arrow(NONMODAL, N, N)

# A variable is keyed by ("b", level) when bound inside the term, or
# ("f", name) when it comes from the context.
_Key = tuple


class _Checker:
    def __init__(self, ctx: Context) -> None:
        self.ctx = ctx
        self.env: list[tuple[str, Binding]] = []
        self.path: list[str] = []
        self.in_step = 0

    def fail(self, kind: str, rule: str, detail: str) -> TypeCheckError:
        if self.in_step:
            detail += " (inside the step function of a recursor: premise of T-Rec)"
        return TypeCheckError(kind, tuple(self.path), rule, detail)

    def binding(self, key: _Key) -> Binding:
        if key[0] == "b":
            return self.env[key[1]][1]
        return self.ctx[key[1]]

    def key_name(self, key: _Key) -> str:
        return self.env[key[1]][0] if key[0] == "b" else key[1]

    def higher(self, uses: Iterable[_Key]) -> set[_Key]:
        return {k for k in uses if not is_base_type(self.binding(k).type)}

    def disjoint(self, rule: str, labels: list[str], uses: list[frozenset]) -> None:
        seen: dict[_Key, str] = {}
        for label, u in zip(labels, uses):
            for k in self.higher(u):
                if k in seen:
                    raise self.fail(
                        "affinity-violation",
                        rule,
                        f"higher-order variable {self.key_name(k)!r} used in both {seen[k]} and {label}",
                    )
                seen[k] = label

    def sub(self, label: str, t: Term) -> tuple[Type, frozenset]:
        self.path.append(label)
        try:
            return self.infer(t)
        finally:
            self.path.pop()

    def expect_sub(self, rule: str, what: str, got: Type, want: Type, kind: str = "subtype-failure") -> None:
        if not subtype(got, want):
            raise self.fail(kind, rule, f"{what} has type {got}, which is not a subtype of {want}")

    def infer(self, t: Term) -> tuple[Type, frozenset]:
        if isinstance(t, Var):
            level = len(self.env) - 1 - t.index
            if level < 0:
                raise self.fail("unbound-variable", "T-Var", f"dangling index {t.index}")
            return self.env[level][1].type, frozenset((("b", level),))
        if isinstance(t, FVar):
            if t.name not in self.ctx:
                raise self.fail("unbound-variable", "T-Var", f"variable {t.name!r} is not in the context")
            return self.ctx[t.name].type, frozenset((("f", t.name),))
        if isinstance(t, Num):
            return N, frozenset()
        if isinstance(t, Const):
            return (N if t.kind is ConstKind.RAND else _SUCC), frozenset()
        if isinstance(t, Abs):
            level = len(self.env)
            self.env.append((t.name, Binding(t.aspect, t.annot)))
            self.path.append(f"\\{t.name}")
            try:
                body_ty, uses = self.infer(t.body)
            finally:
                self.path.pop()
                self.env.pop()
            return Arrow(t.aspect, t.annot, body_ty), uses - {("b", level)}
        if isinstance(t, App):
            return self.infer_app(t)
        if isinstance(t, Case):
            return self.infer_case(t)
        if isinstance(t, Rec):
            return self.infer_rec(t)
        if isinstance(t, Pair):
            lt, lu = self.sub("pair.1", t.left)
            rt, ru = self.sub("pair.2", t.right)
            for ty, label in ((lt, "first"), (rt, "second")):
                if not is_base_type(ty):
                    raise self.fail("arg-mismatch", "T-Pair", f"{label} component has non-base type {ty}")
            self.disjoint("T-Pair", ["the first component", "the second component"], [lu, ru])
            return Prod(lt, rt), lu | ru
        if isinstance(t, Proj):
            ty, uses = self.sub(f"p{t.index}", t.arg)
            if not isinstance(ty, Prod):
                raise self.fail("arg-mismatch", "T-Proj", f"projection from non-product type {ty}")
            return (ty.left if t.index == 1 else ty.right), uses
        raise TypeError(f"not a term: {t!r}")

    def infer_app(self, t: App) -> tuple[Type, frozenset]:
        fty, fu = self.sub("fun", t.fun)
        aty, au = self.sub("arg", t.arg)
        if not isinstance(fty, Arrow):
            raise self.fail("arg-mismatch", "T-Arr-E", f"applying a term of non-function type {fty}")
        self.expect_sub("T-Arr-E", "the argument", aty, fty.arg, kind="arg-mismatch")
        self.disjoint("T-Arr-E", ["the function", "the argument"], [fu, au])
        for k in au:
            b = self.binding(k)
            if not b.aspect <= fty.aspect:
                raise self.fail(
                    "aspect-violation",
                    "T-Arr-E",
                    f"non-modal variable {self.key_name(k)!r} occurs in the argument of a modal arrow {fty}",
                )
        return fty.res, fu | au

    def infer_case(self, t: Case) -> tuple[Type, frozenset]:
        if not box_free(t.annot):
            raise self.fail("not-box-free", "T-Case", f"case annotation {t.annot} contains a modal arrow")
        sty, su = self.sub("case.scrut", t.scrut)
        if not isinstance(sty, Nat):
            raise self.fail("scrutinee-not-base", "T-Case", f"scrutinee has type {sty}, expected N")
        labels = ["zero", "even", "odd"]
        uses = [su]
        for label, branch in zip(labels, (t.zero, t.even, t.odd)):
            bty, bu = self.sub(f"case.{label}", branch)
            self.expect_sub("T-Case", f"the {label} branch", bty, t.annot)
            uses.append(bu)
        self.disjoint("T-Case", ["the scrutinee"] + [f"the {lb} branch" for lb in labels], uses)
        return t.annot, frozenset().union(*uses)

    def infer_rec(self, t: Rec) -> tuple[Type, frozenset]:
        annot = t.annot
        if not box_free(annot):
            raise self.fail("not-box-free", "T-Rec", f"recursor annotation {annot} contains a modal arrow")
        aty, au = self.sub("rec.arg", t.arg)
        if not isinstance(aty, Nat):
            raise self.fail("scrutinee-not-base", "T-Rec", f"recursion argument has type {aty}, expected N")
        for k in au:
            if self.binding(k).aspect is not MODAL:
                raise self.fail(
                    "rec-context-not-modal",
                    "T-Rec",
                    f"recursion argument uses non-modal variable {self.key_name(k)!r}",
                )
        bty, bu = self.sub("rec.base", t.base)
        self.expect_sub("T-Rec", "the base", bty, annot)
        self.in_step += 1
        try:
            sty, su = self.sub("rec.step", t.step)
        finally:
            self.in_step -= 1
        want = Arrow(MODAL, N, Arrow(NONMODAL, annot, annot))
        if not subtype(sty, want):
            raise self.fail(
                "subtype-failure",
                "T-Rec",
                f"step function has type {sty}, which is not a subtype of {want} (step premise of T-Rec)",
            )
        ho = self.higher(su)
        if ho:
            name = self.key_name(next(iter(ho)))
            raise self.fail(
                "rec-context-not-modal",
                "T-Rec",
                f"step function uses higher-order variable {name!r} (step premise of T-Rec)",
            )
        self.disjoint("T-Rec", ["the recursion argument", "the base"], [au, bu])
        return annot, au | bu | su


def infer(ctx: Context | Mapping, t: Term) -> Type:
    """Least type of ``t`` under ``ctx``; raises ``TypeCheckError``."""
    if not isinstance(ctx, Context):
        ctx = Context(ctx)
    ty, _ = _Checker(ctx).infer(t)
    return ty


def check(ctx: Context | Mapping, t: Term, ty: Type) -> None:
    """Check ``t`` against ``ty`` up to subtyping."""
    got = infer(ctx, t)
    if not subtype(got, ty):
        raise TypeCheckError("subtype-failure", (), "T-Sub", f"term has type {got}, expected {ty}")


def typechecks(t: Term, ctx: Context | Mapping | None = None) -> bool:
    try:
        infer(ctx or EMPTY, t)
    except TypeCheckError:
        return False
    return True


def check_first_order(t: Term) -> int:
    """Check that ``t`` is closed with a type ``a1 N -> ... -> ak N -> N``; return ``k``."""
    if not t.is_closed:
        names = ", ".join(sorted(t.free_names)) or "a dangling index"
        raise TypeCheckError("unbound-variable", (), "first-order", f"term is open ({names})")
    ty = infer(EMPTY, t)
    arity = 0
    cur = ty
    while isinstance(cur, Arrow):
        if not isinstance(cur.arg, Nat):
            raise TypeCheckError("arg-mismatch", (), "first-order", f"type {ty} is not first-order")
        arity += 1
        cur = cur.res
    if not isinstance(cur, Nat):
        raise TypeCheckError("arg-mismatch", (), "first-order", f"type {ty} is not first-order")
    return arity
