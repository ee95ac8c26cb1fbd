"""Denotation of terms in the concrete free-monad description given by a
layer plan, canonical normal forms, and the induced distance on terms.

A value is a nested structure of distribution / set / function / pair
layers over three leaf kinds: variables, exception points, and guard nodes
(one recursive step of a contractive operator).  Distances are computed
layer by layer: Kantorovich for distributions, Hausdorff for sets, supremum
over inputs for functions, monoid distance plus inner distance for pairs,
c times the inner distance for guards, and the coproduct rule across leaf
kinds (infinite in extended mode, truncated to 1 in bounded mode).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

from .errors import DomainError
from .extvalue import INF, ONE, ZERO, ExtValue, ext_max
from .spaces import FinDist, FinMetricSpace, hausdorff_general, kantorovich_general
from .terms import Term, Var
from .theories import LayerPlan, TheoryExpr, layer_plan

EXTENDED = "extended"
BOUNDED = "bounded"


class SemValue:
    __slots__ = ()


@dataclass(frozen=True)
class VarLeaf(SemValue):
    name: str


@dataclass(frozen=True)
class ExcLeaf(SemValue):
    label: str


@dataclass(frozen=True)
class Guard(SemValue):
    name: str
    c: Fraction
    inner: SemValue


@dataclass(frozen=True)
class DistVal(SemValue):
    items: Tuple[Tuple[SemValue, Fraction], ...]  # canonical order, weights > 0


@dataclass(frozen=True)
class SetVal(SemValue):
    items: Tuple[SemValue, ...]  # canonical order, duplicate-free


@dataclass(frozen=True)
class FuncVal(SemValue):
    items: Tuple[Tuple[str, SemValue], ...]  # total on the input set, in order


@dataclass(frozen=True)
class PairVal(SemValue):
    alpha: object
    inner: SemValue


def canon_key(v: SemValue):
    """Total order on values: leaves, then guards, then composites."""
    if isinstance(v, VarLeaf):
        return (0, v.name)
    if isinstance(v, ExcLeaf):
        return (1, v.label)
    if isinstance(v, Guard):
        return (2, v.name, v.c, canon_key(v.inner))
    if isinstance(v, DistVal):
        return (3, tuple((canon_key(x), w) for x, w in v.items))
    if isinstance(v, SetVal):
        return (4, tuple(canon_key(x) for x in v.items))
    if isinstance(v, FuncVal):
        return (5, tuple((i, canon_key(x)) for i, x in v.items))
    if isinstance(v, PairVal):
        return (6, _alpha_key(v.alpha), canon_key(v.inner))
    raise TypeError(f"not a SemValue: {v!r}")


def _alpha_key(alpha):
    return (0, alpha) if isinstance(alpha, Fraction) else (1, str(alpha))


def make_dist(pairs) -> DistVal:
    """Merge duplicate support elements, drop zero weights, sort canonically."""
    acc: Dict[SemValue, Fraction] = {}
    for v, w in pairs:
        if w == 0:
            continue
        if w < 0:
            raise DomainError("negative weight")
        acc[v] = acc.get(v, Fraction(0)) + w
    if not acc:
        raise DomainError("empty distribution value")
    items = tuple(sorted(acc.items(), key=lambda kv: canon_key(kv[0])))
    if sum(w for _, w in items) != 1:
        raise DomainError("distribution weights must sum to 1")
    return DistVal(items)


def make_set(values) -> SetVal:
    seen = []
    for v in values:
        if v not in seen:
            seen.append(v)
    return SetVal(tuple(sorted(seen, key=canon_key)))


def make_func(inputs, mapping: Dict[str, SemValue]) -> FuncVal:
    return FuncVal(tuple((i, mapping[i]) for i in inputs))


# ---------------------------------------------------------------------------
# Denotation

def denote(t: Term, th: TheoryExpr) -> SemValue:
    plan = layer_plan(th)
    return denote_with_plan(t, plan)


def denote_with_plan(t: Term, plan: LayerPlan) -> SemValue:
    if isinstance(t, Var):
        return _eta(plan.layers, VarLeaf(t.name))
    args = [denote_with_plan(a, plan) for a in t.args]
    return apply_operation(plan, t.op, args)


def apply_operation(plan: LayerPlan, op, args) -> SemValue:
    """The free algebra's interpretation of one operation on values."""
    if op.kind == "raise":
        return _eta(plan.layers, ExcLeaf(op.param))
    if op.kind == "next":
        g = plan.guard(op.param[0])
        return _eta(plan.layers, Guard(g.name, g.c, args[0]))
    target = {"conv": "dist", "union": "set", "empty": "set",
              "read": "func", "write": "pair"}.get(op.kind)
    if target is None:
        raise DomainError(f"cannot denote operation {op}")
    return _apply(plan.layers, target, op, list(args))


def _eta(layers, leaf: SemValue) -> SemValue:
    v = leaf
    for layer in reversed(layers):
        kind = layer[0]
        if kind == "dist":
            v = DistVal(((v, Fraction(1)),))
        elif kind == "set":
            v = SetVal((v,))
        elif kind == "func":
            v = FuncVal(tuple((i, v) for i in layer[1]))
        elif kind == "pair":
            v = PairVal(layer[1].unit, v)
    return v


def _apply(layers, target: str, op, args) -> SemValue:
    """Apply op at its home layer, acting pointwise through outer layers."""
    if not layers:
        raise DomainError(f"operation {op} has no {target} layer to act on")
    layer = layers[0]
    kind = layer[0]
    if kind == target:
        return _apply_here(layer, op, args, layers[1:])
    if kind == "func":
        inputs = layer[1]
        for a in args:
            if not isinstance(a, FuncVal) or tuple(i for i, _ in a.items) != inputs:
                raise DomainError("value does not match the function layer")
        return FuncVal(tuple(
            (i, _apply(layers[1:], target, op, [dict(a.items)[i] for a in args]))
            for i in inputs))
    if kind == "dist":
        (arg,) = args  # only unary operations live under a distribution layer
        if not isinstance(arg, DistVal):
            raise DomainError("value does not match the distribution layer")
        return make_dist(
            (_apply(layers[1:], target, op, [v]), w) for v, w in arg.items)
    if kind == "set":
        (arg,) = args
        if not isinstance(arg, SetVal):
            raise DomainError("value does not match the set layer")
        return make_set(_apply(layers[1:], target, op, [v]) for v in arg.items)
    raise DomainError(f"operation {op} cannot act through a {kind} layer")


def _apply_here(layer, op, args, inner_layers) -> SemValue:
    if op.kind == "conv":
        e = op.param
        a, b = args
        if not isinstance(a, DistVal) or not isinstance(b, DistVal):
            raise DomainError("conv applied to non-distribution values")
        return make_dist(
            [(v, w * e) for v, w in a.items] + [(v, w * (1 - e)) for v, w in b.items])
    if op.kind == "union":
        a, b = args
        if not isinstance(a, SetVal) or not isinstance(b, SetVal):
            raise DomainError("union applied to non-set values")
        return make_set(a.items + b.items)
    if op.kind == "empty":
        return SetVal(())
    if op.kind == "read":
        inputs = layer[1]
        if op.param != len(inputs):
            raise DomainError(
                f"rd of arity {op.param} against {len(inputs)} inputs")
        out = []
        for k, i in enumerate(inputs):
            a = args[k]
            if not isinstance(a, FuncVal):
                raise DomainError("rd applied to non-function values")
            out.append((i, dict(a.items)[i]))
        return FuncVal(tuple(out))
    if op.kind == "write":
        mon = layer[1]
        if not mon.contains(op.param):
            raise DomainError(f"monoid element {op.param!r} outside the writer monoid")
        (a,) = args
        if not isinstance(a, PairVal):
            raise DomainError("wr applied to a non-pair value")
        return PairVal(mon.mult(op.param, a.alpha), a.inner)
    raise DomainError(f"cannot apply {op}")


# ---------------------------------------------------------------------------
# Distances

def sem_dist(v: SemValue, w: SemValue, space: Optional[FinMetricSpace] = None,
             mode: str = EXTENDED, exc_space: Optional[FinMetricSpace] = None,
             pair_monoid=None, _memo: Optional[dict] = None) -> ExtValue:
    """Distance between two values of the same layer plan.

    Free variables are interpreted in `space`; exception labels in
    `exc_space`; pair components over a table monoid need `pair_monoid`.
    Bounded mode truncates ground distances at 1 (leaves and the ground fed
    to each distribution/set layer), matching the supremum over nonexpansive
    1-bounded dual functions.
    """
    if mode not in (EXTENDED, BOUNDED):
        raise DomainError(f"unknown mode {mode!r}")
    memo = _memo if _memo is not None else {}

    def leaf_cap(d: ExtValue) -> ExtValue:
        return d.truncated(ONE) if mode == BOUNDED else d

    def mismatch() -> ExtValue:
        return ONE if mode == BOUNDED else INF

    def rec(a: SemValue, b: SemValue) -> ExtValue:
        if a == b:
            return ZERO
        hit = memo.get((a, b))
        if hit is not None:
            return hit
        out = _dist(a, b)
        memo[(a, b)] = out
        memo[(b, a)] = out
        return out

    def _dist(a: SemValue, b: SemValue) -> ExtValue:
        leafish = (VarLeaf, ExcLeaf, Guard)
        if isinstance(a, leafish) and isinstance(b, leafish):
            if isinstance(a, VarLeaf) and isinstance(b, VarLeaf):
                if space is None:
                    raise DomainError(
                        f"variables {a.name}, {b.name} need a ground space")
                return leaf_cap(space.d(a.name, b.name))
            if isinstance(a, ExcLeaf) and isinstance(b, ExcLeaf):
                if exc_space is None:
                    return mismatch()  # distinct labels, no metric given
                return leaf_cap(exc_space.d(a.label, b.label))
            if isinstance(a, Guard) and isinstance(b, Guard) and a.name == b.name:
                return rec(a.inner, b.inner).scaled(a.c)
            return mismatch()
        if isinstance(a, DistVal) and isinstance(b, DistVal):
            ground = rec
            if mode == BOUNDED:
                ground = lambda x, y: rec(x, y).truncated(ONE)
            return kantorovich_general(
                FinDist(a.items), FinDist(b.items), ground)
        if isinstance(a, SetVal) and isinstance(b, SetVal):
            ground = rec
            if mode == BOUNDED:
                ground = lambda x, y: rec(x, y).truncated(ONE)
            return hausdorff_general(a.items, b.items, ground)
        if isinstance(a, FuncVal) and isinstance(b, FuncVal):
            da, db = dict(a.items), dict(b.items)
            if set(da) != set(db):
                raise DomainError("function values over different input sets")
            return ext_max(*(rec(da[i], db[i]) for i in da))
        if isinstance(a, PairVal) and isinstance(b, PairVal):
            return _alpha_dist(a.alpha, b.alpha) + rec(a.inner, b.inner)
        raise DomainError(
            f"shape mismatch: {type(a).__name__} vs {type(b).__name__}")

    def _alpha_dist(x, y) -> ExtValue:
        if isinstance(x, Fraction) and isinstance(y, Fraction):
            return ExtValue(abs(x - y))
        if pair_monoid is None:
            raise DomainError("table-monoid pair values need the plan's monoid")
        return pair_monoid.dist(x, y)

    return rec(v, w)


def term_dist(t: Term, s: Term, th: TheoryExpr,
              space: Optional[FinMetricSpace] = None,
              mode: str = EXTENDED) -> ExtValue:
    """The free-monad distance between two terms: sem_dist of denotations."""
    plan = layer_plan(th)
    v = denote_with_plan(t, plan)
    w = denote_with_plan(s, plan)
    return sem_dist_with_plan(v, w, plan, space, mode)


def sem_dist_with_plan(v: SemValue, w: SemValue, plan: LayerPlan,
                       space: Optional[FinMetricSpace] = None,
                       mode: str = EXTENDED,
                       memo: Optional[dict] = None) -> ExtValue:
    mon = None
    for layer in plan.layers:
        if layer[0] == "pair":
            mon = layer[1]
    return sem_dist(v, w, space, mode, plan.exc_space,
                    pair_monoid=mon, _memo=memo)


# ---------------------------------------------------------------------------
# Rendering

def format_value(v: SemValue) -> str:
    if isinstance(v, VarLeaf):
        return v.name
    if isinstance(v, ExcLeaf):
        return v.label
    if isinstance(v, Guard):
        return f"Guard({format_value(v.inner)})"
    if isinstance(v, DistVal):
        inner = ", ".join(f"{format_value(x)}: {w}" for x, w in v.items)
        return "Dist{" + inner + "}"
    if isinstance(v, SetVal):
        return "Set{" + ", ".join(format_value(x) for x in v.items) + "}"
    if isinstance(v, FuncVal):
        inner = ", ".join(f"{i} -> {format_value(x)}" for i, x in v.items)
        return "Func{" + inner + "}"
    if isinstance(v, PairVal):
        return f"Pair({v.alpha}, {format_value(v.inner)})"
    raise TypeError(f"not a SemValue: {v!r}")
