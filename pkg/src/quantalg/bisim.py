"""Finite coalgebras of four kinds (Markov process, labelled Markov process,
Mealy machine, Markov decision process), the discounted bisimilarity-metric
operator, certified fixed-point solving, and the term/coalgebra bridge.

Transition targets are states, the termination point `bot` (Markov kinds
only), or `leaf(x)` ground points; the last arise when unfolding terms with
free variables and carry a fixed ground distance instead of an iterated one.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import DivergentGround, DomainError, UnsupportedShape
from .extvalue import INF, ONE, ZERO, ExtValue, ext_max
from .lexing import TokenStream
from .semantics import (BOUNDED, EXTENDED, DistVal, ExcLeaf, Guard, SemValue,
                        VarLeaf, denote_with_plan)
from .spaces import FinDist, FinMetricSpace
from .terms import App, Term, Var, app, conv, raise_, read, write
from .theories import (Monoid, RATIONAL_LINE, RationalLineMonoid, TheoryExpr,
                       layer_plan)

BOT = ("bot",)


def state_target(name: str) -> tuple:
    return ("st", name)


def leaf_target(point: str) -> tuple:
    return ("leaf", point)


def _target_key(t: tuple):
    return (t[0],) + tuple(str(x) for x in t[1:])


class Coalgebra:
    """Finite transition system with a discount factor c in (0,1)."""

    def __init__(self, kind: str, c, states: Sequence[str], trans: dict,
                 actions: Optional[Sequence[str]] = None,
                 inputs: Optional[Sequence[str]] = None,
                 monoid: Optional[Monoid] = None,
                 space: Optional[FinMetricSpace] = None,
                 name: str = "system"):
        if kind not in ("mp", "lmp", "mealy", "mdp"):
            raise DomainError(f"unknown coalgebra kind {kind!r}")
        self.kind = kind
        self.c = Fraction(c)
        if not (0 < self.c < 1):
            raise DomainError("discount factor must be in (0, 1)")
        self.states = tuple(states)
        self.trans = dict(trans)
        self.actions = tuple(actions) if actions is not None else None
        self.inputs = tuple(inputs) if inputs is not None else None
        self.monoid = monoid
        self.space = space
        self.name = name
        self._validate()

    def _validate(self):
        if len(set(self.states)) != len(self.states) or not self.states:
            raise DomainError("states must be nonempty and distinct")
        if self.kind == "mp":
            keys = list(self.states)
        elif self.kind in ("lmp", "mdp"):
            if not self.actions:
                raise DomainError(f"{self.kind} needs a nonempty action set")
            keys = [(s, a) for s in self.states for a in self.actions]
        else:
            if not self.inputs or self.monoid is None:
                raise DomainError("mealy needs inputs and an output monoid")
            keys = [(s, i) for s in self.states for i in self.inputs]
        for k in keys:
            if k not in self.trans:
                raise DomainError(f"missing transition row for {k!r}")
        for k, row in self.trans.items():
            if k not in keys:
                raise DomainError(f"transition row for unknown key {k!r}")
            if self.kind == "mealy":
                target, alpha = row
                self._check_target(target)
                if not self.monoid.contains(alpha):
                    raise DomainError(f"output {alpha!r} outside the monoid")
            else:
                if row.mass != 1:
                    raise DomainError(f"row {k!r} has mass {row.mass}, expected 1")
                for key, _ in row.items:
                    if self.kind == "mdp":
                        target, reward = key
                        if not isinstance(reward, Fraction):
                            raise DomainError("mdp rewards must be exact rationals")
                    else:
                        target = key
                    self._check_target(target)

    def _check_target(self, target):
        tag = target[0]
        if tag == "st":
            if target[1] not in self.states:
                raise DomainError(f"transition to unknown state {target[1]!r}")
        elif tag == "bot":
            if self.kind in ("mealy", "mdp"):
                raise DomainError(f"{self.kind} transitions cannot use bot")
        elif tag == "leaf":
            if self.space is not None and target[1] not in self.space.points:
                raise DomainError(f"leaf point {target[1]!r} outside the space")
        else:
            raise DomainError(f"unknown target {target!r}")


class PseudoMetric:
    """Symmetric state-pair table with zero diagonal."""

    def __init__(self, states: Sequence[str],
                 table: Optional[Dict[Tuple[str, str], ExtValue]] = None):
        self.states = tuple(states)
        self._index = {s: k for k, s in enumerate(self.states)}
        self._t: Dict[Tuple[str, str], ExtValue] = {}
        for i, u in enumerate(self.states):
            for v in self.states[i + 1:]:
                self._t[(u, v)] = ZERO
        if table:
            for (u, v), val in table.items():
                self._t[self._key(u, v)] = val

    def _key(self, u: str, v: str) -> Tuple[str, str]:
        if u not in self._index or v not in self._index:
            raise DomainError(f"pair ({u}, {v}) outside the state set")
        return (u, v) if self._index[u] <= self._index[v] else (v, u)

    def d(self, u: str, v: str) -> ExtValue:
        if u == v:
            return ZERO
        return self._t[self._key(u, v)]

    def pairs(self):
        return sorted(self._t.items())

    def sup_diff(self, other: "PseudoMetric") -> ExtValue:
        worst = ZERO
        for k, val in self._t.items():
            o = other._t[k]
            if val.is_inf or o.is_inf:
                if val != o:
                    return INF
                continue
            gap = ExtValue(abs(val.rational - o.rational))
            if gap > worst:
                worst = gap
        return worst

    def __eq__(self, other):
        return isinstance(other, PseudoMetric) and self.states == other.states \
            and self._t == other._t

    def __hash__(self):
        raise TypeError("PseudoMetric is not hashable")


def zero_metric(states: Sequence[str]) -> PseudoMetric:
    return PseudoMetric(states)


# ---------------------------------------------------------------------------
# The one-step operator

def _target_dist(C: Coalgebra, d: PseudoMetric, mode: str, t1, t2) -> ExtValue:
    """Ground distance between transition targets: c-scaled iterate between
    states, fixed space distance between leaves, coproduct rule across kinds."""
    cap = (lambda x: x.truncated(ONE)) if mode == BOUNDED else (lambda x: x)
    if t1[0] == "st" and t2[0] == "st":
        return d.d(t1[1], t2[1]).scaled(C.c)
    if t1[0] == "bot" and t2[0] == "bot":
        return ZERO
    if t1[0] == "leaf" and t2[0] == "leaf":
        if t1[1] == t2[1]:
            return ZERO
        if C.space is None:
            raise DomainError("leaf targets need a ground space")
        return cap(C.space.d(t1[1], t2[1]))
    return cap(INF)


def psi_step(C: Coalgebra, d: PseudoMetric, mode: str = BOUNDED) -> PseudoMetric:
    """One application of the kind-appropriate bisimilarity-metric operator."""
    from .spaces import kantorovich_general

    cap = (lambda x: x.truncated(ONE)) if mode == BOUNDED else (lambda x: x)
    table: Dict[Tuple[str, str], ExtValue] = {}

    def dist_ground(k1, k2) -> ExtValue:
        if C.kind == "mdp":
            (t1, r1), (t2, r2) = k1, k2
            raw = ExtValue(abs(r1 - r2)) + _target_dist(C, d, mode, t1, t2)
            return cap(raw)
        return cap(_target_dist(C, d, mode, k1, k2))

    for i, u in enumerate(C.states):
        for v in C.states[i + 1:]:
            if C.kind == "mp":
                val = kantorovich_general(C.trans[u], C.trans[v], dist_ground)
            elif C.kind in ("lmp", "mdp"):
                val = ext_max(*(
                    kantorovich_general(C.trans[(u, a)], C.trans[(v, a)], dist_ground)
                    for a in C.actions))
            else:  # mealy
                parts = []
                for inp in C.inputs:
                    tu, au = C.trans[(u, inp)]
                    tv, av = C.trans[(v, inp)]
                    parts.append(C.monoid.dist(au, av)
                                 + _target_dist(C, d, mode, tu, tv))
                val = ext_max(*parts)
            table[(u, v)] = val
    return PseudoMetric(C.states, table)


@dataclass
class Certificate:
    """Machine-readable convergence evidence for the fixed-point solver."""

    iterations: int
    c: Fraction
    mode: str
    tol: Fraction
    initial_gap: ExtValue
    a_priori_bound: ExtValue
    residual: ExtValue
    exact: bool

    def as_record(self) -> dict:
        return {
            "iterations": self.iterations,
            "c": str(self.c),
            "mode": self.mode,
            "tol": str(self.tol),
            "initial_gap": str(self.initial_gap),
            "a_priori_bound": str(self.a_priori_bound),
            "residual": str(self.residual),
            "exact": self.exact,
        }


def solve_bisim(C: Coalgebra, tol, mode: str = BOUNDED
                ) -> Tuple[PseudoMetric, Certificate]:
    """Iterate Psi from the zero metric until the a-priori Banach bound
    c^k/(1-c) * ||Psi(0)|| drops below tol, or the iterate is an exact fixed
    point.  The returned metric d_k satisfies ||d_k - d*|| <= tol.
    """
    tol = Fraction(tol)
    if tol <= 0:
        raise DomainError("tol must be positive")
    d0 = zero_metric(C.states)
    d1 = psi_step(C, d0, mode)
    gap = d1.sup_diff(d0)
    if mode == EXTENDED and gap.is_inf:
        bad = next(k for k, v in d1.pairs() if v.is_inf)
        raise DivergentGround(
            f"extended-mode ground distance is infinite on pair {bad}")
    if d1 == d0:
        cert = Certificate(1, C.c, mode, tol, gap, ZERO, ZERO, True)
        return d0, cert
    shrink = C.c / (1 - C.c)
    k = 1
    d = d1
    bound = gap.scaled(shrink)
    exact = False
    while bound > ExtValue(tol):
        d_next = psi_step(C, d, mode)
        k += 1
        if d_next == d:
            d = d_next
            bound = ZERO
            exact = True
            break
        d = d_next
        bound = bound.scaled(C.c)
    if exact:
        residual = ZERO
    else:
        residual = psi_step(C, d, mode).sup_diff(d)
        if residual == ZERO:
            exact = True
    return d, Certificate(k, C.c, mode, tol, gap, bound, residual, exact)


# ---------------------------------------------------------------------------
# Terms to coalgebras

def _plan_kind(plan) -> str:
    shapes = tuple(layer[0] for layer in plan.layers)
    if len(plan.guards) != 1:
        raise UnsupportedShape("unfolding needs exactly one contractive operator")
    exc = plan.exc_space
    if exc is not None and tuple(exc.points) != ("*",):
        raise UnsupportedShape("unfolding supports only the one-point exception space")
    if shapes == ("dist",):
        return "mp"
    if shapes == ("func", "dist"):
        return "lmp"
    if shapes == ("func", "pair"):
        if exc is not None:
            raise UnsupportedShape("mealy unfolding cannot carry exceptions")
        return "mealy"
    if shapes == ("func", "dist", "pair"):
        if exc is not None:
            raise UnsupportedShape("mdp unfolding cannot carry exceptions")
        if not isinstance(plan.layers[2][1], RationalLineMonoid):
            raise UnsupportedShape("mdp unfolding needs rational rewards")
        return "mdp"
    raise UnsupportedShape(
        f"no coalgebra kind for layer shape {'/'.join(shapes) or 'leaf'}")


def unfold_term(t: Term, th: TheoryExpr,
                space: Optional[FinMetricSpace] = None,
                name: str = "unfolded") -> Tuple[Coalgebra, str]:
    """Guard-closure of the term's denotation as a finite coalgebra.

    Each guard's inner value becomes a state; the result is acyclic by
    construction.  Returns the coalgebra and the root state.
    """
    plan = layer_plan(th)
    kind = _plan_kind(plan)
    root = denote_with_plan(t, plan)

    names: Dict[SemValue, str] = {}
    order: List[SemValue] = []

    def visit(value: SemValue) -> str:
        if value in names:
            return names[value]
        names[value] = f"s{len(order)}"
        order.append(value)
        return names[value]

    visit(root)
    trans: dict = {}
    i = 0
    while i < len(order):
        value = order[i]
        state = names[value]
        i += 1
        if kind == "mp":
            trans[state] = _dist_row(value, visit)
        elif kind == "lmp":
            for inp, inner in value.items:
                trans[(state, inp)] = _dist_row(inner, visit)
        elif kind == "mealy":
            for inp, pair in value.items:
                trans[(state, inp)] = (_leaf_or_state(pair.inner, visit), pair.alpha)
        else:  # mdp
            for inp, inner in value.items:
                trans[(state, inp)] = FinDist.from_pairs(
                    (((_leaf_or_state(p.inner, visit), p.alpha), w)
                     for p, w in inner.items),
                    key=lambda k: (_target_key(k[0]), k[1]))
    states = [names[v] for v in order]
    kwargs = {}
    if kind in ("lmp", "mdp"):
        kwargs["actions"] = next(l[1] for l in plan.layers if l[0] == "func")
    if kind == "mealy":
        kwargs["inputs"] = plan.layers[0][1]
        kwargs["monoid"] = plan.layers[1][1]
    C = Coalgebra(kind, plan.guards[0].c, states, trans, space=space,
                  name=name, **kwargs)
    return C, names[root]


def _leaf_or_state(inner: SemValue, visit) -> tuple:
    if isinstance(inner, Guard):
        return state_target(visit(inner.inner))
    if isinstance(inner, VarLeaf):
        return leaf_target(inner.name)
    if isinstance(inner, ExcLeaf):
        return BOT
    raise DomainError(f"unexpected value under a guard position: {inner!r}")


def _dist_row(value: DistVal, visit) -> FinDist:
    if not isinstance(value, DistVal):
        raise DomainError("expected a distribution value")
    return FinDist.from_pairs(
        ((_leaf_or_state(v, visit), w) for v, w in value.items),
        key=_target_key)


def disjoint_union(A: Coalgebra, B: Coalgebra,
                   tags: Tuple[str, str] = ("a", "b")) -> Coalgebra:
    """Tag and merge two systems of the same kind and discount factor."""
    if (A.kind, A.c, A.actions, A.inputs, A.monoid) != \
       (B.kind, B.c, B.actions, B.inputs, B.monoid):
        raise DomainError("cannot union systems of different shapes")

    def rename(tag, target):
        return state_target(f"{tag}.{target[1]}") if target[0] == "st" else target

    def rename_row(tag, kind, row):
        if kind == "mealy":
            return (rename(tag, row[0]), row[1])
        if kind == "mdp":
            return FinDist.from_pairs(
                (((rename(tag, t), r), w) for (t, r), w in row.items),
                key=lambda k: (_target_key(k[0]), k[1]))
        return FinDist.from_pairs(((rename(tag, t), w) for t, w in row.items),
                                  key=_target_key)

    states = [f"{tags[0]}.{s}" for s in A.states] + [f"{tags[1]}.{s}" for s in B.states]
    trans = {}
    for side, tag in ((A, tags[0]), (B, tags[1])):
        for k, row in side.trans.items():
            if side.kind == "mp":
                trans[f"{tag}.{k}"] = rename_row(tag, side.kind, row)
            else:
                trans[(f"{tag}.{k[0]}", k[1])] = rename_row(tag, side.kind, row)
    space = A.space or B.space
    return Coalgebra(A.kind, A.c, states, trans, actions=A.actions,
                     inputs=A.inputs, monoid=A.monoid, space=space,
                     name=f"{A.name}+{B.name}")


# ---------------------------------------------------------------------------
# Coalgebras back to terms

CUT_VARIABLE = "_cut"


def approx_term(C: Coalgebra, state: str, depth: int) -> Term:
    """Depth-k unfolding of a (possibly cyclic) state into a term; deeper
    behaviour is cut to raise(*) for the Markov kinds and to a designated
    cut variable for Mealy machines and MDPs."""
    if depth < 0:
        raise DomainError("depth must be nonnegative")
    if state not in C.states:
        raise DomainError(f"unknown state {state!r}")
    step = _step_op(C)

    def cut() -> Term:
        return app(raise_("*")) if C.kind in ("mp", "lmp") else Var(CUT_VARIABLE)

    def target_term(target, k: int) -> Term:
        if target[0] == "st":
            return App(step, (go(target[1], k - 1),))
        if target[0] == "bot":
            return app(raise_("*"))
        return Var(target[1])

    def dist_term(row: FinDist, k: int, wrap=None) -> Term:
        items = list(row.items)
        terms = []
        for key, w in items:
            if C.kind == "mdp":
                target, reward = key
                leaf = App(write(reward), (target_term(target, k),))
            else:
                leaf = target_term(key, k)
            terms.append((leaf, w))
        return _convex_chain(terms)

    def go(s: str, k: int) -> Term:
        if k == 0:
            return cut()
        if C.kind == "mp":
            return dist_term(C.trans[s], k)
        if C.kind == "lmp":
            rows = [dist_term(C.trans[(s, a)], k) for a in C.actions]
            return App(read(len(C.actions)), tuple(rows))
        if C.kind == "mealy":
            rows = []
            for inp in C.inputs:
                target, alpha = C.trans[(s, inp)]
                rows.append(App(write(alpha), (target_term(target, k),)))
            return App(read(len(C.inputs)), tuple(rows))
        rows = [dist_term(C.trans[(s, a)], k) for a in C.actions]
        return App(read(len(C.actions)), tuple(rows))

    return go(state, depth)


def _step_op(C: Coalgebra):
    from .terms import next_op

    return next_op("next", C.c)


def _convex_chain(items: List[Tuple[Term, Fraction]]) -> Term:
    if len(items) == 1:
        return items[0][0]
    (t0, w0) = items[0]
    rest = [(t, w / (1 - w0)) for t, w in items[1:]]
    return App(conv(w0), (t0, _convex_chain(rest)))


# ---------------------------------------------------------------------------
# Text format

def parse_coalgebras(text: str, monoids: Optional[Dict[str, Monoid]] = None,
                     space: Optional[FinMetricSpace] = None,
                     source: str = "<coalgebra>") -> Dict[str, Coalgebra]:
    """Parse mp/lmp/mealy/mdp blocks; returns name -> coalgebra."""
    ts = TokenStream(text, source)
    out: Dict[str, Coalgebra] = {}
    while not ts.at(""):
        kind_tok = ts.expect_ident()
        kind = kind_tok.text
        if kind not in ("mp", "lmp", "mealy", "mdp"):
            raise ts.error(f"expected mp/lmp/mealy/mdp, found {kind!r}", kind_tok)
        name = ts.expect_ident().text
        ts.expect("{")
        ts.expect("c")
        ts.expect("=")
        c = ts.expect_rational()
        ts.expect(";")
        actions = inputs = None
        monoid = None
        if kind in ("lmp", "mdp"):
            ts.expect("actions")
            ts.expect(":")
            actions = [ts.expect_ident().text]
            while ts.accept(","):
                actions.append(ts.expect_ident().text)
            ts.expect(";")
        if kind == "mealy":
            ts.expect("inputs")
            ts.expect(":")
            inputs = [ts.expect_ident().text]
            while ts.accept(","):
                inputs.append(ts.expect_ident().text)
            ts.expect(";")
            if ts.accept("monoid"):
                ts.expect(":")
                ref = ts.expect_ident().text
                if not monoids or ref not in monoids:
                    raise ts.error(f"unknown monoid {ref!r}")
                monoid = monoids[ref]
                ts.expect(";")
            else:
                monoid = RATIONAL_LINE
        states: List[str] = []
        trans: dict = {}
        while not ts.accept("}"):
            ts.expect("state")
            s = ts.expect_ident().text
            if s not in states:
                states.append(s)
            if kind == "mp":
                ts.expect(":")
                trans[s] = _parse_dist_row(ts, kind)
            elif kind in ("lmp", "mdp"):
                ts.expect("on")
                a = ts.expect_ident().text
                ts.expect(":")
                trans[(s, a)] = _parse_dist_row(ts, kind)
            else:
                ts.expect("on")
                inp = ts.expect_ident().text
                ts.expect("->")
                ts.expect("(")
                target = _parse_target(ts)
                ts.expect(",")
                alpha = _parse_output(ts, monoid)
                ts.expect(")")
                ts.expect(";")
                trans[(s, inp)] = (target, alpha)
        try:
            out[name] = Coalgebra(kind, c, states, trans, actions=actions,
                                  inputs=inputs, monoid=monoid, space=space,
                                  name=name)
        except DomainError as exc:
            raise DomainError(f"{source}: system {name}: {exc}") from None
    return out


def _parse_target(ts: TokenStream) -> tuple:
    tok = ts.next()
    if tok.text == "bot":
        return BOT
    if tok.text == "leaf":
        ts.expect("(")
        point = ts.next()
        if point.kind not in ("ident", "num") and point.text != "*":
            raise ts.error(f"expected a leaf point, found {point.text!r}", point)
        ts.expect(")")
        return leaf_target(point.text)
    if tok.kind != "ident":
        raise ts.error(f"expected a target, found {tok.text!r}", tok)
    return state_target(tok.text)


def _parse_output(ts: TokenStream, monoid):
    tok = ts.next()
    if tok.kind == "num":
        return Fraction(tok.text)
    if tok.kind == "ident":
        return tok.text
    raise ts.error(f"expected a monoid element, found {tok.text!r}", tok)


def _parse_dist_row(ts: TokenStream, kind: str) -> FinDist:
    pairs = []
    while True:
        w = ts.expect_rational()
        ts.expect("->")
        if kind == "mdp":
            ts.expect("(")
            target = _parse_target(ts)
            ts.expect(",")
            reward = ts.expect_rational()
            ts.expect(")")
            pairs.append(((target, reward), w))
        else:
            pairs.append((_parse_target(ts), w))
        if not ts.accept(","):
            break
    ts.expect(";")
    if kind == "mdp":
        return FinDist.from_pairs(pairs, key=lambda k: (_target_key(k[0]), k[1]))
    return FinDist.from_pairs(pairs, key=_target_key)


def format_coalgebra(C: Coalgebra, monoid_name: Optional[str] = None) -> str:
    """Render a coalgebra in the text format parse_coalgebras accepts.

    Mealy systems over a table monoid need `monoid_name`, the name the
    reader will resolve through its monoid file."""
    lines = [f"{C.kind} {C.name} {{", f"  c = {C.c};"]
    if C.kind in ("lmp", "mdp"):
        lines.append("  actions: " + ", ".join(C.actions) + ";")
    if C.kind == "mealy":
        lines.append("  inputs: " + ", ".join(C.inputs) + ";")
        if not isinstance(C.monoid, RationalLineMonoid):
            if monoid_name is None:
                raise DomainError(
                    "a table-monoid mealy system needs a monoid name to serialize")
            lines.append(f"  monoid: {monoid_name};")

    def target_text(t):
        if t[0] == "st":
            return t[1]
        if t[0] == "bot":
            return "bot"
        return f"leaf({t[1]})"

    for s in C.states:
        if C.kind == "mp":
            row = C.trans[s]
            cells = ", ".join(f"{w} -> {target_text(t)}" for t, w in row.items)
            lines.append(f"  state {s}: {cells};")
        elif C.kind in ("lmp", "mdp"):
            for a in C.actions:
                row = C.trans[(s, a)]
                if C.kind == "mdp":
                    cells = ", ".join(
                        f"{w} -> ({target_text(t)}, {r})" for (t, r), w in row.items)
                else:
                    cells = ", ".join(
                        f"{w} -> {target_text(t)}" for t, w in row.items)
                lines.append(f"  state {s} on {a}: {cells};")
        else:
            for inp in C.inputs:
                target, alpha = C.trans[(s, inp)]
                lines.append(f"  state {s} on {inp} -> ({target_text(target)}, {alpha});")
    lines.append("}")
    return "\n".join(lines) + "\n"
