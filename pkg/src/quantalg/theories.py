"""Theory expressions, generated signatures, axiom instantiation, and the
layered normal-form plan that drives the semantics.

A theory expression combines atoms (barycentric, semilattice, exceptions,
reader, writer, contractive step) with Sum and Tensor.  Sum is plain union
of disjoint signatures and axioms; Tensor additionally makes every pair of
cross-side operations commute.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .errors import DomainError, UnsupportedShape
from .extvalue import INF, ZERO, ExtValue
from .lexing import TokenStream
from .spaces import FinMetricSpace, discrete
from .terms import (App, MonoidElement, OpSym, Term, Var, app, conv, empty_op,
                    next_op, raise_, read, union_op, write)


# ---------------------------------------------------------------------------
# Monoids

class RationalLineMonoid:
    """(Q, +, 0) with metric |x - y|; nonexpansiveness of + is standard."""

    unit: Fraction = Fraction(0)
    elements = None  # infinite carrier

    def mult(self, a: Fraction, b: Fraction) -> Fraction:
        return a + b

    def dist(self, a: Fraction, b: Fraction) -> ExtValue:
        return ExtValue(abs(a - b))

    def contains(self, a) -> bool:
        return isinstance(a, Fraction)

    def __eq__(self, other):
        return isinstance(other, RationalLineMonoid)

    def __hash__(self):
        return hash("RationalLineMonoid")

    def __repr__(self):
        return "RationalLineMonoid()"


class TableMonoid:
    """Finite monoid over a metric space; laws are checked exhaustively."""

    def __init__(self, space: FinMetricSpace, unit: str,
                 table: Dict[Tuple[str, str], str]):
        self.space = space
        self.unit = unit
        self.table = dict(table)
        self.elements = space.points
        self._check()

    def _check(self):
        els = self.elements
        if self.unit not in els:
            raise DomainError("monoid unit outside the carrier")
        for a in els:
            for b in els:
                if (a, b) not in self.table or self.table[(a, b)] not in els:
                    raise DomainError(f"monoid multiplication missing or escapes at ({a}, {b})")
        for a in els:
            if self.table[(self.unit, a)] != a or self.table[(a, self.unit)] != a:
                raise DomainError(f"unit law fails at {a}")
        for a in els:
            for b in els:
                for c in els:
                    if self.table[(self.table[(a, b)], c)] != self.table[(a, self.table[(b, c)])]:
                        raise DomainError(f"associativity fails at ({a}, {b}, {c})")
        d = self.space.d
        for a in els:
            for a2 in els:
                for b in els:
                    for b2 in els:
                        if d(self.mult(a, b), self.mult(a2, b2)) > d(a, a2) + d(b, b2):
                            raise DomainError(
                                f"monoid multiplication is expansive at ({a},{b}) vs ({a2},{b2})"
                            )

    def mult(self, a: str, b: str) -> str:
        return self.table[(a, b)]

    def dist(self, a: str, b: str) -> ExtValue:
        return self.space.d(a, b)

    def contains(self, a) -> bool:
        return a in self.elements

    def __eq__(self, other):
        return (isinstance(other, TableMonoid) and self.elements == other.elements
                and self.unit == other.unit and self.table == other.table)

    def __hash__(self):
        return hash((self.elements, self.unit, tuple(sorted(self.table.items()))))


Monoid = Union[RationalLineMonoid, TableMonoid]

RATIONAL_LINE = RationalLineMonoid()


# ---------------------------------------------------------------------------
# Theory expressions

class TheoryExpr:
    __slots__ = ()


@dataclass(frozen=True)
class Bary(TheoryExpr):
    pass


@dataclass(frozen=True)
class Semi(TheoryExpr):
    pass


@dataclass(frozen=True)
class Exc(TheoryExpr):
    space: FinMetricSpace

    def __hash__(self):
        return hash(("exc", self.space.points))


@dataclass(frozen=True)
class Reader(TheoryExpr):
    inputs: Tuple[str, ...]

    def __post_init__(self):
        if not self.inputs or len(set(self.inputs)) != len(self.inputs):
            raise DomainError("reader inputs must be nonempty and distinct")


@dataclass(frozen=True)
class Writer(TheoryExpr):
    monoid: Monoid


@dataclass(frozen=True)
class Contract(TheoryExpr):
    name: str
    c: Fraction

    def __post_init__(self):
        if not (0 < self.c < 1):
            raise DomainError("contraction factor must be in (0, 1)")


@dataclass(frozen=True)
class Sum(TheoryExpr):
    left: TheoryExpr
    right: TheoryExpr


@dataclass(frozen=True)
class Tensor(TheoryExpr):
    left: TheoryExpr
    right: TheoryExpr


ONE_POINT = discrete(["*"])


def atoms(th: TheoryExpr) -> Iterator[TheoryExpr]:
    if isinstance(th, (Sum, Tensor)):
        yield from atoms(th.left)
        yield from atoms(th.right)
    else:
        yield th


# ---------------------------------------------------------------------------
# Signatures

@dataclass(frozen=True)
class OpFamily:
    """A family of generators contributed by one atom.

    kind matches OpSym.kind; `domain` describes admissible parameters:
    conv -> rationals in [0,1]; raise -> exception point ids; write -> the
    monoid; read/next carry their fixed shape in `fixed`.
    """

    kind: str
    fixed: object = None

    def admits(self, op: OpSym) -> bool:
        if op.kind != self.kind:
            return False
        if self.kind == "conv":
            return isinstance(op.param, Fraction) and 0 <= op.param <= 1
        if self.kind == "raise":
            return op.param in self.fixed
        if self.kind in ("union", "empty"):
            return True
        if self.kind == "read":
            return op.param == self.fixed
        if self.kind == "write":
            return self.fixed.contains(op.param)
        if self.kind == "next":
            return op.param == self.fixed
        return False

    def family_key(self):
        return (self.kind, self.fixed) if self.kind == "next" else self.kind


class Signature:
    def __init__(self, families: Sequence[OpFamily]):
        self.families = tuple(families)
        keys = [f.family_key() for f in families]
        for key in keys:
            if keys.count(key) > 1:
                raise DomainError(f"signature families overlap on {key!r}")

    def contains(self, op: OpSym) -> bool:
        return any(f.admits(op) for f in self.families)

    def membership_problem(self, op: OpSym) -> Optional[str]:
        """None if op is generated; otherwise a description of the violation."""
        same_kind = [f for f in self.families if f.kind == op.kind]
        if not same_kind:
            return f"operation family {op.kind!r} not in the signature"
        if not any(f.admits(op) for f in same_kind):
            return f"parameter of {op} outside the family"
        return None


def _atom_families(atom: TheoryExpr) -> List[OpFamily]:
    if isinstance(atom, Bary):
        return [OpFamily("conv")]
    if isinstance(atom, Semi):
        return [OpFamily("union"), OpFamily("empty")]
    if isinstance(atom, Exc):
        return [OpFamily("raise", frozenset(atom.space.points))]
    if isinstance(atom, Reader):
        return [OpFamily("read", len(atom.inputs))]
    if isinstance(atom, Writer):
        return [OpFamily("write", atom.monoid)]
    if isinstance(atom, Contract):
        return [OpFamily("next", (atom.name, atom.c))]
    raise DomainError(f"unknown atom {atom!r}")


def signature_of(th: TheoryExpr) -> Signature:
    """Disjoint union of the atoms' operation families."""
    families: List[OpFamily] = []
    dist_atoms = 0
    for atom in atoms(th):
        if isinstance(atom, (Bary, Semi)):
            dist_atoms += 1
        families.extend(_atom_families(atom))
    if dist_atoms > 1:
        raise DomainError("at most one barycentric or semilattice atom is supported")
    return Signature(families)


# ---------------------------------------------------------------------------
# Axiom instantiation

@dataclass(frozen=True, eq=False)
class AxiomInstance:
    """One conditional quantitative equation with variable-only premises.

    `bound_fn`, present for continuous schemata, maps the premise thresholds
    to the tight conclusion bound and is monotone in each argument.
    """

    label: str
    premises: Tuple[Tuple[str, str, ExtValue], ...]
    lhs: Term
    rhs: Term
    bound: ExtValue
    bound_fn: Optional[Callable[..., ExtValue]] = None

    def variables(self) -> Tuple[str, ...]:
        from .terms import variables as term_vars

        seen: List[str] = []
        names = [v for pair in self.premises for v in pair[:2]]
        names += list(term_vars(self.lhs)) + list(term_vars(self.rhs))
        for n in names:
            if n not in seen:
                seen.append(n)
        return tuple(seen)


@dataclass(frozen=True)
class ParamPool:
    """Finite pools the axiom schemata draw their parameters from."""

    weights: Tuple[Fraction, ...] = ()
    epsilons: Tuple[Fraction, ...] = ()
    monoid_elems: Tuple[MonoidElement, ...] = ()

    @staticmethod
    def make(weights=(), epsilons=(), monoid_elems=()) -> "ParamPool":
        def elem(a):
            if isinstance(a, str):
                try:
                    return Fraction(a)
                except ValueError:
                    return a  # a table-monoid element name
            return Fraction(a)

        return ParamPool(
            tuple(Fraction(w) for w in weights),
            tuple(Fraction(e) for e in epsilons),
            tuple(elem(a) for a in monoid_elems),
        )


def _x(i: int) -> Var:
    return Var(f"x{i}")


def _y(i: int) -> Var:
    return Var(f"y{i}")


def axioms(th: TheoryExpr, params: ParamPool) -> List[AxiomInstance]:
    """Every axiom of every atom instantiated over the pools, plus one
    commutation instance per pair of cross-side generators of each Tensor.

    Side-condition schemata are emitted at their tight bound.
    """
    out: List[AxiomInstance] = []
    _collect(th, params, out)
    return out


def _collect(th: TheoryExpr, params: ParamPool, out: List[AxiomInstance]):
    if isinstance(th, Sum):
        _collect(th.left, params, out)
        _collect(th.right, params, out)
        return
    if isinstance(th, Tensor):
        _collect(th.left, params, out)
        _collect(th.right, params, out)
        for f in instantiate_generators(th.left, params):
            for g in instantiate_generators(th.right, params):
                inst = _commutation(f, g)
                if inst is not None:
                    out.append(inst)
        return
    out.extend(_atom_axioms(th, params))


def _atom_axioms(atom: TheoryExpr, params: ParamPool) -> List[AxiomInstance]:
    eps = [ExtValue(e) for e in params.epsilons]
    out: List[AxiomInstance] = []
    x, y, z = Var("x"), Var("y"), Var("z")

    if isinstance(atom, Bary):
        if not params.weights:
            raise DomainError("barycentric axioms need a nonempty weight pool")
        out.append(AxiomInstance("B1", (), app(conv(1), x, y), x, ZERO))
        for e in params.weights:
            out.append(AxiomInstance(f"B2[{e}]", (), app(conv(e), x, x), x, ZERO))
            out.append(AxiomInstance(
                f"SC[{e}]", (), app(conv(e), x, y), app(conv(1 - e), y, x), ZERO))
        for e in params.weights:
            for e2 in params.weights:
                if e < 1 and e2 < 1:
                    inner = (e2 - e * e2) / (1 - e * e2)
                    out.append(AxiomInstance(
                        f"SA[{e},{e2}]", (),
                        app(conv(e2), app(conv(e), x, y), z),
                        app(conv(e * e2), x, app(conv(inner), y, z)),
                        ZERO))
        for e in params.weights:
            for e1 in eps:
                for e2 in eps:
                    bound_fn = _ib_bound(e)
                    out.append(AxiomInstance(
                        f"IB[{e}]",
                        (("x1", "y1", e1), ("x2", "y2", e2)),
                        app(conv(e), Var("x1"), Var("x2")),
                        app(conv(e), Var("y1"), Var("y2")),
                        bound_fn(e1, e2), bound_fn))
        return out

    if isinstance(atom, Semi):
        u, o = union_op(), app(empty_op())
        out.append(AxiomInstance("S0", (), app(u, x, o), x, ZERO))
        out.append(AxiomInstance("S1", (), app(u, x, x), x, ZERO))
        out.append(AxiomInstance("S2", (), app(u, x, y), app(u, y, x), ZERO))
        out.append(AxiomInstance(
            "S3", (), app(u, app(u, x, y), z), app(u, x, app(u, y, z)), ZERO))
        for e1 in eps:
            for e2 in eps:
                out.append(AxiomInstance(
                    "S4",
                    (("x1", "y1", e1), ("x2", "y2", e2)),
                    app(u, Var("x1"), Var("x2")), app(u, Var("y1"), Var("y2")),
                    _s4_bound(e1, e2), _s4_bound))
        return out

    if isinstance(atom, Exc):
        for p in atom.space.points:
            for q in atom.space.points:
                d = atom.space.d(p, q)
                if d.is_inf:
                    continue  # no rational-indexed instance exists
                out.append(AxiomInstance(
                    f"Exc[{p},{q}]", (), app(raise_(p)), app(raise_(q)), d))
        return out

    if isinstance(atom, Reader):
        n = len(atom.inputs)
        rd = read(n)
        out.append(AxiomInstance("Idem", (), x, App(rd, tuple([x] * n)), ZERO))
        diag_lhs = App(rd, tuple(Var(f"x{i}_{i}") for i in range(n)))
        diag_rhs = App(rd, tuple(
            App(rd, tuple(Var(f"x{i}_{j}") for j in range(n))) for i in range(n)))
        out.append(AxiomInstance("Diag", (), diag_lhs, diag_rhs, ZERO))
        return out

    if isinstance(atom, Writer):
        mon = atom.monoid
        if mon.elements is None:
            alphas: Tuple[MonoidElement, ...] = params.monoid_elems
            if not alphas:
                raise DomainError(
                    "writer axioms over the rational line need a monoid element pool")
        else:
            alphas = tuple(params.monoid_elems) or tuple(mon.elements)
        out.append(AxiomInstance("Zero", (), x, app(write(mon.unit), x), ZERO))
        for a in alphas:
            for b in alphas:
                out.append(AxiomInstance(
                    f"Mult[{a},{b}]", (),
                    app(write(a), app(write(b), x)),
                    app(write(mon.mult(a, b)), x), ZERO))
        for a in alphas:
            for b in alphas:
                for e in eps:
                    bound_fn = _diff_bound(mon, a, b)
                    out.append(AxiomInstance(
                        f"Diff[{a},{b}]", (("x1", "y1", e),),
                        app(write(a), Var("x1")), app(write(b), Var("y1")),
                        bound_fn(e), bound_fn))
        return out

    if isinstance(atom, Contract):
        step = next_op(atom.name, atom.c)
        for e in eps:
            bound_fn = _lip_bound(atom.c)
            out.append(AxiomInstance(
                f"Lip[{atom.name}]", (("x1", "y1", e),),
                app(step, Var("x1")), app(step, Var("y1")),
                bound_fn(e), bound_fn))
        return out

    raise DomainError(f"unknown atom {atom!r}")


def _ib_bound(e: Fraction):
    def bound(e1: ExtValue, e2: ExtValue) -> ExtValue:
        parts = []
        if e != 0:
            parts.append(e1.scaled(e))
        if e != 1:
            parts.append(e2.scaled(1 - e))
        total = ZERO
        for p in parts:
            total = total + p
        return total

    return bound


def _s4_bound(e1: ExtValue, e2: ExtValue) -> ExtValue:
    return e1 if e1 >= e2 else e2


def _diff_bound(mon: Monoid, a, b):
    base = mon.dist(a, b)

    def bound(e: ExtValue) -> ExtValue:
        return base + e

    return bound


def _lip_bound(c: Fraction):
    def bound(e: ExtValue) -> ExtValue:
        return e.scaled(c)

    return bound


def instantiate_generators(th: TheoryExpr, params: ParamPool) -> List[OpSym]:
    """The finite generator set used for commutation instances and model
    checking: parameterized families are instantiated over the pools,
    including the derived convex weights appearing in SC/SA instances and
    monoid products appearing in (Mult)."""
    ops: List[OpSym] = []
    for atom in atoms(th):
        if isinstance(atom, Bary):
            for e in conv_weight_closure(params.weights):
                ops.append(conv(e))
        elif isinstance(atom, Semi):
            ops.extend([union_op(), empty_op()])
        elif isinstance(atom, Exc):
            ops.extend(raise_(p) for p in atom.space.points)
        elif isinstance(atom, Reader):
            ops.append(read(len(atom.inputs)))
        elif isinstance(atom, Writer):
            mon = atom.monoid
            base = list(params.monoid_elems) if mon.elements is None \
                else list(params.monoid_elems or mon.elements)
            closed = list(base)
            for a in base:
                for b in base:
                    p = mon.mult(a, b)
                    if p not in closed:
                        closed.append(p)
            if mon.unit not in closed:
                closed.append(mon.unit)
            ops.extend(write(a) for a in closed)
        elif isinstance(atom, Contract):
            ops.append(next_op(atom.name, atom.c))
    return ops


def conv_weight_closure(weights: Sequence[Fraction]) -> List[Fraction]:
    """Pool weights plus the weights SC/SA/B1 instances derive from them."""
    out: List[Fraction] = []

    def add(e: Fraction):
        if e not in out:
            out.append(e)

    for e in weights:
        add(e)
    add(Fraction(1))
    for e in list(out):
        add(1 - e)
    snapshot = [e for e in out if e < 1]
    for e in snapshot:
        for e2 in snapshot:
            add(e * e2)
            add((e2 - e * e2) / (1 - e * e2))
    return out


def _commutation(f: OpSym, g: OpSym) -> Optional[AxiomInstance]:
    """f(g(x11..x1m), ..., g(xn1..xnm)) =_0 g(f(x11..xn1), ..., f(x1m..xnm))."""
    n, m = f.arity, g.arity
    if n == 0 and m == 0:
        # Tensoring two pointed theories would identify the constants; no
        # supported combination produces this.
        raise DomainError(f"commutation of two constants {f} and {g}")
    grid = [[Var(f"x{i}_{j}") for j in range(m)] for i in range(n)]
    lhs = App(f, tuple(App(g, tuple(grid[i])) for i in range(n))) if n else App(f, ())
    if n == 0:
        rhs = App(g, tuple(App(f, ()) for _ in range(m)))
    elif m == 0:
        lhs = App(f, tuple(App(g, ()) for _ in range(n)))
        rhs = App(g, ())
    else:
        rhs = App(g, tuple(
            App(f, tuple(grid[i][j] for i in range(n))) for j in range(m)))
    return AxiomInstance(f"Com[{f},{g}]", (), lhs, rhs, ZERO)


# ---------------------------------------------------------------------------
# Layer plans

@dataclass(frozen=True)
class GuardLeaf:
    name: str
    c: Fraction


@dataclass(frozen=True)
class LayerPlan:
    """Concrete description of the theory's free monad: nested layers,
    outermost first, over leaf kinds (variables, exception points, and one
    recursive guard per contractive operator).

    Layers: ('func', inputs) | ('dist',) | ('set',) | ('pair', monoid).
    """

    layers: Tuple[Tuple, ...]
    guards: Tuple[GuardLeaf, ...]
    exc_space: Optional[FinMetricSpace]

    def guard(self, name: str) -> GuardLeaf:
        for g in self.guards:
            if g.name == name:
                return g
        raise DomainError(f"no contractive operator named {name!r} in the plan")


def layer_plan(th: TheoryExpr) -> LayerPlan:
    """Normalization recipe for the supported layered grammar.

    th := core | Sum(th, Contract); core := base | Tensor(core, Reader)
    | Tensor(core, Writer); base := Bary | Semi | Exc | Reader | Writer
    | Sum(Bary|Semi, Exc).  Raises UnsupportedShape outside the grammar.
    """
    signature_of(th)  # checks disjointness and the single-Bary/Semi rule
    parts = _flatten_sum(th)
    guards = tuple(GuardLeaf(p.name, p.c) for p in parts if isinstance(p, Contract))
    rest = [p for p in parts if not isinstance(p, Contract)]
    if not rest:
        raise UnsupportedShape("a theory of contractive operators alone has no leaves to guard")
    core = _recombine_core(rest)
    layers, exc_space = _core_plan(core)
    return LayerPlan(tuple(layers), guards, exc_space)


def _flatten_sum(th: TheoryExpr) -> List[TheoryExpr]:
    if isinstance(th, Sum):
        return _flatten_sum(th.left) + _flatten_sum(th.right)
    return [th]


def _recombine_core(parts: List[TheoryExpr]) -> TheoryExpr:
    if len(parts) == 1:
        return parts[0]
    if len(parts) == 2:
        base = [p for p in parts if isinstance(p, (Bary, Semi))]
        excs = [p for p in parts if isinstance(p, Exc)]
        if len(base) == 1 and len(excs) == 1:
            return Sum(base[0], excs[0])
    raise UnsupportedShape(
        "sums are supported only as base + exceptions plus contractive atoms; got "
        + " + ".join(type(p).__name__ for p in parts))


def _core_plan(core: TheoryExpr):
    if isinstance(core, Tensor):
        left, right = core.left, core.right
        if isinstance(left, (Reader, Writer)) and not isinstance(right, (Reader, Writer)):
            left, right = right, left  # tensor is commutative
        if isinstance(right, Reader):
            layers, exc = _core_plan(left)
            return [("func", right.inputs)] + layers, exc
        if isinstance(right, Writer):
            layers, exc = _core_plan(left)
            return layers + [("pair", right.monoid)], exc
        raise UnsupportedShape(
            "tensor is supported only against reader or writer atoms")
    if isinstance(core, Sum):
        parts = _flatten_sum(core)
        core = _recombine_core(parts)
        if not isinstance(core, Sum):
            return _core_plan(core)
        base, exc = core.left, core.right
        layers, _ = _core_plan(base)
        return layers, exc.space
    if isinstance(core, Bary):
        return [("dist",)], None
    if isinstance(core, Semi):
        return [("set",)], None
    if isinstance(core, Exc):
        return [], core.space
    if isinstance(core, Reader):
        return [("func", core.inputs)], None
    if isinstance(core, Writer):
        return [("pair", core.monoid)], None
    raise UnsupportedShape(f"unsupported theory shape {type(core).__name__}")


# ---------------------------------------------------------------------------
# Ready-made composed theories

def markov_process_theory(c) -> TheoryExpr:
    """Barycentric + one-point exceptions + a contractive step."""
    return Sum(Sum(Bary(), Exc(ONE_POINT)), Contract("next", Fraction(c)))


def labelled_mp_theory(actions: Sequence[str], c) -> TheoryExpr:
    return Sum(Tensor(Sum(Bary(), Exc(ONE_POINT)), Reader(tuple(actions))),
               Contract("next", Fraction(c)))


def mealy_theory(inputs: Sequence[str], monoid: Monoid, c) -> TheoryExpr:
    return Sum(Tensor(Reader(tuple(inputs)), Writer(monoid)),
               Contract("next", Fraction(c)))


def mdp_theory(actions: Sequence[str], c) -> TheoryExpr:
    return Sum(Tensor(Tensor(Bary(), Writer(RATIONAL_LINE)), Reader(tuple(actions))),
               Contract("next", Fraction(c)))


# ---------------------------------------------------------------------------
# Parsing

def parse_theory(text: str, spaces: Optional[Dict[str, FinMetricSpace]] = None,
                 monoids: Optional[Dict[str, Monoid]] = None,
                 source: str = "<theory>") -> TheoryExpr:
    """Parse the theory expression grammar.

    bary | semi | exc{...} | reader{i1,...} | writer{q or name} |
    contr{name, c} | sum(th, th) | tensor(th, th).  exc{1} and exc{*} mean
    the one-point space; exc{a,b,...} is the discrete space on the listed
    labels; other names refer to `spaces`.
    """
    ts = TokenStream(text, source)
    th = _parse_theory(ts, spaces or {}, monoids or {})
    ts.expect_eof()
    return th


def _parse_theory(ts: TokenStream, spaces, monoids) -> TheoryExpr:
    tok = ts.expect_ident()
    name = tok.text
    if name == "bary":
        return Bary()
    if name == "semi":
        return Semi()
    if name == "exc":
        ts.expect("{")
        labels = []
        while not ts.at("}"):
            t = ts.next()
            if t.kind not in ("ident", "num") and t.text != "*":
                raise ts.error(f"expected exception label, found {t.text!r}", t)
            labels.append(t.text)
            if not ts.at("}"):
                ts.expect(",")
        ts.expect("}")
        if labels in (["1"], ["*"]):
            return Exc(ONE_POINT)
        if len(labels) == 1 and labels[0] in spaces:
            return Exc(spaces[labels[0]])
        if not labels:
            raise ts.error("exception space needs at least one label", tok)
        return Exc(discrete(labels))
    if name == "reader":
        ts.expect("{")
        inputs = [ts.expect_ident().text]
        while ts.accept(","):
            inputs.append(ts.expect_ident().text)
        ts.expect("}")
        return Reader(tuple(inputs))
    if name == "writer":
        ts.expect("{")
        ref = ts.expect_ident().text
        ts.expect("}")
        if ref == "q":
            return Writer(RATIONAL_LINE)
        if ref in monoids:
            return Writer(monoids[ref])
        raise ts.error(f"unknown monoid {ref!r}", tok)
    if name == "contr":
        ts.expect("{")
        opname = ts.expect_ident().text
        ts.expect(",")
        c = ts.expect_rational()
        ts.expect("}")
        return Contract(opname, c)
    if name == "sum" or name == "tensor":
        ts.expect("(")
        left = _parse_theory(ts, spaces, monoids)
        ts.expect(",")
        right = _parse_theory(ts, spaces, monoids)
        ts.expect(")")
        return Sum(left, right) if name == "sum" else Tensor(left, right)
    raise ts.error(f"unknown theory atom {name!r}", tok)


def parse_monoids(text: str, source: str = "<monoid>") -> Dict[str, Monoid]:
    """Parse `monoid NAME { elements: a, b; unit = a; mult(a,b) = c; d(a,b) = 1; }`."""
    ts = TokenStream(text, source)
    out: Dict[str, Monoid] = {}
    while not ts.at(""):
        ts.expect("monoid")
        name = ts.expect_ident().text
        ts.expect("{")
        ts.expect("elements")
        ts.expect(":")
        elements = [ts.expect_ident().text]
        while ts.accept(","):
            elements.append(ts.expect_ident().text)
        ts.expect(";")
        ts.expect("unit")
        ts.expect("=")
        unit = ts.expect_ident().text
        ts.expect(";")
        table: Dict[Tuple[str, str], str] = {}
        dist: Dict[Tuple[str, str], ExtValue] = {}
        while not ts.accept("}"):
            what = ts.expect_ident().text
            ts.expect("(")
            a = ts.expect_ident().text
            ts.expect(",")
            b = ts.expect_ident().text
            ts.expect(")")
            ts.expect("=")
            if what == "mult":
                table[(a, b)] = ts.expect_ident().text
            elif what == "d":
                t = ts.next()
                dist[(a, b)] = INF if t.text == "inf" else ExtValue(Fraction(t.text))
            else:
                raise ts.error(f"expected mult or d, found {what!r}")
            ts.expect(";")
        space = FinMetricSpace(elements, dist)
        out[name] = TableMonoid(space, unit, table)
    return out
