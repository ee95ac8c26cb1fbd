"""Exhaustive verification of finite quantitative algebras against a theory:
non-expansiveness of every interpretation, satisfaction of every instantiated
axiom, and tensor commutation.

Interpretation tables may be partial (the barycentric and semilattice models
are carved out of infinite algebras, and no nontrivial finite fragment is
closed under all operations); assignments whose lookups are undefined are
skipped and counted in the report.  Premise thresholds of continuous
schemata are swept over the realized carrier distances, which suffices
because satisfaction is monotone in the thresholds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import DomainError
from .extvalue import ZERO, ext_max
from .lexing import TokenStream
from .spaces import FinDist, FinMetricSpace, box, hausdorff, kantorovich, power, tuple_id
from .terms import OpSym, Term, Var, conv, empty_op, raise_, read, union_op, write
from .theories import (AxiomInstance, ParamPool, Sum, TableMonoid, Tensor,
                       TheoryExpr, instantiate_generators)

Table = Dict[Tuple[str, ...], str]


@dataclass
class FiniteAlgebra:
    """A finite carrier with (possibly partial) operation tables."""

    carrier: FinMetricSpace
    interp: Dict[OpSym, Table]
    name: str = "algebra"

    def lookup(self, op: OpSym, args: Tuple[str, ...]) -> Optional[str]:
        table = self.interp.get(op)
        if table is None:
            return None
        return table.get(args)

    def evaluate(self, t: Term, assignment: Dict[str, str]) -> Optional[str]:
        """Homomorphic interpretation; None when a lookup is undefined."""
        if isinstance(t, Var):
            value = assignment.get(t.name)
            if value is None:
                raise DomainError(f"unassigned variable {t.name}")
            return value
        args = []
        for a in t.args:
            v = self.evaluate(a, assignment)
            if v is None:
                return None
            args.append(v)
        return self.lookup(t.op, tuple(args))

    def validate_closure(self):
        """Every defined entry must land in the carrier with the right arity."""
        pts = set(self.carrier.points)
        for op, table in self.interp.items():
            for args, out in table.items():
                if len(args) != op.arity:
                    raise DomainError(f"{op} entry {args} has wrong arity")
                if any(a not in pts for a in args) or out not in pts:
                    raise DomainError(f"{op} entry {args} -> {out} escapes the carrier")


@dataclass
class Counterexample:
    assignment: Dict[str, str]
    detail: str


@dataclass
class CheckEntry:
    kind: str  # 'table' | 'nonexpansive' | 'axiom'
    label: str
    origin: str
    passed: bool
    counterexample: Optional[Counterexample] = None
    checked: int = 0
    skipped: int = 0


@dataclass
class Report:
    entries: List[CheckEntry] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> List[CheckEntry]:
        return [e for e in self.entries if not e.passed]

    def subreport(self, origin_prefix: str) -> "Report":
        return Report([e for e in self.entries if e.origin.startswith(origin_prefix)],
                      list(self.notes))


def check_nonexpansive(alg: FiniteAlgebra, op: OpSym,
                       lipschitz: Optional[Fraction] = None,
                       origin: str = "") -> CheckEntry:
    """Exhaustively check d(f(a), f(b)) <= (c *) max_i d(a_i, b_i)."""
    factor = lipschitz
    if factor is None and op.kind == "next":
        factor = op.param[1]
    n = op.arity
    entry = CheckEntry("nonexpansive", f"nonexpansive {op}", origin, True)
    pts = alg.carrier.points
    for avec in itertools.product(pts, repeat=n):
        fa = alg.lookup(op, avec)
        if fa is None:
            entry.skipped += 1
            continue
        for bvec in itertools.product(pts, repeat=n):
            fb = alg.lookup(op, bvec)
            if fb is None:
                entry.skipped += 1
                continue
            entry.checked += 1
            if n == 0:
                spread = ZERO
            else:
                spread = ext_max(*(alg.carrier.d(x, y) for x, y in zip(avec, bvec)))
            if factor is not None:
                if spread.is_inf:
                    continue
                allowed = spread.scaled(factor)
            else:
                allowed = spread
            got = alg.carrier.d(fa, fb)
            if got > allowed:
                entry.passed = False
                entry.counterexample = Counterexample(
                    {"args": avec, "args'": bvec},
                    f"d({fa},{fb}) = {got} > {allowed}")
                return entry
    return entry


def check_equation(alg: FiniteAlgebra, ax: AxiomInstance,
                   origin: str = "") -> CheckEntry:
    """For every assignment: premises within their thresholds imply the
    conclusion within the bound, with thresholds swept over realized
    distances when the axiom carries a continuous bound function."""
    entry = CheckEntry("axiom", ax.label, origin, True)
    variables = ax.variables()
    pts = alg.carrier.points
    realized = sorted(
        {alg.carrier.d(p, q) for p in pts for q in pts if not alg.carrier.d(p, q).is_inf})
    for values in itertools.product(pts, repeat=len(variables)):
        assignment = dict(zip(variables, values))
        lhs = alg.evaluate(ax.lhs, assignment)
        rhs = alg.evaluate(ax.rhs, assignment)
        if lhs is None or rhs is None:
            entry.skipped += 1
            continue
        entry.checked += 1
        got = alg.carrier.d(lhs, rhs)
        violation = _equation_violation(alg, ax, assignment, got, realized)
        if violation is not None:
            entry.passed = False
            entry.counterexample = Counterexample(assignment, violation)
            return entry
    return entry


def _equation_violation(alg, ax, assignment, got, realized) -> Optional[str]:
    if not ax.premises:
        if got > ax.bound:
            return f"d(lhs, rhs) = {got} > {ax.bound}"
        return None
    premise_dists = [
        alg.carrier.d(assignment[x], assignment[y]) for x, y, _ in ax.premises]
    # The given instance.
    eps = [e for _, _, e in ax.premises]
    if all(pd <= e for pd, e in zip(premise_dists, eps)) and got > ax.bound:
        return f"premises hold at {[str(e) for e in eps]} but d = {got} > {ax.bound}"
    if ax.bound_fn is None:
        return None
    # Tightest sweep point: per premise, the least realized distance at or
    # above the actual one (bound_fn is monotone, so this dominates the sweep).
    tight = []
    for pd in premise_dists:
        if pd.is_inf:
            return None  # no rational threshold admits this premise
        tight.append(min(d for d in realized if d >= pd))
    bound = ax.bound_fn(*tight)
    if got > bound:
        return (f"premises hold at {[str(e) for e in tight]} "
                f"but d = {got} > {bound}")
    return None


def required_operations(th: TheoryExpr, params: ParamPool) -> List[OpSym]:
    return instantiate_generators(th, params)


def check_theory(alg: FiniteAlgebra, th: TheoryExpr, params: ParamPool) -> Report:
    """Aggregate table, non-expansiveness, and axiom checks for the theory."""
    report = Report()
    alg.validate_closure()
    for op in required_operations(th, params):
        if op not in alg.interp:
            report.entries.append(CheckEntry(
                "table", f"table for {op}", "", False,
                Counterexample({}, "no interpretation table")))
    _check_structure(alg, th, params, report, "")
    report.notes.append(
        "continuity rule not checked: distances on a finite carrier are attained")
    return report


def _check_structure(alg, th, params, report, origin):
    if isinstance(th, Sum):
        _check_structure(alg, th.left, params, report, origin + "L")
        _check_structure(alg, th.right, params, report, origin + "R")
        return
    if isinstance(th, Tensor):
        _check_structure(alg, th.left, params, report, origin + "L")
        _check_structure(alg, th.right, params, report, origin + "R")
        for f in instantiate_generators(th.left, params):
            for g in instantiate_generators(th.right, params):
                from .theories import _commutation

                inst = _commutation(f, g)
                if inst is not None:
                    report.entries.append(
                        check_equation(alg, inst, origin + ".com"))
        return
    # atom
    from .theories import _atom_axioms

    for op in instantiate_generators(th, params):
        if op in alg.interp:
            report.entries.append(check_nonexpansive(alg, op, origin=origin))
    for ax in _atom_axioms(th, params):
        report.entries.append(check_equation(alg, ax, origin))


def format_report(report: Report, verbose: bool = False) -> str:
    lines = []
    for e in report.entries:
        status = "pass" if e.passed else "FAIL"
        extra = f" (checked {e.checked}, skipped {e.skipped})" if verbose else ""
        lines.append(f"{status}  {e.origin or '-'}  {e.label}{extra}")
        if e.counterexample is not None:
            lines.append(f"      at {e.counterexample.assignment}: "
                         f"{e.counterexample.detail}")
    for n in report.notes:
        lines.append(f"note: {n}")
    lines.append("RESULT: " + ("pass" if report.passed else "FAIL"))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Built-in concrete models

def set_id(points: Iterable[str]) -> str:
    inner = ",".join(sorted(points))
    return "{" + inner + "}"


def powerset_model(X: FinMetricSpace) -> FiniteAlgebra:
    """All finite subsets of X with Hausdorff metric; union and empty."""
    subsets: List[Tuple[str, ...]] = []
    pts = list(X.points)
    for mask in range(1 << len(pts)):
        subsets.append(tuple(p for k, p in enumerate(pts) if mask >> k & 1))
    ids = {s: set_id(s) for s in subsets}
    dist = {}
    for a in subsets:
        for b in subsets:
            dist[(ids[a], ids[b])] = hausdorff(X, a, b)
    carrier = FinMetricSpace([ids[s] for s in subsets], dist, validate=False)
    union_table: Table = {}
    for a in subsets:
        for b in subsets:
            union_table[(ids[a], ids[b])] = set_id(set(a) | set(b))
    return FiniteAlgebra(carrier, {
        union_op(): union_table,
        empty_op(): {(): set_id(())},
    }, name="powerset")


def dist_id(d: FinDist) -> str:
    return "[" + ";".join(f"{p}:{w}" for p, w in d.items) + "]"


def _grid_distributions(points: Sequence[str], denominator: int) -> List[FinDist]:
    out = []

    def go(rest, remaining, acc):
        if not rest:
            if remaining == 0 and acc:
                out.append(FinDist.from_pairs(list(acc)))
            return
        p = rest[0]
        for k in range(remaining + 1):
            go(rest[1:], remaining - k,
               acc + [(p, Fraction(k, denominator))] if k else acc)

    go(list(points), denominator, [])
    return out


def distribution_model(X: FinMetricSpace, denominator: int,
                       weights: Sequence[Fraction]) -> FiniteAlgebra:
    """Distributions over X with weights in (1/denominator)Z, Kantorovich
    metric, and convex combination tables defined where the exact result
    stays on the grid."""
    from .theories import conv_weight_closure

    dists = _grid_distributions(X.points, denominator)
    ids = {d: dist_id(d) for d in dists}
    table = {}
    for a in dists:
        for b in dists:
            table[(ids[a], ids[b])] = kantorovich(X, a, b)
    carrier = FinMetricSpace(list(ids.values()), table, validate=False)
    interp: Dict[OpSym, Table] = {}
    grid = set(ids)
    for e in conv_weight_closure(tuple(weights)):
        t: Table = {}
        for a in dists:
            for b in dists:
                mixed = FinDist.from_pairs(
                    [(p, w * e) for p, w in a.items]
                    + [(p, w * (1 - e)) for p, w in b.items])
                if mixed in grid:
                    t[(ids[a], ids[b])] = ids[mixed]
        interp[conv(e)] = t
    return FiniteAlgebra(carrier, interp, name=f"distributions/{denominator}")


def reader_model(X: FinMetricSpace, inputs: Sequence[str]) -> FiniteAlgebra:
    """The function space X^inputs with sup metric and diagonal read."""
    inputs = tuple(inputs)
    carrier = power(X, inputs)
    n = len(inputs)
    tuples = list(itertools.product(X.points, repeat=n))
    table: Table = {}
    for fs in itertools.product(tuples, repeat=n):
        result = tuple(fs[k][k] for k in range(n))
        table[tuple(tuple_id(f) for f in fs)] = tuple_id(result)
    return FiniteAlgebra(carrier, {read(n): table}, name="reader")


def writer_model(monoid: TableMonoid, X: FinMetricSpace) -> FiniteAlgebra:
    """The product monoid-carrier x X with sum metric; writes multiply."""
    from .spaces import pair_id

    carrier = box(monoid.space, X)
    interp: Dict[OpSym, Table] = {}
    for alpha in monoid.elements:
        t: Table = {}
        for beta in monoid.elements:
            for x in X.points:
                t[(pair_id(beta, x),)] = pair_id(monoid.mult(alpha, beta), x)
        interp[write(alpha)] = t
    return FiniteAlgebra(carrier, interp, name="writer")


# ---------------------------------------------------------------------------
# Algebra files

def parse_algebras(text: str, spaces: Dict[str, FinMetricSpace],
                   source: str = "<algebra>") -> Dict[str, FiniteAlgebra]:
    """Parse `algebra NAME { carrier: SPACE; op conv(1/2): (p,q) -> r; ... }`."""
    ts = TokenStream(text, source)
    out: Dict[str, FiniteAlgebra] = {}
    while not ts.at(""):
        ts.expect("algebra")
        name = ts.expect_ident().text
        ts.expect("{")
        ts.expect("carrier")
        ts.expect(":")
        ref = ts.expect_ident().text
        if ref not in spaces:
            raise ts.error(f"unknown space {ref!r}")
        carrier = spaces[ref]
        ts.expect(";")
        interp: Dict[OpSym, Table] = {}
        current: Optional[OpSym] = None
        while not ts.accept("}"):
            if ts.accept("op"):
                current = _parse_opspec(ts)
                interp.setdefault(current, {})
                ts.expect(":")
                continue
            if current is None:
                raise ts.error("table entry before any `op` header")
            args: Tuple[str, ...] = ()
            if ts.accept("("):
                names = []
                if not ts.at(")"):
                    names.append(_carrier_point(ts))
                    while ts.accept(","):
                        names.append(_carrier_point(ts))
                ts.expect(")")
                args = tuple(names)
            ts.expect("->")
            outp = _carrier_point(ts)
            ts.expect(";")
            if len(args) != current.arity:
                raise ts.error(f"{current} entry has arity {len(args)}")
            interp[current][args] = outp
        alg = FiniteAlgebra(carrier, interp, name=name)
        try:
            alg.validate_closure()
        except DomainError as exc:
            raise DomainError(f"{source}: algebra {name}: {exc}") from None
        out[name] = alg
    return out


def _carrier_point(ts: TokenStream) -> str:
    tok = ts.next()
    if tok.kind not in ("ident", "num") and tok.text != "*":
        raise ts.error(f"expected carrier point, found {tok.text!r}", tok)
    return tok.text


def _parse_opspec(ts: TokenStream) -> OpSym:
    tok = ts.expect_ident()
    name = tok.text
    if name == "conv":
        ts.expect("(")
        e = ts.expect_rational()
        ts.expect(")")
        return conv(e)
    if name == "raise":
        ts.expect("(")
        lbl = ts.next().text
        ts.expect(")")
        return raise_(lbl)
    if name == "union":
        return union_op()
    if name == "empty":
        return empty_op()
    if name == "rd":
        ts.expect("(")
        n = ts.expect_rational()
        ts.expect(")")
        return read(int(n))
    if name == "wr":
        ts.expect("(")
        t = ts.next()
        alpha = Fraction(t.text) if t.kind == "num" else t.text
        ts.expect(")")
        return write(alpha)
    if name == "next":
        ts.expect("(")
        opname = ts.expect_ident().text
        ts.expect(",")
        c = ts.expect_rational()
        ts.expect(")")
        from .terms import next_op

        return next_op(opname, c)
    raise ts.error(f"unknown operation {name!r}", tok)
