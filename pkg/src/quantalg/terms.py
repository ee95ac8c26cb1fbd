"""Operation symbols, terms, substitution, and the term surface grammar.

Signatures are families of parameterized symbols: convex combination +_e,
exception constants raise_e, semilattice union/empty, n-ary read, unary
writes wr_alpha, and unary contractive step operators.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Optional, Tuple, Union

from .lexing import TokenStream

MonoidElement = Union[Fraction, str]

_ARITY_BY_KIND = {"conv": 2, "raise": 0, "union": 2, "empty": 0, "write": 1, "next": 1}


@dataclass(frozen=True)
class OpSym:
    """One operation symbol; `param` depends on the family `kind`."""

    kind: str
    param: object = None

    def __post_init__(self):
        if self.kind == "conv":
            e = self.param
            if not isinstance(e, Fraction) or not (0 <= e <= 1):
                raise ValueError(f"conv parameter must be a rational in [0,1], got {e!r}")
        elif self.kind == "read":
            if not isinstance(self.param, int) or self.param < 1:
                raise ValueError("read arity must be a positive integer")
        elif self.kind not in _ARITY_BY_KIND:
            raise ValueError(f"unknown operation family {self.kind!r}")

    @property
    def arity(self) -> int:
        if self.kind == "read":
            return self.param
        return _ARITY_BY_KIND[self.kind]

    def __str__(self) -> str:
        if self.kind == "conv":
            return f"conv({self.param})"
        if self.kind == "raise":
            return f"raise({self.param})"
        if self.kind == "read":
            return "rd"
        if self.kind == "write":
            return f"wr({self.param})"
        if self.kind == "next":
            name, c = self.param
            return str(name)
        return self.kind


def conv(e) -> OpSym:
    return OpSym("conv", Fraction(e))


def raise_(label: str) -> OpSym:
    return OpSym("raise", label)


def union_op() -> OpSym:
    return OpSym("union")


def empty_op() -> OpSym:
    return OpSym("empty")


def read(n: int) -> OpSym:
    return OpSym("read", n)


def write(alpha: MonoidElement) -> OpSym:
    return OpSym("write", alpha)


def next_op(name: str = "next", c=None) -> OpSym:
    return OpSym("next", (name, None if c is None else Fraction(c)))


class Term:
    """Base class; terms are Var or App nodes, immutable and hashable."""

    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App(Term):
    op: OpSym
    args: Tuple[Term, ...]

    def __post_init__(self):
        if len(self.args) != self.op.arity:
            raise ValueError(
                f"{self.op} expects {self.op.arity} arguments, got {len(self.args)}"
            )

    def __str__(self) -> str:
        return format_term(self)


def app(op: OpSym, *args: Term) -> App:
    return App(op, tuple(args))


def variables(t: Term) -> Iterator[str]:
    """Yield variable names in left-to-right occurrence order."""
    if isinstance(t, Var):
        yield t.name
    else:
        for a in t.args:
            yield from variables(a)


def bind(t: Term, sigma: Mapping[str, Term]) -> Term:
    """Homomorphic substitution; variables missing from sigma are left fixed."""
    if isinstance(t, Var):
        return sigma.get(t.name, t)
    return App(t.op, tuple(bind(a, sigma) for a in t.args))


def well_formed(t: Term, theory) -> Tuple[bool, Optional[str]]:
    """Check every symbol of t against the theory's signature.

    Returns (True, None) or (False, description of the first violation).
    """
    from .theories import signature_of

    sig = signature_of(theory)
    for node in _apps(t):
        problem = sig.membership_problem(node.op)
        if problem is not None:
            return False, problem
        if len(node.args) != node.op.arity:
            return False, f"{node.op} applied to {len(node.args)} arguments"
    return True, None


def _apps(t: Term) -> Iterator[App]:
    if isinstance(t, App):
        yield t
        for a in t.args:
            yield from _apps(a)


_KEYWORDS = {"raise", "empty", "conv", "union", "rd", "wr", "next"}


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    op = t.op
    if op.kind == "raise":
        return f"raise({op.param})"
    if op.kind == "empty":
        return "empty"
    if op.kind == "conv":
        a, b = t.args
        return f"conv({op.param}, {format_term(a)}, {format_term(b)})"
    if op.kind == "union":
        a, b = t.args
        return f"union({format_term(a)}, {format_term(b)})"
    if op.kind == "read":
        return "rd(" + ", ".join(format_term(a) for a in t.args) + ")"
    if op.kind == "write":
        return f"wr({op.param}, {format_term(t.args[0])})"
    if op.kind == "next":
        return f"next({format_term(t.args[0])})"
    raise ValueError(f"cannot format {op!r}")


def parse_term(text: str, theory=None, source: str = "<term>") -> Term:
    """Parse the term surface grammar.

    With a theory, `next`, `wr` and `rd` are resolved against its signature
    (contraction factor, monoid element type, read arity) and parameter
    ranges are validated; without one the term is left partially resolved.
    """
    ts = TokenStream(text, source)
    t = _parse_term(ts, theory)
    ts.expect_eof()
    return t


def _parse_term(ts: TokenStream, theory) -> Term:
    tok = ts.next()
    if tok.kind == "ident" and tok.text not in _KEYWORDS:
        return Var(tok.text)
    if tok.text == "empty":
        return App(empty_op(), ())
    if tok.text == "raise":
        ts.expect("(")
        lbl = ts.next()
        if lbl.kind not in ("ident", "num") and lbl.text != "*":
            raise ts.error(f"expected exception label, found {lbl.text!r}", lbl)
        ts.expect(")")
        return App(raise_(lbl.text), ())
    if tok.text == "conv":
        ts.expect("(")
        e = ts.expect_rational()
        if not (0 <= e <= 1):
            raise ts.error(f"conv weight {e} outside [0,1]", tok)
        ts.expect(",")
        a = _parse_term(ts, theory)
        ts.expect(",")
        b = _parse_term(ts, theory)
        ts.expect(")")
        return App(conv(e), (a, b))
    if tok.text == "union":
        ts.expect("(")
        a = _parse_term(ts, theory)
        ts.expect(",")
        b = _parse_term(ts, theory)
        ts.expect(")")
        return App(union_op(), (a, b))
    if tok.text == "rd":
        ts.expect("(")
        args = [_parse_term(ts, theory)]
        while ts.accept(","):
            args.append(_parse_term(ts, theory))
        ts.expect(")")
        if theory is not None:
            n = _reader_arity(theory)
            if n is not None and n != len(args):
                raise ts.error(f"rd expects {n} arguments here, got {len(args)}", tok)
        return App(read(len(args)), tuple(args))
    if tok.text == "wr":
        ts.expect("(")
        alpha_tok = ts.next()
        if alpha_tok.kind == "num":
            alpha: MonoidElement = Fraction(alpha_tok.text)
        elif alpha_tok.kind == "ident":
            alpha = alpha_tok.text
        else:
            raise ts.error(f"expected monoid element, found {alpha_tok.text!r}", alpha_tok)
        ts.expect(",")
        a = _parse_term(ts, theory)
        ts.expect(")")
        return App(write(alpha), (a,))
    if tok.text == "next":
        ts.expect("(")
        a = _parse_term(ts, theory)
        ts.expect(")")
        op = next_op()
        if theory is not None:
            resolved = _contract_op(theory)
            if resolved is not None:
                op = resolved
        return App(op, (a,))
    raise ts.error(f"expected a term, found {tok.text or 'end of input'!r}", tok)


def _reader_arity(theory) -> Optional[int]:
    from .theories import atoms, Reader

    readers = [a for a in atoms(theory) if isinstance(a, Reader)]
    return len(readers[0].inputs) if readers else None


def _contract_op(theory) -> Optional[OpSym]:
    from .theories import atoms, Contract

    contracts = [a for a in atoms(theory) if isinstance(a, Contract)]
    if len(contracts) == 1:
        return next_op(contracts[0].name, contracts[0].c)
    return None
