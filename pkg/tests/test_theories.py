from fractions import Fraction

import pytest

from quantalg import (Bary, Contract, Exc, FinMetricSpace, ONE_POINT,
                      ParamPool, RATIONAL_LINE, Reader, Semi, Sum, TableMonoid,
                      Tensor, Writer, axioms, discrete, instantiate_generators,
                      labelled_mp_theory, layer_plan, markov_process_theory,
                      mdp_theory, mealy_theory, parse_monoids, parse_theory,
                      parse_term, signature_of)
from quantalg.errors import DomainError, UnsupportedShape
from quantalg.extvalue import ZERO, ext
from quantalg.terms import conv, raise_, read, write

C12 = Fraction(1, 2)
POOL = ParamPool.make(weights=[C12, Fraction(1, 3)], epsilons=[1, 2],
                      monoid_elems=[0, 2, 3])


def test_signature_membership():
    sig = signature_of(Bary())
    assert sig.contains(conv(C12))
    assert not sig.contains(read(2))
    sig = signature_of(Sum(Bary(), Exc(ONE_POINT)))
    assert sig.contains(raise_("*"))
    assert not sig.contains(raise_("other"))
    sig = signature_of(Tensor(Reader(("i1", "i2")), Writer(RATIONAL_LINE)))
    assert sig.contains(read(2))
    assert not sig.contains(read(3))
    assert sig.contains(write(Fraction(7, 3)))
    assert not sig.contains(write("a"))


def test_signature_disjointness_enforced():
    with pytest.raises(DomainError):
        signature_of(Sum(Bary(), Bary()))
    with pytest.raises(DomainError):
        signature_of(Sum(Reader(("i",)), Reader(("j", "k"))))
    with pytest.raises(DomainError):
        signature_of(Sum(Bary(), Semi()))  # one distribution-like atom only
    # distinct contraction names may coexist
    signature_of(Sum(Sum(Bary(), Contract("a", C12)), Contract("b", Fraction(1, 3))))


def test_axioms_writer_includes_mult_instance():
    axs = axioms(Writer(RATIONAL_LINE), POOL)
    labels = {a.label for a in axs}
    assert "Mult[2,3]" in labels
    mult = next(a for a in axs if a.label == "Mult[2,3]")
    assert mult.lhs == parse_term("wr(2, wr(3, x))")
    assert mult.rhs == parse_term("wr(5, x)")
    assert mult.bound == ZERO and not mult.premises


def test_axioms_reader_idem():
    axs = axioms(Reader(("i1", "i2")), POOL)
    idem = next(a for a in axs if a.label == "Idem")
    assert idem.lhs == parse_term("x")
    assert idem.rhs == parse_term("rd(x, x)")


def test_axioms_contract_tight_bound():
    axs = axioms(Contract("next", C12), ParamPool.make(epsilons=[2]))
    lip = next(a for a in axs if a.label.startswith("Lip"))
    assert lip.premises == (("x1", "y1", ext(2)),)
    assert lip.bound == ext(1)


def test_axioms_exception_distances():
    E = FinMetricSpace(["e1", "e2"], {("e1", "e2"): ext("1/4")})
    axs = axioms(Exc(E), POOL)
    inst = next(a for a in axs if a.label == "Exc[e1,e2]")
    assert inst.bound == ext("1/4")
    # infinite pairs have no rational-indexed instance
    axs2 = axioms(Exc(discrete(["a", "b"])), POOL)
    assert all(not a.label.startswith("Exc[a,b") for a in axs2)


def test_axioms_sum_is_union_and_tensor_adds_commutation():
    lmp = labelled_mp_theory(["a1", "a2"], C12)
    axs = axioms(lmp, POOL)
    labels = [a.label for a in axs]
    assert "B1" in labels and "Idem" in labels and "Lip[next]" in labels
    com = [a for a in axs if a.label.startswith("Com[")]
    assert com, "tensor emits commutation instances"
    # conv x rd instance matches the displayed shape
    inst = next(a for a in com if "conv(1/2)" in a.label and "rd" in a.label)
    assert inst.bound == ZERO
    sum_axs = axioms(Sum(Bary(), Exc(ONE_POINT)), POOL)
    assert {a.label for a in sum_axs} <= set(labels)


def test_axioms_empty_pool_errors():
    with pytest.raises(DomainError):
        axioms(Bary(), ParamPool.make())
    with pytest.raises(DomainError):
        axioms(Writer(RATIONAL_LINE), ParamPool.make(epsilons=[1]))


def test_bound_monotone_under_weakening():
    axs = axioms(Bary(), POOL)
    ib = next(a for a in axs if a.label.startswith("IB"))
    e1, e2 = (p[2] for p in ib.premises)
    tight = ib.bound_fn(e1, e2)
    assert tight == ib.bound
    assert ib.bound_fn(e1 + ext(1), e2) >= tight


def test_layer_plans_of_the_four_composed_theories():
    mp = layer_plan(markov_process_theory(C12))
    assert [l[0] for l in mp.layers] == ["dist"]
    assert mp.exc_space is ONE_POINT and len(mp.guards) == 1

    lmp = layer_plan(labelled_mp_theory(["a", "b"], C12))
    assert [l[0] for l in lmp.layers] == ["func", "dist"]
    assert lmp.layers[0][1] == ("a", "b")

    mon = RATIONAL_LINE
    mm = layer_plan(mealy_theory(["i"], mon, C12))
    assert [l[0] for l in mm.layers] == ["func", "pair"]
    assert mm.exc_space is None

    mdp = layer_plan(mdp_theory(["a"], C12))
    assert [l[0] for l in mdp.layers] == ["func", "dist", "pair"]


def test_layer_plan_flattens_sums_and_swaps_tensors():
    a = layer_plan(Sum(Bary(), Sum(Exc(ONE_POINT), Contract("next", C12))))
    b = layer_plan(markov_process_theory(C12))
    assert [l[0] for l in a.layers] == [l[0] for l in b.layers]
    assert a.guards == b.guards
    swapped = layer_plan(Tensor(Reader(("i",)), Sum(Bary(), Exc(ONE_POINT))))
    assert [l[0] for l in swapped.layers] == ["func", "dist"]


def test_layer_plan_rejects_unsupported_shapes():
    with pytest.raises(UnsupportedShape):
        layer_plan(Sum(Reader(("i",)), Writer(RATIONAL_LINE)))  # sum, not tensor
    with pytest.raises(UnsupportedShape):
        layer_plan(Contract("next", C12))
    with pytest.raises(UnsupportedShape):
        layer_plan(Tensor(Bary(), Contract("next", C12)))


def test_generator_instantiation_closes_derived_weights():
    ops = instantiate_generators(Bary(), ParamPool.make(weights=[C12]))
    weights = {op.param for op in ops}
    assert C12 in weights and Fraction(1) in weights
    assert Fraction(1, 4) in weights  # product from skew associativity
    assert Fraction(1, 3) in weights  # derived inner weight


def test_monoid_validation():
    S = FinMetricSpace(["0", "a"], {("0", "a"): ext(1)})
    mon = TableMonoid(S, "0", {("0", "0"): "0", ("0", "a"): "a",
                               ("a", "0"): "a", ("a", "a"): "a"})
    assert mon.mult("a", "a") == "a"
    with pytest.raises(DomainError):  # broken unit law
        TableMonoid(S, "0", {("0", "0"): "0", ("0", "a"): "0",
                             ("a", "0"): "a", ("a", "a"): "a"})


def test_theory_parser_round_trips():
    th = parse_theory("sum(sum(bary, exc{1}), contr{next, 1/2})")
    assert th == markov_process_theory(C12)
    th2 = parse_theory("sum(tensor(sum(bary, exc{*}), reader{a, b}), contr{next, 1/3})")
    assert th2 == labelled_mp_theory(["a", "b"], Fraction(1, 3))
    th3 = parse_theory("sum(tensor(reader{i}, writer{q}), contr{next, 1/2})")
    assert th3 == mealy_theory(["i"], RATIONAL_LINE, C12)
    assert parse_theory("exc{a, b}") == Exc(discrete(["a", "b"]))


def test_monoid_file_parsing():
    text = """
    monoid M {
      elements: z, a;
      unit = z;
      mult(z,z) = z; mult(z,a) = a; mult(a,z) = a; mult(a,a) = a;
      d(z,a) = 1;
    }
    """
    mon = parse_monoids(text)["M"]
    assert mon.mult("a", "a") == "a"
    assert mon.dist("z", "a") == ext(1)
    th = parse_theory("writer{M}", monoids=parse_monoids(text))
    assert isinstance(th, Writer)
