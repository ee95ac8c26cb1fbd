import random
from fractions import Fraction

import pytest

from quantalg import (FinDist, FinMetricSpace, box, coproduct, discrete,
                      hausdorff, kantorovich, parse_spaces, power, rescale)
from quantalg.errors import DomainError
from quantalg.extvalue import INF, ZERO, ext

from helpers import random_dist, random_space
from oracles import enumerate_transport


def test_discrete():
    X = discrete(["a"])
    assert X.d("a", "a") == ZERO
    Y = discrete(["a", "b"])
    assert Y.d("a", "b") == INF
    with pytest.raises(DomainError):
        discrete([])
    with pytest.raises(DomainError):
        discrete(["a", "a"])


def test_metric_validation():
    with pytest.raises(DomainError):  # triangle violation
        FinMetricSpace(["a", "b", "c"],
                       {("a", "b"): ext(1), ("b", "c"): ext(1), ("a", "c"): ext(5)})
    with pytest.raises(DomainError):  # separation
        FinMetricSpace(["a", "b"], {("a", "b"): ZERO})


def test_rescale():
    X = FinMetricSpace(["x", "y"], {("x", "y"): ext(1)})
    assert rescale(Fraction(1, 2), X).d("x", "y") == ext("1/2")
    with pytest.raises(DomainError):
        rescale(2, X)


def test_coproduct_cross_distance_infinite():
    X = FinMetricSpace(["x", "y"], {("x", "y"): ext(1)})
    Y = discrete(["a"])
    Z = coproduct(X, Y)
    assert Z.d("l.x", "l.y") == ext(1)
    assert Z.d("l.x", "r.a") == INF


def test_box_is_sum_metric():
    X = FinMetricSpace(["x", "y"], {("x", "y"): ext(1)})
    L = FinMetricSpace(["a", "b"], {("a", "b"): ext("1/2")})
    B = box(X, L)
    assert B.d("(x,a)", "(y,b)") == ext("3/2")
    assert B.d("(x,a)", "(x,b)") == ext("1/2")


def test_power_is_sup_metric():
    X = FinMetricSpace(["x", "y"], {("x", "y"): ext(3)})
    P = power(X, ["i", "j"])
    assert P.d("<x,y>", "<y,y>") == ext(3)
    assert P.d("<x,y>", "<x,y>") == ZERO
    assert len(P.points) == 4


def test_hausdorff_examples():
    X = FinMetricSpace(["x", "y"], {("x", "y"): ext(2)})
    assert hausdorff(X, ["x", "y"], ["x", "y"]) == ZERO
    assert hausdorff(X, ["x"], ["x", "y"]) == ext(2)
    assert hausdorff(X, [], ["x"]) == INF
    assert hausdorff(X, [], []) == ZERO


def test_hausdorff_union_bound():
    # soundness of the semilattice congruence rule
    rng = random.Random(11)
    for _ in range(50):
        X = random_space(rng, ["p", "q", "r", "s"])
        pts = list(X.points)
        pick = lambda: [p for p in pts if rng.random() < 0.6]
        U, V, U2, V2 = pick(), pick(), pick(), pick()
        lhs = hausdorff(X, U + U2, V + V2)
        rhs = max(hausdorff(X, U, V), hausdorff(X, U2, V2))
        assert lhs <= rhs


def test_kantorovich_examples():
    X = FinMetricSpace(["a", "b"], {("a", "b"): ext(1)})
    mu = FinDist.from_pairs([("a", Fraction(1, 2)), ("b", Fraction(1, 2))])
    nu = FinDist.dirac("b")
    assert kantorovich(X, mu, mu) == ZERO
    assert kantorovich(X, mu, nu) == ext("1/2")
    Y = discrete(["a", "b"])
    assert kantorovich(Y, FinDist.dirac("a"), FinDist.dirac("b")) == INF
    with pytest.raises(DomainError):
        kantorovich(X, mu, FinDist.from_pairs([("a", Fraction(1, 2))]))


def test_kantorovich_dirac_recovers_ground_metric():
    rng = random.Random(5)
    for _ in range(20):
        X = random_space(rng, ["a", "b", "c"], inf_prob=0.2)
        for p in X.points:
            for q in X.points:
                assert kantorovich(X, FinDist.dirac(p), FinDist.dirac(q)) == X.d(p, q)


def test_kantorovich_matches_enumeration_oracle():
    rng = random.Random(2024)
    for _ in range(120):
        pts = ["a", "b", "c", "d"][: rng.randint(1, 4)]
        X = random_space(rng, pts, max_den=12, inf_prob=0.25)
        mu = random_dist(rng, pts, 12)
        nu = random_dist(rng, pts, 12)
        got = kantorovich(X, mu, nu)
        supplies = [w for _, w in mu.items]
        demands = [w for _, w in nu.items]
        cost = [[X.d(p, q) for q, _ in nu.items] for p, _ in mu.items]
        want = enumerate_transport(supplies, demands, cost)
        assert got == want, (pts, mu, nu)


def test_kantorovich_pseudometric_laws():
    rng = random.Random(99)
    for _ in range(40):
        pts = ["a", "b", "c", "d"]
        X = random_space(rng, pts, max_den=6)
        mus = [random_dist(rng, pts, 6) for _ in range(3)]
        for m in mus:
            assert kantorovich(X, m, m) == ZERO
        d01 = kantorovich(X, mus[0], mus[1])
        assert d01 == kantorovich(X, mus[1], mus[0])
        d12 = kantorovich(X, mus[1], mus[2])
        d02 = kantorovich(X, mus[0], mus[2])
        assert d02 <= d01 + d12


def test_kantorovich_convexity_bound():
    # soundness of the interpolative congruence rule, exactly
    rng = random.Random(17)
    for _ in range(30):
        pts = ["a", "b", "c"]
        X = random_space(rng, pts, max_den=6)
        mu1, nu1 = random_dist(rng, pts, 6), random_dist(rng, pts, 6)
        mu2, nu2 = random_dist(rng, pts, 6), random_dist(rng, pts, 6)
        e = Fraction(rng.randint(0, 4), 4)
        mix = lambda a, b: FinDist.from_pairs(
            [(p, w * e) for p, w in a.items] + [(p, w * (1 - e)) for p, w in b.items])
        if e in (0, 1):
            continue
        lhs = kantorovich(X, mix(mu1, mu2), mix(nu1, nu2))
        rhs = kantorovich(X, mu1, nu1).scaled(e) + kantorovich(X, mu2, nu2).scaled(1 - e)
        assert lhs <= rhs


def test_space_file_parsing():
    text = """
    space S {
      points: p, q, r;
      d(p,q) = 1/2;
      d(q,r) = 1/2;
      d(p,r) = 1;
    }
    """
    S = parse_spaces(text)["S"]
    assert S.d("q", "p") == ext("1/2")
    # unspecified pairs default to INF
    T = parse_spaces("space T { points: a, b; }")["T"]
    assert T.d("a", "b") == INF


def test_transport_simplex_against_float_lp_on_larger_instances():
    scipy_opt = pytest.importorskip("scipy.optimize")
    import numpy as np

    rng = random.Random(71)
    for _ in range(40):
        m, n = rng.randint(2, 7), rng.randint(2, 7)
        pts_m = [f"a{i}" for i in range(m)]
        pts_n = [f"b{j}" for j in range(n)]
        X = random_space(rng, pts_m + pts_n, max_den=9)
        mu = random_dist(rng, pts_m, 10)
        nu = random_dist(rng, pts_n, 10)
        got = kantorovich(X, mu, nu)
        # float LP cross-check
        sup = [float(w) for _, w in mu.items]
        dem = [float(w) for _, w in nu.items]
        cost = np.array([[float(X.d(p, q).rational) for q, _ in nu.items]
                         for p, _ in mu.items])
        mm, nn = cost.shape
        A_eq = []
        for i in range(mm):
            row = np.zeros_like(cost)
            row[i, :] = 1
            A_eq.append(row.ravel())
        for j in range(nn):
            row = np.zeros_like(cost)
            row[:, j] = 1
            A_eq.append(row.ravel())
        res = scipy_opt.linprog(cost.ravel(), A_eq=np.array(A_eq)[:-1],
                                b_eq=np.array(sup + dem)[:-1],
                                bounds=[(0, None)] * (mm * nn), method="highs")
        assert res.success
        assert abs(float(got.rational) - res.fun) < 1e-9
