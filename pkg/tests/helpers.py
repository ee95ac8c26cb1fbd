"""Shared random generators for the test suite (seeded, deterministic)."""

import random
from fractions import Fraction

from quantalg import (App, Bary, Contract, Exc, FinDist, FinMetricSpace,
                      Reader, Semi, Var, Writer, app, atoms, conv, empty_op,
                      ext, next_op, raise_, read, union_op, write)
from quantalg.extvalue import INF


def rational(rng: random.Random, max_den: int = 8, max_num: int = 4) -> Fraction:
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(1, max_num * den), den)


def weight(rng: random.Random, max_den: int = 6) -> Fraction:
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(0, den), den)


def random_space(rng: random.Random, points, max_den: int = 8,
                 inf_prob: float = 0.0) -> FinMetricSpace:
    """Random metric: sample symmetric positive entries, then take the
    shortest-path closure so the triangle inequality holds."""
    points = list(points)
    n = len(points)
    d = {}
    for i in range(n):
        for j in range(i + 1, n):
            if inf_prob and rng.random() < inf_prob:
                d[(i, j)] = INF
            else:
                d[(i, j)] = ext(rational(rng, max_den))

    def get(i, j):
        if i == j:
            return ext(0)
        return d[(min(i, j), max(i, j))]

    for k in range(n):
        for i in range(n):
            for j in range(i + 1, n):
                via = get(i, k) + get(k, j)
                if via < get(i, j):
                    d[(i, j)] = via
    table = {(points[i], points[j]): get(i, j)
             for i in range(n) for j in range(i + 1, n)}
    return FinMetricSpace(points, table)


def random_dist(rng: random.Random, points, max_den: int = 12) -> FinDist:
    """Random distribution over a nonempty subset with denominator <= max_den."""
    den = rng.randint(1, max_den)
    support = [p for p in points if rng.random() < 0.7]
    if not support:
        support = [rng.choice(list(points))]
    cuts = sorted(rng.randint(0, den) for _ in range(len(support) - 1))
    weights = []
    prev = 0
    for c in cuts + [den]:
        weights.append(Fraction(c - prev, den))
        prev = c
    return FinDist.from_pairs(
        [(p, w) for p, w in zip(support, weights) if w > 0])


def random_term(rng: random.Random, th, leaf_vars, depth: int):
    """Random well-formed term over th's signature with the given leaves."""
    choices = []
    exc_labels = []
    for atom in atoms(th):
        if isinstance(atom, Bary):
            choices.append("conv")
        elif isinstance(atom, Semi):
            choices.extend(["union", "empty"])
        elif isinstance(atom, Exc):
            exc_labels = list(atom.space.points)
        elif isinstance(atom, Reader):
            choices.append(("read", atom.inputs))
        elif isinstance(atom, Writer):
            choices.append(("write", atom.monoid))
        elif isinstance(atom, Contract):
            choices.append(("next", atom.name, atom.c))

    def leaf():
        opts = []
        if leaf_vars:
            opts.append("var")
        if exc_labels:
            opts.append("raise")
        kind = rng.choice(opts)
        if kind == "var":
            return Var(rng.choice(leaf_vars))
        return app(raise_(rng.choice(exc_labels)))

    def go(k):
        if k == 0 or (k < depth and rng.random() < 0.25):
            return leaf()
        pick = rng.choice(choices)
        if pick == "conv":
            return App(conv(weight(rng)), (go(k - 1), go(k - 1)))
        if pick == "union":
            return App(union_op(), (go(k - 1), go(k - 1)))
        if pick == "empty":
            return app(empty_op())
        if pick[0] == "read":
            return App(read(len(pick[1])), tuple(go(k - 1) for _ in pick[1]))
        if pick[0] == "write":
            mon = pick[1]
            alpha = rational(rng, 4) if mon.elements is None else rng.choice(list(mon.elements))
            return App(write(alpha), (go(k - 1),))
        if pick[0] == "next":
            return App(next_op(pick[1], pick[2]), (go(k - 1),))
        raise AssertionError(pick)

    return go(depth)


def random_coalgebra(rng: random.Random, kind: str, n_states: int = 3,
                     c: Fraction = Fraction(1, 2), actions=("a", "b"),
                     inputs=("i", "j"), max_den: int = 6):
    """Random closed system of the given kind."""
    from quantalg import BOT, Coalgebra, RATIONAL_LINE, state_target

    states = [f"s{k}" for k in range(n_states)]

    def row(allow_bot=True):
        targets = [state_target(s) for s in states] + ([BOT] if allow_bot else [])
        support = rng.sample(targets, rng.randint(1, min(3, len(targets))))
        den = rng.randint(1, max_den)
        cuts = sorted(rng.randint(0, den) for _ in range(len(support) - 1))
        weights, prev = [], 0
        for cut in cuts + [den]:
            weights.append(Fraction(cut - prev, den))
            prev = cut
        pairs = [(t, w) for t, w in zip(support, weights) if w > 0]
        return FinDist.from_pairs(pairs, key=lambda t: t)

    if kind == "mp":
        trans = {s: row() for s in states}
        return Coalgebra("mp", c, states, trans)
    if kind == "lmp":
        trans = {(s, a): row() for s in states for a in actions}
        return Coalgebra("lmp", c, states, trans, actions=actions)
    if kind == "mealy":
        trans = {(s, i): (state_target(rng.choice(states)), rational(rng, 4))
                 for s in states for i in inputs}
        return Coalgebra("mealy", c, states, trans, inputs=inputs,
                         monoid=RATIONAL_LINE)
    if kind == "mdp":
        def mdp_row():
            base = row(allow_bot=False)
            return FinDist.from_pairs(
                [((t, Fraction(rng.randint(0, 3))), w) for t, w in base.items],
                key=lambda k: (k[0], k[1]))
        trans = {(s, a): mdp_row() for s in states for a in actions}
        return Coalgebra("mdp", c, states, trans, actions=actions)
    raise AssertionError(kind)
