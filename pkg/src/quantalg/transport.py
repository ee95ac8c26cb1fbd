"""Exact transportation problem solver over rationals.

Costs live in a two-component "big-M" arithmetic: a cost is a pair
(m, q) meaning m*M + q for an infinitely large M.  Forbidden cells
(infinite ground distance) get cost (1, 0); the optimum is infinite
exactly when its m-component is positive, i.e. when every feasible
coupling puts mass on a forbidden cell.  Pairs of Fractions add
componentwise and compare lexicographically, which Python tuples do
natively.

The solver is the classical primal transportation simplex on a spanning
tree basis, with Bland's rule on both the entering and leaving choices
to prevent cycling.  Everything is exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .errors import DomainError
from .extvalue import INF, ExtValue

Cost = Tuple[Fraction, Fraction]

_ZERO: Cost = (Fraction(0), Fraction(0))
_FORBIDDEN: Cost = (Fraction(1), Fraction(0))


def _cost_of(d: ExtValue) -> Cost:
    return _FORBIDDEN if d.is_inf else (Fraction(0), d.rational)


def _add(a: Cost, b: Cost) -> Cost:
    return (a[0] + b[0], a[1] + b[1])


def _sub(a: Cost, b: Cost) -> Cost:
    return (a[0] - b[0], a[1] - b[1])


def _scale(a: Cost, t: Fraction) -> Cost:
    return (a[0] * t, a[1] * t)


def min_cost_transport(
    supplies: Sequence[Fraction],
    demands: Sequence[Fraction],
    cost: Sequence[Sequence[ExtValue]],
) -> ExtValue:
    """Exact optimum of the transportation LP; INF if no finite-cost flow exists.

    supplies and demands must be positive and have equal totals.
    """
    m, n = len(supplies), len(demands)
    if m == 0 or n == 0:
        raise DomainError("transportation problem needs nonempty supports")
    if any(s <= 0 for s in supplies) or any(d <= 0 for d in demands):
        raise DomainError("supplies and demands must be positive")
    if sum(supplies) != sum(demands):
        raise DomainError(
            f"mass mismatch: supply {sum(supplies)} vs demand {sum(demands)}"
        )

    costs: List[List[Cost]] = [[_cost_of(cost[i][j]) for j in range(n)] for i in range(m)]

    if m == 1:
        total = _ZERO
        for j in range(n):
            total = _add(total, _scale(costs[0][j], demands[j]))
        return _finish(total)
    if n == 1:
        total = _ZERO
        for i in range(m):
            total = _add(total, _scale(costs[i][0], supplies[i]))
        return _finish(total)

    flow, basis = _northwest_corner(list(supplies), list(demands))

    while True:
        entering = _entering_cell(costs, basis, m, n)
        if entering is None:
            break
        _pivot(flow, basis, entering, m, n)

    total = _ZERO
    for (i, j) in basis:
        if flow[i][j]:
            total = _add(total, _scale(costs[i][j], flow[i][j]))
    return _finish(total)


def _finish(total: Cost) -> ExtValue:
    return INF if total[0] > 0 else ExtValue(total[1])


def _northwest_corner(a: List[Fraction], b: List[Fraction]):
    m, n = len(a), len(b)
    flow = [[Fraction(0)] * n for _ in range(m)]
    basis = []
    i = j = 0
    while True:
        t = min(a[i], b[j])
        flow[i][j] = t
        basis.append((i, j))
        a[i] -= t
        b[j] -= t
        if i == m - 1 and j == n - 1:
            break
        if a[i] == 0 and i < m - 1:
            i += 1
        else:
            j += 1
    return flow, basis


def _entering_cell(costs, basis, m, n) -> Optional[Tuple[int, int]]:
    u, v = _duals(costs, basis, m, n)
    in_basis = set(basis)
    for i in range(m):
        for j in range(n):
            if (i, j) in in_basis:
                continue
            reduced = _sub(costs[i][j], _add(u[i], v[j]))
            if reduced < _ZERO:
                return (i, j)  # Bland: first in row-major order
    return None


def _duals(costs, basis, m, n):
    # Solve u_i + v_j = c_ij over the spanning-tree basis.
    u: List[Optional[Cost]] = [None] * m
    v: List[Optional[Cost]] = [None] * n
    u[0] = _ZERO
    by_row = [[] for _ in range(m)]
    by_col = [[] for _ in range(n)]
    for (i, j) in basis:
        by_row[i].append(j)
        by_col[j].append(i)
    stack = [("r", 0)]
    while stack:
        side, k = stack.pop()
        if side == "r":
            for j in by_row[k]:
                if v[j] is None:
                    v[j] = _sub(costs[k][j], u[k])
                    stack.append(("c", j))
        else:
            for i in by_col[k]:
                if u[i] is None:
                    u[i] = _sub(costs[i][k], v[k])
                    stack.append(("r", i))
    assert all(x is not None for x in u) and all(x is not None for x in v)
    return u, v


def _pivot(flow, basis, entering, m, n):
    cycle = _find_cycle(basis, entering)
    # Odd positions give up flow; theta is the smallest of them.
    givers = cycle[1::2]
    theta = min(flow[i][j] for (i, j) in givers)
    leaving = min((i, j) for (i, j) in givers if flow[i][j] == theta)  # Bland
    for k, (i, j) in enumerate(cycle):
        flow[i][j] = flow[i][j] + theta if k % 2 == 0 else flow[i][j] - theta
    basis.remove(leaving)
    basis.append(entering)
    basis.sort()


def _find_cycle(basis, entering) -> List[Tuple[int, int]]:
    """The unique alternating cycle in basis + entering, starting at entering."""
    # Path in the basis tree from entering's row node to its column node.
    adj = {}
    for (i, j) in basis:
        adj.setdefault(("r", i), []).append(("c", j))
        adj.setdefault(("c", j), []).append(("r", i))
    start = ("r", entering[0])
    goal = ("c", entering[1])
    prev = {start: None}
    stack = [start]
    while stack:
        node = stack.pop()
        if node == goal:
            break
        for nxt in adj.get(node, ()):
            if nxt not in prev:
                prev[nxt] = node
                stack.append(nxt)
    assert goal in prev, "basis is not a spanning tree"
    path = [goal]
    while path[-1] != start:
        path.append(prev[path[-1]])
    path.reverse()  # r_i0, c_j1, r_i1, ..., c_j(entering)
    cells = [entering]
    for a, b in zip(path, path[1:]):
        if a[0] == "r":
            cells.append((a[1], b[1]))
        else:
            cells.append((b[1], a[1]))
    return cells
