"""Slow, independent reference computations the engine is checked against."""

import itertools
import math
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple


def brute_entropy(masses) -> float:
    return -sum(float(p) * math.log2(float(p)) for p in masses if p > 0)


def _marginal(cells: Dict[tuple, Fraction], idx: Sequence[int]) -> Dict[tuple, Fraction]:
    acc: Dict[tuple, Fraction] = {}
    for o, p in cells.items():
        key = tuple(o[i] for i in idx)
        acc[key] = acc.get(key, 0) + p
    return acc


def brute_cmi(cells: Dict[tuple, Fraction], x: Sequence[int], y: Sequence[int], z: Sequence[int]) -> float:
    """H(X,Z) + H(Y,Z) - H(X,Y,Z) - H(Z) on positions of the outcome tuples."""
    h = lambda idx: brute_entropy(_marginal(cells, idx).values())
    return h(list(x) + list(z)) + h(list(y) + list(z)) - h(list(x) + list(y) + list(z)) - h(list(z))


def solve_unique(columns: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> Optional[List[Fraction]]:
    """Exact Gauss-Jordan on [columns | rhs]; the solution if it exists and is unique."""
    m, k = len(rhs), len(columns)
    rows = [[Fraction(columns[j][i]) for j in range(k)] + [Fraction(rhs[i])] for i in range(m)]
    pivot_row = 0
    pivots = []
    for col in range(k):
        r = next((i for i in range(pivot_row, m) if rows[i][col] != 0), None)
        if r is None:
            return None  # dependent columns
        rows[pivot_row], rows[r] = rows[r], rows[pivot_row]
        piv = rows[pivot_row][col]
        rows[pivot_row] = [a / piv for a in rows[pivot_row]]
        for i in range(m):
            if i != pivot_row and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[pivot_row])]
        pivots.append(pivot_row)
        pivot_row += 1
    if any(rows[i][k] != 0 for i in range(pivot_row, m)):
        return None  # inconsistent
    return [rows[p][k] for p in pivots]


def feasible_by_elimination(rows: Sequence[Sequence[int]], rhs: Sequence[Fraction]) -> bool:
    """Does A w = b have a solution w >= 0?

    If it does, it has one supported on linearly independent columns, so
    trying every column subset with a unique solution is exhaustive.
    """
    n = len(rows[0])
    columns = [[row[j] for row in rows] for j in range(n)]
    rank_bound = min(n, len(rows))
    for size in range(1, rank_bound + 1):
        for subset in itertools.combinations(range(n), size):
            w = solve_unique([columns[j] for j in subset], rhs)
            if w is not None and all(v >= 0 for v in w):
                return True
    return False


def partition_entropy(prior: Dict[str, Fraction], cells: Sequence[Sequence[str]]) -> float:
    """H of the cell a context falls in."""
    return brute_entropy(sum((prior[c] for c in cell), Fraction(0)) for cell in cells)


def mixture_response(p_m: Dict[str, Fraction], response: Dict[str, Dict[str, Fraction]]) -> Dict[str, Fraction]:
    """sum_m p(m) p(o|m)."""
    acc: Dict[str, Fraction] = {}
    for m, w in p_m.items():
        for o, q in response[m].items():
            acc[o] = acc.get(o, Fraction(0)) + w * q
    return acc


def brute_statistics(
    mu: Dict[str, Fraction],
    responses: Dict[Tuple[str, str], Dict[str, Fraction]],
    contexts: Sequence[str],
    outcomes: Sequence[str],
) -> Dict[str, Dict[str, Fraction]]:
    """p(o|c) by enumerating every (lambda, o) pair."""
    stats = {c: {o: Fraction(0) for o in outcomes} for c in contexts}
    for c in contexts:
        for lam, o in itertools.product(mu, outcomes):
            stats[c][o] += mu[lam] * responses[(c, lam)].get(o, Fraction(0))
    return stats
