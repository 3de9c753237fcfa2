"""Small exact linear algebra over the rationals."""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

__all__ = [
    "integer_rows",
    "bareiss_rank",
    "rref",
    "rank",
    "nullspace",
    "solve",
    "matvec",
]

Matrix = list[list[Fraction]]


def _copy(m: Sequence[Sequence]) -> Matrix:
    return [[Fraction(v) for v in row] for row in m]


def integer_rows(m: Sequence[Sequence]) -> list[list[int]]:
    """Clear denominators row by row and divide out each row's content."""
    out = []
    for row in m:
        row = [Fraction(v) for v in row]
        den = lcm(*(v.denominator for v in row)) if row else 1
        ints = [int(v * den) for v in row]
        g = 0
        for v in ints:
            g = gcd(g, v)
        out.append([v // g for v in ints] if g > 1 else ints)
    return out


def bareiss_rank(m: Sequence[Sequence]) -> tuple[int, list[str]]:
    """Rank by fraction-free (Bareiss) elimination; returns ``(rank, trace)``.

    Every intermediate entry stays an integer: the update
    ``a[i][j] = (a[k][k] a[i][j] - a[i][k] a[k][j]) / prev`` divides exactly.
    """
    a = integer_rows(m)
    rows = len(a)
    cols = len(a[0]) if rows else 0
    trace: list[str] = []
    prev = 1
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if piv is None:
            trace.append(f"col {c}: no pivot")
            continue
        if piv != r:
            a[r], a[piv] = a[piv], a[r]
            trace.append(f"swap rows {r},{piv}")
        p = a[r][c]
        for i in range(r + 1, rows):
            for j in range(c + 1, cols):
                num = p * a[i][j] - a[i][c] * a[r][j]
                q, rem = divmod(num, prev)
                assert rem == 0, "Bareiss division must be exact"
                a[i][j] = q
            a[i][c] = 0
        trace.append(f"pivot ({r},{c}) = {p}")
        prev = p
        r += 1
    return r, trace


def rref(m: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    a = _copy(m)
    rows = len(a)
    cols = len(a[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def rank(m: Sequence[Sequence]) -> int:
    return len(rref(m)[1])


def nullspace(m: Sequence[Sequence]) -> list[list[Fraction]]:
    """Basis of ``{v : m v = 0}``, one vector per free column."""
    if not m:
        return []
    cols = len(m[0])
    r, pivots = rref(m)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for row, pc in zip(r, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def solve(m: Sequence[Sequence], rhs: Sequence) -> list[Fraction]:
    """One exact solution of ``m x = rhs`` (free variables set to zero)."""
    cols = len(m[0])
    aug = [list(row) + [Fraction(b)] for row, b in zip(m, rhs)]
    r, pivots = rref(aug)
    if cols in pivots:
        raise ValueError("inconsistent linear system")
    x = [Fraction(0)] * cols
    for row, pc in zip(r, pivots):
        x[pc] = row[-1]
    return x


def matvec(m: Sequence[Sequence], v: Sequence) -> list[Fraction]:
    return [sum((Fraction(a) * b for a, b in zip(row, v)), Fraction(0)) for row in m]
