"""Trigonometric perturbation data.

A smooth perturbation is ``Q(x, y) = sum_{s=s1}^{s2} Q_s(x) y**s`` with

    Q_s(x) = sum_{i=0}^{n} a[i][s] cos(x)**i + sin(x) sum_{i=0}^{n-1} a_tilde[i][s] cos(x)**i.

Tables are stored row-per-``i`` with column ``s - s1``.  A piecewise
perturbation carries one such table for ``y > 0`` and one for ``y < 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "SmoothPerturbation",
    "PiecewisePerturbation",
    "cos_to_shifted",
    "shifted_to_cos",
]


def _table(rows, nrows: int, ncols: int, name: str) -> tuple[tuple[Fraction, ...], ...]:
    if rows is None:
        return tuple((Fraction(0),) * ncols for _ in range(nrows))
    rows = [list(r) for r in rows]
    if len(rows) != nrows:
        raise ValueError(f"{name}: expected {nrows} rows (one per cos power), got {len(rows)}")
    out = []
    for i, r in enumerate(rows):
        if len(r) != ncols:
            raise ValueError(f"{name}[{i}]: expected {ncols} entries (one per y power), got {len(r)}")
        out.append(tuple(Fraction(v) for v in r))
    return tuple(out)


def cos_to_shifted(a: Sequence) -> list[Fraction]:
    """Rewrite ``sum a_i cos^i`` as ``sum c_t (1 - cos)^t``."""
    n = len(a) - 1
    out = [Fraction(0)] * (n + 1)
    for i, ai in enumerate(a):
        ai = Fraction(ai)
        if not ai:
            continue
        # cos^i = (1 - w)^i
        for t in range(i + 1):
            out[t] += ai * comb(i, t) * (-1) ** t
    return out


def shifted_to_cos(c: Sequence) -> list[Fraction]:
    """Inverse of :func:`cos_to_shifted`."""
    n = len(c) - 1
    out = [Fraction(0)] * (n + 1)
    for t, ct in enumerate(c):
        ct = Fraction(ct)
        if not ct:
            continue
        for i in range(t + 1):
            out[i] += ct * comb(t, i) * (-1) ** i
    return out


@dataclass(frozen=True)
class SmoothPerturbation:
    n: int
    s1: int
    s2: int
    a: tuple[tuple[Fraction, ...], ...] = None
    a_tilde: tuple[tuple[Fraction, ...], ...] = None

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if not 1 <= self.s1 <= self.s2:
            raise ValueError(f"need 1 <= s1 <= s2, got s1={self.s1}, s2={self.s2}")
        w = self.s2 - self.s1 + 1
        object.__setattr__(self, "a", _table(self.a, self.n + 1, w, "a"))
        object.__setattr__(self, "a_tilde", _table(self.a_tilde, self.n, w, "a_tilde"))

    @property
    def powers(self) -> range:
        return range(self.s1, self.s2 + 1)

    def cos_coeffs(self, s: int) -> list[Fraction]:
        """Coefficients of the even part ``sum a_i cos^i`` for power ``s``."""
        if s not in self.powers:
            return [Fraction(0)] * (self.n + 1)
        return [row[s - self.s1] for row in self.a]

    def sin_coeffs(self, s: int) -> list[Fraction]:
        if s not in self.powers:
            return [Fraction(0)] * self.n
        return [row[s - self.s1] for row in self.a_tilde]

    @classmethod
    def zero(cls, n: int, s1: int, s2: int) -> "SmoothPerturbation":
        return cls(n, s1, s2)

    @classmethod
    def from_cos_basis(cls, n: int, s1: int, s2: int,
                       shifted: Mapping[int, Sequence], a_tilde=None) -> "SmoothPerturbation":
        """Build from coefficients in the ``(1 - cos x)^i`` basis, keyed by y power."""
        w = s2 - s1 + 1
        a = [[Fraction(0)] * w for _ in range(n + 1)]
        for s, c in shifted.items():
            if not s1 <= s <= s2:
                raise ValueError(f"power {s} outside [{s1}, {s2}]")
            if len(c) > n + 1:
                raise ValueError(f"power {s}: {len(c)} coefficients exceed degree n={n}")
            col = shifted_to_cos(list(c) + [0] * (n + 1 - len(c)))
            for i, v in enumerate(col):
                a[i][s - s1] = v
        return cls(n, s1, s2, a, a_tilde)

    def scaled(self, q) -> "SmoothPerturbation":
        q = Fraction(q)
        return SmoothPerturbation(self.n, self.s1, self.s2,
                                  [[v * q for v in r] for r in self.a],
                                  [[v * q for v in r] for r in self.a_tilde])

    def max_abs(self) -> Fraction:
        vals = [abs(v) for r in self.a + self.a_tilde for v in r]
        return max(vals, default=Fraction(0))

    def is_zero(self) -> bool:
        return self.max_abs() == 0

    def _float_tables(self):
        w = self.s2 - self.s1 + 1
        a = np.array([[float(v) for v in r] for r in self.a], dtype=float).reshape(self.n + 1, w)
        at = np.array([[float(v) for v in r] for r in self.a_tilde], dtype=float).reshape(self.n, w)
        return a, at

    def __call__(self, x, y):
        """Evaluate ``Q(x, y)`` in double precision (numpy broadcasting)."""
        a, at = self._float_tables()
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        c, s = np.cos(x), np.sin(x)
        total = np.zeros(np.broadcast(x, y).shape)
        for col, p in enumerate(self.powers):
            even = np.polynomial.polynomial.polyval(c, a[:, col])
            odd = np.polynomial.polynomial.polyval(c, at[:, col]) if self.n > 0 else 0.0
            total = total + (even + s * odd) * y ** p
        return total

    def trig_evaluator(self):
        """Scalar closure ``(cos x, sin x, y) -> Q`` (Horner in cos x)."""
        a, at = self._float_tables()
        pw = list(self.powers)
        ar = [a[:, k][::-1].tolist() for k in range(len(pw))]
        atr = [at[:, k][::-1].tolist() for k in range(len(pw))]

        def q(c: float, s: float, y: float) -> float:
            total = 0.0
            for k, p in enumerate(pw):
                ev = 0.0
                for v in ar[k]:
                    ev = ev * c + v
                od = 0.0
                for v in atr[k]:
                    od = od * c + v
                total += (ev + s * od) * y ** p
            return total

        return q

    def evaluator(self):
        """Scalar closure ``(x, y) -> Q`` for ODE right-hand sides."""
        q = self.trig_evaluator()
        return lambda x, y: q(math.cos(x), math.sin(x), y)


@dataclass(frozen=True)
class PiecewisePerturbation:
    """``Q = Q_plus`` on ``y > 0`` (powers s1..s2), ``Q_minus`` on ``y < 0`` (powers s1..s3)."""

    n: int
    s1: int
    s2: int
    s3: int
    plus: SmoothPerturbation = None
    minus: SmoothPerturbation = None

    def __post_init__(self):
        if min(self.s1, self.s2, self.s3) < 1:
            raise ValueError("s1, s2, s3 must be >= 1")
        plus = self.plus if self.plus is not None else SmoothPerturbation.zero(self.n, self.s1, self.s2)
        minus = self.minus if self.minus is not None else SmoothPerturbation.zero(self.n, self.s1, self.s3)
        if (plus.n, plus.s1, plus.s2) != (self.n, self.s1, self.s2):
            raise ValueError("plus side must have degree n and powers s1..s2")
        if (minus.n, minus.s1, minus.s2) != (self.n, self.s1, self.s3):
            raise ValueError("minus side must have degree n and powers s1..s3")
        object.__setattr__(self, "plus", plus)
        object.__setattr__(self, "minus", minus)

    @property
    def s_hat(self) -> int:
        return max(self.s2, self.s3)

    def scaled(self, q) -> "PiecewisePerturbation":
        return PiecewisePerturbation(self.n, self.s1, self.s2, self.s3,
                                     self.plus.scaled(q), self.minus.scaled(q))

    def max_abs(self) -> Fraction:
        return max(self.plus.max_abs(), self.minus.max_abs())

    def is_zero(self) -> bool:
        return self.max_abs() == 0

    def __call__(self, x, y):
        y = np.asarray(y, dtype=float)
        return np.where(y > 0, self.plus(x, y), self.minus(x, y))
