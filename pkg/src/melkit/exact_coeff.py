"""Exact coefficients over the field spanned by {pi, sqrt(2), 1}.

All rational arithmetic goes through :class:`fractions.Fraction`.  The Gamma
ratios appearing in the small-h expansions of the Abelian integrals are
reduced to factorials and double factorials, so nothing here is ever rounded.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import math
from math import factorial
from typing import Iterable, Sequence

import mpmath

__all__ = [
    "ExactCoeff",
    "HalfPowerSeries",
    "double_factorial",
    "tilde_b",
    "b_coeff",
    "c_coeff",
    "zb_chain_coeffs",
    "evaluate",
    "to_decimal",
    "format_rational",
]

Rational = Fraction


def _q(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a Fraction, int or 'p/q' string")
    return Fraction(x)


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class ExactCoeff:
    """Value ``pi_part*pi + rt2_part*sqrt(2) + unit_part``.

    pi, sqrt(2) and 1 are linearly independent over Q, so the value is zero
    exactly when all three parts are zero.
    """

    pi_part: Fraction = Fraction(0)
    rt2_part: Fraction = Fraction(0)
    unit_part: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "pi_part", _q(self.pi_part))
        object.__setattr__(self, "rt2_part", _q(self.rt2_part))
        object.__setattr__(self, "unit_part", _q(self.unit_part))

    @classmethod
    def pi(cls, q=1) -> "ExactCoeff":
        return cls(pi_part=_q(q))

    @classmethod
    def rt2(cls, q=1) -> "ExactCoeff":
        return cls(rt2_part=_q(q))

    @classmethod
    def rational(cls, q) -> "ExactCoeff":
        return cls(unit_part=_q(q))

    @classmethod
    def zero(cls) -> "ExactCoeff":
        return _ZERO

    def parts(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.pi_part, self.rt2_part, self.unit_part)

    def __bool__(self) -> bool:
        return bool(self.pi_part or self.rt2_part or self.unit_part)

    def __add__(self, other: "ExactCoeff") -> "ExactCoeff":
        if not isinstance(other, ExactCoeff):
            if isinstance(other, (int, Fraction)):
                other = ExactCoeff.rational(other)
            else:
                return NotImplemented
        return ExactCoeff(self.pi_part + other.pi_part,
                          self.rt2_part + other.rt2_part,
                          self.unit_part + other.unit_part)

    __radd__ = __add__

    def __neg__(self) -> "ExactCoeff":
        return ExactCoeff(-self.pi_part, -self.rt2_part, -self.unit_part)

    def __sub__(self, other: "ExactCoeff") -> "ExactCoeff":
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, q) -> "ExactCoeff":
        # scaling by a rational only; products of irrational parts leave the field
        if isinstance(q, ExactCoeff):
            if q.pi_part == 0 and q.rt2_part == 0:
                q = q.unit_part
            elif self.pi_part == 0 and self.rt2_part == 0:
                return q * self.unit_part
            else:
                raise TypeError("product of two irrational ExactCoeff values is not representable")
        if not isinstance(q, (int, Fraction)):
            return NotImplemented
        return ExactCoeff(self.pi_part * q, self.rt2_part * q, self.unit_part * q)

    __rmul__ = __mul__

    def __truediv__(self, q) -> "ExactCoeff":
        if not isinstance(q, (int, Fraction)):
            return NotImplemented
        q = Fraction(q)
        return ExactCoeff(self.pi_part / q, self.rt2_part / q, self.unit_part / q)

    def kind(self) -> str:
        """Which single part is nonzero: 'pi', 'rt2', 'unit', 'zero' or 'mixed'."""
        nz = [name for name, v in zip(("pi", "rt2", "unit"), self.parts()) if v]
        if not nz:
            return "zero"
        return nz[0] if len(nz) == 1 else "mixed"

    def rational_factor(self) -> Fraction:
        """The rational multiplier of a pure pi, sqrt2 or rational value."""
        k = self.kind()
        if k == "mixed":
            raise ValueError(f"{self} is not a rational multiple of a single basis element")
        if k == "zero":
            return Fraction(0)
        return {"pi": self.pi_part, "rt2": self.rt2_part, "unit": self.unit_part}[k]

    def __float__(self) -> float:
        return (float(self.pi_part) * math.pi + float(self.rt2_part) * math.sqrt(2.0)
                + float(self.unit_part))

    def __str__(self) -> str:
        items = []
        for q, sym in ((self.pi_part, "pi"), (self.rt2_part, "sqrt2")):
            if q:
                items.append(f"{format_rational(q)}*{sym}")
        if self.unit_part:
            items.append(format_rational(self.unit_part))
        if not items:
            return "0"
        out = items[0]
        for it in items[1:]:
            out += " - " + it[1:] if it.startswith("-") else " + " + it
        return out

    @classmethod
    def parse(cls, text: str) -> "ExactCoeff":
        """Inverse of ``str``: accepts e.g. ``"1/4*pi + -2*sqrt2 + 3/7"``."""
        text = text.replace(" ", "")
        if text in ("", "0"):
            return _ZERO
        # re-split on signs that start a new term
        terms, cur = [], ""
        for ch in text:
            if ch in "+-" and cur and cur[-1] not in "+-*/":
                terms.append(cur)
                cur = "" if ch == "+" else "-"
            else:
                cur += ch
        terms.append(cur)
        pi = rt2 = unit = Fraction(0)
        for t in terms:
            t = t.replace("+-", "-").lstrip("+")
            if t.endswith("*pi"):
                pi += Fraction(t[:-3])
            elif t.endswith("*sqrt2"):
                rt2 += Fraction(t[:-6])
            elif t in ("pi", "-pi"):
                pi += 1 if t == "pi" else -1
            elif t in ("sqrt2", "-sqrt2"):
                rt2 += 1 if t == "sqrt2" else -1
            else:
                unit += Fraction(t)
        return cls(pi, rt2, unit)

    def to_json(self) -> dict:
        return {
            "pi_part": format_rational(self.pi_part),
            "rt2_part": format_rational(self.rt2_part),
            "unit_part": format_rational(self.unit_part),
        }

    @classmethod
    def from_json(cls, d: dict) -> "ExactCoeff":
        return cls(Fraction(d["pi_part"]), Fraction(d["rt2_part"]), Fraction(d["unit_part"]))


_ZERO = ExactCoeff()


def evaluate(coeff: ExactCoeff, precision: int = 17) -> mpmath.mpf:
    """Decimal value of ``coeff`` correct to ``precision`` significant digits."""
    if precision < 1:
        raise ValueError("precision must be >= 1")
    with mpmath.workdps(precision + 10):
        val = (mpmath.mpf(coeff.pi_part.numerator) / coeff.pi_part.denominator * mpmath.pi
               + mpmath.mpf(coeff.rt2_part.numerator) / coeff.rt2_part.denominator * mpmath.sqrt(2)
               + mpmath.mpf(coeff.unit_part.numerator) / coeff.unit_part.denominator)
        return +val


def to_decimal(coeff: ExactCoeff, digits: int = 10) -> str:
    """Decimal string of ``coeff`` with ``digits`` significant digits."""
    return mpmath.nstr(evaluate(coeff, digits), digits)


@lru_cache(maxsize=None)
def double_factorial(n: int) -> int:
    """n!! with the empty-product convention (-1)!! = 0!! = 1."""
    if n < -1:
        raise ValueError(f"double factorial undefined for n={n} < -1")
    out = 1
    for t in range(n, 0, -2):
        out *= t
    return out


@lru_cache(maxsize=None)
def tilde_b(k: int) -> Fraction:
    """Coefficient of the k-th term in ``8*(1 - w*h/2)**(-1/2)`` scaled as in the I/J expansions.

    ``2**(3-k) Gamma(k+1/2) / (k! Gamma(1/2)) = 8 (2k-1)!! / (4**k k!)``.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    return Fraction(8 * double_factorial(2 * k - 1), 4 ** k * factorial(k))


@lru_cache(maxsize=None)
def _b_rational(i: int, j: int, k: int) -> Fraction:
    return Fraction(double_factorial(2 * (i + k) - 1) * double_factorial(2 * j + 1),
                    2 ** (i + k + 2) * factorial(i + j + k + 1))


def b_coeff(i: int, j: int, k: int) -> ExactCoeff:
    """``2**(j-1) Gamma(i+k+1/2) Gamma(j+3/2) / Gamma(i+j+k+2)``, a rational multiple of pi."""
    if min(i, j, k) < 0:
        raise ValueError("indices must be >= 0")
    return ExactCoeff(pi_part=_b_rational(i, j, k))


@lru_cache(maxsize=None)
def _c_rational(i: int, j: int, k: int) -> Fraction:
    # 2**(j-5/2) G(i+k+1/2) G(j+1) / G(i+j+k+3/2) = sqrt2 * 2**(2j-2) j! (2(i+k)-1)!! / (2(i+j+k)+1)!!
    return Fraction(2 ** (2 * j) * factorial(j) * double_factorial(2 * (i + k) - 1),
                    4 * double_factorial(2 * (i + j + k) + 1))


def c_coeff(i: int, j: int, k: int) -> ExactCoeff:
    """``2**(j-5/2) Gamma(i+k+1/2) Gamma(j+1) / Gamma(i+j+k+3/2)``, a rational multiple of sqrt(2)."""
    if i < 0 or k < 0:
        raise ValueError("i, k must be >= 0")
    if j < 1:
        raise ValueError("j must be >= 1")
    return ExactCoeff(rt2_part=_c_rational(i, j, k))


@lru_cache(maxsize=None)
def zb_chain_coeffs(i: int, j: int) -> tuple[Fraction, Fraction]:
    """The chain coefficients ``(c_ij, e_ij)`` of the iterated integration-by-parts identity."""
    if i < 0 or j < 0:
        raise ValueError("indices must be >= 0")
    num = factorial(i + j) * double_factorial(2 * i - 1)
    c = Fraction(num, factorial(i) * double_factorial(2 * i + 2 * j + 3))
    e = Fraction(num, factorial(i) * double_factorial(2 * i + 2 * j + 1))
    return c, e


@dataclass(frozen=True)
class HalfPowerSeries:
    """Truncated expansion ``sum_k coeffs[k] * h**((base_half_exponent + k)/2)``.

    Coefficients are exact for every half-exponent below
    ``base_half_exponent + order`` (``order == len(coeffs)``).  Binary
    operations align exponents and truncate to the shorter horizon.

    ``identically_zero`` marks a series known to vanish to all orders (as
    opposed to one whose computed coefficients happen to be zero).
    """

    base_half_exponent: int
    coeffs: tuple[ExactCoeff, ...]
    identically_zero: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @property
    def horizon(self) -> int:
        """First half-exponent whose coefficient is not known."""
        return self.base_half_exponent + self.order

    @classmethod
    def zero(cls, base_half_exponent: int, order: int, identically: bool = False) -> "HalfPowerSeries":
        return cls(base_half_exponent, (_ZERO,) * order, identically)

    def coefficient(self, half_exponent: int) -> ExactCoeff:
        if half_exponent >= self.horizon:
            raise IndexError(f"h^({half_exponent}/2) lies beyond the truncation horizon {self.horizon}")
        k = half_exponent - self.base_half_exponent
        return self.coeffs[k] if k >= 0 else _ZERO

    def _aligned(self, other: "HalfPowerSeries"):
        base = min(self.base_half_exponent, other.base_half_exponent)
        top = min(self.horizon, other.horizon)
        a = [self.coefficient(e) if e >= self.base_half_exponent else _ZERO for e in range(base, top)]
        b = [other.coefficient(e) if e >= other.base_half_exponent else _ZERO for e in range(base, top)]
        return base, a, b

    def __add__(self, other: "HalfPowerSeries") -> "HalfPowerSeries":
        if not isinstance(other, HalfPowerSeries):
            return NotImplemented
        base, a, b = self._aligned(other)
        return HalfPowerSeries(base, tuple(x + y for x, y in zip(a, b)),
                               self.identically_zero and other.identically_zero)

    def __neg__(self) -> "HalfPowerSeries":
        return HalfPowerSeries(self.base_half_exponent, tuple(-c for c in self.coeffs), self.identically_zero)

    def __sub__(self, other: "HalfPowerSeries") -> "HalfPowerSeries":
        return self + (-other)

    def __mul__(self, q) -> "HalfPowerSeries":
        if not isinstance(q, (int, Fraction)):
            return NotImplemented
        return HalfPowerSeries(self.base_half_exponent, tuple(c * q for c in self.coeffs),
                               self.identically_zero or q == 0)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, HalfPowerSeries):
            return NotImplemented
        if self.horizon != other.horizon:
            return False
        _, a, b = self._aligned(other)
        return a == b

    def __hash__(self):
        return hash((self.horizon, tuple(c for c in self.coeffs if c)))

    def truncate(self, horizon: int) -> "HalfPowerSeries":
        horizon = max(self.base_half_exponent, min(horizon, self.horizon))
        return HalfPowerSeries(self.base_half_exponent,
                               self.coeffs[: horizon - self.base_half_exponent], self.identically_zero)

    def is_zero(self) -> bool:
        """True when every computed coefficient vanishes."""
        return not any(self.coeffs)

    def leading(self) -> tuple[int, ExactCoeff] | None:
        for k, c in enumerate(self.coeffs):
            if c:
                return self.base_half_exponent + k, c
        return None

    def terms(self) -> Iterable[tuple[int, ExactCoeff]]:
        for k, c in enumerate(self.coeffs):
            if c:
                yield self.base_half_exponent + k, c

    def ladder(self, parity: int) -> list[ExactCoeff]:
        """Coefficients on half-exponents of the given parity (0: integer powers, 1: half-integer)."""
        return [c for k, c in enumerate(self.coeffs) if (self.base_half_exponent + k) % 2 == parity]

    def evaluate(self, h, digits: int = 17):
        """Sum of the truncated series at ``h`` (mpmath value)."""
        with mpmath.workdps(digits + 10):
            hh = mpmath.mpf(h)
            rh = mpmath.sqrt(hh)
            total = mpmath.mpf(0)
            for e, c in self.terms():
                total += evaluate(c, digits + 5) * rh ** e
            return +total

    def __call__(self, h: float) -> float:
        """Double-precision sum of the truncated series."""
        rh = math.sqrt(h)
        return math.fsum(float(c) * rh ** e for e, c in self.terms())

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        out = []
        for e, c in self.terms():
            out.append(_term_str(c, e))
        s = out[0]
        for t in out[1:]:
            s += " - " + t[1:] if t.startswith("-") else " + " + t
        return s

    def to_json(self, digits: int = 17) -> list[dict]:
        rows = []
        for k, c in enumerate(self.coeffs):
            row = {"half_exponent": self.base_half_exponent + k}
            row.update(c.to_json())
            row["decimal"] = mpmath.nstr(evaluate(c, digits), digits)
            rows.append(row)
        return rows

    @classmethod
    def from_json(cls, rows: Sequence[dict]) -> "HalfPowerSeries":
        if not rows:
            raise ValueError("empty series")
        base = rows[0]["half_exponent"]
        coeffs = []
        for k, row in enumerate(rows):
            if row["half_exponent"] != base + k:
                raise ValueError("half exponents must be consecutive")
            coeffs.append(ExactCoeff.from_json(row))
        return cls(base, tuple(coeffs))


def _power_str(e: int) -> str:
    if e == 0:
        return ""
    if e % 2 == 0:
        p = e // 2
        return "h" if p == 1 else f"h^{p}"
    return f"h^({e}/2)"


def _term_str(c: ExactCoeff, e: int) -> str:
    hp = _power_str(e)
    kind = c.kind()
    if kind in ("pi", "rt2"):
        q = c.rational_factor()
        sym = "pi" if kind == "pi" else "sqrt2"
        body = f"{format_rational(q)}*{sym}"
    elif kind == "unit":
        body = format_rational(c.unit_part)
    else:
        body = f"({c})"
    return f"{body}*{hp}" if hp else body
