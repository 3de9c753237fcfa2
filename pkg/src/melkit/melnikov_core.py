"""Melnikov functions as exact combinations of Abelian integrals.

Basis elements (``kind``, ``i``, ``p``):

* ``I``  : ``I_{i,p}``, closed-orbit integral of ``(1-cos x)^i y^p dx``
* ``J``  : ``J_{i,p}``, the same over the upper half orbit
* ``L``  : ``L_{i,q}  = (i+1) I_{i+1,2q+1} - (2q+1) I_{i+2,2q-1}``
* ``Lt`` : ``Lt_{i,q} = (i+1) J_{i+1,2q+2} - (2q+2) J_{i+2,2q}``

For ``0 < h << 1``

    I_{i,2j+1} = h^(i+j+1)   sum_k tb_k b(i,j,k) h^k
    J_{i,2j}   = h^(i+j+1/2) sum_k tb_k c(i,j,k) h^k,     J_{i,2j+1} = I_{i,2j+1}/2,

and ``I_{i,2j} = 0`` by symmetry of the orbit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence, Union

from .exact_coeff import ExactCoeff, HalfPowerSeries, b_coeff, c_coeff, tilde_b, zb_chain_coeffs
from .exact_linalg import rank as exact_rank
from .perturbation import PiecewisePerturbation, SmoothPerturbation, cos_to_shifted
from . import quadrature

__all__ = [
    "Basis",
    "CosBasisPoly",
    "MelnikovCombination",
    "Relation",
    "CanonicalBlock",
    "CanonicalForm",
    "even_part_to_cos_basis",
    "assemble_smooth",
    "assemble_piecewise",
    "assemble",
    "rewrite_I",
    "rewrite_J",
    "reduce_to_canonical",
    "basis_series",
    "expand",
    "structural_indices",
]

KINDS = ("I", "J", "L", "Lt")


@dataclass(frozen=True, order=True)
class Basis:
    kind: str
    i: int
    p: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.i < 0 or self.p < 0:
            raise ValueError("basis indices must be >= 0")
        if self.kind in ("L", "Lt") and self.p < 1:
            raise ValueError(f"{self.kind} needs second index >= 1")

    def __str__(self) -> str:
        return f"{self.kind}_{{{self.i},{self.p}}}"

    @classmethod
    def parse(cls, text: str) -> "Basis":
        kind, rest = text.split("_", 1)
        i, p = rest.strip("{}").split(",")
        return cls(kind, int(i), int(p))

    def expanded(self) -> dict["Basis", Fraction]:
        """L / Lt written out in I / J; I and J map to themselves."""
        i, q = self.i, self.p
        if self.kind == "L":
            return {Basis("I", i + 1, 2 * q + 1): Fraction(i + 1),
                    Basis("I", i + 2, 2 * q - 1): Fraction(-(2 * q + 1))}
        if self.kind == "Lt":
            return {Basis("J", i + 1, 2 * q + 2): Fraction(i + 1),
                    Basis("J", i + 2, 2 * q): Fraction(-(2 * q + 2))}
        return {self: Fraction(1)}

    def leading_half_exponent(self) -> int | None:
        """Half-exponent of the first possibly nonzero series term (None if identically zero)."""
        i, p = self.i, self.p
        if self.kind == "I":
            return 2 * (i + (p - 1) // 2 + 1) if p % 2 else None
        if self.kind == "J":
            return 2 * (i + (p - 1) // 2 + 1) if p % 2 else 2 * (i + p // 2) + 1
        return min(e for e in (b.leading_half_exponent() for b in self.expanded()) if e is not None)

    def quad(self, h: float, tol: float = 1e-12) -> quadrature.QuadResult:
        if self.kind == "I":
            return quadrature.quad_I(self.i, self.p, h, tol)
        if self.kind == "J":
            return quadrature.quad_J(self.i, self.p, h, tol)
        out = None
        for b, c in self.expanded().items():
            r = b.quad(h, tol).scaled(float(c))
            out = r if out is None else out + r
        return out


# -- exact series of single basis elements ----------------------------------

@lru_cache(maxsize=None)
def _basis_terms(b: Basis, horizon: int) -> tuple[tuple[int, ExactCoeff], ...]:
    i, p = b.i, b.p
    out: list[tuple[int, ExactCoeff]] = []
    if b.kind == "I" or (b.kind == "J" and p % 2):
        if p % 2 == 0:
            return ()
        j = (p - 1) // 2
        half = b.kind == "J"
        k = 0
        while 2 * (i + j + 1 + k) < horizon:
            c = b_coeff(i, j, k) * tilde_b(k)
            out.append((2 * (i + j + 1 + k), c / 2 if half else c))
            k += 1
        return tuple(out)
    if b.kind == "J":
        j = p // 2
        if j < 1:
            raise ValueError("J_{i,0} has no expansion in this basis")
        k = 0
        while 2 * (i + j + k) + 1 < horizon:
            out.append((2 * (i + j + k) + 1, c_coeff(i, j, k) * tilde_b(k)))
            k += 1
        return tuple(out)
    acc: dict[int, ExactCoeff] = {}
    for sub, c in b.expanded().items():
        for e, v in _basis_terms(sub, horizon):
            acc[e] = acc.get(e, ExactCoeff()) + v * c
    return tuple(sorted((e, v) for e, v in acc.items()))


def _series_from_terms(terms: Iterable[tuple[Basis, Fraction]], base: int, horizon: int,
                       identically_zero: bool = False) -> HalfPowerSeries:
    pi: dict[int, Fraction] = {}
    rt2: dict[int, Fraction] = {}
    for b, q in terms:
        if not q:
            continue
        for e, c in _basis_terms(b, horizon):
            if e < base:
                raise ValueError(f"{b} has terms below the requested base h^({base}/2)")
            if c.pi_part:
                pi[e] = pi.get(e, 0) + c.pi_part * q
            if c.rt2_part:
                rt2[e] = rt2.get(e, 0) + c.rt2_part * q
    coeffs = tuple(ExactCoeff(pi.get(e, 0), rt2.get(e, 0)) for e in range(base, horizon))
    return HalfPowerSeries(base, coeffs, identically_zero)


def basis_series(b: Basis, order: int) -> HalfPowerSeries:
    """Exact expansion of one basis element, ``order`` integer steps past its leading power."""
    lead = b.leading_half_exponent()
    if lead is None:
        return HalfPowerSeries.zero(2, 2 * order, identically=True)
    return _series_from_terms([(b, Fraction(1))], lead, lead + 2 * order)


# -- perturbation -> combination --------------------------------------------

@dataclass(frozen=True)
class CosBasisPoly:
    """``sum_i ctilde[i] (1 - cos x)^i``."""

    ctilde: tuple[Fraction, ...]

    @property
    def degree(self) -> int:
        return len(self.ctilde) - 1


def even_part_to_cos_basis(a: Sequence, n: int | None = None) -> CosBasisPoly:
    """Drop nothing but reinterpret: ``sum a_i cos^i`` -> ``sum ct_i (1-cos)^i``.

    ``a`` holds the cos-power coefficients of the even part only; the
    ``sin x * (...)`` part is odd in ``x`` and is simply not passed in.
    """
    a = [Fraction(v) for v in a]
    if n is not None:
        if len(a) > n + 1:
            raise ValueError(f"{len(a)} coefficients exceed degree n={n}")
        a = a + [Fraction(0)] * (n + 1 - len(a))
    return CosBasisPoly(tuple(cos_to_shifted(a)))


def structural_indices(s1: int, s_top: int) -> dict[str, int]:
    """``r, m`` (odd powers ``2r+1 .. 2r+2m-1``) and ``rt, l`` (even powers ``2rt .. 2rt+2l-2``)."""
    r = s1 // 2
    m = max((s_top - 2 * r + 1) // 2, 0)
    rt = (s1 + 1) // 2
    l = max((s_top - 2 * rt + 2) // 2, 0)
    return {"r": r, "m": m, "rt": rt, "l": l}


@dataclass(frozen=True)
class MelnikovCombination:
    """Exact linear combination of basis elements.

    ``family`` is ``"smooth"`` (odd-power ``I`` terms), ``"piecewise"``
    (``J`` terms) or ``"generic"`` (anything, e.g. a single ``L`` term).
    ``n``/``s1``/``s_top`` describe the perturbation class the combination
    came from; the block layout used by the reduction is derived from them.
    """

    family: str
    terms: tuple[tuple[Basis, Fraction], ...]
    n: int = 0
    s1: int = 1
    s_top: int = 1

    def __post_init__(self):
        acc: dict[Basis, Fraction] = {}
        for b, q in self.terms:
            acc[b] = acc.get(b, Fraction(0)) + Fraction(q)
        object.__setattr__(self, "terms", tuple(sorted((b, q) for b, q in acc.items() if q)))

    @classmethod
    def single(cls, b: Basis, coeff=1) -> "MelnikovCombination":
        return cls("generic", ((b, Fraction(coeff)),))

    def as_dict(self) -> dict[Basis, Fraction]:
        return dict(self.terms)

    @property
    def indices(self) -> dict[str, int]:
        return structural_indices(self.s1, self.s_top)

    def is_empty(self) -> bool:
        return not self.terms

    def base_half_exponent(self) -> int:
        ix = self.indices
        if self.family == "smooth":
            return 2 * ix["r"] + 2
        if self.family == "piecewise":
            cands = []
            if ix["m"] > 0:
                cands.append(2 * ix["r"] + 2)
            if ix["l"] > 0:
                cands.append(2 * ix["rt"] + 1)
            return min(cands)
        leads = [b.leading_half_exponent() for b, _ in self.terms]
        leads = [e for e in leads if e is not None]
        return min(leads) if leads else 2

    def quad(self, h: float, tol: float = 1e-12) -> quadrature.QuadResult:
        out = quadrature.QuadResult(0.0, 0.0, 0)
        for b, q in self.terms:
            out = out + b.quad(h, tol).scaled(float(q))
        return out

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({q})*{b}" for b, q in self.terms)

    def to_json(self) -> dict:
        return {"family": self.family, "n": self.n, "s1": self.s1, "s_top": self.s_top,
                "terms": [{"basis": str(b), "coeff": str(q)} for b, q in self.terms]}

    @classmethod
    def from_json(cls, d: Mapping) -> "MelnikovCombination":
        return cls(d["family"], tuple((Basis.parse(t["basis"]), Fraction(t["coeff"])) for t in d["terms"]),
                   d["n"], d["s1"], d["s_top"])


def assemble_smooth(p: SmoothPerturbation) -> MelnikovCombination:
    """``M(h)`` as ``sum ct_{i,s} I_{i,s}`` over odd ``s``.

    Even powers of ``y`` integrate to zero over the orbit (it is symmetric
    under ``y -> -y``), and so do the ``sin x`` terms (symmetry ``x -> -x``).
    """
    terms = []
    for s in p.powers:
        if s % 2 == 0:
            continue
        ct = even_part_to_cos_basis(p.cos_coeffs(s)).ctilde
        terms.extend((Basis("I", i, s), c) for i, c in enumerate(ct))
    return MelnikovCombination("smooth", tuple(terms), p.n, p.s1, p.s2)


def assemble_piecewise(p: PiecewisePerturbation) -> MelnikovCombination:
    """``M(h)`` as ``sum b_{i,s} J_{i,s}`` over ``s1 <= s <= s_hat``.

    The lower arc is the mirror image of the upper one traversed backwards,
    so ``Q^-`` contributes with sign ``(-1)^(s+1)``.
    """
    terms = []
    for s in range(p.s1, p.s_hat + 1):
        sign = 1 if s % 2 else -1
        even = [u + sign * v for u, v in zip(p.plus.cos_coeffs(s), p.minus.cos_coeffs(s))]
        ct = even_part_to_cos_basis(even).ctilde
        terms.extend((Basis("J", i, s), c) for i, c in enumerate(ct))
    return MelnikovCombination("piecewise", tuple(terms), p.n, p.s1, p.s_hat)


def assemble(p: SmoothPerturbation | PiecewisePerturbation) -> MelnikovCombination:
    if isinstance(p, PiecewisePerturbation):
        return assemble_piecewise(p)
    return assemble_smooth(p)


# -- integration-by-parts relations -----------------------------------------

@dataclass(frozen=True)
class Relation:
    """``lhs = sum rhs``, exact rational coefficients."""

    lhs: Basis
    rhs: tuple[tuple[Basis, Fraction], ...]
    chain_length: int

    def as_dict(self) -> dict[Basis, Fraction]:
        return dict(self.rhs)

    def series_residual(self, order: int = 20) -> HalfPowerSeries:
        """Exact series of ``lhs - rhs``; identically zero for a true relation."""
        lead = self.lhs.leading_half_exponent()
        terms = [(self.lhs, Fraction(1))] + [(b, -q) for b, q in self.rhs]
        return _series_from_terms(terms, lead, lead + 2 * order)

    def quad_residual(self, h: float, tol: float = 1e-13) -> tuple[float, float]:
        """``(lhs - rhs, scale)`` by quadrature; ``scale`` is the sum of absolute term sizes."""
        lhs = self.lhs.quad(h, tol).value
        vals = [float(q) * b.quad(h, tol).value for b, q in self.rhs]
        return lhs - sum(vals), abs(lhs) + sum(abs(v) for v in vals)

    def __str__(self) -> str:
        return f"{self.lhs} = " + " + ".join(f"({q})*{b}" for b, q in self.rhs)


def _chain(kind: str, i: int, p0: int, k: int) -> Relation:
    # X_{i,p1} = 2 p1/(2i+1) X_{i+1,p0} - p1 sum_{j<k} c_ij X_{i+j+2,p0}
    #            + e_ik [(i+k+1) X_{i+k+1,p1} - p1 X_{i+k+2,p0}]
    p1 = p0 + 2
    rhs: dict[Basis, Fraction] = {Basis(kind, i + 1, p0): Fraction(2 * p1, 2 * i + 1)}
    for j in range(k):
        c, _ = zb_chain_coeffs(i, j)
        b = Basis(kind, i + j + 2, p0)
        rhs[b] = rhs.get(b, Fraction(0)) - p1 * c
    _, e = zb_chain_coeffs(i, k)
    for b, q in ((Basis(kind, i + k + 1, p1), e * (i + k + 1)), (Basis(kind, i + k + 2, p0), -p1 * e)):
        rhs[b] = rhs.get(b, Fraction(0)) + q
    return Relation(Basis(kind, i, p1), tuple(sorted((b, q) for b, q in rhs.items() if q)), k)


def rewrite_I(i: int, r: int, k: int = 0) -> Relation:
    """``I_{i,2r+3}`` through ``I_{i+1..i+k+2, 2r+1}`` and ``I_{i+k+1, 2r+3}``."""
    if min(i, r, k) < 0:
        raise ValueError("i, r, k must be >= 0")
    return _chain("I", i, 2 * r + 1, k)


def rewrite_J(i: int, r: int, k: int = 0) -> Relation:
    """``J_{i,2r+2}`` through ``J_{., 2r}`` and ``J_{i+k+1, 2r+2}`` (needs ``r >= 1``)."""
    if r < 1:
        raise ValueError("rewrite_J needs r >= 1 (J_{i,0} is not part of the relation family)")
    if i < 0 or k < 0:
        raise ValueError("i, k must be >= 0")
    return _chain("J", i, 2 * r, k)


# -- reduction to canonical form --------------------------------------------

def _substitute(comb: dict[Basis, Fraction], target: Basis, rhs: Mapping[Basis, Fraction]) -> None:
    v = comb.pop(target, Fraction(0))
    if not v:
        return
    for b, q in rhs.items():
        nv = comb.get(b, Fraction(0)) + v * q
        if nv:
            comb[b] = nv
        else:
            comb.pop(b, None)


def _reduce(comb: dict[Basis, Fraction], kind: str, n: int, m: int, r: int) -> dict[Basis, Fraction]:
    """Reduce a combination of ``X_{i,p}`` (``p`` on the block's ladder) to canonical form.

    Elimination order: reduce the higher powers recursively, clear
    ``X_{i,p1}`` for ``i <= n-2`` with the long chain relation, then sweep the
    single-step relation upward and close the top term into the tail.
    """
    p0 = 2 * r + 1 if kind == "I" else 2 * r
    p1 = p0 + 2
    if m == 1:
        return dict(comb)
    head = {b: v for b, v in comb.items() if b.kind == kind and b.p == p0}
    rest = {b: v for b, v in comb.items() if not (b.kind == kind and b.p == p0)}
    out = _reduce(rest, kind, n, m - 1, r + 1)
    for b, v in head.items():
        out[b] = out.get(b, Fraction(0)) + v
    chain = rewrite_I if kind == "I" else rewrite_J
    q0 = p0 // 2
    for i in range(0, n - 1):
        _substitute(out, Basis(kind, i, p1), chain(i, q0, n - 2 - i).as_dict())
    top = n + m - 2
    for i in range(max(n - 1, 0), top):
        _substitute(out, Basis(kind, i, p1), chain(i, q0, 0).as_dict())
    tail = Basis("L", top, r + 1) if kind == "I" else Basis("Lt", top, r)
    _substitute(out, Basis(kind, top, p1), {Basis(kind, top + 1, p0): Fraction(2 * p1, 2 * top + 1),
                                             tail: Fraction(1, 2 * top + 1)})
    return {b: v for b, v in out.items() if v}


def canonical_basis(kind: str, n: int, m: int, r: int) -> list[Basis]:
    """Head ``X_{i,p0}`` (``i <= n+m-1``) followed by the ``L``/``Lt`` tail."""
    p0 = 2 * r + 1 if kind == "I" else 2 * r
    if m == 1:
        return [Basis(kind, i, p0) for i in range(n + 1)]
    head = [Basis(kind, i, p0) for i in range(n + m)]
    if kind == "I":
        tail = [Basis("L", n - 1 + i, r + m - i) for i in range(1, m)]
    else:
        tail = [Basis("Lt", n - 1 + i, r + m - 1 - i) for i in range(1, m)]
    return head + tail


@lru_cache(maxsize=None)
def _block_map(kind: str, n: int, m: int, r: int) -> tuple[tuple[Basis, ...], tuple[Basis, ...], tuple]:
    """``(inputs, basis, matrix)`` with ``A = matrix @ inputs`` (exact)."""
    p0 = 2 * r + 1 if kind == "I" else 2 * r
    inputs = tuple(Basis(kind, i, p0 + 2 * j) for j in range(m) for i in range(n + 1))
    basis = tuple(canonical_basis(kind, n, m, r))
    index = {b: k for k, b in enumerate(basis)}
    cols = []
    for inp in inputs:
        red = _reduce({inp: Fraction(1)}, kind, n, m, r)
        col = [Fraction(0)] * len(basis)
        for b, v in red.items():
            if b not in index:
                raise AssertionError(f"reduction left non-canonical term {b}")
            col[index[b]] = v
        cols.append(col)
    matrix = tuple(tuple(cols[c][k] for c in range(len(inputs))) for k in range(len(basis)))
    return inputs, basis, matrix


@dataclass(frozen=True)
class CanonicalBlock:
    """One ladder of the canonical form.

    ``kind`` is ``I`` (odd powers ``2r+1 ..``) or ``J`` (even powers
    ``2r ..``).  ``matrix`` maps the input coefficients (ordered as
    ``inputs``) to ``A`` (ordered as ``basis``).  For a piecewise
    combination the odd-power ``J`` inputs are folded in with ``J = I/2``.
    """

    kind: str
    n: int
    m: int
    r: int
    inputs: tuple[Basis, ...]
    basis: tuple[Basis, ...]
    matrix: tuple[tuple[Fraction, ...], ...]
    input_values: tuple[Fraction, ...]
    A: tuple[Fraction, ...]

    @property
    def head_size(self) -> int:
        return self.n + self.m if self.m > 1 else self.n + 1

    def head(self) -> tuple[Fraction, ...]:
        return self.A[: self.head_size]

    def tail(self) -> tuple[Fraction, ...]:
        return self.A[self.head_size:]

    def map_rank(self) -> int:
        return exact_rank(self.matrix)

    def is_surjective(self) -> bool:
        return self.map_rank() == len(self.basis)

    def terms(self) -> list[tuple[Basis, Fraction]]:
        return [(b, a) for b, a in zip(self.basis, self.A) if a]

    def to_json(self) -> dict:
        return {
            "kind": self.kind, "n": self.n, "m": self.m, "r": self.r,
            "inputs": [str(b) for b in self.inputs],
            "basis": [str(b) for b in self.basis],
            "matrix": [[str(v) for v in row] for row in self.matrix],
            "input_values": [str(v) for v in self.input_values],
            "A": [str(v) for v in self.A],
            "surjective": self.is_surjective(),
        }


@dataclass(frozen=True)
class CanonicalForm:
    source: MelnikovCombination
    blocks: tuple[CanonicalBlock, ...]

    def combination(self) -> MelnikovCombination:
        terms = [t for blk in self.blocks for t in blk.terms()]
        s = self.source
        return MelnikovCombination(s.family, tuple(terms), s.n, s.s1, s.s_top)

    def block(self, kind: str) -> CanonicalBlock | None:
        return next((b for b in self.blocks if b.kind == kind), None)

    def to_json(self) -> dict:
        return {"source": self.source.to_json(), "blocks": [b.to_json() for b in self.blocks]}


def _make_block(kind: str, n: int, m: int, r: int, values: Mapping[Basis, Fraction],
                input_scale: Fraction = Fraction(1)) -> CanonicalBlock:
    inputs, basis, matrix = _block_map(kind, n, m, r)
    if input_scale != 1:
        matrix = tuple(tuple(v * input_scale for v in row) for row in matrix)
    x = tuple(values.get(b, Fraction(0)) for b in inputs)
    A = tuple(sum((v * xi for v, xi in zip(row, x)), Fraction(0)) for row in matrix)
    return CanonicalBlock(kind, n, m, r, inputs, basis, matrix, x, A)


def reduce_to_canonical(c: MelnikovCombination) -> CanonicalForm:
    """Rewrite a smooth or piecewise combination in canonical head/tail form.

    The odd-power ladder becomes ``sum A_i I_{i,2r+1} + sum A L_{n-1+i, r+m-i}``
    and the even-power ladder ``sum A_i J_{i,2rt} + sum A Lt_{n-1+i, rt+l-1-i}``.
    """
    if c.family not in ("smooth", "piecewise"):
        raise ValueError("reduction needs a smooth or piecewise combination")
    ix = c.indices
    n = c.n
    terms = c.as_dict()
    blocks = []
    if c.family == "smooth":
        if ix["m"] > 0:
            blocks.append(_make_block("I", n, ix["m"], ix["r"], terms))
    else:
        if ix["m"] > 0:
            # J_{i,odd} = I_{i,odd}/2: feed the J coefficients through the I map at half weight
            as_I = {Basis("I", b.i, b.p): v for b, v in terms.items() if b.p % 2}
            blocks.append(_make_block("I", n, ix["m"], ix["r"], as_I, Fraction(1, 2)))
            blk = blocks[-1]
            blocks[-1] = CanonicalBlock(blk.kind, blk.n, blk.m, blk.r,
                                        tuple(Basis("J", b.i, b.p) for b in blk.inputs),
                                        blk.basis, blk.matrix, blk.input_values, blk.A)
        if ix["l"] > 0:
            even = {b: v for b, v in terms.items() if b.p % 2 == 0}
            blocks.append(_make_block("J", n, ix["l"], ix["rt"], even))
    used = {b for blk in blocks for b in blk.inputs}
    stray = [b for b in terms if b not in used]
    if stray:
        raise ValueError(f"terms outside the block layout: {', '.join(map(str, stray))}")
    return CanonicalForm(c, tuple(blocks))


# -- expansion ---------------------------------------------------------------

def expand(c: Union[MelnikovCombination, CanonicalForm, Basis], order: int) -> HalfPowerSeries:
    """Exact small-``h`` expansion.

    ``order`` counts integer steps in ``h``: coefficients are exact for every
    power ``h^(e/2)`` with ``base <= e < base + 2*order``.  An empty
    combination returns a series flagged ``identically_zero``.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if isinstance(c, Basis):
        return basis_series(c, order)
    if isinstance(c, CanonicalForm):
        base = c.source.base_half_exponent() if c.source.terms or c.blocks else 2
        comb = c.combination()
        return _series_from_terms(comb.terms, base, base + 2 * order, not comb.terms)
    base = c.base_half_exponent() if (c.family != "generic" or c.terms) else 2
    if c.family in ("smooth", "piecewise"):
        ix = c.indices
        if c.family == "smooth" and ix["m"] == 0 or c.family == "piecewise" and ix["m"] + ix["l"] == 0:
            return HalfPowerSeries.zero(2 * ix["r"] + 2, 2 * order, identically=True)
    return _series_from_terms(c.terms, base, base + 2 * order, not c.terms)
