"""Zero counting near ``h = 0``: bounds, exact rank checks and sharp realizations."""
from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np

from .exact_coeff import b_coeff, c_coeff
from .exact_linalg import bareiss_rank, integer_rows, matvec, nullspace, rank as exact_rank, solve
from .melnikov_core import (
    Basis,
    MelnikovCombination,
    _basis_terms,
    _block_map,
    _series_from_terms,
    structural_indices,
)
from .perturbation import PiecewisePerturbation, SmoothPerturbation
from .quadrature import QuadResult, quad_melnikov

__all__ = [
    "BoundQuery",
    "max_zero_bound",
    "RankReport",
    "rank_D_smooth",
    "rank_D_piecewise",
    "jacobian_rank",
    "SignChangeReport",
    "count_sign_changes",
    "Realization",
    "RealizationError",
    "realize_zeros",
]


@dataclass(frozen=True)
class BoundQuery:
    """``family="smooth"`` uses ``n, m``; ``family="piecewise"`` uses ``n, s1, s_hat``."""

    family: str
    n: int
    m: int | None = None
    s1: int | None = None
    s_hat: int | None = None

    def __post_init__(self):
        if self.family not in ("smooth", "piecewise"):
            raise ValueError("family must be 'smooth' or 'piecewise'")
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if self.family == "smooth":
            if self.m is None or self.m < 1:
                raise ValueError("smooth query needs m >= 1")
        else:
            if self.s1 is None or self.s_hat is None:
                raise ValueError("piecewise query needs s1 and s_hat")
            if not 1 <= self.s1 <= self.s_hat:
                raise ValueError("need 1 <= s1 <= s_hat")


def max_zero_bound(q: BoundQuery) -> int:
    n = q.n
    if q.family == "smooth":
        return n + 2 * q.m - 2 if n > 0 else q.m - 1
    d = q.s_hat - q.s1
    if n == 0:
        return d
    return n if d == 0 else 2 * (n + d) - 1


# -- rank of the tail matrices ----------------------------------------------

@dataclass
class RankReport:
    label: str
    shape: tuple[int, int]
    entries: list[list[int]]
    rank: int
    expected: int
    trace: list[str] = field(default_factory=list)
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.rank == self.expected and all(self.checks.values())

    def to_json(self) -> dict:
        return {"label": self.label, "shape": list(self.shape),
                "entries": [[str(v) for v in row] for row in self.entries],
                "rank": self.rank, "expected": self.expected, "ok": self.ok,
                "checks": dict(self.checks), "trace": list(self.trace)}


def _d_tilde(n: int, size: int) -> list[list[Fraction]]:
    """``[prod_{t=n}^{n+k-1} (t + c + 1/2)]`` for rows ``k = 0..size-1`` and columns ``c = 1..size``."""
    out = []
    for k in range(size):
        row = []
        for c in range(1, size + 1):
            v = Fraction(1)
            for t in range(n, n + k):
                v *= t + c + Fraction(1, 2)
            row.append(v)
        out.append(row)
    return out


def _row_recursion(n: int, size: int, trace: list[str]) -> int:
    """Rank of ``D~(n)`` by the explicit row step, checking each reduced block equals ``D~(n+1)``."""
    d = _d_tilde(n, size)
    if size == 1:
        trace.append(f"D~_1(n={n}) = [[1]]: rank 1")
        return 1
    rows = [list(r) for r in d]
    for k in range(size - 2, -1, -1):
        f = n + k + Fraction(3, 2)
        rows[k + 1] = [a - f * b for a, b in zip(rows[k + 1], rows[k])]
    if any(rows[k][0] != 0 for k in range(1, size)):
        raise AssertionError("row step failed to clear the first column")
    sub = [[rows[k][c] / c for c in range(1, size)] for k in range(1, size)]
    if sub != _d_tilde(n + 1, size - 1):
        raise AssertionError(f"reduced block differs from D~_{size - 1}(n={n + 1})")
    trace.append(f"D~_{size}(n={n}) -> [[1, *], [0, D~_{size - 1}(n={n + 1})]] after column scaling")
    return 1 + _row_recursion(n + 1, size - 1, trace)


def _tail_matrix(family: str, n: int, m: int, r: int) -> tuple[list[list[Fraction]], list[Fraction], list[Fraction]]:
    """Rational parts of ``D`` plus the row and column factors splitting off ``D~``."""
    size = m - 1
    if family == "smooth":
        ent = lambda k, c: b_coeff(n + c, r + m - c, k).pi_part
    else:
        ent = lambda k, c: c_coeff(n + c, r + m - c, k).rt2_part
    d = [[ent(k, c) for c in range(1, m)] for k in range(size)]
    col = [d[0][c] for c in range(size)]
    row = [Fraction(1)] * size
    dt = _d_tilde(n, size)
    for k in range(1, size):
        row[k] = d[k][0] / (col[0] * dt[k][0])
    return d, row, col


def _rank_D(family: str, n: int, m: int, r: int) -> RankReport:
    d, row, col = _tail_matrix(family, n, m, r)
    size = m - 1
    dt = _d_tilde(n, size)
    factored = all(d[k][c] == row[k] * dt[k][c] * col[c] for k in range(size) for c in range(size))
    rk, trace = bareiss_rank(d)
    rec_trace: list[str] = []
    rec = _row_recursion(n, size, rec_trace)
    label = f"D_{size} {family} n={n} {'m' if family == 'smooth' else 'l'}={m} {'r' if family == 'smooth' else 'rt'}={r}"
    return RankReport(label, (size, size), integer_rows(d), rk, size,
                      trace + rec_trace,
                      {"row_column_factorization": factored, "recursion_rank_agrees": rec == rk})


def rank_D_smooth(n: int, m: int, r: int) -> RankReport:
    """Exact rank of ``D_{m-1}[k][c] = b^k_{n+c, r+m-c}`` (pi factor removed)."""
    if n < 1 or m < 2 or r < 0:
        raise ValueError("need n >= 1, m >= 2, r >= 0")
    return _rank_D("smooth", n, m, r)


def rank_D_piecewise(n: int, l: int, rt: int) -> RankReport:
    """Exact rank of ``D_{l-1}[k][c] = c^k_{n+c, rt+l-c}`` (sqrt2 factor removed)."""
    if n < 1 or l < 2 or rt < 1:
        raise ValueError("need n >= 1, l >= 2, rt >= 1")
    return _rank_D("piecewise", n, l, rt)


# -- Jacobian of the expansion coefficients ---------------------------------

def _ladder_coeffs(terms: Sequence[tuple[Basis, Fraction]], base: int, count: int) -> list[Fraction]:
    """Rational parts of the coefficients on ``h^(base/2 + k)``, ``k < count``."""
    horizon = base + 2 * count
    acc = [Fraction(0)] * count
    for b, q in terms:
        for e, c in _basis_terms(b, horizon):
            if (e - base) % 2:
                continue
            k = (e - base) // 2
            if k < 0:
                raise ValueError(f"{b} starts below the ladder base")
            acc[k] += c.rational_factor() * q
    return acc


def _block_jacobian(kind: str, n: int, m: int, r: int, rows: int, wrt: str) -> list[list[Fraction]]:
    inputs, basis, matrix = _block_map(kind, n, m, r)
    base = 2 * r + 2 if kind == "I" else 2 * r + 1
    cols_of = basis if wrt == "canonical" else inputs
    return [list(col) for col in zip(*[_ladder_coeffs([(b, Fraction(1))], base, rows) for b in cols_of])]


def _is_lower_triangular(j: list[list[Fraction]]) -> bool:
    return all(j[i][c] == 0 for i in range(len(j)) for c in range(i + 1, len(j[0])))


def _is_block_lower_triangular(j: list[list[Fraction]], head: int) -> bool:
    """Lower triangular except a full trailing block starting at ``head``."""
    return all(j[i][c] == 0 for i in range(len(j)) for c in range(len(j[0]))
               if c > i and not (i >= head and c >= head))


def _triangularize_tail(j: list[list[Fraction]], head: int) -> list[list[Fraction]] | None:
    """Column operations inside the tail block that make ``j`` lower triangular.

    Equivalent to trading the tail coefficients for ``U @ A_tail`` with ``U``
    unit upper triangular.  ``None`` when a tail pivot vanishes.
    """
    out = [row[:] for row in j]
    for i in range(head, len(out[0])):
        piv = out[i][i]
        if piv == 0:
            return None
        for c in range(i + 1, len(out[0])):
            f = out[i][c] / piv
            if f:
                for row in out:
                    row[c] -= f * row[i]
    return out


def jacobian_rank(family: str, n: int, m: int, r: int | None = None,
                  kernel_checks: int = 2, seed: int = 0) -> RankReport:
    """Rank of ``d(B_0..B_N)/d(params)``, ``N`` = number of independent ladder coefficients.

    ``family="smooth"``: odd-power ladder with ``m`` powers from ``2r+1``.
    ``family="piecewise"``: even-power ladder with ``l = m`` powers from
    ``2rt`` (``r`` is ``rt``, default 1); its coefficients sit on the
    half-integer powers of ``h``.

    For ``n >= 1`` the parameters are the canonical coefficients ``A``; for
    ``n = 0`` (where the canonical map is not onto) the raw coefficients.
    The vanishing condition is checked on random kernel vectors of the
    Jacobian with respect to the raw coefficients: their series must vanish
    through ``bound + 10`` terms.
    """
    kind = "I" if family == "smooth" else "J"
    if r is None:
        r = 0 if kind == "I" else 1
    if kind == "J" and r < 1:
        raise ValueError("the even-power ladder starts at rt >= 1")
    rows = n + 2 * m - 1 if n > 0 else m
    wrt = "canonical" if n > 0 else "raw"
    jac = _block_jacobian(kind, n, m, r, rows, wrt)
    rk, trace = bareiss_rank(jac)
    head = n + m if m > 1 else rows
    checks = {
        "square": len(jac) == len(jac[0]),
        "diagonal_nonzero_on_head": all(jac[i][i] != 0 for i in range(min(head, rows))),
        "block_lower_triangular": _is_block_lower_triangular(jac, head),
    }
    if m <= 2 or n == 0:
        checks["lower_triangular"] = _is_lower_triangular(jac)
    else:
        # the tail columns mix; triangular after an invertible change of tail parameters
        tri = _triangularize_tail(jac, head)
        checks["lower_triangular_after_tail_change"] = tri is not None and _is_lower_triangular(tri)
    raw = _block_jacobian(kind, n, m, r, rows, "raw")
    checks["raw_rank_full"] = exact_rank(raw) == rows
    kernel = nullspace(raw)
    checks["kernel_dimension"] = len(kernel) == len(raw[0]) - rows
    if kernel:
        rng = random.Random(seed)
        inputs, _, _ = _block_map(kind, n, m, r)
        base = 2 * r + 2 if kind == "I" else 2 * r + 1
        ok = True
        for _ in range(kernel_checks):
            v = [Fraction(0)] * len(inputs)
            for kv in kernel:
                w = Fraction(rng.randint(-20, 20), rng.randint(1, 9))
                v = [a + w * b for a, b in zip(v, kv)]
            comb = MelnikovCombination("generic", tuple(zip(inputs, v)))
            ok &= _series_from_terms(comb.terms, base, base + 2 * (rows + 10)).is_zero()
        checks["kernel_series_vanishes"] = ok
    label = f"jacobian {family} n={n} {'m' if kind == 'I' else 'l'}={m} {'r' if kind == 'I' else 'rt'}={r} wrt {wrt}"
    return RankReport(label, (len(jac), len(jac[0])), integer_rows(jac), rk, rows, trace, checks)


# -- numeric zero counting ---------------------------------------------------

@dataclass
class SignChangeReport:
    count: int
    brackets: list[tuple[float, float]]
    grid: list[float]
    values: list[float]
    indeterminate: list[float]

    @property
    def ok(self) -> bool:
        return not self.indeterminate

    def to_json(self) -> dict:
        return {"count": self.count, "brackets": [list(b) for b in self.brackets],
                "indeterminate": self.indeterminate, "grid_size": len(self.grid)}


def _call(evaluator, h: float) -> tuple[float, float]:
    v = evaluator(h)
    if isinstance(v, QuadResult):
        return v.value, v.abs_error_estimate
    if isinstance(v, tuple):
        return float(v[0]), float(v[1])
    return float(v), 0.0


def count_sign_changes(evaluator: Callable[[float], float | QuadResult | tuple],
                       interval: tuple[float, float], grid: int = 64,
                       rel_width: float = 1e-6) -> SignChangeReport:
    """Sign changes of ``evaluator`` on a geometric grid over ``interval``.

    Each change is bisected until ``hi - lo <= rel_width * lo``.  A grid
    value with ``|v| < 10 * error`` is indeterminate: it is reported and a
    warning is issued, never counted as a zero.
    """
    lo, hi = interval
    if not 0 < lo < hi < 2:
        raise ValueError("interval must satisfy 0 < lo < hi < 2")
    if grid < 16:
        raise ValueError("grid must have at least 16 points")
    hs = np.geomspace(lo, hi, grid).tolist()
    vals, bad = [], []
    for h in hs:
        v, err = _call(evaluator, h)
        vals.append(v)
        if abs(v) < 10 * err or v == 0.0:
            bad.append(h)
    if bad:
        warnings.warn(f"indeterminate sign at {len(bad)} grid point(s), first h={bad[0]:.6g}",
                      RuntimeWarning, stacklevel=2)
    brackets = []
    for (h0, v0), (h1, v1) in zip(zip(hs, vals), zip(hs[1:], vals[1:])):
        if h0 in bad or h1 in bad or (v0 > 0) == (v1 > 0):
            continue
        a, b, fa = h0, h1, v0
        while b - a > rel_width * a:
            mid = 0.5 * (a + b)
            fm, _ = _call(evaluator, mid)
            if fm == 0.0:
                a = b = mid
                break
            if (fm > 0) == (fa > 0):
                a, fa = mid, fm
            else:
                b = mid
        brackets.append((a, b))
    return SignChangeReport(len(brackets), brackets, hs, vals, bad)


# -- sharp realizations -------------------------------------------------------

class RealizationError(RuntimeError):
    def __init__(self, message: str, realization: "Realization | None" = None):
        super().__init__(message)
        self.realization = realization


@dataclass
class Realization:
    query: BoundQuery
    target: int
    locations: list[float]
    perturbation: SmoothPerturbation | PiecewisePerturbation
    parameters: dict[str, list[str]]
    eps0: float
    scan: SignChangeReport | None = None
    diagnostics: list[str] = field(default_factory=list)

    @property
    def verified_zeros(self) -> list[float]:
        if self.scan is None:
            return []
        return [0.5 * (a + b) for a, b in self.scan.brackets]

    @property
    def verified(self) -> bool:
        return self.scan is not None and self.scan.ok and self.scan.count == self.target

    def to_json(self) -> dict:
        from .io import perturbation_to_json
        return {
            "query": {k: v for k, v in vars(self.query).items() if v is not None},
            "target": self.target,
            "locations": self.locations,
            "eps0": self.eps0,
            "parameters": self.parameters,
            "perturbation": perturbation_to_json(self.perturbation),
            "verified": self.verified,
            "verified_zeros": self.verified_zeros,
            "brackets": [list(b) for b in self.scan.brackets] if self.scan else [],
            "diagnostics": list(self.diagnostics),
        }


def _mp_coeff(c) -> mpmath.mpf:
    q = lambda f: mpmath.mpf(f.numerator) / f.denominator
    return q(c.pi_part) * mpmath.pi + q(c.rt2_part) * mpmath.sqrt(2) + q(c.unit_part)


def _mp_value(b: Basis, h, horizon: int):
    rh = mpmath.sqrt(h)
    return mpmath.fsum(_mp_coeff(c) * rh ** e for e, c in _basis_terms(b, horizon))


def _null_vector(rows: list[list]) -> list:
    """Generalized cross product: the kernel of a ``k x (k+1)`` matrix."""
    k = len(rows)
    out = []
    for a in range(k + 1):
        minor = mpmath.matrix([[row[c] for c in range(k + 1) if c != a] for row in rows]) if k else None
        out.append((-1) ** a * (mpmath.det(minor) if k else mpmath.mpf(1)))
    return out


def _parameter_layout(q: BoundQuery):
    """List of ``(block, use_canonical)`` for the family the query describes."""
    if q.family == "smooth":
        r = 0
        s1, s_top = 2 * r + 1, 2 * r + 2 * q.m - 1
        ix = structural_indices(s1, s_top)
        layout = [("I", q.n, ix["m"], ix["r"])]
    else:
        s1, s_top = q.s1, q.s_hat
        ix = structural_indices(s1, s_top)
        layout = []
        if ix["m"] > 0:
            layout.append(("I", q.n, ix["m"], ix["r"]))
        if ix["l"] > 0:
            layout.append(("J", q.n, ix["l"], ix["rt"]))
    return s1, s_top, layout


def realize_zeros(q: BoundQuery, locations: Sequence[float], *, digits: int = 60,
                  series_terms: int = 80, param_digits: int = 20, grid: int = 64, tol: float = 1e-13,
                  check_factor: float = 2.0, validate: bool = True) -> Realization:
    """Build a perturbation whose Melnikov function has a simple zero at each location.

    The free parameters (canonical coefficients where the canonical map is
    onto, raw coefficients otherwise) are fixed by requiring ``M(h_i) = 0``
    on the full high-order expansion: ``k`` linear conditions on ``k + 1``
    unknowns.  The kernel vector is rounded to rationals, mapped back to
    perturbation coefficients exactly, and the result is checked by
    bracketing sign changes of the directly integrated ``M`` on
    ``(min/8, check_factor * max]``.
    """
    k = max_zero_bound(q)
    locs = [float(h) for h in locations]
    if len(locs) != k:
        raise ValueError(f"need exactly {k} locations for this query, got {len(locs)}")
    if any(b <= a for a, b in zip(locs, locs[1:])):
        raise ValueError("locations must be strictly increasing")
    if locs and not (0 < locs[0] and locs[-1] <= 0.2):
        raise ValueError("locations must lie in (0, 0.2]")
    s1, s_top, layout = _parameter_layout(q)

    columns: list[tuple[int, Basis]] = []      # (block index, basis function)
    maps = []
    for bi, (kind, n, m, r) in enumerate(layout):
        inputs, basis, matrix = _block_map(kind, n, m, r)
        canonical = exact_rank(matrix) == len(basis)
        maps.append((inputs, basis, matrix, canonical))
        for b in (basis if canonical else inputs):
            columns.append((bi, b))
    if len(columns) != k + 1:
        raise RealizationError(f"parameter count {len(columns)} does not match bound+1={k + 1}")

    with mpmath.workdps(digits):
        rows = []
        for h in locs:
            hh = mpmath.mpf(h)
            rows.append([_mp_value(b, hh, b.leading_half_exponent() + 2 * series_terms) for _, b in columns])
        v = _null_vector(rows)
        scale = max(abs(x) for x in v)
        v = [x / scale for x in v]
        vq = [Fraction(mpmath.nstr(x, param_digits, min_fixed=1, max_fixed=0)) for x in v]

    # back to raw coefficients, block by block
    raw: dict[Basis, Fraction] = {}
    params: dict[str, list[str]] = {}
    pos = 0
    for (kind, n, m, r), (inputs, basis, matrix, canonical) in zip(layout, maps):
        width = len(basis) if canonical else len(inputs)
        vals = vq[pos:pos + width]
        pos += width
        params[f"{kind}-block"] = [str(x) for x in vals]
        x = solve(matrix, vals) if canonical else vals
        if canonical and matvec(matrix, x) != list(vals):
            raise AssertionError("canonical back-substitution failed")
        # piecewise odd powers enter as J = I/2
        w = 2 if (q.family == "piecewise" and kind == "I") else 1
        for b, xv in zip(inputs, x):
            raw[b] = w * xv

    pert = _build_perturbation(q, s1, s_top, raw)
    amax = pert.max_abs()
    if amax == 0:
        raise RealizationError("degenerate solution: all coefficients vanished")
    pert = pert.scaled(1 / amax)
    real = Realization(q, k, locs, pert, params, check_factor * (locs[-1] if locs else 0.1))
    if validate:
        lo = (locs[0] if locs else 0.1) / 8
        hi = min(real.eps0, 1.99)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            real.scan = count_sign_changes(lambda h: quad_melnikov(pert, h, tol), (lo, hi), grid)
        if real.scan.indeterminate:
            real.diagnostics.append(f"indeterminate sign at h={real.scan.indeterminate}")
        if real.scan.count != k:
            real.diagnostics.append(f"found {real.scan.count} sign changes, expected {k}; spread the locations")
        for h, (a, b) in zip(locs, real.scan.brackets):
            if not (a * 0.9 <= h <= b * 1.1):
                real.diagnostics.append(f"zero near {h} found at [{a:.8g}, {b:.8g}]")
    return real


def _build_perturbation(q: BoundQuery, s1: int, s_top: int, raw: dict[Basis, Fraction]):
    n = q.n
    shifted: dict[int, list[Fraction]] = {}
    for b, v in raw.items():
        shifted.setdefault(b.p, [Fraction(0)] * (n + 1))[b.i] = v
    if q.family == "smooth":
        return SmoothPerturbation.from_cos_basis(n, s1, s_top, shifted)
    plus = SmoothPerturbation.from_cos_basis(n, s1, s_top, shifted)
    return PiecewisePerturbation(n, s1, s_top, s_top, plus, None)
