"""Floating-point Abelian integrals along the pendulum orbits.

Every oscillatory orbit ``y**2/2 + 1 - cos x = h`` (``0 < h < 2``) is
parametrized by the pendulum angle ``sin(x/2) = sqrt(h/2) sin(phi)``:

    1 - cos x = h sin(phi)**2,   y = sqrt(2h) cos(phi),
    dx/dphi   = sqrt(2h) cos(phi) / sqrt(1 - (h/2) sin(phi)**2).

``phi`` in ``[-pi/2, pi/2]`` traces the upper arc left to right and
``phi`` in ``[pi/2, 3pi/2]`` the lower arc right to left, i.e. the orbit is
traversed clockwise as the flow does.  The integrand is analytic in ``phi``
for ``h < 2``; there are no turning-point singularities left.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .perturbation import PiecewisePerturbation, SmoothPerturbation

__all__ = [
    "QuadResult",
    "x_plus",
    "quad_I",
    "quad_J",
    "quad_melnikov",
    "SEPARATRIX_MARGIN",
]

#: above ``2 - SEPARATRIX_MARGIN`` results are flagged as near-separatrix
SEPARATRIX_MARGIN = 0.01

_GL_X, _GL_W = np.polynomial.legendre.leggauss(96)


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_error_estimate: float
    evaluations: int
    converged: bool = True
    flags: tuple[str, ...] = field(default=())

    def __float__(self) -> float:
        return self.value

    def __add__(self, other: "QuadResult") -> "QuadResult":
        return QuadResult(self.value + other.value,
                          self.abs_error_estimate + other.abs_error_estimate,
                          self.evaluations + other.evaluations,
                          self.converged and other.converged,
                          tuple(dict.fromkeys(self.flags + other.flags)))

    def scaled(self, q: float) -> "QuadResult":
        return QuadResult(q * self.value, abs(q) * self.abs_error_estimate,
                          self.evaluations, self.converged, self.flags)

    def to_json(self) -> dict:
        return {"value": self.value, "abs_error_estimate": self.abs_error_estimate,
                "evaluations": self.evaluations, "converged": self.converged,
                "flags": list(self.flags)}


def _check_h(h: float) -> tuple[str, ...]:
    if not 0.0 < h < 2.0:
        raise ValueError(f"energy level h={h} outside the oscillatory region (0, 2)")
    return ("near-separatrix",) if h > 2.0 - SEPARATRIX_MARGIN else ()


def x_plus(h: float) -> float:
    """Right turning point ``arccos(1 - h)`` of the orbit at level ``h``."""
    _check_h(h)
    return math.acos(1.0 - h)


def _l1_estimate(f, a: float, b: float) -> float:
    """Cheap fixed-rule estimate of int |f|, used to scale absolute tolerances."""
    half, mid = 0.5 * (b - a), 0.5 * (b + a)
    return half * float(sum(w * abs(f(mid + half * x)) for x, w in zip(_GL_X, _GL_W)))


def _adaptive(f, a: float, b: float, tol: float, scale: float) -> QuadResult:
    epsabs = tol * scale if scale > 0 else 1e-300
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(f, a, b, epsabs=epsabs, epsrel=tol, limit=200, full_output=1)
    val, err, info = out[0], out[1], out[2]
    ier_ok = len(out) == 3
    ok = ier_ok and err <= max(tol * abs(val), epsabs)
    return QuadResult(float(val), float(err), int(info["neval"]), bool(ok))


def _normalized_arc(i: int, p: int, h: float, upper: bool, tol: float) -> QuadResult:
    # (1-cos x)^i y^p dx = h^(i+p/2+1/2) * sin^(2i) * (sqrt2 cos)^(p+1) / sqrt(1 - h sin^2/2) dphi
    hk = 0.5 * h
    r2 = math.sqrt(2.0)

    def g(phi):
        s = math.sin(phi)
        c = r2 * math.cos(phi)
        return s ** (2 * i) * c ** (p + 1) / math.sqrt(1.0 - hk * s * s)

    a, b = (-0.5 * math.pi, 0.5 * math.pi) if upper else (0.5 * math.pi, 1.5 * math.pi)
    return _adaptive(g, a, b, tol, _l1_estimate(g, a, b))


def quad_J(i: int, j: int, h: float, tol: float = 1e-12) -> QuadResult:
    """``J_{i,j}(h)``: integral of ``(1 - cos x)**i y**j dx`` over the upper half orbit.

    ``tol`` is a relative tolerance.
    """
    if i < 0 or j < 0:
        raise ValueError("i, j must be >= 0")
    if tol <= 0:
        raise ValueError("tol must be positive")
    flags = _check_h(h)
    res = _normalized_arc(i, j, h, True, tol)
    out = res.scaled(h ** (i + 0.5 * j + 0.5))
    return QuadResult(out.value, out.abs_error_estimate, out.evaluations, out.converged, flags)


def quad_I(i: int, j: int, h: float, tol: float = 1e-12) -> QuadResult:
    """``I_{i,j}(h)``: closed-orbit integral of ``(1 - cos x)**i y**j dx``.

    Both arcs are integrated separately, so even powers come out as a
    numerical cancellation rather than being assumed zero.
    """
    if i < 0 or j < 0:
        raise ValueError("i, j must be >= 0")
    if tol <= 0:
        raise ValueError("tol must be positive")
    flags = _check_h(h)
    up = _normalized_arc(i, j, h, True, tol)
    lo = _normalized_arc(i, j, h, False, tol)
    out = (up + lo).scaled(h ** (i + 0.5 * j + 0.5))
    return QuadResult(out.value, out.abs_error_estimate, out.evaluations, out.converged, flags)


def _arc_integrand(q, h: float):
    hk = 0.5 * h
    r2h = math.sqrt(2.0 * h)

    def f(phi):
        s = math.sin(phi)
        c = math.cos(phi)
        root = math.sqrt(1.0 - hk * s * s)
        cosx = 1.0 - h * s * s
        sinx = r2h * s * root
        y = r2h * c
        return q(cosx, sinx, y) * r2h * c / root

    return f


def quad_melnikov(p: SmoothPerturbation | PiecewisePerturbation, h: float,
                  tol: float = 1e-12) -> QuadResult:
    """Direct path integral of ``Q dx`` around the orbit at level ``h``.

    For a piecewise perturbation the upper arc sees ``Q_plus`` and the lower
    arc ``Q_minus``.  No parity or symmetry reduction is applied.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    flags = _check_h(h)
    if isinstance(p, PiecewisePerturbation):
        q_up, q_lo = p.plus.trig_evaluator(), p.minus.trig_evaluator()
    else:
        q_up = q_lo = p.trig_evaluator()
    f_up, f_lo = _arc_integrand(q_up, h), _arc_integrand(q_lo, h)
    a, m, b = -0.5 * math.pi, 0.5 * math.pi, 1.5 * math.pi
    scale = _l1_estimate(f_up, a, m) + _l1_estimate(f_lo, m, b)
    up = _adaptive(f_up, a, m, tol, scale)
    lo = _adaptive(f_lo, m, b, tol, scale)
    out = up + lo
    ok = out.abs_error_estimate <= max(tol * abs(out.value), 2 * tol * scale)
    return QuadResult(out.value, out.abs_error_estimate, out.evaluations, ok and out.converged, flags)
