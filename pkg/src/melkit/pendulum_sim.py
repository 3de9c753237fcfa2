"""Direct simulation of the perturbed pendulum

    x' = y,   y' = -sin x + eps * Q(x, y)

(``Q = Q_plus`` for ``y > 0`` and ``Q_minus`` for ``y < 0`` in the piecewise
case) and its first-return map on the section ``{x = 0, y > 0}``.

Along any solution ``dH/dt = eps * Q * y``, so the energy change over one
return is integrated as an extra state component.  This keeps the
displacement accurate even when it is far below the size of ``h`` itself.
"""
from __future__ import annotations

import csv
import io
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, optimize, special

from .perturbation import PiecewisePerturbation, SmoothPerturbation
from .quadrature import quad_melnikov

__all__ = [
    "SystemSpec",
    "Trajectory",
    "ReturnSample",
    "CycleEstimate",
    "CycleReport",
    "AgreementReport",
    "period",
    "integrate_orbit",
    "return_map",
    "find_cycles",
    "melnikov_agreement",
    "SimulationError",
]

H_MARGIN = 0.01
DEFAULT_TOL = 1e-10


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SystemSpec:
    epsilon: float
    perturbation: SmoothPerturbation | PiecewisePerturbation

    def __post_init__(self):
        if abs(self.epsilon) > 0.1:
            raise ValueError(f"|epsilon| = {abs(self.epsilon)} exceeds 0.1")
        if abs(self.epsilon) > 1e-2:
            warnings.warn("epsilon above 1e-2: first-order Melnikov predictions lose accuracy",
                          RuntimeWarning, stacklevel=2)

    @property
    def piecewise(self) -> bool:
        return isinstance(self.perturbation, PiecewisePerturbation)

    def side_evaluators(self):
        p = self.perturbation
        if self.piecewise:
            return p.plus.evaluator(), p.minus.evaluator()
        q = p.evaluator()
        return q, q


def period(h: float) -> float:
    """Unperturbed period ``4 K(h/2)`` of the orbit at energy ``h``."""
    return 4.0 * float(special.ellipk(0.5 * h))


def _energy(x, y):
    return 0.5 * np.asarray(y) ** 2 + 1.0 - np.cos(x)


def _rhs(eps: float, q):
    def f(t, s):
        x, y = s[0], s[1]
        w = eps * q(x, y)
        return [y, -math.sin(x) + w, w * y, abs(w * y)]
    return f


def _event(index: int, direction: int):
    def g(t, s):
        return s[index]
    g.terminal = True
    g.direction = direction
    return g


def _escape_event(t, s):
    return 0.5 * s[1] * s[1] + 1.0 - math.cos(s[0]) - (2.0 - 0.5 * H_MARGIN)


_escape_event.terminal = True
_escape_event.direction = 1


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    crossings: list[float] = field(default_factory=list)

    @property
    def H(self) -> np.ndarray:
        return _energy(self.x, self.y)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "y", "H"])
        for row in zip(self.t, self.x, self.y, self.H):
            w.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _segment(spec: SystemSpec, s0, t0: float, t_end: float, upper: bool, event, tol: float):
    q_up, q_lo = spec.side_evaluators()
    q = q_up if upper else q_lo
    atol = [tol, tol, tol * max(abs(spec.epsilon), 1e-300) * 1e-3, tol]
    sol = integrate.solve_ivp(_rhs(spec.epsilon, q), (t0, t_end), s0, method="DOP853",
                              rtol=tol, atol=atol, events=event)
    if sol.status == -1:
        raise SimulationError(f"integration failed: {sol.message}")
    return sol


def integrate_orbit(spec: SystemSpec, state: tuple[float, float], t_max: float,
                    tol: float = DEFAULT_TOL) -> Trajectory:
    """Integrate from ``state`` for ``t_max`` time units.

    The vector field in use is switched at every crossing of ``y = 0`` (found
    by event location), so piecewise systems are integrated side by side.
    The upper field applies on ``y = 0`` itself.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x0, y0 = map(float, state)
    if _energy(x0, y0) >= 2.0 - H_MARGIN:
        raise ValueError("initial state is outside the oscillatory region")
    s = [x0, y0, 0.0, 0.0]
    t = 0.0
    ts, xs, ys, crossings = [0.0], [x0], [y0], []
    upper = y0 > 0 or (y0 == 0 and -math.sin(x0) >= 0)
    while t < t_max:
        sol = _segment(spec, s, t, t_max, upper, [_event(1, -1 if upper else 1), _escape_event], tol)
        if sol.t_events[1].size:
            raise SimulationError(f"trajectory left the oscillatory region at t={sol.t_events[1][0]:.6g}")
        ts.extend(sol.t[1:])
        xs.extend(sol.y[0, 1:])
        ys.extend(sol.y[1, 1:])
        if sol.status == 1 and sol.t_events[0].size:
            t = float(sol.t_events[0][0])
            s = list(sol.y_events[0][0])
            s[1] = 0.0
            ts[-1], xs[-1], ys[-1] = t, s[0], 0.0
            crossings.append(t)
            upper = not upper
        else:
            t = float(sol.t[-1])
            s = list(sol.y[:, -1])
        if _energy(s[0], s[1]) >= 2.0 - H_MARGIN * 0.5:
            raise SimulationError("trajectory left the oscillatory region")
    return Trajectory(np.array(ts), np.array(xs), np.array(ys), crossings)


@dataclass(frozen=True)
class ReturnSample:
    """One return to ``{x = 0, y > 0}``.

    ``h_out = h_in + displacement`` where the displacement is the integral of
    ``dH/dt``; ``h_out_direct = y_ret**2 / 2`` is the same quantity read off
    the returned state.  ``noise`` is a conservative size of the integration
    error on ``displacement``.
    """

    h_in: float
    h_out: float
    h_out_direct: float
    displacement: float
    flight_time: float
    crossings: int
    noise: float

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in
                ("h_in", "h_out", "h_out_direct", "displacement", "flight_time", "crossings", "noise")}


def return_map(spec: SystemSpec, h: float, tol: float = DEFAULT_TOL, budget: float = 4.0) -> ReturnSample:
    """Start at ``(0, sqrt(2h))`` and follow the orbit back to the section."""
    if not 0 < h < 2 - H_MARGIN:
        raise ValueError(f"h={h} outside (0, {2 - H_MARGIN})")
    y0 = math.sqrt(2 * h)
    t_cap = budget * period(h)
    s = [0.0, y0, 0.0, 0.0]
    t = 0.0
    crossings = 0
    # upper arc to y=0, lower arc back to y=0, upper arc to x=0
    for upper, idx, direction in ((True, 1, -1), (False, 1, 1), (True, 0, 1)):
        sol = _segment(spec, s, t, t_cap, upper, _event(idx, direction), tol)
        if sol.status != 1 or not sol.t_events[0].size:
            raise SimulationError(f"no return to the section within {budget} periods (h={h})")
        t = float(sol.t_events[0][0])
        s = list(sol.y_events[0][0])
        if idx == 1:
            s[1] = 0.0
            crossings += 1
        else:
            s[0] = 0.0
    y_ret = s[1]
    disp = s[2]
    # error of the integrated dH/dt relative to its total variation, padded by the flight time
    noise = 10 * tol * s[3] * (1 + t)
    return ReturnSample(h, h + disp, 0.5 * y_ret * y_ret, disp, t, crossings, noise)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("MELKIT_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    items = list(items)
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(v) for v in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


@dataclass(frozen=True)
class CycleEstimate:
    h_star: float
    bracket: tuple[float, float]
    stability: int  # -1 attracting (d goes + to -), +1 repelling

    def to_json(self) -> dict:
        return {"h_star": self.h_star, "bracket": list(self.bracket), "stability": self.stability}


@dataclass
class CycleReport:
    cycles: list[CycleEstimate]
    grid: list[float]
    displacements: list[float]
    indeterminate: list[float]
    diagnostics: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"cycles": [c.to_json() for c in self.cycles], "grid": self.grid,
                "displacements": self.displacements, "indeterminate": self.indeterminate,
                "diagnostics": self.diagnostics}


def find_cycles(spec: SystemSpec, h_range: tuple[float, float], grid: int = 32,
                tol: float = DEFAULT_TOL, xtol: float = 1e-6) -> CycleReport:
    """Fixed points of the return map: sign changes of ``d(h) = h_out - h_in``.

    The grid is geometric in ``h``; each change is refined with Brent's
    method to relative width ``xtol``.  Values below the integration noise
    are reported as indeterminate, never as cycles.
    """
    if grid < 16:
        raise ValueError("grid must have at least 16 points")
    lo, hi = h_range
    if not 0 < lo < hi < 2 - H_MARGIN:
        raise ValueError("h_range must lie in (0, 2 - margin)")
    hs = np.geomspace(lo, hi, grid).tolist()
    if spec.epsilon == 0 or spec.perturbation.is_zero():
        return CycleReport([], hs, [0.0] * len(hs), [], ["degenerate: all fixed"])
    samples = _map(lambda h: return_map(spec, h, tol), hs)
    ds = [s.displacement for s in samples]
    bad = [s.h_in for s in samples if abs(s.displacement) <= s.noise]
    cycles = []
    for a, b in zip(samples, samples[1:]):
        if a.h_in in bad or b.h_in in bad or (a.displacement > 0) == (b.displacement > 0):
            continue
        f = lambda h: return_map(spec, h, tol).displacement
        root, res = optimize.brentq(f, a.h_in, b.h_in, xtol=xtol * a.h_in, rtol=1e-12, full_output=True)
        stab = -1 if a.displacement > 0 else 1
        cycles.append(CycleEstimate(root, (a.h_in, b.h_in), stab))
    diags = [f"indeterminate displacement at {len(bad)} grid point(s)"] if bad else []
    return CycleReport(cycles, hs, ds, bad, diags)


@dataclass
class AgreementReport:
    epsilon: float
    rows: list[dict]
    max_abs_deviation: float
    max_rel_deviation: float
    signs_agree: bool
    below_noise: list[float]

    def to_json(self) -> dict:
        return {"epsilon": self.epsilon, "rows": self.rows, "max_abs_deviation": self.max_abs_deviation,
                "max_rel_deviation": self.max_rel_deviation, "signs_agree": self.signs_agree,
                "below_noise": self.below_noise}


def melnikov_agreement(spec: SystemSpec, hs: Sequence[float], tol: float = DEFAULT_TOL,
                       quad_tol: float = 1e-12) -> AgreementReport:
    """Tabulate ``d(h)/eps`` against the directly integrated Melnikov function."""
    if spec.epsilon == 0:
        raise ValueError("epsilon must be nonzero")
    if abs(spec.epsilon) > 1e-3:
        warnings.warn("first-order comparison expects |epsilon| <= 1e-3", RuntimeWarning, stacklevel=2)
    eps = spec.epsilon
    samples = _map(lambda h: return_map(spec, h, tol), hs)
    rows, below = [], []
    max_abs = max_rel = 0.0
    signs = True
    for s in samples:
        mq = quad_melnikov(spec.perturbation, s.h_in, quad_tol)
        ratio = s.displacement / eps
        dev = abs(ratio - mq.value)
        noise = s.noise / abs(eps) + 10 * mq.abs_error_estimate
        rel = dev / abs(mq.value) if mq.value else math.inf
        quiet = abs(mq.value) <= noise and abs(ratio) <= noise
        if quiet:
            below.append(s.h_in)
        else:
            max_abs = max(max_abs, dev)
            max_rel = max(max_rel, rel)
            signs &= (ratio > 0) == (mq.value > 0)
        rows.append({"h": s.h_in, "d_over_eps": ratio, "melnikov": mq.value,
                     "abs_deviation": dev, "rel_deviation": rel, "below_noise": quiet})
    return AgreementReport(eps, rows, max_abs, max_rel, signs, below)
