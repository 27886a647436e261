"""Convergence and consistency studies built on the library operations.

Each study returns plain data (dicts / dataclasses) with a ``passed`` flag,
so that the command-line driver and the acceptance tests share one
implementation of every check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .analysis import (
    DomainRegion,
    GainReport,
    Interval,
    gain_report,
    holder_seminorm,
    rough_datum,
    structured_pairs,
)
from .forms import FormField
from .geometry.conditions import (
    TAGS,
    SamplerConfig,
    check_stability,
    condition_report,
)
from .geometry.defining import DefiningFunction
from .geometry.domains import Domain, random_directions
from .geometry.power import power_gap, power_value_grad
from .kernels import koppelman_residual
from .operators import (
    Discretization,
    apply_H0,
    homotopy_residual,
    interior_probes,
    solution_field,
)

# residuals below this are treated as converged to rounding in order tests
ROUNDING_FLOOR = 1e-10


def observed_order(coarse: float, fine: float, ratio: float = 2.0) -> float:
    """``log(coarse / fine) / log(ratio)``; ``nan`` if either value is not positive."""
    if coarse <= 0 or fine <= 0:
        return float("nan")
    return math.log(coarse / fine) / math.log(ratio)


def order_ok(coarse: float, fine: float, minimum: float = 1.0, ratio: float = 2.0,
             floor: float = ROUNDING_FLOOR) -> bool:
    """Order at least ``minimum``, or both values already at the rounding floor."""
    if fine <= floor and coarse <= floor:
        return True
    o = observed_order(coarse, fine, ratio)
    return bool(o >= minimum)


# ---------------------------------------------------------------------------
# Koppelman identities


def admissible_pairs(dom: Domain, count: int, seed: int = 0):
    """``(z, zeta)`` with ``z`` inside and ``zeta`` in the collar ``0 <= r <= delta``."""
    rng = np.random.default_rng(seed)
    z = interior_probes(dom, count, seed=seed + 1, max_fraction=0.8)
    omega = random_directions(rng, count, dom.n)
    levels = dom.delta * rng.random(count)
    zeta = dom.center + dom.radius_along(omega, levels)[:, None] * omega
    return z, zeta


@dataclass
class KoppelmanStudy:
    steps: Sequence[float]
    residuals: np.ndarray     # (points, steps) max over degrees and identities
    order: float
    constant: float
    passed: bool

    def rows(self):
        for i, row in enumerate(self.residuals):
            for h, res in zip(self.steps, row):
                yield {"point": i, "h": h, "residual": res}


def koppelman_study(dom: Domain, count: int = 50, steps=(1e-3, 1e-4), seed: int = 0,
                    order_range=(1.7, 2.3), r: Optional[DefiningFunction] = None) -> KoppelmanStudy:
    """Finite-difference residuals of both Koppelman identities for every degree.

    The order is measured on the maximum residual over points between the
    first two steps (relative to the domain scale).
    """
    r = r or dom.r
    z, zeta = admissible_pairs(dom, count, seed)
    hs = [h * dom.scale for h in steps]
    res = np.zeros((count, len(hs)))
    for i in range(count):
        for k, h in enumerate(hs):
            res[i, k] = max(koppelman_residual(r, z[i], zeta[i], q, h=h)
                            for q in range(dom.n))
    worst = res.max(axis=0)
    order = observed_order(worst[0], worst[1], hs[0] / hs[1]) if len(hs) > 1 else float("nan")
    const = float(np.max(res / np.asarray(hs) ** 2))
    passed = bool(order_range[0] <= order <= order_range[1])
    return KoppelmanStudy(list(steps), res, order, const, passed)


# ---------------------------------------------------------------------------
# homotopy residuals


@dataclass
class HomotopyStudy:
    op: str
    q: int
    ladder: List[int]
    names: List[str]
    residual: np.ndarray      # (levels, data) max over probes
    error: np.ndarray         # (levels, data) max over probes
    ratio: np.ndarray         # (levels, data) max over probes of residual / error
    orders: np.ndarray        # (levels - 1, data)
    bound_factor: float
    passed: bool

    def rows(self):
        for li, N in enumerate(self.ladder):
            for d, name in enumerate(self.names):
                yield {"operator": self.op, "q": self.q, "N": N, "data": name,
                       "residual": self.residual[li, d], "error_estimate": self.error[li, d],
                       "ratio": self.ratio[li, d],
                       "order": self.orders[li - 1, d] if li else ""}


def homotopy_study(op: str, q: int, fields: Sequence[FormField], dom: Domain, probes,
                   disc: Optional[Discretization] = None, levels: int = 2, h: float = 1e-4,
                   closed: bool = False, bound_factor: float = 5.0, min_order: float = 1.0,
                   threads: int = 1) -> HomotopyStudy:
    """Residuals along a joint refinement ladder (``N -> 2N``, ``eps``, ``h`` halved)."""
    disc = disc or Discretization(N=16)
    res, err, rat, ladder = [], [], [], []
    for _ in range(levels):
        reps = homotopy_residual(op, q, list(fields), probes, dom, disc, h=h, closed=closed,
                                 threads=threads)
        res.append([r.max_residual for r in reps])
        err.append([r.max_error for r in reps])
        rat.append([float(np.max(r.residual / np.maximum(r.error_estimate, 1e-300)))
                    for r in reps])
        ladder.append(disc.N)
        disc, h = disc.refined(2), h / 2
    res, err, rat = np.array(res), np.array(err), np.array(rat)
    orders = np.array([[observed_order(res[i, d], res[i + 1, d]) for d in range(len(fields))]
                       for i in range(levels - 1)]).reshape(levels - 1, len(fields))
    ok = bool(np.all(rat <= bound_factor))
    for i in range(levels - 1):
        ok &= all(order_ok(res[i, d], res[i + 1, d], min_order) for d in range(len(fields)))
    return HomotopyStudy(op, q, ladder, [f.name for f in fields], res, err, rat, orders,
                         bound_factor, ok)


# ---------------------------------------------------------------------------
# reproducing property


@dataclass
class ReproducingStudy:
    ladder: List[int]
    names: List[str]
    error: np.ndarray         # (levels, data) max |H0 phi - phi| over probes
    estimate: np.ndarray      # (levels, data) reported quadrature error
    consistency: np.ndarray   # (levels, data) boundary vs commutator formula
    orders: np.ndarray
    tolerance: float
    passed: bool

    def rows(self):
        for li, N in enumerate(self.ladder):
            for d, name in enumerate(self.names):
                yield {"N": N, "data": name, "error": self.error[li, d],
                       "error_estimate": self.estimate[li, d],
                       "consistency": self.consistency[li, d],
                       "order": self.orders[li - 1, d] if li else ""}


def reproducing_study(fields: Sequence[FormField], dom: Domain, probes, ladder=(32, 64),
                      tolerance: float = 1e-2, min_order: float = 1.0,
                      threads: int = 1) -> ReproducingStudy:
    """``|H_0 phi - phi|`` for holomorphic data along a resolution ladder."""
    err, est, con = [], [], []
    for N in ladder:
        sols = apply_H0(list(fields), probes, dom, Discretization(N=N), threads=threads)
        err.append([float(np.max(np.abs(s.values - f(probes)))) for s, f in zip(sols, fields)])
        est.append([float(np.max(s.errors)) for s in sols])
        con.append([float(np.max(s.metadata["consistency"])) for s in sols])
    err, est, con = np.array(err), np.array(est), np.array(con)
    orders = np.array([[observed_order(err[i, d], err[i + 1, d], ladder[i + 1] / ladder[i])
                        for d in range(len(fields))] for i in range(len(ladder) - 1)])
    ok = bool(np.all(err[0] <= tolerance))
    for i in range(len(ladder) - 1):
        ok &= all(order_ok(err[i, d], err[i + 1, d], min_order, ladder[i + 1] / ladder[i])
                  for d in range(len(fields)))
    return ReproducingStudy(list(ladder), [f.name for f in fields], err, est, con, orders,
                            tolerance, ok)


# ---------------------------------------------------------------------------
# geometry


@dataclass
class DomainCheck:
    domain: str
    report: object
    expected: Dict[str, bool]
    stability: Optional[List[bool]] = None

    @property
    def passed(self) -> bool:
        ok = all(self.report.holds(t) == want for t, want in self.expected.items())
        if self.stability is not None:
            ok &= all(self.stability)
        return ok


def domain_check(dom: Domain, sampler: Optional[SamplerConfig] = None, tags=TAGS,
                 expected: Optional[Dict[str, bool]] = None,
                 rescalings: Sequence = ()) -> DomainCheck:
    """Condition report plus stability under multiplication of ``r`` by positive fields."""
    sampler = sampler or SamplerConfig()
    rep = condition_report(dom, sampler, tags)
    stab = None
    if rescalings:
        stab = [check_stability(dom.r, dom.r.scaled(h), dom, sampler, tags) for h in rescalings]
    exp = {t: True for t in tags} if expected is None else dict(expected)
    return DomainCheck(repr(dom), rep, exp, stab)


def power_gap_study(exponents, count: int = 100_000, seed: int = 0, box: float = 1.0,
                    scales=(1.0, 1e-1, 1e-2, 1e-3)):
    """Sampled infimum of the convexity gap quotient over pairs in ``[-box, box]^d``.

    Half of the pairs are uniform, the rest are near-diagonal at the given
    relative scales (where the quotient is smallest for ``m > 2``).
    """
    m = np.asarray(exponents, dtype=float)
    rng = np.random.default_rng(seed)
    d = m.size
    half = count // 2
    x = rng.uniform(-box, box, (count, d))
    y = np.empty_like(x)
    y[:half] = rng.uniform(-box, box, (half, d))
    rest = count - half
    s = np.asarray(scales)[rng.integers(0, len(scales), rest)] * box
    dirs = rng.normal(size=(rest, d))
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    y[half:] = x[half:] + s[:, None] * dirs
    q = power_gap(m, x, y)
    i = int(np.argmin(q))
    # rounding level of each quotient: eps times the terms that cancel in the numerator
    fx, gx = power_value_grad(m, x)
    fy, _ = power_value_grad(m, y)
    dist = np.linalg.norm(y - x, axis=-1)
    terms = np.abs(fx) + np.abs(fy) + np.abs(np.sum(gx * (y - x), axis=-1))
    rounding = np.finfo(float).eps * terms / dist ** max(float(m.max()), 2.0)
    return {"exponents": m.tolist(), "infimum": float(q[i]), "supremum": float(np.max(q)),
            "pairs": count, "witness_x": x[i], "witness_y": y[i],
            "rounding": float(np.max(rounding))}


# ---------------------------------------------------------------------------
# Hoelder calibration and gain


CALIBRATION = {
    # name: (function on [0, 1], exponent, true seminorm)
    "sqrt": (np.sqrt, 0.5, 1.0),
    "constant": (lambda x: np.ones_like(x), 0.5, 0.0),
    "identity": (lambda x: x, 0.5, 1.0),
}


def calibration_study(pairs: int = 100_000, seed: int = 0, fraction: float = 0.9):
    """Estimator value on the closed-form calibration functions on ``[0, 1]``."""
    region = Interval(0.0, 1.0)
    ps = structured_pairs(region, pairs, seed=seed)
    out = []
    for name, (f, a, true) in CALIBRATION.items():
        est = holder_seminorm(f, a, ps, region=region)
        ok = est.seminorm >= fraction * true - 1e-15 and est.seminorm <= true * (1 + 1e-9) + 1e-15
        out.append({"function": name, "a": a, "true": true, "estimate": est.seminorm,
                    "pairs": est.pair_count, "passed": bool(ok), "estimate_obj": est})
    return out


@dataclass
class GainStudy:
    reports: List[GainReport]
    bound: float
    drift: float
    max_drift: float
    passed: bool


def gain_study(domains: Sequence[Domain], exponents=(0.3, 0.5, 0.7), pairs: int = 300,
               N: int = 16, shrink: float = 0.85, seed: int = 0, max_drift: float = 2.0,
               threads: int = 1) -> GainStudy:
    """C^0 -> C^{1/2} ratios of ``T_1`` on the rough family ``|z_1 - p|^s dzbar_1``.

    ``drift`` is the largest ratio divided by the smallest, per domain.
    """
    reports, drifts = [], []
    for dom in domains:
        region = DomainRegion(dom, shrink=shrink, seed=seed)
        ps = structured_pairs(region, pairs, seed=seed, scales=[2.0 ** -j for j in range(8)])
        ratios = []
        for s in exponents:
            phi = rough_datum(dom, s)
            u = solution_field("T", 1, phi, dom, Discretization(N=N), threads=threads)
            rep = gain_report(phi, u, 0.0, ps, region=region, label=f"{dom!r} s={s:g}")
            reports.append(rep)
            ratios.append(rep.ratio)
        drifts.append(max(ratios) / min(ratios) if min(ratios) > 0 else float("inf"))
    bound = max(r.ratio for r in reports)
    drift = max(drifts)
    return GainStudy(reports, bound, drift, max_drift, bool(drift <= max_drift and np.isfinite(bound)))
