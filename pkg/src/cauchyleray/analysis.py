"""Empirical Hoelder seminorms and the half-derivative gain of solution operators.

Every estimate here is a maximum of difference quotients over a finite set
of sampled pairs, hence a lower bound for the true seminorm.  Pairs are
stratified over geometric scales of the region diameter so that the small
scales, where Hoelder quotients usually peak, are not missed.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .forms import FormField
from .geometry.defining import to_real
from .geometry.domains import Domain, random_directions


class EmptyPairsError(ValueError):
    """No admissible pair is left to form a quotient."""


class UnsupportedExponentError(ValueError):
    """Exponent outside the supported range ``(0, 1) U (1, 2)``."""


DEFAULT_SCALES = tuple(2.0 ** -j for j in range(15))


# ---------------------------------------------------------------------------
# regions and pair sampling


class Interval:
    """The real interval ``[lo, hi]`` as a sampling region (points of shape ``(..., 1)``)."""

    complex_points = False

    def __init__(self, lo: float = 0.0, hi: float = 1.0):
        if not hi > lo:
            raise ValueError("empty interval")
        self.lo, self.hi = float(lo), float(hi)

    @property
    def diameter(self) -> float:
        return self.hi - self.lo

    @property
    def dim(self) -> int:
        return 1

    def sample(self, rng, count):
        return self.lo + self.diameter * rng.random((count, 1))

    def directions(self, rng, count):
        return rng.choice([-1.0, 1.0], size=(count, 1))

    def contains(self, x):
        x = np.asarray(x)[..., 0]
        return (x >= self.lo) & (x <= self.hi)

    def project(self, x):
        return np.clip(x, self.lo, self.hi)

    def anchors(self):
        return np.array([[self.lo], [self.hi]])


class DomainRegion:
    """Closure of a :class:`Domain` as a sampling region (complex points).

    ``shrink < 1`` uses the homothetic copy ``c + shrink (D - c)`` instead,
    keeping samples away from the boundary (boundary quadrature needs a
    margin of about half a node spacing).
    """

    complex_points = True

    def __init__(self, dom: Domain, anchors=None, anchor_count: int = 8, seed: int = 0,
                 shrink: float = 1.0):
        self.dom = dom
        self.shrink = float(shrink)
        if anchors is None:
            rng = np.random.default_rng(seed)
            anchors = self._in(dom.boundary_points(random_directions(rng, anchor_count, dom.n)))
        self._anchors = np.atleast_2d(np.asarray(anchors, dtype=complex))

    def _in(self, z):
        return self.dom.center + self.shrink * (z - self.dom.center)

    def _out(self, z):
        return self.dom.center + (z - self.dom.center) / self.shrink

    @property
    def diameter(self) -> float:
        return self.shrink * self.dom.diameter

    @property
    def dim(self) -> int:
        return self.dom.n

    def sample(self, rng, count):
        omega = random_directions(rng, count, self.dom.n)
        rho = self.dom.radius_along(omega)
        s = self.shrink * rng.random(count) ** (1.0 / (2 * self.dom.n))
        return self.dom.center + (s * rho)[:, None] * omega

    def directions(self, rng, count):
        return random_directions(rng, count, self.dom.n)

    def contains(self, z):
        return self.dom.r.value(self._out(z)) <= 0

    def project(self, z):
        return self._in(self.dom.project_to_closure(self._out(z)))

    def anchors(self):
        return self._anchors


@dataclass
class PairSet:
    """Sampled pairs ``(x_i, y_i)``; ``scale`` records the stratum of each pair."""

    x: np.ndarray
    y: np.ndarray
    scale: np.ndarray

    def __len__(self):
        return len(self.x)

    def __add__(self, other: "PairSet") -> "PairSet":
        return PairSet(np.concatenate([self.x, other.x]), np.concatenate([self.y, other.y]),
                       np.concatenate([self.scale, other.scale]))

    def points(self):
        """All distinct endpoints, and index arrays mapping pairs into them."""
        both = np.concatenate([self.x, self.y])
        key = to_real(both) if np.iscomplexobj(both) else both
        _, first, inverse = np.unique(key, axis=0, return_index=True, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        return both[first], inverse[: len(self.x)], inverse[len(self.x):]


def structured_pairs(region, count: int, seed: int = 0, scales: Sequence[float] = DEFAULT_SCALES,
                     anchors=None, anchor_fraction: float = 0.2) -> PairSet:
    """``count`` pairs stratified over ``|x - y| ~ scale * diameter``.

    A share ``anchor_fraction`` of the pairs starts at anchor points
    (region anchors by default: interval endpoints or boundary points), the
    rest at uniform samples.  The partner is placed at distance
    ``u * scale * diameter`` with ``u`` uniform in ``[1/2, 1]`` along a
    random direction and projected back into the region.
    """
    if count <= 0:
        raise EmptyPairsError("pair count must be positive")
    rng = np.random.default_rng(seed)
    anchors = region.anchors() if anchors is None else np.atleast_2d(anchors)
    scales = np.asarray(scales, dtype=float)
    per = np.full(len(scales), count // len(scales))
    per[: count % len(scales)] += 1
    xs, ys, ss = [], [], []
    for s, k in zip(scales, per):
        if k == 0:
            continue
        na = int(round(anchor_fraction * k)) if len(anchors) else 0
        base = np.concatenate([anchors[rng.integers(0, len(anchors), na)],
                               region.sample(rng, k - na)]) if na else region.sample(rng, k)
        step = (0.5 + 0.5 * rng.random(k)) * s * region.diameter
        y = region.project(base + step[:, None] * region.directions(rng, k))
        xs.append(base)
        ys.append(y)
        ss.append(np.full(k, s))
    pairs = PairSet(np.concatenate(xs), np.concatenate(ys), np.concatenate(ss))
    keep = np.linalg.norm(_real(pairs.x) - _real(pairs.y), axis=-1) > 0
    return PairSet(pairs.x[keep], pairs.y[keep], pairs.scale[keep])


def _real(p):
    return to_real(p) if np.iscomplexobj(p) else np.asarray(p, dtype=float)


# ---------------------------------------------------------------------------
# estimator


@dataclass
class HolderEstimate:
    """Lower-bound estimate of ``|f|_{Lambda^a}`` over sampled pairs."""

    exponent: float
    derivatives: int
    seminorm: float
    pair_count: int
    witness: Optional[tuple] = None
    dropped: int = 0

    def as_row(self):
        x, y = self.witness if self.witness is not None else ("", "")
        return {"a": self.exponent, "seminorm": self.seminorm, "pairs": self.pair_count,
                "witness_x": _fmt_point(x), "witness_y": _fmt_point(y)}


def _fmt_point(p):
    if isinstance(p, str):
        return p
    return " ".join(f"{v:.12g}" for v in _real(np.asarray(p)).ravel())


def check_exponent(a: float) -> int:
    """Number of derivatives ``floor(a)``; rejects integers and ``a >= 2``."""
    a = float(a)
    if not a > 0:
        raise UnsupportedExponentError(f"exponent must be positive, got {a}")
    if a == int(a):
        raise UnsupportedExponentError(
            f"integer exponent {a:g} (Zygmund class) is not supported")
    if a >= 2:
        raise UnsupportedExponentError(
            f"exponent {a:g} needs second derivatives; only a < 2 is supported")
    return int(np.floor(a))


def _as_values(f, pts):
    v = np.asarray(f(pts))
    if isinstance(f, FormField) or v.ndim == pts.ndim:
        return v.reshape(len(pts), -1)
    return v.reshape(len(pts), 1)


def _gradient(f, pts, h, region):
    """Central differences along every real coordinate, flattened per point."""
    pts = np.asarray(pts)
    cplx = np.iscomplexobj(pts)
    d = pts.shape[-1]
    units = [1.0] + ([1j] if cplx else [])
    cols = []
    ok = np.ones(len(pts), bool)
    for j in range(d):
        for u in units:
            e = np.zeros(d, complex if cplx else float)
            e[j] = u * h
            plus, minus = pts + e, pts - e
            ok &= region.contains(plus) & region.contains(minus) if region is not None else True
            cols.append((_as_values(f, plus) - _as_values(f, minus)) / (2 * h))
    return np.concatenate(cols, axis=-1), ok


def holder_seminorm(f: Callable, a: float, pairs: PairSet, step: Optional[float] = None,
                    region=None, threads: int = 1, chunk: int = 8192) -> HolderEstimate:
    """Max over pairs of ``|D^k f(x) - D^k f(y)| / |x - y|^{a - k}`` with ``k = floor(a)``.

    Parameters
    ----------
    f : callable or FormField
        Evaluated on arrays of points ``(P, d)``; vector values are compared
        in the max norm over components.
    a : float
        Exponent in ``(0, 1)`` or ``(1, 2)``.
    pairs : PairSet
        Sampled pairs (see :func:`structured_pairs`).
    step : float, optional
        Finite-difference step for ``k = 1`` (default ``1e-5`` of the pair
        extent).  Pairs whose stencil leaves ``region`` are dropped.

    Returns
    -------
    HolderEstimate
        Lower bound of the seminorm; ties are broken by the
        lexicographically smallest ``(x, y)``.
    """
    k = check_exponent(a)
    if len(pairs) == 0:
        raise EmptyPairsError("no pairs to evaluate")
    pts, ix, iy = pairs.points()
    if k == 0:
        vals = _as_values(f, pts)
        ok = np.ones(len(pts), bool)
    else:
        if step is None:
            ext = _real(pts)
            step = 1e-5 * max(float(np.ptp(ext, axis=0).max()), 1e-300)
        vals, ok = _gradient(f, pts, step, region)
    good = np.flatnonzero(ok[ix] & ok[iy])
    if good.size == 0:
        raise EmptyPairsError("every pair was dropped (stencils leave the region)")
    frac = a - k
    rp = _real(pts)

    def block(idx):
        d = np.max(np.abs(vals[ix[idx]] - vals[iy[idx]]), axis=-1)
        dist = np.linalg.norm(rp[ix[idx]] - rp[iy[idx]], axis=-1)
        return d / dist**frac

    chunks = [good[i:i + chunk] for i in range(0, good.size, chunk)]
    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            quot = np.concatenate(list(ex.map(block, chunks)))
    else:
        quot = np.concatenate([block(c) for c in chunks])
    best = float(np.max(quot))
    tied = good[quot == best]
    keys = np.concatenate([_real(pairs.x[tied]), _real(pairs.y[tied])], axis=-1)
    w = tied[np.lexsort(keys.T[::-1])[0]]
    return HolderEstimate(float(a), k, best, int(good.size), (pairs.x[w], pairs.y[w]),
                          int(len(pairs) - good.size))


def sup_norm(f: Callable, points) -> float:
    """``max |f|`` over sample points (max over components)."""
    v = _as_values(f, np.asarray(points))
    return float(np.max(np.abs(v))) if v.size else 0.0


# ---------------------------------------------------------------------------
# gain


@dataclass
class GainReport:
    """Ratio of the ``(a + 1/2)``-seminorm of a solution to the ``a``-norm of its data."""

    a: float
    data_norm: float
    solution: HolderEstimate
    ratio: float
    label: str = ""
    extra: dict = field(default_factory=dict)

    def as_row(self):
        x, y = self.solution.witness if self.solution.witness is not None else ("", "")
        return {"label": self.label, "a": self.a, "seminorm_phi": self.data_norm,
                "seminorm_u": self.solution.seminorm, "ratio": self.ratio,
                "pairs": self.solution.pair_count, "witness_x": _fmt_point(x),
                "witness_y": _fmt_point(y)}


def gain_report(phi: Callable, u: Callable, a: float, pairs: PairSet, region=None,
                label: str = "", sup_points=None, step: Optional[float] = None) -> GainReport:
    """Compare ``|u|_{a+1/2}`` with ``|phi|_a`` on the same pairs.

    ``a = 0`` uses the sup norm of ``phi`` over the pair endpoints (and
    ``sup_points`` if given).  The ratio is 0 when the data norm is 0.
    """
    a = float(a)
    est_u = holder_seminorm(u, a + 0.5, pairs, step=step, region=region)
    if a == 0:
        pts, _, _ = pairs.points()
        if sup_points is not None:
            pts = np.concatenate([pts, np.asarray(sup_points, dtype=pts.dtype)])
        norm = sup_norm(phi, pts)
    else:
        norm = holder_seminorm(phi, a, pairs, step=step, region=region).seminorm
    ratio = 0.0 if norm == 0 else est_u.seminorm / norm
    return GainReport(a, norm, est_u, ratio, label)


def rough_datum(dom: Domain, s: float, p=None, component: int = 0) -> FormField:
    """``|z_1 - p_1|^s d zbar_{component}`` with ``p`` on the boundary (default ``c + rho e_1``)."""
    n = dom.n
    if p is None:
        e = np.zeros(n, complex)
        e[0] = 1.0
        p = dom.boundary_points(e[None])[0]
    p = np.asarray(p, dtype=complex)

    def func(z):
        out = np.zeros(np.shape(z)[:-1] + (n,), complex)
        out[..., component] = np.abs(z[..., 0] - p[0]) ** s
        return out

    return FormField(n, 1, func, "C0", name=f"rough_s{s:g}")


def write_gain_csv(reports: Sequence[GainReport], path) -> None:
    """CSV: label, a, data seminorm, solution seminorm, ratio, pair count, witness pair."""
    rows = [r.as_row() for r in reports]
    keys = list(rows[0].keys()) if rows else ["label"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for row in rows:
            w.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in row.items()})
