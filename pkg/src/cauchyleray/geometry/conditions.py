"""Sampled estimation of the C-linear convexity conditions.

Each condition bounds ``|r_zeta . (zeta - z)|`` from below on a set of point
pairs.  The estimators here sample those pairs (with geometric
oversampling near the diagonal, where every condition degenerates) and
report the smallest quotient found together with the pair attaining it.
A positive infimum that stays put under refinement is evidence that the
condition holds; an infimum at (numerical) zero is a failure witness.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Sequence

import numpy as np

from .defining import DefiningFunction, to_real
from .domains import Domain, DomainError, random_directions

TAGS = ("c0", "Cplus", "b", "c")
ALL_TAGS = TAGS + ("Cpp",)

# zeta region / z region per condition
_REGIONS = {
    "c0": ("boundary", "closure"),
    "Cplus": ("outer", "closure"),
    "b": ("outer", "closure"),
    "c": ("boundary", "boundary"),
    "Cpp": ("outer", "closure"),
}


class SamplingError(ValueError):
    """A sample region required by a condition is empty."""


class StabilityError(ValueError):
    """Two defining functions do not share the same zero set."""


@dataclass(frozen=True)
class SamplerConfig:
    """Sample counts for condition estimation.

    ``n_boundary`` points on bD, ``n_interior`` points in D (the closure
    set is interior plus boundary points), ``n_collar`` points in the
    collar ``{0 < r < delta}``.  Every zeta sample is additionally paired
    with ``diag_per_level`` nearby points at each of ``diag_depth``
    geometric distances between ``diag_min`` and ``diag_max`` (relative to
    the domain scale).
    """

    n_boundary: int = 400
    n_interior: int = 400
    n_collar: int = 400
    diag_depth: int = 8
    diag_per_level: int = 2
    diag_min: float = 1e-4
    diag_max: float = 1e-1
    seed: int = 0
    chunk: int = 64
    workers: int = 1

    def scaled(self, factor: int) -> "SamplerConfig":
        """Multiply every sample count by ``factor``."""
        return replace(self, n_boundary=self.n_boundary * factor,
                       n_interior=self.n_interior * factor,
                       n_collar=self.n_collar * factor)


@dataclass
class ConditionEstimate:
    tag: str
    infimum: float
    witness: tuple  # (zeta, z) as complex arrays
    pair_count: int
    diag_depth: int

    def holds(self, tol: float) -> bool:
        return bool(self.infimum > tol)


@dataclass
class ConditionReport:
    """Sampled infima per condition tag, with the failure tolerance used."""

    estimates: Dict[str, ConditionEstimate] = field(default_factory=dict)
    tolerance: float = 0.0

    def __getitem__(self, tag):
        return self.estimates[tag]

    def holds(self, tag) -> bool:
        return self.estimates[tag].holds(self.tolerance)

    def rows(self):
        for tag, est in self.estimates.items():
            zeta, z = est.witness
            yield {
                "condition": tag,
                "infimum": est.infimum,
                "holds": self.holds(tag),
                "pairs": est.pair_count,
                "diag_depth": est.diag_depth,
                "witness_zeta": " ".join(f"{v:.17g}" for v in to_real(zeta)),
                "witness_z": " ".join(f"{v:.17g}" for v in to_real(z)),
            }


def leray_denominator(r: DefiningFunction, zeta, z):
    """The pairing ``r_zeta(zeta) . (zeta - z)`` (complex, no modulus)."""
    zeta = np.asarray(zeta, dtype=complex)
    z = np.asarray(z, dtype=complex)
    return np.sum(r.grad(zeta) * (zeta - z), axis=-1)


class _Samples:
    """Deterministic sample sets for one (domain, defining function, config)."""

    def __init__(self, dom: Domain, r: DefiningFunction, cfg: SamplerConfig):
        rng = np.random.default_rng(cfg.seed)
        n = dom.n
        self.dom, self.r, self.cfg = dom, r, cfg
        if cfg.n_boundary <= 0:
            raise SamplingError("boundary sample region is empty")
        self.boundary = dom.boundary_points(random_directions(rng, cfg.n_boundary, n))
        omega = random_directions(rng, cfg.n_interior, n)
        s = rng.random(cfg.n_interior) ** (1.0 / (2 * n))
        interior = dom.center + (s * dom.radius_along(omega))[:, None] * omega
        self.closure = np.concatenate([interior, self.boundary])
        self._rng = rng
        self._collar = None

    @property
    def collar(self):
        if self._collar is None:
            cfg, dom = self.cfg, self.dom
            if cfg.n_collar <= 0 or dom.delta <= 0:
                raise SamplingError("collar sample region U \\ D is empty")
            omega = random_directions(self._rng, cfg.n_collar, dom.n)
            levels = dom.delta * self._rng.random(cfg.n_collar) ** 2
            R = dom.radius_along(omega, levels)
            self._collar = dom.center + R[:, None] * omega
        return self._collar

    def zetas(self, region):
        if region == "boundary":
            return self.boundary
        return np.concatenate([self.boundary, self.collar])

    def zs(self, region):
        return self.boundary if region == "boundary" else self.closure

    def diagonal(self, zeta, target):
        """Points at geometric distances from each ``zeta``, moved into the target set."""
        cfg, dom = self.cfg, self.dom
        if cfg.diag_depth <= 0:
            return np.empty((0,) + zeta.shape[1:], complex), np.empty((0,) + zeta.shape[1:], complex)
        rng = np.random.default_rng(cfg.seed + 7919)
        t = np.geomspace(cfg.diag_min, cfg.diag_max, cfg.diag_depth) * dom.scale
        reps = cfg.diag_per_level * t.size
        zeta_rep = np.repeat(zeta, reps, axis=0)
        dist = np.tile(np.repeat(t, cfg.diag_per_level), len(zeta))
        u = random_directions(rng, len(zeta_rep), dom.n)
        cand = zeta_rep + dist[:, None] * u
        if target == "boundary":
            d = cand - dom.center
            cand = dom.boundary_points(d / np.linalg.norm(to_real(d), axis=-1)[:, None])
        else:
            cand = dom.project_to_closure(cand)
        return zeta_rep, cand


def _lex_first(zetas, zs, idx):
    keys = np.concatenate([to_real(zetas[idx]), to_real(zs[idx])], axis=-1)
    order = np.lexsort(keys.T[::-1])
    return idx[order[0]]


def _quotients(tag, r, zeta, z, dist_fn=None):
    """Condition quotient for broadcast-compatible pair arrays."""
    p = np.sum(r.grad(zeta) * (zeta - z), axis=-1)
    d2 = np.sum(np.abs(zeta - z) ** 2, axis=-1)
    if tag in ("c0", "Cplus", "c"):
        den = d2
    elif tag == "b":
        den = r.value(zeta) - r.value(z) + d2
    elif tag == "Cpp":
        den = dist_fn(zeta) + dist_fn(z) + np.abs(p.imag) + d2
    else:
        raise ValueError(f"unknown condition tag {tag!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.abs(p) / den
    return np.where(d2 > 1e-24, q, np.inf)


def _distance_fn(dom: Domain, r: DefiningFunction, samples: _Samples):
    from scipy.spatial import cKDTree

    bpts = samples.boundary
    tree = cKDTree(to_real(bpts))
    gnorm = np.linalg.norm(r.real_grad(bpts), axis=-1)

    def dist(z):
        flat = z.reshape(-1, dom.n)
        _, idx = tree.query(to_real(flat))
        return (np.abs(r.value(flat)) / gnorm[idx]).reshape(z.shape[:-1])

    return dist


def _reduce(zetas_list, zs_list, qs_list):
    best_val, best = np.inf, None
    for zetas, zs, q in zip(zetas_list, zs_list, qs_list):
        if q.size == 0:
            continue
        m = q.min()
        if m > best_val:
            continue
        idx = np.flatnonzero(q == m)
        i = _lex_first(zetas, zs, idx)
        cand = (zetas[i], zs[i])
        if m < best_val or best is None or _lex_less(cand, best):
            best_val, best = m, cand
    return best_val, best


def _lex_less(a, b):
    ka = np.concatenate([to_real(a[0]), to_real(a[1])])
    kb = np.concatenate([to_real(b[0]), to_real(b[1])])
    diff = np.flatnonzero(ka != kb)
    return bool(diff.size and ka[diff[0]] < kb[diff[0]])


def estimate_condition(r: DefiningFunction, dom: Domain, cond: str,
                       sampler: Optional[SamplerConfig] = None,
                       _samples: Optional[_Samples] = None) -> ConditionEstimate:
    """Sampled infimum of the quotient defining condition ``cond``.

    ``cond`` is one of ``"c0"`` (zeta on bD, z in closure), ``"Cplus"`` and
    ``"b"`` (zeta in U \\ D, z in closure), ``"c"`` (both on bD) or
    ``"Cpp"`` (the distance-weighted form of ``Cplus``).  The zeta set for
    the ``U \\ D`` conditions contains the boundary samples, so their
    infima never exceed the ``c0`` infimum on the same samples.
    """
    if cond not in ALL_TAGS:
        raise ValueError(f"unknown condition tag {cond!r}")
    cfg = sampler or SamplerConfig()
    s = _samples or _Samples(dom, r, cfg)
    zregion, wregion = _REGIONS[cond]
    zetas, zs = s.zetas(zregion), s.zs(wregion)
    dist_fn = _distance_fn(dom, r, s) if cond == "Cpp" else None

    chunks = [zetas[i:i + cfg.chunk] for i in range(0, len(zetas), cfg.chunk)]

    def work(block):
        zb = np.broadcast_to(block[:, None, :], (len(block), len(zs), dom.n))
        wb = np.broadcast_to(zs[None, :, :], zb.shape)
        q = _quotients(cond, r, zb, wb, dist_fn)
        return zb.reshape(-1, dom.n), wb.reshape(-1, dom.n), q.ravel()

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            results = list(ex.map(work, chunks))
    else:
        results = [work(c) for c in chunks]

    dz, dw = s.diagonal(zetas, wregion)
    if len(dz):
        results.append((dz, dw, _quotients(cond, r, dz, dw, dist_fn)))
    val, wit = _reduce(*zip(*results))
    count = len(zetas) * len(zs) + len(dz)
    if wit is None:
        raise SamplingError("no admissible sample pairs")
    return ConditionEstimate(cond, float(val), wit, count, cfg.diag_depth)


def failure_tolerance(dom: Domain, r: Optional[DefiningFunction] = None) -> float:
    """``1e-6`` times the natural scale of the quotients, ``max|r_zeta| / diameter``."""
    r = r or dom.r
    rng = np.random.default_rng(3)
    b = dom.boundary_points(random_directions(rng, 256, dom.n))
    g = np.max(np.linalg.norm(np.abs(r.grad(b)), axis=-1))
    return 1e-6 * g / dom.diameter


def condition_report(dom: Domain, sampler: Optional[SamplerConfig] = None,
                     tags: Sequence[str] = TAGS, r: Optional[DefiningFunction] = None) -> ConditionReport:
    """Estimate several conditions on shared samples."""
    r = r or dom.r
    cfg = sampler or SamplerConfig()
    samples = _Samples(dom, r, cfg)
    rep = ConditionReport(tolerance=failure_tolerance(dom, r))
    for tag in tags:
        rep.estimates[tag] = estimate_condition(r, dom, tag, cfg, samples)
    return rep


def _generic(dom: Domain, r: DefiningFunction) -> Domain:
    return Domain(r, dom.center, dom.diameter, dict(dom.params, function=r.name))


def check_stability(r1: DefiningFunction, r2: DefiningFunction, dom: Domain,
                    sampler: Optional[SamplerConfig] = None, tags: Sequence[str] = TAGS,
                    zero_tol: float = 1e-6) -> bool:
    """Whether two defining functions of ``dom`` agree on which conditions hold.

    Raises :class:`StabilityError` if the zero sets differ (checked on bD
    samples of ``r1``: the distance estimate ``|r2|/|grad r2|`` must stay
    below ``zero_tol * diameter``).
    """
    cfg = sampler or SamplerConfig()
    d1, d2 = _generic(dom, r1), _generic(dom, r2)
    rng = np.random.default_rng(cfg.seed + 11)
    b = d1.boundary_points(random_directions(rng, 512, dom.n))
    gap = np.abs(r2.value(b)) / np.linalg.norm(r2.real_grad(b), axis=-1)
    if np.max(gap) > zero_tol * dom.diameter:
        raise StabilityError(f"zero sets disagree (max distance estimate {np.max(gap):.3g})")
    rep1 = condition_report(d1, cfg, tags, r1)
    rep2 = condition_report(d2, cfg, tags, r2)
    return all(rep1.holds(t) == rep2.holds(t) for t in tags)
