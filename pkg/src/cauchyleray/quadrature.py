"""Quadrature on bD and on the regions D, U and U \\ D.

Spheres ``S^{2n-1}`` are discretized in coordinates
``zeta_j = u_j exp(i xi_j)`` with ``u`` on the positive part of
``S^{n-1}``: a periodic trapezoid rule in each phase ``xi_j`` and
Gauss-Legendre in the nested polar angles of ``u``.  Boundary rules push
this rule out along rays of a star-shaped domain; volume rules are polar
about a chosen center (the evaluation point, when a kernel singularity is
present) so that the ``t^{2n-1}`` radial Jacobian absorbs the
``|zeta - z|^{1-2n}`` singularity.

Boundary integrals of (n, n-1)-forms are evaluated through the identity

    int_{bD} f dzeta_[n] ^ dzetabar_{[n] minus m}
        = (-1)^(n+m) lambda_n int_{bD} f (nu_{x_m} + i nu_{y_m}) / 2 dS

(0-based ``m``; ``nu`` the outward unit normal;
``dzeta_[n] ^ dzetabar_[n] = lambda_n dV``), which follows from Stokes'
theorem and fixes the orientation of bD as the boundary of D.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .forms import FormField, FormValue, merge_sign, multi_indices
from .geometry.defining import to_complex, to_real
from .geometry.domains import Domain, DomainError

REGIONS = ("D", "U", "U\\D")
_REGION_TAGS = {"boundary": 0, "D": 1, "U": 2, "U\\D": 3}
_MAGIC = b"CLKQ"


class RegionError(ValueError):
    """The requested integration region is empty or unknown."""


class ProximityError(ValueError):
    """The evaluation point is too close to bD for the rule."""


def volume_form_constant(n: int) -> complex:
    """``lambda_n`` with ``dzeta_[n] ^ dzetabar_[n] = lambda_n dV``."""
    return (-1) ** (n * (n - 1) // 2) * (-2j) ** n


def _normalize_region(region: str) -> str:
    key = region.replace("/", "\\").replace("minus", "\\").replace(" ", "")
    aliases = {"UD": "U\\D", "U-D": "U\\D", "U\\D": "U\\D", "D": "D", "U": "U"}
    if key not in aliases:
        raise RegionError(f"unknown region {region!r}; expected one of {REGIONS}")
    return aliases[key]


# ---------------------------------------------------------------------------
# sphere rules


@lru_cache(maxsize=32)
def _sphere_rule_cached(n: int, N: int, phase: float):
    xi = 2 * np.pi * (np.arange(N) + phase) / N
    wxi = np.full(N, 2 * np.pi / N)
    if n == 1:
        return np.exp(1j * xi)[:, None], wxi
    m = max(N // 2, 1)
    x, w = np.polynomial.legendre.leggauss(m)
    eta = 0.25 * np.pi * (x + 1)           # [0, pi/2]
    weta = 0.25 * np.pi * w
    # nested angles for u on the positive part of S^{n-1}
    grids = np.meshgrid(*([eta] * (n - 1)), indexing="ij")
    wgrid = np.prod(np.meshgrid(*([weta] * (n - 1)), indexing="ij"), axis=0).ravel()
    angles = np.stack([g.ravel() for g in grids], axis=-1)
    u = np.ones((len(angles), n))
    jac = np.ones(len(angles))
    sin_prod = np.ones(len(angles))
    for k in range(n - 1):
        u[:, k] = sin_prod * np.cos(angles[:, k])
        jac *= np.sin(angles[:, k]) ** (n - 2 - k)
        sin_prod = sin_prod * np.sin(angles[:, k])
    u[:, n - 1] = sin_prod
    wu = wgrid * jac * np.prod(u, axis=-1)
    phases = np.stack(np.meshgrid(*([xi] * n), indexing="ij"), axis=-1).reshape(-1, n)
    wph = np.prod(np.stack(np.meshgrid(*([wxi] * n), indexing="ij"), axis=-1).reshape(-1, n), axis=-1)
    omega = (u[:, None, :] * np.exp(1j * phases[None, :, :])).reshape(-1, n)
    weights = (wu[:, None] * wph[None, :]).ravel()
    return omega, weights


def sphere_rule(n: int, N: int, phase: float = 0.5):
    """Directions ``(M, n)`` and weights summing to ``|S^{2n-1}|``.

    ``N`` trapezoid points per phase angle and ``N/2`` Gauss points per
    polar angle.  The half-step ``phase`` keeps nodes off the coordinate
    hyperplanes ``x_j = 0`` and ``y_j = 0``.
    """
    if N < 2:
        raise ValueError("resolution N must be at least 2")
    omega, w = _sphere_rule_cached(int(n), int(N), float(phase))
    return omega.copy(), w.copy()


# ---------------------------------------------------------------------------
# rules


@dataclass
class BoundaryRule:
    """Nodes on bD with surface weights and outward unit normals (real, 2n)."""

    n: int
    N: int
    nodes: np.ndarray
    weights: np.ndarray
    normals: np.ndarray
    domain: Optional[Domain] = field(default=None, repr=False)

    @property
    def area(self) -> float:
        return float(np.sum(self.weights))

    @property
    def spacing(self) -> float:
        """Typical node spacing ``(area / count)^(1/(2n-1))``."""
        return (self.area / len(self.weights)) ** (1.0 / (2 * self.n - 1))


@dataclass
class VolumeRule:
    """Nodes and weights over a region, polar about ``center``."""

    n: int
    N: int
    region: str
    nodes: np.ndarray
    weights: np.ndarray
    center: np.ndarray
    exclusion: Optional[float] = None
    omitted: bool = False
    domain: Optional[Domain] = field(default=None, repr=False)

    @property
    def volume(self) -> float:
        return float(np.sum(self.weights))


def build_boundary_rule(dom: Domain, N: int, phase: float = 0.5) -> BoundaryRule:
    """Boundary rule from the star-shaped parametrization ``omega -> rho(omega) omega``.

    The surface element is ``rho^{2n-1} dsigma / (omega . nu)``, the
    standard change of variables for a radial graph; ``nu`` is computed
    from the gradient of the defining function.
    """
    dom.check_star_shaped()
    omega, wsph = sphere_rule(dom.n, N, phase)
    rho = dom.radius_along(omega)
    nodes = dom.center + rho[:, None] * omega
    grad = dom.r.real_grad(nodes)
    gnorm = np.linalg.norm(grad, axis=-1)
    nu = grad / gnorm[:, None]
    cos = np.sum(to_real(omega) * nu, axis=-1)
    if np.any(cos <= 0):
        raise DomainError("boundary is not a radial graph over the sphere")
    weights = wsph * rho ** (2 * dom.n - 1) / cos
    return BoundaryRule(dom.n, N, nodes, weights, nu, dom)


def _radial_gauss(a, b, m):
    x, w = np.polynomial.legendre.leggauss(m)
    a = np.asarray(a, dtype=float)[:, None]
    b = np.asarray(b, dtype=float)[:, None]
    t = 0.5 * (b - a) * (x + 1) + a
    return t, 0.5 * (b - a) * w


def build_volume_rule(dom: Domain, region: str, N: int, exclusion=None,
                      center=None, levels: Sequence[float] = (), outer_level: Optional[float] = None,
                      radial: Optional[int] = None, omit_exclusion: bool = False,
                      phase: float = 0.5, inner_level: Optional[float] = None) -> VolumeRule:
    """Polar volume rule for ``D``, ``U = {r < delta}`` or ``U \\ D``.

    Parameters
    ----------
    exclusion : (z, eps), optional
        Center the rule at ``z`` and treat the ball ``|zeta - z| < eps``
        with its own radial Gauss segment (or drop it when
        ``omit_exclusion``).  The radial Jacobian ``t^{2n-1}`` makes
        ``|zeta - z|^{1-2n}`` singular integrands bounded.
    levels : sequence of float
        Extra radial breakpoints at the level sets ``r = level`` (where a
        piecewise-smooth integrand, e.g. a cutoff, changes formula).
    outer_level : float, optional
        Level of the outer boundary for ``U`` and ``U \\ D``; defaults to
        ``delta``.
    inner_level : float, optional
        Inner level of ``U \\ D`` (default 0); integrands supported in an
        annulus ``{a < r < b}`` need nodes only there.
    radial : int, optional
        Gauss points per radial segment (default ``max(2, N // 4)``).
    """
    region = _normalize_region(region)
    n = dom.n
    eps = None
    if exclusion is not None:
        z, eps = exclusion
        center = np.asarray(z, dtype=complex)
        if eps <= 0:
            raise ValueError("exclusion radius must be positive")
    c = dom.center if center is None else np.asarray(center, dtype=complex)
    top = dom.delta if outer_level is None else float(outer_level)
    if region != "D" and top <= 0:
        raise RegionError("neighborhood level must be positive; U \\ D would be empty")
    m = radial or max(2, N // 4)
    omega, wsph = sphere_rule(n, N, phase)

    def ray(level):
        return dom.radius_along(omega, level, origin=c)

    if region == "D":
        lo_level, hi_level = None, 0.0
    elif region == "U":
        lo_level, hi_level = None, top
    else:
        lo_level, hi_level = (0.0 if inner_level is None else float(inner_level)), top
        if lo_level >= hi_level:
            raise RegionError("annular region is empty")
    if dom.r.value(c) >= (0.0 if region != "U" else top):
        if region != "U\\D":
            raise ProximityError("rule center must lie inside the region")
    inner = [lv for lv in sorted(levels) if (lo_level is None or lv > lo_level) and lv < hi_level]
    breaks = ([np.zeros(len(omega))] if lo_level is None else [ray(lo_level)])
    breaks += [ray(lv) for lv in inner] + [ray(hi_level)]
    if eps is not None and lo_level is None:
        if np.any(breaks[1] <= eps):
            raise ProximityError("exclusion ball leaves the innermost region")
        breaks.insert(1, np.full(len(omega), eps))

    ts, ws = [], []
    for i, (a, b) in enumerate(zip(breaks[:-1], breaks[1:])):
        if eps is not None and lo_level is None and i == 0 and omit_exclusion:
            continue
        t, w = _radial_gauss(a, b, m)
        ts.append(t)
        ws.append(w * t ** (2 * n - 1))
    t = np.concatenate(ts, axis=1)
    w = np.concatenate(ws, axis=1) * wsph[:, None]
    nodes = c + (t[..., None] * omega[:, None, :]).reshape(-1, n)
    return VolumeRule(n, N, region, nodes, w.ravel(), c, eps, bool(omit_exclusion and eps), dom)


# ---------------------------------------------------------------------------
# serialization


def save_rule(rule, path) -> None:
    """Binary layout: ``b"CLKQ"``, then little-endian uint32 ``n``, ``N``,
    region tag (0 boundary, 1 D, 2 U, 3 U\\D), uint64 node count; then
    float64 arrays: nodes ``(count, 2n)`` (interleaved real coordinates),
    weights ``(count,)`` and, for boundary rules, unit normals ``(count, 2n)``;
    volume rules end with their center ``(2n,)``."""
    boundary = isinstance(rule, BoundaryRule)
    tag = 0 if boundary else _REGION_TAGS[rule.region]
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IIIQ", rule.n, rule.N, tag, len(rule.weights)))
        fh.write(to_real(rule.nodes).astype("<f8").tobytes())
        fh.write(np.asarray(rule.weights).astype("<f8").tobytes())
        if boundary:
            fh.write(np.asarray(rule.normals).astype("<f8").tobytes())
        else:
            fh.write(to_real(rule.center).astype("<f8").tobytes())


def load_rule(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _MAGIC:
        raise ValueError("not a quadrature rule file")
    n, N, tag, count = struct.unpack_from("<IIIQ", data, 4)
    off = 4 + struct.calcsize("<IIIQ")

    def take(k):
        nonlocal off
        arr = np.frombuffer(data, dtype="<f8", count=k, offset=off).astype(float)
        off += 8 * k
        return arr

    nodes = to_complex(take(count * 2 * n).reshape(count, 2 * n))
    weights = take(count)
    if tag == 0:
        normals = take(count * 2 * n).reshape(count, 2 * n)
        return BoundaryRule(n, N, nodes, weights, normals)
    region = {v: k for k, v in _REGION_TAGS.items()}[tag]
    center = to_complex(take(2 * n))
    return VolumeRule(n, N, region, nodes, weights, center)


# ---------------------------------------------------------------------------
# kernel integration


@lru_cache(maxsize=None)
def contraction_table(n: int, kdeg: int, p: int):
    """Terms of ``dzetabar_K ^ dzetabar_L`` for kernel degree ``kdeg`` and data degree ``p``.

    Returns tuples ``(k_index, l_index, missing, sign)`` where ``missing`` is
    the one index left out (boundary case, ``kdeg + p = n - 1``) or ``None``
    (volume case, ``kdeg + p = n``).
    """
    rows = []
    for a, K in enumerate(multi_indices(n, kdeg)):
        for b, L in enumerate(multi_indices(n, p)):
            s, U = merge_sign(K, L)
            if not s:
                continue
            missing = None
            if len(U) == n - 1:
                missing = next(i for i in range(n) if i not in U)
            rows.append((a, b, missing, s))
    return tuple(rows)


def kernel_factory(kind: str, r=None, guard=None):
    """Callable ``(z, zeta, q) -> matrix`` for one of the three kernels."""
    from . import kernels

    g = guard or kernels.DEFAULT_GUARD

    def factory(z, zeta, q):
        return kernels.kernel_coeffs(kind, r, z, zeta, q, g).matrix

    factory.kind = kind
    return factory


@dataclass
class IntegralResult:
    """Quadrature value with a crude error estimate ``|I_N - I_{N/2}|``."""

    value: FormValue
    error: Optional[np.ndarray] = None

    @property
    def coeffs(self):
        return self.value.coeffs


def _boundary_value(rule: BoundaryRule, factory, phi: FormField, z, q_out, kdeg, chunk):
    n = rule.n
    lam = volume_form_constant(n)
    nu = rule.normals
    vec = 0.5 * (nu[:, 0::2] + 1j * nu[:, 1::2])          # (M, n)
    signs = np.array([(-1) ** (n + m) for m in range(n)])
    facs = lam * vec * signs
    return _contract(rule.nodes, rule.weights, factory, phi, z, q_out, kdeg, chunk,
                     lambda s, e: facs[s:e])


def _contract(nodes, weights, factory, phi, z, q_out, kdeg, chunk, factor):
    """Sum of ``weight * factor * (K ^ phi)`` over nodes; ``phi`` may be a list
    of fields of equal degree, evaluated against the same kernel values."""
    batch = isinstance(phi, (list, tuple))
    fields = list(phi) if batch else [phi]
    n = nodes.shape[-1]
    nJ = len(multi_indices(n, q_out))
    p = fields[0].q
    table = contraction_table(n, kdeg, p)
    sgn = (-1) ** (q_out * p)
    parts = []
    for s in range(0, len(weights), chunk):
        zeta = nodes[s:s + chunk]
        C = factory(z, zeta, q_out)
        if C.shape[-1] != len(multi_indices(n, kdeg)):
            raise ValueError("kernel zeta-degree does not complement the data degree")
        fac = factor(s, s + chunk)
        w = weights[s:s + chunk, None]
        row = []
        for f_ in fields:
            F = f_(zeta)
            dens = np.zeros(C.shape[:2], dtype=complex)
            for a, b, missing, sign in table:
                f = fac if missing is None else fac[:, missing]
                dens += sign * C[..., a] * (F[..., b] * f)[:, None]
            row.append(np.sum(dens * w, axis=0))
        parts.append(row)
    total = np.sum(np.array(parts), axis=0) if parts else np.zeros((len(fields), nJ), complex)
    total = sgn * total
    return total if batch else total[0]


def _degree(phi):
    if isinstance(phi, (list, tuple)):
        degrees = {f.q for f in phi}
        if len(degrees) != 1:
            raise ValueError("batched fields must share one degree")
        return degrees.pop()
    return phi.q


def _kdeg(n, p, boundary):
    kdeg = n - 1 - p if boundary else n - p
    if kdeg < 0 or kdeg > n:
        raise ValueError("data degree does not match the kernel")
    return kdeg


def integrate_kernel_boundary(rule: BoundaryRule, factory: Callable, phi: FormField, z, q_out: int,
                              coarse: Optional[BoundaryRule] = None, chunk: int = 65536,
                              margin: float = 0.5) -> IntegralResult:
    """``int_{bD} K(z, .) ^ phi`` for a kernel of z-degree ``q_out``.

    ``phi`` may also be a list of fields of one degree; the value then has
    one row per field.

    The kernel's zeta-degree must complement the data degree to
    ``(n, n-1)``.  ``coarse`` (typically the ``N/2`` rule) supplies the
    error estimate.  ``z`` must keep a distance of ``margin`` node spacings
    from bD.
    """
    z = np.asarray(z, dtype=complex)
    n = rule.n
    dist = np.min(np.linalg.norm(to_real(rule.nodes - z), axis=-1))
    if rule.domain is not None:
        # first-order distance to bD, so points between nodes are caught too
        r = rule.domain.r
        g = float(np.linalg.norm(r.real_grad(z)))
        if g > 0:
            dist = min(dist, abs(float(r.value(z))) / g)
    if dist < margin * rule.spacing:
        raise ProximityError(f"evaluation point within {margin} node spacings of bD")
    kdeg = _kdeg(n, _degree(phi), True)
    val = _boundary_value(rule, factory, phi, z, q_out, kdeg, chunk)
    err = None
    if coarse is not None:
        err = np.abs(val - _boundary_value(coarse, factory, phi, z, q_out, kdeg, chunk))
    return IntegralResult(FormValue(n, q_out, val), err)


def _volume_value(rule: VolumeRule, factory, phi, z, q_out, kdeg, chunk):
    lam = volume_form_constant(rule.n)
    return _contract(rule.nodes, rule.weights, factory, phi, z, q_out, kdeg, chunk,
                     lambda s, e: np.full(min(e, len(rule.weights)) - s, lam))


def integrate_kernel_volume(rule: VolumeRule, factory: Callable, phi: FormField, z, q_out: int,
                            coarse: Optional[VolumeRule] = None, chunk: int = 65536) -> IntegralResult:
    """``int_region K(z, .) ^ phi`` over the rule's region."""
    z = np.asarray(z, dtype=complex)
    kdeg = _kdeg(rule.n, _degree(phi), False)
    val = _volume_value(rule, factory, phi, z, q_out, kdeg, chunk)
    err = None
    if coarse is not None:
        err = np.abs(val - _volume_value(coarse, factory, phi, z, q_out, kdeg, chunk))
    return IntegralResult(FormValue(rule.n, q_out, val), err)
