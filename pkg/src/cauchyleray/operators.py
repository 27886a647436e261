"""Extension, commutator and the integral solution operators T_q, H_q, H_0.

With kernels of z-degree ``q - 1`` and data ``phi`` of degree ``q``:

* ``T_q phi = -int_{bD} Omega01_{q-1} ^ phi + int_D Omega0_{q-1} ^ phi``
  (``T_0 phi = int_{bD} Omega1_0 phi``, the Leray integral);
* ``H_q phi = int_U Omega0_{q-1} ^ E phi + int_{U \\ D} Omega01_{q-1} ^ [dbar, E] phi``;
* ``H_0 phi = int_{bD} Omega1_0 phi - int_{U \\ D} Omega1_0 ^ E dbar phi``
  ``        = int_{U \\ D} Omega1_0 ^ [dbar, E] phi``.

They satisfy ``phi = dbar T_q phi + T_{q+1} dbar phi`` and the same with H
(for ``q = 0``: ``phi = H_0 phi + H_1 dbar phi``), which
:func:`homotopy_residual` measures by finite differences.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .forms import (
    FormField,
    dbar_fd,
    dbar_from_partials,
    multi_indices,
    wedge_one_form,
)
from .geometry.defining import DefiningFunction, to_real
from .geometry.domains import Domain, DomainError, random_directions
from .geometry.mollify import mollify
from .kernels import SingularSetGuard, kernel_coeffs
from .quadrature import (
    BoundaryRule,
    build_boundary_rule,
    build_volume_rule,
    integrate_kernel_boundary,
    integrate_kernel_volume,
)


class ConvexityError(ValueError):
    """The pairing ``r_zeta . (zeta - z)`` vanishes for some zeta in U \\ D, z in D."""


class OutOfScopeError(ValueError):
    """Requested operator degree is not handled (e.g. (0,n) data for H_n)."""


# ---------------------------------------------------------------------------
# cutoff and extension


def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t**4 * (35 - 84 * t + 70 * t**2 - 20 * t**3)


def _smoothstep_deriv(t):
    inside = (t > 0) & (t < 1)
    t = np.clip(t, 0.0, 1.0)
    return np.where(inside, 140 * t**3 * (1 - t) ** 3, 0.0)


class ExtensionOperator:
    """Extension ``E`` of forms from the closure of D to U, compactly supported in U.

    ``mode="analytic"`` multiplies a globally defined field by the cutoff
    ``chi`` (``chi = 1`` on ``{r <= delta/4}``, ``chi = 0`` on
    ``{r >= 3 delta/4}``, a C^3 polynomial step in between).
    ``mode="reflection"`` evaluates the field at the radial mirror image
    ``c + (2 rho(w) - t) w`` of ``c + t w`` (``order=0``) or uses the
    two-point reflection ``-3 f(2R - t) + 4 f((3R - t)/2)``, which is C^1
    across bD (``order=1``), again times the cutoff.
    """

    def __init__(self, dom: Domain, mode: str = "analytic", order: int = 0):
        if mode not in ("analytic", "reflection"):
            raise ValueError(f"unknown extension mode {mode!r}")
        if mode == "reflection":
            try:
                dom.check_star_shaped()
            except DomainError as exc:
                raise ValueError(f"reflection mode needs a star-shaped domain: {exc}") from None
        self.dom = dom
        self.mode = mode
        self.order = order
        self.inner = 0.25 * dom.delta
        self.outer = 0.75 * dom.delta

    def cutoff(self, z):
        t = (self.dom.r.value(z) - self.inner) / (self.outer - self.inner)
        return 1.0 - _smoothstep(t)

    def dbar_cutoff(self, z):
        """Coefficients of ``dbar chi`` (a (0,1)-form)."""
        t = (self.dom.r.value(z) - self.inner) / (self.outer - self.inner)
        ds = _smoothstep_deriv(t) / (self.outer - self.inner)
        return -ds[..., None] * np.conj(self.dom.r.grad(z))

    def reflect(self, z, along=1.0):
        """Radial mirror image of points outside D (identity inside)."""
        z = np.asarray(z, dtype=complex)
        d = z - self.dom.center
        t = np.linalg.norm(to_real(d), axis=-1)
        safe = np.where(t > 0, t, 1.0)
        omega = d / safe[..., None]
        R = self.dom.radius_along(omega)
        tr = np.where(t > R, R - along * (t - R), t)
        return self.dom.center + tr[..., None] * omega

    def _raw(self, phi: FormField, z):
        if self.mode == "analytic":
            return phi(z)
        if self.order == 0:
            return phi(self.reflect(z))
        return -3.0 * phi(self.reflect(z, 1.0)) + 4.0 * phi(self.reflect(z, 0.5))

    def apply(self, phi: FormField, z):
        z = np.asarray(z, dtype=complex)
        chi = self.cutoff(z)
        out = np.zeros(z.shape[:-1] + (len(multi_indices(phi.n, phi.q)),), complex)
        live = chi > 0
        if np.any(live):
            out[live] = chi[live][:, None] * self._raw(phi, z[live])
        return out


def extend(E: ExtensionOperator, phi: FormField) -> FormField:
    """The field ``E phi`` on U (zero outside ``{r < 3 delta/4}``)."""
    return FormField(phi.n, phi.q, lambda z: E.apply(phi, z), f"E[{phi.smoothness}]",
                     name=f"E{phi.name}")


def dbar_field(phi: FormField, h: float = 1e-5) -> FormField:
    """``dbar phi`` as a field, by central differences at each evaluation point."""
    if phi.q >= phi.n:
        raise OutOfScopeError("dbar of a top-degree form vanishes identically")
    return FormField(phi.n, phi.q + 1, lambda z: dbar_fd(phi, z, h).coeffs,
                     name=f"dbar{phi.name}")


def commutator(E: ExtensionOperator, phi: FormField, dbar_phi: Optional[FormField] = None,
               h: float = 1e-5) -> FormField:
    """``[dbar, E] phi = dbar(E phi) - E(dbar phi)``, supported in U \\ D.

    In analytic mode this is exactly ``dbar chi ^ phi``; in reflection mode
    it is evaluated by finite differences (``dbar_phi`` defaults to the
    finite-difference field of ``phi``).
    """
    n, q = phi.n, phi.q
    if E.mode == "analytic":
        def func(z):
            z = np.asarray(z, dtype=complex)
            return wedge_one_form(E.dbar_cutoff(z), phi(z), n, q)
    else:
        dphi = dbar_phi or dbar_field(phi, h)
        Ephi = extend(E, phi)

        def func(z):
            z = np.asarray(z, dtype=complex)
            inside = E.dom.r.value(z) < 0
            out = dbar_fd(Ephi, z, h).coeffs - E.apply(dphi, z)
            out[inside] = 0.0
            return out
    return FormField(n, q + 1, func, "C0", name=f"[dbar,E]{phi.name}")


# ---------------------------------------------------------------------------
# discretization


@dataclass
class Discretization:
    """Quadrature resolutions for the operators.

    ``N`` points per angle (coarse estimates use ``N // 2``), ``radial``
    Gauss points per radial segment, exclusion radius ``eps`` (relative to
    the domain scale) around the evaluation point.
    """

    N: int = 32
    radial: Optional[int] = None
    eps: float = 0.05
    omit_exclusion: bool = False
    estimate_error: bool = True
    guard: SingularSetGuard = field(default_factory=SingularSetGuard)
    _bcache: Dict[int, BoundaryRule] = field(default_factory=dict, repr=False)

    def refined(self, factor: int = 2) -> "Discretization":
        """Joint refinement: ``N`` and ``radial`` times ``factor``, ``eps`` divided by it."""
        return Discretization(self.N * factor, None if self.radial is None else self.radial * factor,
                              self.eps / factor, self.omit_exclusion, self.estimate_error,
                              self.guard)

    def resolutions(self):
        return (self.N, self.N // 2) if self.estimate_error else (self.N,)

    def radial_points(self, N):
        return self.radial if self.radial is not None else max(2, N // 4)

    def boundary(self, dom: Domain, N: int) -> BoundaryRule:
        key = (id(dom), N)
        if key not in self._bcache:
            self._bcache[key] = build_boundary_rule(dom, N)
        return self._bcache[key]

    def volume(self, dom: Domain, region: str, z, N: int, levels=(), outer=None, inner=None):
        excl = (z, self.eps * dom.scale) if region != "U\\D" else None
        rule = build_volume_rule(dom, region, N, exclusion=excl, center=z, levels=levels,
                                 outer_level=outer, inner_level=inner,
                                 radial=self.radial_points(N), omit_exclusion=self.omit_exclusion)
        return rule


@dataclass
class HomotopySolution:
    """Operator values at probes with per-coefficient error estimates."""

    op: str
    q: int
    probes: np.ndarray
    values: np.ndarray        # (P, C(n, q-1))
    errors: np.ndarray        # (P, C(n, q-1))
    metadata: dict = field(default_factory=dict)
    residuals: Optional[np.ndarray] = None

    @property
    def n(self):
        return self.probes.shape[-1]


def _weight_function(dom: Domain, mollify_k: Optional[int]) -> DefiningFunction:
    if mollify_k and dom.r.smoothness == "C11":
        return mollify(dom.r, mollify_k)
    return dom.r


def _factory(kind, r, guard):
    def f(z, zeta, q):
        return kernel_coeffs(kind, r, z, zeta, q, guard).matrix
    return f


def _zero_result(n, q):
    size = len(multi_indices(n, q))
    return np.zeros(size, complex)


class _Evaluator:
    """Point evaluation of one operator on one field or a batch of fields."""

    def __init__(self, op, q, phi, dom, disc: Discretization, E=None, mollify_k=None,
                 dbar_phi=None):
        self.batch = isinstance(phi, (list, tuple))
        fields = list(phi) if self.batch else [phi]
        dfields = (list(dbar_phi) if isinstance(dbar_phi, (list, tuple))
                   else [dbar_phi] * len(fields))
        self.op, self.q, self.dom, self.disc = op, q, dom, disc
        self.phi = fields
        self.n = dom.n
        self.E = E or ExtensionOperator(dom)
        self.r = _weight_function(dom, mollify_k)
        g = disc.guard
        self.k0 = _factory("Omega0", None, g)
        self.k1 = _factory("Omega1", self.r, g)
        self.k01 = _factory("Omega01", self.r, g)
        if op == "H":
            self.Ephi = [extend(self.E, f) for f in fields]
            self.comm = [commutator(self.E, f, d) for f, d in zip(fields, dfields)]
            if q == 0:
                self.Edphi = [extend(self.E, d or dbar_field(f)) for f, d in zip(fields, dfields)]

    def _out(self, val):
        return val if self.batch else val[0]

    def at(self, z, N):
        """Operator value at one point ``z`` using resolution ``N``."""
        n, q, dom, disc = self.n, self.q, self.dom, self.disc
        qo = max(q - 1, 0)
        out = np.zeros((len(self.phi), len(multi_indices(n, qo))), complex)
        if self.op == "T":
            if q == 0:
                rb = disc.boundary(dom, N)
                return self._out(integrate_kernel_boundary(rb, self.k1, self.phi, z, 0).coeffs)
            if n >= 2 and q - 1 <= n - 2:
                rb = disc.boundary(dom, N)
                out = out - integrate_kernel_boundary(rb, self.k01, self.phi, z, q - 1).coeffs
            rv = disc.volume(dom, "D", z, N)
            return self._out(out + integrate_kernel_volume(rv, self.k0, self.phi, z, q - 1).coeffs)
        # H operators
        E = self.E
        if q == 0:
            rv = disc.volume(dom, "U\\D", z, N, outer=E.outer, inner=E.inner)
            return self._out(integrate_kernel_volume(rv, self.k1, self.comm, z, 0).coeffs)
        rv = disc.volume(dom, "U", z, N, levels=(0.0, E.inner), outer=E.outer)
        out = out + integrate_kernel_volume(rv, self.k0, self.Ephi, z, q - 1).coeffs
        if n >= 2 and q - 1 <= n - 2:
            ra = disc.volume(dom, "U\\D", z, N, outer=E.outer, inner=E.inner)
            out = out + integrate_kernel_volume(ra, self.k01, self.comm, z, q - 1).coeffs
        return self._out(out)

    def h0_boundary_form(self, z, N):
        """``int_{bD} Omega1 phi - int_{U \\ D} Omega1 ^ E dbar phi``."""
        rb = self.disc.boundary(self.dom, N)
        a = integrate_kernel_boundary(rb, self.k1, self.phi, z, 0).coeffs
        rv = self.disc.volume(self.dom, "U\\D", z, N, levels=(self.E.inner,), outer=self.E.outer)
        return self._out(a - integrate_kernel_volume(rv, self.k1, self.Edphi, z, 0).coeffs)


def _check_q(op, q, n):
    if op not in ("T", "H"):
        raise ValueError(f"unknown operator {op!r}")
    if q < 0 or q > n:
        raise OutOfScopeError(f"degree q={q} outside 0..{n}")


def convexity_precheck(dom: Domain, probes, samples: int = 2000, seed: int = 0,
                       r: Optional[DefiningFunction] = None, outer: Optional[float] = None,
                       polish: int = 4) -> float:
    """Smallest ``|r_zeta . (zeta - z)|`` over collar samples and the probes.

    The zero set of the pairing has measure zero, so the ``polish``
    smallest samples per probe are refined by a local minimization over
    the collar ``{0 <= r <= outer}``.  Raises :class:`ConvexityError`
    (condition: ``r_zeta . (zeta - z) != 0`` for zeta in U \\ D and z in D)
    when the minimum is numerically zero.
    """
    from scipy.optimize import minimize

    r = r or dom.r
    rng = np.random.default_rng(seed)
    omega = random_directions(rng, samples, dom.n)
    top = dom.delta if outer is None else outer
    levels = top * rng.random(samples)
    zeta = dom.center + dom.radius_along(omega, levels)[:, None] * omega
    zeta = np.concatenate([zeta, dom.boundary_points(omega)])
    probes = np.atleast_2d(probes)
    pairing = np.abs(np.sum(r.grad(zeta)[None] * (zeta[None] - probes[:, None]), axis=-1))
    tol = 1e-6 * np.max(np.abs(r.grad(zeta))) * dom.scale
    worst = float(pairing.min())

    def on_collar(x):
        w = x[:-1:2] + 1j * x[1:-1:2]
        w = w / max(np.linalg.norm(to_real(w)), 1e-300)
        level = top * 0.5 * (1 - np.cos(x[-1]))          # smooth map onto [0, top]
        return dom.center + dom.radius_along(w[None], level)[0] * w

    for p, z in enumerate(probes):
        for k in np.argsort(pairing[p])[:polish]:
            k0 = k % samples
            t0 = np.arccos(np.clip(1 - 2 * levels[k0] / top, -1, 1)) if k < samples else 0.0
            x0 = np.concatenate([to_real(omega[k0]), [t0]])
            fun = lambda x: float(np.abs(np.sum(r.grad(on_collar(x)) * (on_collar(x) - z))))
            res = minimize(fun, x0, method="Nelder-Mead",
                           options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
            worst = min(worst, float(res.fun))
            if worst <= tol:
                raise ConvexityError("condition violated: r_zeta . (zeta - z) = 0 for a sampled "
                                     "zeta in U \\ D and z in D")
    return worst


def _run(evaluate, probes, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(evaluate, probes))
    return [evaluate(z) for z in probes]


def _solve(op, q, phi, probes, dom, disc, E=None, mollify_k=None, dbar_phi=None, threads=1):
    n = dom.n
    _check_q(op, q, n)
    fields = list(phi) if isinstance(phi, (list, tuple)) else [phi]
    for f in fields:
        if f.q != q or f.n != n:
            raise ValueError(f"data must be (0,{q})-forms on C^{n}")
    if op == "H" and q == n:
        raise OutOfScopeError("H_n on (0,n)-forms is not handled (data with compact support "
                              "extensions are out of scope)")
    probes = np.atleast_2d(np.asarray(probes, dtype=complex))
    if op == "H":
        convexity_precheck(dom, probes, r=_weight_function(dom, mollify_k))
    ev = _Evaluator(op, q, fields, dom, disc, E, mollify_k, dbar_phi)
    res = disc.resolutions()

    def evaluate(z):
        vals = [ev.at(z, N) for N in res]
        err = np.abs(vals[0] - vals[1]) if len(vals) > 1 else np.zeros_like(vals[0])
        return vals[0], err

    out = _run(evaluate, probes, threads)
    values = np.array([v for v, _ in out])        # (P, B, C)
    errors = np.array([e for _, e in out])
    sols = []
    for b, f in enumerate(fields):
        meta = {"N": disc.N, "N_coarse": res[-1], "eps": disc.eps, "domain": repr(dom),
                "phi": f.name, "mollify_k": mollify_k,
                "extension": (E.mode if E else "analytic")}
        sols.append(HomotopySolution(op, q, probes, values[:, b], errors[:, b], meta))
    return (sols if isinstance(phi, (list, tuple)) else sols[0]), ev


def apply_T(q: int, phi: FormField, probes, dom: Domain, disc: Optional[Discretization] = None,
            mollify_k: Optional[int] = None, threads: int = 1) -> HomotopySolution:
    """Values of ``T_q phi`` at interior probes (``T_0`` is the Leray integral)."""
    sol, _ = _solve("T", q, phi, probes, dom, disc or Discretization(), None, mollify_k, None, threads)
    return sol


def apply_H(q: int, phi: FormField, probes, dom: Domain, disc: Optional[Discretization] = None,
            E: Optional[ExtensionOperator] = None, mollify_k: Optional[int] = None,
            dbar_phi: Optional[FormField] = None, threads: int = 1) -> HomotopySolution:
    """Values of ``H_q phi`` (``q >= 1``) at interior probes."""
    if q == 0:
        return apply_H0(phi, probes, dom, disc, E, mollify_k, dbar_phi, threads)
    sol, _ = _solve("H", q, phi, probes, dom, disc or Discretization(), E, mollify_k, dbar_phi,
                    threads)
    return sol


def apply_H0(phi: FormField, probes, dom: Domain, disc: Optional[Discretization] = None,
             E: Optional[ExtensionOperator] = None, mollify_k: Optional[int] = None,
             dbar_phi: Optional[FormField] = None, threads: int = 1, cross_check: bool = True):
    """``H_0 phi`` by the commutator formula, with the boundary formula as a cross-check.

    ``metadata["consistency"]`` holds, per probe, the difference between
    the two expressions of ``H_0``.  A list of fields gives a list of
    solutions (kernel values are shared between them).
    """
    disc = disc or Discretization()
    sol, ev = _solve("H", 0, phi, probes, dom, disc, E, mollify_k, dbar_phi, threads)
    if cross_check:
        probes = np.atleast_2d(np.asarray(probes, dtype=complex))
        other = np.array(_run(lambda z: ev.h0_boundary_form(z, disc.N), probes, threads))
        for b, s in enumerate(sol if isinstance(sol, list) else [sol]):
            alt = other[:, b]
            s.metadata["boundary_form"] = alt
            s.metadata["consistency"] = np.max(np.abs(alt - s.values), axis=-1)
    return sol


def solution_field(op: str, q: int, phi: FormField, dom: Domain,
                   disc: Optional[Discretization] = None, E: Optional[ExtensionOperator] = None,
                   mollify_k: Optional[int] = None, threads: int = 1) -> FormField:
    """The operator output ``op_q phi`` as a field evaluable at interior points.

    Each evaluation runs the quadrature at the finest resolution only (no
    error estimate); useful for sampling the solution on many points.
    """
    disc = disc or Discretization()
    _check_q(op, q, dom.n)
    if op == "H" and q == dom.n:
        raise OutOfScopeError("H_n on (0,n)-forms is not handled")
    ev = _Evaluator(op, q, phi, dom, disc, E, mollify_k)

    def func(z):
        z = np.asarray(z, dtype=complex)
        flat = z.reshape(-1, dom.n)
        vals = np.array(_run(lambda p: ev.at(p, disc.N), flat, threads))
        return vals.reshape(z.shape[:-1] + (len(multi_indices(dom.n, max(q - 1, 0))),))

    return FormField(dom.n, max(q - 1, 0), func, "quadrature",
                     inside=lambda z: dom.contains(z), name=f"{op}{q}({phi.name})")


# ---------------------------------------------------------------------------
# residuals


@dataclass
class ResidualReport:
    op: str
    q: int
    probes: np.ndarray
    residual: np.ndarray          # (P,) max over coefficients
    error_estimate: np.ndarray    # (P,) combined quadrature + finite-difference estimate
    components: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residual)) if self.residual.size else 0.0

    @property
    def max_error(self) -> float:
        return float(np.max(self.error_estimate)) if self.error_estimate.size else 0.0


_EPS = np.finfo(float).eps


def _dbar_of_operator(ev: _Evaluator, z, h, N):
    """Central-difference dbar of the operator output at ``z``."""
    n = ev.n

    def fun(points):
        return np.array([ev.at(p, N) for p in np.atleast_2d(points)])

    parts = []
    for j in range(n):
        e = np.zeros(n, complex)
        e[j] = h
        pts = np.array([z + e, z - e, z + 1j * e, z - 1j * e])
        v = fun(pts)
        parts.append(0.5 * ((v[0] - v[1]) / (2 * h) + 1j * (v[2] - v[3]) / (2 * h)))
    partials = np.stack(parts, axis=-2)           # (..., n, C(n, q-1))
    return dbar_from_partials(partials, n, ev.q - 1)


def homotopy_residual(op: str, q: int, phi, probes, dom: Domain,
                      disc: Optional[Discretization] = None, h: float = 1e-4,
                      dbar_phi=None, closed: bool = False,
                      E: Optional[ExtensionOperator] = None, mollify_k: Optional[int] = None,
                      threads: int = 1):
    """Residual ``|phi - dbar(op_q phi) - op_{q+1}(dbar phi)|`` at probes.

    For ``q = 0`` the first operator term is ``op_0 phi`` itself (no dbar).
    ``closed=True`` declares ``dbar phi = 0`` and skips the second term.
    The error estimate adds the change of every term between resolutions
    ``N`` and ``N/2``, the Richardson estimate ``|D_h - D_{2h}| / 3`` of
    the finite-difference derivative and its rounding level
    ``eps_mach (1 + |op_q phi|) / h``.  ``h`` is relative to the domain
    scale.  A list of fields gives a list of reports (kernel values are
    shared between them).
    """
    disc = disc or Discretization()
    n = dom.n
    _check_q(op, q, n)
    batch = isinstance(phi, (list, tuple))
    fields = list(phi) if batch else [phi]
    probes = np.atleast_2d(np.asarray(probes, dtype=complex))
    if op == "H":
        convexity_precheck(dom, probes, r=_weight_function(dom, mollify_k))
    h = h * dom.scale
    if q < n and not closed:
        if isinstance(dbar_phi, (list, tuple)):
            dphi = list(dbar_phi)
        else:
            dphi = [dbar_phi or dbar_field(f) for f in fields]
    else:
        dphi = None
    ev = _Evaluator(op, q, fields, dom, disc, E, mollify_k, dphi)
    ev_next = _Evaluator(op, q + 1, dphi, dom, disc, E, mollify_k) if dphi is not None else None
    res = disc.resolutions()

    def one(z):
        target = np.array([f(z) for f in fields])          # (B, C)
        errs = []
        if q == 0:
            vals = [ev.at(z, N) for N in res]
            first = vals[0]
            errs.append(np.abs(vals[0] - vals[-1]))
        else:
            d_h = [_dbar_of_operator(ev, z, h, N) for N in res]
            d_2h = _dbar_of_operator(ev, z, 2 * h, res[0])
            first = d_h[0]
            errs.append(np.abs(d_h[0] - d_h[-1]))
            errs.append(np.abs(d_h[0] - d_2h) / 3.0)
            # rounding of the difference quotient
            size = np.max(np.abs(ev.at(z, res[0])), axis=-1, keepdims=True)
            errs.append(_EPS * (1.0 + size) / h * np.ones_like(first.real))
        total = first
        if ev_next is not None:
            vals = [ev_next.at(z, N) for N in res]
            total = total + vals[0]
            errs.append(np.abs(vals[0] - vals[-1]))
        resid = np.abs(target - total)
        return resid.max(axis=-1), sum(errs).max(axis=-1), total

    out = _run(one, probes, threads)
    reports = []
    for b in range(len(fields)):
        reports.append(ResidualReport(
            op, q, probes, np.array([o[0][b] for o in out]), np.array([o[1][b] for o in out]),
            {"solution_terms": np.array([o[2][b] for o in out]), "h": h, "N": disc.N}))
    return reports if batch else reports[0]


def interior_probes(dom: Domain, count: int, seed: int = 0, max_fraction: float = 0.7,
                    min_fraction: float = 0.05) -> np.ndarray:
    """Random points ``c + s rho(w) w`` with ``s`` uniform in the given band."""
    rng = np.random.default_rng(seed)
    omega = random_directions(rng, count, dom.n)
    s = min_fraction + (max_fraction - min_fraction) * rng.random(count)
    return dom.center + (s * dom.radius_along(omega))[:, None] * omega


# ---------------------------------------------------------------------------
# export


def _index_label(J):
    return "-".join(str(j + 1) for j in J) if J else "0"


def solution_rows(sol: HomotopySolution, residuals: Optional[np.ndarray] = None):
    n = sol.n
    Js = multi_indices(n, max(sol.q - 1, 0))
    res = residuals if residuals is not None else sol.residuals
    for p, z in enumerate(sol.probes):
        coords = to_real(z)
        for a, J in enumerate(Js):
            row = {f"{ax}{k + 1}": coords[2 * k + (ax == "y")] for k in range(n) for ax in "xy"}
            row.update({"index": _index_label(J), "real": sol.values[p, a].real,
                        "imag": sol.values[p, a].imag, "error": sol.errors[p, a],
                        "residual": "" if res is None else res[p]})
            yield row


def write_solution_csv(sol: HomotopySolution, path, residuals=None) -> None:
    """CSV with probe coordinates, output multi-index (1-based), real, imag, error, residual."""
    rows = list(solution_rows(sol, residuals))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()) if rows else ["index"])
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in row.items()})
