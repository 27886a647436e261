"""Cauchy-Fantappie kernels built from the weights ``g0 = conj(zeta - z)`` and
``g1 = r_zeta``, as explicit coefficient arrays.

Every kernel is a double form with ``dzeta_1 ^ ... ^ dzeta_n`` in front.
Its coefficients are stored for the monomials

    dzeta_1 ^ ... ^ dzeta_n ^ dzetabar_K ^ dzbar_J

(``K`` and ``J`` strictly increasing, z-differentials on the right; terms
containing ``dz`` are discarded).  ``KernelCoefficients.matrix`` has shape
``(..., C(n, q), C(n, |K|))`` with rows indexed by the output index ``J``
and columns by ``K``.

The coefficients come from a closed-form expansion of
``omega ^ (dbar omega)^(n-1)`` (and of the mixed transition kernel) into
determinants of the matrix ``[g | dg/dzetabar | dg/dzbar]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import factorial
from typing import Optional

import numpy as np

from .forms import merge_sign, multi_indices, wedge_sign
from .geometry.defining import DefiningFunction

KINDS = ("Omega0", "Omega1", "Omega01")


class SingularError(ValueError):
    """The kernel denominator ``g . (zeta - z)`` is below the guard."""


class DegreeError(ValueError):
    """Requested z-degree is outside the range carried by the kernel."""


@dataclass(frozen=True)
class SingularSetGuard:
    """Minimum admissible ``|g . (zeta - z)|``, as ``rel * scale**2`` per weight."""

    rel: float = 1e-8
    scale: float = 1.0

    @property
    def threshold(self) -> float:
        return self.rel * self.scale**2

    def check(self, denom, label):
        if np.any(np.abs(denom) < self.threshold):
            raise SingularError(f"|{label} . (zeta - z)| below guard {self.threshold:.3g}")


DEFAULT_GUARD = SingularSetGuard()


@dataclass
class CFWeight:
    """A weight ``g(z, zeta)`` with its dbar derivatives in both variables.

    ``dbar_zeta[..., j, k] = dg_j / dzetabar_k`` and likewise ``dbar_z``.
    """

    label: str
    values: np.ndarray
    dbar_zeta: np.ndarray
    dbar_z: np.ndarray

    @property
    def jacobian(self):
        """``[dg/dzetabar | dg/dzbar]``, shape ``(..., n, 2n)``."""
        return np.concatenate([self.dbar_zeta, self.dbar_z], axis=-1)


def weight_g0(z, zeta) -> CFWeight:
    z = np.asarray(z, dtype=complex)
    zeta = np.asarray(zeta, dtype=complex)
    g = np.conj(zeta - z)
    n = g.shape[-1]
    eye = np.broadcast_to(np.eye(n, dtype=complex), g.shape + (n,))
    return CFWeight("g0", g, eye, -eye)


def weight_g1(r: DefiningFunction, zeta, grad=None, hess=None) -> CFWeight:
    """``g1 = r_zeta`` (independent of z, hence holomorphic in z)."""
    zeta = np.asarray(zeta, dtype=complex)
    g = r.grad(zeta) if grad is None else grad
    A = r.mixed_hessian(zeta) if hess is None else hess
    return CFWeight("g1", g, A, np.zeros_like(A))


@dataclass
class KernelCoefficients:
    kind: str
    n: int
    q: int
    matrix: np.ndarray

    @property
    def zeta_degree(self) -> int:
        """Number of ``dzetabar`` factors."""
        return self.n - 1 - self.q - (1 if self.kind == "Omega01" else 0)

    @property
    def J_indices(self):
        return multi_indices(self.n, self.q)

    @property
    def K_indices(self):
        return multi_indices(self.n, self.zeta_degree)

    def coefficient(self, J, K):
        i = self.J_indices.index(tuple(J))
        k = self.K_indices.index(tuple(K))
        return self.matrix[..., i, k]


def _det(mat):
    """Batched determinant with closed forms for sizes up to 3."""
    k = mat.shape[-1]
    if k == 1:
        return mat[..., 0, 0]
    if k == 2:
        return mat[..., 0, 0] * mat[..., 1, 1] - mat[..., 0, 1] * mat[..., 1, 0]
    if k == 3:
        a = mat
        return (a[..., 0, 0] * (a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1])
                - a[..., 0, 1] * (a[..., 1, 0] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 0])
                + a[..., 0, 2] * (a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0]))
    return np.linalg.det(mat)


def cf_constant(n: int) -> complex:
    return 1.0 / (2j * np.pi) ** n


def _columns(n, K, J):
    return list(K) + [n + j for j in J]


def single_weight_matrix(weight: CFWeight, w, q: int, guard: SingularSetGuard = DEFAULT_GUARD):
    """Coefficients of ``omega ^ (dbar omega)^(n-1)`` of z-degree ``q``."""
    g = weight.values
    n = g.shape[-1]
    if not 0 <= q <= n - 1:
        raise DegreeError(f"z-degree {q} outside 0..{n - 1}")
    denom = np.sum(g * w, axis=-1)
    guard.check(denom, weight.label)
    M = weight.jacobian
    Ks = multi_indices(n, n - 1 - q)
    Js = multi_indices(n, q)
    pref = cf_constant(n) * factorial(n - 1) * (-1) ** (n * (n - 1) // 2) / denom**n
    out = np.empty(g.shape[:-1] + (len(Js), len(Ks)), dtype=complex)
    for a, J in enumerate(Js):
        for b, K in enumerate(Ks):
            cols = M[..., :, _columns(n, K, J)]
            mat = np.concatenate([g[..., :, None], cols], axis=-1)
            out[..., a, b] = _det(mat) * pref
    return out


def mixed_weight_matrix(w0: CFWeight, w1: CFWeight, w, q: int,
                        guard: SingularSetGuard = DEFAULT_GUARD):
    """Coefficients of the transition kernel between two weights, z-degree ``q``."""
    g0, g1 = w0.values, w1.values
    n = g0.shape[-1]
    if n < 2:
        raise DegreeError("the transition kernel needs n >= 2")
    if not 0 <= q <= n - 2:
        raise DegreeError(f"z-degree {q} outside 0..{n - 2}")
    d0 = np.sum(g0 * w, axis=-1)
    d1 = np.sum(g1 * w, axis=-1)
    guard.check(d0, w0.label)
    guard.check(d1, w1.label)
    M0, M1 = w0.jacobian, w1.jacobian
    Ks = multi_indices(n, n - 2 - q)
    Js = multi_indices(n, q)
    c = cf_constant(n) * (-1) ** n
    out = np.zeros(g0.shape[:-1] + (len(Js), len(Ks)), dtype=complex)
    for alpha in range(n - 1):
        beta = n - 2 - alpha
        s = (factorial(alpha) * factorial(beta)
             * (-1) ** (alpha * (alpha - 1) // 2 + beta * (beta - 1) // 2)
             * (-1) ** (alpha + beta * (alpha + 2)))
        pref = c * s / (d0 ** (alpha + 1) * d1 ** (beta + 1))
        for a, J in enumerate(Js):
            for b, K in enumerate(Ks):
                S = _columns(n, K, J)
                acc = 0
                for T in combinations(S, alpha):
                    rest = tuple(x for x in S if x not in T)
                    sign, _ = merge_sign(T, rest)
                    mat = np.concatenate([g0[..., :, None], M0[..., :, list(T)],
                                          g1[..., :, None], M1[..., :, list(rest)]], axis=-1)
                    acc = acc + sign * _det(mat)
                out[..., a, b] += pref * acc
    return out


def _prep(z, zeta):
    z = np.asarray(z, dtype=complex)
    zeta = np.asarray(zeta, dtype=complex)
    z, zeta = np.broadcast_arrays(z, zeta)
    return z, zeta, zeta - z


def omega0_coeffs(z, zeta, q_out: int, guard: SingularSetGuard = DEFAULT_GUARD) -> KernelCoefficients:
    """Bochner-Martinelli kernel component of z-degree ``q_out``."""
    z, zeta, w = _prep(z, zeta)
    mat = single_weight_matrix(weight_g0(z, zeta), w, q_out, guard)
    return KernelCoefficients("Omega0", z.shape[-1], q_out, mat)


def omega1_coeffs(r: DefiningFunction, z, zeta, q_out: int,
                  guard: SingularSetGuard = DEFAULT_GUARD) -> KernelCoefficients:
    """Leray kernel for the weight ``r_zeta``; zero for ``q_out >= 1``."""
    z, zeta, w = _prep(z, zeta)
    mat = single_weight_matrix(weight_g1(r, zeta), w, q_out, guard)
    return KernelCoefficients("Omega1", z.shape[-1], q_out, mat)


def omega01_coeffs(r: DefiningFunction, z, zeta, q_out: int,
                   guard: SingularSetGuard = DEFAULT_GUARD) -> KernelCoefficients:
    """Transition kernel between the Bochner-Martinelli and Leray weights."""
    z, zeta, w = _prep(z, zeta)
    mat = mixed_weight_matrix(weight_g0(z, zeta), weight_g1(r, zeta), w, q_out, guard)
    return KernelCoefficients("Omega01", z.shape[-1], q_out, mat)


def kernel_coeffs(kind: str, r: Optional[DefiningFunction], z, zeta, q_out: int,
                  guard: SingularSetGuard = DEFAULT_GUARD) -> KernelCoefficients:
    if kind == "Omega0":
        return omega0_coeffs(z, zeta, q_out, guard)
    if kind == "Omega1":
        return omega1_coeffs(r, z, zeta, q_out, guard)
    if kind == "Omega01":
        return omega01_coeffs(r, z, zeta, q_out, guard)
    raise ValueError(f"unknown kernel kind {kind!r}")


def _zero_or(kind, r, z, zeta, q, n, guard):
    """Kernel matrix, or zeros of the right shape when ``q`` is out of range."""
    top = n - 2 if kind == "Omega01" else n - 1
    kdeg = n - 1 - q - (1 if kind == "Omega01" else 0)
    if q < 0 or q > top:
        shape = np.broadcast_shapes(np.shape(z)[:-1], np.shape(zeta)[:-1])
        return np.zeros(shape + (len(multi_indices(n, q)), len(multi_indices(n, kdeg))), complex)
    return kernel_coeffs(kind, r, z, zeta, q, guard).matrix


def _dbar_partials(fun, x, h, n):
    """Central-difference Wirtinger ``d/dxbar_k`` of ``fun(x)``; shape ``(n, ...)``."""
    parts = []
    for k in range(n):
        e = np.zeros(n, complex)
        e[k] = h
        dx = (fun(x + e) - fun(x - e)) / (2 * h)
        dy = (fun(x + 1j * e) - fun(x - 1j * e)) / (2 * h)
        parts.append(0.5 * (dx + 1j * dy))
    return parts


def dbar_zeta_matrix(partials, n: int, q: int, kdeg: int):
    """``dbar_zeta`` of a double form from the partials of its coefficients.

    ``partials[k]`` holds ``d c / dzetabar_k`` with shape ``(..., C(n,q), C(n,kdeg))``.
    """
    Kin = multi_indices(n, kdeg)
    Kout = {K: i for i, K in enumerate(multi_indices(n, kdeg + 1))}
    out = np.zeros(partials[0].shape[:-1] + (len(Kout),), complex)
    for b, K in enumerate(Kin):
        for k in range(n):
            s, Kn = wedge_sign(K, k)
            if s:
                out[..., Kout[Kn]] += (-1) ** n * s * partials[k][..., b]
    return out


def dbar_z_matrix(partials, n: int, q: int, kdeg: int):
    """``dbar_z`` of a double form; the dzbar factor passes dzeta and dzetabar_K."""
    Jin = multi_indices(n, q)
    Jout = {J: i for i, J in enumerate(multi_indices(n, q + 1))}
    out = np.zeros(partials[0].shape[:-2] + (len(Jout), partials[0].shape[-1]), complex)
    for a, J in enumerate(Jin):
        for k in range(n):
            s, Jn = wedge_sign(J, k)
            if s:
                out[..., Jout[Jn], :] += (-1) ** (n + kdeg) * s * partials[k][..., a, :]
    return out


def koppelman_residual(r_smooth: DefiningFunction, z, zeta, q: int, h: float = 1e-4,
                       identity: str = "both", guard: SingularSetGuard = DEFAULT_GUARD,
                       margin: float = 10.0) -> float:
    """Finite-difference residual of the Koppelman identities at ``(z, zeta)``.

    ``identity="leray"`` checks ``dbar_zeta Omega1_q + dbar_z Omega1_{q-1} = 0``;
    ``"transition"`` checks
    ``dbar_zeta Omega01_q + dbar_z Omega01_{q-1} = Omega0_q - Omega1_q``;
    ``"both"`` returns the larger residual.  For ``n = 1`` the transition
    kernel is absent and the residual is ``|Omega0 - Omega1|``.
    """
    z = np.asarray(z, dtype=complex)
    zeta = np.asarray(zeta, dtype=complex)
    n = z.shape[-1]
    if not 0 <= q <= n - 1:
        raise DegreeError(f"degree {q} outside 0..{n - 1}")
    # every stencil point must clear the guard by the margin factor
    d1 = np.abs(leray_pairing(r_smooth, z, zeta))
    d0 = np.sum(np.abs(zeta - z) ** 2, axis=-1)
    scale_h = margin * h * np.linalg.norm(np.abs(r_smooth.grad(zeta)), axis=-1)
    if np.any(d1 <= scale_h) or np.any(np.sqrt(d0) <= margin * h):
        raise SingularError("point pair within the finite-difference margin of the singular set")

    if n == 1:
        diff = omega0_coeffs(z, zeta, 0, guard).matrix - omega1_coeffs(r_smooth, z, zeta, 0, guard).matrix
        return float(np.max(np.abs(diff)))

    def residual(kind, rhs):
        kq = n - 1 - q - (1 if kind == "Omega01" else 0)
        if kq >= 0:
            pz = _dbar_partials(lambda x: _zero_or(kind, r_smooth, z, x, q, n, guard), zeta, h, n)
            lhs = dbar_zeta_matrix(pz, n, q, kq)
        else:
            lhs = 0
        if q >= 1:
            pw = _dbar_partials(lambda x: _zero_or(kind, r_smooth, x, zeta, q - 1, n, guard), z, h, n)
            lhs = lhs + dbar_z_matrix(pw, n, q - 1, kq + 1)
        return float(np.max(np.abs(lhs - rhs)))

    out = []
    if identity in ("leray", "both"):
        out.append(residual("Omega1", 0.0))
    if identity in ("transition", "both"):
        rhs = (omega0_coeffs(z, zeta, q, guard).matrix
               - omega1_coeffs(r_smooth, z, zeta, q, guard).matrix)
        out.append(residual("Omega01", rhs))
    if not out:
        raise ValueError(f"unknown identity {identity!r}")
    return max(out)


def leray_pairing(r, z, zeta):
    return np.sum(r.grad(zeta) * (np.asarray(zeta) - np.asarray(z)), axis=-1)
