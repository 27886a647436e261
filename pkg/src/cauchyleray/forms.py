"""Coefficients of (0,q)-forms and finite-difference dbar.

A (0,q)-form on C^n is stored as a complex array whose last axis runs over
the strictly increasing multi-indices ``multi_indices(n, q)`` (0-based,
lexicographic).  ``q = 0`` has a single coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

MultiIndex = Tuple[int, ...]


class StepError(ValueError):
    """A finite-difference stencil leaves the domain of the field."""


@lru_cache(maxsize=None)
def multi_indices(n: int, q: int) -> Tuple[MultiIndex, ...]:
    """Strictly increasing index tuples of length ``q`` from ``range(n)``."""
    if q < 0 or q > n:
        return ()
    return tuple(combinations(range(n), q))


@lru_cache(maxsize=None)
def index_position(n: int, q: int):
    return {J: i for i, J in enumerate(multi_indices(n, q))}


def wedge_sign(J: Sequence[int], j: int):
    """Sign and sorted index of ``dzbar_j ^ dzbar_J``.

    Returns ``(0, None)`` when ``j`` already occurs in ``J``; otherwise
    ``(+1 or -1, merged)`` where the sign is that of the permutation
    sorting ``(j, *J)``.
    """
    J = tuple(J)
    if j in J:
        return 0, None
    pos = sum(1 for k in J if k < j)
    merged = J[:pos] + (j,) + J[pos:]
    return (-1 if pos % 2 else 1), merged


def merge_sign(K: Sequence[int], L: Sequence[int]):
    """Sign and sorted union for ``d_K ^ d_L`` of two increasing indices."""
    K, L = tuple(K), tuple(L)
    if set(K) & set(L):
        return 0, None
    inversions = sum(1 for k in K for l in L if k > l)
    return (-1 if inversions % 2 else 1), tuple(sorted(K + L))


@lru_cache(maxsize=None)
def dbar_table(n: int, q: int):
    """Triples ``(out, j, inp, sign)``: ``(dbar u)_out += sign * d u_inp / dzbar_j``."""
    out_pos = index_position(n, q + 1)
    rows = []
    for i_in, J in enumerate(multi_indices(n, q)):
        for j in range(n):
            s, I = wedge_sign(J, j)
            if s:
                rows.append((out_pos[I], j, i_in, s))
    return tuple(rows)


@dataclass
class FormValue:
    """Coefficients of a (0,q)-form at one or many points."""

    n: int
    q: int
    coeffs: np.ndarray  # (..., C(n, q))

    @property
    def indices(self):
        return multi_indices(self.n, self.q)

    def __getitem__(self, J):
        return self.coeffs[..., index_position(self.n, self.q)[tuple(J)]]

    def as_dict(self):
        return {J: self.coeffs[..., i] for i, J in enumerate(self.indices)}


class FormField:
    """A (0,q)-form field ``z -> coefficients``.

    Parameters
    ----------
    n, q : int
        Dimension and form degree.
    func : callable
        Maps complex points ``(..., n)`` to coefficients ``(..., C(n, q))``.
    smoothness : str
        Free-form tag (``"polynomial"``, ``"C1"``, ...).
    inside : callable, optional
        Boolean mask of points where the field may be evaluated; used to
        reject finite-difference stencils that leave its domain.
    """

    def __init__(self, n: int, q: int, func: Callable, smoothness: str = "smooth",
                 inside: Optional[Callable] = None, name: str = "phi"):
        if not 0 <= q <= n:
            raise ValueError(f"form degree {q} out of range for n={n}")
        self.n, self.q = int(n), int(q)
        self.func = func
        self.smoothness = smoothness
        self.inside = inside
        self.name = name

    def __repr__(self):
        return f"FormField({self.name!r}, n={self.n}, q={self.q})"

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.asarray(self.func(z), dtype=complex)
        size = len(multi_indices(self.n, self.q))
        if size == 1 and out.shape == z.shape[:-1]:
            out = out[..., None]          # scalar functions may omit the coefficient axis
        return np.broadcast_to(out, z.shape[:-1] + (size,))

    def value(self, z) -> FormValue:
        return FormValue(self.n, self.q, self(z))

    def __add__(self, other: "FormField") -> "FormField":
        return linear_combination([(1.0, self), (1.0, other)])

    def scaled(self, a) -> "FormField":
        return linear_combination([(a, self)])

    @classmethod
    def zero(cls, n, q):
        size = len(multi_indices(n, q))
        return cls(n, q, lambda z: np.zeros(np.shape(z)[:-1] + (size,), complex), "polynomial",
                   name="0")

    @classmethod
    def from_components(cls, n, q, components: dict, **kw):
        """Build from ``{J: scalar function}``; missing indices are zero."""
        pos = index_position(n, q)
        size = len(pos)
        items = [(pos[tuple(J)], f) for J, f in components.items()]

        def func(z):
            out = np.zeros(np.shape(z)[:-1] + (size,), complex)
            for i, f in items:
                out[..., i] = f(z)
            return out

        return cls(n, q, func, **kw)


def linear_combination(terms):
    """Field ``sum a_i * phi_i`` for pairs ``(a_i, phi_i)`` of equal type."""
    n, q = terms[0][1].n, terms[0][1].q
    if any(f.n != n or f.q != q for _, f in terms):
        raise ValueError("cannot combine forms of different type")

    def func(z):
        return sum(a * f(z) for a, f in terms)

    return FormField(n, q, func, "combination", name="+".join(f.name for _, f in terms))


def wedge_one_form(one_form, coeffs, n: int, q: int):
    """Coefficients of ``a ^ phi`` for a (0,1)-form ``a`` and (0,q)-form ``phi``."""
    one_form = np.asarray(one_form)
    coeffs = np.asarray(coeffs)
    out = np.zeros(np.broadcast_shapes(one_form.shape[:-1], coeffs.shape[:-1])
                   + (len(multi_indices(n, q + 1)),), dtype=complex)
    for o, j, i, s in dbar_table(n, q):
        out[..., o] += s * one_form[..., j] * coeffs[..., i]
    return out


def _check_stencil(u: FormField, pts):
    if u.inside is not None and not np.all(u.inside(pts)):
        raise StepError("finite-difference stencil leaves the domain of the field")


def wirtinger_dbar_fd(func: Callable, z, h: float, n: int):
    """Central-difference ``d/dzbar_j`` of ``func`` (values ``(..., m)``) for all j.

    Returns an array ``(..., n, m)``.
    """
    z = np.asarray(z, dtype=complex)
    parts = []
    for j in range(n):
        e = np.zeros(n, complex)
        e[j] = h
        dx = (func(z + e) - func(z - e)) / (2 * h)
        dy = (func(z + 1j * e) - func(z - 1j * e)) / (2 * h)
        parts.append(0.5 * (dx + 1j * dy))
    return np.stack(parts, axis=-2)


def stencil_points(z, h: float, n: int):
    """The ``4n`` points used by :func:`dbar_fd` around each ``z``."""
    z = np.asarray(z, dtype=complex)
    eye = np.eye(n)
    offsets = np.concatenate([h * eye, -h * eye, 1j * h * eye, -1j * h * eye])
    return z[..., None, :] + offsets


def dbar_from_partials(partials, n: int, q: int):
    """Assemble ``dbar u`` from Wirtinger partials ``(..., n, C(n,q))``."""
    out = np.zeros(partials.shape[:-2] + (len(multi_indices(n, q + 1)),), dtype=complex)
    for o, j, i, s in dbar_table(n, q):
        out[..., o] += s * partials[..., j, i]
    return out


def dbar_fd(u: FormField, z, h: float = 1e-4) -> FormValue:
    """Central-difference dbar of a (0,q)-form field at points ``z``.

    ``(dbar u)_I = sum_{j in I} sign(j, I \\ j) * d u_{I \\ j} / dzbar_j``.
    Exact up to rounding for polynomials of degree at most 2.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    z = np.asarray(z, dtype=complex)
    if u.q >= u.n:
        return FormValue(u.n, u.q + 1, np.zeros(z.shape[:-1] + (0,), complex))
    _check_stencil(u, stencil_points(z, h, u.n))
    partials = wirtinger_dbar_fd(u, z, h, u.n)
    return FormValue(u.n, u.q + 1, dbar_from_partials(partials, u.n, u.q))


def dbar_closed_residual(phi: FormField, probes, h: float = 1e-4) -> float:
    """``max |dbar phi|`` over probes and coefficients (0 for top-degree forms)."""
    if phi.q < 1:
        raise ValueError("closedness residual needs a form of degree q >= 1")
    d = dbar_fd(phi, probes, h).coeffs
    return float(np.max(np.abs(d))) if d.size else 0.0
