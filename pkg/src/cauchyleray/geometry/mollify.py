"""Gaussian mollification of C^{1,1} defining functions.

``mollify(r, k)`` convolves ``r`` with a Gaussian of standard deviation
``width / k``.  For a C^{1,1} function the result is smooth, converges to
``r`` in C^1 at rate ``1/k`` (C^0 at rate ``1/k^2``) and its second
derivatives stay bounded by the essential bound of those of ``r``.
"""

from __future__ import annotations

import itertools

import numpy as np

from .defining import DefiningFunction, to_complex, to_real


def _gaussian_grid(sigma, points):
    s = np.linspace(-6 * sigma, 6 * sigma, points)
    w = np.exp(-0.5 * (s / sigma) ** 2)
    w[[0, -1]] *= 0.5
    w /= w.sum()
    # derivative of the normalized Gaussian, same trapezoid weights
    dw = -s / sigma**2 * w
    return s, w, dw


def _separable(r: DefiningFunction, sigma: float, points: int) -> DefiningFunction:
    terms, const = r.coordinate_terms
    s, w, dw = _gaussian_grid(sigma, points)

    def conv(fun, u, kernel):
        u = np.asarray(u, dtype=float)
        return fun(u[..., None] - s) @ kernel

    def value(z):
        u = to_real(z)
        return sum(conv(f, u[..., i], w) for i, (f, _) in enumerate(terms)) + const

    def real_grad(z):
        u = to_real(z)
        return np.stack([conv(df, u[..., i], w) for i, (_, df) in enumerate(terms)], axis=-1)

    def real_hess(z):
        u = to_real(z)
        d = np.stack([conv(df, u[..., i], dw) for i, (_, df) in enumerate(terms)], axis=-1)
        out = np.zeros(u.shape + (u.shape[-1],))
        idx = np.arange(u.shape[-1])
        out[..., idx, idx] = d
        return out

    mol_terms = [((lambda u, f=f: conv(f, u, w)), (lambda u, df=df: conv(df, u, w)))
                 for f, df in terms]
    return DefiningFunction(r.n, value, real_grad, real_hess, "smooth",
                            f"{r.name}*G", coordinate_terms=(mol_terms, const))


def _tensor(r: DefiningFunction, sigma: float, order: int) -> DefiningFunction:
    x, wts = np.polynomial.hermite_e.hermegauss(order)
    wts = wts / wts.sum()
    m = 2 * r.n
    nodes = np.array(list(itertools.product(x, repeat=m)))        # (P, m), standard normal
    weights = np.prod(np.array(list(itertools.product(wts, repeat=m))), axis=-1)
    shifts = sigma * nodes

    def shifted(z):
        u = to_real(z)
        return to_complex(u[..., None, :] - shifts)

    def value(z):
        return r.value(shifted(z)) @ weights

    def real_grad(z):
        return np.einsum("...pi,p->...i", r.real_grad(shifted(z)), weights)

    def real_hess(z):
        g = r.real_grad(shifted(z))
        h = np.einsum("...pi,pj,p->...ij", g, -nodes / sigma, weights)
        return 0.5 * (h + np.swapaxes(h, -1, -2))

    return DefiningFunction(r.n, value, real_grad, real_hess, "smooth", f"{r.name}*G")


def mollify(r: DefiningFunction, k: int, width: float = 1.0, grid_points: int = 801,
            hermite_order: int = 5) -> DefiningFunction:
    """Smooth approximant ``r * G_sigma`` with ``sigma = width / k``.

    Separable functions (those carrying ``coordinate_terms``) are convolved
    coordinate by coordinate on a uniform grid over ``[-6 sigma, 6 sigma]``;
    other functions use a tensor Gauss-Hermite rule in all ``2n`` real
    directions.  Second derivatives are obtained by moving one derivative
    onto the Gaussian, so they exist even where ``r`` has only an a.e.
    Hessian.
    """
    if k <= 0:
        raise ValueError("mollification index k must be positive")
    sigma = width / k
    if r.coordinate_terms is not None:
        return _separable(r, sigma, grid_points)
    return _tensor(r, sigma, hermite_order)
