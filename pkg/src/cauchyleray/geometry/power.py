"""Uniform convexity gap of ``f(x) = sum_j a_j |x_j|^{m_j}``."""

from __future__ import annotations

import numpy as np


def power_value_grad(m, x, coeffs=None):
    """``f(x)`` and its gradient; at ``x_j = 0`` the gradient entry is 0."""
    x = np.asarray(x, dtype=float)
    m = np.broadcast_to(np.asarray(m, dtype=float), x.shape[-1:])
    a = np.ones_like(m) if coeffs is None else np.broadcast_to(np.asarray(coeffs, dtype=float), m.shape)
    ax = np.abs(x)
    f = np.sum(a * ax**m, axis=-1)
    g = a * m * ax ** (m - 1) * np.sign(x)
    return f, g


def power_gap(m, x, y, coeffs=None):
    """Quotient ``(f(y) - f(x) - grad f(x).(y - x)) / |y - x|^{max(m_*, 2)}``.

    ``m`` is a scalar or one exponent per coordinate (all ``> 1``);
    ``m_*`` is the largest.  ``x`` and ``y`` broadcast over leading axes.
    Pairs with ``y == x`` give ``+inf``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mm = np.asarray(m, dtype=float)
    if np.any(mm <= 1):
        raise ValueError("exponents must exceed 1")
    p = max(float(np.max(mm)), 2.0)
    fx, gx = power_value_grad(m, x, coeffs)
    fy, _ = power_value_grad(m, y, coeffs)
    d = y - x
    num = fy - fx - np.sum(gx * d, axis=-1)
    dist = np.linalg.norm(d, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = num / dist**p
    return np.where(dist > 0, q, np.inf)
