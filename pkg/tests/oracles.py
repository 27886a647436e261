"""Independent reference implementations used only by the tests.

The kernel oracle expands the Cauchy-Fantappie forms symbolically, term by
term, in a small dictionary-based exterior algebra.  It shares no code with
the determinant formulas of the package.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import sympy as sp


class Ext:
    """Exterior algebra over generators ``0..3n-1``:
    dzeta_j -> j, dzetabar_j -> n + j, dzbar_j -> 2n + j."""

    @staticmethod
    def wedge(a, b):
        out = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                if set(ma) & set(mb):
                    continue
                seq = list(ma) + list(mb)
                inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
                key = tuple(sorted(seq))
                out[key] = out.get(key, 0) + (-1) ** inv * ca * cb
        return out

    @staticmethod
    def add(a, b, s=1):
        out = dict(a)
        for k, v in b.items():
            out[k] = out.get(k, 0) + s * v
        return out

    @staticmethod
    def power(a, k):
        out = {(): sp.Integer(1)}
        for _ in range(k):
            out = Ext.wedge(out, a)
        return out


class KernelOracle:
    """Symbolic kernels for a defining function given as a sympy expression
    in the symbols ``zeta_j`` and ``zetab_j``."""

    def __init__(self, n, r_expr=None, a=None):
        self.n = n
        self.zeta = sp.symbols(f"zeta0:{n}")
        self.zetab = sp.symbols(f"zetab0:{n}")
        self.z = sp.symbols(f"z0:{n}")
        self.zb = sp.symbols(f"zb0:{n}")
        if r_expr is None:
            r_expr = sum(self.zeta[j] * self.zetab[j] for j in range(n)) - 1
        self.r = r_expr
        g0 = [self.zetab[j] - self.zb[j] for j in range(n)]
        g1 = [sp.diff(r_expr, self.zeta[j]) for j in range(n)]
        self.omega = {0: self._omega(g0), 1: self._omega(g1)}

    def _omega(self, g):
        n = self.n
        den = sum(g[j] * (self.zeta[j] - self.z[j]) for j in range(n))
        c = 1 / (2 * sp.pi * sp.I)
        return {(j,): c * g[j] / den for j in range(n)}

    def dbar(self, form):
        n = self.n
        out = {}
        for mono, c in form.items():
            for k in range(n):
                for var, gen in ((self.zetab[k], n + k), (self.zb[k], 2 * n + k)):
                    dc = sp.diff(c, var)
                    if dc != 0:
                        out = Ext.add(out, Ext.wedge({(gen,): dc}, {mono: 1}))
        return out

    def omega_i(self, i):
        w = self.omega[i]
        return Ext.wedge(w, Ext.power(self.dbar(w), self.n - 1))

    def omega01(self):
        n = self.n
        w0, w1 = self.omega[0], self.omega[1]
        d0, d1 = self.dbar(w0), self.dbar(w1)
        total = {}
        for alpha in range(n - 1):
            beta = n - 2 - alpha
            total = Ext.add(total, Ext.wedge(Ext.power(d0, alpha), Ext.power(d1, beta)))
        return Ext.wedge(Ext.wedge(w0, w1), total)

    def component(self, form, q, kdeg):
        """Numeric evaluators for the coefficients with q dzbar and kdeg dzetabar."""
        n = self.n
        args = list(self.zeta) + list(self.zetab) + list(self.z) + list(self.zb)
        from itertools import combinations
        Js = list(combinations(range(n), q))
        Ks = list(combinations(range(n), kdeg))
        funcs = []
        for J in Js:
            row = []
            for K in Ks:
                key = tuple(range(n)) + tuple(n + k for k in K) + tuple(2 * n + j for j in J)
                expr = form.get(key, 0)
                row.append(sp.lambdify(args, expr, "numpy"))
            funcs.append(row)

        def evaluate(z, zeta):
            vals = list(zeta) + list(np.conj(zeta)) + list(z) + list(np.conj(z))
            return np.array([[complex(f(*vals)) for f in row] for row in funcs])

        return evaluate


@lru_cache(maxsize=None)
def ball_oracle(n=2):
    return KernelOracle(n)


def ellipsoid_expr(oracle_n, semi_axes):
    zeta = sp.symbols(f"zeta0:{oracle_n}")
    zetab = sp.symbols(f"zetab0:{oracle_n}")
    expr = -1
    for j in range(oracle_n):
        x = (zeta[j] + zetab[j]) / 2
        y = (zeta[j] - zetab[j]) / (2 * sp.I)
        expr += (x / semi_axes[2 * j]) ** 2 + (y / semi_axes[2 * j + 1]) ** 2
    return sp.expand(expr)


def cauchy_kernel(z, zeta):
    """``(2 pi i)^{-1} / (zeta - z)`` for n = 1."""
    return 1.0 / (2j * np.pi * (zeta - z))


def brute_force_pair_max(f, xs, a):
    """``max_{i<j} |f(x_i) - f(x_j)| / |x_i - x_j|^a`` over every pair of a 1-d grid."""
    xs = np.asarray(xs, dtype=float)
    fx = f(xs)
    best = 0.0
    for i in range(len(xs)):
        d = np.abs(xs[i + 1:] - xs[i])
        if d.size:
            best = max(best, float(np.max(np.abs(fx[i + 1:] - fx[i]) / d**a)))
    return best


def cauchy_transform_disk(f, z):
    """``-(1/pi) int_{|zeta|<1} f(zeta) / (zeta - z) dA`` by adaptive quadrature.

    Polar coordinates about ``z`` cancel the singularity; the outer radius
    along angle ``t`` solves ``|z + s e^{it}| = 1``.
    """
    from scipy.integrate import quad

    def outer(t):
        e = np.exp(1j * t)
        b = (np.conj(z) * e).real
        R = -b + np.sqrt(b * b + 1 - abs(z) ** 2)

        def inner(s, part):
            v = f(z + s * e) / e
            return v.real if part == 0 else v.imag

        re = quad(inner, 0, R, args=(0,), epsabs=1e-13, epsrel=1e-13)[0]
        im = quad(inner, 0, R, args=(1,), epsabs=1e-13, epsrel=1e-13)[0]
        return re, im

    re = quad(lambda t: outer(t)[0], 0, 2 * np.pi, epsabs=1e-12, epsrel=1e-12, limit=200)[0]
    im = quad(lambda t: outer(t)[1], 0, 2 * np.pi, epsabs=1e-12, epsrel=1e-12, limit=200)[0]
    return -(re + 1j * im) / np.pi


def gaussian_smoothed_quad(g, x, sigma):
    """``int g(x - t) N(0, sigma^2)(t) dt`` for a scalar function of one variable."""
    from scipy.integrate import quad

    dens = lambda t: np.exp(-0.5 * (t / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))
    return quad(lambda t: g(x - t) * dens(t), -10 * sigma, 10 * sigma, points=[x],
                epsabs=1e-13, epsrel=1e-12, limit=200)[0]
