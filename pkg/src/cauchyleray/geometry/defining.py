"""Real defining functions on C^n and their Wirtinger derivatives.

Points are complex arrays of shape ``(..., n)``.  Real coordinates are
interleaved as ``(x_1, y_1, ..., x_n, y_n)`` wherever a real view is needed.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np


def to_real(z):
    """Interleave a complex ``(..., n)`` array into a real ``(..., 2n)`` array."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def to_complex(u):
    """Inverse of :func:`to_real`."""
    u = np.asarray(u, dtype=float)
    return u[..., 0::2] + 1j * u[..., 1::2]


def wirtinger_from_real(real_grad):
    """Holomorphic Wirtinger gradient ``dr/dz_j = (r_x - i r_y)/2``."""
    return 0.5 * (real_grad[..., 0::2] - 1j * real_grad[..., 1::2])


def mixed_from_real(real_hess):
    """Matrix ``d^2 r / dz_j dzbar_k`` from the real Hessian."""
    hxx = real_hess[..., 0::2, 0::2]
    hyy = real_hess[..., 1::2, 1::2]
    hxy = real_hess[..., 0::2, 1::2]  # [j, k] = r_{x_j y_k}
    hyx = real_hess[..., 1::2, 0::2]  # [j, k] = r_{y_j x_k}
    return 0.25 * ((hxx + hyy) + 1j * (hxy - hyx))


class DefiningFunction:
    """A real scalar field ``r`` near a closed domain, with derivatives.

    Parameters
    ----------
    n : int
        Complex dimension.
    value : callable
        Maps complex points ``(..., n)`` to real values ``(...)``.
    real_grad, real_hess : callable, optional
        Real gradient ``(..., 2n)`` and Hessian ``(..., 2n, 2n)``.  Missing
        derivatives fall back to central differences.
    smoothness : {"smooth", "C11"}
        ``"C11"`` marks functions whose Hessian exists only almost
        everywhere; the Hessian callable then returns a.e. values.
    coordinate_terms : sequence, optional
        For separable functions ``r = sum_i f_i(u_i) + const``: a pair
        ``(terms, const)`` where ``terms[i] = (f_i, df_i)`` acts on the i-th
        real coordinate.  Used by :func:`~cauchyleray.geometry.mollify`.
    """

    def __init__(
        self,
        n: int,
        value: Callable,
        real_grad: Optional[Callable] = None,
        real_hess: Optional[Callable] = None,
        smoothness: str = "smooth",
        name: str = "r",
        fd_step: float = 1e-5,
        coordinate_terms=None,
    ):
        if smoothness not in ("smooth", "C11"):
            raise ValueError(f"unknown smoothness class {smoothness!r}")
        self.n = int(n)
        self._value = value
        self._real_grad = real_grad
        self._real_hess = real_hess
        self.smoothness = smoothness
        self.name = name
        self.fd_step = fd_step
        self.coordinate_terms = coordinate_terms

    def __repr__(self):
        return f"DefiningFunction({self.name!r}, n={self.n}, {self.smoothness})"

    def __call__(self, z):
        return self.value(z)

    def value(self, z):
        return np.asarray(self._value(np.asarray(z, dtype=complex)), dtype=float)

    def real_grad(self, z):
        z = np.asarray(z, dtype=complex)
        if self._real_grad is not None:
            return np.asarray(self._real_grad(z), dtype=float)
        h = self.fd_step
        u = to_real(z)
        out = np.empty(u.shape)
        for i in range(u.shape[-1]):
            e = np.zeros(u.shape[-1])
            e[i] = h
            out[..., i] = (self.value(to_complex(u + e)) - self.value(to_complex(u - e))) / (2 * h)
        return out

    def real_hess(self, z):
        z = np.asarray(z, dtype=complex)
        if self._real_hess is not None:
            return np.asarray(self._real_hess(z), dtype=float)
        h = 10 * self.fd_step
        u = to_real(z)
        m = u.shape[-1]
        out = np.empty(u.shape + (m,))
        for i in range(m):
            e = np.zeros(m)
            e[i] = h
            gp = self.real_grad(to_complex(u + e))
            gm = self.real_grad(to_complex(u - e))
            out[..., :, i] = (gp - gm) / (2 * h)
        return 0.5 * (out + np.swapaxes(out, -1, -2))

    def grad(self, z):
        """Wirtinger gradient ``r_zeta = (dr/dzeta_1, ..., dr/dzeta_n)``."""
        return wirtinger_from_real(self.real_grad(z))

    def mixed_hessian(self, z):
        """``H[j, k] = d^2 r / dzeta_j dzetabar_k`` (a.e. for C11 functions)."""
        return mixed_from_real(self.real_hess(z))

    def scaled(self, factor: Callable, factor_grad: Optional[Callable] = None, name=None):
        """The defining function ``h * r`` for a positive field ``h``.

        ``factor`` maps complex points to positive reals; ``factor_grad``
        (real gradient) is optional.  Derivatives of the product are taken
        by the product rule where possible and by differences otherwise.
        """
        base = self

        def value(z):
            return factor(z) * base.value(z)

        grad = None
        if factor_grad is not None:
            def grad(z):
                return (factor_grad(z) * base.value(z)[..., None]
                        + factor(z)[..., None] * base.real_grad(z))

        return DefiningFunction(self.n, value, grad, None, self.smoothness,
                                name or f"h*{self.name}", self.fd_step)


def quadratic_function(n, center, semi_axes, name="ellipsoid"):
    """``r(u) = sum_i ((u_i - c_i) / a_i)^2 - 1`` over real coordinates."""
    c = to_real(np.asarray(center, dtype=complex).reshape(n))
    a = np.asarray(semi_axes, dtype=float).reshape(2 * n)
    inv2 = 1.0 / a**2

    def value(z):
        d = to_real(z) - c
        return np.sum(d * d * inv2, axis=-1) - 1.0

    def real_grad(z):
        return 2.0 * (to_real(z) - c) * inv2

    hess = np.diag(2.0 * inv2)

    def real_hess(z):
        z = np.asarray(z)
        return np.broadcast_to(hess, z.shape[:-1] + hess.shape).copy()

    terms = [((lambda u, i=i: (u - c[i]) ** 2 * inv2[i]),
              (lambda u, i=i: 2 * (u - c[i]) * inv2[i])) for i in range(2 * n)]
    return DefiningFunction(n, value, real_grad, real_hess, "smooth", name,
                            coordinate_terms=(terms, -1.0))


def ball_function(n, radius=1.0, center=None):
    """``r = |z - c|^2 - R^2`` (no rescaling, so that ``r_zeta = conj(z - c)``)."""
    c = np.zeros(n, dtype=complex) if center is None else np.asarray(center, dtype=complex)
    cr = to_real(c)
    R2 = float(radius) ** 2

    def value(z):
        d = to_real(z) - cr
        return np.sum(d * d, axis=-1) - R2

    def real_grad(z):
        return 2.0 * (to_real(z) - cr)

    hess = 2.0 * np.eye(2 * n)

    def real_hess(z):
        z = np.asarray(z)
        return np.broadcast_to(hess, z.shape[:-1] + hess.shape).copy()

    terms = [((lambda u, i=i: (u - cr[i]) ** 2), (lambda u, i=i: 2 * (u - cr[i])))
             for i in range(2 * n)]
    return DefiningFunction(n, value, real_grad, real_hess, "smooth", "ball",
                            coordinate_terms=(terms, -R2))


def power_function(exponents: Sequence[float], level: float = 1.0, coeffs=None):
    """``r = sum_i a_i |u_i|^{m_i} - C`` over the 2n real coordinates.

    For ``m_i < 2`` the second derivative blows up on ``u_i = 0``; the
    Hessian returns the a.e. value there with the hyperplane value set to 0
    (a measure-zero choice; quadrature nodes are jittered off it).
    """
    m = np.asarray(exponents, dtype=float)
    if m.ndim != 1 or m.size % 2:
        raise ValueError("need an even number 2n of exponents")
    if np.any(m <= 1.0):
        raise ValueError("power-domain exponents must satisfy m_j > 1")
    a = np.ones_like(m) if coeffs is None else np.asarray(coeffs, dtype=float)
    n = m.size // 2
    smooth = bool(np.all((m >= 2.0) & (np.abs(m - np.round(m)) < 1e-12) & (np.round(m) % 2 == 0)))
    smoothness = "smooth" if smooth else "C11"

    def value(z):
        return np.sum(a * np.abs(to_real(z)) ** m, axis=-1) - level

    def real_grad(z):
        u = to_real(z)
        return a * m * np.abs(u) ** (m - 1) * np.sign(u)

    def real_hess(z):
        u = np.abs(to_real(z))
        with np.errstate(divide="ignore", invalid="ignore"):
            d = a * m * (m - 1) * u ** (m - 2)
        d = np.where(u == 0.0, np.where(m >= 2, d, 0.0), d)
        out = np.zeros(u.shape + (u.shape[-1],))
        idx = np.arange(u.shape[-1])
        out[..., idx, idx] = d
        return out

    terms = [((lambda u, i=i: a[i] * np.abs(u) ** m[i]),
              (lambda u, i=i: a[i] * m[i] * np.abs(u) ** (m[i] - 1) * np.sign(u)))
             for i in range(2 * n)]
    return DefiningFunction(n, value, real_grad, real_hess, smoothness, "power",
                            coordinate_terms=(terms, -float(level)))


def star_function(n, radial: Callable, name="star"):
    """``r(z) = |z| - rho(z/|z|)`` for a positive radial function ``rho``.

    ``radial`` takes unit complex vectors ``(..., n)``.  Derivatives are
    taken by central differences.
    """

    def value(z):
        z = np.asarray(z, dtype=complex)
        R = np.sqrt(np.sum(np.abs(z) ** 2, axis=-1))
        safe = np.where(R > 0, R, 1.0)[..., None]
        return R - radial(z / safe)

    return DefiningFunction(n, value, None, None, "smooth", name)


def limacon_function(b: float):
    """Limacon ``rho(theta) = 1 + b cos(theta)`` in C, as ``|z| - 1 - b x/|z|``."""
    b = float(b)

    def value(z):
        z = np.asarray(z, dtype=complex)[..., 0]
        R = np.abs(z)
        cos = np.divide(z.real, R, out=np.zeros_like(R), where=R > 0)
        return R - 1.0 - b * cos

    def real_grad(z):
        z = np.asarray(z, dtype=complex)[..., 0]
        x, y, R = z.real, z.imag, np.abs(z)
        gx = x / R - b * (1.0 / R - x * x / R**3)
        gy = y / R + b * x * y / R**3
        return np.stack([gx, gy], axis=-1)

    return DefiningFunction(1, value, real_grad, None, "smooth", "limacon")
