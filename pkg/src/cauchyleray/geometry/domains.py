"""Domain catalog: balls, ellipsoids, power domains, limacons, star-shaped.

Every domain carries its defining function ``r`` (``D = {r < 0}``), a
center it is star-shaped about, a diameter, and the working neighborhood
``U = {r < delta}`` with ``delta = 0.1 * diameter``.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .defining import (
    DefiningFunction,
    ball_function,
    limacon_function,
    power_function,
    quadratic_function,
    star_function,
    to_complex,
    to_real,
)


class DomainError(ValueError):
    """Invalid domain parameters or a failed geometric construction."""


def random_directions(rng, count, n):
    """Uniform unit vectors on ``S^{2n-1}``, returned as complex ``(count, n)``."""
    u = rng.standard_normal((count, 2 * n))
    u /= np.linalg.norm(u, axis=-1, keepdims=True)
    return to_complex(u)


def _norm(z):
    return np.sqrt(np.sum(np.abs(z) ** 2, axis=-1))


class Domain:
    """Bounded domain ``{r < 0}`` in C^n, star-shaped about ``center``."""

    kind = "domain"

    def __init__(self, r: DefiningFunction, center=None, diameter=None, params=None):
        self.r = r
        self.n = r.n
        self.center = np.zeros(self.n, dtype=complex) if center is None else np.asarray(center, dtype=complex)
        self.params = dict(params or {})
        self._diameter = diameter

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"

    @property
    def diameter(self) -> float:
        if self._diameter is None:
            rng = np.random.default_rng(0)
            pts = self.boundary_points(random_directions(rng, 4000, self.n))
            ext = to_real(pts)
            # support-function estimate over many directions
            dirs = to_real(random_directions(rng, 2000, self.n))
            proj = ext @ dirs.T
            self._diameter = float(np.max(proj.max(axis=0) - proj.min(axis=0)))
        return self._diameter

    @property
    def delta(self) -> float:
        """Level of the neighborhood ``U = {r < delta}``."""
        return 0.1 * self.diameter

    @property
    def scale(self) -> float:
        return 0.5 * self.diameter

    def contains(self, z, level=0.0):
        return self.r.value(z) < level

    def radius_along(self, omega, level=0.0, origin=None):
        """Distance ``R > 0`` with ``r(origin + R*omega) = level``.

        ``omega`` are unit directions ``(..., n)``; ``origin`` defaults to
        the center and must satisfy ``r(origin) < level``.  Assumes the ray
        meets the level set once.
        """
        omega = np.asarray(omega, dtype=complex)
        o = self.center if origin is None else np.asarray(origin, dtype=complex)
        if np.any(self.r.value(o) >= level):
            raise DomainError("ray origin is not inside the requested level set")
        return self._bisect(omega, level, o)

    def _bisect(self, omega, level, o):
        # bracket the first crossing on a coarse grid, then bisect
        shape = np.broadcast_shapes(omega.shape[:-1], o.shape[:-1])
        top = np.full(shape, 1.5 * self.diameter + _norm(o - self.center).max())
        grid = np.linspace(0.0, 1.0, 65)[1:]
        lo = np.zeros(shape)
        hi = np.full(shape, np.nan)
        for _ in range(8):
            todo = np.isnan(hi)
            if not np.any(todo):
                break
            ts = top[..., None] * grid                          # (..., 64)
            pts = o[..., None, :] + ts[..., None] * omega[..., None, :]
            outside = self.r.value(pts) > np.asarray(level)[..., None]
            first = np.argmax(outside, axis=-1)
            found = outside.any(axis=-1) & todo
            idx = first[..., None]
            t_hi = np.take_along_axis(ts, idx, -1)[..., 0]
            t_lo = np.where(first > 0, np.take_along_axis(ts, np.maximum(idx - 1, 0), -1)[..., 0], 0.0)
            hi = np.where(found, t_hi, hi)
            lo = np.where(found, t_lo, lo)
            top = np.where(todo & ~found, 2 * top, top)
        if np.any(np.isnan(hi)):
            raise DomainError("level set not reached along some rays (unbounded?)")
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            inside = self.r.value(o + mid[..., None] * omega) < level
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        return 0.5 * (lo + hi)

    def boundary_points(self, omega, level=0.0):
        omega = np.asarray(omega, dtype=complex)
        return self.center + self.radius_along(omega, level)[..., None] * omega

    def project_to_closure(self, z):
        """Radially project points outside ``D`` onto ``bD``; keep the rest."""
        z = np.asarray(z, dtype=complex)
        out = z.copy()
        outside = self.r.value(z) > 0
        if np.any(outside):
            d = z[outside] - self.center
            omega = d / _norm(d)[..., None]
            out[outside] = self.boundary_points(omega)
        return out

    def check_star_shaped(self, rng=None, rays=256, samples=64):
        """Raise if ``r`` changes sign more than once along test rays."""
        rng = np.random.default_rng(1) if rng is None else rng
        omega = random_directions(rng, rays, self.n)
        t = np.linspace(1e-3, 1.5 * self.diameter, samples)
        vals = self.r.value(self.center + t[:, None, None] * omega[None])
        sign_changes = np.sum(np.diff(np.sign(vals), axis=0) != 0, axis=0)
        if np.any(sign_changes != 1):
            raise DomainError("domain is not star-shaped about its center along test rays")


class Ellipsoid(Domain):
    """Axis-aligned ellipsoid ``sum ((u_i - c_i)/a_i)^2 < 1`` in R^{2n}."""

    kind = "ellipsoid"

    def __init__(self, semi_axes, center=None):
        a = np.asarray(semi_axes, dtype=float)
        if a.ndim != 1 or a.size % 2 or np.any(a <= 0):
            raise DomainError("ellipsoid needs 2n positive semi-axes")
        n = a.size // 2
        c = np.zeros(n, dtype=complex) if center is None else np.asarray(center, dtype=complex)
        super().__init__(quadratic_function(n, c, a), c, 2 * float(a.max()),
                         {"semi_axes": a.tolist()})
        self._inv2 = 1.0 / a**2
        self._offset = 1.0

    def radius_along(self, omega, level=0.0, origin=None):
        omega = np.asarray(omega, dtype=complex)
        o = self.center if origin is None else np.asarray(origin, dtype=complex)
        w = to_real(omega)
        d = to_real(o) - to_real(self.center)
        A = np.sum(w * w * self._inv2, axis=-1)
        B = 2 * np.sum(d * w * self._inv2, axis=-1)
        C = np.sum(d * d * self._inv2, axis=-1) - self._offset - level
        if np.any(C >= 0):
            raise DomainError("ray origin is not inside the requested level set")
        return (-B + np.sqrt(B * B - 4 * A * C)) / (2 * A)


class Ball(Ellipsoid):
    """Euclidean ball ``|z - c| < R`` with ``r = |z - c|^2 - R^2``."""

    kind = "ball"

    def __init__(self, n, radius=1.0, center=None):
        if radius <= 0:
            raise DomainError("ball radius must be positive")
        c = np.zeros(n, dtype=complex) if center is None else np.asarray(center, dtype=complex)
        Domain.__init__(self, ball_function(n, radius, c), c, 2 * float(radius),
                        {"n": n, "radius": float(radius)})
        self.radius = float(radius)
        self._inv2 = np.ones(2 * n)
        self._offset = self.radius**2


class PowerDomain(Domain):
    """``sum_i |u_i|^{m_i} < C`` over the real coordinates ``u = (x_1, y_1, ...)``."""

    kind = "power"

    def __init__(self, exponents, level=1.0):
        m = np.asarray(exponents, dtype=float)
        if m.ndim != 1 or m.size % 2:
            raise DomainError("power domain needs an even number 2n of exponents")
        if np.any(m <= 1.0):
            raise DomainError("power-domain exponents must satisfy m_j > 1")
        if level <= 0:
            raise DomainError("power-domain level C must be positive")
        r = power_function(m, level)
        super().__init__(r, None, 2 * float(np.max(level ** (1.0 / m))),
                         {"exponents": m.tolist(), "level": float(level)})


class Limacon(Domain):
    """Planar limacon ``rho(theta) = 1 + b cos(theta)``, ``0 < b < 1`` (n = 1)."""

    kind = "limacon"

    def __init__(self, b):
        if not 0 < b < 1:
            raise DomainError("limacon parameter must lie in (0, 1)")
        self.b = float(b)
        super().__init__(limacon_function(b), None, None, {"b": float(b)})

    def radius_along(self, omega, level=0.0, origin=None):
        if origin is None:
            omega = np.asarray(omega, dtype=complex)
            # r(R w) = R - 1 - b cos(theta) - level along rays from 0
            return 1.0 + level + self.b * omega[..., 0].real / np.abs(omega[..., 0])
        return super().radius_along(omega, level, origin)


class StarShaped(Domain):
    """Domain ``{|z - c| < rho((z - c)/|z - c|)}`` for a positive radial function."""

    kind = "star"

    def __init__(self, n, radial: Callable, center=None, bounds: Optional[tuple] = None):
        c = np.zeros(n, dtype=complex) if center is None else np.asarray(center, dtype=complex)
        base = star_function(n, radial)
        r = DefiningFunction(n, lambda z: base.value(np.asarray(z) - c), name="star")
        super().__init__(r, c, None, {"n": n})
        self.radial = radial
        rng = np.random.default_rng(2)
        rho = radial(random_directions(rng, 2000, n))
        if np.any(rho <= 0):
            raise DomainError("radial function must be positive")
        self.bounds = bounds or (float(rho.min()), float(rho.max()))

    def radius_along(self, omega, level=0.0, origin=None):
        if origin is None and np.all(np.asarray(level) == 0.0):
            return np.asarray(self.radial(np.asarray(omega, dtype=complex)), dtype=float)
        return super().radius_along(omega, level, origin)


CATALOG = {
    "ball": lambda n=2, radius=1.0: Ball(n, radius),
    "ellipsoid": lambda semi_axes: Ellipsoid(semi_axes),
    "power": lambda exponents, level=1.0: PowerDomain(exponents, level),
    "limacon": lambda b: Limacon(b),
}


def make_domain(kind: str, **params) -> Domain:
    """Build a catalog domain by name, e.g. ``make_domain("ball", n=2)``."""
    try:
        factory = CATALOG[kind.lower()]
    except KeyError:
        raise DomainError(f"unknown domain kind {kind!r}; known: {sorted(CATALOG)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise DomainError(f"bad parameters for {kind}: {exc}") from None
