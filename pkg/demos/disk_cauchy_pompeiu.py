"""One complex variable: the solid operator T_1 against Cauchy-Pompeiu.

In the unit disk ``T_1 (f dzbar)(z) = -(1/pi) int f(zeta) / (zeta - z) dA``.
This prints the quadrature value, an adaptive scipy reference and the
closed form ``zbar`` for ``f = 1``.

    python demos/disk_cauchy_pompeiu.py
"""

import numpy as np
from scipy.integrate import quad

from cauchyleray.forms import FormField
from cauchyleray.geometry import Ball
from cauchyleray.operators import Discretization, apply_T


def reference(f, z):
    """Adaptive polar quadrature about z (the singularity is absorbed by the Jacobian)."""

    def ray(t, part):
        e = np.exp(1j * t)
        b = (np.conj(z) * e).real
        R = -b + np.sqrt(b * b + 1 - abs(z) ** 2)
        g = lambda s: (f(z + s * e) / e).real if part == 0 else (f(z + s * e) / e).imag
        return quad(g, 0, R, epsabs=1e-12)[0]

    re = quad(lambda t: ray(t, 0), 0, 2 * np.pi, epsabs=1e-11, limit=200)[0]
    im = quad(lambda t: ray(t, 1), 0, 2 * np.pi, epsabs=1e-11, limit=200)[0]
    return -(re + 1j * im) / np.pi


def main():
    disk = Ball(1)
    probes = np.array([[0.0], [0.3 - 0.2j], [-0.5j], [0.45 + 0.4j]])
    data = {"1": lambda w: np.ones_like(w), "zeta": lambda w: w,
            "zetabar^2": lambda w: np.conj(w) ** 2}
    for N in (16, 32, 64):
        print(f"\nN = {N}")
        for name, f in data.items():
            phi = FormField(1, 1, lambda z, f=f: f(z[..., 0])[..., None], name=name)
            sol = apply_T(1, phi, probes, disk, Discretization(N=N))
            for p, v, e in zip(probes[:, 0], sol.values[:, 0], sol.errors[:, 0]):
                ref = np.conj(p) if name == "1" else reference(f, p)
                print(f"  f={name:10s} z={p:.2f}  T1={v:.10f}  |diff|={abs(v - ref):.2e}  est={e:.1e}")


if __name__ == "__main__":
    main()
