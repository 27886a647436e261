"""Self-convergence of the boundary and volume rules.

Prints surface areas and volumes along a resolution ladder together with the
empirical order ``log2(|A_N - A_{N/2}| / |A_{2N} - A_N|)``.  The power
domain has a C^{1,1} boundary, so its order is measured rather than assumed.

    python demos/quadrature_convergence.py
"""

import math

import numpy as np

from cauchyleray.geometry import Ball, Ellipsoid, PowerDomain
from cauchyleray.quadrature import build_boundary_rule, build_volume_rule

LADDER = (8, 16, 32, 64)


def ladder(label, values, exact=None):
    print(f"\n{label}")
    for i, (N, v) in enumerate(zip(LADDER, values)):
        line = f"  N={N:3d}  value={v:.15f}"
        if exact is not None:
            line += f"  error={abs(v - exact):.2e}"
        if i >= 2:
            a, b = abs(values[i - 1] - values[i - 2]), abs(values[i] - values[i - 1])
            if a > 0 and b > 0:
                line += f"  order={math.log2(a / b):.2f}"
            else:
                line += "  order=(rounding)"
        print(line)


def main():
    ladder("unit sphere S^3 area", [build_boundary_rule(Ball(2), N).area for N in LADDER],
           2 * math.pi ** 2)
    ladder("ellipsoid (1, 1, 1, 2) area", [build_boundary_rule(Ellipsoid([1, 1, 1, 2]), N).area
                                          for N in LADDER])
    power = PowerDomain([1.5, 2.0, 1.5, 2.0])
    ladder("power domain m = (1.5, 2, 1.5, 2) area",
           [build_boundary_rule(power, N).area for N in LADDER])
    ladder("unit ball volume in C^2", [build_volume_rule(Ball(2), "D", N).volume for N in LADDER],
           math.pi ** 2 / 2)
    ladder("power domain volume", [build_volume_rule(power, "D", N).volume for N in LADDER])
    nodes = build_boundary_rule(power, 32).nodes
    print(f"\nsmallest |coordinate| of a power-domain node at N=32: "
          f"{min(np.abs(nodes.real).min(), np.abs(nodes.imag).min()):.3e} (nodes avoid the hyperplanes)")


if __name__ == "__main__":
    main()
