"""Homotopy identities on the unit ball in C^2.

For dbar-closed data ``phi = dbar u`` the operators satisfy
``phi = dbar T_1 phi`` and ``phi = dbar H_1 phi``.  This prints the
finite-difference residual next to the combined error estimate along a
short refinement ladder, and the identity ``phi = H_0 phi + H_1 dbar phi``
for the non-holomorphic function ``zbar_1``.

    python demos/homotopy_ball.py [probes]
"""

import sys

import numpy as np

from cauchyleray.checks import homotopy_study
from cauchyleray.forms import FormField
from cauchyleray.geometry import Ball
from cauchyleray.operators import Discretization, homotopy_residual, interior_probes


def main(count=4):
    ball = Ball(2)
    probes = interior_probes(ball, count, seed=0)
    c = np.conj
    data = [FormField(2, 1, lambda z: np.stack([z[..., 1], 0 * z[..., 0]], -1), name="dbar(zb1 z2)"),
            FormField(2, 1, lambda z: np.stack([c(z[..., 1]), c(z[..., 0])], -1), name="dbar(zb1 zb2)"),
            FormField(2, 1, lambda z: np.stack([z[..., 0], z[..., 1]], -1), name="dbar(|z|^2)")]
    for op in ("T", "H"):
        st = homotopy_study(op, 1, data, ball, probes, Discretization(N=16), levels=2, closed=True)
        print(f"\n{op}_1 on {count} probes (passed: {st.passed})")
        for row in st.rows():
            order = "" if row["order"] == "" else f"{float(row['order']):.2f}"
            print("  N={N:3d} {data:15s} residual={residual:.2e} estimate={error_estimate:.2e} "
                  "ratio={ratio:.3f}".format(**row) + f" order={order}")
    rep = homotopy_residual("H", 0, FormField(2, 0, lambda z: c(z[..., 0]), name="zb1"), probes, ball,
                            Discretization(N=16))
    print(f"\nH_0 zb1 + H_1 dbar zb1 - zb1: max residual {rep.max_residual:.2e}, "
          f"estimate {rep.max_error:.2e}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 4)
