"""Sampled convexity conditions for the catalog domains.

Prints the infimum of each condition quotient with its witness pair, the
stability of the verdicts under rescaled defining functions, and the power
inequality quotient for several exponent vectors.

    python demos/domain_conditions.py
"""

import numpy as np

from cauchyleray.checks import domain_check, power_gap_study
from cauchyleray.expr import compile_expression
from cauchyleray.geometry import Ball, Ellipsoid, Limacon, PowerDomain
from cauchyleray.geometry.conditions import SamplerConfig


def main():
    sampler = SamplerConfig(n_boundary=400, n_interior=400, n_collar=400)
    for dom in (Ball(2), Ellipsoid([1, 1, 1, 1.5]), PowerDomain([1.5, 2, 1.5, 2]), Limacon(0.9)):
        chk = domain_check(dom, sampler)
        print(f"\n{dom!r}  (failure tolerance {chk.report.tolerance:.1e})")
        for row in chk.report.rows():
            print("  {condition:6s} inf={infimum:.6f} holds={holds} pairs={pairs}".format(**row))
            print(f"         witness zeta=({row['witness_zeta']})")
    texts = ["2", "1 + 0.5*abs2(z1)", "exp(0.3*x2)"]
    fields = [(lambda f: (lambda z: np.real(f(z))))(compile_expression(t, 2)) for t in texts]
    chk = domain_check(Ball(2), SamplerConfig(n_boundary=200, n_interior=200, n_collar=200),
                       rescalings=fields)
    print("\nball verdicts unchanged under rescaling by:",
          ", ".join(f"{t} -> {ok}" for t, ok in zip(texts, chk.stability)))
    print("\npower inequality quotient over 1e5 pairs")
    for m in (1.5, 2.0, 3.0):
        r = power_gap_study([m] * 4)
        print(f"  m={m:g}: inf={r['infimum']:.6g} sup={r['supremum']:.6g} rounding={r['rounding']:.1e}")


if __name__ == "__main__":
    main()
