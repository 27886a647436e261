"""Hoelder seminorm estimator: calibration and the C^0 -> C^{1/2} gain of T_1.

    python demos/holder_gain.py
"""

from cauchyleray.checks import calibration_study, gain_study
from cauchyleray.geometry import Ball, Ellipsoid


def main():
    print("calibration on [0, 1] (1e5 structured pairs)")
    for row in calibration_study(pairs=100_000):
        print(f"  {row['function']:9s} a={row['a']}  estimate={row['estimate']:.6f}  true={row['true']}")
    st = gain_study([Ball(2), Ellipsoid([1, 1, 1, 1.5])], exponents=(0.3, 0.5, 0.7), pairs=300, N=16)
    print("\nrough data |z1 - p|^s dzbar1, ratio |T1 phi|_{1/2} / |phi|_0")
    for rep in st.reports:
        print(f"  {rep.label:40s} sup|phi|={rep.data_norm:.4f} |u|_1/2={rep.solution.seminorm:.4f} "
              f"ratio={rep.ratio:.4f}")
    print(f"\nbound {st.bound:.4f}, largest drift across the family {st.drift:.3f} (limit {st.max_drift})")


if __name__ == "__main__":
    main()
