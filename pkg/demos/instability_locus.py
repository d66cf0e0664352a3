"""Predicted unstable (nu, eps) locus and its winding-number check.

Sweeps the Class III band of the unstable type-I configuration, picks the
frequency with the largest criterion margin and confirms the predicted
zeros of V_a (and, at one eps, of the exact stability function).

    python demos/instability_locus.py [--exact]
"""
import argparse
import math

import numpy as np

from zndstab.acceptance import class_III_band, unstable_type_I
from zndstab.instability import evaluate_criterion, rouche_verify, sweep


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--exact", action="store_true", help="also wind the exact V (slower)")
    args = ap.parse_args()

    prof = unstable_type_I()
    lo, hi = class_III_band(prof)
    grid = np.linspace(lo, hi, 23)[1:-1]
    rep = sweep(prof, grid, eps_min=5.0, eps_max=150.0)
    print(" zeta_i   verdict      |L2| e^b2    L1")
    for r in rep.rows:
        print(f" {r.zeta_i:6.4f}  {r.verdict:11s}  {r.criterion_lhs:9.4f}  {r.criterion_rhs:7.4f}")
    print(f"unstable interval {rep.unstable_interval}, bands overlap above eps "
          f"{rep.eps_cutoff}")

    best = max((r for r in rep.rows if r.verdict == "unstable_hf"),
               key=lambda r: r.criterion_lhs / r.criterion_rhs)
    v = evaluate_criterion(best.zeta_i, prof, eps_min=5.0, eps_max=150.0)
    bt = v.betas
    print(f"\nzeta_i {v.zeta_i:.4f}: beta = ({bt.beta1:.4f}, {bt.beta2:.4f}, {bt.beta3:.4f}),"
          f" nu* = {v.nu_star.real:.4f}")
    print(f"eps_n spacing {np.diff(v.eps_list).mean():.10f} vs 2 pi / beta1 "
          f"{2 * math.pi / bt.beta1:.10f}")
    for e in v.eps_list[:5]:
        w = rouche_verify(v.zeta_i, v.nu_star, e, 0.05, "Va", prof, v)
        c = rouche_verify(v.zeta_i, v.nu_star + 0.5, e, 0.05, "Va", prof, v)
        print(f"  eps {e:8.3f}: V_a winding {w.winding} at nu*, {c.winding} at nu*+0.5")
    if args.exact:
        e = [x for x in v.eps_list if x <= 120.0][-1]
        w = rouche_verify(v.zeta_i, v.nu_star, e, 0.05, "V", prof, v)
        print(f"  eps {e:8.3f}: exact V winding {w.winding} (min |L| on circle {w.min_abs:.3e})")


if __name__ == "__main__":
    main()
