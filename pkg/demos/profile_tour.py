"""Steady profiles for the three reference configurations.

Builds each profile, reports the conservation drift and tail decay, and
prints the frequency bands that matter for the high-frequency analysis.

    python demos/profile_tour.py
"""
import numpy as np

from zndstab.acceptance import stable_type_I, type_D, unstable_type_I
from zndstab.frame import classify_zeta, exceptional_values, find_turning_points
from zndstab.profile import cj_mach


def describe(name, prof):
    m = prof.model
    print(f"\n== {name}: gamma {m.gamma}, q {m.q}, E {m.E_act}, M {prof.mach}"
          f" (M_CJ {cj_mach(m):.4f})")
    res = prof.conservation_residuals()
    print(f"type {prof.ptype}, X_max {prof.X_max:.3f}, "
          f"worst conservation drift {max(res.values()):.1e}")
    print(f"tail decay {prof.decay_beta:.5f} vs |r_lam|/u at equilibrium "
          f"{prof.decay_beta_exact:.5f}")
    xs = np.array([0.0, 0.5, 1.0, 2.0, 5.0])
    f = prof.flow(xs)
    print("   x      lam        u      c0^2 eta")
    for row in zip(xs, f.lam, f.u, f.c0sq_eta):
        print("  {:4.1f}  {:9.3e}  {:7.4f}  {:8.4f}".format(*row))
    lo, hi = sorted(exceptional_values(prof)[:2])
    print(f"Class III band on the imaginary axis: zeta_i in ({lo:.4f}, {hi:.4f})")
    for zi in (0.5 * lo, 0.5 * (lo + hi), 1.5 * hi):
        tps = find_turning_points(zi, prof)
        tp = ", ".join(f"x*={t.x_star:.3f} ({t.kind})" for t in tps) or "none"
        print(f"  zeta_i {zi:6.3f}: class {classify_zeta(1j * zi, prof):9s} turning points {tp}")


if __name__ == "__main__":
    describe("stable type I", stable_type_I())
    describe("unstable type I", unstable_type_I())
    describe("type D", type_D())
