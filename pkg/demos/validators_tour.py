"""The two fixed-point validators on the detonation system.

Gap lemma: conjugate the decaying-mode problem, iterate to the exact solution
and watch the contraction bound shrink with h = 1/eps.  Parameter problem:
the WKB mode theta_1 away from the turning point improves like 1/eps in case
I, while continuing theta_2 in case D is refused for lack of a neutral gap.

    python demos/validators_tour.py
"""
from zndstab.acceptance import stable_type_I, type_D, unstable_type_I, unstable_zeta_i
from zndstab.frame import find_turning_points
from zndstab.resolvent import _grid
from zndstab.validators import GapViolationError, conjugated_form, gap_lemma_iterate, mpp_iterate
from zndstab.wkb import default_delta

prof = stable_type_I()
x = _grid(prof, 2000)
print("gap lemma, zeta = 1 + 0.5i, nu = 0.5")
print("   eps   contraction bound   observed   sup |V - V*|   C1")
for eps in (20.0, 40.0, 80.0, 160.0):
    cf = conjugated_form(1 + 0.5j, 0.5, eps, prof, x)
    r = gap_lemma_iterate(cf.M, cf.Theta, cf.V_star, cf.h, 0.05, x)
    print(f"  {eps:5.0f}   {r.contraction_bound:11.3e}   {r.contraction_factor:10.3e}"
          f"   {r.sup_error:11.3e}   {r.C1:.3e}")

prof = unstable_type_I()
zi = unstable_zeta_i()
tp = find_turning_points(zi, prof)[-1]
b = tp.x_star - 3 * default_delta(prof, tp.x_star)
print(f"\nparameter problem, case I, zeta_i {zi:.4f}, interval [0, {b:.3f}]")
for eps in (20.0, 40.0, 80.0, 160.0):
    r = mpp_iterate(1j * zi, 0.1, eps, prof, 0.0, b, k=1)
    print(f"  eps {eps:5.0f}: |theta - T e1| {r.leading_error:.3e}, eps*err "
          f"{eps * r.leading_error:.3f}, corrected {r.error:.3e}")

pd = type_D()
tpd = find_turning_points(1.0, pd)[-1]
bd = tpd.x_star - 3 * default_delta(pd, tpd.x_star)
try:
    mpp_iterate(1j, 0.5, 40.0, pd, 0.0, bd, k=2)
except GapViolationError as exc:
    print(f"\ncase D theta_2 on [0, {bd:.4f}] anchored at the right end: refused, "
          f"mode {exc.j} breaks the gap at x = {exc.x:.4f}")
r = mpp_iterate(1j, 0.5, 40.0, pd, 0.0, bd, k=2, anchors="auto")
print(f"anchors allowed by the gap {r.anchors}: error {r.error:.3e}; modes 1 and 3 are "
      "pinned at x = 0, so this is not the continuation of theta_2 from the right")
