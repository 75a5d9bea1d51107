"""Two level staircases of u = x and the Cantor function.

The full staircase of the ramp replaces its slope by many small jumps, so F
drops to the jump constant 1 instead of the pointwise value 2. Splitting off
only the singular part keeps the area functional close to that of u.
"""
from bvlab import build_recovery_family
from bvlab.bvcalc import affine, cantor

STAGES = (1, 2, 4, 8, 16)

for label, u, method in (("ramp, full staircase", affine(), "full"),
                         ("Cantor, split staircase", cantor(), "split")):
    fam = build_recovery_family(u, 1.0, STAGES, method, rtol=1e-2)
    print(f"{label}: limit {fam.limit:.4g}")
    for s in fam.stages:
        print(f"  k={s.k:3d} lambda_k={s.lam:9.3g} F={s.f_value:.5f} "
              f"L1 gap={s.l1_gap:.2e} area gap={s.area_gap:.2e} verified={s.verified}")
