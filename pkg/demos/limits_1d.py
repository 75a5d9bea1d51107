"""Large-lambda behaviour of F for a ramp, a jump, their sum and the Cantor function.

Run with ``python3 demos/limits_1d.py``. The smooth slope contributes 2/gamma
per unit of variation, a jump 2/(gamma + 1), and the Cantor function sits
between the two without settling on either.
"""
import numpy as np

from bvlab import lambda_sweep
from bvlab.bvcalc import affine, cantor, step

GAMMA = 1.0
LAMBDAS = np.geomspace(1e2, 1e5, 4)

cases = {
    "ramp u = x": (affine(), 2 / GAMMA),
    "jump H(x - 1/2)": (step(0.5), 2 / (GAMMA + 1)),
    "ramp + jump": (affine() + step(0.5), 2 / GAMMA + 2 / (GAMMA + 1)),
    "Cantor function": (cantor(), None),
}

for name, (u, limit) in cases.items():
    res = lambda_sweep(u, None, GAMMA, LAMBDAS, rtol=1e-2, warn=False)
    print(f"{name}  (limit: {'n/a' if limit is None else f'{limit:.4g}'})")
    for row in res.rows:
        e = row.estimate
        print(f"  lambda={row.lam:9.3g}  F={e.value:.5f} +- {e.error_bound:.1e}")
