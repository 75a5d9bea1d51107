"""Indicator of a disk of radius 0.3 in (-1, 1)^2, evaluated by slicing.

The slice estimate is compared with the perimeter formula 4/(gamma + 1) * 2 pi r
and with a direct Monte Carlo over pairs of points.
"""
import math

from bvlab.slicer import SliceQuadrature, disk_indicator, f_eval_2d, f_eval_mc_2d

r, gamma, lam = 0.3, 1.0, 1e3
u = disk_indicator(r)
est = f_eval_2d(u, gamma, lam, SliceQuadrature(n_directions=16))
mc, se = f_eval_mc_2d(u, gamma, lam, samples=1_000_000, seed=1)
print(f"slices      : {est.value:.4f} +- {est.error_bound:.1e}")
print(f"monte carlo : {mc:.4f} +- {3 * se:.1e} (3 s.e.)")
print(f"limit       : {4 / (gamma + 1) * 2 * math.pi * r:.4f}")
