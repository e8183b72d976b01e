"""Stationary points of the phase-space system and their linearisations.

For d = (1, 2, 3) there is the origin, a sphere of points with Y = 0, three
subset points (one per nonempty subset of {2, 3}) and two lines along Y_1.
"""
import numpy as np

from solitonflow import (WarpedProductSpec, critical_points, linearization_eigenvalues,
                         stationary_residual)

spec = WarpedProductSpec(d=(1, 2, 3), lam=(0, 1, 1))
for pt in critical_points(spec):
    ev = linearization_eigenvalues(pt.coordinates, spec)
    label = pt.kind + (f" {sorted(pt.subset)}" if pt.subset else "")
    print(f"{label:<22} L={pt.Lcal:+.0f}  |rhs|={stationary_residual(pt, spec):.1e}")
    print("   eigenvalues", np.array2string(np.real_if_close(np.round(ev, 10)), precision=4))
