"""
The limiting permuton
=====================

Half of the mass has density e^(y-1) left of the curve x = y e^(1-y); the
other half sits on the curve with density 1 - y in the vertical direction.
"""

import numpy as np

from runsort import Rectangle, cdf, curve_inverse, curve_x, rect_mass

ys = np.linspace(0, 1, 6)
print("curve x(y):", np.round(curve_x(ys), 6).tolist())
print("inverse   :", np.round(curve_inverse(curve_x(ys)), 12).tolist())

full = rect_mass(Rectangle.unit())
print(f"full square: total {full.total:.12f}  ac {full.ac:.12f}  on curve {full.singular:.12f}")

# horizontal strips carry mass equal to their height
for y1, y2 in [(0.0, 0.25), (0.25, 0.5), (0.5, 1.0)]:
    m = rect_mass(Rectangle(0, 1, y1, y2))
    print(f"strip y in [{y1}, {y2}]: {m.total:.6f} (curve part {m.singular:.6f})")

# right of the curve there is nothing
print("below the curve:", rect_mass(Rectangle(0.9, 1.0, 0.0, 0.5)).total)

# the CDF along the curve equals y
for y in (0.2, 0.5, 0.8):
    print(f"F(x(y), y) at y={y}: {cdf(curve_x(y), y):.10f}")
