"""
Transition kernel and jump density, closed form vs quadrature
=============================================================

The massive kernel is a Bessel-K expression and the massless one is
the Cauchy kernel; both can be recovered independently by inverting
the characteristic function numerically.  This script prints the two
routes side by side so the agreement is visible without any plotting.
"""

import math

import numpy as np

from relfk import ModelParams, adaptive_quad, char_exponent, \
    levy_density, tail_mass, transition_kernel

t = 1.0
radii = np.array([0.25, 0.5, 1.0, 2.0, 4.0])

for m in (0.0, 1.0):
    params = ModelParams(1, m)
    print(f"\nd=1, m={m:g}, t={t:g}")
    print(f"{'r':>6} {'closed form':>14} {'inverted symbol':>16} {'rel gap':>10}")
    for r in radii:
        closed = float(transition_kernel(r, t, params))
        # invert the symbol: k(r) = (1/pi) int_0^inf cos(xi r) e^{-t psi} dxi
        zeros = np.arange(1, int(40.0 * r / math.pi) + 1) * math.pi / r
        inv = adaptive_quad(
            lambda xi: np.cos(xi * r)
            * np.exp(-t * char_exponent(xi, params)) / math.pi,
            0.0, 40.0 + m, points=zeros).value
        print(f"{r:6.2f} {closed:14.8f} {inv:16.8f} "
              f"{abs(inv / closed - 1):10.2e}")

# the jump density integrates to the tail mass, so the slope of the
# tail recovers the density
params = ModelParams(1, 0.5)
print("\njump density vs tail slope, d=1, m=0.5")
for r in (0.5, 1.0, 2.0):
    n_closed = float(levy_density(r, params))
    h = 1e-5 * r
    slope = (tail_mass(r - h, params) - tail_mass(r + h, params)) / (2 * h)
    # two-sided tail: each radius appears at +r and -r on the line
    print(f"  r={r:4.1f}  density={n_closed:.8f}  "
          f"tail slope/2={slope / 2:.8f}")
