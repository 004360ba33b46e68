"""
The cone integral S(F)
======================

S(F) is the integral of F |z|^-1 over the cone.  It is computed in two
unrelated ways in d = 2: fibering over x, and a direct chart of the cone.
"""

import math

from quadrix import bump, gaussian, j0, polydecay, surface_chart_d2, surface_fibered

# the Gaussian has S = pi^2 in d = 2 and 2 pi^2 in d = 3
for d in (2, 3):
    S = surface_fibered(gaussian(), d)
    print(f"d={d}: S = {S.value:.12g}  (closed form {d - 1} pi^2 = {(d - 1) * math.pi**2:.12g})")

# both routes agree on every built-in family
for F in (gaussian(), polydecay(6), polydecay(3), bump(1, 2)):
    a, b = surface_fibered(F, 2).value, surface_chart_d2(F).value
    print(f"{F.spec_string:12s} fibered {a:.10g}  chart {b:.10g}  gap {abs(a - b) / a:.1e}")

# dilating F by a multiplies S by a^(2d-2)
F = polydecay(6)
for a in (0.5, 2.0):
    ratio = surface_fibered(F.scaled(a), 3).value / surface_fibered(F, 3).value
    print(f"a={a}: S ratio {ratio:.10g}  vs a^4 = {a**4:g}")

# the leading coefficient J_0 = pi exp(-nu lambda) S(F)
print("J_0(gaussian, d=2, nu=0.1, lambda=5) =", j0(gaussian(), 2, 0.1, 5.0).value)
