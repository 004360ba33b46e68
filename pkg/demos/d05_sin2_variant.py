"""
The sin^2 variant
=================

With the kernel sin^2(lambda x.y / 2) the integral tends to
(pi/2) nu^-1 (1 - exp(-nu lambda)) S(F).  It is computed both through the
identity sin^2(a/2) = (1 - cos a)/2 and directly.
"""

import math

from quadrix import corollary_check, gaussian, jnu_sin2

G = gaussian()
for nu, lam in [(0.1, 10.0), (0.05, 20.0)]:
    a = jnu_sin2(G, 2, nu, lam, mode="identity").value
    b = jnu_sin2(G, 2, nu, lam, mode="direct").value
    print(f"nu={nu} lambda={lam:g}: identity {a:.10f}  direct {b:.10f}")

# deviation from the limit stays within a multiple of ln(1/nu)
for lam in (0.0, 20.0, 200.0):
    rep = corollary_check(G, 2, 0.05, lam, C=4 * math.pi**2, S=math.pi**2)
    print(f"lambda={lam:5g}: lhs {rep.lhs:10.4f}  rhs {rep.rhs:10.4f}  deviation {rep.deviation:7.3f} <= {rep.budget:.1f}")
