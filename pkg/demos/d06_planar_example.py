"""
A planar example
================

In the plane, with F a bump vanishing near the origin, the integral of
F cos(lambda x y) / (x^2 y^2 + nu^2) is pi nu^-1 exp(-nu lambda) times the
integral of F/|z| along the axes, up to a bounded remainder.
"""

from quadrix import bump, example_1d

F = bump(1, 2)
for nu in (0.1, 0.01):
    for lam in (0.0, 1.0 / nu):
        lhs, rhs = example_1d(F, nu, lam)
        gap = abs(lhs.value - rhs)
        print(f"nu={nu:<5g} lambda={lam:<5g} lhs {lhs.value:12.6f}  rhs {rhs:12.6f}  |gap| {gap:.4f}  rel {gap / rhs:.1e}")
