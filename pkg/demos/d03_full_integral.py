"""
The full integral J_nu
======================

J_nu is computed by fibered quadrature with a tangent substitution across
the thin layer |x.y| ~ nu, and independently by stratified Monte Carlo.
For the Gaussian a one-dimensional reduction gives reference values.
"""

from quadrix import QuadratureSpec, gaussian, jnu, jnu_mc, oracle_jnu, polydecay

G = gaussian()
print(" d    nu  lambda    quadrature        oracle     rel. gap")
for d, nu, lam in [(2, 0.1, 0.0), (2, 0.1, 10.0), (2, 0.01, 100.0), (3, 0.1, 10.0)]:
    q = jnu(G, d, nu, lam).value
    o = oracle_jnu(d, nu, lam)
    print(f"{d:2d} {nu:5g} {lam:7g} {q:13.8f} {o:13.8f} {abs(q - o) / o:12.1e}")

# Monte Carlo carries a standard error; it does not depend on thread count
spec = QuadratureSpec(mc_samples=400_000, seed=1)
mc = jnu_mc(G, 2, 0.5, 0.0, spec)
print(f"MC: {mc.value:.4f} +/- {mc.abs_error_estimate:.4f}   oracle {oracle_jnu(2, 0.5, 0.0):.4f}")

# an algebraically decaying F, where no oracle exists
F = polydecay(6)
q = jnu(F, 3, 0.5, 1.0, QuadratureSpec(rel_tol=1e-3)).value
m = jnu_mc(F, 3, 0.5, 1.0, spec)
print(f"polydecay(6), d=3: quadrature {q:.4f}, MC {m.value:.4f} +/- {m.abs_error_estimate:.4f}")
