"""Strong interference breaks uniqueness.

Once a2 + b1 > 2 the total-demand curve f(d) can bend backwards and cross
the demand line more than once.  We pick a point in region (d), list every
equilibrium by enumeration and check each one sits on a crossing.
"""

from interference_pricing import Market, classify_region, demand_branches, demand_crossings, wardrop_equilibrium

a2, b1, p1, p2 = 2.5, 1.2, 0.2, 0.4
print("region:", classify_region(a2, b1, p1, p2, 1.0))

for br in demand_branches(a2, b1, p1, p2, 1.0):
    forms = ", ".join(f"{e.label}: {e.slope:+.3f} d {e.intercept:+.3f}" for e in br.expressions)
    print(f"  d in ({br.lo:.4f}, {br.hi:.4f}]  ->  {forms}")

market = Market.two_ap(1.0, 1.0, a2, b1)
res = wardrop_equilibrium(market, [p1, p2])
print(f"{res.n_equilibria} equilibria:")
for x in res.all_equilibria:
    print(f"  x = ({x[0]:.4f}, {x[1]:.4f})   d* = {1.0 - x.sum():.6f}")
print("crossings of f(d) with (w - d)/s:", [round(d, 6) for d in demand_crossings(a2, b1, p1, p2, 1.0, 1.0)])
