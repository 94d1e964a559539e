"""Where do users go when two access points post prices?

Users pick the AP with the lowest price-plus-congestion.  With weak
interference the answer is unique and comes out of a small LCP; here we
solve one market both ways (Lemke and brute-force enumeration) and show the
disutilities line up.
"""

import numpy as np

from interference_pricing import Market, assemble_lcp, solve_lcp_enumerate, solve_lcp_lemke, wardrop_equilibrium
from interference_pricing.market import disutility

market = Market.two_ap(w=1.0, s=1.0, a2=0.4, b1=0.3)
prices = np.array([0.25, 0.35])
print(f"market: w={market.w}, s={market.s}, a2={market.a2}, b1={market.b1}, weak={market.weak}")

res = wardrop_equilibrium(market, prices)
print("flows          ", res.flows)
print("AP disutilities", disutility(market, prices, res.flows))
print("demand u(X)    ", res.disutility)

inst = assemble_lcp(market, prices)
lemke = solve_lcp_lemke(inst)
(enum,) = solve_lcp_enumerate(inst)
print(f"Lemke pivots: {lemke.pivots}, enumeration agrees: {np.allclose(lemke.x, enum.x)}")

# Raise AP 2's price until its users all move to AP 1.
for p2 in (0.35, 0.5, 0.65, 0.8):
    x = wardrop_equilibrium(market, [0.25, p2]).flows
    print(f"p2={p2:.2f}  x1={x[0]:.4f}  x2={x[1]:.4f}")
