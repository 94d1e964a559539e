"""One owner or two?

Compare the monopoly (with and without price differentiation) against the
duopoly as AP 2's interference on AP 1 grows.  Past a2 = 1 the stronger
provider may find it worth pricing its rival out of the market entirely.
"""

from interference_pricing import Market, br_iterate, duopoly, monopoly_pd, monopoly_uniform

print(" a2    p_ME(PD)        p_DE            case        BR check")
for a2 in (0.0, 0.5, 1.0, 1.2, 1.5):
    m = Market.two_ap(1.0, 1.0, a2, 0.3)
    me, de = monopoly_pd(m), duopoly(m)
    it = br_iterate(m, init=[0.5, 0.5])
    gap = abs(it.prices - de.prices).max()
    print(f"{a2:4.1f}  ({me.prices[0]:.3f}, {me.prices[1]:.3f})  ({de.prices[0]:.3f}, {de.prices[1]:.3f})"
          f"  {de.case_tag:10s}  {gap:.1e}")

m = Market.two_ap(1.0, 1.0, 0.0, 0.0)
print("\nno interference: ME profit", round(monopoly_pd(m).total_profit, 6),
      " uniform ME", round(monopoly_uniform(m).total_profit, 6),
      " DE", round(duopoly(m).total_profit, 6))
