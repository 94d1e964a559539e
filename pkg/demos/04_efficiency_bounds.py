"""How much welfare does competition buy?

PoCS compares social welfare under a monopoly with that under a duopoly and
PoCP does the same for provider profit.  For symmetric interference both
have closed forms; we evaluate them from the definitions and sweep the
demand slope to watch PoCS approach its floor of 3/4.
"""

import numpy as np

from interference_pricing import efficiency, verify_bounds
from interference_pricing.metrics import symmetric_market

for s in (1e-3, 1e-1, 1.0, 10.0, 1e3, 1e6):
    m = efficiency(symmetric_market(s, 0.5))
    print(f"s={s:<8g} PoCS={m.pocs:.6f}  PoCP={m.pocp:.6f}")

rep = verify_bounds([10.0 ** k for k in range(-3, 7)], np.round(np.arange(0, 1, 0.01), 2))
print(f"\n{rep.points} grid points: min PoCS {rep.min_pocs:.6f} at {rep.min_pocs_at}, "
      f"min PoCP {rep.min_pocp:.6f} at {rep.min_pocp_at}")

# where does the monopoly start to beat the duopoly on welfare (s = 1)?
from scipy.optimize import brentq

a_star = brentq(lambda a: efficiency(symmetric_market(1.0, a)).pocs - 1.0, 0.5, 0.9)
print(f"PoCS = 1 at a = {a_star:.4f}")
