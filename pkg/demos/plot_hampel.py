"""
Clamping outliers with a Hampel filter
======================================

Points further than ``n_mad`` median absolute deviations from the rolling
median are pulled back to the edge of that band.
"""

import numpy as np

from plscast import HampelConfig, hampel_filter

rng = np.random.default_rng(2)
growth = 0.5 + 0.2 * np.sin(np.arange(60) / 6) + rng.uniform(-0.05, 0.05, 60)
growth[40] = -12.0  # a one-quarter collapse
growth[41] = 9.0    # and the rebound

out, flags = hampel_filter(growth, HampelConfig(window=19, n_mad=2.5))
# the band is narrow (no normal-consistency constant on the MAD), so a few
# ordinary points near turning points are nudged as well
for t in np.flatnonzero(flags):
    print(f"t={t}: {growth[t]:7.3f} -> {out[t]:7.3f}")

# an infinite band leaves the series alone
same, none = hampel_filter(growth, HampelConfig(n_mad=np.inf))
print("flags with n_mad=inf:", int(none.sum()))
