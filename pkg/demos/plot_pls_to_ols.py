"""
PLS directions and the OLS limit
================================

Each PLS direction regresses the current residual on every predictor one at
a time and stacks the fitted pieces.  Adding directions walks the fit towards
least squares.
"""

import numpy as np

from plscast import ScenarioSpec, fit_ols, fit_pls, generate

frame = generate(ScenarioSpec(n=95, q=3, seed=3))
ols = fit_ols(frame.X, frame.y)

# distance to the OLS fitted values shrinks geometrically with d
for d in (1, 2, 3, 5, 10, 20, 50):
    gap = np.max(np.abs(fit_pls(frame.X, frame.y, d).fitted - ols.fitted))
    print(f"d={d:3d}  max |pls - ols| = {gap:.2e}")

# the first direction's loadings are the univariate slopes of y on each x
one = fit_pls(frame.X, frame.y, 1)
print("loadings:", np.round(one.directions.loadings[0], 4))
