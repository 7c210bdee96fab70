"""
Penalised regression along a lambda grid
========================================

The mixing weight runs from LASSO (alpha=0) to ridge (alpha=1).  The grid
starts at the smallest lambda that zeroes every LASSO coefficient.
"""

import numpy as np

from plscast import PenaltySpec, fit_penalised, lambda_grid, select_lambda

rng = np.random.default_rng(11)
X = rng.normal(size=(80, 6))
y = X @ np.array([2.0, -1.0, 0.5, 0.0, 0.0, 0.0]) + rng.normal(size=80)

grid = lambda_grid(X, y, count=8)
print("lambda      lasso nonzero   ridge |b|")
for lam in grid:
    lasso = fit_penalised(X, y, PenaltySpec(lam, 0.0))
    ridge = fit_penalised(X, y, PenaltySpec(lam, 1.0))
    print(f"{lam:9.3f}   {np.count_nonzero(lasso.coefficients):6d}        {np.linalg.norm(ridge.coefficients):.3f}")

# picking lambda by rolling CV and by AIC
for rule in ("cv_min", "cv_1se", "aic"):
    path = select_lambda(X, y, 0.0, rule, count=30)
    coef = fit_penalised(X, y, PenaltySpec(path.lam, 0.0)).coefficients
    print(f"{rule:7s} lambda={path.lam:8.3f}  coefficients={np.round(coef, 2)}")
