"""Increment covariance of the wave field on a uniform grid."""
from fractions import Fraction

import numpy as np

from chaosexp import (WaveModel, correlation_matrix, covariance_matrix,
                      increment_covariance_closed, increment_covariance_kernel)

# Exact rationals in, exact rationals out
t, N = Fraction(1), 4
print("diagonal", increment_covariance_kernel(t, t, 0, 0, N))
print("off-diagonal", increment_covariance_kernel(t, t, 0, 2, N))

# the closed form agrees with the second difference of the point kernel
t1, t2, N = Fraction(3, 5), Fraction(9, 10), 10
for i, j in [(4, 4), (5, 2), (5, 4), (9, 0)]:
    print(i, j, increment_covariance_closed(t1, t2, i, j, N), increment_covariance_kernel(t1, t2, i, j, N))

# Whole matrix for two observation times
model = WaveModel((0.6, 0.9), 12)
sigma = covariance_matrix(model)
print("smallest eigenvalue", np.linalg.eigvalsh(sigma.matrix)[0])

# same-time correlations are one constant value off the diagonal
r = correlation_matrix(WaveModel((1.0,), 4)).matrix
print(np.round(r, 6))

# times at least 1 apart give independent increments
far = covariance_matrix(WaveModel((0.6, 2.1), 8))
print("cross block max", np.abs(far.block(1, 2)).max())
