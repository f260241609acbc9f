"""Expansion coefficients: closed forms, regression, and the decay pattern."""
import math

import numpy as np

from chaosexp import check_regular_ordering, coeff_table_wave_1d, fit_coefficients
from chaosexp.coefficients import wave_coefficient, wave_gamma_curves, wave_gamma_series

t = 1.0
for j in range(2, 6):
    print(j, [round(wave_coefficient(j, k, t), 6) for k in range(1, 6)])

# Exact series in 1/N, from the eigenvalues
from fractions import Fraction
print(wave_gamma_series(3, Fraction(1), 3))

grid = [2 ** e for e in range(4, 13)]
curves = wave_gamma_curves(t, grid, 5)
y2 = {n: v - 1 for n, v in curves[(2, (1, 1))].items()}
print("c(I_2,2) fitted", fit_coefficients(y2, 0.5, [1, 2, 3], 1.5)[0], "exact", 1 / (4 * t) ** 2)
fit = fit_coefficients(curves[(3, (1, 1, 1))], 0.5, [0.5, 1.5, 2.5], 1.5)
print("c(I_3,1) fitted", fit[0], "exact", math.sqrt(2), "tail ok", fit.tail_ok)

# regular ordering: slopes -gamma, -2gamma, ... in log-log
report = check_regular_ordering(coeff_table_wave_1d(t, 4), curves)
for row in report.rows:
    print(row.j, row.k, row.expected_slope, round(row.observed_slope, 4), row.passed)

table = coeff_table_wave_1d(t, 3)
print(table.to_dict()["coeffs"][:3])
