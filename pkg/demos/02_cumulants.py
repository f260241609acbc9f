"""Gamma-factor expectations as traces, and the cumulants they give."""
import math

from chaosexp import (WaveModel, build_gamma_table, cumulant, extract_combinatorial_constants,
                      gamma_expectation, gamma_expectation_constant_correlation,
                      gamma_fluctuation_variance)

model = WaveModel((1.0,), 4)
rho = -1 / 15
for p in range(2, 6):
    print(p, gamma_expectation(p, (1,) * p, model),
          gamma_expectation_constant_correlation(p, 4, rho))

# variance is 1 + (N-1) rho^2
print("k2", cumulant(2, model), 1 + 3 * rho ** 2)
print("k3", cumulant(3, model))

# Leading falling-factorial constants are binomials
for p in range(2, 7):
    print(p, extract_combinatorial_constants(p), [math.comb(p, k) for k in range(2, p + 1)])

# Skewness decays like N^{-1/2}
for N in (16, 64, 256, 1024):
    k = build_gamma_table(WaveModel((1.0,), N), 4)
    print(N, 2 * k.value(3, (1, 1, 1)) * math.sqrt(N))

# fluctuations of Gamma^(p) shrink like 2^{p-1} N^{1-p}
for N in (64, 256):
    m = WaveModel((1.0,), N)
    print(N, [gamma_fluctuation_variance(p, m) * N ** (p - 1) / 2 ** (p - 1) for p in (2, 3, 4)])

# two times: cyclic index tuples give identical values
two = WaveModel((0.7, 1.3), 9)
print(gamma_expectation(3, (1, 1, 2), two), gamma_expectation(3, (1, 2, 1), two))
