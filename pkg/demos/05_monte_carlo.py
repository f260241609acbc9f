"""Monte Carlo ground truth against the Gaussian and expansion CDFs.

Takes about half a minute with a million replicates per grid size.
"""
import numpy as np

from chaosexp import (ExpansionSpec, WaveModel, coeff_table_wave_1d, cumulant,
                      empirical_vs_expansion, mc_expectation, simulate_statistic)

N = 64
model = WaveModel((1.0,), N)
f = simulate_statistic(model, 10 ** 6, seed=42)
report = mc_expectation(lambda x: x, model, f.shape[0], 42, samples=f)
for m in (2, 3, 4):
    value, se = report.estimates[f"k{m}"]
    print(f"k{m}", value, "+-", se, "exact", cumulant(m, model))

dgauss = []
for N in (16, 64, 256):
    spec = ExpansionSpec(coeff_table_wave_1d(1.0, 2), N)
    comp = empirical_vs_expansion(WaveModel((1.0,), N), spec, 10 ** 6, 42)
    dgauss.append(comp.D_gauss)
    print(N, comp.summary())

# Gaussian error decays like N^{-1/2}
print(np.polyfit(np.log([16, 64, 256]), np.log(dgauss), 1)[0])
