"""Two observation times: the oscillating limit covariance."""
import numpy as np

from chaosexp import (WaveModel, coeff_table_two_time, eta, gamma_expectation,
                      limit_covariance_two_time, mc_expectation, subsequence)

t1, t2 = 0.6, 0.9
tau = abs(t1 - t2)
print([round(eta(tau, n), 3) for n in range(10, 21)])

# eta_N takes finitely many values here, each along its own subsequence
for a in (0.0, 0.5, 0.7):
    try:
        ns = subsequence(tau, a, 5)
    except ValueError as exc:
        print(a, exc)
        continue
    c12 = limit_covariance_two_time(t1, t2, a).matrix[0, 1]
    exact = [gamma_expectation(2, (1, 2), WaveModel((t1, t2), n)) for n in ns]
    print(a, ns, round(c12, 6), np.round(exact, 6))

model = WaveModel((t1, t2), 40)
rep = mc_expectation(lambda x: x[:, 0], model, 200_000, seed=3)
print("MC cross", rep.estimates["cross_12"], "exact", gamma_expectation(2, (1, 2), model))

table = coeff_table_two_time(t1, t2, 0.0, subsequence(tau, 0.0, 64)[::5])
print("c(I_3, (1,1,2), 1)", table.value(3, (1, 1, 2), 1))
