"""Expansion density, CDF and characteristic function for one time."""
import numpy as np

from chaosexp import ExpansionSpec, cdf, char_fn_tilde, coeff_table_wave_1d, density, expectation
from chaosexp.expansion import compile_symbol

table = coeff_table_wave_1d(1.0, 3)
# monomials of the reduced symbol, grouped by weight
for w, group in compile_symbol(table).items():
    print(w, {alpha: round(a, 6) for alpha, a in group.items()})

spec = ExpansionSpec(table, 16)
x = np.linspace(-3, 3, 7)
ev = density(x, spec)
print(np.round(ev.base, 5))
print(np.round(ev.total, 5))

print("mass", expectation(lambda v: np.ones_like(v), spec))
print("third moment", expectation(lambda v: v ** 3, spec, growth=(1, 3)))
print("P(F <= 0.5)", cdf(0.5, spec))

# the Fourier transform of the density is the approximate characteristic function
grid = np.linspace(-40, 40, 16001)
f = density(grid, spec).total
for lam in (0.5, 1.0, 2.0):
    print(lam, np.trapezoid(np.exp(1j * lam * grid) * f, grid), char_fn_tilde(lam, spec))
