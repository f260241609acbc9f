"""Expansion of the law of quadratic-variation statistics of the stochastic wave equation.

Modules
-------
hermite       Gaussian density and multivariate Hermite polynomials.
wave          Exact covariance of the field and of its spatial increments.
cumulants     Gamma-factor expectations, cumulants and fluctuation variances.
coefficients  Expansion coefficient tables, regression fits, two-time limits.
expansion     Reduced symbol, expansion density, CDF and characteristic function.
montecarlo    Exact Gaussian sampling of the statistic and empirical checks.
cli           Command line driver.
"""
from .coefficients import (CoefficientTable, coeff_table_two_time, coeff_table_wave_1d,
                           check_regular_ordering, eta, fit_coefficients,
                           fit_joint_third_cumulant, limit_covariance_two_time, subsequence)
from .cumulants import (GammaTable, build_gamma_table, cumulant,
                        extract_combinatorial_constants, gamma_expectation,
                        gamma_expectation_constant_correlation, gamma_fluctuation_variance,
                        statistic_normalizer)
from .expansion import (ExpansionSpec, cdf, char_fn_ode_reconstruction, char_fn_tilde,
                        density, expectation, principal_symbol, symbol_p_tilde)
from .hermite import SpdMatrix, exponent_of_blocks, gaussian_density, hermite_eval
from .montecarlo import (SamplerState, empirical_vs_expansion, mc_expectation,
                         sample_increments, simulate_statistic, statistic_F)
from .wave import (WaveModel, correlation_matrix, covariance_matrix, increment_covariance_closed,
                   increment_covariance_kernel, point_covariance)

__version__ = "0.1.0"
