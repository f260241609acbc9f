"""Exact Gamma-factor expectations and cumulants of the quadratic variation.

With ``w`` the normalized increment vector (unit variances, correlation
matrix ``M``), the statistic ``F_a = (2N)^{-1/2} sum_j (w_{a,j}^2 - 1)`` lives
in the second Wiener chaos and its Gamma factors reduce to cyclic traces:

    E[Gamma^(p)_{i_1..i_p}] = 2^{p-1} (2N)^{-p/2} tr(M^(i_1 i_2) ... M^(i_p i_1)),

where ``M^(a b)`` is the (a, b) time block.  Cumulants follow from
``k_p = (p-1)! E[Gamma^(p)]``.
"""
import itertools
import math
from fractions import Fraction

import numpy as np

from .errors import CapabilityError, DomainError, InvalidIndexError
from .wave import covariance_matrix, correlation_matrix

DEFAULT_MAX_P = 8


def statistic_normalizer(model):
    """Per-cell increment variances used to normalize the statistic."""
    return np.diag(covariance_matrix(model).matrix).copy()


def canonical_rotation(idx):
    """Lexicographically smallest cyclic rotation of an index tuple."""
    idx = tuple(idx)
    return min(idx[r:] + idx[:r] for r in range(len(idx))) if idx else idx


def _prefactor(p, N):
    return 2.0 ** (p - 1) / (2.0 * N) ** (p / 2)


def _check_order(p, max_p):
    if isinstance(p, bool) or not isinstance(p, int) or p < 2:
        raise DomainError(f"order must be an integer >= 2, got {p!r}")
    if p > max_p:
        raise CapabilityError(f"order {p} exceeds max_p={max_p}")


def _check_idx(idx, p, d):
    idx = tuple(int(i) for i in idx)
    if len(idx) != p:
        raise InvalidIndexError(f"index tuple {idx} must have length {p}")
    if any(not 1 <= i <= d for i in idx):
        raise InvalidIndexError(f"index tuple {idx} has labels outside 1..{d}")
    return idx


def _chain_trace(corr, idx):
    prod = corr.block(idx[0], idx[1])
    for a, b in zip(idx[1:-1], idx[2:]):
        prod = prod @ corr.block(a, b)
    return float(np.sum(prod * corr.block(idx[-1], idx[0]).T))


def gamma_expectation(p, idx, model, max_p=DEFAULT_MAX_P, corr=None):
    """E[Gamma^(p)_idx(F_N)] by the cyclic trace formula.

    ``idx`` holds time labels in 1..d.  The tuple is replaced by its canonical
    rotation first, so rotated tuples give bitwise identical results.
    """
    _check_order(p, max_p)
    idx = canonical_rotation(_check_idx(idx, p, model.d))
    corr = corr or correlation_matrix(model)
    return _prefactor(p, model.N) * _chain_trace(corr, idx)


def cumulant(m, model, max_p=DEFAULT_MAX_P):
    """Cumulant k_m of the scalar statistic (single observation time)."""
    if model.d != 1:
        raise CapabilityError("cumulant() is defined for a single observation time")
    if m == 1:
        return 0.0
    return math.factorial(m - 1) * gamma_expectation(m, (1,) * m, model, max_p)


def gamma_expectation_constant_correlation(p, N, rho):
    """Closed form of the p-th Gamma expectation for the matrix (1-rho)I + rho J."""
    if not abs(rho) < 1:
        raise DomainError("constant correlation needs |rho| < 1")
    tr = (1 + (N - 1) * rho) ** p + (N - 1) * (1 - rho) ** p
    return 2.0 ** (p - 1) / (2.0 * N) ** (p / 2) * tr


def _power_traces(m, max_p):
    """tr(m^p) for p = 2..max_p from about max_p/2 products."""
    half = (max_p + 1) // 2
    powers = {1: m}
    for a in range(2, half + 1):
        powers[a] = powers[a - 1] @ m
    out = {}
    for p in range(2, max_p + 1):
        a = (p + 1) // 2
        out[p] = float(np.sum(powers[a] * powers[p - a]))
    return out


class GammaTable:
    """Gamma expectations of one model, keyed by (p, canonical index tuple)."""

    def __init__(self, model, max_p, entries):
        self.model = model
        self.max_p = max_p
        self.entries = dict(entries)

    def value(self, p, idx):
        key = (p, canonical_rotation(tuple(idx)))
        try:
            return self.entries[key]
        except KeyError:
            raise CapabilityError(f"no Gamma expectation stored for p={p}, idx={tuple(idx)}") from None

    def __getitem__(self, key):
        return self.value(*key)

    def orders(self):
        return sorted({p for p, _ in self.entries})

    def records(self):
        out = []
        for p in self.orders():
            for idx in itertools.product(range(1, self.model.d + 1), repeat=p):
                out.append({"p": p, "idx": list(idx), "value": self.value(p, idx)})
        return out

    def to_dict(self):
        return {
            "times": [float(t) for t in self.model.times],
            "N": self.model.N,
            "max_p": self.max_p,
            "records": self.records(),
        }


def build_gamma_table(model, max_p=DEFAULT_MAX_P):
    """All Gamma expectations of orders 2..max_p.

    For one time the traces of powers are computed from a handful of matrix
    products; for two times every canonical index cycle is traced directly.
    """
    if max_p < 2:
        raise DomainError("max_p must be at least 2")
    corr = correlation_matrix(model)
    N = model.N
    entries = {}
    if model.d == 1:
        for p, tr in _power_traces(corr.matrix, max_p).items():
            entries[(p, (1,) * p)] = _prefactor(p, N) * tr
    else:
        for p in range(2, max_p + 1):
            for idx in itertools.product(range(1, model.d + 1), repeat=p):
                c = canonical_rotation(idx)
                if (p, c) not in entries:
                    entries[(p, c)] = _prefactor(p, N) * _chain_trace(corr, c)
    return GammaTable(model, max_p, entries)


def _stirling2(n):
    """Rows S(k, m), 0 <= m <= k <= n, of Stirling numbers of the second kind."""
    s = [[1]]
    for k in range(1, n + 1):
        prev = s[-1] + [0]
        s.append([0] + [m * prev[m] + prev[m - 1] for m in range(1, k + 1)])
    return s


def step_polynomials(p):
    """Coefficient of rho^k in tr(((1-rho)I + rho J)^p) as a polynomial in N.

    Returns ``{k: [c_0, c_1, ...]}`` (ascending powers of N, exact ints).
    The trace equals (1 + (N-1)rho)^p + (N-1)(1-rho)^p, so the rho^k
    coefficient is binom(p, k) [(N-1)^k + (-1)^k (N-1)].
    """
    out = {}
    for k in range(0, p + 1):
        coef = [0] * (k + 2)
        for n in range(k + 1):
            coef[n] += math.comb(k, n) * (-1) ** (k - n)
        coef[1] += (-1) ** k
        coef[0] -= (-1) ** k
        coef = [math.comb(p, k) * c for c in coef]
        while len(coef) > 1 and coef[-1] == 0:
            coef.pop()
        out[k] = coef
    return out


def falling_factorial_decomposition(p):
    """Express each rho^k coefficient in the basis N(N-1)...(N-m+1).

    Returns ``{k: {m: Fraction}}`` with zero entries dropped.
    """
    s = _stirling2(p + 1)
    out = {}
    for k, coef in step_polynomials(p).items():
        terms = {}
        for n, c in enumerate(coef):
            for m in range(n + 1):
                if c and s[n][m]:
                    terms[m] = terms.get(m, Fraction(0)) + c * s[n][m]
        out[k] = {m: v for m, v in terms.items() if v != 0}
    return out


def extract_combinatorial_constants(p):
    """Leading falling-factorial constants a_{p,k}, k = 2..p.

    a_{p,k} is the coefficient of N(N-1)...(N-k+1) rho^k; it counts the
    cyclic index sequences of length p with exactly k changes that visit k
    distinct values, divided by N(N-1)...(N-k+1).  For p <= 3 the lower
    falling-factorial terms vanish and N + sum_k a_{p,k} N^(k) rho^k is the
    whole trace; see ``falling_factorial_decomposition`` for the remainder.
    """
    if p < 2:
        raise DomainError("p must be at least 2")
    dec = falling_factorial_decomposition(p)
    out = {}
    for k in range(2, p + 1):
        v = dec[k].get(k, Fraction(0))
        assert v.denominator == 1
        out[k] = int(v)
    return out


def gamma_fluctuation_variance(p, model, max_p=DEFAULT_MAX_P):
    """E[(Gamma^(p) - E Gamma^(p))^2] for a single observation time.

    Gamma^(p) = c_p w'Bw with B = M^{p-1} and c_p the trace prefactor, so the
    fluctuation is a Gaussian quadratic form with variance
    c_p^2 [tr(B'MBM) + tr(BMBM)].
    """
    _check_order(p, max_p)
    if model.d != 1:
        raise CapabilityError("fluctuation variance is implemented for a single time")
    m = correlation_matrix(model).matrix
    b = np.linalg.matrix_power(m, p - 1)
    bm = b @ m
    btm = b.T @ m
    c = _prefactor(p, model.N)
    return c * c * float(np.sum(btm * bm.T) + np.sum(bm * bm.T))
