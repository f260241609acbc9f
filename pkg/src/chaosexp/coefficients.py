"""Coefficient tables c(I_j, k) of the Gamma-expectation expansions.

A table records, for each order ``j`` and index tuple ``I_j``, the constants
in

    E[Gamma^(j)_{I_j}] - C_{I_j} 1{j=2} = sum_k c(I_j, k) N^{-((j-3)_+ + k) gamma} + ...

together with the limit covariance ``C``.  Only entries of weight
(j-3)_+ + k <= p-1 reach the expansion of order p.

Sources of tables:

* ``coeff_table_wave_1d``: closed forms for one observation time.
* ``coeff_table_from_curves``: weighted least squares on exact Gamma curves,
  for anything else (e.g. two observation times along an eta-subsequence).
"""
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cumulants import (build_gamma_table, extract_combinatorial_constants,
                        falling_factorial_decomposition, gamma_expectation)
from .errors import (DegenerateLimitError, DomainError, IllConditionedFitError,
                     InvalidIndexError, NoSubsequenceError)
from .hermite import SpdMatrix
from .wave import WaveModel


def weight(j, k):
    """N-exponent of c(I_j, k) in units of gamma."""
    return max(j - 3, 0) + k


def max_k(j, p):
    """Largest k whose entry can be exposed at order p."""
    return p - 1 - max(j - 3, 0)


class CoefficientTable:
    """Expansion constants c(I_j, k), limit covariance C and rate gamma.

    Entries not stored are zero.  Index tuples use component labels 1..d.
    """

    def __init__(self, d, p, gamma, C, coeffs=None):
        if p < 2:
            raise DomainError("expansion order p must be at least 2")
        if not gamma > 0:
            raise DomainError("gamma must be positive")
        self.d = int(d)
        self.p = int(p)
        self.gamma = float(gamma)
        self.C = C if isinstance(C, SpdMatrix) else SpdMatrix(C)
        if self.C.d != self.d:
            raise DomainError(f"C is {self.C.d}x{self.C.d} but d={self.d}")
        self.coeffs = {}
        for (j, idx, k), v in (coeffs or {}).items():
            self.set(j, idx, k, v)

    @property
    def q(self):
        return (self.p - 1) * self.gamma

    def set(self, j, idx, k, value):
        idx = tuple(int(i) for i in idx)
        if not 2 <= j <= self.p + 1:
            raise DomainError(f"order j={j} outside 2..{self.p + 1}")
        if len(idx) != j or any(not 1 <= i <= self.d for i in idx):
            raise InvalidIndexError(f"bad index tuple {idx} for j={j}, d={self.d}")
        if k < 1:
            raise DomainError("k must be at least 1")
        self.coeffs[(j, idx, int(k))] = float(value)

    def value(self, j, idx, k):
        return self.coeffs.get((j, tuple(idx), k), 0.0)

    def exposed(self):
        """Nonzero entries that enter the order-p expansion."""
        return {key: v for key, v in self.coeffs.items()
                if v != 0.0 and weight(key[0], key[2]) <= self.p - 1}

    def to_dict(self):
        return {
            "d": self.d,
            "p": self.p,
            "gamma": self.gamma,
            "q": self.q,
            "C": self.C.matrix.tolist(),
            "coeffs": [{"j": j, "idx": list(idx), "k": k, "value": v}
                       for (j, idx, k), v in sorted(self.coeffs.items())],
        }

    @classmethod
    def from_dict(cls, data):
        coeffs = {(int(r["j"]), tuple(r["idx"]), int(r["k"])): float(r["value"])
                  for r in data["coeffs"]}
        return cls(data["d"], data["p"], data["gamma"], data["C"], coeffs)


# -- one observation time: closed forms -------------------------------------

def _series_mul(a, b, n):
    out = [0 * a[0]] * (n + 1)
    for i, x in enumerate(a[:n + 1]):
        if x:
            for j, y in enumerate(b[:n + 1 - i]):
                out[i + j] += x * y
    return out


def _series_pow(a, e, n):
    out = [1 + 0 * a[0]] + [0 * a[0]] * n
    for _ in range(e):
        out = _series_mul(out, a, n)
    return out


def wave_gamma_series(j, t, order):
    """Power series of E[Gamma^(j)] in x = 1/N for one time t.

    Returns S_0..S_order with E[Gamma^(j)] = 2^{j/2-1} x^{j/2-1} sum_n S_n x^n.
    Exact when ``t`` is an int or Fraction.
    """
    one = Fraction(1) if isinstance(t, (int, Fraction)) else 1.0
    u = one / (4 * t)
    n = order + 1
    # rho = -ux/(1-ux) and (N-1) rho = -u(1-x)/(1-ux)
    geo = [u ** i for i in range(n + 1)]
    rho = [0 * one] + [-g for g in geo[1:]]
    nrho = _series_mul([-u * one, u * one] + [0 * one] * (n - 1), geo, n)
    first = _series_pow([one + nrho[0]] + nrho[1:], j, n)
    second = _series_pow([one - rho[0]] + [-r for r in rho[1:]], j, n)
    s = [0 * one] * (n + 1)
    for i in range(n):
        s[i + 1] += first[i]
        s[i] += second[i]
        s[i + 1] -= second[i]
    return s[:order + 1]


def wave_coefficient(j, k, t):
    """c(I_j, k) for one observation time t > 1/2 (gamma = 1/2)."""
    if not t > 0.5:
        raise DomainError("t must exceed 1/2")
    if j < 2 or k < 1:
        raise DomainError("need j >= 2 and k >= 1")
    u = 1.0 / (4.0 * float(t))
    if j == 2:
        if k % 2:
            return 0.0
        h = k // 2
        return h * u ** (h + 1) - (h - 1) * u ** h
    if k % 2 == 0:
        return 0.0
    lead = 2.0 ** (j / 2 - 1)
    if k == 1:
        return lead
    a = extract_combinatorial_constants(j)
    if k == 3:
        return lead * sum(a[m] * (-u) ** m for m in range(2, j + 1))
    if k == 5:
        dec = falling_factorial_decomposition(j)
        total = 0.0
        for m in range(2, j + 1):
            sub = float(dec[m].get(m - 1, 0))
            total += (-u) ** m * (a[m] * (m * u - m * (m - 1) / 2) + sub)
        return lead * total
    s = wave_gamma_series(j, float(t), (k - 1) // 2)
    return lead * float(s[(k - 1) // 2])


def coeff_table_wave_1d(t, p):
    """Closed-form table for one observation time."""
    if not t > 0.5:
        raise DomainError("t must exceed 1/2")
    if p not in (2, 3, 4):
        raise DomainError("wave tables are provided for p in {2, 3, 4}")
    table = CoefficientTable(1, p, 0.5, [[1.0]])
    for j in range(2, p + 2):
        for k in range(1, max_k(j, p) + 1):
            table.set(j, (1,) * j, k, wave_coefficient(j, k, t))
    return table


# -- regression ---------------------------------------------------------------

@dataclass
class FitResult:
    coefficients: list
    exponents: list
    residuals: dict = field(default_factory=dict)
    tail_residual: float = 0.0
    tail_bound: float = 0.0

    @property
    def tail_ok(self):
        return self.tail_residual <= self.tail_bound

    def __iter__(self):
        return iter(self.coefficients)

    def __getitem__(self, i):
        return self.coefficients[i]

    def __len__(self):
        return len(self.coefficients)


def fit_coefficients(cumulant_curve, gamma, exponents, q):
    """Fit ``y(N) = sum_r beta_r N^{-e_r}`` by weighted least squares.

    Rows are weighted by N^q (squared-residual weight N^{2q}) and columns are
    scaled to unit norm before solving.

    Returns a ``FitResult``; ``tail_ok`` reports whether the residual at the
    largest N is at most 10 N^{-q-gamma}.
    """
    ns = np.array(sorted(cumulant_curve), dtype=float)
    y = np.array([cumulant_curve[n] for n in sorted(cumulant_curve)], dtype=float)
    e = [float(x) for x in exponents]
    if len(set(ns)) < 2 * len(e):
        raise IllConditionedFitError(
            f"{len(set(ns))} distinct N values cannot support {len(e)} exponents")
    order = sorted(range(len(e)), key=lambda r: e[r])
    for a, b in zip(order, order[1:]):
        if abs(e[a] - e[b]) < 1e-9:
            raise IllConditionedFitError(f"exponents {e[a]} and {e[b]} collide")
    x = ns[:, None] ** (-np.array(e)[None, :])
    w = ns ** q
    xw = x * w[:, None]
    scale = np.linalg.norm(xw, axis=0)
    if np.any(scale == 0) or not np.all(np.isfinite(scale)):
        raise IllConditionedFitError("degenerate design column")
    xs = xw / scale
    sv = np.linalg.svd(xs, compute_uv=False)
    if sv[-1] < 1e-8 * sv[0]:
        pair = min(zip(order, order[1:]), key=lambda ab: abs(e[ab[0]] - e[ab[1]]))
        raise IllConditionedFitError(
            f"design is numerically rank deficient; closest exponents {e[pair[0]]} and {e[pair[1]]}")
    beta, *_ = np.linalg.lstsq(xs, y * w, rcond=None)
    beta = beta / scale
    resid = y - x @ beta
    nmax = ns[-1]
    return FitResult(
        coefficients=[float(b) for b in beta],
        exponents=e,
        residuals={int(n): float(r) for n, r in zip(ns, resid)},
        tail_residual=float(abs(resid[-1])),
        tail_bound=float(10.0 * nmax ** (-q - gamma)),
    )


def coeff_table_from_curves(curves, C, p, gamma=0.5, extra=3, d=None):
    """Regression table from exact Gamma curves.

    ``curves`` maps (j, I_j) to {N: E[Gamma^(j)_{I_j}]}.  Each curve, minus
    C_{I_j} when j = 2, is fitted with the regular-ordering exponents
    ((j-3)_+ + k) gamma for k = 1..k_max plus ``extra`` higher terms that
    absorb the tail; only k <= k_max is stored.
    """
    C = C if isinstance(C, SpdMatrix) else SpdMatrix(C)
    table = CoefficientTable(d or C.d, p, gamma, C)
    for (j, idx), curve in sorted(curves.items()):
        if j > p + 1:
            continue
        kmax = max_k(j, p)
        if kmax < 1:
            continue
        shift = C.matrix[idx[0] - 1, idx[1] - 1] if j == 2 else 0.0
        data = {n: v - shift for n, v in curve.items()}
        exps = [weight(j, k) * gamma for k in range(1, kmax + extra + 1)]
        fit = fit_coefficients(data, gamma, exps, (p - 1) * gamma)
        for k in range(1, kmax + 1):
            table.set(j, idx, k, fit[k - 1])
    return table


# -- two observation times -------------------------------------------------------

def _rational(x, max_den=10 ** 6):
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    fr = Fraction(x).limit_denominator(max_den)
    return fr if abs(float(fr) - x) <= 1e-12 * max(1.0, abs(x)) else None


def eta(tau, N):
    """Fractional defect ceil(tau N) - tau N, in [0, 1)."""
    if N < 1:
        raise DomainError("N must be positive")
    fr = _rational(tau)
    if fr is not None:
        v = fr * N
        return float(math.ceil(v) - v)
    v = tau * N
    return float(math.ceil(v) - v)


def limit_covariance_two_time(t1, t2, a):
    """Limit covariance of (F_{N,t1}, F_{N,t2}) along eta_N -> a."""
    if not (t1 > 0.5 and t2 > 0.5):
        raise DomainError("times must exceed 1/2")
    if t1 == t2:
        raise DomainError("the two times must differ")
    if not 0.0 <= a <= 1.0:
        raise DomainError("a must lie in [0, 1]")
    tau = abs(t1 - t2)
    if tau >= 1:
        c12 = 0.0
    else:
        m = min(t1, t2)
        c12 = (1 - tau) * m * m / (2 * t1 * t2) * (2 * a * a - 2 * a + 1)
    if not abs(c12) < 1:
        raise DegenerateLimitError(f"limit correlation {c12} is not below 1")
    return SpdMatrix([[1.0, c12], [c12, 1.0]])


def _min_n(tau):
    return max(2, math.floor(1 / tau) + 1)


def subsequence(tau, a, count, n_min=None):
    """Increasing grid sizes N with eta(tau, N) -> a.

    For rational tau = u/v the selection is exact (eta_N = a) and requires
    a to be a multiple of 1/v.  Otherwise N is accepted when
    |eta_N - a| <= N^{-3/4}, which is o(N^{-1/2}).
    Grid sizes start above 1/tau.
    """
    if not 0 < tau < 1:
        raise DomainError("tau must lie in (0, 1)")
    if count < 1:
        return []
    start = max(_min_n(tau), n_min or 0)
    fr = _rational(tau)
    if fr is not None:
        u, v = fr.numerator, fr.denominator
        target = a * v
        r = round(target)
        if abs(target - r) > 1e-9 * v or not 0 <= r < v:
            levels = ", ".join(str(Fraction(i, v)) for i in range(v))
            raise NoSubsequenceError(
                f"a={a} unreachable for tau={fr}; attainable eta values: {levels}")
        res = (-r * pow(u, -1, v)) % v
        first = start + ((res - start) % v)
        return [first + v * i for i in range(count)]
    out = []
    n = start
    limit = start + 10 ** 8
    while len(out) < count:
        if abs(eta(tau, n) - a) <= n ** -0.75:
            out.append(n)
        n += 1
        if n > limit:
            raise NoSubsequenceError(f"no grid sizes found for tau={tau}, a={a}")
    return out


def two_time_curves(t1, t2, N_list, max_j=3):
    """Exact Gamma curves for all index tuples of orders 2..max_j."""
    curves = {}
    for n in N_list:
        table = build_gamma_table(WaveModel((t1, t2), n), max_j)
        for j in range(2, max_j + 1):
            for idx in itertools.product((1, 2), repeat=j):
                curves.setdefault((j, idx), {})[n] = table.value(j, idx)
    return curves


def fit_joint_third_cumulant(t1, t2, a, N_list, idx=(1, 1, 2)):
    """Leading constant D_1 of E[Gamma^(3)_idx] = D_1 N^{-1/2} + ..."""
    curve = {n: gamma_expectation(3, idx, WaveModel((t1, t2), n)) for n in N_list}
    if all(v == 0.0 for v in curve.values()):
        return 0.0
    exps = [0.5, 1.5, 2.5, 3.5][:max(1, len(curve) // 2)]
    return fit_coefficients(curve, 0.5, exps, 0.5)[0]


def coeff_table_two_time(t1, t2, a, N_list, p=2):
    """Regression table for two times along a subsequence with eta_N = a."""
    C = limit_covariance_two_time(t1, t2, a)
    curves = two_time_curves(t1, t2, N_list, p + 1)
    return coeff_table_from_curves(curves, C, p, 0.5)


# -- regular ordering -------------------------------------------------------------

@dataclass
class OrderingRow:
    j: int
    idx: tuple
    k: object
    expected_slope: float
    observed_slope: float
    passed: bool


@dataclass
class OrderingReport:
    rows: list

    @property
    def passed(self):
        return all(r.passed for r in self.rows)


def _observed_slope(curve, limit):
    ns = sorted(curve)
    tail = ns[len(ns) // 2:]
    r = np.array([abs(curve[n] - limit) for n in tail])
    if np.all(r <= 1e-300):
        return None
    nz = r > 1e-300
    if nz.sum() < 2:
        return None
    return float(np.polyfit(np.log(np.array(tail, float)[nz]), np.log(r[nz]), 1)[0])


def check_regular_ordering(table, gamma_curves, rtol=0.05):
    """Compare observed decay of each Gamma curve with the table's leading weight.

    The observed slope is fitted on the largest half of the N grid.  A curve
    whose table entries all vanish up to order p passes when it decays faster
    than N^{-q}.  Zero curves pass vacuously.
    """
    rows = []
    for (j, idx), curve in sorted(gamma_curves.items()):
        idx = tuple(idx)
        limit = table.C.matrix[idx[0] - 1, idx[1] - 1] if j == 2 else 0.0
        obs = _observed_slope(curve, limit)
        lead = None
        if j <= table.p + 1:
            for k in range(1, max_k(j, table.p) + 1):
                if table.value(j, idx, k) != 0.0:
                    lead = k
                    break
        if obs is None:
            rows.append(OrderingRow(j, idx, lead, float("nan"), float("nan"), True))
            continue
        if lead is None:
            rows.append(OrderingRow(j, idx, None, -table.q, obs, obs <= -table.q * (1 - rtol)))
            continue
        expected = -weight(j, lead) * table.gamma
        rows.append(OrderingRow(j, idx, lead, expected, obs,
                                abs(obs - expected) <= rtol * abs(expected)))
    return OrderingReport(rows)


def wave_gamma_curves(t, N_list, max_j):
    """Exact single-time curves {(j, (1,)*j): {N: E[Gamma^(j)]}}."""
    curves = {}
    for n in N_list:
        table = build_gamma_table(WaveModel((t,), n), max_j)
        for j in range(2, max_j + 1):
            curves.setdefault((j, (1,) * j), {})[n] = table.value(j, (1,) * j)
    return curves
