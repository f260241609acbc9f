"""Covariance of the 1-d stochastic wave equation and of its spatial increments.

The field is observed at one or two times on the grid x_j = j/N of [0, 1];
cell A_i = [x_i, x_{i+1}].  Scalar functions accept ints, floats or
``fractions.Fraction``; with rational inputs the results are exact rationals.
"""
import numbers
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import toeplitz

from .errors import DegenerateModelError, DomainError, InvalidIndexError


def _exact(*values):
    return all(isinstance(v, numbers.Rational) for v in values)


def point_covariance(t1, t2, x, y):
    """E[u(t1, x) u(t2, y)] for the mild solution driven by space-time white noise."""
    if t1 <= 0 or t2 <= 0:
        raise DomainError("point covariance needs positive times")
    r = abs(x - y)
    s = t1 + t2
    if abs(t1 - t2) > r:
        m = min(t1, t2)
        return m * m / 4
    if r < s:
        return (s - r) ** 2 / 16
    return 0 * r


def _check_cells(i, j, N):
    if not (isinstance(N, numbers.Integral) and N >= 1):
        raise DomainError(f"N must be a positive integer, got {N!r}")
    for c in (i, j):
        if not (isinstance(c, numbers.Integral) and 0 <= c <= N - 1):
            raise InvalidIndexError(f"cell index {c!r} outside 0..{N - 1}")


def increment_covariance_kernel(t1, t2, i, j, N):
    """E[u(t1, A_i) u(t2, A_j)] as a second difference of the point kernel."""
    _check_cells(i, j, N)
    if _exact(t1, t2):
        def grid(k):
            return Fraction(k, N)
    else:
        def grid(k):
            return k / N
    xi, xi1, xj, xj1 = grid(i), grid(i + 1), grid(j), grid(j + 1)
    return (point_covariance(t1, t2, xi1, xj1) - point_covariance(t1, t2, xi1, xj)
            - point_covariance(t1, t2, xi, xj1) + point_covariance(t1, t2, xi, xj))


def increment_covariance_closed(t1, t2, i, j, N):
    """Piecewise closed form of the increment covariance.

    Raises ``DomainError`` outside the cases where the closed form is
    established: same time needs t > 1/2; two times need t1 + t2 > 1, and a
    same-cell entry additionally needs N > 1/|t1 - t2|.
    """
    _check_cells(i, j, N)
    one = Fraction(1) if _exact(t1, t2) else 1.0
    h = one / N
    if t1 == t2:
        t = t1
        if not t > one / 2:
            raise DomainError("same-time case needs t > 1/2")
        if i == j:
            return h / 4 * (2 * t - h / 2)
        return -h * h / 8
    if not t1 + t2 > 1:
        raise DomainError("two-time case needs t1 + t2 > 1")
    tau = abs(t1 - t2)
    if i == j:
        if not N * tau > 1:
            raise DomainError("two-time same-cell case needs N > 1/|t1 - t2|")
        return 0 * one
    k = abs(i - j)
    s = t1 + t2
    m = min(t1, t2)
    if tau <= (k - 1) * h:
        return -h * h / 8
    if tau <= k * h:
        return (s - k * h) ** 2 / 8 - (s - (k + 1) * h) ** 2 / 16 - m * m / 4
    if tau <= (k + 1) * h:
        return m * m / 4 - (s - (k + 1) * h) ** 2 / 16
    return 0 * one


@dataclass(frozen=True)
class WaveModel:
    """Observation design: one or two times and the number of grid cells."""

    times: tuple
    N: int

    def __post_init__(self):
        times = tuple(self.times) if np.iterable(self.times) else (self.times,)
        object.__setattr__(self, "times", times)
        if isinstance(self.N, bool) or not isinstance(self.N, numbers.Integral) or self.N < 2:
            raise DomainError(f"N must be an integer >= 2, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        if len(times) not in (1, 2):
            raise DomainError(f"one or two observation times supported, got {len(times)}")
        for t in times:
            if not t > Fraction(1, 2):
                raise DomainError(f"t must exceed 1/2, got {t}")
        if len(times) == 2 and times[0] == times[1]:
            raise DomainError("the two observation times must differ")

    @property
    def d(self):
        return len(self.times)

    @property
    def dim(self):
        return self.d * self.N


def _lag_profile(t1, t2, N):
    """Increment covariance as a function of the signed lag j - i."""
    t1, t2 = float(t1), float(t2)
    lags = np.arange(-(N - 1), N)
    r = np.abs(lags[:, None] + np.array([-1, 0, 1])[None, :]) / N
    tau, s, m = abs(t1 - t2), t1 + t2, min(t1, t2)
    k = np.where(tau > r, m * m / 4, np.where(r < s, (s - r) ** 2 / 16, 0.0))
    return lags, 2 * k[:, 1] - k[:, 0] - k[:, 2]


@dataclass(frozen=True)
class IncrementCovariance:
    model: WaveModel
    matrix: np.ndarray

    def block(self, a, b):
        """Block for time labels ``a``, ``b`` in 1..d."""
        N = self.model.N
        return self.matrix[(a - 1) * N:a * N, (b - 1) * N:b * N]


@dataclass(frozen=True)
class CorrelationMatrix:
    model: WaveModel
    matrix: np.ndarray

    def block(self, a, b):
        N = self.model.N
        return self.matrix[(a - 1) * N:a * N, (b - 1) * N:b * N]


def covariance_matrix(model):
    """Assemble the (dN x dN) covariance of all cell increments."""
    N, d = model.N, model.d
    out = np.empty((d * N, d * N))
    for a in range(d):
        for b in range(a, d):
            _, prof = _lag_profile(model.times[a], model.times[b], N)
            # entry (i, j) depends on j - i; prof is indexed by lag + N - 1
            blk = toeplitz(prof[N - 1::-1], prof[N - 1:])
            out[a * N:(a + 1) * N, b * N:(b + 1) * N] = blk
            out[b * N:(b + 1) * N, a * N:(a + 1) * N] = blk.T
    out.setflags(write=False)
    return IncrementCovariance(model, out)


def correlation_matrix(model, covariance=None):
    """Normalize the increment covariance to unit diagonal."""
    sigma = (covariance or covariance_matrix(model)).matrix
    var = np.diag(sigma).copy()
    if np.any(var <= 0):
        raise DegenerateModelError("an increment has zero variance")
    scale = 1.0 / np.sqrt(var)
    m = sigma * scale[:, None] * scale[None, :]
    m = 0.5 * (m + m.T)
    np.fill_diagonal(m, 1.0)
    m.setflags(write=False)
    return CorrelationMatrix(model, m)
