from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chaosexp.errors import DomainError, InvalidIndexError
from chaosexp.wave import (WaveModel, correlation_matrix, covariance_matrix,
                           increment_covariance_closed, increment_covariance_kernel,
                           point_covariance)


def test_point_covariance_examples():
    assert point_covariance(1, 1, F(1, 3), F(1, 3)) == F(1, 4)
    assert point_covariance(1, 2, 0.0, 0.5) == 0.25
    assert point_covariance(1, 1, 0.0, 2.5) == 0.0
    with pytest.raises(DomainError):
        point_covariance(0.0, 1.0, 0.1, 0.2)


@settings(max_examples=60)
@given(t1=st.floats(0.1, 3), t2=st.floats(0.1, 3), x=st.floats(-2, 2), y=st.floats(-2, 2))
def test_point_covariance_symmetry(t1, t2, x, y):
    assert point_covariance(t1, t2, x, y) == point_covariance(t2, t1, y, x)
    assert point_covariance(t1, t2, x, y) >= 0


def test_kernel_examples():
    assert increment_covariance_kernel(1, 1, 0, 0, 4) == F(15, 128)
    assert increment_covariance_kernel(1, 1, 0, 2, 4) == F(-1, 128)
    for i in range(8):
        for j in range(8):
            assert increment_covariance_kernel(F(3, 5), F(21, 10), i, j, 8) == 0


def test_closed_examples():
    assert increment_covariance_closed(1, 1, 3, 3, 10) == F(1, 40) * (2 - F(1, 20))
    assert increment_covariance_closed(F(3, 5), F(9, 10), 4, 4, 10) == 0
    # branch (|i-j|-1)/N < tau <= |i-j|/N with |i-j| = 3
    t1, t2, N = F(3, 5), F(9, 10), 10
    h, s, m = F(1, N), t1 + t2, t1
    f1 = (s - 3 * h) ** 2 / 8 - (s - 4 * h) ** 2 / 16 - m * m / 4
    assert increment_covariance_closed(t1, t2, 5, 2, N) == f1
    assert increment_covariance_kernel(t1, t2, 5, 2, N) == f1


def test_closed_preconditions():
    with pytest.raises(DomainError):
        increment_covariance_closed(0.4, 0.4, 0, 1, 4)
    with pytest.raises(DomainError):
        increment_covariance_closed(0.6, 0.9, 0, 0, 2)
    with pytest.raises(InvalidIndexError):
        increment_covariance_closed(1, 1, 0, 4, 4)
    with pytest.raises(InvalidIndexError):
        increment_covariance_kernel(1, 1, -1, 0, 4)


@pytest.mark.parametrize("N", [2, 3, 4, 7, 8, 16, 20])
@pytest.mark.parametrize("times", [(1, 1), (F(3, 5), F(3, 5)), (2, 2), (F(3, 5), F(9, 10)),
                                   (F(7, 10), F(13, 10)), (F(3, 5), F(21, 10)), (F(3, 4), 1)])
def test_closed_equals_kernel_exactly(times, N):
    t1, t2 = times
    for i in range(N):
        for j in range(N):
            if t1 != t2 and i == j and not N * abs(t1 - t2) > 1:
                continue
            assert increment_covariance_closed(t1, t2, i, j, N) == \
                increment_covariance_kernel(t1, t2, i, j, N)


@settings(max_examples=50, deadline=None)
@given(t1=st.floats(0.55, 2.5), t2=st.floats(0.55, 2.5), N=st.integers(2, 24),
       i=st.integers(0, 23), j=st.integers(0, 23))
def test_closed_equals_kernel_floats(t1, t2, N, i, j):
    i, j = i % N, j % N
    tau = abs(t1 - t2)
    if t1 != t2 and i == j and not N * tau > 1:
        return
    # stay away from branch ties, where both forms are continuous anyway
    k = abs(i - j)
    if t1 != t2 and min(abs(tau - n / N) for n in (k - 1, k, k + 1)) < 1e-9:
        return
    a = increment_covariance_closed(t1, t2, i, j, N)
    b = increment_covariance_kernel(t1, t2, i, j, N)
    assert abs(a - b) <= 1e-12


def test_model_validation():
    with pytest.raises(DomainError):
        WaveModel((1.0,), 1)
    with pytest.raises(DomainError):
        WaveModel((0.4,), 4)
    with pytest.raises(DomainError):
        WaveModel((1.0, 1.0), 4)
    with pytest.raises(DomainError):
        WaveModel((1.0, 1.2, 1.4), 4)
    m = WaveModel(1.0, 8)
    assert m.times == (1.0,) and m.d == 1 and m.dim == 8


def test_covariance_matrix_examples():
    c = covariance_matrix(WaveModel((1.0,), 2)).matrix
    assert np.allclose(c, [[0.21875, -0.03125], [-0.03125, 0.21875]], atol=1e-16)
    c = covariance_matrix(WaveModel((0.6, 2.1), 4))
    assert np.all(c.block(1, 2) == 0) and np.all(c.block(2, 1) == 0)
    assert not c.matrix.flags.writeable


@pytest.mark.parametrize("times,N", [((1.0,), 16), ((0.6, 0.9), 12), ((0.7, 1.3), 9),
                                     ((2.0,), 33), ((0.55, 0.8), 40)])
def test_covariance_matrix_matches_kernel_and_is_psd(times, N):
    model = WaveModel(times, N)
    sig = covariance_matrix(model).matrix
    assert np.max(np.abs(sig - sig.T)) <= 1e-14
    for a, ta in enumerate(times):
        for b, tb in enumerate(times):
            for i in range(N):
                for j in range(N):
                    v = increment_covariance_kernel(ta, tb, i, j, N)
                    assert abs(sig[a * N + i, b * N + j] - v) <= 1e-14
    eig = np.linalg.eigvalsh(sig)
    assert eig.min() >= -1e-14 * eig.max()


@pytest.mark.parametrize("t,N", [(1.0, 4), (0.6, 16), (2.0, 64)])
def test_correlation_same_time(t, N):
    model = WaveModel((t,), N)
    r = correlation_matrix(model).matrix
    h = 1.0 / N
    rho = -(h * h / 8) / (h / 4 * (2 * t - h / 2))
    assert np.allclose(np.diag(r), 1.0)
    off = r[~np.eye(N, dtype=bool)]
    assert np.allclose(off, rho, rtol=1e-13)
    # row sums of |R| stay bounded in N
    assert np.max(np.sum(np.abs(r), axis=1)) <= 1 + 1 / (4 * t) + 1e-12


def test_correlation_cross_block_vanishes():
    r = correlation_matrix(WaveModel((0.6, 2.1), 16))
    assert np.all(r.block(1, 2) == 0)
    with pytest.raises(DomainError):
        correlation_matrix(WaveModel((1.0,), 1))
