"""Gaussian densities and multivariate Hermite polynomials H_alpha(x; C).

The Hermite polynomial attached to a covariance ``C`` and a multi-index
``alpha`` is

    H_alpha(x; C) = exp(x'C^{-1}x / 2) (-d/dx)^alpha exp(-x'C^{-1}x / 2),

so that ``H_alpha(x; C) phi(x; C) = (-d/dx)^alpha phi(x; C)``.  Polynomials are
stored as dense coefficient arrays in the monomial basis and evaluated with
one Horner pass per axis.
"""
import threading

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import InvalidCovarianceError, InvalidIndexError, ShapeError

SYMMETRY_RTOL = 1e-12


def multi_index(exponents, d=None):
    """Validate and return a multi-index as a tuple of nonnegative ints."""
    alpha = tuple(int(a) for a in np.atleast_1d(exponents))
    if any(a < 0 for a in alpha):
        raise ShapeError(f"multi-index entries must be nonnegative, got {alpha}")
    if d is not None and len(alpha) != d:
        raise ShapeError(f"multi-index {alpha} has length {len(alpha)}, expected {d}")
    return alpha


def exponent_of_blocks(blocks, d):
    """Count occurrences of each component label across index blocks.

    Component labels run over ``1..d``.

    >>> exponent_of_blocks([(1, 1, 2)], 2)
    (2, 1)
    """
    counts = [0] * d
    for block in blocks:
        for i in block:
            if not 1 <= i <= d:
                raise InvalidIndexError(f"index {i} outside 1..{d}")
            counts[i - 1] += 1
    return tuple(counts)


class SpdMatrix:
    """Symmetric positive definite matrix with cached factorization.

    Also owns the memo table of Hermite coefficient arrays for this ``C``.

    Parameters
    ----------
    entries : array_like
        Square matrix.  It is symmetrized as (C + C')/2 after a relative
        symmetry check at 1e-12.
    """

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ShapeError(f"covariance must be square, got shape {a.shape}")
        scale = np.max(np.abs(a)) if a.size else 0.0
        if not np.all(np.isfinite(a)) or scale == 0.0:
            raise InvalidCovarianceError("covariance must be finite and nonzero")
        if np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * scale:
            raise InvalidCovarianceError("covariance is not symmetric")
        a = 0.5 * (a + a.T)
        try:
            chol = np.linalg.cholesky(a)
        except np.linalg.LinAlgError:
            raise InvalidCovarianceError("covariance is not positive definite") from None
        self.matrix = a
        self.cholesky = chol
        eye = np.eye(a.shape[0])
        linv = np.linalg.solve(chol, eye)
        inv = linv.T @ linv
        self.inverse = 0.5 * (inv + inv.T)
        self.logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
        self._hermite = {(0,) * self.d: np.ones((1,) * self.d)}
        self._lock = threading.Lock()

    @property
    def d(self):
        return self.matrix.shape[0]

    def __repr__(self):
        return f"SpdMatrix({self.matrix.tolist()!r})"

    def hermite_coefficients(self, alpha):
        """Dense monomial coefficients of H_alpha(.; C), memoized."""
        alpha = multi_index(alpha, self.d)
        table = self._hermite.get(alpha)
        if table is None:
            with self._lock:
                table = self._build(alpha)
        return table

    def prepare(self, alphas):
        """Build the memo entries for ``alphas`` up front."""
        for alpha in alphas:
            self.hermite_coefficients(alpha)

    def _build(self, alpha):
        if alpha in self._hermite:
            return self._hermite[alpha]
        i = max(k for k, a in enumerate(alpha) if a > 0)
        beta = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1:]
        prev = self._build(beta)
        out = _recurrence_step(prev, i, self.inverse)
        out.setflags(write=False)
        self._hermite[alpha] = out
        return out


def _recurrence_step(coef, i, inv):
    """Apply H_{beta+e_i} = (C^{-1}x)_i H_beta - d_i H_beta to a coefficient array."""
    d = coef.ndim
    size = coef.shape[0] + 1
    out = np.zeros((size,) * d)
    for k in range(d):
        if inv[i, k] == 0.0:
            continue
        sl = [slice(0, size - 1)] * d
        sl[k] = slice(1, size)
        out[tuple(sl)] += inv[i, k] * coef
    der = npoly.polyder(coef, axis=i)
    if der.size:
        sl = [slice(0, size - 1)] * d
        sl[i] = slice(0, der.shape[i])
        out[tuple(sl)] -= der
    return out


def as_spd(C):
    return C if isinstance(C, SpdMatrix) else SpdMatrix(C)


def _as_points(x, d):
    """Return an (n, d) array of points and the output shape."""
    x = np.asarray(x, dtype=float)
    if d == 1:
        return x.reshape(-1, 1), x.shape
    if x.ndim == 0 or x.shape[-1] != d:
        raise ShapeError(f"points must have trailing dimension {d}, got shape {x.shape}")
    return x.reshape(-1, d), x.shape[:-1]


def _horner(coef, pts):
    val = npoly.polyval(pts[:, 0], coef)
    for k in range(1, pts.shape[1]):
        val = npoly.polyval(pts[:, k], val, tensor=False)
    return val


def gaussian_density(x, C):
    """Centered normal density with covariance ``C``.

    ``x`` may be a single point or an array of points (trailing axis of
    length d; for d=1 any shape is accepted).
    """
    C = as_spd(C)
    pts, shape = _as_points(x, C.d)
    z = np.linalg.solve(C.cholesky, pts.T)
    quad = np.sum(z * z, axis=0)
    logc = -0.5 * (C.d * np.log(2 * np.pi) + C.logdet)
    val = np.exp(logc - 0.5 * quad)
    return val.reshape(shape) if shape else float(val[0])


def hermite_eval(alpha, x, C):
    """Evaluate H_alpha(x; C) at one or many points."""
    C = as_spd(C)
    alpha = multi_index(alpha)
    if len(alpha) != C.d:
        raise ShapeError(f"multi-index of length {len(alpha)} for a {C.d}-dim covariance")
    pts, shape = _as_points(x, C.d)
    val = _horner(C.hermite_coefficients(alpha), pts)
    return val.reshape(shape) if shape else float(val[0])
