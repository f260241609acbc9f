"""Reduced expansion symbol, density, CDF and characteristic function.

The symbol is a polynomial in lambda,

    P(lambda) = 1 + sum_w N^{-w gamma} sum_alpha a_{w,alpha} i^{|alpha|} lambda^alpha,

obtained by expanding exp(X) to the order allowed by the exposure rule, where

    X = sum_{(j, I_j, k)} c(I_j, k)/j * i^j lambda_{I_j} N^{-((j-3)_+ + k) gamma}.

Substituting lambda -> i d/dx turns i^{|alpha|} lambda^alpha into (-d/dx)^alpha,
so the density is phi(x; C) [1 + sum_w N^{-w gamma} sum_alpha a_{w,alpha} H_alpha(x; C)].
The coefficients a_{w,alpha} are real; complex numbers appear only when the
symbol or characteristic function is evaluated.
"""
import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import simpson
from scipy.special import ndtr

from .coefficients import weight
from .errors import CapabilityError, DomainError, QuadratureError
from .hermite import _as_points, _horner, exponent_of_blocks, gaussian_density

_I_POWERS = (1, 1j, -1, -1j)


def _poly_mul(a, b, wmax):
    out = {}
    for (w1, al1), c1 in a.items():
        for (w2, al2), c2 in b.items():
            w = w1 + w2
            if w > wmax:
                continue
            key = (w, tuple(x + y for x, y in zip(al1, al2)))
            out[key] = out.get(key, 0.0) + c1 * c2
    return out


def compile_symbol(table, k_order=None):
    """Merged monomial map {weight: {alpha: a}} of the reduced symbol."""
    p, d = table.p, table.d
    wmax = p - 1
    depth = wmax if k_order is None else min(k_order, wmax)
    block = {}
    for (j, idx, k), c in table.exposed().items():
        key = (weight(j, k), exponent_of_blocks([idx], d))
        block[key] = block.get(key, 0.0) + c / j
    total = {}
    power = {(0, (0,) * d): 1.0}
    for n in range(1, depth + 1):
        power = _poly_mul(power, block, wmax)
        if not power:
            break
        for key, c in power.items():
            total[key] = total.get(key, 0.0) + c / math.factorial(n)
    out = {}
    for (w, alpha), c in sorted(total.items()):
        if c != 0.0:
            out.setdefault(w, {})[alpha] = c
    return out


@dataclass
class ExpansionSpec:
    """A coefficient table evaluated at a grid size N."""

    table: object
    N: int
    k_order: int = None

    def __post_init__(self):
        if self.N < 1:
            raise DomainError("N must be positive")
        if self.k_order is None:
            self.k_order = self.table.p - 1
        if self.k_order < self.table.p - 1:
            raise DomainError(f"k_order must be at least p-1 = {self.table.p - 1}")

    @property
    def C(self):
        return self.table.C

    @property
    def d(self):
        return self.table.d

    @cached_property
    def terms(self):
        terms = compile_symbol(self.table, self.k_order)
        self.C.prepare(alpha for group in terms.values() for alpha in group)
        return terms

    def scale(self, w):
        return float(self.N) ** (-w * self.table.gamma)


@dataclass
class DensityEvaluation:
    base: object
    correction_terms: dict
    total: object


def symbol_p_tilde(lam, spec):
    """Reduced symbol at lambda (one point, or an array of points)."""
    pts, shape = _as_points(lam, spec.d)
    out = np.ones(pts.shape[0], dtype=complex)
    for w, group in spec.terms.items():
        acc = np.zeros(pts.shape[0], dtype=complex)
        for alpha, a in group.items():
            mono = np.prod(pts ** np.array(alpha), axis=1)
            acc += a * _I_POWERS[sum(alpha) % 4] * mono
        out += spec.scale(w) * acc
    return out.reshape(shape) if shape else complex(out[0])


def _corrections(pts, spec):
    out = {}
    for w, group in spec.terms.items():
        acc = np.zeros(pts.shape[0])
        for alpha, a in group.items():
            acc += a * _horner(spec.C.hermite_coefficients(alpha), pts)
        out[w] = acc
    return out


def density(x, spec):
    """Expansion density with its Gaussian base and per-weight corrections."""
    pts, shape = _as_points(x, spec.d)
    base = gaussian_density(pts if spec.d > 1 else pts[:, 0], spec.C)
    base = np.asarray(base, dtype=float).reshape(-1)
    corr = _corrections(pts, spec)
    factor = np.ones_like(base)
    for w, c in corr.items():
        factor += spec.scale(w) * c
    total = base * factor

    def fmt(v):
        return v.reshape(shape) if shape else float(v[0])

    return DensityEvaluation(fmt(base), {w: fmt(c) for w, c in corr.items()}, fmt(total))


def density_values(x, spec):
    return density(x, spec).total


def cdf(x, spec):
    """Distribution function of the expansion (one dimension only).

    Uses int_{-inf}^x H_n phi = -H_{n-1}(x) phi(x) for n >= 1.
    """
    if spec.d != 1:
        raise CapabilityError("the expansion CDF is implemented for d = 1")
    x = np.asarray(x, dtype=float)
    pts = x.reshape(-1, 1)
    sigma = math.sqrt(spec.C.matrix[0, 0])
    phi = np.asarray(gaussian_density(pts[:, 0], spec.C)).reshape(-1)
    out = ndtr(pts[:, 0] / sigma)
    for w, group in spec.terms.items():
        acc = np.zeros(pts.shape[0])
        for (n,), a in group.items():
            acc -= a * _horner(spec.C.hermite_coefficients((n - 1,)), pts)
        out = out + spec.scale(w) * acc * phi
    return out.reshape(x.shape) if x.shape else float(out[0])


def _gauss_legendre_box(half_widths, n):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    axes = [(nodes * h, weights * h) for h in half_widths]
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    wgrid = np.ones_like(grids[0])
    for k, (_, wk) in enumerate(axes):
        shape = [1] * len(axes)
        shape[k] = -1
        wgrid = wgrid * wk.reshape(shape)
    pts = np.stack([g.reshape(-1) for g in grids], axis=1)
    return pts, wgrid.reshape(-1)


def expectation(g, spec, growth=(1.0, 0.0), nodes=256, rtol=1e-6):
    """Integral of g against the expansion density.

    ``g`` is vectorized: for d = 1 it receives a 1-d array of abscissae,
    otherwise an (n, d) array.  ``growth = (a, b)`` bounds |g| by
    a (1 + |x|)^b; the box is +-(10 + b) sigma per axis.  The rule with
    ``nodes`` points per axis is checked against twice as many.
    """
    b = float(growth[1])
    sig = np.sqrt(np.diag(spec.C.matrix))
    half = (10.0 + b) * sig
    results = []
    for n in (nodes, 2 * nodes):
        pts, wts = _gauss_legendre_box(half, n)
        arg = pts[:, 0] if spec.d == 1 else pts
        vals = np.asarray(g(arg), dtype=float).reshape(-1)
        results.append(float(np.sum(wts * vals * density_values(arg, spec))))
    lo, hi = results
    if abs(hi - lo) > rtol * max(1.0, abs(hi)):
        raise QuadratureError(f"quadrature did not converge: {lo!r} vs {hi!r}")
    return hi


def char_fn_tilde(lam, spec):
    """exp(-lambda'C lambda/2) times the reduced symbol."""
    pts, shape = _as_points(lam, spec.d)
    quad = np.einsum("ni,ij,nj->n", pts, spec.C.matrix, pts)
    vals = np.exp(-0.5 * quad) * symbol_p_tilde(pts if spec.d > 1 else pts[:, 0], spec)
    vals = np.asarray(vals).reshape(-1)
    return vals.reshape(shape) if shape else complex(vals[0])


def _lambda_sums(lam, gamma_table, C, p):
    """sum_{I_j} lambda_{I_j} (E Gamma^(j)_{I_j} - C_{I_j} 1{j=2}) for j = 2..p+1."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    d = gamma_table.model.d
    if lam.shape != (d,):
        raise DomainError(f"lambda must have length {d}")
    cm = C.matrix if hasattr(C, "matrix") else np.atleast_2d(C)
    sums = {}
    for j in range(2, p + 2):
        acc = 0.0
        for idx in itertools.product(range(1, d + 1), repeat=j):
            v = gamma_table.value(j, idx)
            if j == 2:
                v -= cm[idx[0] - 1, idx[1] - 1]
            acc += v * np.prod(lam[np.array(idx) - 1])
        sums[j] = acc
    return sums


def principal_symbol(theta, lam, gamma_table, C, p=None):
    """Principal part sum_j i (i theta)^{j-1} sum_{I_j} lambda_{I_j} (E Gamma - C 1{j=2})."""
    p = gamma_table.max_p - 1 if p is None else p
    sums = _lambda_sums(lam, gamma_table, C, p)
    return complex(sum(1j * (1j * theta) ** (j - 1) * s for j, s in sums.items()))


def char_fn_ode_reconstruction(lam, gamma_table, C, steps=64, p=None):
    """exp(-lambda'C lambda/2) exp(int_0^1 P(theta, lambda) d theta), Simpson rule."""
    if steps < 2 or steps % 2:
        raise DomainError("steps must be an even integer >= 2")
    p = gamma_table.max_p - 1 if p is None else p
    sums = _lambda_sums(lam, gamma_table, C, p)
    theta = np.linspace(0.0, 1.0, steps + 1)
    vals = sum(1j * (1j * theta) ** (j - 1) * s for j, s in sums.items())
    integral = simpson(vals, x=theta)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    cm = C.matrix if hasattr(C, "matrix") else np.atleast_2d(C)
    return complex(np.exp(-0.5 * lam @ cm @ lam + integral))
