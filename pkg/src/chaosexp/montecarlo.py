"""Monte Carlo ground truth for the quadratic-variation statistic.

The increment vector is exactly Gaussian, so replicates are drawn as L z
with L the Cholesky factor of the increment covariance.  The normals of
replicate r come from a Philox stream keyed by the master seed with the
counter starting at r * (words per replicate); every replicate can therefore
be regenerated on its own, and results do not depend on how replicates are
split across threads.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri, ndtr
from scipy.stats import kstat

from .cumulants import statistic_normalizer
from .errors import DomainError, FactorizationError
from .expansion import cdf as expansion_cdf
from .wave import covariance_matrix

THREADS_ENV = "CHAOSEXP_THREADS"
BLOCK = 8192
_MASK64 = (1 << 64) - 1


def default_threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


class SamplerState:
    """Cholesky factor of the increment covariance plus the stream key."""

    def __init__(self, model, seed):
        if not 0 <= int(seed) <= _MASK64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        self.model = model
        self.seed = int(seed)
        self.counter = 0
        sigma = covariance_matrix(model).matrix
        self.sigma = sigma
        self.variances = statistic_normalizer(model)
        try:
            chol = np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError:
            jitter = 1e-12 * np.trace(sigma) / sigma.shape[0]
            try:
                chol = np.linalg.cholesky(sigma + jitter * np.eye(sigma.shape[0]))
            except np.linalg.LinAlgError:
                raise FactorizationError("increment covariance could not be factorized") from None
        self.cholesky = chol
        self.dim = sigma.shape[0]
        # four 64-bit words per Philox counter step
        self.steps = -(-self.dim // 4)

    def normals(self, start, count):
        """Standard normals for replicates start..start+count-1, shape (count, dim)."""
        bitgen = np.random.Philox(key=self.seed, counter=start * self.steps)
        words = bitgen.random_raw(count * self.steps * 4).reshape(count, -1)[:, :self.dim]
        u = ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
        return ndtri(u)

    def increments(self, start, count):
        return self.normals(start, count) @ self.cholesky.T


def sample_increments(state, index=None):
    """Increment vector of one replicate; advances the state's counter if no index."""
    if index is None:
        index = state.counter
        state.counter += 1
    return state.increments(index, 1)[0]


def statistic_F(increments, model, variances=None):
    """F_a = (2N)^{-1/2} sum_j (w_{a,j}^2 / E w_{a,j}^2 - 1), for each time a.

    Accepts one increment vector or an (M, d N) array of them.
    """
    w = np.asarray(increments, dtype=float)
    var = statistic_normalizer(model) if variances is None else variances
    N, d = model.N, model.d
    z = (w * w / var - 1.0).reshape(w.shape[:-1] + (d, N))
    return z.sum(axis=-1) / np.sqrt(2.0 * N)


def simulate_statistic(model, M, seed, threads=None, state=None):
    """(M, d) array of independent replicates of F."""
    state = state or SamplerState(model, seed)
    out = np.empty((M, model.d))
    starts = list(range(0, M, BLOCK))

    def work(start):
        count = min(BLOCK, M - start)
        out[start:start + count] = statistic_F(state.increments(start, count), model, state.variances)

    threads = threads or default_threads()
    if threads == 1:
        for s in starts:
            work(s)
    else:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(work, starts))
    return out


def write_samples(path, samples):
    """Write replicates as little-endian float64, one record of d values each."""
    np.asarray(samples, dtype="<f8").tofile(path)


def read_samples(path, d):
    return np.fromfile(path, dtype="<f8").reshape(-1, d)


@dataclass
class McReport:
    estimates: dict
    M: int
    seed: int
    model: object
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "times": [float(t) for t in self.model.times],
            "N": self.model.N,
            "M": self.M,
            "seed": self.seed,
            "estimates": {k: {"value": v, "se": s} for k, (v, s) in self.estimates.items()},
        }


def _mean_se(values):
    v = np.asarray(values, dtype=float)
    return float(v.mean()), float(v.std(ddof=1) / np.sqrt(v.size))


def _kstat_se(x, n, batches=100):
    """k-statistic with a batch-means standard error."""
    value = float(kstat(x, n))
    parts = np.array_split(x, batches)
    per = np.array([kstat(b, n) for b in parts])
    return value, float(per.std(ddof=1) / np.sqrt(batches))


def mc_expectation(g, model, M, seed, samples=None, threads=None):
    """Sample mean of g(F) with its standard error, plus k-statistics of F.

    ``g`` receives a 1-d array for one time and an (M, d) array otherwise.
    """
    if M < 1000 and samples is None:
        raise DomainError("at least 1000 replicates are required")
    f = simulate_statistic(model, M, seed, threads) if samples is None else np.asarray(samples)
    arg = f[:, 0] if model.d == 1 else f
    est = {"mean": _mean_se(np.broadcast_to(np.asarray(g(arg), dtype=float), (f.shape[0],)))}
    for a in range(model.d):
        suffix = "" if model.d == 1 else f"_{a + 1}"
        for n in (2, 3, 4):
            est[f"k{n}{suffix}"] = _kstat_se(f[:, a], n)
    if model.d == 2:
        est["cross_12"] = _mean_se(f[:, 0] * f[:, 1])
    return McReport(est, f.shape[0], seed, model)


@dataclass
class Comparison:
    grid: np.ndarray
    ecdf: np.ndarray
    gauss_cdf: np.ndarray
    exp_cdf: np.ndarray
    D_gauss: float
    D_exp: float
    ci_gauss: tuple
    ci_exp: tuple
    M: int

    @property
    def ratio(self):
        return self.D_exp / self.D_gauss if self.D_gauss > 0 else float("inf")

    @property
    def inconclusive(self):
        return not (self.ci_exp[1] < self.ci_gauss[0] or self.ci_gauss[1] < self.ci_exp[0])

    def summary(self):
        return {"D_gauss": self.D_gauss, "D_exp": self.D_exp, "ratio": self.ratio,
                "ci_gauss": list(self.ci_gauss), "ci_exp": list(self.ci_exp),
                "inconclusive": self.inconclusive, "M": self.M}


def empirical_vs_expansion(model, spec, M, seed, grid=None, n_boot=200, samples=None,
                           threads=None):
    """Empirical CDF of F against the Gaussian and expansion CDFs on a grid.

    Sup-distances are taken over the grid.  Percentile 95% intervals come from
    ``n_boot`` multinomial resamples of the grid-cell counts, which is the
    ordinary bootstrap of the grid-evaluated ECDF.
    """
    if model.d != 1:
        raise DomainError("CDF comparison is implemented for one observation time")
    grid = np.linspace(-5.0, 5.0, 1001) if grid is None else np.asarray(grid, dtype=float)
    f = simulate_statistic(model, M, seed, threads)[:, 0] if samples is None else np.ravel(samples)
    f = np.sort(f)
    m = f.size
    cum = np.searchsorted(f, grid, side="right")
    ecdf = cum / m
    gauss = ndtr(grid / np.sqrt(spec.C.matrix[0, 0]))
    expc = np.asarray(expansion_cdf(grid, spec))
    d_gauss = float(np.max(np.abs(ecdf - gauss)))
    d_exp = float(np.max(np.abs(ecdf - expc)))
    counts = np.diff(np.concatenate(([0], cum, [m])))
    # same key as the sampler, counter in a range the sampler never reaches
    rng = np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, 0, 1]))
    boot = rng.multinomial(m, counts / m, size=n_boot)
    becdf = np.cumsum(boot[:, :-1], axis=1) / m
    bg = np.max(np.abs(becdf - gauss), axis=1)
    be = np.max(np.abs(becdf - expc), axis=1)
    return Comparison(grid, ecdf, gauss, expc, d_gauss, d_exp, _interval(bg), _interval(be), m)


def _interval(values):
    return float(np.quantile(values, 0.025)), float(np.quantile(values, 0.975))
