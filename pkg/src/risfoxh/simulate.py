"""Seedable Monte Carlo oracle for the outage probability.

Samples are generated in fixed blocks of 2^16.  Block b of grid point g draws
from Philox keyed by SeedSequence(seed, spawn_key=(g, b)), so the estimate
depends only on (seed, g, n_samples) and never on how many workers ran.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np
from scipy.stats import norm

from .errors import ConfigurationError, InsufficientPrecisionError, RareEventError
from .fading import RisLinkSpec, sample
from .phase_noise import PhaseNoiseModel, sample_phase

BLOCK = 1 << 16
MIN_SAMPLES = 1000
MIN_HITS = 50
Z95 = float(norm.ppf(0.975))


def wilson(hits, n, z=Z95):
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("n must be positive")
    p = hits / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    lo = 0.0 if hits == 0 else max(0.0, centre - half)  # exact endpoints, not rounding residue
    hi = 1.0 if hits == n else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    ci_low: float
    ci_high: float
    n_samples: int
    seed: int
    hits: int

    @classmethod
    def from_counts(cls, hits, n, seed):
        lo, hi = wilson(hits, n)
        p = hits / n
        return cls(p, min(lo, p), max(hi, p), n, seed, hits)

    def interval(self, z):
        """Wilson interval at another width, e.g. z = 3 for a 3-sigma check."""
        return wilson(self.hits, self.n_samples, z)

    def contains(self, value, z=3.0):
        lo, hi = self.interval(z)
        return lo <= value <= hi


def _rng(seed, grid_index, block):
    ss = np.random.SeedSequence(seed, spawn_key=(grid_index, block))
    return np.random.Generator(np.random.Philox(ss))


def _block_stat(link, noise, n, seed, grid_index, block):
    """|sum_i |h_i||g_i| e^{j theta_i}|^2 for one block of n draws."""
    rng = _rng(seed, grid_index, block)
    re = np.zeros(n)
    im = np.zeros(n)
    for h, g in link.elements:
        a = sample(h, rng, n) * sample(g, rng, n)
        if noise is None or noise.kind == "none" or len(link.elements) == 1:
            # a single term's magnitude does not see its phase
            re += a
        else:
            th = sample_phase(noise, rng, n)
            re += a * np.cos(th)
            im += a * np.sin(th)
    return re * re + im * im


def _blocks(n_samples):
    full, rest = divmod(n_samples, BLOCK)
    return [BLOCK] * full + ([rest] if rest else [])


def snr_statistic(link, noise=None, n_samples=BLOCK, seed=0, grid_index=0, threads=1):
    """Raw draws of the normalised SNR gamma / rho, in block order."""
    sizes = _blocks(n_samples)
    job = lambda b: _block_stat(link, noise, sizes[b], seed, grid_index, b)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(job, range(len(sizes))))
    else:
        parts = [job(b) for b in range(len(sizes))]
    return np.concatenate(parts)


def simulate_outage(link, noise=None, n_samples=10 ** 6, seed=0, grid_index=0, threads=1, min_hits=MIN_HITS):
    """Empirical P(gamma < gamma_th) with a 95% Wilson interval.

    Without noise the SNR is rho (sum |h_i||g_i|)^2; with a PhaseNoiseModel each
    term carries exp(j theta_i).  Fewer than ``min_hits`` outage events raise
    RareEventError (set min_hits=0 to accept the estimate anyway).
    """
    if not isinstance(link, RisLinkSpec):
        raise ConfigurationError("link must be a RisLinkSpec")
    if noise is not None and not isinstance(noise, PhaseNoiseModel):
        raise ConfigurationError("noise must be a PhaseNoiseModel or None")
    if n_samples < MIN_SAMPLES:
        raise ConfigurationError(f"n_samples must be >= {MIN_SAMPLES}")
    thr = link.rho_t
    sizes = _blocks(n_samples)

    def job(b):
        return int(np.count_nonzero(_block_stat(link, noise, sizes[b], seed, grid_index, b) < thr))

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            hits = sum(ex.map(job, range(len(sizes))))
    else:
        hits = sum(job(b) for b in range(len(sizes)))
    if hits < min_hits:
        raise RareEventError(
            f"only {hits} outage events in {n_samples} samples (need {min_hits}); "
            f"raise n_samples to about {int(min_hits * n_samples / max(hits, 1)):d} or lower rho")
    return McEstimate.from_counts(hits, n_samples, seed)


def sweep_outage(link, rho_grid_db, noise=None, n_samples=10 ** 6, seed=0, threads=1, min_hits=MIN_HITS):
    """One estimate per grid point, each from its own substream; returns [(rho_db, McEstimate)]."""
    grid = [float(r) for r in rho_grid_db]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ConfigurationError("rho grid must be sorted ascending")
    out = []
    for g, rdb in enumerate(grid):
        est = simulate_outage(link.with_snr(rho=10 ** (rdb / 10)), noise, n_samples, seed, g, threads, min_hits)
        out.append((rdb, est))
    return out


@dataclass(frozen=True)
class SlopeFit:
    diversity: float  # g in ln P = c + d ln ln rho - g ln rho
    stderr: float
    log_coef: float  # d; zero when no log term was fitted
    log_stderr: float
    n_points: int


def fit_diversity_slope(curve, window_db=(-math.inf, math.inf), with_log_correction=False):
    """Least-squares decay exponent of P in rho over a dB window.

    ``curve`` holds (rho_db, McEstimate) or (rho_db, probability) pairs.  Monte
    Carlo points are weighted by the binomial variance of ln p_hat and the
    standard errors follow from those variances; plain probabilities get equal
    weights and residual-based errors.  With the log correction the model is
    ln P = c + d ln ln rho - g ln rho (needs rho > 1 in the window).
    """
    lo, hi = window_db
    pts = [(r, e) for r, e in curve if lo <= r <= hi]
    mc = pts and isinstance(pts[0][1], McEstimate)
    if len(pts) < 4:
        raise InsufficientPrecisionError(f"{len(pts)} points in the window; need at least 4")
    x = np.array([r for r, _ in pts]) * math.log(10) / 10
    if mc:
        bad = [r for r, e in pts if e.hits == 0 or e.ci_high - e.ci_low >= e.p_hat / 2]
        if bad:
            raise InsufficientPrecisionError(
                f"confidence interval wider than p_hat/2 at rho_db = {bad}; simulate more samples")
        y = np.log([e.p_hat for _, e in pts])
        var = np.array([(1 - e.p_hat) / (e.n_samples * e.p_hat) for _, e in pts])
    else:
        p = np.array([float(e) for _, e in pts])
        if np.any(p <= 0):
            raise InsufficientPrecisionError("non-positive probability in the window")
        y = np.log(p)
        var = np.ones_like(y)
    cols = [np.ones_like(x), -x]
    if with_log_correction:
        if np.any(x <= 0):
            raise ConfigurationError("the ln ln rho term needs rho > 0 dB throughout the window")
        cols.append(np.log(x))
    A = np.column_stack(cols)
    w = 1 / np.sqrt(var)
    coef, *_ = np.linalg.lstsq(A * w[:, None], y * w, rcond=None)
    cov = np.linalg.pinv((A * w[:, None]).T @ (A * w[:, None]))
    if not mc:
        dof = len(y) - A.shape[1]
        resid = y - A @ coef
        cov = cov * (resid @ resid / dof if dof > 0 else 0.0)
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    if with_log_correction:
        return SlopeFit(float(coef[1]), float(se[1]), float(coef[2]), float(se[2]), len(y))
    return SlopeFit(float(coef[1]), float(se[1]), 0.0, 0.0, len(y))


def bounded_phase_draws(link, noise, n_draws, seed, max_batches=1000):
    """Amplitude and phase draws with epsilon_min >= 0 enforced by rejection.

    Returns (h_amps, g_amps, thetas), each of shape (n_draws, N).  Element i
    uses the link's own (h, g) models, so mixed fading is allowed.
    """
    from .phase_noise import epsilon_min

    N = link.n_elements
    rng = _rng(seed, 0, 0)
    h = np.column_stack([sample(m, rng, n_draws) for m, _ in link.elements])
    g = np.column_stack([sample(m, rng, n_draws) for _, m in link.elements])
    if noise is None or noise.kind == "none":
        return h, g, np.zeros((n_draws, N))
    kept, have = [], 0
    for _ in range(max_batches):
        th = sample_phase(noise, rng, (n_draws, N))
        th = th[np.asarray(epsilon_min(th)) >= 0]
        kept.append(th)
        have += len(th)
        if have >= n_draws:
            return h, g, np.concatenate(kept)[:n_draws]
    raise ConfigurationError(f"rejection kept only {have} of {max_batches * n_draws} phase vectors; "
                             "the model rarely satisfies epsilon_min >= 0 at this N")
