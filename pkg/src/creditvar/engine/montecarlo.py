"""montecarlo.py - direct simulation of the Gaussian factor default model.

This module draws the common factors and idiosyncratic shocks of the factor model, applies the
default rule loan by loan and records the realised portfolio losses. It serves as the
validation oracle for the quadrature engine.

Samples are generated in fixed-size blocks. Block b draws from its own Philox stream spawned
from the run seed, so the realised sample set depends only on (portfolio, configuration) and
never on the number of worker threads. Normal variates come from uniform draws through the
inverse normal CDF.
"""
from dataclasses import dataclass, field
import logging
import math

import numpy as np

from creditvar.numerics.normal import std_normal_inv_cdf
from creditvar.util import chunk_ranges, resolve_workers, run_in_executor

__all__ = [
    'McConfig', 'McResult', 'EmpiricalCdf', 'simulate', 'empirical_cdf', 'empirical_quantile',
    'DEFAULT_SAMPLES', 'DEFAULT_SEED',
]

DEFAULT_SAMPLES = 1000000
DEFAULT_SEED = 20240101

# Upper bound on the number of latent draws held per block
_BLOCK_DRAWS = 1 << 21
_UNIFORM_BITS = 53


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo run configuration."""

    samples: int = DEFAULT_SAMPLES
    rng_seed: int = DEFAULT_SEED
    antithetic: bool = False
    block_size: int = 1 << 14

    def __post_init__(self):
        if isinstance(self.samples, bool) or not isinstance(self.samples, (int, np.integer)) \
                or self.samples < 1:
            raise ValueError('Monte Carlo samples must be a positive integer, got {!r}'.format(
                self.samples))
        if not 0 <= int(self.rng_seed) < 2 ** 64:
            raise ValueError('Monte Carlo seed must be a 64-bit unsigned integer')
        if self.block_size < 2:
            raise ValueError('Monte Carlo block size must be at least 2')


@dataclass(frozen=True)
class McResult:
    """Realised portfolio losses of a Monte Carlo run, sorted ascending."""

    losses: np.ndarray
    sample_mean: float
    sample_count: int
    default_counts: np.ndarray = field(repr=False)

    @property
    def default_frequencies(self):
        """Return the empirical default frequency of every loan."""
        return self.default_counts / self.sample_count

    @property
    def mean_std_error(self):
        """Return the standard error of the sample mean loss."""
        if self.sample_count < 2:
            return float('nan')
        return float(np.std(self.losses, ddof=1) / math.sqrt(self.sample_count))


@dataclass(frozen=True)
class EmpiricalCdf:
    """Empirical CDF value with its binomial standard error."""

    value: float
    std_error: float


def _standard_normals(generator, shape):
    """Draw standard normals through the inverse CDF of open-interval uniforms."""
    # (k + 0.5) / 2^53 never hits 0 or 1
    ints = generator.integers(0, 1 << _UNIFORM_BITS, size=shape, dtype=np.int64)
    uniforms = (ints + 0.5) * (2.0 ** -_UNIFORM_BITS)
    return std_normal_inv_cdf(uniforms.ravel(), refine=False).reshape(shape)


def _simulate_block(portfolio, cfg, seed_seq, size):
    """Simulate one block of samples, returning (losses, per-loan default counts)."""
    generator = np.random.Generator(np.random.Philox(seed_seq))
    draws = (size + 1) // 2 if cfg.antithetic else size

    factors = _standard_normals(generator, (draws, portfolio.num_factors))
    shocks = _standard_normals(generator, (draws, portfolio.num_loans))
    if cfg.antithetic:
        factors = np.concatenate([factors, -factors])[:size]
        shocks = np.concatenate([shocks, -shocks])[:size]

    latent = factors @ portfolio.loadings.T + shocks * portfolio.idiosyncratic_scales
    defaults = latent < portfolio.thresholds
    losses = defaults.astype(float) @ portfolio.lgds
    return losses, np.sum(defaults, axis=0)


def simulate(portfolio, cfg=None, threads=None):
    """Simulate the portfolio loss distribution by Monte Carlo.

    Loan i defaults in a sample when sum_k w_ik phi_k + sqrt(1 - sum_k w_ik^2) eps_i falls
    below Phi^-1(p_i); the sample loss is the sum of the defaulted losses given default.

    :param portfolio: a Portfolio
    :param cfg: McConfig, defaults if None
    :param threads: cap on worker threads
    :return: McResult with losses sorted ascending
    """
    cfg = cfg or McConfig()
    workers = resolve_workers(threads)

    # Block rows shrink for wide portfolios so a block's draws stay bounded in memory
    block_size = max(2, min(cfg.block_size, _BLOCK_DRAWS // max(1, portfolio.num_loans)))
    blocks = chunk_ranges(cfg.samples, block_size)
    seeds = np.random.SeedSequence(int(cfg.rng_seed)).spawn(len(blocks))

    logging.debug('Simulating %d samples in %d blocks on %d workers (antithetic=%s)',
                  cfg.samples, len(blocks), workers, cfg.antithetic)

    results = run_in_executor(
        lambda task: _simulate_block(portfolio, cfg, task[0], task[1][1] - task[1][0]),
        list(zip(seeds, blocks)), workers)

    losses = np.concatenate([result[0] for result in results])
    default_counts = np.sum(np.stack([result[1] for result in results]), axis=0)

    losses = np.clip(losses, 0.0, portfolio.total_lgd)
    losses.sort(kind='stable')
    losses.flags.writeable = False

    result = McResult(
        losses=losses,
        sample_mean=float(np.mean(losses)),
        sample_count=int(losses.shape[0]),
        default_counts=default_counts,
    )
    logging.info('Monte Carlo: %d samples, mean loss %.6f', result.sample_count,
                 result.sample_mean)
    return result


def empirical_cdf(result, x):
    """Return the fraction of simulated losses at or below x with its standard error.

    :param result: McResult
    :param x: loss level
    :return: EmpiricalCdf(value, std_error) with std_error = sqrt(v (1 - v) / n)
    """
    count = int(np.searchsorted(result.losses, x, side='right'))
    value = count / result.sample_count
    return EmpiricalCdf(value, math.sqrt(value * (1.0 - value) / result.sample_count))


def empirical_quantile(result, q):
    """Return the smallest simulated loss whose empirical CDF is at least q.

    :param result: McResult
    :param q: confidence level in (0, 1]
    """
    if not 0.0 < q <= 1.0:
        raise ValueError('Quantile level {!r} must lie in (0, 1]'.format(q))
    index = max(0, int(math.ceil(q * result.sample_count)) - 1)
    return float(result.losses[min(index, result.sample_count - 1)])
