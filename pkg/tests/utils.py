"""
Utility functions to support testing creditvar.
"""
import itertools
import logging

import numpy as np

from creditvar.model.portfolio import Loan, Portfolio


def log_message_seen(caplog, level, message, when="call"):

    for record in caplog.get_records(when):
        if record.levelno == level and message in record.getMessage():
            return True

    return False


def make_portfolio(rows):
    """Build a portfolio from (notional, pd, recovery, loadings) tuples."""
    return Portfolio(Loan(notional, pd_, recovery, tuple(loadings))
                     for notional, pd_, recovery, loadings in rows)


def independent_portfolio(num_loans, seed=7):
    """Build a portfolio of independent (zero-loading) loans with varied parameters."""
    rng = np.random.default_rng(seed)
    return make_portfolio(
        (float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.05, 0.4)),
         float(rng.uniform(0.0, 0.6)), (0.0,))
        for _ in range(num_loans))


def two_factor_portfolio(num_loans=20, seed=11):
    """Build a small two-factor portfolio with varied parameters."""
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(num_loans):
        rows.append((float(rng.uniform(0.5, 3.0)), float(rng.uniform(0.01, 0.08)),
                     float(rng.uniform(0.2, 0.6)),
                     (float(rng.uniform(0.2, 0.5)), float(rng.uniform(-0.3, 0.3)))))
    return make_portfolio(rows)


def exact_independent_cdf(portfolio, x):
    """Return P(L <= x) for independent loans by enumerating all 2^N default patterns."""
    probs = portfolio.default_probs
    lgds = portfolio.lgds
    total = 0.0
    for pattern in itertools.product((0, 1), repeat=portfolio.num_loans):
        defaults = np.array(pattern, dtype=bool)
        if np.dot(defaults, lgds) <= x:
            total += float(np.prod(np.where(defaults, probs, 1.0 - probs)))
    logging.debug("Enumerated %d default patterns", 2 ** portfolio.num_loans)
    return total
