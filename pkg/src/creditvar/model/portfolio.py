"""portfolio.py - loan and portfolio data model for the Gaussian factor model.

A loan is described by its notional, default probability, recovery rate and a vector of
factor loadings. A portfolio is an ordered, immutable collection of loans sharing the same
number of factors; it exposes the derived per-loan quantities (notional fractions, losses given
default, default thresholds) as read-only numpy arrays for the engine.
"""
from dataclasses import dataclass
import math

import numpy as np

from creditvar.numerics.normal import std_normal_inv_cdf

__all__ = ['PortfolioError', 'Loan', 'Portfolio', 'example_portfolio', 'LOADING_GUARD']

# Minimum idiosyncratic variance 1 - sum(w^2) accepted for a loan
LOADING_GUARD = 1e-12


class PortfolioError(Exception):
    """Error raised for invalid loans and portfolios.

    When the error concerns a specific loan, its zero-based index is available as loan_index.
    """

    def __init__(self, message, loan_index=None):
        """Initialise the PortfolioError.

        :param message: description of the violated invariant
        :param loan_index: zero-based index of the offending loan, if known
        """
        if loan_index is not None:
            message = 'loan {}: {}'.format(loan_index, message)
        super(PortfolioError, self).__init__(message)
        self.loan_index = loan_index


def _check_real(name, value):
    """Coerce a loan field to float, rejecting booleans, non-numbers and non-finite values."""
    if isinstance(value, bool):
        raise PortfolioError('{} must be a real number, got {!r}'.format(name, value))
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise PortfolioError('{} must be a real number, got {!r}'.format(name, value))
    if not math.isfinite(value):
        raise PortfolioError('{} must be finite, got {!r}'.format(name, value))
    return value


@dataclass(frozen=True)
class Loan:
    """A single loan of the portfolio.

    Fields are validated on construction: notional > 0, 0 < default_prob < 1,
    0 <= recovery < 1 and sum(loadings^2) < 1 with at least LOADING_GUARD of idiosyncratic
    variance left.
    """

    notional: float
    default_prob: float
    recovery: float
    loadings: tuple

    def __post_init__(self):
        notional = _check_real('notional', self.notional)
        default_prob = _check_real('default probability', self.default_prob)
        recovery = _check_real('recovery', self.recovery)

        try:
            loadings = tuple(_check_real('loading', w) for w in self.loadings)
        except TypeError:
            raise PortfolioError('loadings must be a sequence of reals')

        if notional <= 0.0:
            raise PortfolioError('notional must be positive, got {!r}'.format(notional))
        if not 0.0 < default_prob < 1.0:
            raise PortfolioError(
                'default probability must lie in (0, 1), got {!r}'.format(default_prob))
        if not 0.0 <= recovery < 1.0:
            raise PortfolioError('recovery must lie in [0, 1), got {!r}'.format(recovery))
        if len(loadings) == 0:
            raise PortfolioError('loadings must contain at least one factor')

        loading_sq = math.fsum(w * w for w in loadings)
        if 1.0 - loading_sq < LOADING_GUARD:
            raise PortfolioError(
                'sum of squared loadings must be below 1, got {!r}'.format(loading_sq))

        object.__setattr__(self, 'notional', notional)
        object.__setattr__(self, 'default_prob', default_prob)
        object.__setattr__(self, 'recovery', recovery)
        object.__setattr__(self, 'loadings', loadings)

    @property
    def num_factors(self):
        """Return the number of factor loadings of the loan."""
        return len(self.loadings)

    @property
    def threshold(self):
        """Return the default threshold inverse-normal(default_prob)."""
        return std_normal_inv_cdf(self.default_prob)

    @property
    def idiosyncratic_scale(self):
        """Return sqrt(1 - sum(loadings^2)), the weight of the idiosyncratic shock."""
        return math.sqrt(1.0 - math.fsum(w * w for w in self.loadings))


def _readonly(array):
    array = np.ascontiguousarray(array, dtype=float)
    array.flags.writeable = False
    return array


class Portfolio(object):
    """Immutable ordered collection of loans with a common number of factors.

    Loan order is significant: index i of every derived array refers to the i-th loan. The
    derived arrays are computed once at construction and exposed read-only, so a portfolio
    may be shared between worker threads without copying.
    """

    def __init__(self, loans):
        """Initialise the Portfolio object.

        :param loans: iterable of Loan objects, at least one
        :raises PortfolioError: if the portfolio is empty or factor counts disagree
        """
        loans = tuple(loans)
        if len(loans) == 0:
            raise PortfolioError('portfolio must contain at least one loan')

        for idx, loan in enumerate(loans):
            if not isinstance(loan, Loan):
                raise PortfolioError('expected a Loan, got {!r}'.format(loan), idx)

        num_factors = loans[0].num_factors
        for idx, loan in enumerate(loans):
            if loan.num_factors != num_factors:
                raise PortfolioError(
                    'has {} loadings but the portfolio has {} factors'.format(
                        loan.num_factors, num_factors), idx)

        self._loans = loans
        self._num_factors = num_factors

        self._notionals = _readonly([loan.notional for loan in loans])
        self._default_probs = _readonly([loan.default_prob for loan in loans])
        self._recoveries = _readonly([loan.recovery for loan in loans])
        self._loadings = _readonly([loan.loadings for loan in loans])

        self._total_notional = math.fsum(self._notionals)
        self._fractions = _readonly(self._notionals / self._total_notional)
        self._lgds = _readonly(self._fractions * (1.0 - self._recoveries))
        self._thresholds = _readonly(std_normal_inv_cdf(self._default_probs))
        self._idiosyncratic_scales = _readonly(
            np.sqrt(1.0 - np.sum(self._loadings ** 2, axis=1)))

    @property
    def loans(self):
        """Return the tuple of loans in index order."""
        return self._loans

    @property
    def num_loans(self):
        """Return the number of loans N."""
        return len(self._loans)

    @property
    def num_factors(self):
        """Return the number of common factors m."""
        return self._num_factors

    @property
    def notionals(self):
        return self._notionals

    @property
    def default_probs(self):
        return self._default_probs

    @property
    def recoveries(self):
        return self._recoveries

    @property
    def loadings(self):
        """Return the (N, m) array of factor loadings."""
        return self._loadings

    @property
    def total_notional(self):
        return self._total_notional

    @property
    def fractions(self):
        """Return the array of notional fractions f_i = N_i / sum(N)."""
        return self._fractions

    @property
    def lgds(self):
        """Return the array of losses given default f_i (1 - r_i)."""
        return self._lgds

    @property
    def thresholds(self):
        """Return the array of default thresholds inverse-normal(p_i)."""
        return self._thresholds

    @property
    def idiosyncratic_scales(self):
        """Return the array of sqrt(1 - sum_k w_ik^2)."""
        return self._idiosyncratic_scales

    @property
    def total_lgd(self):
        """Return the maximal portfolio loss, the sum of all losses given default."""
        return math.fsum(self._lgds)

    def _check_index(self, i):
        if isinstance(i, bool) or not isinstance(i, (int, np.integer)) \
                or not 0 <= i < self.num_loans:
            raise IndexError(
                'Loan index {!r} out of range for portfolio of {} loans'.format(
                    i, self.num_loans))

    def fraction(self, i):
        """Return the notional fraction of loan i.

        :param i: zero-based loan index
        :raises IndexError: if i is out of range
        """
        self._check_index(i)
        return float(self._fractions[i])

    def lgd(self, i):
        """Return the loss given default of loan i as a fraction of portfolio notional.

        :param i: zero-based loan index
        :raises IndexError: if i is out of range
        """
        self._check_index(i)
        return float(self._lgds[i])

    def expected_loss(self):
        """Return the unconditional expected portfolio loss sum_i f_i (1 - r_i) p_i."""
        return math.fsum(self._lgds * self._default_probs)

    def scaled(self, factor):
        """Return a copy of the portfolio with every notional multiplied by factor.

        :param factor: positive scale factor
        """
        if not factor > 0.0:
            raise PortfolioError('scale factor must be positive, got {!r}'.format(factor))
        return Portfolio(
            Loan(loan.notional * factor, loan.default_prob, loan.recovery, loan.loadings)
            for loan in self._loans)

    def split_loan(self, i):
        """Return a copy of the portfolio with loan i replaced by two half-notional clones.

        The clones take positions i and i + 1; later loans shift up by one.

        :param i: zero-based index of the loan to split
        """
        self._check_index(i)
        loan = self._loans[i]
        half = Loan(0.5 * loan.notional, loan.default_prob, loan.recovery, loan.loadings)
        return Portfolio(self._loans[:i] + (half, half) + self._loans[i + 1:])

    def __len__(self):
        return self.num_loans

    def __iter__(self):
        return iter(self._loans)

    def __getitem__(self, i):
        return self._loans[i]

    def __eq__(self, other):
        if not isinstance(other, Portfolio):
            return NotImplemented
        return self._loans == other._loans

    def __hash__(self):
        return hash(self._loans)

    def __repr__(self):
        return 'Portfolio(num_loans={}, num_factors={})'.format(
            self.num_loans, self.num_factors)


def example_portfolio(num_loans=125):
    """Build the single-factor benchmark portfolio with linearly ramped parameters.

    With the one-based loan number j = i + 1 and t = (j - 1)/(N - 1), loan j has an equal
    notional, default probability 0.015 + 0.05 t, recovery 0.5 - 0.1 t and loading 0.5 - 0.1 t.

    :param num_loans: number of loans N (125 for the benchmark), at least 2
    :return: a single-factor Portfolio
    """
    if num_loans < 2:
        raise PortfolioError('example portfolio needs at least two loans')

    loans = []
    for j in range(1, num_loans + 1):
        t = (j - 1) / (num_loans - 1)
        loans.append(Loan(
            notional=1.0,
            default_prob=0.015 + 0.05 * t,
            recovery=0.5 - 0.1 * t,
            loadings=(0.5 - 0.1 * t,),
        ))
    return Portfolio(loans)
