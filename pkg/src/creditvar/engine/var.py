"""var.py - Value-at-Risk and economic capital from the approximate loss distribution.

VaR at confidence q is the root of F(x) = q, where F is the approximate loss CDF. The root is
bracketed by [0, maximal loss] and located by bisection; Newton's method with a bisection
safeguard is available as a faster alternative. Economic capital is VaR less expected loss.
"""
from dataclasses import dataclass
import logging
import math

__all__ = [
    'SolverError', 'VarResult', 'DEFAULT_TOL', 'solve_var', 'solve_var_newton',
    'bisection_bound', 'round_to_bp',
]

# One basis point of portfolio notional
DEFAULT_TOL = 1e-4

_MAX_NEWTON_STEPS = 100
_MIN_SLOPE = 1e-300


class SolverError(Exception):
    """Error raised when no VaR root exists in the loss bracket."""

    pass


@dataclass(frozen=True)
class VarResult:
    """Result of a VaR solve.

    var is the loss fraction at which the CDF reaches the confidence level; economic_capital is
    var less the portfolio expected loss. evaluations counts grid sweeps of the CDF, including
    the two bracket end-point checks.
    """

    var: float
    economic_capital: float
    confidence: float
    evaluations: int
    converged: bool
    bracket: tuple = (0.0, 0.0)

    def as_dict(self):
        """Return the result fields reported by the command line."""
        return {
            'var': self.var,
            'economic_capital': self.economic_capital,
            'confidence': self.confidence,
            'evaluations': self.evaluations,
        }


def round_to_bp(value):
    """Round a loss fraction to the nearest basis point."""
    return round(value * 1e4) / 1e4


def bisection_bound(width, tol_x=DEFAULT_TOL):
    """Return the number of bisection steps needed to shrink a bracket to tol_x.

    :param width: initial bracket width
    :param tol_x: target bracket width
    """
    if width <= tol_x:
        return 0
    return int(math.ceil(math.log2(width / tol_x)))


def _check_inputs(q, tol_x):
    if not 0.0 < q < 1.0:
        raise SolverError('Confidence level {!r} must lie in (0, 1)'.format(q))
    if not tol_x > 0.0:
        raise SolverError('Solver tolerance {!r} must be positive'.format(tol_x))


def _bracket(dist, q):
    """Evaluate the CDF at the bracket end points and check the root is enclosed."""
    lo, hi = 0.0, dist.total_lgd
    f_lo, f_hi = dist.cdf(lo), dist.cdf(hi)
    if not f_lo <= q <= f_hi:
        raise SolverError(
            'No VaR root for confidence {}: attainable CDF range on [0, {:.6g}] is '
            '[{:.10g}, {:.10g}]'.format(q, hi, f_lo, f_hi))
    return lo, hi


def _result(dist, lo, hi, q, evaluations, converged):
    var = 0.5 * (lo + hi)
    result = VarResult(
        var=var,
        economic_capital=var - dist.portfolio.expected_loss(),
        confidence=q,
        evaluations=evaluations,
        converged=converged,
        bracket=(lo, hi),
    )
    logging.info('VaR at confidence %s: %.6f (economic capital %.6f, %d evaluations)',
                 q, result.var, result.economic_capital, evaluations)
    return result


def solve_var(dist, q, tol_x=DEFAULT_TOL):
    """Solve F(VaR) = q by bisection on [0, maximal loss].

    The returned var is the midpoint of a final bracket [lo, hi] with F(lo) <= q <= F(hi) and
    hi - lo <= tol_x, so F(var - tol_x) <= q <= F(var + tol_x). Beyond the two end-point checks
    the solve uses bisection_bound(maximal loss, tol_x) CDF evaluations.

    :param dist: a LossDistribution
    :param q: confidence level in (0, 1)
    :param tol_x: bracket width tolerance, one basis point by default
    :return: VarResult
    :raises SolverError: if q lies outside the CDF range attained on the bracket
    """
    _check_inputs(q, tol_x)
    lo, hi = _bracket(dist, q)
    evaluations = 2

    while hi - lo > tol_x:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = dist.cdf(mid)
        evaluations += 1
        if f_mid < q:
            lo = mid
        else:
            hi = mid
        logging.debug('Bisection step %d: bracket [%.8f, %.8f]', evaluations - 2, lo, hi)

    return _result(dist, lo, hi, q, evaluations, hi - lo <= tol_x)


def solve_var_newton(dist, q, tol_x=DEFAULT_TOL, seed=None):
    """Solve F(VaR) = q by safeguarded Newton iteration.

    Each iterate evaluates the CDF and its analytic x-derivative in one grid sweep, counted as
    one evaluation, and tightens the bracket on the side indicated by the sign of F(x) - q. A
    Newton step that leaves the bracket, or a vanishing slope, is replaced by the bracket
    midpoint. Once a step falls below half the tolerance the candidate is certified by
    evaluating the CDF tol_x/2 either side; the result satisfies the same contract as solve_var.

    :param dist: a LossDistribution
    :param q: confidence level in (0, 1)
    :param tol_x: bracket width tolerance
    :param seed: starting point, the bracket midpoint if None or outside the bracket
    :return: VarResult
    :raises SolverError: if q lies outside the CDF range attained on the bracket
    """
    _check_inputs(q, tol_x)
    lo, hi = _bracket(dist, q)
    evaluations = 2

    x = seed if seed is not None and lo < seed < hi else 0.5 * (lo + hi)

    for step in range(_MAX_NEWTON_STEPS):
        if hi - lo <= tol_x:
            return _result(dist, lo, hi, q, evaluations, True)

        f_x, slope = dist.cdf_and_slope(x)
        evaluations += 1
        if f_x < q:
            lo = x
        else:
            hi = x

        if slope > _MIN_SLOPE:
            x_new = x - (f_x - q) / slope
        else:
            x_new = None

        if x_new is None or not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
            logging.debug('Newton step %d fell back to bisection: x = %.8f', step, x_new)
            x = x_new
            continue

        logging.debug('Newton step %d: x = %.10f, bracket [%.8f, %.8f]', step, x_new, lo, hi)

        if abs(x_new - x) <= 0.5 * tol_x:
            # Certify the candidate with a tol_x-wide bracket around it
            left = max(lo, x_new - 0.5 * tol_x)
            right = min(hi, x_new + 0.5 * tol_x)
            f_left = dist.cdf(left)
            f_right = dist.cdf(right)
            evaluations += 2
            if f_left <= q:
                lo = left
            else:
                hi = left
            if f_right >= q:
                hi = min(hi, right)
            else:
                lo = right
            if hi - lo <= tol_x:
                return _result(dist, lo, hi, q, evaluations, True)

        x = x_new if lo < x_new < hi else 0.5 * (lo + hi)

    converged = hi - lo <= tol_x
    if not converged:
        logging.warning('Newton VaR solve stopped after %d steps with bracket width %.3g',
                        _MAX_NEWTON_STEPS, hi - lo)
    return _result(dist, lo, hi, q, evaluations, converged)
