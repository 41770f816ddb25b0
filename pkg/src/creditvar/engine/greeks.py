"""greeks.py - VaR sensitivities by implicit differentiation of F(VaR) = q.

Since the solved VaR satisfies F(VaR; theta) = q, its derivative with respect to any model
parameter theta is -(dF/dtheta)/(dF/dx) at x = VaR, and dVaR/dq = 1/(dF/dx). The numerators
are expanded through the conditional moments: at each node the conditional CDF depends on the
parameters only through E_cond and VAR_cond, so

    dPhi/dtheta = -rho(z)/sigma * dE/dtheta - rho(z) (x - E)/(2 sigma^3) * dV/dtheta

with z = (x - E)/sigma, and dE/dtheta, dV/dtheta follow from the chain rule through the
conditional default probabilities and the notional fractions. Notional derivatives act through
every fraction f_j = N_j / sum(N), so they are invariant to a common rescaling of notionals.

All N (m + 3) + 1 sensitivities come from one sweep over the quadrature nodes. The sweep runs
in parallel over fixed node chunks and the chunk partial sums are reduced in chunk order, so
results are bit-identical for any worker count.
"""
from dataclasses import dataclass
import logging

import numpy as np
import pandas as pd

from creditvar.engine.loss import conditional_default_matrix
from creditvar.numerics.normal import std_normal_pdf
from creditvar.util import chunk_ranges, run_in_executor

__all__ = [
    'GreeksError', 'Parameter', 'CdfGradient', 'GreeksReport',
    'cdf_x_derivative', 'cdf_parameter_gradient', 'cdf_param_derivative', 'greeks',
    'PARAMETER_KINDS', 'MIN_DENOMINATOR',
]

PARAMETER_KINDS = ('notional', 'pd', 'loading', 'recovery')
MIN_DENOMINATOR = 1e-300


class GreeksError(Exception):
    """Error raised for invalid parameter identifiers or a flat CDF at the VaR."""

    pass


@dataclass(frozen=True)
class Parameter:
    """Identifier of a single model parameter: its kind, loan index and factor index."""

    kind: str
    loan: int
    factor: int = None

    def validate(self, portfolio):
        """Check the identifier against a portfolio, raising GreeksError if invalid."""
        if self.kind not in PARAMETER_KINDS:
            raise GreeksError('Unknown parameter kind {!r}: expected one of {}'.format(
                self.kind, ', '.join(PARAMETER_KINDS)))
        if not isinstance(self.loan, (int, np.integer)) or isinstance(self.loan, bool) \
                or not 0 <= self.loan < portfolio.num_loans:
            raise GreeksError('Loan index {!r} out of range for {} loans'.format(
                self.loan, portfolio.num_loans))
        if self.kind == 'loading':
            if not isinstance(self.factor, (int, np.integer)) or isinstance(self.factor, bool) \
                    or not 0 <= self.factor < portfolio.num_factors:
                raise GreeksError('Factor index {!r} out of range for {} factors'.format(
                    self.factor, portfolio.num_factors))
        elif self.factor is not None:
            raise GreeksError('Factor index only applies to loading parameters')


@dataclass(frozen=True)
class CdfGradient:
    """Derivatives of the approximate loss CDF at x with respect to every model parameter."""

    x: float
    d_notional: np.ndarray
    d_pd: np.ndarray
    d_loading: np.ndarray
    d_recovery: np.ndarray

    def get(self, param):
        """Return the derivative for a validated Parameter."""
        if param.kind == 'loading':
            return float(self.d_loading[param.loan, param.factor])
        return float(getattr(self, 'd_' + param.kind)[param.loan])


@dataclass(frozen=True)
class GreeksReport:
    """First-order VaR sensitivities.

    d_var_d_loading has shape (N, m); the per-loan families have shape (N,). denominator is the
    CDF x-derivative at var_used, shared by every sensitivity.
    """

    d_var_d_notional: np.ndarray
    d_var_d_pd: np.ndarray
    d_var_d_loading: np.ndarray
    d_var_d_recovery: np.ndarray
    d_var_d_q: float
    var_used: float
    denominator: float

    def to_frame(self):
        """Return the per-loan sensitivities as a DataFrame, one row per loan."""
        data = {
            'loan_index': np.arange(self.d_var_d_pd.shape[0]),
            'd_notional': self.d_var_d_notional,
            'd_pd': self.d_var_d_pd,
            'd_recovery': self.d_var_d_recovery,
        }
        for k in range(self.d_var_d_loading.shape[1]):
            data['d_w{}'.format(k + 1)] = self.d_var_d_loading[:, k]
        return pd.DataFrame(data)


def cdf_x_derivative(dist, x):
    """Return the x-derivative of the approximate loss CDF at x.

    This is the shared denominator of every VaR sensitivity; see LossDistribution.

    :param dist: a LossDistribution
    :param x: loss level
    """
    return dist.cdf_x_derivative(x)


def _chunk_sums(dist, x, bounds):
    """Accumulate the gradient partial sums over one chunk of quadrature nodes."""
    start, stop = bounds
    portfolio = dist.portfolio
    nodes = dist.grid.nodes[start:stop]
    weights = dist.grid.weights[start:stop]
    means = dist.node_means[start:stop]
    variances = dist.node_variances[start:stop]
    stds = dist.node_stds[start:stop]

    # Degenerate nodes carry a step in x that does not move with the parameters
    smooth = stds > 0.0
    with np.errstate(divide='ignore', invalid='ignore'):
        z = np.where(smooth, (x - means) / stds, 0.0)
        rho_z = std_normal_pdf(z)
        alpha = np.where(smooth, -weights * rho_z / stds, 0.0)
        beta = np.where(smooth, -weights * rho_z * z / (2.0 * variances), 0.0)

    a, p, q = conditional_default_matrix(portfolio, nodes)
    rho_a = std_normal_pdf(a)
    lgds = portfolio.lgds
    q_minus_p = q - p

    kernel = (alpha[:, None] * lgds + beta[:, None] * (lgds * lgds) * q_minus_p) * rho_a

    return (
        np.array([alpha @ means, beta @ variances]),
        alpha @ p,
        beta @ (p * q),
        alpha @ rho_a,
        beta @ (q_minus_p * rho_a),
        kernel.T @ nodes,
        np.sum(kernel * a, axis=0),
    )


def cdf_parameter_gradient(dist, x, threads=None):
    """Return the derivatives of the approximate CDF at x with respect to all parameters.

    :param dist: a LossDistribution
    :param x: loss level
    :param threads: cap on worker threads, defaulting to the distribution's worker count
    :return: CdfGradient
    """
    x = float(x)
    workers = dist.workers if threads is None else max(1, int(threads))
    partials = run_in_executor(
        lambda bounds: _chunk_sums(dist, x, bounds), chunk_ranges(dist.grid.size), workers)

    totals = [np.sum(np.stack([part[idx] for part in partials]), axis=0)
              for idx in range(len(partials[0]))]
    (alpha_e, beta_v), alpha_p, beta_pq, alpha_rho, beta_rho, kernel_phi, kernel_a = totals

    portfolio = dist.portfolio
    lgds = portfolio.lgds
    fractions = portfolio.fractions
    retained = 1.0 - portfolio.recoveries
    scales = portfolio.idiosyncratic_scales

    d_pd = (lgds * alpha_rho + lgds * lgds * beta_rho) / (
        std_normal_pdf(portfolio.thresholds) * scales)
    d_loading = (-kernel_phi / scales[:, None]
                 + portfolio.loadings * (kernel_a / (scales * scales))[:, None])
    d_recovery = -fractions * (alpha_p + 2.0 * lgds * beta_pq)
    d_notional = (retained * alpha_p - alpha_e
                  + 2.0 * lgds * retained * beta_pq - 2.0 * beta_v) / portfolio.total_notional

    logging.debug('Computed CDF parameter gradient at x = %.8f over %d nodes', x, dist.grid.size)

    return CdfGradient(x, d_notional, d_pd, d_loading, d_recovery)


def cdf_param_derivative(dist, x, param):
    """Return the derivative of the approximate CDF at x with respect to one parameter.

    :param dist: a LossDistribution
    :param x: loss level
    :param param: Parameter identifying the model parameter
    :raises GreeksError: if the parameter identifier is invalid
    """
    param.validate(dist.portfolio)
    return cdf_parameter_gradient(dist, x).get(param)


def greeks(dist, var_result, threads=None):
    """Return the VaR sensitivities at a solved VaR.

    :param dist: the LossDistribution the VaR was solved on
    :param var_result: VarResult from solve_var or solve_var_newton
    :param threads: cap on worker threads
    :return: GreeksReport
    :raises GreeksError: if the CDF is flat at the VaR or a sensitivity is not finite
    """
    var = float(var_result.var)
    denominator = cdf_x_derivative(dist, var)
    if not denominator > MIN_DENOMINATOR:
        raise GreeksError(
            'Loss CDF is flat at VaR {:.6g} (derivative {:.3g}); sensitivities undefined'.format(
                var, denominator))

    gradient = cdf_parameter_gradient(dist, var, threads)
    report = GreeksReport(
        d_var_d_notional=-gradient.d_notional / denominator,
        d_var_d_pd=-gradient.d_pd / denominator,
        d_var_d_loading=-gradient.d_loading / denominator,
        d_var_d_recovery=-gradient.d_recovery / denominator,
        d_var_d_q=1.0 / denominator,
        var_used=var,
        denominator=denominator,
    )

    for name in ('d_var_d_notional', 'd_var_d_pd', 'd_var_d_loading', 'd_var_d_recovery'):
        if not np.all(np.isfinite(getattr(report, name))):
            raise GreeksError('Non-finite VaR sensitivity in {}'.format(name))

    logging.info('Computed %d VaR sensitivities at VaR %.6f',
                 dist.portfolio.num_loans * (dist.portfolio.num_factors + 3) + 1, var)
    return report
