"""normal.py - standard normal density, distribution and quantile functions.

This module implements the standard normal building blocks used throughout the engine: the
density, the cumulative distribution function and its inverse. All functions accept either
scalars or numpy arrays and return a value of the same shape; scalar inputs give python floats.

The distribution function is evaluated through the complementary error function so that deep
lower-tail values keep full relative precision. The quantile function uses the AS241 (PPND16)
rational approximation, polished by a single Newton step taken in the lower tail.
"""
import numpy as np
from scipy.special import erfc

__all__ = ['NormalDomainError', 'std_normal_pdf', 'std_normal_cdf', 'std_normal_inv_cdf']

_INV_SQRT_2PI = 0.3989422804014327
_INV_SQRT_2 = 0.7071067811865476

# AS241 coefficients, highest order first for np.polyval
_CENTRAL_NUM = (
    2.5090809287301226727e+3, 3.3430575583588128105e+4, 6.7265770927008700853e+4,
    4.5921953931549871457e+4, 1.3731693765509461125e+4, 1.9715909503065514427e+3,
    1.3314166789178437745e+2, 3.3871328727963666080e+0,
)
_CENTRAL_DEN = (
    5.2264952788528545610e+3, 2.8729085735721942674e+4, 3.9307895800092710610e+4,
    2.1213794301586595867e+4, 5.3941960214247511077e+3, 6.8718700749205790830e+2,
    4.2313330701600911252e+1, 1.0,
)
_NEAR_NUM = (
    7.74545014278341407640e-4, 2.27238449892691845833e-2, 2.41780725177450611770e-1,
    1.27045825245236838258e+0, 3.64784832476320460504e+0, 5.76949722146069140550e+0,
    4.63033784615654529590e+0, 1.42343711074968357734e+0,
)
_NEAR_DEN = (
    1.05075007164441684324e-9, 5.47593808499534494600e-4, 1.51986665636164571966e-2,
    1.48103976427480074590e-1, 6.89767334985100004550e-1, 1.67638483018380384940e+0,
    2.05319162663775882187e+0, 1.0,
)
_FAR_NUM = (
    2.01033439929228813265e-7, 2.71155556874348757815e-5, 1.24266094738807843860e-3,
    2.65321895265761230930e-2, 2.96560571828504891230e-1, 1.78482653991729133580e+0,
    5.46378491116411436990e+0, 6.65790464350110377720e+0,
)
_FAR_DEN = (
    2.04426310338993978564e-15, 1.42151175831644588870e-7, 1.84631831751005468180e-5,
    7.86869131145613259100e-4, 1.48753612908506148525e-2, 1.36929880922735805310e-1,
    5.99832206555887937690e-1, 1.0,
)


class NormalDomainError(ValueError):
    """Error raised when a quantile is requested outside the open unit interval."""

    pass


def _result(value, scalar):
    """Return a python float for scalar input, otherwise the array itself."""
    return float(value) if scalar else value


def std_normal_pdf(x):
    """Return the standard normal density at x.

    :param x: finite real or array of reals
    :return: density value(s), never raising on underflow
    """
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    return _result(_INV_SQRT_2PI * np.exp(-0.5 * x * x), scalar)


def std_normal_cdf(x):
    """Return the standard normal distribution function at x.

    The value is computed as erfc(-x/sqrt(2))/2, which is free of cancellation in the lower
    tail; the upper tail is obtained from the same expression since erfc of a negative
    argument is evaluated as 2 - erfc(|.|) to absolute precision. Infinite arguments map
    to 0 and 1.

    :param x: real or array of reals
    :return: probability value(s) in [0, 1]
    """
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    return _result(0.5 * erfc(-x * _INV_SQRT_2), scalar)


def _ppnd16(p):
    """Evaluate the AS241 rational approximation on an array of probabilities in (0, 1)."""
    q = p - 0.5
    x = np.empty_like(p)

    central = np.abs(q) <= 0.425
    if central.any():
        qc = q[central]
        r = 0.180625 - qc * qc
        x[central] = qc * np.polyval(_CENTRAL_NUM, r) / np.polyval(_CENTRAL_DEN, r)

    tail = ~central
    if tail.any():
        r = np.sqrt(-np.log(np.minimum(p[tail], 1.0 - p[tail])))
        near = r <= 5.0
        xt = np.empty_like(r)
        rn = r[near] - 1.6
        xt[near] = np.polyval(_NEAR_NUM, rn) / np.polyval(_NEAR_DEN, rn)
        rf = r[~near] - 5.0
        xt[~near] = np.polyval(_FAR_NUM, rf) / np.polyval(_FAR_DEN, rf)
        x[tail] = np.where(q[tail] < 0.0, -xt, xt)

    return x


def std_normal_inv_cdf(p, refine=True):
    """Return the standard normal quantile at probability p.

    :param p: probability or array of probabilities, each strictly inside (0, 1)
    :param refine: apply one Newton step against std_normal_cdf (default True)
    :return: quantile value(s)
    :raises NormalDomainError: if any p lies outside the open unit interval
    """
    scalar = np.ndim(p) == 0
    p = np.atleast_1d(np.asarray(p, dtype=float))

    if not np.all((p > 0.0) & (p < 1.0)):
        bad = p[~((p > 0.0) & (p < 1.0))][0]
        raise NormalDomainError(
            'Normal quantile undefined for probability {!r}: must lie in (0, 1)'.format(bad))

    x = _ppnd16(p)

    if refine:
        # Polish in the lower tail, where the cdf carries full relative precision
        lower = np.minimum(p, 1.0 - p)
        xl = -np.abs(x)
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            step = (std_normal_cdf(xl) - lower) / std_normal_pdf(xl)
        xl = np.where(np.isfinite(step), xl - step, xl)
        x = np.where(p < 0.5, xl, -xl)

    return _result(x[0], True) if scalar else x
