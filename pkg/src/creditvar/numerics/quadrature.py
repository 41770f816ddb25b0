"""quadrature.py - Gauss-Hermite rules and tensor grids over the standard normal measure.

The loss distribution integrates smooth functions of the common factors against a product of
standard normal densities. This module builds one-dimensional Gauss-Hermite rules for the
weight exp(-x^2), rescales them to the standard normal measure and forms the tensor product
over the factor dimensions.
"""
import logging
import math

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.linalg import eigh_tridiagonal

__all__ = [
    'QuadratureError', 'QuadratureGrid', 'gauss_hermite_nodes', 'normal_measure_grid',
    'MAX_ORDER', 'MAX_GRID_SIZE',
]

MAX_ORDER = 200
MAX_GRID_SIZE = 10 ** 7

_SQRT_PI = math.sqrt(math.pi)


class QuadratureError(Exception):
    """Simple error class for quadrature rule and grid construction errors."""

    pass


def _golub_welsch(n):
    """Compute Hermite nodes and weights from the symmetric tridiagonal Jacobi matrix."""
    off_diag = np.sqrt(np.arange(1, n) / 2.0)
    nodes, vectors = eigh_tridiagonal(np.zeros(n), off_diag)
    weights = _SQRT_PI * vectors[0, :] ** 2
    return nodes, weights


def gauss_hermite_nodes(n, method='hermgauss'):
    """Return the n-point Gauss-Hermite rule for the weight exp(-x^2).

    Two constructions are available: 'hermgauss' uses numpy's companion-matrix roots polished
    against the scaled Hermite recurrence, 'golub-welsch' diagonalises the Jacobi matrix with
    a zero diagonal and off-diagonal sqrt(k/2). In both cases the rule is symmetrised so that
    nodes come in exact +/- pairs with equal weights.

    :param n: number of nodes, 1 <= n <= 200
    :param method: 'hermgauss' or 'golub-welsch'
    :return: tuple of (nodes, weights) numpy arrays in ascending node order
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_ORDER:
        raise QuadratureError(
            'Gauss-Hermite order {!r} out of range: must be an integer in [1, {}]'.format(
                n, MAX_ORDER))

    if method == 'hermgauss':
        nodes, weights = hermgauss(int(n))
    elif method == 'golub-welsch':
        nodes, weights = _golub_welsch(int(n))
    else:
        raise QuadratureError('Unknown Gauss-Hermite method {!r}'.format(method))

    order = np.argsort(nodes)
    nodes = nodes[order]
    weights = weights[order]

    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])

    return nodes, weights


class QuadratureGrid(object):
    """Tensor-product quadrature grid for expectations under independent standard normals.

    The grid holds a (size, m) array of factor coordinates and a matching array of positive
    weights summing to one, so that ``sum(weights * g(nodes))`` approximates E[g(phi)]. Arrays
    are read-only; a grid may be shared freely between loss distributions and threads.
    """

    def __init__(self, nodes, weights, order_per_dim):
        """Initialise the QuadratureGrid object.

        :param nodes: array of shape (size, m) of factor coordinates
        :param weights: array of shape (size,) of positive weights
        :param order_per_dim: number of one-dimensional nodes per factor dimension
        """
        self.nodes = np.ascontiguousarray(nodes, dtype=float)
        self.weights = np.ascontiguousarray(weights, dtype=float)
        self.order_per_dim = int(order_per_dim)
        self.nodes.flags.writeable = False
        self.weights.flags.writeable = False

    @property
    def size(self):
        """Return the number of grid nodes."""
        return self.weights.shape[0]

    @property
    def num_factors(self):
        """Return the factor dimension m of the grid."""
        return self.nodes.shape[1]

    def expectation(self, func):
        """Return the quadrature approximation of E[func(phi)].

        :param func: callable mapping a (size, m) node array to a (size,) array
        """
        return float(np.dot(self.weights, func(self.nodes)))

    def __len__(self):
        return self.size

    def __repr__(self):
        return 'QuadratureGrid(order_per_dim={}, num_factors={}, size={})'.format(
            self.order_per_dim, self.num_factors, self.size)


def normal_measure_grid(n, m, method='hermgauss'):
    """Build the n^m tensor grid integrating against m independent standard normals.

    Each one-dimensional rule is mapped with phi = sqrt(2) x and w / sqrt(pi) before the
    tensor product is taken.

    :param n: Gauss-Hermite order per dimension
    :param m: number of factor dimensions
    :param method: one-dimensional rule construction passed to gauss_hermite_nodes
    :return: a QuadratureGrid
    """
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 1:
        raise QuadratureError('Factor dimension {!r} must be a positive integer'.format(m))

    x, w = gauss_hermite_nodes(n, method)

    if int(n) ** int(m) > MAX_GRID_SIZE:
        raise QuadratureError(
            'Quadrature grid too large: {}^{} = {} nodes exceeds limit of {}'.format(
                n, m, int(n) ** int(m), MAX_GRID_SIZE))

    phi = math.sqrt(2.0) * x
    w = w / _SQRT_PI

    axes = np.meshgrid(*([phi] * m), indexing='ij')
    nodes = np.stack([axis.ravel() for axis in axes], axis=1)

    weight_axes = np.meshgrid(*([w] * m), indexing='ij')
    weights = np.prod(np.stack([axis.ravel() for axis in weight_axes], axis=1), axis=1)

    logging.debug('Built normal-measure grid: order %d, dimension %d, %d nodes',
                  n, m, weights.shape[0])

    return QuadratureGrid(nodes, weights, n)
