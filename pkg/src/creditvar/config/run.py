"""creditvar.config.run - validated run configuration for the command line.

RunConfig gathers the options of one creditvar invocation. It is built from a parsed
ConfigParser and every flag is checked before any computation starts.
"""
from dataclasses import dataclass
import logging

import numpy as np

from creditvar.config.parser import ConfigError
from creditvar.engine.loss import DEFAULT_QUAD_ORDER
from creditvar.engine.montecarlo import DEFAULT_SAMPLES, DEFAULT_SEED, McConfig
from creditvar.model.ingest import FORMATS as PORTFOLIO_FORMATS
from creditvar.numerics.quadrature import MAX_ORDER

COMMANDS = ('cdf', 'var', 'greeks', 'mc-check', 'example-portfolio')
OUTPUT_FORMATS = ('csv', 'json')
QUAD_METHODS = ('hermgauss', 'golub-welsch')

DEFAULT_CONFIDENCE = 0.9975
DEFAULT_TOL_BP = 1.0
DEFAULT_GRID = '0:0.30:200'

BASIS_POINT = 1e-4


def define_run_options(config):
    """Define the creditvar run options on a ConfigParser.

    :param config: ConfigParser instance
    """
    config.define('example', default=False, action='store_true',
                  option_help='Use the built-in 125-loan example portfolio')
    config.define('portfolio', default=None, metavar='PATH',
                  option_help='Portfolio file to load')
    config.define('portfolio_format', default=None, metavar='csv|json',
                  option_help='Portfolio file format, inferred from the extension if not given')
    config.define('quad_order', default=DEFAULT_QUAD_ORDER,
                  option_help='Gauss-Hermite quadrature order per factor dimension')
    config.define('quad_method', default='hermgauss', metavar='|'.join(QUAD_METHODS),
                  option_help='Construction of the Gauss-Hermite rule')
    config.define('q', default=DEFAULT_CONFIDENCE, option_help='VaR confidence level')
    config.define('tol_bp', default=DEFAULT_TOL_BP,
                  option_help='VaR solver tolerance in basis points of notional')
    config.define('newton', default=False, action='store_true',
                  option_help='Solve for VaR by safeguarded Newton iteration instead of bisection')
    config.define('grid', default=DEFAULT_GRID, metavar='LO:HI:COUNT',
                  option_help='Loss grid for CDF curves')
    config.define('x', option_type=float, multiple=True, metavar='X1,X2,...',
                  option_help='Comma-separated loss levels to evaluate')
    config.define('mc_samples', default=DEFAULT_SAMPLES, option_help='Monte Carlo sample count')
    config.define('seed', default=DEFAULT_SEED, option_help='Monte Carlo seed')
    config.define('antithetic', default=False, action='store_true',
                  option_help='Use antithetic variates in the Monte Carlo check')
    config.define('threads', option_type=int, option_help='Cap on worker threads')
    config.define('out', default=None, metavar='PATH', option_help='Output file path')
    config.define('output_format', default='csv', metavar='|'.join(OUTPUT_FORMATS),
                  option_help='Output file format')
    config.define('graylog_server', default=None, option_help='Graylog server address and :port')
    config.define('graylog_logging_level', default=logging.INFO,
                  option_help='Graylog logging level')
    config.define('graylog_static_fields', default=None,
                  option_help='Comma separated list of key=value pairs to add to every log '
                              'message metadata')


def parse_grid(spec):
    """Parse a loss grid specification LO:HI:COUNT.

    :param spec: grid specification string
    :return: tuple (lo, hi, count)
    :raises ConfigError: if the specification is malformed or empty
    """
    parts = str(spec).split(':')
    if len(parts) != 3:
        raise ConfigError('Grid {!r} must have the form LO:HI:COUNT'.format(spec))
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError('Grid {!r} has a non-numeric component'.format(spec))
    if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
        raise ConfigError('Grid {!r} needs finite LO < HI'.format(spec))
    if count < 2:
        raise ConfigError('Grid {!r} needs at least 2 points'.format(spec))
    return lo, hi, count


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration of one creditvar run."""

    command: str
    portfolio_path: str = None
    example: bool = False
    portfolio_format: str = None
    quad_order: int = DEFAULT_QUAD_ORDER
    quad_method: str = 'hermgauss'
    confidence: float = DEFAULT_CONFIDENCE
    tol_bp: float = DEFAULT_TOL_BP
    newton: bool = False
    grid: tuple = (0.0, 0.30, 200)
    xs: tuple = ()
    mc_samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    antithetic: bool = False
    threads: int = None
    output_path: str = None
    output_format: str = 'csv'

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError('Unknown command {!r}: expected one of {}'.format(
                self.command, ', '.join(COMMANDS)))
        if self.needs_portfolio and bool(self.example) == bool(self.portfolio_path):
            raise ConfigError(
                'Command {} needs exactly one of --portfolio PATH or --example'.format(
                    self.command))
        if self.portfolio_format is not None and self.portfolio_format not in PORTFOLIO_FORMATS:
            raise ConfigError('Unknown portfolio format {!r}'.format(self.portfolio_format))
        if not 1 <= self.quad_order <= MAX_ORDER:
            raise ConfigError('Quadrature order {} must lie in [1, {}]'.format(
                self.quad_order, MAX_ORDER))
        if self.quad_method not in QUAD_METHODS:
            raise ConfigError('Unknown quadrature method {!r}'.format(self.quad_method))
        if not 0.0 < self.confidence < 1.0:
            raise ConfigError('Confidence level {} must lie in (0, 1)'.format(self.confidence))
        if not self.tol_bp > 0.0:
            raise ConfigError('Solver tolerance {} bp must be positive'.format(self.tol_bp))
        if not all(np.isfinite(self.xs)):
            raise ConfigError('Loss levels must be finite')
        if self.threads is not None and self.threads < 1:
            raise ConfigError('Thread cap {} must be at least 1'.format(self.threads))
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError('Unknown output format {!r}: expected one of {}'.format(
                self.output_format, ', '.join(OUTPUT_FORMATS)))
        try:
            self.mc_config()
        except ValueError as e:
            raise ConfigError(str(e))

    @property
    def needs_portfolio(self):
        """Return True if the command operates on a portfolio."""
        return self.command != 'example-portfolio'

    @property
    def tol_x(self):
        """Return the solver tolerance as a loss fraction."""
        return self.tol_bp * BASIS_POINT

    def grid_points(self):
        """Return the loss grid as an ascending numpy array."""
        lo, hi, count = self.grid
        return np.linspace(lo, hi, count)

    def mc_config(self):
        """Return the Monte Carlo configuration for this run."""
        return McConfig(samples=self.mc_samples, rng_seed=self.seed,
                        antithetic=self.antithetic)

    @classmethod
    def from_parser(cls, config):
        """Build and validate a RunConfig from a parsed ConfigParser.

        :param config: ConfigParser on which parse() has been called
        :raises ConfigError: if any option is invalid
        """
        return cls(
            command=config.command,
            portfolio_path=config.portfolio,
            example=bool(config.example),
            portfolio_format=config.portfolio_format,
            quad_order=config.quad_order,
            quad_method=config.quad_method,
            confidence=config.q,
            tol_bp=config.tol_bp,
            newton=bool(config.newton),
            grid=parse_grid(config.grid),
            xs=tuple(config.x or ()),
            mc_samples=config.mc_samples,
            seed=config.seed,
            antithetic=bool(config.antithetic),
            threads=config.threads,
            output_path=config.out,
            output_format=config.output_format,
        )
