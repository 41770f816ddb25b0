"""creditvar main functions.

This module implements the command-line entry point for creditvar. It parses configuration
options, loads the portfolio, dispatches the requested command to the engine and writes the
machine-readable result file atomically, printing a human-readable summary on stdout.
"""
import io
import logging
import sys

import numpy as np
import pandas as pd
from tornado.escape import json_encode

from creditvar.config.parser import ConfigParser, ConfigError
from creditvar.config.run import COMMANDS, RunConfig, define_run_options
from creditvar.engine.greeks import GreeksError, greeks
from creditvar.engine.loss import build_loss_distribution
from creditvar.engine.montecarlo import empirical_cdf, empirical_quantile, simulate
from creditvar.engine.var import SolverError, round_to_bp, solve_var, solve_var_newton
from creditvar.logconfig import add_graylog_handler
from creditvar.model.ingest import dump_portfolio, load_portfolio_file
from creditvar.model.portfolio import PortfolioError, example_portfolio
from creditvar.numerics.quadrature import QuadratureError
from creditvar.util import atomic_write

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_SOLVER = 4
EXIT_IO = 5


def format_percent(value):
    """Format a loss fraction as a percentage rounded to the nearest basis point."""
    return '{:.2f}%'.format(round_to_bp(value) * 100.0)


def _frame_to_text(frame, output_format):
    """Serialise a DataFrame as CSV or as a JSON object of columns."""
    if output_format == 'json':
        return json_encode({name: frame[name].tolist() for name in frame.columns}) + '\n'
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False)
    return buffer.getvalue()


class CommandRunner(object):
    """Runs one creditvar command from a validated RunConfig.

    Each command method returns a tuple of (summary lines, output text); the output text is
    written to the configured output path, if any.
    """

    def __init__(self, config, stdout=None):
        """Initialise the CommandRunner object.

        :param config: RunConfig for this run
        :param stdout: stream for the human-readable summary, sys.stdout if None
        """
        self.config = config
        self.stdout = stdout or sys.stdout
        self._portfolio = None
        self._dist = None

    @property
    def portfolio(self):
        """Return the run portfolio, loading it on first use."""
        if self._portfolio is None:
            if self.config.example:
                self._portfolio = example_portfolio()
            else:
                self._portfolio = load_portfolio_file(
                    self.config.portfolio_path, self.config.portfolio_format)
            logging.info('Loaded portfolio: %d loans, %d factors',
                         self._portfolio.num_loans, self._portfolio.num_factors)
        return self._portfolio

    @property
    def dist(self):
        """Return the loss distribution of the run portfolio, building it on first use."""
        if self._dist is None:
            self._dist = build_loss_distribution(
                self.portfolio, self.config.quad_order, self.config.threads,
                self.config.quad_method)
        return self._dist

    def solve(self):
        """Solve for the VaR at the configured confidence level."""
        solver = solve_var_newton if self.config.newton else solve_var
        return solver(self.dist, self.config.confidence, self.config.tol_x)

    def run(self):
        """Run the configured command, print its summary and write its output.

        :return: process exit status
        """
        handler = getattr(self, 'cmd_' + self.config.command.replace('-', '_'))
        summary, output = handler()

        if self.config.output_path is not None:
            atomic_write(self.config.output_path, output)
            summary.append('Output written to {}'.format(self.config.output_path))
        elif self.config.command == 'example-portfolio':
            summary = [output.rstrip('\n')]

        for line in summary:
            print(line, file=self.stdout)
        return EXIT_OK

    def cmd_cdf(self):
        """Evaluate the loss CDF on the loss grid, or at the requested loss levels."""
        if self.config.xs:
            xs = np.asarray(self.config.xs, dtype=float)
            values = self.dist.cdf(xs)
        else:
            xs = self.config.grid_points()
            values = self.dist.curve(xs)

        frame = pd.DataFrame({'x': xs, 'cdf': values})
        summary = ['Loss CDF at {} points over [{:.6g}, {:.6g}]'.format(
            len(xs), float(np.min(xs)), float(np.max(xs)))]
        if self.config.xs:
            summary.extend('  F({:.6g}) = {:.8f}'.format(x, f) for x, f in zip(xs, values))
        else:
            summary.append('  F({:.6g}) = {:.8f}, F({:.6g}) = {:.8f}'.format(
                xs[0], values[0], xs[-1], values[-1]))
        return summary, _frame_to_text(frame, self.config.output_format)

    def cmd_var(self):
        """Solve for the VaR and economic capital."""
        result = self.solve()
        summary = [
            'VaR: {}'.format(format_percent(result.var)),
            'Economic capital: {}'.format(format_percent(result.economic_capital)),
            'Expected loss: {}'.format(format_percent(self.portfolio.expected_loss())),
            'Confidence: {}'.format(result.confidence),
            'CDF evaluations: {}'.format(result.evaluations),
        ]
        return summary, json_encode(result.as_dict()) + '\n'

    def cmd_greeks(self):
        """Solve for the VaR and compute every first-order VaR sensitivity."""
        result = self.solve()
        report = greeks(self.dist, result, self.config.threads)

        buffer = io.StringIO()
        report.to_frame().to_csv(buffer, index=False)
        buffer.write('d_q,{!r}\n'.format(float(report.d_var_d_q)))

        top = int(np.argmax(np.abs(report.d_var_d_pd)))
        summary = [
            'VaR: {}'.format(format_percent(result.var)),
            'dVaR/dq: {:.6g}'.format(report.d_var_d_q),
            'Largest dVaR/dpd: loan {} ({:.6g})'.format(top, report.d_var_d_pd[top]),
            'Sum of N_i dVaR/dN_i: {:.3g}'.format(
                float(np.dot(self.portfolio.notionals, report.d_var_d_notional))),
        ]
        return summary, buffer.getvalue()

    def cmd_mc_check(self):
        """Compare the approximate CDF with a Monte Carlo empirical CDF."""
        var_result = None
        if self.config.xs:
            xs = list(self.config.xs)
        else:
            var_result = self.solve()
            xs = [var_result.var]

        mc_result = simulate(self.portfolio, self.config.mc_config(), self.config.threads)

        summary = ['Monte Carlo check with {} samples (seed {}{})'.format(
            mc_result.sample_count, self.config.seed,
            ', antithetic' if self.config.antithetic else '')]
        for x in xs:
            empirical = empirical_cdf(mc_result, x)
            summary.append('  x = {:.6g}: analytic CDF {:.6f}, empirical CDF {:.6f} '
                           '(s.e. {:.2g})'.format(x, self.dist.cdf(x), empirical.value,
                                                  empirical.std_error))
        if var_result is not None:
            summary.append('Analytic VaR at {}: {}'.format(
                self.config.confidence, format_percent(var_result.var)))
        summary.append('Monte Carlo VaR at {}: {}'.format(
            self.config.confidence,
            format_percent(empirical_quantile(mc_result, self.config.confidence))))

        grid = self.config.grid_points()
        empirical = [empirical_cdf(mc_result, x) for x in grid]
        frame = pd.DataFrame({
            'x': grid,
            'analytic_cdf': self.dist.curve(grid),
            'empirical_cdf': [point.value for point in empirical],
            'std_error': [point.std_error for point in empirical],
        })
        deviation = float(np.max(np.abs(frame['analytic_cdf'] - frame['empirical_cdf'])))
        summary.append('Maximum CDF deviation on the loss grid: {:.6f}'.format(deviation))
        return summary, _frame_to_text(frame, self.config.output_format)

    def cmd_example_portfolio(self):
        """Emit the built-in example portfolio as a portfolio file."""
        portfolio = example_portfolio()
        summary = ['Example portfolio: {} loans, {} factor(s)'.format(
            portfolio.num_loans, portfolio.num_factors)]
        return summary, dump_portfolio(portfolio, self.config.output_format)


def main(argv=None):
    """Run creditvar.

    This function is the main entry point for the creditvar command line. It parses options
    from the command line and any configuration file, runs the requested command and maps
    failures to exit codes: 2 usage, 3 portfolio validation, 4 solver, 5 I/O.

    :param argv: argument list to parse if called programatically, sys.argv[1:] if None
    :return: process exit status
    """
    config = ConfigParser(commands=COMMANDS)
    define_run_options(config)

    try:
        config.parse(argv)
        run_config = RunConfig.from_parser(config)
    except ConfigError as e:
        logging.error('Failed to parse configuration: %s', e)
        return EXIT_USAGE

    if config.graylog_server is not None:
        add_graylog_handler(
            config.graylog_server,
            config.graylog_logging_level,
            config.graylog_static_fields
        )

    try:
        return CommandRunner(run_config).run()
    except (ConfigError, QuadratureError) as e:
        logging.error('Invalid run configuration: %s', e)
        return EXIT_USAGE
    except PortfolioError as e:
        logging.error('Invalid portfolio: %s', e)
        return EXIT_VALIDATION
    except (SolverError, GreeksError) as e:
        logging.error('Solver failure: %s', e)
        return EXIT_SOLVER
    except OSError as e:
        logging.error('I/O failure: %s', e)
        return EXIT_IO


if __name__ == '__main__':  # pragma: no cover
    sys.exit(main())
