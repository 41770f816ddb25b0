"""ingest.py - portfolio file reading and writing.

Portfolios are exchanged as CSV, with a header ``notional,pd,recovery,w1,...,wm`` and one loan
per row, or as JSON, an object whose ``loans`` member is an array of
``{notional, pd, recovery, loadings: [...]}`` objects. Row order is loan order. Reading and
writing are exact inverses: floats are written at round-trip precision.
"""
import io
import os

import pandas as pd
from tornado.escape import json_decode, json_encode

from creditvar.model.portfolio import Loan, Portfolio, PortfolioError

__all__ = [
    'PortfolioParseError', 'FORMATS', 'load_portfolio', 'write_portfolio',
    'load_portfolio_file', 'portfolio_format_from_path', 'dump_portfolio', 'portfolio_to_frame',
]

FORMATS = ('csv', 'json')

_CSV_FIXED_COLUMNS = ['notional', 'pd', 'recovery']


class PortfolioParseError(PortfolioError):
    """Error raised when a portfolio file is malformed."""

    pass


def portfolio_format_from_path(path):
    """Infer the portfolio file format from a path extension, defaulting to csv."""
    return 'json' if os.path.splitext(str(path))[1].lower() == '.json' else 'csv'


def _check_format(fmt):
    if fmt not in FORMATS:
        raise PortfolioParseError(
            'Unsupported portfolio format {!r}: expected one of {}'.format(
                fmt, ', '.join(FORMATS)))


def _parse_float(text, row, column):
    """Parse a CSV cell into a float, reporting the row and column on failure."""
    try:
        return float(text)
    except (TypeError, ValueError):
        raise PortfolioParseError(
            'row {}: column {} has non-numeric value {!r}'.format(row, column, text))


def _read_csv(source):
    """Read a CSV portfolio from a binary stream into a Portfolio."""
    # header=None keeps pandas from promoting a surplus first field to an index
    try:
        frame = pd.read_csv(
            source, header=None, dtype=str, keep_default_na=False, encoding='utf-8',
            skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise PortfolioParseError('portfolio CSV is empty')
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise PortfolioParseError('malformed portfolio CSV: {}'.format(e))

    rows = list(frame.itertuples(index=False, name=None))
    columns = [str(column).strip() for column in rows[0]]
    num_factors = len(columns) - len(_CSV_FIXED_COLUMNS)
    expected = _CSV_FIXED_COLUMNS + ['w{}'.format(k + 1) for k in range(max(num_factors, 0))]
    if num_factors < 1 or columns != expected:
        raise PortfolioParseError(
            'portfolio CSV header must be {}, got {}'.format(
                ','.join(_CSV_FIXED_COLUMNS + ['w1[,w2,...]']), ','.join(columns)))

    loans = []
    for row, values in enumerate(rows[1:]):
        if any(not isinstance(value, str) or value == '' for value in values):
            raise PortfolioParseError(
                'row {}: expected {} fields'.format(row, len(columns)))
        fields = [_parse_float(value, row, column) for value, column in zip(values, columns)]
        loans.append(_build_loan(row, fields[0], fields[1], fields[2], fields[3:]))

    return Portfolio(loans)


def _read_json(source):
    """Read a JSON portfolio from a binary stream into a Portfolio."""
    try:
        document = json_decode(source.read())
    except (ValueError, UnicodeDecodeError) as e:
        raise PortfolioParseError('malformed portfolio JSON: {}'.format(e))

    if not isinstance(document, dict) or not isinstance(document.get('loans'), list):
        raise PortfolioParseError('portfolio JSON must be an object with a "loans" array')

    loans = []
    for row, entry in enumerate(document['loans']):
        if not isinstance(entry, dict):
            raise PortfolioParseError('loan {}: expected an object'.format(row))
        missing = [key for key in ('notional', 'pd', 'recovery', 'loadings') if key not in entry]
        if missing:
            raise PortfolioParseError(
                'loan {}: missing field(s) {}'.format(row, ', '.join(missing)))
        if not isinstance(entry['loadings'], list):
            raise PortfolioParseError('loan {}: loadings must be an array'.format(row))
        loans.append(_build_loan(
            row, entry['notional'], entry['pd'], entry['recovery'], entry['loadings']))

    return Portfolio(loans)


def _build_loan(row, notional, pd_, recovery, loadings):
    """Construct a Loan, tagging any validation error with its row index."""
    try:
        return Loan(notional, pd_, recovery, tuple(loadings))
    except PortfolioError as e:
        raise PortfolioError(str(e), row)


def load_portfolio(source, fmt='csv'):
    """Load and validate a portfolio from a binary stream.

    :param source: readable binary stream of UTF-8 text
    :param fmt: 'csv' or 'json'
    :return: a validated Portfolio, loans in row order
    :raises PortfolioParseError: if the input is malformed
    :raises PortfolioError: if a loan violates a model invariant (message names the loan)
    """
    _check_format(fmt)
    if fmt == 'json':
        return _read_json(source)
    return _read_csv(source)


def load_portfolio_file(path, fmt=None):
    """Load a portfolio from a file, inferring the format from the extension if not given."""
    fmt = fmt or portfolio_format_from_path(path)
    with open(path, 'rb') as source:
        return load_portfolio(source, fmt)


def portfolio_to_frame(portfolio):
    """Return the portfolio as a pandas DataFrame with the CSV column layout."""
    data = {
        'notional': portfolio.notionals,
        'pd': portfolio.default_probs,
        'recovery': portfolio.recoveries,
    }
    for k in range(portfolio.num_factors):
        data['w{}'.format(k + 1)] = portfolio.loadings[:, k]
    return pd.DataFrame(data)


def dump_portfolio(portfolio, fmt='csv'):
    """Serialise a portfolio to text in the given format."""
    _check_format(fmt)
    if fmt == 'json':
        document = {'loans': [
            {
                'notional': loan.notional,
                'pd': loan.default_prob,
                'recovery': loan.recovery,
                'loadings': list(loan.loadings),
            } for loan in portfolio
        ]}
        return json_encode(document) + '\n'

    buffer = io.StringIO()
    portfolio_to_frame(portfolio).to_csv(buffer, index=False)
    return buffer.getvalue()


def write_portfolio(portfolio, sink, fmt='csv'):
    """Write a portfolio to a binary stream in the given format.

    :param portfolio: Portfolio to write
    :param sink: writable binary stream
    :param fmt: 'csv' or 'json'
    """
    sink.write(dump_portfolio(portfolio, fmt).encode('utf-8'))
