import io
import os

import pytest
from tornado.escape import json_decode

from creditvar.model.ingest import (
    PortfolioParseError, dump_portfolio, load_portfolio, load_portfolio_file,
    portfolio_format_from_path, portfolio_to_frame, write_portfolio
)
from creditvar.model.portfolio import PortfolioError, example_portfolio
from tests.utils import two_factor_portfolio


def _load(text, fmt='csv'):
    return load_portfolio(io.BytesIO(text.encode('utf-8')), fmt)


class TestLoadCsv():
    """Class to test reading portfolios from CSV."""

    def test_load_single_factor(self):
        """Test that a well-formed single-factor CSV loads in row order."""
        portfolio = _load("notional,pd,recovery,w1\n1.0,0.02,0.5,0.5\n3,0.04,0.4,0.3\n")
        assert portfolio.num_loans == 2
        assert portfolio.num_factors == 1
        assert portfolio[1].notional == 3.0
        assert portfolio[1].loadings == (0.3,)

    def test_load_two_factors_with_spaces(self):
        """Test that multi-factor headers and padded fields are accepted."""
        portfolio = _load("notional, pd, recovery, w1, w2\n1.0, 0.02, 0.5, 0.3, -0.2\n")
        assert portfolio.num_factors == 2
        assert portfolio[0].loadings == (0.3, -0.2)

    @pytest.mark.parametrize("text, message", [
        ("", "portfolio CSV is empty"),
        ("notional,pd,recovery\n1,0.1,0.4\n", "header must be"),
        ("notional,pd,recovery,w2\n1,0.1,0.4,0.3\n", "header must be"),
        ("pd,notional,recovery,w1\n0.1,1,0.4,0.3\n", "header must be"),
        ("notional,pd,recovery,w1\n1,0.1,0.4\n", "row 0: expected 4 fields"),
        ("notional,pd,recovery,w1\n1,0.1,0.4,0.3\n1,0.1,,0.3\n", "row 1: expected 4 fields"),
        ("notional,pd,recovery,w1\n1,abc,0.4,0.3\n", "row 0: column pd has non-numeric value"),
        ("notional,pd,recovery,w1\n1,0.1,0.4,0.3\n1,0.1,0.4,0.3,0.2\n", "malformed portfolio CSV"),
    ])
    def test_malformed_csv(self, text, message):
        """Test that malformed CSV input raises PortfolioParseError."""
        with pytest.raises(PortfolioParseError) as excinfo:
            _load(text)
        assert message in str(excinfo.value)

    def test_invalid_loan_reports_row(self):
        """Test that a loan violating an invariant is reported with its row index."""
        with pytest.raises(PortfolioError) as excinfo:
            _load("notional,pd,recovery,w1\n1,0.1,0.4,0.3\n1,0.1,0.4,0.3\n1,1.5,0.4,0.3\n")
        assert excinfo.value.loan_index == 2
        assert "loan 2: default probability must lie in (0, 1)" in str(excinfo.value)

    def test_header_only(self):
        """Test that a CSV with no loans is rejected."""
        with pytest.raises(PortfolioError) as excinfo:
            _load("notional,pd,recovery,w1\n")
        assert "at least one loan" in str(excinfo.value)

    def test_unknown_format(self):
        """Test that an unsupported format name raises an error."""
        with pytest.raises(PortfolioParseError) as excinfo:
            _load("notional,pd,recovery,w1\n", fmt='xlsx')
        assert "Unsupported portfolio format 'xlsx'" in str(excinfo.value)


class TestLoadJson():
    """Class to test reading portfolios from JSON."""

    def test_load_json(self):
        """Test that a well-formed JSON portfolio loads."""
        portfolio = _load(
            '{"loans": [{"notional": 2, "pd": 0.03, "recovery": 0.45, "loadings": [0.4, 0.1]}]}',
            fmt='json')
        assert portfolio.num_loans == 1
        assert portfolio[0].loadings == (0.4, 0.1)
        assert portfolio[0].recovery == 0.45

    @pytest.mark.parametrize("text, message", [
        ('{"loans": [', "malformed portfolio JSON"),
        ('[1, 2]', 'must be an object with a "loans" array'),
        ('{"loans": [3]}', "loan 0: expected an object"),
        ('{"loans": [{"notional": 1, "pd": 0.1, "loadings": [0.1]}]}',
         "loan 0: missing field(s) recovery"),
        ('{"loans": [{"notional": 1, "pd": 0.1, "recovery": 0.2, "loadings": 0.1}]}',
         "loan 0: loadings must be an array"),
    ])
    def test_malformed_json(self, text, message):
        """Test that malformed JSON input raises PortfolioParseError."""
        with pytest.raises(PortfolioParseError) as excinfo:
            _load(text, fmt='json')
        assert message in str(excinfo.value)

    def test_invalid_json_loan(self):
        """Test that a JSON loan violating an invariant is reported with its index."""
        with pytest.raises(PortfolioError) as excinfo:
            _load('{"loans": [{"notional": -1, "pd": 0.1, "recovery": 0.2, "loadings": [0.1]}]}',
                  fmt='json')
        assert excinfo.value.loan_index == 0


class TestWritePortfolio():
    """Class to test writing portfolios and reading them back."""

    @pytest.mark.parametrize("fmt", ["csv", "json"])
    def test_round_trip_is_exact(self, fmt):
        """Test that writing then loading reproduces the portfolio exactly."""
        for portfolio in (example_portfolio(), two_factor_portfolio()):
            sink = io.BytesIO()
            write_portfolio(portfolio, sink, fmt)
            sink.seek(0)
            assert load_portfolio(sink, fmt) == portfolio

    def test_csv_layout(self):
        """Test the CSV header and column layout of a written portfolio."""
        text = dump_portfolio(two_factor_portfolio(num_loans=3), 'csv')
        lines = text.splitlines()
        assert lines[0] == 'notional,pd,recovery,w1,w2'
        assert len(lines) == 4

    def test_json_layout(self):
        """Test the JSON document layout of a written portfolio."""
        document = json_decode(dump_portfolio(example_portfolio(4), 'json'))
        assert len(document['loans']) == 4
        assert document['loans'][0] == {
            'notional': 1.0, 'pd': 0.015, 'recovery': 0.5, 'loadings': [0.5]}

    def test_frame(self):
        """Test the DataFrame view of a portfolio."""
        frame = portfolio_to_frame(two_factor_portfolio(num_loans=5))
        assert list(frame.columns) == ['notional', 'pd', 'recovery', 'w1', 'w2']
        assert frame.shape == (5, 5)

    def test_load_file_infers_format(self, tmp_path):
        """Test that loading from a file infers the format from the extension."""
        portfolio = example_portfolio(6)
        for name, fmt in (('p.csv', 'csv'), ('p.JSON', 'json'), ('p.txt', 'csv')):
            path = os.path.join(str(tmp_path), name)
            with open(path, 'wb') as sink:
                write_portfolio(portfolio, sink, fmt)
            assert portfolio_format_from_path(path) == fmt
            assert load_portfolio_file(path) == portfolio

    def test_load_missing_file(self, tmp_path):
        """Test that loading a missing file raises an OSError."""
        with pytest.raises(OSError):
            load_portfolio_file(os.path.join(str(tmp_path), 'missing.csv'))
