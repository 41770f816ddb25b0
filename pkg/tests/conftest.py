import pytest

from creditvar.engine.loss import build_loss_distribution
from creditvar.engine.var import solve_var
from creditvar.model.portfolio import example_portfolio


@pytest.fixture(scope="session")
def benchmark_portfolio():
    """The 125-loan single-factor benchmark portfolio."""
    return example_portfolio()


@pytest.fixture(scope="session")
def benchmark_dist(benchmark_portfolio):
    """Loss distribution of the benchmark portfolio at the default quadrature order."""
    return build_loss_distribution(benchmark_portfolio, threads=1)


@pytest.fixture(scope="session")
def benchmark_var(benchmark_dist):
    """VaR of the benchmark portfolio at 99.75% solved by bisection to 1bp."""
    return solve_var(benchmark_dist, 0.9975)
