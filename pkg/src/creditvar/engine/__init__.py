"""creditvar.engine package __init__.py.

Loss distribution, VaR solving, VaR sensitivities and the Monte Carlo oracle.
"""
