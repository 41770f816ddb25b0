"""creditvar.numerics package - normal distribution functions and quadrature rules."""
