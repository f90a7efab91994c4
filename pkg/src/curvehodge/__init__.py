"""Numerical Hodge decomposition and dbar solvers on plane algebraic curves."""

__version__ = "0.1.0"
