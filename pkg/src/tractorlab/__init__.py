"""tractorlab: numerical conformal tractor calculus, built and checked two ways."""

__version__ = "0.1.0"
