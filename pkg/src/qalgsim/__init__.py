"""Classical simulation of algebraic quantum algorithms."""

__version__ = "0.1.0"
