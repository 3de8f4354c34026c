"""Structure of the group of positive rationals modulo the ratios (an+b)/(An+B)."""

__version__ = "0.1.0"
