"""Search, construction and numerical verification of generalized Inoue-Bombieri structures."""

__version__ = "0.1.0"
