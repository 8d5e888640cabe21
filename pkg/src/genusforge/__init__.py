"""genusforge: exact computer algebra for genera of complex varieties."""

__version__ = "0.1.0"
