"""Supermeasured hidden-variable models for Bell tests under angular-momentum conservation."""

__version__ = "0.1.0"
