"""Exact finite-truncation computations for infinitesimal derived foliations."""

__version__ = "0.1.0"
