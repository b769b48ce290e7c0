"""Bowen-Series coding, group-extended Markov shifts and discretized Green kernels for a genus-2 surface group."""

__version__ = "0.1.0"
