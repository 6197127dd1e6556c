"""Truncated Fock-space simulation of cross-Kerr cat states and their detection."""

__version__ = "0.1.0"
