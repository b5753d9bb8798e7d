"""Multipartite nonclassicality witness and spin-chain studies."""

__version__ = "0.1.0"
