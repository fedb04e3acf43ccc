"""Circulant and Bell-diagonal bipartite states: PPT, realignment and witnesses."""

__version__ = "0.1.0"
