"""Distributed multi-user gaze analytics toolkit."""

__version__ = "0.1.0"
