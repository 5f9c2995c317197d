"""Detect derivation relationships and code reuse across a corpus of projects."""

__version__ = "0.1.0"
