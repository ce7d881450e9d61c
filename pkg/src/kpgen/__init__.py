"""Keyphrase generation with a syntactic graph encoder and diversified beam search."""

__version__ = "0.1.0"
