"""Toolkit for separating spurious from genuine word-label correlations in
short-text classifiers via counterfactual context matching.
"""

__version__ = "0.1.0"

from .simsearch import backend as search_backend  # noqa: F401
