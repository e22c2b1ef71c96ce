"""Sentence-level detection of AI-related disclosures in financial reports."""

__version__ = "0.1.0"

from .errors import DiscloseError

__all__ = ["DiscloseError", "__version__"]
