"""Privacy-policy metadata identification and completeness checking."""

__version__ = "0.1.0"
