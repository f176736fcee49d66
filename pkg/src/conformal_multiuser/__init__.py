"""Split conformal classification evaluated under multi-user strategies."""

__version__ = "0.1.0"
