"""Mini SQL/PGQ engine over in-memory relational data."""

__version__ = "0.1.0"
