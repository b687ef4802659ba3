"""Population-level integration of unmatched multi-modal cohorts."""

__version__ = "0.1.0"
