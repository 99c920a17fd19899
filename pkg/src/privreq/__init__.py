"""Privacy requirements taxonomy toolkit.

Stores and validates a GDPR/ISO 29100 privacy-requirements taxonomy,
mines issue trackers for privacy-tagged reports, runs multi-coder
annotation sessions with inter-rater reliability statistics, classifies
issues against the taxonomy, and produces coverage and comparative
analyses.
"""

__version__ = "0.1.0"
