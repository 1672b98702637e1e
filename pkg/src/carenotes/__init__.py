"""Clinician-in-the-loop chronic-disease adherence reporting.

Per-patient case bundles flow through urgency triage (rule-based, with an
optional external estimate that can only raise the label), bounded sectioned
draft generation paired with time-aligned charts, and a single-pass physician
review/approve/export workflow with a full audit trail.
"""

__version__ = "0.1.0"
