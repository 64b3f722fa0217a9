"""Deterministic robot-assisted dressing simulator and hazard-driven control stack."""

__version__ = "0.1.0"
