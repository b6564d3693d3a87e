"""Slot-level AoI optimization and simulation for a RIS-assisted SWIPT downlink."""

__version__ = "0.1.0"
