"""Outage analysis of RIS-assisted links through Fox H-function representations."""

__version__ = "0.1.0"
