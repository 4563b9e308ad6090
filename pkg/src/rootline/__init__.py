"""Tracking toolkit for Arabidopsis root cortex nuclei in 3D time-lapse data."""

__version__ = "0.1.0"
