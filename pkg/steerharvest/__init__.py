"""Steering harvested from the Minkowski vacuum by two detectors with unequal gaps."""

__version__ = "0.1.0"
