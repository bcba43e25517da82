"""Predictor-antenna link simulator for high-mobility vehicles and trains."""

__version__ = "0.1.0"
