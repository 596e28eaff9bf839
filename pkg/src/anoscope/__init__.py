"""anoscope: one-class, probabilistic and reconstruction anomaly detectors under one contract."""

__version__ = "0.1.0"
