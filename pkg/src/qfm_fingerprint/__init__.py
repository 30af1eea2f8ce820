"""Fourier fingerprints of quantum Fourier models"""

__version__ = "0.1.0"
