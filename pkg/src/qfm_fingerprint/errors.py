#!/usr/bin/env python3
"""Exceptions raised by qfm_fingerprint"""


class FingerprintError(Exception):
    """Base class for all library errors"""


class InvalidGateError(FingerprintError, ValueError):
    """Gate indices out of range or control equal to target"""


class DimensionMismatchError(FingerprintError, ValueError):
    """Array or vector sizes do not agree"""


class AliasingError(FingerprintError, ValueError):
    """Input grid too coarse for the model's frequency band"""


class DegenerateInputError(FingerprintError, ValueError):
    """Input carries no variation (constant samples, all-equal values)"""


class ParameterShiftError(FingerprintError, ValueError):
    """Parameter-shift gradient requested for a controlled-rotation ansatz"""


class MalformedEventError(FingerprintError, ValueError):
    """Collision event violates the physical invariants"""


class ConfigError(FingerprintError, ValueError):
    """Invalid run configuration"""


class SymmetryError(FingerprintError, RuntimeError):
    """Hermitian symmetry violated where it must hold"""
