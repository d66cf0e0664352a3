"""High-frequency spectral stability of ZND detonations.

Steady profiles, the WKB frame and its turning points, an exact finite-eps
solver, the stability function and the instability criterion, plus
fixed-point validators for the asymptotic constructions.
"""
from .eos import ConfigError, EosModel
from .profile import Profile, calibrate_rate, integrate_profile

__version__ = "0.1.0"

__all__ = ["ConfigError", "EosModel", "Profile", "calibrate_rate", "integrate_profile"]
