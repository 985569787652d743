"""Physical constants (CODATA 2018 exact values) and laboratory-unit conversions.

Internal computations use SI angular frequencies (rad/s) throughout; every
conversion from the lab-unit surface (GHz, MHz, mK, nA, mPhi0) happens here or
in :mod:`rabispec.config`, nowhere else.
"""

import math

TWO_PI = 2.0 * math.pi

H_PLANCK = 6.62607015e-34     # J s
HBAR = H_PLANCK / TWO_PI      # J s / rad
K_B = 1.380649e-23            # J / K
PHI_0 = 2.067833848e-15       # Wb, magnetic flux quantum


def from_ghz(f: float) -> float:
    """Frequency quoted as omega/2pi in GHz -> angular frequency in rad/s."""
    return TWO_PI * f * 1e9


def to_ghz(omega: float) -> float:
    return omega / (TWO_PI * 1e9)


def from_mhz(f: float) -> float:
    """omega/2pi in MHz -> rad/s."""
    return TWO_PI * f * 1e6


def to_mhz(omega: float) -> float:
    return omega / (TWO_PI * 1e6)


def from_mk(t: float) -> float:
    """mK -> K."""
    return t * 1e-3


def from_na(i: float) -> float:
    """nA -> A."""
    return i * 1e-9


def from_mphi0(x: float) -> float:
    """Flux offset in units of 1e-3 Phi_0 -> Wb."""
    return x * 1e-3 * PHI_0


def to_mphi0(flux: float) -> float:
    return flux / (1e-3 * PHI_0)


def from_ns(t: float) -> float:
    """ns -> s."""
    return t * 1e-9
