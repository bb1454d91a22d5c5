"""Value types shared by the whole package.

Units convention: frequencies are dimensionless multiples of the spectral
width of the frequency-difference distribution, and delays are multiples of
its inverse.  With that choice ``domega_minus`` defaults to 1 and physical
units only matter at the CLI boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

TWO_PI = 2.0 * math.pi


def _reduce_angle(x: float) -> float:
    """Reduce an angle to [0, 2*pi), snapping exact multiples of 2*pi to 0."""
    r = math.fmod(x, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if abs(r - TWO_PI) < 1e-12 or abs(r) < 1e-12:
        r = 0.0
    return r


@dataclass(frozen=True)
class PhaseConfig:
    """Delays tau_1..tau_k and achromatic phases theta_1..theta_k of a cascade.

    Each stage ell applies opposite phase shifts exp(+-i*phi_ell) to its two
    arms, phi_ell(omega) = omega*tau_ell + theta_ell/2, followed by a 50:50
    beam splitter.  The first stage carries no wave plate: theta_1 must be 0
    (a nonzero value would only add a global phase).  Phases are reduced to
    [0, 2*pi) at construction; all evaluation code reads the reduced values.
    """

    tau: tuple[float, ...]
    theta: tuple[float, ...]

    def __init__(self, tau: Sequence[float], theta: Sequence[float] | None = None):
        tau = tuple(float(t) for t in tau)
        if len(tau) < 1:
            raise ValueError("need at least one module (k >= 1)")
        if theta is None:
            theta = (0.0,) * len(tau)
        theta = tuple(float(t) for t in theta)
        if len(theta) != len(tau):
            raise ValueError(
                f"tau and theta must both have k entries, got {len(tau)} and {len(theta)}"
            )
        if not all(math.isfinite(t) for t in tau + theta):
            raise ValueError("tau and theta entries must be finite")
        theta = tuple(_reduce_angle(t) for t in theta)
        if theta[0] != 0.0:
            raise ValueError("theta_1 must be 0 (it only contributes a global phase)")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "theta", theta)

    @property
    def k(self) -> int:
        return len(self.tau)

    def phi(self, ell: int, omega: float):
        """Phase phi_ell(omega) of stage ell (1-based), array-friendly in omega."""
        if not 1 <= ell <= self.k:
            raise IndexError(f"stage index {ell} outside 1..{self.k}")
        return omega * self.tau[ell - 1] + 0.5 * self.theta[ell - 1]


@dataclass(frozen=True)
class BiphotonSpectrum:
    """Gaussian biphoton spectral density, factorized as P+(omega+omega') * P-(omega-omega').

    P+ is centred on twice the mean photon frequency ``omega0`` with width
    parameter ``domega_plus``; P- is centred on zero with width
    ``domega_minus``.  The normalization is the one that makes the joint
    density integrate to 1 over (omega, omega').
    """

    omega0: float = 20.0
    domega_plus: float = 0.25
    domega_minus: float = 1.0

    def __post_init__(self):
        if not (self.omega0 > 0 and self.domega_plus > 0 and self.domega_minus > 0):
            raise ValueError("omega0 and both spectral widths must be positive")

    @property
    def local_spread(self) -> float:
        """Single-photon frequency spread sqrt(dm^2 + 4*dp^2)/2."""
        return math.sqrt(self.domega_minus**2 + 4.0 * self.domega_plus**2) / 2.0

    def p_plus(self, xi):
        """Density of omega+omega' (total mass 2; the Jacobian 1/2 restores normalization)."""
        import numpy as np

        s = 2.0 * self.domega_plus
        return np.exp(-((xi - 2.0 * self.omega0) ** 2) / (2.0 * s * s)) / (
            math.sqrt(TWO_PI) * self.domega_plus
        )

    def p_minus(self, nu):
        """Density of omega-omega' (unit mass)."""
        import numpy as np

        s = self.domega_minus
        return np.exp(-(nu * nu) / (2.0 * s * s)) / (math.sqrt(TWO_PI) * s)


@dataclass(frozen=True)
class CoarseGrainWindow:
    """Averaging window for the delay-fluctuation (coarse grained) rate.

    The coarse description is valid when the window is long compared to the
    carrier period but short compared to the inverse local spread,
    1/omega0 << T << 1/local_spread.  ``regime_ok`` applies a factor-10
    separation on both sides; violating it degrades accuracy but is not an
    error.
    """

    T: float
    samples_per_axis: int = 41

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("window length T must be positive")
        if self.samples_per_axis < 3 or self.samples_per_axis % 2 == 0:
            raise ValueError("samples_per_axis must be an odd integer >= 3")

    def regime_ok(self, spectrum: BiphotonSpectrum) -> bool:
        return (self.T * spectrum.omega0 >= 10.0) and (
            self.T * spectrum.local_spread <= 0.1
        )

    def nyquist_samples(self, spectrum: BiphotonSpectrum, k_plus_max: int = 2) -> int:
        """Samples per axis needed to resolve the fastest carrier 2*omega0*k_plus_max."""
        return int(math.ceil(2.0 * spectrum.omega0 * k_plus_max * self.T / math.pi)) + 1
