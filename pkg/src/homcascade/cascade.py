"""Transfer matrices of the beam-splitter cascade and the two-frequency functionals.

Stage ell maps its output pair onto its input pair through

    M_ell(omega) = 1/sqrt(2) * [[ e^{i phi},  e^{i phi}],
                                [ e^{-i phi}, -e^{-i phi}]],

phi = omega*tau_ell + theta_ell/2, and the full cascade is the ordered
product N_k(omega) = M_1(omega) @ M_2(omega) @ ... @ M_k(omega) with entries
[[A, B], [C, D]].  Coincidence physics for a frequency-symmetric biphoton
input is governed by the mixed-frequency permanent

    Perm_k(omega, omega') = A_k(omega) D_k(omega') + B_k(omega') C_k(omega),

whose vanishing over the spectral support is equivalent to a vanishing
coincidence rate.  All functions accept scalar or numpy-array frequencies.
"""

from __future__ import annotations

import math

import numpy as np

from .config import PhaseConfig

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


class ClosedFormUnavailableError(ValueError):
    """Raised when no hard-coded closed form exists for the requested k."""


def module_matrix(cfg: PhaseConfig, ell: int, omega) -> np.ndarray:
    """Single-stage transfer matrix M_ell(omega); unitary with determinant -1."""
    ph = cfg.phi(ell, omega)
    e_plus = np.exp(1j * ph)
    e_minus = np.conj(e_plus)
    return _INV_SQRT2 * np.array([[e_plus, e_plus], [e_minus, -e_minus]])


def cascade_matrix(cfg: PhaseConfig, omega) -> np.ndarray:
    """Ordered product M_1 ... M_k; unitary with determinant (-1)^k."""
    out = module_matrix(cfg, 1, omega)
    for ell in range(2, cfg.k + 1):
        out = out @ module_matrix(cfg, ell, omega)
    return out


def _cascade_entries(cfg: PhaseConfig, omega):
    """Entries (A, B, C, D) of N_k(omega) with omega an arbitrary ndarray.

    Same product as :func:`cascade_matrix` but broadcasting over omega, so
    quadrature grids and frequency probes evaluate in one vectorized pass.
    """
    omega = np.asarray(omega)
    ph = cfg.phi(1, omega)
    e = np.exp(1j * ph)
    ec = np.conj(e)
    a, b, c, d = (
        _INV_SQRT2 * e,
        _INV_SQRT2 * e,
        _INV_SQRT2 * ec,
        -_INV_SQRT2 * ec,
    )
    for ell in range(2, cfg.k + 1):
        ph = cfg.phi(ell, omega)
        e = np.exp(1j * ph)
        ec = np.conj(e)
        m11, m12, m21, m22 = (
            _INV_SQRT2 * e,
            _INV_SQRT2 * e,
            _INV_SQRT2 * ec,
            -_INV_SQRT2 * ec,
        )
        a, b = a * m11 + b * m21, a * m12 + b * m22
        c, d = c * m11 + d * m21, c * m12 + d * m22
    return a, b, c, d


def perm(cfg: PhaseConfig, omega, omega_p):
    """Mixed-frequency permanent A_k(omega) D_k(omega') + B_k(omega') C_k(omega)."""
    a, _, c, _ = _cascade_entries(cfg, omega)
    _, bp, _, dp = _cascade_entries(cfg, omega_p)
    return a * dp + bp * c


def det_mixed(cfg: PhaseConfig, omega, omega_p):
    """Mixed-frequency determinant A_k(omega) D_k(omega') - B_k(omega') C_k(omega).

    At omega = omega' this is the determinant of the unitary N_k, so its
    modulus is exactly 1 there.
    """
    a, _, c, _ = _cascade_entries(cfg, omega)
    _, bp, _, dp = _cascade_entries(cfg, omega_p)
    return a * dp - bp * c


def perm_closed_form(cfg: PhaseConfig, omega, omega_p):
    """Literal trigonometric closed form of Perm_k, coded for k in {1, 2, 3, 4}.

    Independent of the matrix-product path: each case is a direct
    transcription of the expanded product-to-sum expression, and serves as an
    oracle for :func:`perm` (agreement within 1e-12 absolute).
    """
    k = cfg.k
    omega = np.asarray(omega, dtype=float)
    omega_p = np.asarray(omega_p, dtype=float)
    nu = omega - omega_p

    if k == 1:
        return -1j * np.sin(nu * cfg.tau[0]) + 0.0 * omega

    if k == 2:
        xi = omega + omega_p
        t1, t2 = cfg.tau
        th2 = cfg.theta[1]
        return np.cos(nu * t1) * np.cos(xi * t2 + th2) + 1j * np.sin(nu * t1) * np.cos(
            nu * t2
        )

    ph = [cfg.phi(ell, omega) for ell in range(1, k + 1)]
    php = [cfg.phi(ell, omega_p) for ell in range(1, k + 1)]
    d = [a - b for a, b in zip(ph, php)]  # phi_ell - phi_ell'
    s = [a + b for a, b in zip(ph, php)]  # phi_ell + phi_ell'

    if k == 3:
        real = -np.cos(d[0]) * np.sin(s[1]) * np.sin(s[2]) + np.sin(d[0]) * np.sin(
            d[1]
        ) * np.cos(s[2])
        imag = np.cos(d[0]) * np.cos(s[1]) * np.sin(d[2]) + np.sin(d[0]) * np.cos(
            d[1]
        ) * np.cos(d[2])
        return real - 1j * imag

    if k == 4:
        real = np.cos(d[0]) * (
            np.cos(s[1]) * np.cos(d[2]) * np.cos(s[3])
            - np.sin(s[1]) * np.cos(s[2]) * np.sin(s[3])
        ) - np.sin(d[0]) * (
            np.cos(d[1]) * np.sin(d[2]) * np.cos(s[3])
            + np.sin(d[1]) * np.sin(s[2]) * np.sin(s[3])
        )
        imag = np.cos(d[0]) * (
            np.cos(s[1]) * np.sin(d[2]) * np.cos(d[3])
            + np.sin(s[1]) * np.sin(s[2]) * np.sin(d[3])
        ) + np.sin(d[0]) * (
            np.cos(d[1]) * np.cos(d[2]) * np.cos(d[3])
            - np.sin(d[1]) * np.cos(s[2]) * np.sin(d[3])
        )
        return real + 1j * imag

    raise ClosedFormUnavailableError(f"no closed form coded for k = {k}")
