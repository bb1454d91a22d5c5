"""Coincidence rates under the Gaussian biphoton spectrum.

Primary path: every plane-wave term of |Perm_k|^2 integrates against the
factorized Gaussian density in (omega+omega', omega-omega') coordinates to

    coeff * e^{i (2*omega0*tau + theta).K+} * e^{-2 (tau.K+)^2 dOmega+^2}
          * e^{-(tau.K-)^2 dOmega-^2 / 2},

so the rate is an exact finite sum.  Terms with K+ = 0 assemble the
coarse-surviving part (independent of theta, omega0 and dOmega+); the rest
is the carrier-oscillating part that delay fluctuations wash out.  A
Gauss-Hermite quadrature of the raw |perm|^2 integrand is kept alongside as
an independent oracle and never shares the term machinery.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .cascade import perm
from .config import BiphotonSpectrum, CoarseGrainWindow, PhaseConfig
from .signsum import modsquare_split, perm_termsum

#: pairwise term count 4^(k-1) squared becomes unmanageable past this
MAX_MODULES = 8

#: imaginary residue of the analytic term sum is asserted below this
IMAG_RESIDUE_TOL = 1e-10


@dataclass(frozen=True)
class CoincidenceResult:
    """Rate value with its split into coarse-surviving and fast parts.

    ``rbar``/``delta`` are populated by the analytic path (total = rbar +
    delta exactly, same term list partitioned by K+).  The quadrature oracle
    integrates the raw matrix-product integrand and cannot split, so it
    reports None for both.
    """

    total: float
    rbar: float | None
    delta: float | None
    method: str
    term_count: int | None = None
    node_count: int | None = None
    converged: bool = True


@dataclass(frozen=True)
class _RateStructure:
    """|Perm_k|^2 term data as arrays, reusable for every (tau, theta, spectrum)."""

    k: int
    # K vectors stored doubled (integer); actual K = K2 / 2
    bar_coef: np.ndarray
    bar_km2: np.ndarray
    fast_coef: np.ndarray
    fast_kp2: np.ndarray
    fast_km2: np.ndarray
    # bilinear factorization over unique K+/K- rows: coupling[p, q]
    uplus2: np.ndarray
    uminus2: np.ndarray
    coupling: np.ndarray


@lru_cache(maxsize=None)
def _rate_structure(k: int) -> _RateStructure:
    """Merged |Perm_k|^2 terms; depends only on the stage count."""
    if k > MAX_MODULES:
        raise ValueError(
            f"k = {k} exceeds the term-count guard (4^(k-1) squared products); "
            f"supported k <= {MAX_MODULES}"
        )
    ref = PhaseConfig((0.0,) * k)
    pbar, dpk = modsquare_split(perm_termsum(ref))

    bar_coef = np.array([t[0] for t in pbar.terms], dtype=complex)
    bar_km2 = np.array([t[2] for t in pbar.terms], dtype=np.int64).reshape(-1, k)
    fast_coef = np.array([t[0] for t in dpk.terms], dtype=complex)
    fast_kp2 = np.array([t[1] for t in dpk.terms], dtype=np.int64).reshape(-1, k)
    fast_km2 = np.array([t[2] for t in dpk.terms], dtype=np.int64).reshape(-1, k)

    all_coef = np.concatenate([bar_coef, fast_coef])
    all_kp2 = np.concatenate([np.zeros_like(bar_km2), fast_kp2], axis=0)
    all_km2 = np.concatenate([bar_km2, fast_km2], axis=0)
    uplus2, pidx = np.unique(all_kp2, axis=0, return_inverse=True)
    uminus2, qidx = np.unique(all_km2, axis=0, return_inverse=True)
    coupling = np.zeros((len(uplus2), len(uminus2)), dtype=complex)
    np.add.at(coupling, (pidx.ravel(), qidx.ravel()), all_coef)

    return _RateStructure(
        k=k,
        bar_coef=bar_coef,
        bar_km2=bar_km2,
        fast_coef=fast_coef,
        fast_kp2=fast_kp2,
        fast_km2=fast_km2,
        uplus2=uplus2,
        uminus2=uminus2,
        coupling=coupling,
    )


def _integrate_terms(coef, kp2, km2, tau, theta, spec: BiphotonSpectrum) -> complex:
    """Sum of Gaussian-integrated plane-wave terms (fixed, sorted-key order)."""
    if len(coef) == 0:
        return 0j
    a = (kp2 @ tau) / 2.0
    b = (kp2 @ theta) / 2.0
    g = (km2 @ tau) / 2.0
    vals = coef * np.exp(
        1j * (2.0 * spec.omega0 * a + b)
        - 2.0 * (a * spec.domega_plus) ** 2
        - 0.5 * (g * spec.domega_minus) ** 2
    )
    return complex(np.sum(vals))


def rate_analytic(cfg: PhaseConfig, spec: BiphotonSpectrum) -> CoincidenceResult:
    """Exact coincidence rate by closed-form Gaussian integration of every term.

    The imaginary residue of either partial sum must stay below 1e-10 (the
    term list is conjugation-symmetric); it is asserted and discarded.
    """
    st = _rate_structure(cfg.k)
    tau = np.array(cfg.tau)
    theta = np.array(cfg.theta)
    rbar_c = _integrate_terms(st.bar_coef, np.zeros_like(st.bar_km2), st.bar_km2, tau, theta, spec)
    delta_c = _integrate_terms(st.fast_coef, st.fast_kp2, st.fast_km2, tau, theta, spec)
    if abs(rbar_c.imag) > IMAG_RESIDUE_TOL or abs(delta_c.imag) > IMAG_RESIDUE_TOL:
        raise ArithmeticError(
            f"imaginary residue {rbar_c.imag:.2e}/{delta_c.imag:.2e} exceeds tolerance"
        )
    rbar = rbar_c.real
    delta = delta_c.real
    return CoincidenceResult(
        total=rbar + delta,
        rbar=rbar,
        delta=delta,
        method="analytic",
        term_count=len(st.bar_coef) + len(st.fast_coef),
    )


def rates_batch(tau_points: np.ndarray, theta, spec: BiphotonSpectrum) -> np.ndarray:
    """Total rate at many tau points (N, k) for one theta and spectrum."""
    tau_points = np.atleast_2d(np.asarray(tau_points, dtype=float))
    k = tau_points.shape[1]
    st = _rate_structure(k)
    theta = np.asarray(theta, dtype=float)
    kp = np.concatenate([np.zeros_like(st.bar_km2), st.fast_kp2]) / 2.0
    km = np.concatenate([st.bar_km2, st.fast_km2]) / 2.0
    coef = np.concatenate([st.bar_coef, st.fast_coef]) * np.exp(1j * (kp @ theta))
    out = np.empty(len(tau_points))
    chunk = max(1, 8_000_000 // max(len(coef), 1))
    for s in range(0, len(tau_points), chunk):
        e = min(s + chunk, len(tau_points))
        a = tau_points[s:e] @ kp.T
        g = tau_points[s:e] @ km.T
        vals = coef[None, :] * np.exp(
            2j * spec.omega0 * a
            - 2.0 * (a * spec.domega_plus) ** 2
            - 0.5 * (g * spec.domega_minus) ** 2
        )
        out[s:e] = vals.real.sum(axis=1)
    return out


def rbar_batch(tau_points: np.ndarray, k: int, domega_minus: float = 1.0) -> np.ndarray:
    """Coarse-surviving rate at many tau points; no theta/omega0/dOmega+ inputs exist."""
    tau_points = np.atleast_2d(np.asarray(tau_points, dtype=float))
    if tau_points.shape[1] != k:
        raise ValueError("tau_points width does not match k")
    st = _rate_structure(k)
    g = tau_points @ (st.bar_km2.T / 2.0)
    vals = st.bar_coef[None, :] * np.exp(-0.5 * (g * domega_minus) ** 2)
    out = vals.real.sum(axis=1)
    return out


def rate_coarse_analytic(cfg: PhaseConfig, spec: BiphotonSpectrum) -> float:
    """Coarse-grained rate: the K+ = 0 part alone.

    Independent of theta, omega0 and dOmega+; only the width of the
    frequency-difference distribution enters.
    """
    return float(rbar_batch(np.array([cfg.tau]), cfg.k, spec.domega_minus)[0])


def rate_coarse_numeric(
    cfg: PhaseConfig, spec: BiphotonSpectrum, win: CoarseGrainWindow
) -> float:
    """Box average of the exact rate over [tau_l - T/2, tau_l + T/2] per axis.

    Midpoint tensor rule with win.samples_per_axis points per axis.  Warns
    (without failing) when the window regime 1/omega0 << T << 1/local_spread
    does not hold with factor-10 separation, and when the sampling cannot
    resolve the fastest carrier 2*omega0*max|K+| (aliasing).
    """
    if not win.regime_ok(spec):
        warnings.warn(
            "coarse-grain window outside the regime 1/omega0 << T << 1/local_spread; "
            "result is degraded, not invalid",
            stacklevel=2,
        )
    st = _rate_structure(cfg.k)
    kmax = int(np.abs(st.fast_kp2).max()) // 2 if len(st.fast_kp2) else 0
    if kmax:
        needed = win.nyquist_samples(spec, kmax)
        if win.samples_per_axis < needed:
            warnings.warn(
                f"samples_per_axis = {win.samples_per_axis} undersamples the fastest "
                f"carrier (need >= {needed}); the box average will alias",
                stacklevel=2,
            )
    n = win.samples_per_axis
    offsets = ((np.arange(n) + 0.5) / n - 0.5) * win.T
    axes = [np.array(t) + offsets for t in cfg.tau]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    return float(rates_batch(pts, cfg.theta, spec).mean())


def rate_quadrature(
    cfg: PhaseConfig, spec: BiphotonSpectrum, nodes: int = 128, tol: float = 1e-8
) -> CoincidenceResult:
    """Gauss-Hermite oracle for the rate; independent of the term machinery.

    Integrates |perm(cfg, (xi+nu)/2, (xi-nu)/2)|^2 against the two Gaussian
    weights with ``nodes`` points per axis.  The integrand comes from the
    matrix-product path only.  Convergence is probed by doubling the node
    count; a change above ``tol`` clears the ``converged`` flag.
    """
    if nodes < 16:
        raise ValueError("need at least 16 quadrature nodes")

    def _run(n: int) -> float:
        x, w = np.polynomial.hermite.hermgauss(n)
        xi = 2.0 * spec.omega0 + 2.0 * math.sqrt(2.0) * spec.domega_plus * x
        nu = math.sqrt(2.0) * spec.domega_minus * x
        omega = 0.5 * (xi[:, None] + nu[None, :])
        omega_p = 0.5 * (xi[:, None] - nu[None, :])
        integrand = np.abs(perm(cfg, omega, omega_p)) ** 2
        return float((w[:, None] * w[None, :] * integrand).sum() / math.pi)

    total = _run(nodes)
    refined = _run(2 * nodes)
    return CoincidenceResult(
        total=total,
        rbar=None,
        delta=None,
        method="quadrature",
        node_count=nodes,
        converged=abs(refined - total) <= tol,
    )


def delta_r_closed_k3(tau, spec: BiphotonSpectrum) -> float:
    """Closed form of the fast part for k = 3 at theta = (0, pi/2, 0).

    Literal transcription of the five-envelope expression (prefactor 1/32,
    carriers at multiples of omega0); an oracle for rate_analytic's delta at
    that phase setting, independent of the term pipeline.
    """
    t1, t2, t3 = (float(t) for t in tau)
    w0 = spec.omega0
    dp2 = spec.domega_plus**2
    dm2 = spec.domega_minus**2

    f1 = (
        2.0
        * math.exp(-8.0 * t2**2 * dp2 - 2.0 * (t1 + t3) ** 2 * dm2)
        * (
            1.0
            + math.exp(8.0 * t1 * t3 * dm2)
            + 2.0 * math.exp((2.0 * t1**2 + 4.0 * t1 * t3) * dm2)
        )
    )
    f2 = (
        -4.0
        * math.exp(
            -2.0 * t2 * (t1 + t3) * dm2
            - 2.0 * (t1 + t3) ** 2 * dm2
            - 0.5 * t2**2 * (4.0 * dp2 + dm2)
        )
        * (
            math.exp(4.0 * t3 * (2.0 * t1 + t2) * dm2)
            - math.exp(4.0 * t2 * (t1 + t3) * dm2)
            + math.exp(4.0 * t1 * (t2 + 2.0 * t3) * dm2)
            - 1.0
        )
    )
    f3 = (
        2.0
        * math.exp(-8.0 * t3**2 * dp2 - 2.0 * (t1 + t2) ** 2 * dm2)
        * (
            math.exp(8.0 * t1 * t2 * dm2)
            - 4.0 * math.exp(2.0 * t2 * (2.0 * t1 + t2) * dm2)
            - 2.0 * math.exp(2.0 * t1 * (t1 + 2.0 * t2) * dm2)
            + 1.0
        )
    )
    f4 = (
        -2.0
        * math.exp(-2.0 * (4.0 * t2**2 * dp2 + 4.0 * t3**2 * dp2 + t1**2 * dm2))
        * (1.0 + math.exp(2.0 * t1**2 * dm2))
    )
    f5 = (
        4.0
        * math.exp(-2.0 * (t2**2 + 4.0 * t3**2) * dp2 - 0.5 * (2.0 * t1 + t2) ** 2 * dm2)
        * (math.exp(4.0 * t1 * t2 * dm2) - 1.0)
    )

    return (
        f1 * math.cos(4.0 * w0 * t2)
        + f2 * math.sin(2.0 * w0 * t2)
        + f3 * math.cos(4.0 * w0 * t3)
        + f4
        * (
            math.exp(-16.0 * t2 * t3 * dp2) * math.cos(4.0 * w0 * (t2 + t3))
            + math.exp(16.0 * t2 * t3 * dp2) * math.cos(4.0 * w0 * (t2 - t3))
        )
        + f5
        * (
            math.exp(8.0 * t2 * t3 * dp2) * math.sin(2.0 * w0 * (t2 - 2.0 * t3))
            - math.exp(-8.0 * t2 * t3 * dp2) * math.sin(2.0 * w0 * (t2 + 2.0 * t3))
        )
    ) / 32.0


def lattice_rate_chunks(
    k: int,
    theta,
    spec: BiphotonSpectrum,
    step: float,
    nhalf: int,
    chunk: int = 400_000,
):
    """Iterate the rate over the symmetric lattice {-nhalf..nhalf}^k * step.

    Yields (integer_coords, rates) per chunk with rates in float32: the dot
    products tau.K live on a lattice, so carrier/Gaussian factors come from
    precomputed lookup tables and the term sum collapses to one dense
    (points x P) @ (P x Q) product over the unique K+/K- rows.  Intended for
    zero-manifold scans; callers needing 1e-10-level answers at specific
    points should re-evaluate them with :func:`rate_analytic`.
    """
    st = _rate_structure(k)
    theta = np.asarray(theta, dtype=float)
    coupling = st.coupling * np.exp(1j * (st.uplus2 @ theta) / 2.0)[:, None]
    c_re = np.ascontiguousarray(coupling.real, dtype=np.float32)
    c_im = np.ascontiguousarray(coupling.imag, dtype=np.float32)

    vmax_p = max(int(np.abs(st.uplus2).sum(axis=1).max()) * nhalf, 1)
    vmax_m = max(int(np.abs(st.uminus2).sum(axis=1).max()) * nhalf, 1)
    a_p = step * np.arange(-vmax_p, vmax_p + 1) / 2.0
    a_m = step * np.arange(-vmax_m, vmax_m + 1) / 2.0
    carrier = np.exp(2j * spec.omega0 * a_p - 2.0 * (a_p * spec.domega_plus) ** 2)
    tab_p_re = carrier.real.astype(np.float32)
    tab_p_im = carrier.imag.astype(np.float32)
    tab_m = np.exp(-0.5 * (a_m * spec.domega_minus) ** 2).astype(np.float32)

    axis = np.arange(-nhalf, nhalf + 1, dtype=np.int64)
    g = len(axis)
    n_total = g**k
    upt = st.uplus2.T.astype(np.int64)
    umt = st.uminus2.T.astype(np.int64)
    for start in range(0, n_total, chunk):
        stop = min(start + chunk, n_total)
        rem = np.arange(start, stop, dtype=np.int64)
        coords = np.empty((stop - start, k), dtype=np.int64)
        for j in range(k - 1, -1, -1):
            coords[:, j] = axis[rem % g]
            rem //= g
        vp = coords @ upt + vmax_p
        vm = coords @ umt + vmax_m
        gm = tab_m[vm]
        m = tab_p_re[vp] @ c_re - tab_p_im[vp] @ c_im
        yield coords, (m * gm).sum(axis=1)
