"""Zero-coincidence analysis: origin conditions, phase solving, manifold scans,
and the two-step delay-recovery procedure.

A parameter point is an *exclusive* zero-coincidence point when the rate
vanishes only at tau = 0.  Scans probe a symmetric lattice in tau-space with
a fixed reference spectrum, flag near-zero loci, fit rays through the origin
when the loci are collinear, and report the off-origin floor.  The scan is
evidence at grid resolution, not a proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cascade import perm
from .config import BiphotonSpectrum, PhaseConfig
from .rates import lattice_rate_chunks, rate_analytic, rbar_batch

#: rate at or below this (reference spectrum) counts as on the zero manifold
ZERO_RATE_TOL = 1e-10

#: float32 scan values below this are re-checked in float64
ZERO_CANDIDATE_CUTOFF = 1e-5

#: singular-value ratio below which a zero locus counts as one ray
RAY_COLLINEARITY_TOL = 1e-3

REFERENCE_SPECTRUM = BiphotonSpectrum()


class PathologicalFamilyError(ValueError):
    """Phase setting in a family with known off-origin zeros (degenerate sines)."""


class NoRealSolutionError(ValueError):
    """cot(theta2) * cot(theta4) lies outside [-1, 1]: no real theta3 exists."""


def origin_perm(thetas, k: int) -> float:
    """Permanent at tau = 0 (frequency independent there), for k in {1, 2, 3, 4}.

    ``thetas`` is the full k-vector including the leading theta_1 = 0 entry.
    """
    thetas = [float(t) for t in thetas]
    if len(thetas) != k:
        raise ValueError(f"expected {k} phase entries, got {len(thetas)}")
    if k >= 1 and abs(math.remainder(thetas[0], 2.0 * math.pi)) > 1e-12:
        raise ValueError("theta_1 must be 0")
    if k == 1:
        return 0.0
    if k == 2:
        return math.cos(thetas[1])
    if k == 3:
        return -math.sin(thetas[1]) * math.sin(thetas[2])
    if k == 4:
        return math.cos(thetas[1]) * math.cos(thetas[3]) - math.sin(
            thetas[1]
        ) * math.sin(thetas[3]) * math.cos(thetas[2])
    raise ValueError(f"no origin closed form coded for k = {k}")


def solve_theta3_k4(theta2: float, theta4: float) -> float:
    """Wave-plate setting theta3 that nulls the k = 4 permanent at the origin.

    Solves cos(theta2)cos(theta4) = sin(theta2)sin(theta4)cos(theta3) for
    theta3 in [0, pi].  Degenerate sines (theta2 or theta4 a multiple of pi,
    paired with the other at pi/2-like values) belong to families with known
    off-origin zero rays and are rejected.
    """
    s2, s4 = math.sin(theta2), math.sin(theta4)
    if abs(s2) < 1e-9 or abs(s4) < 1e-9:
        raise PathologicalFamilyError(
            "sin(theta2)*sin(theta4) = 0: these settings null the origin only "
            "inside families like (theta2, theta4) = (0, pi/2) that also admit "
            "off-origin zero rays such as tau ~ (1, 0, -1, 0)"
        )
    product = (math.cos(theta2) / s2) * (math.cos(theta4) / s4)
    if abs(product) > 1.0:
        raise NoRealSolutionError(
            f"cot(theta2)*cot(theta4) = {product:.6f} lies outside [-1, 1]"
        )
    return math.acos(product)


@dataclass(frozen=True)
class ScanGrid:
    """Symmetric box |tau_l| <= box sampled with the given step on every axis."""

    box: float = 3.0
    step: float = 0.1

    def __post_init__(self):
        if not (self.box > 0 and self.step > 0 and self.box >= self.step):
            raise ValueError("need box >= step > 0")

    @property
    def nhalf(self) -> int:
        return int(round(self.box / self.step))

    def describe(self, k: int) -> str:
        return f"k={k} box={self.box:g} step={self.step:g} ({2 * self.nhalf + 1}^{k} points)"


@dataclass(frozen=True)
class ZeroVerdict:
    """Outcome of a zero-manifold scan.

    exclusive is True exactly when no off-origin zeros were found and the
    off-origin floor clears the zero threshold.  witness_rays hold unit-free
    direction vectors normalized to largest component 1.
    """

    exclusive: bool
    witness_rays: tuple[tuple[float, ...], ...]
    scan_floor: float
    grid_spec: str
    zero_points: tuple[tuple[float, ...], ...] = ()
    floor_at: tuple[float, ...] | None = None


def _canonical_direction(vec: np.ndarray) -> np.ndarray:
    unit = vec / np.linalg.norm(vec)
    for v in unit:
        if abs(v) > 1e-9:
            if v < 0:
                unit = -unit
            break
    return unit


def _fit_rays(zero_points: np.ndarray) -> tuple[tuple[float, ...], ...]:
    """Group off-origin zeros by direction and fit one ray per collinear group."""
    dirs = np.array([_canonical_direction(p) for p in zero_points])
    clusters: list[list[int]] = []
    reps: list[np.ndarray] = []
    for i, d in enumerate(dirs):
        for j, rep in enumerate(reps):
            if np.linalg.norm(d - rep) < 0.05:
                clusters[j].append(i)
                break
        else:
            clusters.append([i])
            reps.append(d)
    rays = []
    for members in clusters:
        pts = zero_points[members]
        s = np.linalg.svd(pts, compute_uv=False)
        if len(pts) > 1 and s[1] > RAY_COLLINEARITY_TOL * s[0]:
            # not collinear through the origin; report the mean direction anyway
            direction = _canonical_direction(dirs[members].mean(axis=0))
        else:
            vt = np.linalg.svd(pts)[2]
            direction = _canonical_direction(vt[0])
        direction = direction / np.abs(direction).max()
        rays.append(tuple(round(float(v), 9) for v in direction))
    rays.sort()
    return tuple(rays)


def scan_zero_manifold(
    k: int,
    thetas,
    grid: ScanGrid = ScanGrid(),
    spectrum: BiphotonSpectrum = REFERENCE_SPECTRUM,
) -> ZeroVerdict:
    """Scan the tau lattice for zero-coincidence loci at fixed phases.

    Rates come from the analytic engine with the reference spectrum: a fast
    float32 lattice pass collects the off-origin minimum and every candidate
    below ZERO_CANDIDATE_CUTOFF, then candidates and the floor point are
    re-evaluated in float64 against ZERO_RATE_TOL.
    """
    thetas = tuple(float(t) for t in thetas)
    cfg_probe = PhaseConfig((0.0,) * k, thetas)  # validates thetas early
    nhalf = grid.nhalf
    step = grid.step
    off_origin_min2 = (1.0001 * step) ** 2

    floor32 = np.inf
    floor_coord = None
    candidates: list[np.ndarray] = []
    for coords, rates in lattice_rate_chunks(k, cfg_probe.theta, spectrum, step, nhalf):
        norms2 = (coords.astype(float) ** 2).sum(axis=1) * step**2
        off = norms2 > off_origin_min2
        if not off.any():
            continue
        cand = np.where(off & (rates < ZERO_CANDIDATE_CUTOFF))[0]
        for i in cand:
            candidates.append(coords[i].copy())
            if len(candidates) > 1_000_000:
                raise RuntimeError("zero-candidate set too large; grid or phases degenerate")
        masked = np.where(off, rates, np.float32(np.inf))
        i = int(np.argmin(masked))
        if masked[i] < floor32:
            floor32 = float(masked[i])
            floor_coord = coords[i].copy()

    if floor_coord is None:
        raise ValueError("grid contains no off-origin points")

    def _exact(coord: np.ndarray) -> float:
        cfg = PhaseConfig(tuple(coord * step), thetas)
        return rate_analytic(cfg, spectrum).total

    zeros = []
    floor = _exact(floor_coord)
    floor_at = tuple(float(v) for v in floor_coord * step)
    for coord in candidates:
        val = _exact(coord)
        if val <= ZERO_RATE_TOL:
            zeros.append(coord * step)
        if val < floor:
            floor = val
            floor_at = tuple(float(v) for v in coord * step)

    rays = _fit_rays(np.array(zeros)) if zeros else ()
    exclusive = not zeros and floor > ZERO_RATE_TOL
    return ZeroVerdict(
        exclusive=exclusive,
        witness_rays=rays,
        scan_floor=floor,
        grid_spec=grid.describe(k),
        zero_points=tuple(tuple(float(v) for v in z) for z in zeros),
        floor_at=floor_at,
    )


def verify_k4_exclusive(
    theta2: float,
    theta4: float,
    grid: ScanGrid = ScanGrid(),
    spectrum: BiphotonSpectrum = REFERENCE_SPECTRUM,
) -> ZeroVerdict:
    """Solve theta3 for the k = 4 origin null and scan for exclusivity.

    Also re-checks the two analytic sub-arguments behind the k = 4 claim:
    (a) with tau2 = tau4 = 0 and tau3 != 0 the diagonal real part is not
    identically zero, and (b) with tau2 = tau3 = tau4 = 0 the permanent
    collapses to i sin((omega - omega') tau1).  Their failure would mean the
    engine broke, so they raise; the scan verdict itself reports whatever
    the grid shows.
    """
    theta3 = solve_theta3_k4(theta2, theta4)
    thetas = (0.0, theta2, theta3, theta4)

    w0 = spectrum.omega0
    omega_probe = np.linspace(w0 - 4.0, w0 + 4.0, 21)
    for tau3 in (0.5, 1.0, 2.0):
        cfg = PhaseConfig((0.0, 0.0, tau3, 0.0), thetas)
        diag = np.real(perm(cfg, omega_probe, omega_probe))
        if np.abs(diag).max() < 1e-6:
            raise ArithmeticError(
                "diagonal permanent vanished identically on the tau3 family"
            )
    for tau1 in (0.7, 1.3):
        cfg = PhaseConfig((tau1, 0.0, 0.0, 0.0), thetas)
        ww, wp = np.meshgrid(omega_probe, omega_probe)
        resid = np.abs(perm(cfg, ww, wp) - 1j * np.sin((ww - wp) * tau1)).max()
        if resid > 1e-12:
            raise ArithmeticError(
                f"permanent did not collapse to i sin(nu tau1); residual {resid:.2e}"
            )

    return scan_zero_manifold(4, thetas, grid, spectrum)


@dataclass(frozen=True)
class ScanReport:
    """Rate grid summary: extremes plus the zero-manifold verdict."""

    k: int
    thetas: tuple[float, ...]
    grid_spec: str
    rate_min: float
    rate_min_at: tuple[float, ...]
    rate_max: float
    rate_max_at: tuple[float, ...]
    n_points: int
    verdict: ZeroVerdict


def scan_report(
    k: int,
    thetas,
    grid: ScanGrid = ScanGrid(),
    spectrum: BiphotonSpectrum = REFERENCE_SPECTRUM,
) -> ScanReport:
    """Full-grid extremes (origin included) together with the zero verdict."""
    thetas = tuple(float(t) for t in thetas)
    rate_min = np.inf
    rate_max = -np.inf
    at_min = at_max = None
    n = 0
    step = grid.step
    for coords, rates in lattice_rate_chunks(k, thetas, spectrum, step, grid.nhalf):
        n += len(rates)
        i = int(np.argmin(rates))
        j = int(np.argmax(rates))
        if rates[i] < rate_min:
            rate_min, at_min = float(rates[i]), tuple(coords[i] * step)
        if rates[j] > rate_max:
            rate_max, at_max = float(rates[j]), tuple(coords[j] * step)
    verdict = scan_zero_manifold(k, thetas, grid, spectrum)
    return ScanReport(
        k=k,
        thetas=thetas,
        grid_spec=grid.describe(k),
        rate_min=rate_min,
        rate_min_at=at_min,
        rate_max=rate_max,
        rate_max_at=at_max,
        n_points=n,
        verdict=verdict,
    )


# ---------------------------------------------------------------------------
# Delay-recovery calibration (two-step extremum procedure)
# ---------------------------------------------------------------------------


class CalibrationError(ValueError):
    """Profile unusable for extremum-based recovery."""


@dataclass(frozen=True)
class CalibrationGeometry:
    """Mapping between controllable lengths and delays: tau_j = (dl0_j + x_j) / (2 c).

    Lengths are in units c / dOmega_minus, so ``c = 1`` keeps delays in units
    1 / dOmega_minus.
    """

    c: float = 1.0


@dataclass(frozen=True)
class Profile1D:
    """Rate samples over the scanned x3 length offset."""

    x: np.ndarray
    rate: np.ndarray

    def __post_init__(self):
        if len(self.x) != len(self.rate) or len(self.x) < 5:
            raise CalibrationError("profile needs matching x/rate arrays, >= 5 samples")


@dataclass(frozen=True)
class CalibrationEstimate:
    """Recovered fixed length differences and the extrema they came from.

    Recovery is location-based: dl1 and dl2 come out as magnitudes (the
    coarse rate is even in every delay, so their signs are unobservable);
    dl3 is signed through the common centre of the extrema pair.
    ``uncertainty`` is the conservative one-grid-step bound.
    """

    dl1: float
    dl2: float
    dl3: float
    extrema_locations: dict[str, float]
    uncertainty: float
    degenerate_dip: bool = False


def _significant_extrema(profile: Profile1D, kind: str) -> list[tuple[float, float]]:
    """Locate interior extrema, parabola-refined, largest plateau deviation first.

    Significance is judged relative to the largest deviation from the plateau
    estimate (the profile median), so uniform rescaling of the rate axis
    cannot change which extrema are found or where.
    """
    y = np.asarray(profile.rate, dtype=float)
    x = np.asarray(profile.x, dtype=float)
    sgn = 1.0 if kind == "min" else -1.0
    yy = sgn * y
    idx = [
        i
        for i in range(1, len(yy) - 1)
        if yy[i] < yy[i - 1] and yy[i] <= yy[i + 1]
    ]
    plateau = float(np.median(y))
    dev = np.abs(y - plateau)
    if not idx or dev.max() <= 0.0:
        return []
    significant = [i for i in idx if dev[i] >= 0.2 * dev.max()]
    out = []
    for i in significant:
        denom = y[i - 1] - 2.0 * y[i] + y[i + 1]
        shift = 0.0 if denom == 0.0 else 0.5 * (y[i - 1] - y[i + 1]) / denom
        h = x[1] - x[0]
        out.append((float(x[i] + shift * h), float(dev[i])))
    out.sort(key=lambda t: -t[1])
    return out


def calibrate_from_scans(
    scan_dip: Profile1D,
    scan_peak: Profile1D,
    geometry: CalibrationGeometry = CalibrationGeometry(),
) -> CalibrationEstimate:
    """Invert the two 1-D rate profiles into the fixed length differences.

    Step one (dip profile, recorded with x1 = 0 and tau2 large): the two
    minima sit where tau3 = +-tau1, i.e. x = +-dl1 - dl3, giving
    dl1 = (x_r - x_l)/2 and dl3 = -(x_r + x_l)/2.  Step two (peak profile,
    x2 = 0 and tau1 large): maxima at tau3 = +-tau2 give dl2 = (x_r - x_l)/2.
    A single merged dip means dl1 = 0 within resolution and is reported as
    the degenerate-dip condition.
    """
    h = float(scan_dip.x[1] - scan_dip.x[0])

    mins = _significant_extrema(scan_dip, "min")
    if not mins:
        raise CalibrationError("no significant minima in the dip profile")
    degenerate = len(mins) == 1
    if degenerate:
        x_min_r = x_min_l = mins[0][0]
        dl1 = 0.0
        dl3 = -mins[0][0]
    else:
        (xa, da), (xb, db) = mins[0], mins[1]
        if abs(da - db) > 0.25 * max(da, db):
            raise CalibrationError(
                f"dip depths too asymmetric ({da:.4g} vs {db:.4g}); "
                "profile not in the two-symmetric-dips regime"
            )
        x_min_r, x_min_l = max(xa, xb), min(xa, xb)
        dl1 = 0.5 * (x_min_r - x_min_l)
        dl3 = -0.5 * (x_min_r + x_min_l)

    maxs = _significant_extrema(scan_peak, "max")
    if not maxs:
        raise CalibrationError("no significant maxima in the peak profile")
    if len(maxs) == 1:
        x_max_r = x_max_l = maxs[0][0]
        dl2 = 0.0
    else:
        (xa, da), (xb, db) = maxs[0], maxs[1]
        if abs(da - db) > 0.25 * max(da, db):
            raise CalibrationError(
                f"peak heights too asymmetric ({da:.4g} vs {db:.4g})"
            )
        x_max_r, x_max_l = max(xa, xb), min(xa, xb)
        dl2 = 0.5 * (x_max_r - x_max_l)

    return CalibrationEstimate(
        dl1=dl1,
        dl2=dl2,
        dl3=dl3,
        extrema_locations={
            "x_min_left": x_min_l,
            "x_min_right": x_min_r,
            "x_max_left": x_max_l,
            "x_max_right": x_max_r,
        },
        uncertainty=h,
        degenerate_dip=degenerate,
    )


def synthesize_profiles(
    dl0: tuple[float, float, float],
    x_values: np.ndarray,
    geometry: CalibrationGeometry = CalibrationGeometry(),
    domega_minus: float = 1.0,
    large_offset: float = 25.0,
) -> tuple[Profile1D, Profile1D]:
    """Generate the two self-test profiles from the coarse k = 3 rate.

    Step one applies ``large_offset`` to x2 (so tau2 is far in its plateau)
    and scans x3 with x1 = 0; step two sets x1 from the *recoverable* dl1
    magnitude so tau1 is large with x2 = 0.
    """
    c2 = 2.0 * geometry.c
    x = np.asarray(x_values, dtype=float)
    tau3 = (dl0[2] + x) / c2

    tau_dip = np.stack(
        [np.full_like(x, dl0[0] / c2), np.full_like(x, (dl0[1] + large_offset) / c2), tau3],
        axis=1,
    )
    dip = Profile1D(x=x, rate=rbar_batch(tau_dip, 3, domega_minus))

    x1 = large_offset - abs(dl0[0])
    tau_peak = np.stack(
        [np.full_like(x, (dl0[0] + x1) / c2), np.full_like(x, dl0[1] / c2), tau3],
        axis=1,
    )
    peak = Profile1D(x=x, rate=rbar_batch(tau_peak, 3, domega_minus))
    return dip, peak
