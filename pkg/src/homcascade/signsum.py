"""Plane-wave decomposition of the cascade entries and of the permanent.

Every entry of N_k(omega) is a sum of 2^(k-1) complex exponentials
coeff * e^{i s.phi(omega)} over sign vectors s in {+1,-1}^k, one per path
through the stage intermediate ports; all coefficients have modulus
2^(-k/2).  Pairing frequencies turns the permanent into a finite sum of
terms

    coeff * exp(i [ (omega+omega') tau + theta ] . dplus)
          * exp(i  (omega-omega') tau . dminus),

with dplus = (s+s')/2 and dminus = (s-s')/2.  Modulus-squaring stays inside
the same family, with dplus/dminus replaced by pair differences; the part
with zero dplus survives coarse graining (it carries no omega+omega' and no
theta dependence), the rest oscillates at the carrier frequency.

Half-integer components are stored doubled, as exact integers, so that terms
merge on exact keys rather than floating-point equality.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .config import PhaseConfig

#: merged coefficients below this magnitude are treated as exact cancellations
COEFF_DROP_EPS = 1e-15

Key = tuple[int, ...]


@dataclass(frozen=True)
class EntryDecomposition:
    """Per-entry sign-vector expansions of N_k: one term list per entry role.

    Each list holds (coefficient, sign_vector) pairs; coefficients are pure
    numbers (they depend only on k), the sign vectors multiply the stage
    phases.  A-terms all start with s_1 = +1 and C-terms with s_1 = -1, the
    first-stage row structure.
    """

    k: int
    a: tuple[tuple[complex, Key], ...]
    b: tuple[tuple[complex, Key], ...]
    c: tuple[tuple[complex, Key], ...]
    d: tuple[tuple[complex, Key], ...]


@lru_cache(maxsize=None)
def _entry_terms(k: int, row: int, col: int) -> tuple[tuple[complex, Key], ...]:
    """Expand one entry of M_1 ... M_k over the 2^(k-1) intermediate-port paths.

    Row r of M_ell contributes e^{+i phi_ell} for r=0 and e^{-i phi_ell} for
    r=1; the only negative matrix element is the (1,1) corner of each stage.
    """
    scale = 2.0 ** (-k / 2.0)
    terms = []
    for path in itertools.product((0, 1), repeat=k - 1):
        idx = (row, *path, col)
        sign = 1.0
        svec = []
        for ell in range(k):
            r, c = idx[ell], idx[ell + 1]
            svec.append(1 if r == 0 else -1)
            if r == 1 and c == 1:
                sign = -sign
        terms.append((complex(sign * scale), tuple(svec)))
    return tuple(terms)


def decompose_entries(cfg: PhaseConfig) -> EntryDecomposition:
    """Sign-vector expansion of all four entries of the cascade matrix.

    Reconstruction property: for any omega, summing
    coeff * e^{i s.phi(omega)} per entry reproduces cascade_matrix(cfg, omega)
    entrywise within 1e-12.
    """
    k = cfg.k
    return EntryDecomposition(
        k=k,
        a=_entry_terms(k, 0, 0),
        b=_entry_terms(k, 0, 1),
        c=_entry_terms(k, 1, 0),
        d=_entry_terms(k, 1, 1),
    )


@dataclass(frozen=True)
class TermSum:
    """Canonical finite sum of mixed-frequency plane waves tied to a config.

    ``terms`` maps nothing implicitly: it is a tuple of
    (coefficient, dplus2, dminus2) with the direction vectors doubled so all
    components are exact integers (actual dplus = dplus2 / 2).  Canonical
    form: keys are unique and sorted, coefficients of merged duplicates were
    added, and coefficients below COEFF_DROP_EPS were dropped.
    """

    cfg: PhaseConfig
    terms: tuple[tuple[complex, Key, Key], ...]

    def __len__(self) -> int:
        return len(self.terms)

    @cached_property
    def _eval_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-term (coeff * plate phase, xi slope, nu slope), precontracted with cfg."""
        if not self.terms:
            z = np.zeros(0)
            return z.astype(complex), z, z
        tau = np.array(self.cfg.tau)
        theta = np.array(self.cfg.theta)
        coef = np.array([t[0] for t in self.terms])
        dp = np.array([t[1] for t in self.terms], dtype=float) / 2.0
        dm = np.array([t[2] for t in self.terms], dtype=float) / 2.0
        return coef * np.exp(1j * (dp @ theta)), dp @ tau, dm @ tau

    def evaluate(self, omega, omega_p):
        """Value at (omega, omega'); broadcasts over array arguments."""
        omega = np.asarray(omega, dtype=float)
        omega_p = np.asarray(omega_p, dtype=float)
        coef, slope_xi, slope_nu = self._eval_arrays
        if coef.size == 0:
            total = np.zeros(np.broadcast(omega, omega_p).shape, dtype=complex)
        else:
            xi = (omega + omega_p)[..., None]
            nu = (omega - omega_p)[..., None]
            total = np.exp(1j * (xi * slope_xi + nu * slope_nu)) @ coef
        if total.shape == ():
            return complex(total)
        return total


def _merge(raw, k: int) -> tuple[tuple[complex, Key, Key], ...]:
    """Merge raw (coeff, dplus2, dminus2) triples on exact keys, sorted output."""
    acc: dict[tuple[Key, Key], complex] = {}
    for coeff, kp2, km2 in raw:
        key = (kp2, km2)
        acc[key] = acc.get(key, 0j) + coeff
    return tuple(
        (acc[key], key[0], key[1])
        for key in sorted(acc)
        if abs(acc[key]) > COEFF_DROP_EPS
    )


@lru_cache(maxsize=None)
def _perm_terms(k: int) -> tuple[tuple[complex, Key, Key], ...]:
    """Merged permanent term list; depends on k only (2 * 4^(k-1) raw products)."""
    a = _entry_terms(k, 0, 0)
    b = _entry_terms(k, 0, 1)
    c = _entry_terms(k, 1, 0)
    d = _entry_terms(k, 1, 1)
    raw = []
    # A_k(omega) D_k(omega'): s from A rides omega, s' from D rides omega'
    for ca, sa in a:
        for cd, sd in d:
            raw.append(
                (
                    ca * cd,
                    tuple(x + y for x, y in zip(sa, sd)),
                    tuple(x - y for x, y in zip(sa, sd)),
                )
            )
    # B_k(omega') C_k(omega): s from C rides omega, s' from B rides omega'
    for cb, sb in b:
        for cc, sc in c:
            raw.append(
                (
                    cb * cc,
                    tuple(x + y for x, y in zip(sc, sb)),
                    tuple(x - y for x, y in zip(sc, sb)),
                )
            )
    return _merge(raw, k)


def perm_termsum(cfg: PhaseConfig) -> TermSum:
    """The permanent as a canonical TermSum; evaluates to perm(cfg, ., .) within 1e-12."""
    return TermSum(cfg=cfg, terms=_perm_terms(cfg.k))


def split_fk(ts: TermSum) -> tuple[TermSum, TermSum]:
    """Split off the frequency-difference-only part (all-zero dplus terms).

    The first piece collects the opposite-sign-vector diagonal, which depends
    on omega-omega' alone; the remainder carries every omega+omega' term.
    The two pieces sum back to the input.
    """
    zero = tuple([0] * ts.cfg.k)
    fk = tuple(t for t in ts.terms if t[1] == zero)
    rest = tuple(t for t in ts.terms if t[1] != zero)
    return TermSum(ts.cfg, fk), TermSum(ts.cfg, rest)


def modsquare_split(ts: TermSum) -> tuple[TermSum, TermSum]:
    """Split |ts|^2 into its coarse-surviving and fast parts.

    Pairwise products of terms with conjugated partners produce keys that are
    componentwise differences.  Pairs with identical dplus lose all
    omega+omega' and theta dependence and land in ``pbar`` (real-valued on
    evaluation); everything else lands in ``dpk``.  pbar + dpk evaluates to
    |ts(omega, omega')|^2 within 1e-12.

    The pair count is quadratic in len(ts) (4^(k-1) squared for the permanent
    of a k-stage cascade), so the products are merged with vectorized integer
    key encoding rather than per-pair dictionary updates.
    """
    k = ts.cfg.k
    m = len(ts.terms)
    if m == 0:
        return TermSum(ts.cfg, ()), TermSum(ts.cfg, ())
    coef = np.array([t[0] for t in ts.terms], dtype=complex)
    kp = np.array([t[1] for t in ts.terms], dtype=np.int64)
    km = np.array([t[2] for t in ts.terms], dtype=np.int64)

    span = int(max(np.abs(kp).max(), np.abs(km).max(), 1))
    base = 4 * span + 1  # componentwise differences live in [-2*span, 2*span]
    if base ** (2 * k) >= 2**62:
        raise ValueError(f"key encoding overflow for k = {k}")
    weights = base ** np.arange(2 * k, dtype=np.int64)

    acc: dict[int, complex] = {}
    chunk = max(1, 4_000_000 // m)
    for start in range(0, m, chunk):
        stop = min(start + chunk, m)
        dkp = kp[start:stop, None, :] - kp[None, :, :]  # (c, m, k)
        dkm = km[start:stop, None, :] - km[None, :, :]
        digits = np.concatenate([dkp, dkm], axis=2) + 2 * span
        codes = (digits * weights).sum(axis=2).ravel()
        prods = (coef[start:stop, None] * np.conj(coef)[None, :]).ravel()
        uniq, inv = np.unique(codes, return_inverse=True)
        sums = np.bincount(inv, weights=prods.real) + 1j * np.bincount(
            inv, weights=prods.imag
        )
        for code, val in zip(uniq.tolist(), sums):
            acc[code] = acc.get(code, 0j) + val

    def _decode(code: int) -> tuple[Key, Key]:
        digits = []
        for _ in range(2 * k):
            digits.append(code % base - 2 * span)
            code //= base
        return tuple(digits[:k]), tuple(digits[k:])

    raw_bar, raw_fast = [], []
    for code in sorted(acc):
        val = acc[code]
        if abs(val) <= COEFF_DROP_EPS:
            continue
        kp_key, km_key = _decode(code)
        item = (val, kp_key, km_key)
        if all(v == 0 for v in kp_key):
            raw_bar.append(item)
        else:
            raw_fast.append(item)
    return TermSum(ts.cfg, _merge(raw_bar, k)), TermSum(ts.cfg, _merge(raw_fast, k))


@dataclass(frozen=True)
class FrequencyLine:
    """One cosine component a*cos(frequency*omega + phase) of the diagonal permanent."""

    frequency: float
    phase: float
    amplitude: float


def _fold_diagonal(ts: TermSum) -> list[FrequencyLine]:
    """Cosine decomposition of Perm_k(omega, omega) from the term sum.

    On the diagonal the dminus phases vanish, so terms group by dplus; the
    diagonal permanent is real for this cascade family, which pairs each
    dplus with its negative at conjugate weight and folds the pair into a
    single cosine.  Orientation convention: first nonzero dplus component
    positive (frequencies may then come out negative).
    """
    tau = np.array(ts.cfg.tau)
    theta = np.array(ts.cfg.theta)
    byp: dict[Key, complex] = {}
    for coeff, kp2, _ in ts.terms:
        byp[kp2] = byp.get(kp2, 0j) + coeff
    byp = {key: v for key, v in byp.items() if abs(v) > COEFF_DROP_EPS}

    lines: list[FrequencyLine] = []
    seen: set[Key] = set()
    for kp2 in sorted(byp):
        if kp2 in seen:
            continue
        neg = tuple(-x for x in kp2)
        if all(v == 0 for v in kp2):
            val = byp[kp2]
            if abs(val.imag) > 1e-12:
                raise ArithmeticError("diagonal permanent is not real; broken structure")
            lines.append(FrequencyLine(0.0, 0.0, val.real))
            seen.add(kp2)
            continue
        cpos = byp[kp2]
        cneg = byp.get(neg, 0j)
        if abs(cneg - np.conj(cpos)) > 1e-12:
            raise ArithmeticError("diagonal permanent is not real; broken structure")
        seen.add(kp2)
        seen.add(neg)
        vec = np.array(kp2)
        coeff = cpos
        for v in vec:
            if v != 0:
                if v < 0:
                    vec = -vec
                    coeff = byp[tuple(vec)]
                break
        # c e^{i a} + conj(c) e^{-i a} = 2|c| cos(a + arg c), a = omega tau.kp2 + theta.kp2/2
        freq = float(tau @ vec)
        ph = float(theta @ (vec / 2.0))
        if abs(coeff.imag) <= 1e-12 * abs(coeff):
            lines.append(FrequencyLine(freq, ph, 2.0 * coeff.real))
        else:
            lines.append(
                FrequencyLine(freq, ph + float(np.angle(coeff)), 2.0 * abs(coeff))
            )
    return lines


#: signed frequencies closer than this count as one oscillation when merging
FREQ_MERGE_TOL = 1e-9


def _merge_equal_frequencies(lines: list[FrequencyLine]) -> list[FrequencyLine]:
    """Combine cosines whose signed frequencies coincide into one line.

    a*cos(x+p) + b*cos(x+q) is a single cosine with phasor a e^{ip} + b e^{iq};
    at frequency zero only the real part of the phasor is observable and the
    merged line reports it as a signed amplitude with zero phase.  Coincidence
    is tested with a small tolerance: delay degeneracies like tau3 == tau4
    produce frequencies equal only up to rounding of the sums.
    """
    ordered = sorted(lines, key=lambda m: m.frequency)
    clusters: list[list[FrequencyLine]] = []
    for line in ordered:
        if clusters and abs(line.frequency - clusters[-1][-1].frequency) <= FREQ_MERGE_TOL:
            clusters[-1].append(line)
        else:
            clusters.append([line])
    out = []
    for members in clusters:
        freq = members[0].frequency
        if len(members) == 1 and abs(freq) > FREQ_MERGE_TOL:
            out.append(members[0])
            continue
        phasor = sum(m.amplitude * np.exp(1j * m.phase) for m in members)
        if abs(freq) <= FREQ_MERGE_TOL:
            out.append(FrequencyLine(0.0, 0.0, float(np.real(phasor))))
        elif abs(phasor) <= COEFF_DROP_EPS:
            continue
        else:
            out.append(FrequencyLine(freq, float(np.angle(phasor)), float(abs(phasor))))
    out.sort(key=lambda m: (-round(abs(m.amplitude), 12), m.frequency))
    return out


def diag_frequency_spectrum(cfg: PhaseConfig) -> list[FrequencyLine]:
    """Oscillation content of Re Perm_k(omega, omega) as a list of cosine lines.

    For k = 4 this is the frequency-counting diagnostic behind the
    exclusivity argument: the product cos(2wt2+h2)cos(2wt4+h4) contributes
    two lines at frequencies 2(tau2 +- tau4) with amplitude 1/2, and the
    triple product sin*sin*cos contributes four lines at 2(tau2 +- tau4 +-
    tau3) with amplitudes -+1/4; delay degeneracies collapse coinciding
    frequencies into merged lines.  Other k fold the generic term sum
    instead.
    """
    if cfg.k == 4:
        _, t2, t3, t4 = cfg.tau
        _, h2, h3, h4 = cfg.theta
        raw = [
            FrequencyLine(2.0 * (t2 + t4), h2 + h4, 0.5),
            FrequencyLine(2.0 * (t2 - t4), h2 - h4, 0.5),
            FrequencyLine(2.0 * (t2 - t4 + t3), h2 - h4 + h3, -0.25),
            FrequencyLine(2.0 * (t2 - t4 - t3), h2 - h4 - h3, -0.25),
            FrequencyLine(2.0 * (t2 + t4 + t3), h2 + h4 + h3, 0.25),
            FrequencyLine(2.0 * (t2 + t4 - t3), h2 + h4 - h3, 0.25),
        ]
        return _merge_equal_frequencies(raw)
    return _merge_equal_frequencies(_fold_diagonal(perm_termsum(cfg)))


def evaluate_lines(lines: list[FrequencyLine], omega) -> np.ndarray:
    """Sum the cosine lines at the given omega values."""
    omega = np.asarray(omega, dtype=float)
    total = np.zeros_like(omega)
    for line in lines:
        total = total + line.amplitude * np.cos(line.frequency * omega + line.phase)
    return total
