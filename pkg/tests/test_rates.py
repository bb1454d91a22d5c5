import math
import warnings

import numpy as np
import pytest

from homcascade import (
    BiphotonSpectrum,
    CoarseGrainWindow,
    PhaseConfig,
    delta_r_closed_k3,
    rate_analytic,
    rate_coarse_analytic,
    rate_coarse_numeric,
    rate_quadrature,
    rates_batch,
    rbar_batch,
)
from homcascade.rates import lattice_rate_chunks

RNG = np.random.default_rng(3)
SPEC = BiphotonSpectrum()  # omega0=20, dplus=0.25, dminus=1


def random_config(k, rng=RNG, tau_scale=3.0):
    tau = rng.uniform(-tau_scale, tau_scale, k)
    theta = np.concatenate([[0.0], rng.uniform(0.0, 2.0 * math.pi, k - 1)])
    return PhaseConfig(tau, theta)


# closed forms used as oracles, transcribed independently of the engine


def mandel_dip(t1, dm=1.0):
    return 0.5 * (1.0 - math.exp(-2.0 * t1**2 * dm**2))


def coarse_k2(t1, t2, dm=1.0):
    return 0.5 + (
        2.0 * math.exp(-2.0 * t2**2 * dm**2)
        - math.exp(-2.0 * (t1 + t2) ** 2 * dm**2)
        - math.exp(-2.0 * (t1 - t2) ** 2 * dm**2)
    ) / 8.0


def coarse_k3(t1, t2, t3, dm=1.0):
    e = lambda u: math.exp(-2.0 * u**2 * dm**2)
    return 0.5 + (
        2.0 * e(t2 - t3)
        + 2.0 * e(t2 + t3)
        - 4.0 * e(t1 - t3)
        - 4.0 * e(t1 + t3)
        - e(t1 + t2 - t3)
        - e(t1 - t2 + t3)
        - e(t1 - t2 - t3)
        - e(t1 + t2 + t3)
    ) / 32.0


# --- analytic rate ------------------------------------------------------------


def test_mandel_dip_closed_form():
    for t1 in np.linspace(-5, 5, 41):
        res = rate_analytic(PhaseConfig([t1]), SPEC)
        assert res.total == pytest.approx(mandel_dip(t1), abs=1e-12)
        assert res.delta == 0.0  # single stage has no carrier terms


def test_split_is_exact_partition():
    for k in range(1, 5):
        cfg = random_config(k)
        res = rate_analytic(cfg, SPEC)
        assert res.total == res.rbar + res.delta
        assert res.method == "analytic"
        assert res.term_count > 0


def test_rate_in_physical_range():
    for k in range(1, 5):
        for _ in range(25):
            cfg = random_config(k)
            res = rate_analytic(cfg, SPEC)
            assert -1e-12 <= res.total <= 1.0 + 1e-12


def test_exclusive_origins_give_zero():
    k2 = PhaseConfig([0.0, 0.0], [0.0, math.pi / 2])
    assert abs(rate_analytic(k2, SPEC).total) < 1e-12
    k4 = PhaseConfig([0.0] * 4, [0.0, math.pi / 3, math.acos(1.0 / 3.0), math.pi / 3])
    assert abs(rate_analytic(k4, SPEC).total) < 1e-12


def test_module_count_guard():
    with pytest.raises(ValueError):
        rate_analytic(PhaseConfig([0.0] * 9), SPEC)


# --- quadrature oracle ----------------------------------------------------------


def test_quadrature_matches_mandel_value():
    spec = BiphotonSpectrum(omega0=5.0)
    res = rate_quadrature(PhaseConfig([1.0]), spec, nodes=128)
    assert res.total == pytest.approx(mandel_dip(1.0), abs=1e-8)
    assert res.converged
    assert res.node_count == 128
    assert res.rbar is None and res.delta is None


def test_quadrature_zero_at_exclusive_origin():
    cfg = PhaseConfig([0.0, 0.0], [0.0, math.pi / 2])
    assert abs(rate_quadrature(cfg, BiphotonSpectrum(omega0=5.0), nodes=64).total) < 1e-10


def test_quadrature_cross_checks_analytic():
    spec = BiphotonSpectrum(omega0=2.0)
    for k in (2, 3):
        for _ in range(4):
            cfg = random_config(k, tau_scale=1.5)
            ana = rate_analytic(cfg, spec).total
            quad = rate_quadrature(cfg, spec, nodes=128).total
            assert quad == pytest.approx(ana, abs=1e-8)


def test_quadrature_node_floor():
    with pytest.raises(ValueError):
        rate_quadrature(PhaseConfig([1.0]), SPEC, nodes=8)


# --- coarse closed forms ---------------------------------------------------------


def test_coarse_k2_matches_literal():
    for _ in range(100):
        cfg = random_config(2, tau_scale=4.0)
        assert rate_coarse_analytic(cfg, SPEC) == pytest.approx(
            coarse_k2(*cfg.tau), abs=1e-12
        )


def test_coarse_k3_matches_literal():
    for _ in range(100):
        cfg = random_config(3, tau_scale=4.0)
        assert rate_coarse_analytic(cfg, SPEC) == pytest.approx(
            coarse_k3(*cfg.tau), abs=1e-12
        )


def test_coarse_is_plate_and_pump_independent():
    tau = RNG.uniform(-3, 3, 3)
    base = rate_coarse_analytic(PhaseConfig(tau), SPEC)
    for _ in range(10):
        theta = np.concatenate([[0.0], RNG.uniform(0, 2 * math.pi, 2)])
        spec = BiphotonSpectrum(
            omega0=RNG.uniform(1, 300), domega_plus=RNG.uniform(0.05, 2.0)
        )
        assert rate_coarse_analytic(PhaseConfig(tau, theta), spec) == pytest.approx(
            base, abs=1e-12
        )


def test_coarse_plateau_values():
    # far plateau at 1/2; all-zero delays sit at 1/4 for three stages
    assert rate_coarse_analytic(PhaseConfig([0.0, 1.0, 9.0]), SPEC) == pytest.approx(
        0.5, abs=1e-12
    )
    assert rate_coarse_analytic(PhaseConfig([0.0, 0.0, 0.0]), SPEC) == pytest.approx(
        0.25, abs=1e-12
    )
    assert rate_coarse_analytic(PhaseConfig([0.0, 0.0]), SPEC) == pytest.approx(
        0.5, abs=1e-12
    )


def test_coarse_delay_sign_symmetry():
    for _ in range(20):
        t1, t2, t3 = RNG.uniform(-3, 3, 3)
        base = rate_coarse_analytic(PhaseConfig([t1, t2, t3]), SPEC)
        assert rate_coarse_analytic(PhaseConfig([t1, t2, -t3]), SPEC) == pytest.approx(
            base, abs=1e-14
        )
        assert rate_coarse_analytic(PhaseConfig([t1, -t2, t3]), SPEC) == pytest.approx(
            base, abs=1e-14
        )


# --- numeric coarse graining ------------------------------------------------------


def test_box_average_k1_smear_is_small():
    spec = BiphotonSpectrum(omega0=200.0, domega_plus=0.1)
    win = CoarseGrainWindow(0.3, 41)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        avg = rate_coarse_numeric(PhaseConfig([0.7]), spec, win)
    assert abs(avg - rate_coarse_analytic(PhaseConfig([0.7]), spec)) < 0.005


def test_box_average_degenerate_window_returns_pointwise_rate():
    cfg = random_config(2)
    win = CoarseGrainWindow(1e-6, 5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        avg = rate_coarse_numeric(cfg, SPEC, win)
    assert avg == pytest.approx(rate_analytic(cfg, SPEC).total, abs=1e-9)


def test_box_average_suppresses_carriers():
    spec = BiphotonSpectrum(omega0=200.0, domega_plus=0.1)
    win = CoarseGrainWindow(0.3, 121)
    cfg = PhaseConfig([0.2, -0.15], [0.0, 2.0])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        avg = rate_coarse_numeric(cfg, spec, win)
    assert abs(avg - rate_coarse_analytic(cfg, spec)) < 0.005
    # the pointwise rate sits far from the coarse value here
    assert abs(rate_analytic(cfg, spec).total - rate_coarse_analytic(cfg, spec)) > 0.02


def test_regime_and_aliasing_warnings():
    spec = BiphotonSpectrum(omega0=200.0, domega_plus=0.1)
    cfg = PhaseConfig([0.3, 0.2], [0.0, 1.0])
    with pytest.warns(UserWarning, match="regime"):
        rate_coarse_numeric(cfg, spec, CoarseGrainWindow(0.3, 121))
    with pytest.warns(UserWarning, match="undersamples"):
        rate_coarse_numeric(cfg, spec, CoarseGrainWindow(0.09, 5))


# --- fast-part closed form ---------------------------------------------------


def test_fast_part_oracle_for_three_stages():
    spec = BiphotonSpectrum(omega0=50.0, domega_plus=0.2)
    theta = [0.0, math.pi / 2.0, 0.0]
    for _ in range(40):
        tau = RNG.uniform(-3, 3, 3)
        engine = rate_analytic(PhaseConfig(tau, theta), spec).delta
        assert delta_r_closed_k3(tau, spec) == pytest.approx(engine, abs=1e-9)


# --- batch evaluators ---------------------------------------------------------------


def test_rates_batch_agrees_with_scalar_path():
    for k in (1, 2, 4):
        cfg = random_config(k)
        pts = RNG.uniform(-3, 3, (40, k))
        batch = rates_batch(pts, cfg.theta, SPEC)
        for i in range(0, 40, 7):
            single = rate_analytic(PhaseConfig(pts[i], cfg.theta), SPEC).total
            assert batch[i] == pytest.approx(single, abs=1e-12)


def test_rbar_batch_agrees_with_coarse_scalar():
    pts = RNG.uniform(-3, 3, (25, 3))
    batch = rbar_batch(pts, 3, 1.0)
    for i in range(0, 25, 5):
        assert batch[i] == pytest.approx(
            rate_coarse_analytic(PhaseConfig(pts[i]), SPEC), abs=1e-12
        )
    with pytest.raises(ValueError):
        rbar_batch(pts, 4)


def test_lattice_chunks_match_batch_path():
    theta = (0.0, 2.1, 0.7)
    got = {}
    for coords, rates in lattice_rate_chunks(3, theta, SPEC, 0.5, 3, chunk=100):
        for c, r in zip(coords, rates):
            got[tuple(c)] = float(r)
    assert len(got) == 7**3
    pts = np.array(sorted(got)) * 0.5
    exact = rates_batch(pts, theta, SPEC)
    lattice_vals = np.array([got[tuple(np.round(p / 0.5).astype(int))] for p in pts])
    assert np.abs(lattice_vals - exact).max() < 1e-5
