import math

import numpy as np
import pytest

from homcascade import (
    PhaseConfig,
    cascade_matrix,
    decompose_entries,
    diag_frequency_spectrum,
    modsquare_split,
    perm,
    perm_termsum,
    split_fk,
)
from homcascade.signsum import evaluate_lines

RNG = np.random.default_rng(7)


def random_config(k, rng=RNG, tau_scale=3.0):
    tau = rng.uniform(-tau_scale, tau_scale, k)
    theta = np.concatenate([[0.0], rng.uniform(0.0, 2.0 * math.pi, k - 1)])
    return PhaseConfig(tau, theta)


def reconstruct_entry(terms, cfg, w):
    total = 0j
    for coeff, signs in terms:
        phase = sum(s * cfg.phi(ell + 1, w) for ell, s in enumerate(signs))
        total += coeff * np.exp(1j * phase)
    return total


# --- entry decomposition ----------------------------------------------------


def test_term_counts_and_coefficient_modulus():
    for k in range(1, 7):
        dec = decompose_entries(PhaseConfig([0.0] * k))
        for terms in (dec.a, dec.b, dec.c, dec.d):
            assert len(terms) == 2 ** (k - 1)
            assert all(abs(abs(c) - 2.0 ** (-k / 2.0)) < 1e-12 for c, _ in terms)


def test_row_sign_structure():
    for k in range(1, 6):
        dec = decompose_entries(PhaseConfig([0.0] * k))
        assert all(s[0] == +1 for _, s in dec.a)
        assert all(s[0] == +1 for _, s in dec.b)
        assert all(s[0] == -1 for _, s in dec.c)
        assert all(s[0] == -1 for _, s in dec.d)


def test_k1_entries_read_off_the_splitter():
    dec = decompose_entries(PhaseConfig([0.0]))
    ((coeff_a, signs_a),) = dec.a
    ((coeff_d, signs_d),) = dec.d
    assert signs_a == (1,) and signs_d == (-1,)
    assert coeff_a == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert coeff_d == pytest.approx(-1 / math.sqrt(2), abs=1e-15)


def test_k2_entry_terms_have_half_modulus():
    dec = decompose_entries(PhaseConfig([0.0, 0.0]))
    for terms in (dec.a, dec.b, dec.c, dec.d):
        assert len(terms) == 2
        assert all(abs(abs(c) - 0.5) < 1e-15 for c, _ in terms)


def test_reconstruction_against_cascade():
    for k in range(1, 7):
        for _ in range(100):
            cfg = random_config(k)
            w = RNG.uniform(-5, 5)
            dec = decompose_entries(cfg)
            n = cascade_matrix(cfg, w)
            rec = np.array(
                [
                    [reconstruct_entry(dec.a, cfg, w), reconstruct_entry(dec.b, cfg, w)],
                    [reconstruct_entry(dec.c, cfg, w), reconstruct_entry(dec.d, cfg, w)],
                ]
            )
            assert np.abs(n - rec).max() < 1e-12


# --- permanent term sum -----------------------------------------------------


def test_k1_termsum_is_two_sine_terms():
    cfg = PhaseConfig([1.3])
    ts = perm_termsum(cfg)
    assert len(ts) == 2
    for w, wp in RNG.uniform(-4, 4, (10, 2)):
        assert ts.evaluate(w, wp) == pytest.approx(
            -1j * math.sin((w - wp) * 1.3), abs=1e-14
        )


def test_termsum_size_bound():
    # 4^(k-1) products from each of the two entry pairings
    for k in range(1, 6):
        assert len(perm_termsum(PhaseConfig([0.0] * k))) <= 2 * 4 ** (k - 1)


def test_termsum_matches_perm():
    for k in range(1, 5):
        for _ in range(50):
            cfg = random_config(k, tau_scale=8.0)
            ts = perm_termsum(cfg)
            w, wp = RNG.uniform(-8, 8, 2)
            assert abs(ts.evaluate(w, wp) - perm(cfg, w, wp)) < 1e-12


def test_termsum_origin_phase_free_point():
    for k in range(1, 5):
        cfg = PhaseConfig([0.0] * k, [0.0] + [1.1] * (k - 1))
        assert perm_termsum(cfg).evaluate(0.0, 0.0) == pytest.approx(
            perm(cfg, 0.0, 0.0), abs=1e-14
        )


def test_termsum_array_evaluation():
    cfg = random_config(3)
    ts = perm_termsum(cfg)
    w = RNG.uniform(-3, 3, (4, 5))
    wp = RNG.uniform(-3, 3, (4, 5))
    vals = ts.evaluate(w, wp)
    assert vals.shape == (4, 5)
    assert vals[2, 3] == pytest.approx(ts.evaluate(w[2, 3], wp[2, 3]), abs=1e-14)


# --- frequency-difference split ----------------------------------------------


def test_split_k1_everything_is_difference_only():
    fk, rest = split_fk(perm_termsum(PhaseConfig([0.9])))
    assert len(fk) == 2 and len(rest) == 0


def test_split_k2_quarter_plate_has_sum_part():
    cfg = PhaseConfig([0.4, 1.1], [0.0, math.pi / 2])
    fk, rest = split_fk(perm_termsum(cfg))
    assert len(rest) > 0


def test_split_pieces_recombine_and_fk_is_shift_invariant():
    for _ in range(10):
        cfg = random_config(3)
        ts = perm_termsum(cfg)
        fk, rest = split_fk(ts)
        for _ in range(10):
            w, wp, c = RNG.uniform(-4, 4, 3)
            assert fk.evaluate(w, wp) + rest.evaluate(w, wp) == pytest.approx(
                ts.evaluate(w, wp), abs=1e-13
            )
            assert fk.evaluate(w + c, wp + c) == pytest.approx(
                fk.evaluate(w, wp), abs=1e-13
            )


# --- modulus-squared split ----------------------------------------------------


def test_modsquare_k1_is_sine_squared():
    cfg = PhaseConfig([0.8])
    pbar, dpk = modsquare_split(perm_termsum(cfg))
    assert len(dpk) == 0
    for w, wp in RNG.uniform(-4, 4, (10, 2)):
        assert pbar.evaluate(w, wp) == pytest.approx(
            math.sin((w - wp) * 0.8) ** 2, abs=1e-13
        )


def test_modsquare_recombines_to_squared_modulus():
    for k in (2, 3):
        for _ in range(5):
            cfg = random_config(k)
            ts = perm_termsum(cfg)
            pbar, dpk = modsquare_split(ts)
            for _ in range(20):
                w, wp = RNG.uniform(-4, 4, 2)
                combined = pbar.evaluate(w, wp) + dpk.evaluate(w, wp)
                assert combined.imag == pytest.approx(0.0, abs=1e-12)
                assert combined.real == pytest.approx(
                    abs(ts.evaluate(w, wp)) ** 2, abs=1e-12
                )


def test_pbar_terms_carry_no_sum_frequency():
    cfg = random_config(4)
    pbar, dpk = modsquare_split(perm_termsum(cfg))
    assert all(all(v == 0 for v in kp) for _, kp, _ in pbar.terms)
    assert all(any(v != 0 for v in kp) for _, kp, _ in dpk.terms)


def test_pbar_is_plate_independent():
    tau = RNG.uniform(-3, 3, 3)
    cfg_a = PhaseConfig(tau, [0.0, 0.7, 2.1])
    cfg_b = PhaseConfig(tau, [0.0, 5.9, 1.3])
    pbar_a, _ = modsquare_split(perm_termsum(cfg_a))
    pbar_b, _ = modsquare_split(perm_termsum(cfg_b))
    for _ in range(20):
        w, wp = RNG.uniform(-4, 4, 2)
        assert pbar_a.evaluate(w, wp) == pytest.approx(
            pbar_b.evaluate(w, wp), abs=1e-12
        )


# --- diagonal frequency content ----------------------------------------------


def g_lines_by_amplitude(lines):
    g1 = [m for m in lines if abs(abs(m.amplitude) - 0.5) < 1e-9]
    g2 = [m for m in lines if abs(abs(m.amplitude) - 0.25) < 1e-9]
    return g1, g2


def test_generic_k4_frequency_content():
    lines = diag_frequency_spectrum(PhaseConfig([0.3, 1.0, 5.0, 2.0], [0.0, 0.9, 1.7, 2.5]))
    g1, g2 = g_lines_by_amplitude(lines)
    assert sorted(m.frequency for m in g1) == pytest.approx([2 * (1 - 2), 2 * (1 + 2)])
    assert sorted(m.frequency for m in g2) == pytest.approx([-12.0, -4.0, 8.0, 16.0])
    # plate combinations ride along as the cosine phases
    by_freq = {round(m.frequency, 6): m.phase for m in g2}
    assert by_freq[8.0] == pytest.approx(0.9 - 2.5 + 1.7)
    assert by_freq[-12.0] == pytest.approx(0.9 - 2.5 - 1.7)


def test_degenerate_delay_collapses_to_three_triple_lines():
    # tau3 = tau4 merges two of the triple-product frequencies
    lines = diag_frequency_spectrum(PhaseConfig([0.3, 1.0, 0.7, 0.7], [0.0, 0.9, 1.7, 2.5]))
    g1, _ = g_lines_by_amplitude(lines)
    assert len(g1) == 2
    others = [m for m in lines if m not in g1]
    assert len(others) == 3


def test_all_delays_zero_single_line_is_origin_value():
    th2, th3, th4 = 0.9, 1.7, 2.5
    lines = diag_frequency_spectrum(PhaseConfig([0.0] * 4, [0.0, th2, th3, th4]))
    assert len(lines) == 1
    assert lines[0].frequency == 0.0
    expected = math.cos(th2) * math.cos(th4) - math.sin(th2) * math.sin(th4) * math.cos(th3)
    assert lines[0].amplitude == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_lines_evaluate_to_diagonal_real_part(k):
    for _ in range(10):
        cfg = random_config(k)
        lines = diag_frequency_spectrum(cfg)
        w = RNG.uniform(-4, 4, 7)
        expected = np.real(perm(cfg, w, w))
        assert np.abs(evaluate_lines(lines, w) - expected).max() < 1e-12
