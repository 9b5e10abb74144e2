"""Gray-coded QAM: scaling, roundtrips, neighbor structure, exact BER curve.

The closed-form BER is cross-checked two independent ways: against the
elementary QPSK formula 0.5*erfc(sqrt(Eb/N0)) at order 4, and against a
Monte Carlo run through the actual mapper/demapper at order 16.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfdmlib import ParameterError
from gfdmlib.qam import QAM_ORDERS, constellation, qam_ber_awgn, qam_demap, qam_map


def axis_levels(order):
    """Sorted distinct I-axis amplitudes of the library's constellation."""
    return np.unique(constellation(order).real)


class TestConstellation:
    @pytest.mark.parametrize("order", QAM_ORDERS)
    def test_unit_average_energy(self, order):
        pts = constellation(order)
        assert np.mean(np.abs(pts) ** 2) == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("order,scale", [
        (4, 1 / math.sqrt(2)), (16, 1 / math.sqrt(10)), (64, 1 / math.sqrt(42)),
    ])
    def test_axis_spacing(self, order, scale):
        levels = axis_levels(order)
        assert len(levels) == int(math.sqrt(order))
        assert np.allclose(np.diff(levels), 2 * scale, rtol=1e-12)
        assert levels[0] == pytest.approx(-(len(levels) - 1) * scale, rel=1e-12)

    @pytest.mark.parametrize("order", QAM_ORDERS)
    def test_all_points_distinct(self, order):
        pts = constellation(order)
        assert len({(p.real, p.imag) for p in pts}) == order

    @pytest.mark.parametrize("order", QAM_ORDERS)
    def test_gray_neighbors_differ_in_one_bit(self, order):
        pts = constellation(order)
        step = 2 / math.sqrt(2 * (order - 1) / 3)
        for a in range(order):
            for b in range(a + 1, order):
                if abs(abs(pts[a] - pts[b]) - step) < 1e-9 * step:
                    assert bin(a ^ b).count("1") == 1, (a, b)

    @pytest.mark.parametrize("bad", [2, 8, 32, 128, 0, -4])
    def test_rejects_non_square_orders(self, bad):
        with pytest.raises(ParameterError):
            constellation(bad)


class TestRoundtrip:
    @pytest.mark.parametrize("order", QAM_ORDERS)
    def test_every_label_survives(self, order):
        per = int(math.log2(order))
        labels = np.arange(order)
        bits = ((labels[:, None] >> np.arange(per - 1, -1, -1)) & 1).ravel()
        assert np.array_equal(qam_demap(qam_map(bits, order), order), bits)

    @pytest.mark.parametrize("order", QAM_ORDERS)
    def test_map_is_label_indexed(self, order):
        per = int(math.log2(order))
        labels = np.arange(order)
        bits = ((labels[:, None] >> np.arange(per - 1, -1, -1)) & 1).ravel()
        assert np.array_equal(qam_map(bits, order), constellation(order))

    @given(st.integers(min_value=1, max_value=64),
           st.sampled_from(QAM_ORDERS),
           st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_random_bits(self, nsym, order, seed):
        rng = np.random.default_rng(seed)
        bits = rng.integers(0, 2, nsym * int(math.log2(order)), dtype=np.uint8)
        assert np.array_equal(qam_demap(qam_map(bits, order), order), bits)

    def test_batched_shapes(self):
        rng = np.random.default_rng(3)
        bits = rng.integers(0, 2, (5, 3, 16), dtype=np.uint8)
        syms = qam_map(bits, 16)
        assert syms.shape == (5, 3, 4)
        assert np.array_equal(qam_demap(syms, 16), bits)

    def test_indivisible_bit_count(self):
        with pytest.raises(ParameterError):
            qam_map([0, 1, 1], 16)


class TestMidpointTies:
    """A value exactly on a decision boundary goes to the smaller Gray label."""

    def test_16qam_inner_boundary(self):
        # Between axis levels -1 and +1 the labels are 1 and 3; zero must
        # decide as the lower level (label 1 on both axes -> 0101).
        assert np.array_equal(qam_demap(np.array([0j]), 16).ravel(),
                              [0, 1, 0, 1])

    def test_16qam_upper_boundary_flips_up(self):
        # Between levels +1 (label 3) and +3 (label 2) the upper level has
        # the smaller label, so the tie goes upward.
        levels = axis_levels(16)
        mid = (levels[2] + levels[3]) / 2
        bits = qam_demap(np.array([mid + 1j * mid]), 16).ravel()
        assert np.array_equal(bits, [1, 0, 1, 0])

    def test_16qam_lower_boundary_stays_down(self):
        levels = axis_levels(16)
        mid = (levels[0] + levels[1]) / 2
        bits = qam_demap(np.array([mid + 1j * mid]), 16).ravel()
        assert np.array_equal(bits, [0, 0, 0, 0])

    def test_64qam_boundaries(self):
        # Per-axis Gray sequence 0,1,3,2,6,7,5,4: ties flip upward exactly
        # after levels 2, 5 and 6.
        levels = axis_levels(64)
        gray = [0, 1, 3, 2, 6, 7, 5, 4]
        for j in range(7):
            mid = (levels[j] + levels[j + 1]) / 2
            bits = qam_demap(np.array([mid + 0j]), 64).ravel()
            w_i = int("".join(map(str, bits[:3])), 2)
            expect = j + 1 if gray[j + 1] < gray[j] else j
            assert w_i == gray[expect], j


class TestBerCurve:
    def test_qpsk_matches_elementary_formula(self):
        for db in (0.0, 4.0, 8.0, 12.0):
            gamma_b = 10 ** (db / 10)
            assert qam_ber_awgn(4, db, "ebn0") == pytest.approx(
                0.5 * math.erfc(math.sqrt(gamma_b)), rel=1e-12)

    def test_16qam_anchor(self):
        assert qam_ber_awgn(16, 10.0, "ebn0") == pytest.approx(
            0.0017541506178927265, rel=1e-12)

    def test_unit_conversion(self):
        shift = 10 * math.log10(4)
        assert qam_ber_awgn(16, 16.0, "esn0") == pytest.approx(
            qam_ber_awgn(16, 16.0 - shift, "ebn0"), rel=1e-12)

    def test_code_rate_shifts_ebn0(self):
        assert qam_ber_awgn(16, 8.0, "ebn0", code_rate=0.5) == pytest.approx(
            qam_ber_awgn(16, 8.0 - 10 * math.log10(2), "ebn0"), rel=1e-12)

    def test_monotone_decreasing(self):
        for order in QAM_ORDERS:
            vals = [qam_ber_awgn(order, db, "ebn0") for db in range(0, 16, 2)]
            assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_bad_unit(self):
        with pytest.raises(ParameterError):
            qam_ber_awgn(16, 10.0, "snr")

    def test_monte_carlo_agreement(self):
        order, ebn0_db, nbits = 16, 10.0, 400_000
        rng = np.random.default_rng(7)
        bits = rng.integers(0, 2, nbits, dtype=np.uint8)
        syms = qam_map(bits, order)
        esn0 = 10 ** ((ebn0_db + 10 * math.log10(4)) / 10)
        sigma = math.sqrt(1.0 / (2.0 * esn0))
        noisy = syms + sigma * (rng.standard_normal(syms.size)
                                + 1j * rng.standard_normal(syms.size))
        ber = np.mean(qam_demap(noisy, order) != bits)
        p = qam_ber_awgn(order, ebn0_db, "ebn0")
        assert abs(ber - p) < 4 * math.sqrt(p * (1 - p) / nbits)
