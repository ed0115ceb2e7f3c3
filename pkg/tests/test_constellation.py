"""Tests for constellation construction, Gray mapping and quantization."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lassomimo import make_constellation

# Hand-enumerated 2-bit binary-reflected Gray map over the 4-level
# alphabet: walking the levels in order must flip exactly one bit, and the
# level order (00, 01, 11, 10) pins each pair.
GRAY_4PAM = {
    (0, 0): -3.0,
    (0, 1): -1.0,
    (1, 1): +1.0,
    (1, 0): +3.0,
}


class TestMakeConstellation:
    def test_qpsk_alphabet(self):
        c = make_constellation(4)
        np.testing.assert_array_equal(c.alphabet, [-1.0, 1.0])
        assert c.m == 2
        assert c.bits_per_pam == 1

    def test_16qam_alphabet(self):
        c = make_constellation(16)
        np.testing.assert_array_equal(c.alphabet, [-3.0, -1.0, 1.0, 3.0])
        assert c.m == 4
        assert c.bits_per_pam == 2

    def test_64qam_alphabet(self):
        c = make_constellation(64)
        np.testing.assert_array_equal(c.alphabet, np.arange(-7, 8, 2))

    @pytest.mark.parametrize("order,energy", [(4, 2.0), (16, 10.0)])
    def test_symbol_energy(self, order, energy):
        assert make_constellation(order).symbol_energy == energy

    @pytest.mark.parametrize("order", [5, 8, 32, 0, -4, 256])
    def test_unsupported_order_rejected(self, order):
        with pytest.raises(ValueError, match="unsupported modulation order"):
            make_constellation(order)

    @pytest.mark.parametrize("order", [4, 16, 64])
    def test_alphabet_structure(self, order):
        chi = make_constellation(order).alphabet
        assert len(chi) == int(np.sqrt(order))
        assert np.all(np.diff(chi) == 2)  # strictly increasing, spacing 2
        assert np.all(np.abs(chi) % 2 == 1)  # all odd
        np.testing.assert_array_equal(chi, -chi[::-1])  # symmetric about zero


class TestMapBits:
    def test_binary_pam_convention(self):
        c = make_constellation(4)
        np.testing.assert_array_equal(c.map_bits([0]), [-1.0])
        np.testing.assert_array_equal(c.map_bits([1]), [1.0])

    def test_gray_map_4pam_full_table(self):
        c = make_constellation(16)
        for bits, level in GRAY_4PAM.items():
            assert c.map_bits(list(bits))[0] == level

    def test_bits_11_map_to_plus_one(self):
        assert make_constellation(16).map_bits([1, 1])[0] == 1.0

    def test_all_zero_bits(self):
        c = make_constellation(4)
        np.testing.assert_array_equal(c.map_bits([0, 0, 0, 0]), [-1.0] * 4)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="not divisible"):
            make_constellation(16).map_bits([0, 1, 0])

    def test_non_binary_rejected(self):
        with pytest.raises(ValueError, match="0 or 1"):
            make_constellation(4).map_bits([0, 2])

    @pytest.mark.parametrize("order", [16, 64])
    def test_adjacent_levels_differ_in_one_bit(self, order):
        c = make_constellation(order)
        bits = [c.demap_symbols([s]) for s in c.alphabet]
        for a, b in zip(bits, bits[1:]):
            assert np.sum(a != b) == 1


class TestDemapSymbols:
    def test_plus_three_demaps_to_10(self):
        np.testing.assert_array_equal(make_constellation(16).demap_symbols([3.0]), [1, 0])

    def test_binary_pair(self):
        np.testing.assert_array_equal(
            make_constellation(4).demap_symbols([1.0, -1.0]), [1, 0]
        )

    def test_off_alphabet_rejected(self):
        with pytest.raises(ValueError, match="outside the alphabet"):
            make_constellation(4).demap_symbols([0.5])

    @pytest.mark.parametrize("order", [4, 16, 64])
    @settings(max_examples=100, deadline=None)
    @given(data=st.data())
    def test_roundtrip(self, order, data):
        c = make_constellation(order)
        n = data.draw(st.integers(1, 12)) * c.bits_per_pam
        bits = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)))
        out = c.demap_symbols(c.map_bits(bits))
        np.testing.assert_array_equal(out, bits)

    def test_roundtrip_bulk_random(self):
        rng = np.random.default_rng(42)
        for order in (4, 16, 64):
            c = make_constellation(order)
            for _ in range(300):
                bits = rng.integers(0, 2, size=8 * c.bits_per_pam)
                np.testing.assert_array_equal(c.demap_symbols(c.map_bits(bits)), bits)


class TestQuantize:
    def test_nearest(self):
        assert make_constellation(4).quantize(0.2) == 1.0

    def test_clipping_to_extreme(self):
        assert make_constellation(16).quantize(-2.6) == -3.0
        assert make_constellation(16).quantize(11.0) == 3.0

    def test_tie_breaks_to_smaller(self):
        assert make_constellation(4).quantize(0.0) == -1.0
        assert make_constellation(16).quantize(2.0) == 1.0

    def test_vectorized_shape(self):
        c = make_constellation(16)
        out = c.quantize(np.array([[0.2, -5.0], [2.9, 0.0]]))
        np.testing.assert_array_equal(out, [[1.0, -3.0], [3.0, -1.0]])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="non-finite"):
            make_constellation(4).quantize(np.nan)

    @settings(max_examples=200, deadline=None)
    @given(v=st.floats(-20, 20), order=st.sampled_from([4, 16, 64]))
    def test_quantize_is_nearest_neighbor(self, v, order):
        c = make_constellation(order)
        q = c.quantize(v)
        dists = np.abs(v - c.alphabet)
        assert abs(v - q) == dists.min()
