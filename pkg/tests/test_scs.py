"""Unit tests for the dithered two-codebook quantizer, checked against a
brute-force codeword enumeration."""

import numpy as np
import pytest

from meshmark.watermark import (
    dither_sequence,
    scs_codeword,
    scs_decode_value,
    scs_embed_value,
)


def brute_force_codeword(x, bit, q_s, t, z_range=200):
    """Enumerate codewords z*q_s + bit*q_s/2 + t; nearest wins, ties to
    the smaller codeword (z ascending + strict improvement keeps it)."""
    center = int(np.floor(x / q_s))
    best, best_d = None, np.inf
    for z in range(center - z_range, center + z_range + 1):
        u = z * q_s + bit * q_s / 2.0 + t
        d = abs(u - x)
        if d < best_d:
            best, best_d = u, d
    return best


def brute_force_decode(x, q_s, t):
    d0 = abs(x - brute_force_codeword(x, 0, q_s, t))
    d1 = abs(x - brute_force_codeword(x, 1, q_s, t))
    return 0 if d0 <= d1 else 1


def test_codeword_hand_values():
    assert scs_codeword(3.2, 1, 1.0, 0.0) == 3.5
    assert scs_codeword(3.0, 0, 1.0, 0.0) == 3.0
    assert scs_codeword(3.25, 0, 1.0, 0.0) == 3.0


def test_embed_hand_value():
    assert scs_embed_value(3.2, 1, 1.0, 0.0, 0.5) == pytest.approx(3.35)


def test_embed_at_codeword_is_identity():
    for gamma in (0.25, 0.5, 1.0):
        assert scs_embed_value(3.0, 0, 1.0, 0.0, gamma) == 3.0


def test_gamma_one_is_hard_quantization():
    assert scs_embed_value(3.2, 1, 1.0, 0.0, 1.0) == 3.5


def test_decode_hand_values():
    assert scs_decode_value(3.35, 1.0, 0.0) == 1
    assert scs_decode_value(3.05, 1.0, 0.0) == 0


def test_tie_prefers_smaller_codeword():
    # x exactly midway between bit-1 codewords 2.5 and 3.5
    assert scs_codeword(3.0, 1, 1.0, 0.0) == 2.5


def test_decode_tie_prefers_bit_zero():
    # x equidistant (0.25) from bit-0 codeword 3.0 and bit-1 codeword 3.5
    assert scs_decode_value(3.25, 1.0, 0.0) == 0


@pytest.mark.parametrize("q_s", [0.01, 1.0, 7.3])
def test_codeword_matches_brute_force(q_s):
    rng = np.random.default_rng(11)
    xs = rng.uniform(-3 * q_s, 12 * q_s, size=120)
    ts = rng.uniform(0, q_s, size=120)
    for x, t in zip(xs, ts):
        for bit in (0, 1):
            assert scs_codeword(x, bit, q_s, t) == pytest.approx(
                brute_force_codeword(x, bit, q_s, t), abs=1e-12 * q_s
            )


@pytest.mark.parametrize("q_s", [0.01, 1.0, 7.3])
def test_decode_matches_brute_force(q_s):
    rng = np.random.default_rng(12)
    xs = rng.uniform(-2 * q_s, 11 * q_s, size=150)
    ts = rng.uniform(0, q_s, size=150)
    for x, t in zip(xs, ts):
        assert scs_decode_value(x, q_s, t) == brute_force_decode(x, q_s, t)


def test_embed_displacement_bound():
    rng = np.random.default_rng(13)
    for _ in range(300):
        q_s = rng.uniform(0.01, 5.0)
        x = rng.uniform(0, 10 * q_s)
        t = rng.uniform(0, q_s)
        gamma = rng.uniform(0.05, 1.0)
        bit = int(rng.integers(0, 2))
        x2 = scs_embed_value(x, bit, q_s, t, gamma)
        assert abs(x2 - x) <= gamma * q_s / 2 + 1e-12


def test_embed_then_decode_roundtrip_dense_grid():
    q_s = 0.37
    t = 0.11
    xs = (np.arange(1000) + 0.382) / 1000 * 10 * q_s
    for gamma in (0.5, 1.0):
        for bit in (0, 1):
            x2 = np.array([scs_embed_value(x, bit, q_s, t, gamma) for x in xs])
            got = np.array([scs_decode_value(v, q_s, t) for v in x2])
            assert (got == bit).all()


def test_dither_deterministic_and_in_range():
    a = dither_sequence(b"key", 64, 0.01)
    b = dither_sequence(b"key", 64, 0.01)
    assert np.array_equal(a, b)
    assert (a >= 0).all() and (a < 0.01).all()


def test_dither_key_sensitivity():
    a = dither_sequence(b"key-one", 64, 1.0)
    b = dither_sequence(b"key-two", 64, 1.0)
    assert not np.array_equal(a, b)


def test_dither_accepts_str_and_bytes():
    assert np.array_equal(
        dither_sequence("wm", 8, 1.0), dither_sequence(b"wm", 8, 1.0)
    )


def test_dither_scales_with_step():
    a = dither_sequence(b"key", 16, 1.0)
    b = dither_sequence(b"key", 16, 2.5)
    assert np.allclose(b, 2.5 * a)


def test_codeword_rejects_bad_inputs():
    with pytest.raises(ValueError):
        scs_codeword(1.0, 0, 0.0, 0.0)
    with pytest.raises(ValueError):
        scs_codeword(1.0, 0, 1.0, 1.5)
    with pytest.raises(ValueError):
        scs_codeword(1.0, 2, 1.0, 0.0)
