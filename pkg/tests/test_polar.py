import itertools
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from onebitfec import polar as P
from onebitfec.channel import ChannelParams, awgn_quantize, bpsk_modulate, demap_llr

DATA = Path(__file__).parent / "data"
F = np.array([[1, 0], [1, 1]], dtype=np.uint8)


def kron_power(n):
    g = np.ones((1, 1), dtype=np.uint8)
    for _ in range(n):
        g = np.kron(g, F)
    return g


def noisy_llr(x, snr_db, rng):
    cp = ChannelParams.from_snr(snr_db)
    return demap_llr(awgn_quantize(bpsk_modulate(x), cp, rng), cp.p)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_transform_is_kronecker_power_and_involution(n):
    N = 1 << n
    g = kron_power(n)
    assert np.array_equal(g.astype(int) @ g % 2, np.eye(N, dtype=int))
    for d in itertools.product((0, 1), repeat=N) if N <= 8 else np.eye(N, dtype=np.uint8):
        d = np.array(d, dtype=np.uint8)
        assert np.array_equal(P.polar_transform(d), d.astype(int) @ g % 2)


def test_transform_small_examples():
    # natural-order lower-triangular kernel: the mirrored images of x=(d0, d0^d1)
    assert P.polar_transform([0, 1]).tolist() == [1, 1]
    assert P.polar_transform([1, 0]).tolist() == [1, 0]
    assert P.polar_transform([0, 0, 0, 1]).tolist() == [1, 1, 1, 1]
    assert P.polar_transform(np.zeros(64, dtype=np.uint8)).sum() == 0


def test_rm_construction():
    assert P.construct_rm(8, 4).tolist() == [3, 5, 6, 7]
    assert P.construct_rm(16, 16).tolist() == list(range(16))
    assert P.construct_rm(16, 1).tolist() == [15]


def test_pw_construction():
    beta = 2 ** 0.25
    w = P.polarization_weights(8)
    expected = [sum(beta ** j for j in range(3) if i >> j & 1) for i in range(8)]
    assert w == pytest.approx(expected)
    assert w[6] == pytest.approx(beta + beta ** 2)
    assert w[5] == pytest.approx(1 + beta ** 2)
    assert sorted(P.construct_pw(8, 4).tolist()) == [3, 5, 6, 7]
    for N in (8, 16, 64):
        assert 0 not in P.construct_pw(N, N - 1)
    # index weights do not depend on N, so the order is nested
    w16 = P.polarization_weights(16)
    assert np.array_equal(np.argsort(w16[:8], kind="stable"), np.argsort(w, kind="stable"))


def test_ga_construction():
    golden = np.loadtxt(DATA / "ga_n1024_k528_2db.txt", dtype=np.int64)
    assert np.array_equal(P.construct_ga(1024, 528, 2.0), golden)
    for N in (8, 64, 1024):
        for k in (1, N // 3, N):
            s = P.construct_ga(N, k, 1.0)
            assert N - 1 in s and len(s) == k
    assert P.construct_ga(32, 32, 0.0).tolist() == list(range(32))


def test_5g_construction():
    seq = P.nr5g_sequence()
    # a published prefix and suffix of the reliability sequence
    assert seq[:12].tolist() == [0, 1, 2, 4, 8, 16, 32, 3, 5, 64, 9, 6]
    assert seq[-4:].tolist() == [1019, 1021, 1022, 1023]
    sub = seq[seq < 512]
    for k in (1, 100, 300, 512):
        assert set(P.construct_5g(512, k)) == set(sub[-k:].tolist())
    prev = set()
    for k in range(0, 1025, 64):
        cur = set(P.construct_5g(1024, k).tolist())
        assert prev <= cur
        prev = cur
    assert len(prev) == 1024
    with pytest.raises(P.SequenceUnavailable):
        P.construct_5g(2048, 10)


def test_crc16():
    rng = np.random.default_rng(4)
    msg = rng.integers(0, 2, 64, dtype=np.uint8)
    word = np.concatenate([msg, P.crc16(msg)])
    assert P.crc_check(word)
    for i in range(len(word)):
        w = word.copy()
        w[i] ^= 1
        assert not P.crc_check(w)
    # zero register start, no final xor: the empty word has an all-zero CRC
    assert P.crc16(np.zeros(0, dtype=np.uint8)).tolist() == [0] * 16


def test_crc16_known_vector():
    # CRC-16/XMODEM (poly 0x1021, init 0, no reflection) of b"123456789" is 0x31C3
    bits = np.unpackbits(np.frombuffer(b"123456789", dtype=np.uint8))
    reg = int("".join(map(str, P.crc16(bits))), 2)
    assert reg == 0x31C3


@pytest.mark.parametrize("con", P.CONSTRUCTIONS)
def test_noiseless_roundtrip(con):
    rng = np.random.default_rng(5)
    code = P.make_polar_code(1024, 512, con, 16, 2.0 if con == "GA" else None)
    for _ in range(3):
        msg = rng.integers(0, 2, 512, dtype=np.uint8)
        x = P.polar_encode(code, P.attach_crc(code, msg))
        llr = 30.0 * (1 - 2 * x.astype(float))
        for res in (P.sc_decode(code, llr), P.scl_decode(code, llr, 32)):
            assert res.crc_ok and np.array_equal(res.message, msg)


def test_all_frozen_code():
    code = P.make_polar_code(16, 0, "RM", 0)
    llr = np.random.default_rng(0).normal(size=16)
    assert P.sc_decode(code, llr).message.size == 0
    assert P.scl_decode(code, llr, 4).message.size == 0


def test_single_flip_on_repetition_code():
    code = P.make_polar_code(8, 1, "RM", 0)
    for u in (0, 1):
        x = P.polar_encode(code, np.array([u], dtype=np.uint8))
        assert x.tolist() == [u] * 8
        for pos in range(8):
            llr = 10.0 * (1 - 2 * x.astype(float))
            llr[pos] = -llr[pos]
            assert P.sc_decode(code, llr).message.tolist() == [u]


def test_scl_list_one_equals_sc():
    rng = np.random.default_rng(6)
    code = P.make_polar_code(256, 112, "GA", 16, 2.0)
    for _ in range(500):
        msg = rng.integers(0, 2, code.K, dtype=np.uint8)
        llr = noisy_llr(P.polar_encode(code, P.attach_crc(code, msg)), 2.0, rng)
        a, b = P.sc_decode(code, llr), P.scl_decode(code, llr, 1)
        assert np.array_equal(a.message, b.message) and a.crc_ok == b.crc_ok


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4, 8, 16]))
def test_larger_list_never_worse_metric_when_crc_free(seed, L):
    # without CRC the list decoder returns its best path; more paths cannot hurt it
    rng = np.random.default_rng(seed)
    code = P.make_polar_code(64, 32, "PW", 0)
    llr = rng.normal(1.0, 1.5, 64)
    small = P.scl_decode(code, llr, L)
    large = P.scl_decode(code, llr, 2 * L)
    assert large.path_metric <= small.path_metric + 1e-9


def test_wrong_lengths():
    code = P.make_polar_code(16, 4, "RM", 4)
    with pytest.raises(P.LengthMismatch):
        P.attach_crc(code, np.zeros(5, dtype=np.uint8))
    with pytest.raises(P.LengthMismatch):
        P.scl_decode(code, np.zeros(8))
    with pytest.raises(ValueError):
        P.make_polar_code(12, 4, "RM", 0)
