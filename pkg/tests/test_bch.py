import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from onebitfec import bch as B
from onebitfec.gf2m import field_new, poly_mod

TARGET_K = {512: (513, 57), 638: (638, 42), 768: (768, 26), 828: (828, 20),
           893: (893, 13), 953: (953, 7)}


def codebook(code):
    return np.array([code.encode(np.array(m, dtype=np.uint8))
                     for m in itertools.product((0, 1), repeat=code.k)])


def test_bch_15_7():
    c = B.bch_construct(4, 5)
    assert (c.n, c.k, c.t) == (15, 7, 2)
    assert c.g == 0b111010001
    assert B.generator_roots_ok(c) and B.divides_xn_minus_1(c)


def test_hamming_and_repetition():
    h = B.bch_construct(4, 2)
    assert (h.n, h.k) == (15, 11) and h.g == 0b10011
    rep = B.bch_construct(4, 15)
    assert rep.k == 1
    # (x^15 - 1)/(x - 1) is the all-ones polynomial of degree 14
    assert rep.g == (1 << 15) - 1


def test_generator_roots_independent_check():
    f = field_new(6)
    for delta in (3, 5, 7, 11):
        c = B.bch_construct(6, delta)
        for i in range(1, delta):
            assert f.eval_poly(c.g, f.alpha_pow(i)) == 0
        assert poly_mod((1 << 63) | 1, c.g) == 0


def test_nearest():
    assert B.bch_nearest(15, 7).k == 7 and B.bch_nearest(15, 7).delta == 5
    full = B.bch_nearest(1023, 1023)
    assert full.k == 1013 and full.g == field_new(10).prim_poly
    for target, (k, t) in TARGET_K.items():
        c = B.bch_nearest(1023, target)
        assert (c.k, c.t) == (k, t)
    with pytest.raises(ValueError):
        B.bch_nearest(1000, 500)


def test_min_distance_15_7():
    book = codebook(B.bch_construct(4, 5))
    w = book.sum(axis=1)
    assert w[w > 0].min() == 5


def test_encode_is_systematic_and_cyclic_multiple():
    c = B.bch_construct(5, 7)
    rng = np.random.default_rng(2)
    for _ in range(20):
        msg = rng.integers(0, 2, c.k, dtype=np.uint8)
        word = c.encode(msg)
        assert np.array_equal(word[c.info_positions], msg)
        poly = int("".join(map(str, word[::-1])), 2)
        assert poly_mod(poly, c.g) == 0
    assert c.encode(np.zeros(c.k, dtype=np.uint8)).sum() == 0


def test_decode_clean():
    c = B.bch_construct(4, 5)
    msg = np.array([1, 0, 1, 1, 0, 0, 1], dtype=np.uint8)
    out = c.decode(c.encode(msg))
    assert out.corrected and out.errors == 0 and np.array_equal(out.message, msg)


def test_all_double_errors_15_7():
    c = B.bch_construct(4, 5)
    msg = np.array([1, 1, 0, 1, 0, 0, 1], dtype=np.uint8)
    word = c.encode(msg)
    for i, j in itertools.combinations(range(15), 2):
        r = word.copy()
        r[[i, j]] ^= 1
        out = B.bm_decode(c, r)
        assert out.errors == 2 and np.array_equal(out.message, msg)


def test_triple_errors_15_7_reported():
    c = B.bch_construct(4, 5)
    book = {tuple(w) for w in codebook(c)}
    word = c.encode(np.zeros(7, dtype=np.uint8))
    detected = miscorrected = 0
    for pat in itertools.combinations(range(15), 3):
        r = word.copy()
        r[list(pat)] ^= 1
        fixed, e = c.correct(r)
        if e == B.DETECTED_FAILURE:
            detected += 1
        else:
            assert tuple(fixed) in book and fixed.any()
            miscorrected += 1
    assert detected + miscorrected == 455
    print(f"(15,7) weight-3 patterns: {detected} detected, {miscorrected} miscorrected")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(6, 7), (7, 11), (8, 9), (10, 27)]))
def test_random_correctable_patterns(seed, md):
    c = B.bch_construct(*md)
    rng = np.random.default_rng(seed)
    msg = rng.integers(0, 2, c.k, dtype=np.uint8)
    r = c.encode(msg)
    e = int(rng.integers(0, c.t + 1))
    r[rng.choice(c.n, e, replace=False)] ^= 1
    out = c.decode(r)
    assert out.errors == e and np.array_equal(out.message, msg)


def test_batch_matches_single():
    c = B.bch_nearest(1023, 893)
    rng = np.random.default_rng(8)
    words = np.array([c.encode(rng.integers(0, 2, c.k, dtype=np.uint8)) for _ in range(12)])
    noisy = words.copy()
    for row in noisy:
        row[rng.choice(c.n, int(rng.integers(0, 20)), replace=False)] ^= 1
    single = [c.correct(r) for r in noisy]
    batch = noisy.copy()
    counts = c.correct_batch(batch)
    for (w, e), b, cnt in zip(single, batch, counts):
        assert e == cnt
        if e >= 0:
            assert np.array_equal(w, b)


def test_extended():
    ext = B.extend_parity(B.bch_construct(5, 3))
    assert (ext.n, ext.k) == (32, 26)
    rng = np.random.default_rng(1)
    msg = rng.integers(0, 2, 26, dtype=np.uint8)
    w = ext.encode(msg)
    assert w.sum() % 2 == 0
    r = w.copy()
    r[-1] ^= 1
    out = B.ext_decode(ext, r)
    assert out.corrected and out.errors == 1 and np.array_equal(out.message, msg)
    for i in range(31):
        r = w.copy()
        r[i] ^= 1
        assert np.array_equal(B.ext_decode(ext, r).message, msg)
    # two errors exceed t=1: the extended code detects them
    r = w.copy()
    r[[0, 5]] ^= 1
    assert B.ext_decode(ext, r).detected_failure


def test_spc():
    s = B.SpcCode(8)
    w = s.encode(np.array([1, 0, 1, 1, 0, 0, 0], dtype=np.uint8))
    assert w.sum() % 2 == 0 and s.decode(w).corrected
    w[3] ^= 1
    assert s.decode(w).detected_failure


def test_component_labels():
    assert isinstance(B.component_code(32, 31), B.SpcCode)
    assert isinstance(B.component_code(31, 26), B.BchCode)
    assert isinstance(B.component_code(64, 51), B.ExtendedCode)
    with pytest.raises(ValueError):
        B.component_code(31, 25)


def test_length_checks():
    c = B.bch_construct(4, 5)
    with pytest.raises(B.LengthMismatch):
        c.encode(np.zeros(8, dtype=np.uint8))
    with pytest.raises(B.LengthMismatch):
        c.decode(np.zeros(14, dtype=np.uint8))
