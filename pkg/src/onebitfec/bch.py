"""Binary narrow-sense primitive BCH codes and their parity-extended forms.

Bit ``i`` of a length-``n`` word is the coefficient of ``x^i``.  Encoding is
systematic with the parity in positions ``[0, n-k)`` and the message in
``[n-k, n)``.  Decoding is Berlekamp-Massey followed by a Chien search.

Single-parity-check codes live here too: they are the detect-only components
of several product codes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numba import njit

from .gf2m import FiniteField, poly_degree, poly_mod, poly_mul, poly_to_bits

DETECTED_FAILURE = -1


class LengthMismatch(ValueError):
    pass


@dataclass(frozen=True)
class DecodeOutcome:
    """Decoder result; ``errors`` is the number of flipped bits, or -1."""
    message: np.ndarray
    errors: int

    @property
    def corrected(self) -> bool:
        return self.errors >= 0

    @property
    def detected_failure(self) -> bool:
        return self.errors < 0


# --- numba kernels -----------------------------------------------------------

@njit(cache=True)
def _parity_rows(gbits, r, k):
    """Row ``j`` holds ``x^(r+j) mod g``."""
    rows = np.zeros((k, r), dtype=np.uint8)
    cur = gbits[:r].copy()
    for j in range(k):
        rows[j] = cur
        top = cur[r - 1]
        for i in range(r - 1, 0, -1):
            cur[i] = cur[i - 1] ^ (top & gbits[i])
        cur[0] = top
    return rows


@njit(cache=True)
def _syndromes(word, exp, n, t2):
    s = np.zeros(t2, dtype=np.int64)
    for j in range(word.shape[0]):
        if word[j]:
            for i in range(t2):
                s[i] ^= exp[((i + 1) * j) % n]
    return s


@njit(cache=True)
def _gmul(a, b, exp, log):
    if a == 0 or b == 0:
        return 0
    return exp[log[a] + log[b]]


@njit(cache=True)
def _bm_kernel(word, exp, log, n, t):
    """Correct ``word`` in place; returns the number of errors or -1."""
    t2 = 2 * t
    s = _syndromes(word, exp, n, t2)
    clean = True
    for i in range(t2):
        if s[i] != 0:
            clean = False
            break
    if clean:
        return 0
    if t == 0:
        return -1

    # Berlekamp-Massey
    c = np.zeros(t2 + 1, dtype=np.int64)
    b = np.zeros(t2 + 1, dtype=np.int64)
    tmp = np.zeros(t2 + 1, dtype=np.int64)
    c[0] = 1
    b[0] = 1
    lc = 0
    shift = 1
    bd = 1
    for k in range(t2):
        d = s[k]
        for i in range(1, lc + 1):
            d ^= _gmul(c[i], s[k - i], exp, log)
        if d == 0:
            shift += 1
            continue
        coef = exp[(log[d] - log[bd]) % n]
        if 2 * lc <= k:
            tmp[:] = c
            for i in range(t2 + 1 - shift):
                c[i + shift] ^= _gmul(coef, b[i], exp, log)
            lc = k + 1 - lc
            b[:] = tmp
            bd = d
            shift = 1
        else:
            for i in range(t2 + 1 - shift):
                c[i + shift] ^= _gmul(coef, b[i], exp, log)
            shift += 1
    if lc > t:
        return -1

    # Chien search: position j is in error iff Lambda(alpha^-j) = 0
    logc = np.full(lc + 1, -1, dtype=np.int64)
    for i in range(lc + 1):
        if c[i] != 0:
            logc[i] = log[c[i]]
    pos = np.zeros(lc, dtype=np.int64)
    found = 0
    for j in range(n):
        acc = 0
        for i in range(lc + 1):
            if logc[i] >= 0:
                acc ^= exp[(logc[i] + (n - j) * i) % n]
        if acc == 0:
            if found == lc:
                return -1
            pos[found] = j
            found += 1
    if found != lc:
        return -1

    # syndromes of the corrected word must vanish
    for i in range(t2):
        v = s[i]
        for q in range(found):
            v ^= exp[((i + 1) * pos[q]) % n]
        if v != 0:
            return -1
    for q in range(found):
        word[pos[q]] ^= 1
    return found


@njit(cache=True)
def _bm_batch(words, exp, log, n, t, extended):
    """Decode each row in place; returns per-row error counts (-1 = failure).

    With ``extended`` the last column is an overall parity bit.
    """
    rows = words.shape[0]
    out = np.empty(rows, dtype=np.int64)
    for q in range(rows):
        w = words[q]
        inner = w[:n]
        e = _bm_kernel(inner, exp, log, n, t)
        if extended and e >= 0:
            par = 0
            for j in range(n + 1):
                par ^= w[j]
            if par:
                if e < t:
                    w[n] ^= 1
                    e += 1
                else:
                    e = -1
        out[q] = e
    return out


# --- codes -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BchCode:
    field: FiniteField
    n: int
    k: int
    delta: int
    g: int
    b: int = 1
    gbits: np.ndarray = field(repr=False, default=None)

    @property
    def m(self) -> int:
        return self.field.m

    @property
    def t(self) -> int:
        return (self.delta - 1) // 2

    @property
    def d(self) -> int:
        return self.delta

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def info_positions(self) -> np.ndarray:
        return np.arange(self.n - self.k, self.n)

    def metadata(self) -> dict:
        return {"family": "bch", "m": self.m, "n": self.n, "k": self.k,
                "delta": self.delta, "t": self.t, "prim_poly": self.field.prim_poly,
                "generator": format(self.g, "b")}

    @cached_property
    def parity_matrix(self) -> np.ndarray:
        """``k x (n-k)`` float32 matrix; parity = msg @ P mod 2."""
        r = self.n - self.k
        if r == 0:
            return np.zeros((self.k, 0), dtype=np.float32)
        return _parity_rows(self.gbits, r, self.k).astype(np.float32)

    def encode(self, msg) -> np.ndarray:
        return bch_encode(self, msg)

    def correct(self, r) -> tuple[np.ndarray, int]:
        word = _as_bits(r, self.n)
        return word, int(_bm_kernel(word, self.field.exp_table, self.field.log_table,
                                    self.n, self.t))

    def correct_batch(self, words: np.ndarray) -> np.ndarray:
        """Correct a C-contiguous ``(rows, n)`` uint8 array in place."""
        return _bm_batch(words, self.field.exp_table, self.field.log_table,
                         self.n, self.t, False)

    def decode(self, r) -> DecodeOutcome:
        return bm_decode(self, r)


def _as_bits(r, length: int) -> np.ndarray:
    word = np.array(r, dtype=np.uint8).reshape(-1)
    if word.shape[0] != length:
        raise LengthMismatch(f"expected {length} bits, got {word.shape[0]}")
    return word


def _order_for_length(n: int) -> int:
    m = (n + 1).bit_length() - 1
    if (1 << m) - 1 != n:
        raise ValueError(f"n = {n} is not of the form 2^m - 1")
    return m


def _bose_steps(f: FiniteField):
    """Yield ``(delta, degree of g)`` for delta = 2..n."""
    seen = set()
    deg = 0
    for delta in range(2, f.order + 1):
        i = delta - 1
        if i not in seen:
            coset = f.conjugacy_class(i)
            seen.update(coset)
            deg += len(coset)
        yield delta, deg


def bch_construct(m: int, delta: int, prim_poly: int | None = None) -> BchCode:
    f = FiniteField(m, prim_poly)
    n = f.order
    if not 2 <= delta <= n:
        raise ValueError(f"designed distance must be in [2, {n}], got {delta}")
    g = 1
    seen = set()
    for i in range(1, delta):
        if i in seen:
            continue
        seen.update(f.conjugacy_class(i))
        g = poly_mul(g, f.minimal_polynomial(i))
    k = n - poly_degree(g)
    gbits = poly_to_bits(g, poly_degree(g) + 1)
    gbits.flags.writeable = False
    return BchCode(f, n, k, delta, g, 1, gbits)


def bch_nearest(n: int, k_target: int, prim_poly: int | None = None) -> BchCode:
    """Code of length ``n`` whose dimension is closest to ``k_target``.

    Ties go to the larger ``k``.  Among designed distances giving the same
    generator the largest one is used, so ``t`` is as large as possible.
    """
    m = _order_for_length(n)
    f = FiniteField(m, prim_poly)
    best = None
    for delta, deg in _bose_steps(f):
        k = n - deg
        key = (abs(k - k_target), -k)
        if best is None or key < best[0] or (key == best[0] and delta > best[1]):
            best = (key, delta)
    return bch_construct(m, best[1], prim_poly)


def bch_encode(code: BchCode, msg) -> np.ndarray:
    msg = _as_bits(msg, code.k)
    r = code.n - code.k
    word = np.zeros(code.n, dtype=np.uint8)
    word[r:] = msg
    if r:
        word[:r] = (msg.astype(np.float32) @ code.parity_matrix).astype(np.int64) & 1
    return word


def bm_decode(code: BchCode, r) -> DecodeOutcome:
    word, e = code.correct(r)
    return DecodeOutcome(word[code.n - code.k:].copy(), e)


def generator_roots_ok(code: BchCode) -> bool:
    f = code.field
    return all(f.eval_poly(code.g, f.alpha_pow(i)) == 0 for i in range(1, code.delta))


def divides_xn_minus_1(code: BchCode) -> bool:
    return poly_mod((1 << code.n) | 1, code.g) == 0


@dataclass(frozen=True, eq=False)
class ExtendedCode:
    """Inner BCH code with an overall parity bit appended at index ``n``."""
    inner: BchCode

    @property
    def n(self) -> int:
        return self.inner.n + 1

    @property
    def k(self) -> int:
        return self.inner.k

    @property
    def d(self) -> int:
        d = self.inner.delta
        return d + 1 if d % 2 else d

    @property
    def t(self) -> int:
        return self.inner.t

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def info_positions(self) -> np.ndarray:
        return self.inner.info_positions

    def metadata(self) -> dict:
        meta = self.inner.metadata()
        meta.update(family="ebch", n=self.n)
        return meta

    def encode(self, msg) -> np.ndarray:
        word = np.zeros(self.n, dtype=np.uint8)
        word[:-1] = bch_encode(self.inner, msg)
        word[-1] = word[:-1].sum() & 1
        return word

    def correct(self, r) -> tuple[np.ndarray, int]:
        # odd overall parity after inner decoding means one error more than
        # the inner decoder saw; repaired in the parity bit while e < t
        word = _as_bits(r, self.n)
        return word, int(self.correct_batch(word.reshape(1, -1))[0])

    def correct_batch(self, words: np.ndarray) -> np.ndarray:
        f = self.inner.field
        return _bm_batch(words, f.exp_table, f.log_table, self.inner.n, self.inner.t, True)

    def decode(self, r) -> DecodeOutcome:
        return ext_decode(self, r)


def extend_parity(code: BchCode) -> ExtendedCode:
    return ExtendedCode(code)


def ext_decode(ext: ExtendedCode, r) -> DecodeOutcome:
    word, e = ext.correct(r)
    return DecodeOutcome(word[ext.info_positions].copy(), e)


@dataclass(frozen=True)
class SpcCode:
    """``(n, n-1)`` single parity check: message first, parity last.

    It has distance 2 and can only detect errors.
    """
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("SPC length must be at least 2")

    @property
    def k(self) -> int:
        return self.n - 1

    @property
    def d(self) -> int:
        return 2

    @property
    def t(self) -> int:
        return 0

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def info_positions(self) -> np.ndarray:
        return np.arange(self.k)

    def metadata(self) -> dict:
        return {"family": "spc", "n": self.n, "k": self.k}

    def encode(self, msg) -> np.ndarray:
        msg = _as_bits(msg, self.k)
        return np.append(msg, np.uint8(msg.sum() & 1))

    def correct(self, r) -> tuple[np.ndarray, int]:
        word = _as_bits(r, self.n)
        return word, (0 if word.sum() % 2 == 0 else DETECTED_FAILURE)

    def correct_batch(self, words: np.ndarray) -> np.ndarray:
        odd = np.bitwise_xor.reduce(words, axis=1) != 0
        return np.where(odd, DETECTED_FAILURE, 0).astype(np.int64)

    def decode(self, r) -> DecodeOutcome:
        word, e = self.correct(r)
        return DecodeOutcome(word[:self.k].copy(), e)


def component_code(n: int, k: int):
    """Component code by ``(n, k)`` label, as used in product code tables.

    ``(2^m, 2^m - 1)`` is an SPC code, ``(2^m - 1, k)`` a BCH code and
    ``(2^m, k)`` an extended BCH code; ``k`` must be achieved exactly.
    """
    if k == n - 1 and n & (n - 1) == 0:
        return SpcCode(n)
    if (n + 1) & n == 0:
        code = bch_nearest(n, k)
        if code.k != k:
            raise ValueError(f"no BCH code with (n, k) = ({n}, {k})")
        return code
    if n & (n - 1) == 0:
        inner = bch_nearest(n - 1, k)
        if inner.k != k:
            raise ValueError(f"no extended BCH code with (n, k) = ({n}, {k})")
        return ExtendedCode(inner)
    raise ValueError(f"unsupported component length {n}")
