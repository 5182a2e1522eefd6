"""Polar codes: constructions, encoding, SC and CRC-aided SCL decoding.

Encoding is ``x = d G_N`` with ``G_N`` the n-fold Kronecker power of the
lower-triangular kernel ``[[1, 0], [1, 1]]`` in natural (non bit-reversed)
order.  Under this convention row ``i`` has Hamming weight ``2^wt(i)`` and
index ``N-1`` is the most reliable synthetic channel, which is the ordering
every construction below (and the 5G NR sequence) assumes.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np
from numba import njit

CRC_POLYS = {
    # width: generator without the leading x^width term
    4: 0x3,       # x^4 + x + 1
    8: 0xD5,      # x^8 + x^7 + x^6 + x^4 + x^2 + 1
    16: 0x1021,   # x^16 + x^12 + x^5 + 1 (CCITT)
}

CONSTRUCTIONS = ("RM", "PW", "GA", "NR5G")
PW_BETA = 2.0 ** 0.25


class LengthMismatch(ValueError):
    pass


class SequenceUnavailable(ValueError):
    pass


# --- CRC ---------------------------------------------------------------------

@njit(cache=True)
def _crc_remainder(bits, poly, width):
    # MSB-first shift register, zero initial state, no final XOR
    reg = 0
    top = 1 << (width - 1)
    mask = (1 << width) - 1
    for b in bits:
        fb = ((reg & top) != 0) ^ (b != 0)
        reg = (reg << 1) & mask
        if fb:
            reg ^= poly
    return reg


def crc_bits(bits, width: int = 16) -> np.ndarray:
    """CRC parity bits of ``bits`` (MSB of the register first)."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    reg = _crc_remainder(bits, CRC_POLYS[width], width)
    return np.array([(reg >> (width - 1 - j)) & 1 for j in range(width)], dtype=np.uint8)


def crc16(bits) -> np.ndarray:
    return crc_bits(bits, 16)


def crc_check(word, width: int = 16) -> bool:
    """True when ``word`` (message followed by its CRC) has a zero remainder."""
    if width == 0:
        return True
    word = np.ascontiguousarray(word, dtype=np.uint8)
    if len(word) < width:
        return False
    return _crc_remainder(word, CRC_POLYS[width], width) == 0


# --- code description --------------------------------------------------------

@dataclass(frozen=True)
class PolarCode:
    N: int
    K: int
    info_set: tuple
    crc_len: int = 16
    construction: str = "NR5G"
    design_snr_db: float | None = None
    frozen_mask: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.N < 1 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two, got {self.N}")
        info = tuple(sorted(int(i) for i in self.info_set))
        if len(set(info)) != len(info) or (info and not 0 <= info[0] <= info[-1] < self.N):
            raise ValueError("information set must hold distinct indices in [0, N)")
        if len(info) != self.K + self.crc_len:
            raise ValueError(
                f"|info_set| = {len(info)} but K + crc_len = {self.K + self.crc_len}")
        if self.crc_len and self.crc_len not in CRC_POLYS:
            raise ValueError(f"unsupported CRC length {self.crc_len}")
        object.__setattr__(self, "info_set", info)
        mask = np.ones(self.N, dtype=np.bool_)
        mask[list(info)] = False
        mask.flags.writeable = False
        object.__setattr__(self, "frozen_mask", mask)

    @property
    def n(self) -> int:
        return self.N.bit_length() - 1

    @property
    def K_total(self) -> int:
        return self.K + self.crc_len

    @property
    def frozen_set(self) -> tuple:
        return tuple(np.flatnonzero(self.frozen_mask).tolist())

    @property
    def rate(self) -> float:
        return self.K / self.N


def make_polar_code(N: int, K: int, construction: str = "NR5G", crc_len: int = 16,
                    design_snr_db: float | None = None) -> PolarCode:
    construction = construction.upper()
    k_total = K + crc_len
    if construction == "RM":
        info = construct_rm(N, k_total)
    elif construction == "PW":
        info = construct_pw(N, k_total)
    elif construction == "GA":
        if design_snr_db is None:
            raise ValueError("GA construction needs a design SNR")
        info = construct_ga(N, k_total, design_snr_db)
    elif construction in ("NR5G", "5G"):
        construction = "NR5G"
        info = construct_5g(N, k_total)
    else:
        raise ValueError(f"unknown construction {construction!r}")
    return PolarCode(N, K, tuple(info.tolist()), crc_len, construction,
                     design_snr_db if construction == "GA" else None)


# --- constructions -----------------------------------------------------------

def _check_sizes(N: int, k_total: int):
    if N < 1 or N & (N - 1):
        raise ValueError(f"N must be a power of two, got {N}")
    if not 0 <= k_total <= N:
        raise ValueError(f"cannot place {k_total} bits in a length-{N} code")


def _top_k(scores, k_total: int) -> np.ndarray:
    # descending score, ties resolved towards the larger index
    N = len(scores)
    order = sorted(range(N), key=lambda i: (scores[i], i), reverse=True)
    return np.array(sorted(order[:k_total]), dtype=np.int64)


def construct_rm(N: int, k_total: int) -> np.ndarray:
    """Indices whose generator rows have the largest Hamming weight."""
    _check_sizes(N, k_total)
    return _top_k([bin(i).count("1") for i in range(N)], k_total)


def polarization_weights(N: int, beta: float = PW_BETA) -> np.ndarray:
    n = N.bit_length() - 1
    return np.array([sum(beta ** j for j in range(n) if (i >> j) & 1) for i in range(N)])


def construct_pw(N: int, k_total: int) -> np.ndarray:
    _check_sizes(N, k_total)
    return _top_k(polarization_weights(N).tolist(), k_total)


# Gaussian approximation with the two-segment phi.

def _log_phi(x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x < 10.0:
        return -0.4527 * x ** 0.86 + 0.0218
    return 0.5 * math.log(math.pi / x) - x / 4.0 + math.log1p(-10.0 / (7.0 * x))


def _phi(x: float) -> float:
    return math.exp(_log_phi(x))


def _phi_inv_log(log_y: float, hi: float) -> float:
    """Solve ``log phi(z) = log_y`` for z in [0, hi] by bisection."""
    lo = 0.0
    while _log_phi(hi) > log_y:
        hi *= 2.0
    while hi - lo > 1e-10 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if _log_phi(mid) > log_y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _ga_check_mean(m: float) -> float:
    # 1 - (1 - phi)^2 = phi * (2 - phi), done in logs to survive large means
    lp = _log_phi(m)
    log_y = lp + math.log(2.0 - math.exp(lp))
    return _phi_inv_log(log_y, max(m, 1.0))


def ga_means(N: int, design_snr_db: float) -> np.ndarray:
    """Mean LLR of every synthetic channel under the Gaussian approximation.

    The first butterfly stage applied to the raw channel is selected by the
    most significant index bit (0: check combine, 1: variable combine).
    """
    n = N.bit_length() - 1
    means = [2.0 * 10.0 ** (design_snr_db / 10.0)]
    for _ in range(n):
        nxt = []
        for m in means:
            nxt.append(_ga_check_mean(m))
            nxt.append(2.0 * m)
        means = nxt
    return np.array(means)


def construct_ga(N: int, k_total: int, design_snr_db: float) -> np.ndarray:
    _check_sizes(N, k_total)
    return _top_k(ga_means(N, design_snr_db).tolist(), k_total)


_NR5G_FILE = "nr5g_reliability.txt"


@lru_cache(maxsize=1)
def nr5g_sequence() -> np.ndarray:
    """The 1024-entry 5G NR reliability sequence, least reliable first."""
    data_dir = resources.files("onebitfec") / "data"
    raw = (data_dir / _NR5G_FILE).read_bytes()
    expected = (data_dir / "nr5g_reliability.sha256").read_text().strip()
    if hashlib.sha256(raw).hexdigest() != expected:
        raise RuntimeError(f"{_NR5G_FILE} does not match its checksum")
    seq = np.array([int(tok) for tok in raw.split()], dtype=np.int64)
    if len(seq) != 1024 or not np.array_equal(np.sort(seq), np.arange(1024)):
        raise RuntimeError(f"{_NR5G_FILE} is not a permutation of 0..1023")
    seq.flags.writeable = False
    return seq


def construct_5g(N: int, k_total: int) -> np.ndarray:
    _check_sizes(N, k_total)
    if N > 1024:
        raise SequenceUnavailable(f"5G NR sequence is defined up to N = 1024, got {N}")
    seq = nr5g_sequence()
    seq = seq[seq < N]
    return np.sort(seq[len(seq) - k_total:]) if k_total else np.zeros(0, dtype=np.int64)


# --- encoding ----------------------------------------------------------------

@njit(cache=True)
def _butterfly(x):
    N = x.shape[0]
    h = 1
    while h < N:
        for start in range(0, N, 2 * h):
            for j in range(start, start + h):
                x[j] ^= x[j + h]
        h *= 2
    return x


def polar_transform(d) -> np.ndarray:
    """``d G_N`` over GF(2) via the in-place butterfly."""
    x = np.array(d, dtype=np.uint8)
    if x.ndim != 1 or len(x) & (len(x) - 1):
        raise LengthMismatch(f"length {len(x)} is not a power of two")
    return _butterfly(x)


def polar_encode(code: PolarCode, u) -> np.ndarray:
    """Encode ``u`` (message with CRC already appended) into N coded bits."""
    u = np.asarray(u, dtype=np.uint8)
    if len(u) != code.K_total:
        raise LengthMismatch(f"expected {code.K_total} bits, got {len(u)}")
    d = np.zeros(code.N, dtype=np.uint8)
    d[list(code.info_set)] = u
    return _butterfly(d)


def attach_crc(code: PolarCode, message) -> np.ndarray:
    message = np.asarray(message, dtype=np.uint8)
    if len(message) != code.K:
        raise LengthMismatch(f"expected {code.K} message bits, got {len(message)}")
    if code.crc_len == 0:
        return message.copy()
    return np.concatenate([message, crc_bits(message, code.crc_len)])


# --- decoding kernels --------------------------------------------------------
#
# Layer l holds nodes of size 2^l and is stored at offset 2^l of a 2N buffer.
# Layer n is the channel, layer 0 the current leaf.  betaL/betaR keep the
# re-encoded words of the left/right child that finished last at each layer.

@njit(cache=True, inline="always")
def _f(a, b):
    m = min(abs(a), abs(b))
    if (a < 0.0) != (b < 0.0):
        return -m
    return m


@njit(cache=True, inline="always")
def _ctz(i):
    c = 0
    while (i & 1) == 0:
        i >>= 1
        c += 1
    return c


@njit(cache=True)
def _sc_kernel(llr, frozen):
    N = llr.shape[0]
    n = 0
    while (1 << n) < N:
        n += 1
    alpha = np.zeros(2 * N)
    alpha[N:] = llr
    bl = np.zeros(2 * N, dtype=np.uint8)
    br = np.zeros(2 * N, dtype=np.uint8)
    d = np.zeros(N, dtype=np.uint8)
    for i in range(N):
        if i == 0:
            top = n
        else:
            top = _ctz(i) + 1
            h = 1 << (top - 1)
            src = 1 << top
            for j in range(h):
                a = alpha[src + j]
                if bl[h + j]:
                    a = -a
                alpha[h + j] = alpha[src + h + j] + a
            top -= 1
        for lay in range(top, 0, -1):
            h = 1 << (lay - 1)
            src = 1 << lay
            for j in range(h):
                alpha[h + j] = _f(alpha[src + j], alpha[src + h + j])
        if frozen[i]:
            bit = 0
        else:
            bit = 0 if alpha[1] >= 0.0 else 1
        d[i] = bit
        if i & 1:
            br[1] = bit
        else:
            bl[1] = bit
        lay = 0
        while lay < n and (i >> lay) & 1:
            h = 1 << lay
            if lay + 1 < n and (i >> (lay + 1)) & 1:
                dst = br
            else:
                dst = bl
            for j in range(h):
                dst[2 * h + j] = bl[h + j] ^ br[h + j]
                dst[2 * h + h + j] = br[h + j]
            lay += 1
    return d


# SCL paths share memory lazily: each (path, layer) points at a slot and a
# slot is copied only when a path writes to it while others still read it.
# Three pointer tables (alpha, beta-left, beta-right) are packed flat:
#   ptr[(t*L + path)*n + layer], ref/free[g*L + slot], nfree[g], g = t*n + layer
# The kernel tests ``ref == 1`` inline and calls ``_cow`` only on sharing;
# array-passing calls in the hot loop cost more than the arithmetic.

@njit(cache=True)
def _cow(ptr, ref, free, nfree, pi, g, L):
    s = ptr[pi]
    ref[g * L + s] -= 1
    nfree[g] -= 1
    t = free[g * L + nfree[g]]
    ref[g * L + t] = 1
    ptr[pi] = t
    return t


@njit(cache=True)
def _share(ptr, ref, src, dst, n, L):
    for t in range(3):
        for lay in range(n):
            s = ptr[(t * L + src) * n + lay]
            ptr[(t * L + dst) * n + lay] = s
            ref[(t * n + lay) * L + s] += 1


@njit(cache=True)
def _release(ptr, ref, free, nfree, p, n, L):
    for t in range(3):
        for lay in range(n):
            g = t * n + lay
            s = ptr[(t * L + p) * n + lay]
            ref[g * L + s] -= 1
            if ref[g * L + s] == 0:
                free[g * L + nfree[g]] = s
                nfree[g] += 1


@njit(cache=True)
def _slot_tables(L, n):
    ptr = np.zeros(3 * L * n, dtype=np.int64)
    ref = np.zeros(3 * n * L, dtype=np.int64)
    free = np.zeros(3 * n * L, dtype=np.int64)
    nfree = np.full(3 * n, L - 1, dtype=np.int64)
    for g in range(3 * n):
        ref[g * L] = 1
        for t in range(L - 1):
            free[g * L + t] = L - 1 - t
    return ptr, ref, free, nfree


@njit(cache=True)
def _scl_kernel(llr, frozen, L, k_total, crc_poly, crc_width):
    N = llr.shape[0]
    n = 0
    while (1 << n) < N:
        n += 1
    # layers 0..n-1 of slot s live in A[s*N : (s+1)*N]; the channel sits
    # after the last slot and is addressed as layer n with base ``chan``
    A = np.zeros(L * N + N)
    A[L * N:] = llr
    chan = L * N - N
    BL = np.zeros(L * N, dtype=np.uint8)
    BR = np.zeros(L * N, dtype=np.uint8)
    ptr, ref, free, nfree = _slot_tables(L, n)
    ob = L * n        # offset of the beta-left table in ptr
    orr = 2 * L * n   # beta-right
    active = np.zeros(L, dtype=np.bool_)
    active[0] = True
    pm = np.zeros(L)
    u = np.zeros((L, max(k_total, 1)), dtype=np.uint8)
    leaf = np.zeros(L)
    bitv = np.zeros(L, dtype=np.uint8)
    cand = np.zeros(2 * L)
    cand_path = np.zeros(2 * L, dtype=np.int64)
    disagree = np.zeros(2 * L, dtype=np.int64)
    skey = np.zeros(2 * L)
    sidx = np.zeros(2 * L, dtype=np.int64)
    keep = np.zeros((L, 2), dtype=np.bool_)
    ninfo = 0

    for i in range(N):
        # descend to leaf i on every live path
        top = n if i == 0 else _ctz(i) + 1
        for p in range(L):
            if not active[p]:
                continue
            pn = p * n
            lay = top
            if i > 0:
                h = 1 << (lay - 1)
                bs = chan if lay == n else ptr[pn + lay] * N
                d = ptr[pn + lay - 1]
                if ref[(lay - 1) * L + d] != 1:
                    d = _cow(ptr, ref, free, nfree, pn + lay - 1, lay - 1, L)
                bd = d * N
                bb = ptr[ob + pn + lay - 1] * N
                for j in range(h):
                    a0 = A[bs + 2 * h + j]
                    a1 = A[bs + 3 * h + j]
                    A[bd + h + j] = a1 - a0 if BL[bb + h + j] else a1 + a0
                lay -= 1
            while lay > 0:
                h = 1 << (lay - 1)
                bs = chan if lay == n else ptr[pn + lay] * N
                d = ptr[pn + lay - 1]
                if ref[(lay - 1) * L + d] != 1:
                    d = _cow(ptr, ref, free, nfree, pn + lay - 1, lay - 1, L)
                bd = d * N
                for j in range(h):
                    A[bd + h + j] = _f(A[bs + 2 * h + j], A[bs + 3 * h + j])
                lay -= 1
            leaf[p] = A[chan + 1] if n == 0 else A[ptr[pn] * N + 1]

        if frozen[i]:
            for p in range(L):
                if active[p]:
                    if leaf[p] < 0.0:
                        pm[p] += -leaf[p]
                    bitv[p] = 0
        else:
            nc = 0
            for p in range(L):
                if active[p]:
                    a = leaf[p]
                    cand[nc] = pm[p] + (-a if a < 0.0 else 0.0)
                    cand_path[nc] = 2 * p
                    cand[nc + 1] = pm[p] + (a if a > 0.0 else 0.0)
                    cand_path[nc + 1] = 2 * p + 1
                    # equal metrics favour the hard decision, as SC would
                    disagree[nc] = a < 0.0
                    disagree[nc + 1] = a >= 0.0
                    nc += 2
            keep[:, :] = False
            if nc <= L:
                for c in range(nc):
                    keep[cand_path[c] // 2, cand_path[c] % 2] = True
            else:
                # stable sort of [agreeing..., disagreeing...] gives the order
                # (metric, disagree, path)
                h = nc // 2
                for c in range(nc):
                    r = (c // 2) + (h if disagree[c] else 0)
                    skey[r] = cand[c]
                    sidx[r] = cand_path[c]
                order = np.argsort(skey[:nc], kind="mergesort")
                for r in range(L):
                    c = sidx[order[r]]
                    keep[c // 2, c % 2] = True
            for p in range(L):
                if active[p] and not keep[p, 0] and not keep[p, 1]:
                    active[p] = False
                    _release(ptr, ref, free, nfree, p, n, L)
            for p in range(L):
                if not active[p] or bitv[p] == 3:
                    continue
                a = leaf[p]
                if keep[p, 0] and keep[p, 1]:
                    q = 0
                    while active[q]:
                        q += 1
                    active[q] = True
                    _share(ptr, ref, p, q, n, L)
                    u[q, :ninfo] = u[p, :ninfo]
                    pm[q] = pm[p] + (a if a > 0.0 else 0.0)
                    bitv[q] = 3  # marks a fresh clone carrying bit 1
                    pm[p] += -a if a < 0.0 else 0.0
                    bitv[p] = 0
                elif keep[p, 0]:
                    pm[p] += -a if a < 0.0 else 0.0
                    bitv[p] = 0
                else:
                    pm[p] += a if a > 0.0 else 0.0
                    bitv[p] = 1
            for p in range(L):
                if active[p] and bitv[p] == 3:
                    bitv[p] = 1
            for p in range(L):
                if active[p]:
                    u[p, ninfo] = bitv[p]
            ninfo += 1

        # store the leaf decision and re-encode upward
        if n == 0:
            continue
        for p in range(L):
            if not active[p]:
                continue
            pn = p * n
            side = orr if i & 1 else ob
            g = (side // (L * n)) * n
            d = ptr[side + pn]
            if ref[g * L + d] != 1:
                d = _cow(ptr, ref, free, nfree, side + pn, g, L)
            if i & 1:
                BR[d * N + 1] = bitv[p]
            else:
                BL[d * N + 1] = bitv[p]
            lay = 0
            while lay + 1 < n and (i >> lay) & 1:
                h = 1 << lay
                bl = ptr[ob + pn + lay] * N
                br = ptr[orr + pn + lay] * N
                side = orr if (i >> (lay + 1)) & 1 else ob
                g = (side // (L * n)) * n + lay + 1
                d = ptr[side + pn + lay + 1]
                if ref[g * L + d] != 1:
                    d = _cow(ptr, ref, free, nfree, side + pn + lay + 1, g, L)
                bd = d * N
                if side == orr:
                    for j in range(h):
                        BR[bd + 2 * h + j] = BL[bl + h + j] ^ BR[br + h + j]
                        BR[bd + 3 * h + j] = BR[br + h + j]
                else:
                    for j in range(h):
                        BL[bd + 2 * h + j] = BL[bl + h + j] ^ BR[br + h + j]
                        BL[bd + 3 * h + j] = BR[br + h + j]
                lay += 1

    # pick the best path that satisfies the CRC
    npaths = 0
    metrics = np.empty(L)
    ids = np.empty(L, dtype=np.int64)
    for p in range(L):
        if active[p]:
            metrics[npaths] = pm[p]
            ids[npaths] = p
            npaths += 1
    order = np.argsort(metrics[:npaths], kind="mergesort")
    chosen = ids[order[0]]
    rank = 0
    ok = False
    for r in range(npaths):
        p = ids[order[r]]
        if crc_width == 0 or _crc_remainder(u[p, :k_total], crc_poly, crc_width) == 0:
            chosen = p
            rank = r
            ok = True
            break
    return u[chosen, :k_total].copy(), ok, rank, pm[chosen]


@dataclass
class DecodeResult:
    message: np.ndarray
    crc_ok: bool
    list_rank: int = 0
    path_metric: float = 0.0


def _check_llr(code: PolarCode, llr) -> np.ndarray:
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    if llr.shape != (code.N,):
        raise LengthMismatch(f"expected {code.N} LLRs, got shape {llr.shape}")
    return llr


def sc_decode(code: PolarCode, llr) -> DecodeResult:
    llr = _check_llr(code, llr)
    d = _sc_kernel(llr, code.frozen_mask)
    u = d[list(code.info_set)] if code.K_total else np.zeros(0, dtype=np.uint8)
    return DecodeResult(u[:code.K].copy(), crc_check(u, code.crc_len) if code.crc_len else True)


def scl_decode(code: PolarCode, llr, L: int = 32) -> DecodeResult:
    if L < 1:
        raise ValueError("list size must be at least 1")
    llr = _check_llr(code, llr)
    poly = CRC_POLYS.get(code.crc_len, 0)
    u, ok, rank, metric = _scl_kernel(llr, code.frozen_mask, L, code.K_total, poly, code.crc_len)
    return DecodeResult(u[:code.K].copy(), bool(ok), int(rank), float(metric))
