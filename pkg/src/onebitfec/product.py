"""Two-dimensional product codes with iterative hard-decision decoding.

The codeword is an ``n_A x n_B`` array stored row-major.  Each row is a
``code_B`` word and each column a ``code_A`` word; the ``k_A x k_B`` message
sits at the intersection of the components' systematic positions.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .bch import LengthMismatch, component_code

# the six rate points, as (code_A, code_B) labels
STUDY_FACTORIZATIONS = {
    0.5: ((32, 26), (32, 21)),
    0.625: ((16, 11), (64, 57)),
    0.75: ((64, 51), (16, 15)),
    0.8125: ((31, 26), (32, 31)),
    0.875: ((8, 7), (128, 127)),
    0.9375: ((32, 31), (32, 31)),
}


def _generator_matrix(code) -> np.ndarray:
    eye = np.eye(code.k, dtype=np.uint8)
    return np.array([code.encode(row) for row in eye], dtype=np.uint8).reshape(code.k, code.n)


@dataclass(frozen=True, eq=False)
class TpcResult:
    message: np.ndarray
    clean: bool
    iterations: int

    @property
    def status(self) -> str:
        return "clean" if self.clean else "dirty"


@dataclass(frozen=True, eq=False)
class ProductCode:
    code_A: object
    code_B: object
    iterations: int = 10

    @property
    def n_A(self) -> int:
        return self.code_A.n

    @property
    def n_B(self) -> int:
        return self.code_B.n

    @property
    def n(self) -> int:
        return self.code_A.n * self.code_B.n

    @property
    def k(self) -> int:
        return self.code_A.k * self.code_B.k

    @property
    def delta(self) -> int:
        return self.code_A.d * self.code_B.d

    @property
    def rate(self) -> float:
        return self.k / self.n

    @cached_property
    def _gens(self):
        return (_generator_matrix(self.code_A).astype(np.float32),
                _generator_matrix(self.code_B).astype(np.float32))

    @property
    def detect_only(self) -> bool:
        return self.code_A.t == 0 and self.code_B.t == 0

    def metadata(self) -> dict:
        return {"family": "tpc", "n": self.n, "k": self.k, "delta": self.delta,
                "iterations": self.iterations,
                "code_A": self.code_A.metadata(), "code_B": self.code_B.metadata()}

    def encode(self, msg) -> np.ndarray:
        return tpc_encode(self, msg)

    def decode(self, r) -> TpcResult:
        return tpc_decode(self, r)


def make_product_code(a: tuple[int, int], b: tuple[int, int], iterations: int = 10) -> ProductCode:
    if iterations < 1:
        raise ValueError("need at least one iteration")
    return ProductCode(component_code(*a), component_code(*b), iterations)


def tpc_encode(pc: ProductCode, msg) -> np.ndarray:
    msg = np.asarray(msg, dtype=np.uint8).reshape(-1)
    if msg.shape[0] != pc.k:
        raise LengthMismatch(f"expected {pc.k} message bits, got {msg.shape[0]}")
    ga, gb = pc._gens
    m = msg.reshape(pc.code_A.k, pc.code_B.k).astype(np.float32)
    # rows with code_B, then every column with code_A; float32 sums are exact here
    rows = (m @ gb).astype(np.int64) & 1
    full = (ga.T @ rows.astype(np.float32)).astype(np.int64) & 1
    return full.astype(np.uint8).reshape(-1)


def _extract(pc: ProductCode, arr: np.ndarray) -> np.ndarray:
    ia = pc.code_A.info_positions
    ib = pc.code_B.info_positions
    return arr[np.ix_(ia, ib)].reshape(-1).copy()


def _failing(pc: ProductCode, arr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Indices of rows and columns that are not component codewords."""
    rows = pc.code_B.correct_batch(arr.copy())
    cols = pc.code_A.correct_batch(np.ascontiguousarray(arr.T))
    return np.flatnonzero(rows != 0), np.flatnonzero(cols != 0)


def tpc_decode(pc: ProductCode, r) -> TpcResult:
    """Rows then columns, ``pc.iterations`` times, stopping once clean.

    Component decoders only write back words they report as corrected.  When
    both components are detect-only, a single failing row and a single
    failing column locate one error at their intersection.
    """
    r = np.asarray(r, dtype=np.uint8).reshape(-1)
    if r.shape[0] != pc.n:
        raise LengthMismatch(f"expected {pc.n} bits, got {r.shape[0]}")
    arr = r.reshape(pc.n_A, pc.n_B).copy()
    bad_rows, bad_cols = _failing(pc, arr)
    it = 0
    while (bad_rows.size or bad_cols.size) and it < pc.iterations:
        it += 1
        pc.code_B.correct_batch(arr)
        cols = np.ascontiguousarray(arr.T)
        pc.code_A.correct_batch(cols)
        arr = np.ascontiguousarray(cols.T)
        bad_rows, bad_cols = _failing(pc, arr)
        if pc.detect_only and bad_rows.size == 1 and bad_cols.size == 1:
            arr[bad_rows[0], bad_cols[0]] ^= 1
            bad_rows, bad_cols = _failing(pc, arr)
    clean = bad_rows.size == 0 and bad_cols.size == 0
    return TpcResult(_extract(pc, arr), clean, it)
