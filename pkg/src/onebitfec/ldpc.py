"""LDPC codes: PEG and quasi-cyclic protograph constructions, systematic
encoding by GF(2) elimination, flooding sum-product decoding, girth and alist.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from numba import njit

from .rates import BLOCK_LENGTH, rate_tag

LLR_CLAMP = 30.0

# variable degree per rate for the PEG family
PEG_VAR_DEGREE = {0.5: 3, 0.625: 3, 0.75: 3, 0.8125: 3, 0.875: 4, 0.9375: 4}


class InfeasibleDistribution(ValueError):
    pass


class MissingShifts(ValueError):
    pass


class SearchFailed(RuntimeError):
    pass


class LengthMismatch(ValueError):
    pass


# --- sparse matrix -------------------------------------------------------------

class SparseParityMatrix:
    """Binary ``m x n`` matrix kept as row and column adjacency (CSR/CSC)."""

    def __init__(self, m: int, n: int, rows, cols):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if rows.shape != cols.shape:
            raise ValueError("row and column index arrays differ in length")
        if rows.size and (rows.min() < 0 or rows.max() >= m or cols.min() < 0 or cols.max() >= n):
            raise ValueError("edge index out of range")
        key = rows * n + cols
        if np.unique(key).size != key.size:
            raise ValueError("duplicate edges")
        order = np.lexsort((cols, rows))
        self.m, self.n = int(m), int(n)
        self.edge_row = rows[order]
        self.edge_col = cols[order]
        self.row_ptr = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.edge_row, minlength=m), out=self.row_ptr[1:])
        # edges of each column, as indices into the row-ordered edge list
        self.col_edges = np.lexsort((self.edge_row, self.edge_col)).astype(np.int64)
        self.col_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.edge_col, minlength=n), out=self.col_ptr[1:])
        for a in (self.edge_row, self.edge_col, self.row_ptr, self.col_edges, self.col_ptr):
            a.flags.writeable = False

    @classmethod
    def from_dense(cls, h) -> "SparseParityMatrix":
        h = np.asarray(h)
        r, c = np.nonzero(h)
        return cls(h.shape[0], h.shape[1], r, c)

    @property
    def shape(self) -> tuple[int, int]:
        return self.m, self.n

    @property
    def num_edges(self) -> int:
        return int(self.edge_row.size)

    def row(self, i: int) -> np.ndarray:
        return self.edge_col[self.row_ptr[i]:self.row_ptr[i + 1]]

    def col(self, j: int) -> np.ndarray:
        return self.edge_row[self.col_edges[self.col_ptr[j]:self.col_ptr[j + 1]]]

    def row_degrees(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    def col_degrees(self) -> np.ndarray:
        return np.diff(self.col_ptr)

    def to_dense(self) -> np.ndarray:
        h = np.zeros((self.m, self.n), dtype=np.uint8)
        h[self.edge_row, self.edge_col] = 1
        return h

    def syndrome(self, c) -> np.ndarray:
        c = np.asarray(c, dtype=np.uint8)
        return np.bitwise_xor.reduceat(c[self.edge_col], self.row_ptr[:-1]) if self.m else \
            np.zeros(0, dtype=np.uint8)

    def is_codeword(self, c) -> bool:
        return not _syndrome_nonzero(np.asarray(c, dtype=np.uint8), self.row_ptr, self.edge_col)

    def __eq__(self, other):
        return (isinstance(other, SparseParityMatrix) and self.shape == other.shape
                and np.array_equal(self.edge_row, other.edge_row)
                and np.array_equal(self.edge_col, other.edge_col))

    def __repr__(self):
        return f"SparseParityMatrix(m={self.m}, n={self.n}, edges={self.num_edges})"


@njit(cache=True)
def _syndrome_nonzero(c, row_ptr, edge_col):
    for i in range(row_ptr.shape[0] - 1):
        s = 0
        for e in range(row_ptr[i], row_ptr[i + 1]):
            s ^= c[edge_col[e]]
        if s:
            return True
    return False


# --- degree distributions ------------------------------------------------------

@dataclass(frozen=True)
class DegreeDistribution:
    """Node-perspective fractions: ``lam[l]`` of variables, ``rho[r]`` of checks."""
    lam: dict
    rho: dict

    def __post_init__(self):
        for name, d in (("lambda", self.lam), ("rho", self.rho)):
            if not d or any(v < 0 for v in d.values()) or any(k < 1 for k in d):
                raise InfeasibleDistribution(f"{name} must have positive degrees and non-negative mass")
            if abs(sum(d.values()) - 1.0) > 1e-12:
                raise InfeasibleDistribution(f"{name} fractions sum to {sum(d.values())}")

    @property
    def mean_var_degree(self) -> float:
        return sum(l * f for l, f in self.lam.items())

    @property
    def mean_check_degree(self) -> float:
        return sum(r * f for r, f in self.rho.items())

    @property
    def design_rate(self) -> float:
        return 1.0 - self.mean_var_degree / self.mean_check_degree

    @classmethod
    def regular_for_rate(cls, var_degree: int, rate: float) -> "DegreeDistribution":
        """Fixed variable degree; checks at the two integers around the mean."""
        avg = var_degree / (1.0 - rate)
        lo = math.floor(avg)
        frac = avg - lo
        rho = {lo: 1.0} if frac < 1e-12 else {lo: 1.0 - frac, lo + 1: frac}
        return cls({var_degree: 1.0}, rho)


def degree_distribution(h: SparseParityMatrix) -> DegreeDistribution:
    def fractions(deg):
        vals, counts = np.unique(deg, return_counts=True)
        return {int(v): c / deg.size for v, c in zip(vals, counts)}
    return DegreeDistribution(fractions(h.col_degrees()), fractions(h.row_degrees()))


# --- PEG ----------------------------------------------------------------------

@njit(cache=True)
def _peg_kernel(order, var_deg, m):
    n = var_deg.shape[0]
    maxdv = 0
    for v in range(n):
        maxdv = max(maxdv, var_deg[v])
    vadj = np.full((n, max(maxdv, 1)), -1, dtype=np.int64)
    vd = np.zeros(n, dtype=np.int64)
    cadj = np.full((m, n), -1, dtype=np.int64)
    cd = np.zeros(m, dtype=np.int64)
    cseen = np.zeros(m, dtype=np.int64)
    vseen = np.zeros(n, dtype=np.int64)
    level = np.empty(m, dtype=np.int64)
    nxt = np.empty(m, dtype=np.int64)
    stamp = 0
    for v in order:
        for k in range(var_deg[v]):
            stamp += 1
            best = -1
            if k == 0:
                for c in range(m):
                    if best < 0 or cd[c] < cd[best]:
                        best = c
            else:
                vseen[v] = stamp
                nl = 0
                for q in range(vd[v]):
                    c = vadj[v, q]
                    cseen[c] = stamp
                    level[nl] = c
                    nl += 1
                reached = nl
                while True:
                    nn = 0
                    for a in range(nl):
                        c = level[a]
                        for b in range(cd[c]):
                            w = cadj[c, b]
                            if vseen[w] == stamp:
                                continue
                            vseen[w] = stamp
                            for q in range(vd[w]):
                                c2 = vadj[w, q]
                                if cseen[c2] != stamp and cseen[c2] != -stamp:
                                    cseen[c2] = -stamp  # tentatively on the next level
                                    nxt[nn] = c2
                                    nn += 1
                    if nn == 0 or reached + nn == m:
                        # stalled: pick among unreached checks; full: among the farthest
                        for c in range(m):
                            cand = cseen[c] != stamp if nn == 0 else cseen[c] == -stamp
                            if cand and (best < 0 or cd[c] < cd[best]):
                                best = c
                        break
                    for a in range(nn):
                        cseen[nxt[a]] = stamp
                        level[a] = nxt[a]
                    nl = nn
                    reached += nn
            if best < 0:
                return vadj, vd, False
            vadj[v, vd[v]] = best
            vd[v] += 1
            cadj[best, cd[best]] = v
            cd[best] += 1
    return vadj, vd, True


def peg_construct(n: int, dist: DegreeDistribution, rng: np.random.Generator | None = None,
                  m: int | None = None) -> SparseParityMatrix:
    """Progressive edge growth on ``n`` variables.

    Each new edge of a variable goes to a check at maximal distance from it
    in the current graph; ties are broken by lowest check degree, then
    lowest index.  ``rng`` only shuffles which positions get which degree.
    """
    if n < 1:
        raise InfeasibleDistribution("n must be positive")
    counts = {l: f * n for l, f in dist.lam.items()}
    rounded = {l: int(round(c)) for l, c in counts.items()}
    diff = n - sum(rounded.values())
    if diff:
        top = max(rounded, key=lambda l: counts[l] - rounded[l])
        rounded[top] += diff
    if any(c < 0 for c in rounded.values()):
        raise InfeasibleDistribution("degree counts do not round to n nodes")
    var_deg = np.concatenate([np.full(c, l, dtype=np.int64) for l, c in sorted(rounded.items())])
    edges = int(var_deg.sum())
    if m is None:
        m = int(round(edges / dist.mean_check_degree))
    if m < 1 or max(rounded) > m:
        raise InfeasibleDistribution(f"cannot place degree {max(rounded)} variables on {m} checks")
    if rng is not None:
        var_deg = rng.permutation(var_deg)
    order = np.argsort(var_deg, kind="stable")
    vadj, vd, ok = _peg_kernel(order, var_deg, m)
    if not ok:
        raise InfeasibleDistribution("PEG ran out of candidate checks")
    cols = np.repeat(np.arange(n), vd)
    rows = np.concatenate([vadj[v, :vd[v]] for v in range(n)])
    return SparseParityMatrix(m, n, rows, cols)


# --- girth --------------------------------------------------------------------

@njit(cache=True)
def _girth_kernel(edge_row, edge_col, row_ptr, col_edges, col_ptr, n, m):
    big = 1 << 30
    best = big
    total = n + m
    dist = np.full(total, -1, dtype=np.int64)
    parent = np.full(total, -1, dtype=np.int64)
    queue = np.empty(total, dtype=np.int64)
    touched = np.empty(total, dtype=np.int64)
    for root in range(n):
        nt = 0
        head = 0
        tail = 0
        queue[tail] = root
        tail += 1
        dist[root] = 0
        touched[nt] = root
        nt += 1
        while head < tail:
            u = queue[head]
            head += 1
            if 2 * dist[u] + 1 >= best:
                break
            if u < n:
                lo = col_ptr[u]
                hi = col_ptr[u + 1]
            else:
                lo = row_ptr[u - n]
                hi = row_ptr[u - n + 1]
            for q in range(lo, hi):
                w = n + edge_row[col_edges[q]] if u < n else edge_col[q]
                if w == parent[u]:
                    continue
                if dist[w] >= 0:
                    cyc = dist[u] + dist[w] + 1
                    if cyc < best:
                        best = cyc
                else:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue[tail] = w
                    tail += 1
                    touched[nt] = w
                    nt += 1
        for q in range(nt):
            dist[touched[q]] = -1
            parent[touched[q]] = -1
    return 0 if best == big else best


def graph_girth(h: SparseParityMatrix) -> int:
    """Shortest cycle length of the Tanner graph; 0 when there is none."""
    if h.num_edges == 0:
        return 0
    return int(_girth_kernel(h.edge_row, h.edge_col, h.row_ptr, h.col_edges, h.col_ptr,
                             h.n, h.m))


# --- protographs ---------------------------------------------------------------

@dataclass(eq=False)
class Protograph:
    """Core matrix with entries = number of summed circulants per block."""
    core: np.ndarray
    lift: int
    shifts: dict | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.core = np.asarray(self.core, dtype=np.int64)
        if self.core.ndim != 2 or (self.core < 0).any():
            raise ValueError("core must be a 2-D matrix of non-negative integers")
        if self.lift < 1:
            raise ValueError("lift size must be positive")
        if self.core.max(initial=0) > self.lift:
            raise ValueError("more circulants in a block than the lift size allows")

    @property
    def m_c(self) -> int:
        return self.core.shape[0]

    @property
    def n_c(self) -> int:
        return self.core.shape[1]

    @property
    def n(self) -> int:
        return self.lift * self.n_c

    @property
    def design_rate(self) -> float:
        return 1.0 - self.m_c / self.n_c

    def edges(self) -> list[tuple[int, int]]:
        """Base-graph edges in row-major order, one per circulant."""
        return [(i, j) for i in range(self.m_c) for j in range(self.n_c)
                for _ in range(self.core[i, j])]

    def var_degrees(self) -> np.ndarray:
        return self.core.sum(axis=0)


def lift_protograph(p: Protograph) -> SparseParityMatrix:
    """Replace each core entry by its circulants; row ``r`` of the unit shift
    ``s`` has its one in column ``(r + s) mod m``."""
    if p.shifts is None:
        raise MissingShifts("protograph has no shift table")
    m = p.lift
    rows, cols = [], []
    r = np.arange(m)
    for i in range(p.m_c):
        for j in range(p.n_c):
            cnt = p.core[i, j]
            if cnt == 0:
                continue
            s = p.shifts.get((i, j))
            if s is None or len(s) != cnt:
                raise MissingShifts(f"block ({i}, {j}) needs {cnt} shift(s), got {s}")
            if len(set(int(x) % m for x in s)) != cnt:
                raise ValueError(f"block ({i}, {j}) repeats a shift")
            for x in s:
                rows.append(i * m + r)
                cols.append(j * m + (r + int(x)) % m)
    if not rows:
        return SparseParityMatrix(p.m_c * m, p.n_c * m, [], [])
    return SparseParityMatrix(p.m_c * m, p.n_c * m, np.concatenate(rows), np.concatenate(cols))


def _closed_walks(p: Protograph, max_len: int):
    """Closed non-backtracking walks of the base graph, lengths 2..max_len.

    Walks start at a check along their smallest edge id, which still covers
    every cycle once up to reversal.  Each is (edges, signs, ace, length); it
    lifts to cycles exactly when its signed shift sum vanishes mod the lift.
    """
    edges = p.edges()
    by_row: dict[int, list[int]] = {}
    by_col: dict[int, list[int]] = {}
    for e, (i, j) in enumerate(edges):
        by_row.setdefault(i, []).append(e)
        by_col.setdefault(j, []).append(e)
    vdeg = p.var_degrees()
    out = []

    def walk(start, path, signs, ace):
        last = path[-1]
        if len(path) % 2:
            # at a variable: step back to some check
            for e in by_col[edges[last][1]]:
                if e == last or e < start:
                    continue
                nxt = path + [e]
                sg = signs + [-1]
                if edges[e][0] == edges[start][0] and e != start:
                    out.append((nxt, sg, ace, len(nxt)))
                if len(nxt) + 2 <= max_len:
                    walk(start, nxt, sg, ace)
        else:
            for e in by_row[edges[last][0]]:
                if e == last or e < start:
                    continue
                walk(start, path + [e], signs + [1], ace + vdeg[edges[e][1]] - 2)

    for e0 in range(len(edges)):
        walk(e0, [e0], [1], vdeg[edges[e0][1]] - 2)
    return out


def _walk_tables(p: Protograph, max_len: int):
    walks = _closed_walks(p, max_len)
    n_edges = len(p.edges())
    coef = np.zeros((len(walks), n_edges), dtype=np.int64)
    ace = np.zeros(len(walks), dtype=np.int64)
    length = np.zeros(len(walks), dtype=np.int64)
    for w, (path, signs, a, ln) in enumerate(walks):
        for e, s in zip(path, signs):
            coef[w, e] += s
        ace[w] = a
        length[w] = ln
    # walks whose shifts cancel identically (e.g. there and back) never close a cycle
    keep = coef.any(axis=1)
    return coef[keep], ace[keep], length[keep]


def _edge_keys(p: Protograph):
    """(block, k) for each base edge: the k-th circulant of that block."""
    keys = []
    seen: dict = {}
    for blk in p.edges():
        q = seen.get(blk, 0)
        keys.append((blk, q))
        seen[blk] = q + 1
    return keys


def _forbidden(ace, length, eta, min_girth):
    return (ace < eta) | (length < min_girth)


def ace_violations(p: Protograph, d_ace: int = 3, eta: int = 4, min_girth: int = 6) -> int:
    """Number of closed base walks that lift to a forbidden cycle."""
    if p.shifts is None:
        raise MissingShifts("protograph has no shift table")
    coef, ace, length = _walk_tables(p, max(2 * d_ace, min_girth - 2))
    s = np.array([p.shifts[blk][q] for blk, q in _edge_keys(p)], dtype=np.int64)
    closes = (coef @ s) % p.lift == 0
    return int((closes & _forbidden(ace, length, eta, min_girth)).sum())


def ace_select_shifts(p: Protograph, d_ace: int = 3, eta: int = 4,
                      rng: np.random.Generator | None = None, tries: int = 10_000,
                      min_girth: int = 6) -> dict:
    """Randomised greedy circulant selection under an ACE constraint.

    Edges get shifts one at a time.  A shift is admissible if no closed base
    walk completed by this edge, of length at most ``2 * d_ace``, lifts to a
    cycle that is shorter than ``min_girth`` or has ACE below ``eta``.  A
    dead end restarts the pass in a fresh random edge order; ``tries`` bounds
    the number of passes.
    """
    if d_ace < 2:
        raise ValueError("d_ace must be at least 2")
    rng = rng if rng is not None else np.random.default_rng()
    m = p.lift
    coef, ace, length = _walk_tables(p, max(2 * d_ace, min_girth - 2))
    coef = coef[_forbidden(ace, length, eta, min_girth)]
    n_edges = coef.shape[1]
    keys = _edge_keys(p)
    xs = np.arange(m)
    for _ in range(max(tries, 1)):
        order = rng.permutation(n_edges)
        rank = np.empty(n_edges, dtype=np.int64)
        rank[order] = np.arange(n_edges)
        # each walk is checked when its last edge (in this order) gets a shift
        used = coef != 0
        last = np.where(used, rank[None, :], -1).max(axis=1) if coef.size else np.zeros(0, int)
        shifts = np.zeros(n_edges, dtype=np.int64)
        ok = True
        for pos, e in enumerate(order):
            group = coef[last == pos]
            if group.size:
                partial = group @ shifts - group[:, e] * shifts[e]
                hits = (partial[:, None] + group[:, e][:, None] * xs[None, :]) % m == 0
                allowed = ~hits.any(axis=0)
            else:
                allowed = np.ones(m, dtype=bool)
            cand = np.flatnonzero(allowed)
            if cand.size == 0:
                ok = False
                break
            shifts[e] = rng.choice(cand)
        if ok:
            table: dict = {}
            for (blk, _q), s in zip(keys, shifts):
                table.setdefault(blk, []).append(int(s))
            return {k: tuple(v) for k, v in table.items()}
    raise SearchFailed(f"no admissible shifts after {tries} passes (eta={eta}, d_ace={d_ace})")


# --- protograph files -------------------------------------------------------------

def read_protograph(src) -> Protograph:
    """Parse the plain-text protograph format.

    ``key value`` header lines, then a ``core`` block of integer rows and an
    optional ``shifts`` block of ``i j s1 [s2 ...]`` lines.  ``#`` starts a
    comment.
    """
    text = Path(src).read_text() if not hasattr(src, "read") else src.read()
    meta: dict = {}
    core_rows: list[list[int]] = []
    shifts: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line in ("core", "shifts"):
            section = line
            continue
        try:
            if section == "core":
                core_rows.append([int(x) for x in line.split()])
            elif section == "shifts":
                vals = [int(x) for x in line.split()]
                shifts[(vals[0], vals[1])] = tuple(vals[2:])
            else:
                key, value = line.split(None, 1)
                meta[key] = value.strip()
        except (ValueError, IndexError) as exc:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}") from exc
    if not core_rows or len({len(r) for r in core_rows}) != 1:
        raise ValueError("core block missing or ragged")
    lift = int(meta.get("lift", 1))
    return Protograph(np.array(core_rows), lift, shifts or None, meta)


def write_protograph(p: Protograph, dst=None) -> str:
    buf = io.StringIO()
    for k, v in p.meta.items():
        if k != "lift":
            buf.write(f"{k} {v}\n")
    buf.write(f"lift {p.lift}\ncore\n")
    for row in p.core:
        buf.write(" ".join(str(int(x)) for x in row) + "\n")
    if p.shifts:
        buf.write("shifts\n")
        for (i, j) in sorted(p.shifts):
            buf.write(f"{i} {j} " + " ".join(str(s) for s in p.shifts[(i, j)]) + "\n")
    text = buf.getvalue()
    if dst is not None:
        Path(dst).write_text(text)
    return text


def _protograph_path(rate: float):
    name = f"{rate_tag(rate)}.txt"
    return resources.files("onebitfec") / "data" / "protographs" / name


@lru_cache(maxsize=None)
def shipped_protograph(rate: float) -> Protograph:
    with _protograph_path(rate).open("r") as fh:
        return read_protograph(fh)


# --- alist -------------------------------------------------------------------

def write_alist(h: SparseParityMatrix, dst=None) -> str:
    cd = h.col_degrees()
    rd = h.row_degrees()
    lines = [f"{h.n} {h.m}", f"{cd.max(initial=0)} {rd.max(initial=0)}",
             " ".join(map(str, cd)), " ".join(map(str, rd))]
    wc, wr = cd.max(initial=0), rd.max(initial=0)
    for j in range(h.n):
        idx = list(h.col(j) + 1) + [0] * (wc - cd[j])
        lines.append(" ".join(map(str, idx)))
    for i in range(h.m):
        idx = list(h.row(i) + 1) + [0] * (wr - rd[i])
        lines.append(" ".join(map(str, idx)))
    text = "\n".join(lines) + "\n"
    if dst is not None:
        Path(dst).write_text(text)
    return text


def read_alist(src) -> SparseParityMatrix:
    text = Path(src).read_text() if not hasattr(src, "read") else src.read()
    tok = iter(int(x) for x in text.split())
    n, m = next(tok), next(tok)
    next(tok), next(tok)
    cd = [next(tok) for _ in range(n)]
    rd = [next(tok) for _ in range(m)]
    wc, wr = max(cd, default=0), max(rd, default=0)
    rows, cols = [], []
    for j in range(n):
        vals = [next(tok) for _ in range(wc)]
        for v in vals[:cd[j]]:
            rows.append(v - 1)
            cols.append(j)
    h = SparseParityMatrix(m, n, rows, cols)
    for i in range(m):
        vals = [next(tok) for _ in range(wr)]
        if sorted(v - 1 for v in vals[:rd[i]]) != list(h.row(i)):
            raise ValueError(f"alist row {i} disagrees with the column lists")
    return h


# --- encoding ---------------------------------------------------------------------

@njit(cache=True)
def _rref_packed(words, n):
    """Reduced row echelon form of a bit-packed matrix; returns pivot columns."""
    m = words.shape[0]
    nw = words.shape[1]
    pivots = np.empty(min(m, n), dtype=np.int64)
    rank = 0
    for c in range(n):
        if rank == m:
            break
        wi = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        p = -1
        for r in range(rank, m):
            if words[r, wi] & bit:
                p = r
                break
        if p < 0:
            continue
        if p != rank:
            for w in range(nw):
                tmp = words[p, w]
                words[p, w] = words[rank, w]
                words[rank, w] = tmp
        for r in range(m):
            if r != rank and words[r, wi] & bit:
                for w in range(wi, nw):
                    words[r, w] ^= words[rank, w]
        pivots[rank] = c
        rank += 1
    return pivots[:rank]


def _pack_rows(h: np.ndarray) -> np.ndarray:
    m, n = h.shape
    nw = (n + 63) // 64
    padded = np.zeros((m, nw * 64), dtype=np.uint8)
    padded[:, :n] = h
    bits = np.packbits(padded.reshape(m, nw, 64)[:, :, ::-1], axis=2, bitorder="big")
    return bits.view(">u8").reshape(m, nw).astype(np.uint64)


def _unpack_rows(words: np.ndarray, n: int) -> np.ndarray:
    m, nw = words.shape
    b = np.unpackbits(words.astype(">u8").view(np.uint8).reshape(m, nw, 8), axis=2,
                      bitorder="big")
    return b.reshape(m, nw, 64)[:, :, ::-1].reshape(m, nw * 64)[:, :n]


@dataclass(frozen=True, eq=False)
class SystematicForm:
    """Codeword layout: message bits at ``info`` and parity at ``pivots``.

    Pivots are the first linearly independent columns of ``H`` scanning left
    to right; the message occupies the remaining columns in increasing order.
    """
    pivots: np.ndarray
    info: np.ndarray
    parity_map: np.ndarray  # float32 (rank x k); parity = P @ msg mod 2

    @property
    def rank(self) -> int:
        return int(self.pivots.size)

    @property
    def k(self) -> int:
        return int(self.info.size)


def systematic_form(h: SparseParityMatrix) -> SystematicForm:
    words = _pack_rows(h.to_dense())
    pivots = _rref_packed(words, h.n)
    rank = pivots.size
    reduced = _unpack_rows(words[:rank], h.n)
    mask = np.ones(h.n, dtype=bool)
    mask[pivots] = False
    info = np.flatnonzero(mask)
    pm = reduced[:, info].astype(np.float32)
    for a in (pivots, info, pm):
        a.flags.writeable = False
    return SystematicForm(pivots, info, pm)


def ldpc_encode(h: SparseParityMatrix, msg, form: SystematicForm | None = None) -> np.ndarray:
    form = form if form is not None else systematic_form(h)
    msg = np.asarray(msg, dtype=np.uint8).reshape(-1)
    if msg.shape[0] != form.k:
        raise LengthMismatch(f"expected {form.k} message bits, got {msg.shape[0]}")
    c = np.zeros(h.n, dtype=np.uint8)
    c[form.info] = msg
    if form.rank:
        c[form.pivots] = (form.parity_map @ msg.astype(np.float32)).astype(np.int64) & 1
    return c


# --- decoding ------------------------------------------------------------------

@njit(cache=True)
def _spa_kernel(llr, edge_col, row_ptr, col_edges, col_ptr, max_iter, clamp):
    n = llr.shape[0]
    m = row_ptr.shape[0] - 1
    ne = edge_col.shape[0]
    c2v = np.zeros(ne)
    v2c = np.zeros(ne)
    post = llr.copy()
    hard = np.zeros(n, dtype=np.uint8)
    maxdeg = 1
    for i in range(m):
        maxdeg = max(maxdeg, row_ptr[i + 1] - row_ptr[i])
    t = np.empty(maxdeg)
    pre = np.empty(maxdeg + 1)
    it = 0
    while True:
        erased = False
        for v in range(n):
            hard[v] = 1 if post[v] < 0.0 else 0
            if post[v] == 0.0:
                erased = True
        ok = not erased
        if ok:
            for i in range(m):
                s = 0
                for e in range(row_ptr[i], row_ptr[i + 1]):
                    s ^= hard[edge_col[e]]
                if s:
                    ok = False
                    break
        if ok:
            return hard, True, it
        if it == max_iter:
            return hard, False, it
        it += 1
        # variable to check
        for v in range(n):
            for q in range(col_ptr[v], col_ptr[v + 1]):
                e = col_edges[q]
                x = post[v] - c2v[e]
                if x > clamp:
                    x = clamp
                elif x < -clamp:
                    x = -clamp
                v2c[e] = x
        # check to variable, tanh rule with prefix/suffix products
        for i in range(m):
            lo = row_ptr[i]
            d = row_ptr[i + 1] - lo
            pre[0] = 1.0
            for a in range(d):
                t[a] = math.tanh(0.5 * v2c[lo + a])
                pre[a + 1] = pre[a] * t[a]
            suf = 1.0
            for a in range(d - 1, -1, -1):
                prod = pre[a] * suf
                if prod >= 1.0:
                    prod = 1.0 - 1e-16
                elif prod <= -1.0:
                    prod = -1.0 + 1e-16
                c2v[lo + a] = 2.0 * math.atanh(prod)
                suf *= t[a]
        for v in range(n):
            acc = llr[v]
            for q in range(col_ptr[v], col_ptr[v + 1]):
                acc += c2v[col_edges[q]]
            post[v] = acc


@dataclass(frozen=True, eq=False)
class SpaResult:
    bits: np.ndarray
    converged: bool
    iterations: int


def sum_product_decode(h: SparseParityMatrix, llr, max_iter: int = 50,
                       clamp: float = LLR_CLAMP) -> SpaResult:
    """Flooding sum-product decoding.

    Stops as soon as the hard decision is a codeword (checked before the
    first iteration too).  A zero posterior counts as undecided, so an
    all-zero input never reports convergence.
    """
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    if llr.shape != (h.n,):
        raise LengthMismatch(f"expected {h.n} LLRs, got shape {llr.shape}")
    bits, ok, it = _spa_kernel(llr, h.edge_col, h.row_ptr, h.col_edges, h.col_ptr,
                               int(max_iter), float(clamp))
    return SpaResult(bits, bool(ok), int(it))


# --- codes ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LdpcCode:
    H: SparseParityMatrix
    construction: str
    max_iter: int = 50
    info: dict = field(default_factory=dict)

    @cached_property
    def form(self) -> SystematicForm:
        return systematic_form(self.H)

    @property
    def n(self) -> int:
        return self.H.n

    @property
    def k(self) -> int:
        return self.form.k

    @property
    def rate(self) -> float:
        return self.k / self.n

    @cached_property
    def girth(self) -> int:
        return graph_girth(self.H)

    def metadata(self) -> dict:
        meta = {"family": "ldpc", "construction": self.construction, "n": self.n,
                "m": self.H.m, "rank": self.form.rank, "k": self.k,
                "edges": self.H.num_edges, "girth": self.girth, "max_iter": self.max_iter}
        meta.update(self.info)
        return meta

    def encode(self, msg) -> np.ndarray:
        return ldpc_encode(self.H, msg, self.form)

    def decode(self, llr) -> tuple[np.ndarray, bool]:
        res = sum_product_decode(self.H, llr, self.max_iter)
        return res.bits[self.form.info].copy(), res.converged


@lru_cache(maxsize=None)
def peg_code(rate: float, n: int = BLOCK_LENGTH, max_iter: int = 50) -> LdpcCode:
    if rate not in PEG_VAR_DEGREE:
        raise ValueError(f"no PEG profile for rate {rate}")
    dist = DegreeDistribution.regular_for_rate(PEG_VAR_DEGREE[rate], rate)
    h = peg_construct(n, dist)
    return LdpcCode(h, "PEG", max_iter, {"rate_design": rate,
                                         "var_degree": PEG_VAR_DEGREE[rate]})


@lru_cache(maxsize=None)
def protograph_code(rate: float, max_iter: int = 50) -> LdpcCode:
    p = shipped_protograph(rate)
    h = lift_protograph(p)
    return LdpcCode(h, "ACE", max_iter, {"rate_design": rate, "lift": p.lift,
                                         "protograph": dict(p.meta)})


def make_ldpc_code(rate: float, construction: str = "PEG", max_iter: int = 50) -> LdpcCode:
    construction = construction.upper()
    if construction == "PEG":
        return peg_code(rate, BLOCK_LENGTH, max_iter)
    if construction in ("ACE", "PROTOGRAPH", "DE"):
        return protograph_code(rate, max_iter)
    raise ValueError(f"unknown LDPC construction {construction!r}")
