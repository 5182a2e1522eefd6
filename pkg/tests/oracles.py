"""Independent brute-force references shared by the unit and acceptance tests."""
import itertools

import numpy as np

from onebitfec import polar as P


def polar_codebook(code):
    """All (message, codeword) pairs of a CRC-aided polar code, by enumeration."""
    msgs = np.array(list(itertools.product((0, 1), repeat=code.K)), dtype=np.uint8)
    words = np.array([P.polar_encode(code, P.attach_crc(code, m)) for m in msgs])
    return msgs, words


def ml_decode(msgs, words, llr):
    """Maximum-correlation codeword; returns (message, metric, runner-up gap)."""
    corr = (1 - 2 * words.astype(np.float64)) @ llr
    order = np.argsort(-corr, kind="stable")
    gap = corr[order[0]] - corr[order[1]] if len(order) > 1 else np.inf
    return msgs[order[0]], gap


def bsc_flip_oracle(snr_db):
    import mpmath
    mpmath.mp.dps = 40
    x = mpmath.sqrt(mpmath.mpf(10) ** (mpmath.mpf(snr_db) / 10))
    return float(mpmath.erfc(x / mpmath.sqrt(2)) / 2)


def bipartite_girth(h):
    """Shortest cycle of the Tanner graph of dense ``h`` (0 if acyclic), plain BFS."""
    from collections import deque
    h = np.asarray(h)
    m, n = h.shape
    adj = [[] for _ in range(m + n)]
    for i, j in zip(*np.nonzero(h)):
        adj[n + i].append(j)
        adj[j].append(n + i)
    best = 0
    for root in range(m + n):
        dist = {root: 0}
        parent = {root: -1}
        q = deque([root])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    parent[v] = u
                    q.append(v)
                elif parent[u] != v:
                    cyc = dist[u] + dist[v] + 1
                    if best == 0 or cyc < best:
                        best = cyc
    return best
