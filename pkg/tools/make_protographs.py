"""Regenerate the shipped quasi-cyclic protograph files.

Cores are fixed stand-ins (column weight 3, balanced rows); shifts come from
the ACE-constrained greedy search.  For each rate the strictest ACE
threshold the search can meet is recorded in the file.

    python tools/make_protographs.py [outdir]
"""
import sys
from pathlib import Path

import numpy as np

from onebitfec.rates import STUDY_RATES, rate_tag
from onebitfec.ldpc import (Protograph, SearchFailed, ace_select_shifts, ace_violations,
                            graph_girth, lift_protograph, write_protograph)

N_C = 16
LIFT = 64
D_ACE = 3
SEED = 2024


def balanced_core(m_c: int, weight: int = 3) -> np.ndarray:
    core = np.zeros((m_c, N_C), dtype=int)
    for j in range(N_C):
        rows = sorted(range(m_c), key=lambda r: (core[r].sum(), (r - j) % m_c))[:weight]
        core[rows, j] = 1
    return core


def core_for(rate: float) -> np.ndarray:
    m_c = round((1 - rate) * N_C)
    if m_c >= 3:
        return balanced_core(m_c)
    if m_c == 2:
        return np.array([[2, 1] * (N_C // 2), [1, 2] * (N_C // 2)])
    # single block row: 6 columns of weight 3, 10 of weight 2
    return np.array([[3] * 6 + [2] * 10])


def main(outdir: Path):
    outdir.mkdir(parents=True, exist_ok=True)
    for rate in STUDY_RATES:
        core = core_for(rate)
        for eta in (4, 3, 2, 1, 0):
            p = Protograph(core, LIFT)
            try:
                p.shifts = ace_select_shifts(p, D_ACE, eta, np.random.default_rng(SEED), tries=200)
            except SearchFailed:
                continue
            break
        else:
            raise SystemExit(f"rate {rate}: no shifts found")
        p.meta = {"rate": f"{rate}", "d_ace": str(D_ACE), "eta": str(eta), "seed": str(SEED)}
        girth = graph_girth(lift_protograph(p))
        assert ace_violations(p, D_ACE, eta) == 0
        path = outdir / f"{rate_tag(rate)}.txt"
        write_protograph(p, path)
        print(f"{path.name}: eta={eta} girth={girth}")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else
         Path(__file__).resolve().parents[1] / "src" / "onebitfec" / "data" / "protographs")
