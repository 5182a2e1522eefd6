"""Monte Carlo FER/BER measurement over BPSK + AWGN + 1-bit ADC.

Frame ``f`` at an SNR point draws all of its randomness from
``SeedSequence(seed, spawn_key=(snr_key, f))``, where ``snr_key`` is the SNR
in milli-dB.  Frames are grouped into fixed-size batches and the stopping
rule is only evaluated between batches, in batch order, so the outcome does
not depend on how many worker processes computed the batches.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import (ChannelParams, awgn_quantize, bpsk_modulate, bsc_llr_magnitude,
                      bsc_transition_prob, channel_capacity, demap_hard)
from .codecs import CodecSpec, build_codec

CSV_HEADER = ("snr_db", "frames", "frame_errors", "bit_errors", "fer", "ber", "ci_low", "ci_high")
Z95 = 1.959963984540054


@dataclass(frozen=True)
class FerPoint:
    snr_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    fer: float
    ber: float
    ci_low: float
    ci_high: float

    def row(self) -> list[str]:
        return [f"{self.snr_db:g}", str(self.frames), str(self.frame_errors),
                str(self.bit_errors), f"{self.fer:.8e}", f"{self.ber:.8e}",
                f"{self.ci_low:.8e}", f"{self.ci_high:.8e}"]


@dataclass
class SimConfig:
    codec: CodecSpec
    snr_grid: list
    max_frames: int = 10_000_000
    min_frame_errors: int = 100
    seed: int = 0
    workers: int = 1
    batch_size: int = 100
    fer_floor: float = 1e-5
    label: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.snr_grid = [float(s) for s in self.snr_grid]
        if not self.snr_grid:
            raise ValueError("snr_grid must not be empty")
        if any(b <= a for a, b in zip(self.snr_grid, self.snr_grid[1:])):
            raise ValueError("snr_grid must be strictly increasing")
        if self.max_frames < 1 or self.batch_size < 1 or self.min_frame_errors < 1:
            raise ValueError("max_frames, batch_size and min_frame_errors must be positive")
        if self.workers < 1:
            raise ValueError("workers must be positive")


def wilson_interval(errors: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (95% by default)."""
    if trials < 1 or not 0 <= errors <= trials:
        raise ValueError("need 0 <= errors <= trials and trials >= 1")
    p = errors / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == trials else min(1.0, centre + half)
    return lo, hi


def snr_key(snr_db: float) -> int:
    return int(round(snr_db * 1000)) & 0xFFFFFFFF


def frame_rng(seed: int, snr_db: float, frame: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(snr_key(snr_db), frame)))


def simulate_frame(codec, snr_db: float, seed: int, frame: int) -> tuple[bool, int]:
    """One frame through the whole chain; returns (frame error, bit errors)."""
    rng = frame_rng(seed, snr_db, frame)
    msg = rng.integers(0, 2, codec.k, dtype=np.uint8)
    q = awgn_quantize(bpsk_modulate(codec.encode(msg)), ChannelParams.from_snr(snr_db), rng)
    if codec.demap == "hard":
        r = demap_hard(q)
    else:
        r = q * bsc_llr_magnitude(snr_db)
    est, ok = codec.decode(r)
    bit_errors = int(np.count_nonzero(est != msg))
    return (bit_errors > 0 or not ok), bit_errors


def _run_batch(codec, snr_db: float, seed: int, start: int, count: int) -> tuple[int, int, int]:
    fe = be = 0
    for f in range(start, start + count):
        err, bits = simulate_frame(codec, snr_db, seed, f)
        fe += err
        be += bits
    return count, fe, be


_WORKER_CODEC = None


def _worker_init(spec: CodecSpec):
    global _WORKER_CODEC
    _WORKER_CODEC = build_codec(spec)


def _worker_batch(snr_db, seed, start, count):
    return _run_batch(_WORKER_CODEC, snr_db, seed, start, count)


def _point(snr_db, frames, fe, be, k) -> FerPoint:
    lo, hi = wilson_interval(fe, frames)
    return FerPoint(snr_db, frames, fe, be, fe / frames, be / (frames * k) if k else 0.0, lo, hi)


def _batches(cfg: SimConfig):
    start = 0
    while start < cfg.max_frames:
        count = min(cfg.batch_size, cfg.max_frames - start)
        yield start, count
        start += count


def run_point(cfg: SimConfig, snr_db: float, codec=None, pool=None) -> FerPoint:
    codec = codec if codec is not None else build_codec(cfg.codec)
    frames = fe = be = 0
    if pool is None:
        for start, count in _batches(cfg):
            n, e, b = _run_batch(codec, snr_db, cfg.seed, start, count)
            frames, fe, be = frames + n, fe + e, be + b
            if fe >= cfg.min_frame_errors:
                break
        return _point(snr_db, frames, fe, be, codec.k)

    # keep a window of batches in flight and fold results back in order
    pending = []
    gen = _batches(cfg)
    window = 2 * cfg.workers
    done = False
    while not done:
        while len(pending) < window:
            nxt = next(gen, None)
            if nxt is None:
                break
            pending.append(pool.submit(_worker_batch, snr_db, cfg.seed, *nxt))
        if not pending:
            break
        n, e, b = pending.pop(0).result()
        frames, fe, be = frames + n, fe + e, be + b
        done = fe >= cfg.min_frame_errors
    for fut in pending:
        fut.cancel()
    return _point(snr_db, frames, fe, be, codec.k)


def run_sweep(cfg: SimConfig, on_point=None) -> list[FerPoint]:
    """``run_point`` over the grid; stops after the first point below ``fer_floor``."""
    codec = build_codec(cfg.codec)
    pool = None
    if cfg.workers > 1:
        pool = ProcessPoolExecutor(cfg.workers, initializer=_worker_init, initargs=(cfg.codec,))
    points = []
    try:
        for snr in cfg.snr_grid:
            pt = run_point(cfg, snr, codec, pool)
            points.append(pt)
            if on_point is not None:
                on_point(pt)
            if pt.fer < cfg.fer_floor:
                break
    finally:
        if pool is not None:
            pool.shutdown(wait=True, cancel_futures=True)
    return points


def sweep_is_monotone(points) -> bool:
    """False if some higher-SNR point has FER significantly above a lower one,
    i.e. its interval lies entirely above the earlier point's interval."""
    for i, a in enumerate(points):
        for b in points[i + 1:]:
            if b.ci_low > a.ci_high:
                return False
    return True


def capacity_curve(snr_lo: float, snr_hi: float, step: float) -> list[tuple[float, float, float]]:
    if not snr_lo < snr_hi or step <= 0:
        raise ValueError("need snr_lo < snr_hi and step > 0")
    count = int(math.floor((snr_hi - snr_lo) / step + 1e-9)) + 1
    out = []
    for i in range(count):
        s = round(snr_lo + i * step, 10)
        p = bsc_transition_prob(s)
        out.append((s, p, channel_capacity(p)))
    return out


def write_points_csv(points, fh=None) -> str:
    buf = fh if fh is not None else io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for pt in points:
        w.writerow(pt.row())
    return buf.getvalue() if fh is None else ""

