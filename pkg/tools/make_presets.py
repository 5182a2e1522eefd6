"""Regenerate the shipped TOML presets (6 rates x 8 schemes)."""
from __future__ import annotations

import argparse
import math
from pathlib import Path

from onebitfec.channel import capacity_inverse
from onebitfec.codecs import study_codec_specs
from onebitfec.rates import STUDY_RATES, rate_tag

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "onebitfec" / "presets"


def _toml_value(v) -> str:
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def snr_grid(rate: float) -> list[float]:
    # from just below the capacity limit, 5 dB wide in 0.5 dB steps
    start = math.floor(capacity_inverse(rate) * 2) / 2
    return [start + 0.5 * i for i in range(11)]


def render(name: str, rate: float, spec) -> str:
    lines = [f'name = "{name}"', f"rate = {rate!r}", "", "[codec]",
             f'family = "{spec.family}"']
    lines += [f"{k} = {_toml_value(v)}" for k, v in spec.params.items()]
    lines += ["", "[sim]", f"snr_db = {_toml_value(snr_grid(rate))}",
              "max_frames = 10000000", "min_frame_errors = 100", "seed = 1",
              "batch_size = 100", ""]
    return "\n".join(lines)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for rate in STUDY_RATES:
        for scheme, spec in study_codec_specs(rate).items():
            name = f"{rate_tag(rate)}_{scheme}"
            (args.out / f"{name}.toml").write_text(render(name, rate, spec))
            print(name)


if __name__ == "__main__":
    main()
