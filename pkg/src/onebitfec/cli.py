"""Command-line front end: ``onebitfec {capacity,construct,simulate,presets}``.

All output is CSV or plain text.  ``simulate`` writes one CSV row per SNR
point as soon as that point finishes, so an interrupted run still leaves
every completed row on disk.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import __version__
from .codecs import build_codec
from .ldpc import write_alist
from .presets import PRESET_DIR_ENV, find_preset, list_presets, load_config, preset_dir
from .sim import CSV_HEADER, capacity_curve, run_sweep


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _positive_int(text: str) -> int:
    try:
        v = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="onebitfec",
        description="Channel codes over BPSK/AWGN with a 1-bit quantizing receiver.",
        epilog=f"Presets are read from ${PRESET_DIR_ENV} when set.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="BSC capacity of the quantized channel vs SNR (CSV)")
    p.add_argument("--from", dest="lo", type=float, default=-2.0, help="first SNR in dB")
    p.add_argument("--to", dest="hi", type=float, default=8.0, help="last SNR in dB")
    p.add_argument("--step", type=float, default=0.25, help="grid step in dB")
    p.add_argument("--out", type=Path, help="output file (default: stdout)")

    p = sub.add_parser("presets", help="list the shipped configurations")
    p.add_argument("--dir", type=Path, help="preset directory to list")

    for name, text in (("construct", "write code artifacts (info sets, alist, generators)"),
                       ("simulate", "FER/BER sweep to CSV")):
        p = sub.add_parser(name, help=text)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--preset", help="preset name, e.g. r0500_polar_ga")
        src.add_argument("--config", type=Path, help="path to a TOML config file")
        if name == "construct":
            p.add_argument("--out", type=Path,
                           help="output directory (default: ./<config name>)")
        else:
            p.add_argument("--seed", type=int, help="master seed (overrides the config)")
            p.add_argument("--workers", type=_positive_int, default=1,
                           help="worker processes; results do not depend on this")
            p.add_argument("--max-frames", type=_positive_int)
            p.add_argument("--min-errors", type=_positive_int,
                           help="frame errors that end an SNR point")
            p.add_argument("--snr", type=_float_list, help="SNR grid override, e.g. 1,1.5,2")
            p.add_argument("--out", type=Path,
                           help="output CSV; a directory gets <config name>.csv (default: stdout)")
    return ap


def _open_out(path: Path | None):
    if path is None:
        return sys.stdout, False
    path.parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline=""), True


def cmd_capacity(args) -> int:
    rows = capacity_curve(args.lo, args.hi, args.step)
    fh, close = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("snr_db", "p", "capacity"))
        for s, p, c in rows:
            w.writerow((f"{s:g}", f"{p:.10e}", f"{c:.10f}"))
    finally:
        if close:
            fh.close()
    return 0


def cmd_presets(args) -> int:
    d = args.dir or preset_dir()
    names = list_presets(d)
    if not names:
        print(f"no presets found in {d}", file=sys.stderr)
        return 1
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("name", "rate", "family", "parameters"))
    for name in names:
        cfg = load_config(Path(d) / f"{name}.toml")
        params = " ".join(f"{k}={v}" for k, v in cfg.codec.params.items())
        rate = cfg.extra.get("rate", "")
        w.writerow((name, rate, cfg.codec.family, params))
    return 0


def _config_path(args) -> Path:
    return args.config if args.config is not None else find_preset(args.preset)


def _write_lines(path: Path, lines) -> None:
    path.write_text("".join(f"{x}\n" for x in lines))


def _metadata_lines(meta: dict, prefix: str = ""):
    for key, val in meta.items():
        if isinstance(val, dict):
            yield from _metadata_lines(val, f"{prefix}{key}.")
        else:
            yield f"{prefix}{key} = {val}"


def _generator_text(code) -> str:
    # highest-degree coefficient first
    return format(code.g, "b")


def construct_artifacts(cfg, out: Path) -> list[Path]:
    """Write human-readable construction artifacts for ``cfg`` into ``out``."""
    codec = build_codec(cfg.codec)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def put(name, lines):
        path = out / name
        _write_lines(path, lines)
        written.append(path)

    put("metadata.txt", _metadata_lines(codec.metadata()))
    family = cfg.codec.family
    if family == "polar":
        put("info_set.txt", codec.code.info_set)
        put("frozen_set.txt", codec.code.frozen_set)
    elif family == "ldpc":
        path = out / "H.alist"
        path.write_text(write_alist(codec.code.H))
        written.append(path)
        put("info_positions.txt", codec.code.form.info.tolist())
    elif family == "bch":
        put("generator.txt", [_generator_text(codec.code)])
    elif family == "tpc":
        for tag, comp in (("a", codec.code.code_A), ("b", codec.code.code_B)):
            inner = getattr(comp, "inner", comp)
            if hasattr(inner, "g"):
                put(f"generator_{tag}.txt", [_generator_text(inner)])
    return written


def cmd_construct(args) -> int:
    path = _config_path(args)
    cfg = load_config(path)
    out = args.out or Path(cfg.label or path.stem)
    for p in construct_artifacts(cfg, out):
        print(p)
    return 0


def cmd_simulate(args) -> int:
    path = _config_path(args)
    overrides = {"seed": args.seed, "max_frames": args.max_frames,
                 "min_frame_errors": args.min_errors, "snr_db": args.snr,
                 "workers": args.workers}
    cfg = load_config(path, overrides)
    out = args.out
    if out is not None and out.is_dir():
        out = out / f"{cfg.label or path.stem}.csv"
    fh, close = _open_out(out)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    fh.flush()

    def emit(pt):
        w.writerow(pt.row())
        fh.flush()

    try:
        run_sweep(cfg, on_point=emit)
    finally:
        if close:
            fh.close()
    return 0


_COMMANDS = {"capacity": cmd_capacity, "presets": cmd_presets,
             "construct": cmd_construct, "simulate": cmd_simulate}


def run_cli(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:  # includes ConfigError
        print(f"onebitfec: error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        print("onebitfec: interrupted; completed rows were kept", file=sys.stderr)
        return 130


def main() -> None:
    sys.exit(run_cli())
