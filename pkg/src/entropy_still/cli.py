"""Command-line front end: ``entropy-still <command> ...``.

Exit codes: 0 success, 1 I/O or format error, 2 configuration or
degenerate data, 3 insufficient data. Every command prints a JSON envelope
``{tool, version, params, results}``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bitstream import extract_bits, read_bits, read_samples_csv, write_bits, write_samples_csv
from .correctors import DistillConfig, RemapTable, distill, moonshine, von_neumann
from .entropy import (
    METHODS,
    AcfSequence,
    acf_from_psd,
    acf_from_samples,
    compare_det_ratios,
    mutual_information,
    shannon_rate,
)
from .exceptions import (
    BitFormatError,
    ConfigError,
    DegenerateDataError,
    EntropyStillError,
    InsufficientDataError,
    NotPositiveDefiniteError,
)
from .randtests import BatteryConfig, run_battery
from .simulator import SourceModel, generate
from .sweep import sweep

TOOL = "entropy-still"
SEED_ENV = "ENTROPY_STILL_SEED"

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_INSUFFICIENT = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def envelope(command, params, results):
    return {
        "tool": TOOL,
        "version": __version__,
        "params": dict(params, command=command),
        "results": results,
    }


def _emit(doc, stream=None):
    stream = stream or sys.stdout
    stream.write(json.dumps(doc, indent=2, sort_keys=False) + "\n")


def _read_bytes(path):
    if path == "-":
        return sys.stdin.buffer.read()
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from None


def _write_bytes(path, data):
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}", EXIT_IO) from None


def _guess_format(path, fmt):
    if fmt:
        return fmt
    return "packed_msb" if str(path).endswith(".bin") else "ascii01"


def _load_bits(args):
    fmt = _guess_format(args.input, args.format)
    return read_bits(_read_bytes(args.input), fmt, args.bit_count)


def _write_stream(args, stream, summary_doc):
    """Bits to --output (JSON on stdout), or bits to stdout (JSON on stderr)."""
    fmt = _guess_format(args.output or "", args.output_format)
    data = write_bits(stream, fmt)
    if args.output:
        _write_bytes(args.output, data)
        _emit(summary_doc)
    else:
        sys.stdout.buffer.write(data + (b"\n" if fmt == "ascii01" else b""))
        sys.stdout.flush()
        _emit(summary_doc, sys.stderr)


def _load_samples(path, args):
    return read_samples_csv(
        _read_bytes(path),
        adc_bits=args.adc_bits,
        sample_rate_hz=args.sample_rate,
        full_scale=args.full_scale,
    )


def _load_column(path):
    text = _read_bytes(path).decode("utf-8")
    values = []
    for lineno, ln in enumerate(text.splitlines(), 1):
        ln = ln.strip()
        if not ln:
            continue
        try:
            values.append(float(ln))
        except ValueError:
            if lineno == 1:
                continue  # header
            raise CliError(f"{path}: non-numeric value {ln!r} on line {lineno}", EXIT_IO) from None
    return np.array(values)


def _int_range(text):
    """Parse ``4:12`` (inclusive) or ``4,6,8``."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            lo, hi = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            values = list(range(lo, hi + 1, step))
        else:
            values = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; use lo:hi or a,b,c") from None
    if not values:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return values


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"{SEED_ENV} must be an integer, got {raw!r}", EXIT_CONFIG) from None


# -- commands ---------------------------------------------------------------


def cmd_distill(args):
    bits = _load_bits(args)
    cfg = DistillConfig(args.k, args.m)
    if args.table_in:
        try:
            table = RemapTable.from_json(_read_bytes(args.table_in).decode("utf-8"))
        except json.JSONDecodeError as exc:
            raise CliError(f"{args.table_in}: invalid JSON ({exc.msg})", EXIT_IO) from None
        if table.k != cfg.k:
            raise CliError(
                f"table/config mismatch: table k={table.k}, --k={cfg.k}", EXIT_CONFIG
            )
        out = distill(bits, cfg, table)
        source = "table-in"
    else:
        out, table = moonshine(bits, cfg, args.warmup_fraction)
        source = "warmup"
    if args.table_out:
        _write_bytes(args.table_out, (table.to_json() + "\n").encode("utf-8"))
    params = {
        "input": args.input,
        "k": cfg.k,
        "m": cfg.m,
        "warmup_fraction": args.warmup_fraction,
        "table_source": source,
    }
    results = {
        "input_bits": bits.length,
        "output_bits": out.length,
        "retention": out.length / bits.length if bits.length else 0.0,
        "k": cfg.k,
        "m": cfg.m,
        "retained_values": len(table),
    }
    _write_stream(args, out, envelope("distill", params, results))


def cmd_vn(args):
    bits = _load_bits(args)
    out = von_neumann(bits)
    results = {
        "input_bits": bits.length,
        "output_bits": out.length,
        "retention": out.length / bits.length if bits.length else 0.0,
    }
    _write_stream(args, out, envelope("vn", {"input": args.input}, results))


def cmd_extract(args):
    samples = _load_samples(args.input, args)
    out = extract_bits(samples, args.bin_size)
    results = {"input_samples": samples.length, "output_bits": out.length}
    _write_stream(args, out, envelope("extract", {"input": args.input, "bin_size": args.bin_size}, results))


def cmd_entropy(args):
    sources = [s for s in (args.samples, args.acf, args.psd) if s]
    if len(sources) != 1:
        raise CliError("give exactly one of --samples, --acf, --psd", EXIT_CONFIG)
    if args.samples:
        samples = _load_samples(args.samples, args)
        data = samples.to_volts() if args.volts else samples.samples
        acf = acf_from_samples(data, args.order)
    elif args.acf:
        acf = AcfSequence(_load_column(args.acf)[: args.order + 1])
    else:
        acf = acf_from_psd(_load_column(args.psd), args.sample_rate, max_lag=args.order)
    methods = METHODS if args.method == "all" else (args.method,)
    reports = [shannon_rate(acf, m).to_dict() for m in methods]
    results = {"reports": reports, "det_ratio_comparison": compare_det_ratios(acf)}
    params = {"order": acf.order, "method": args.method, "volts": bool(args.volts)}
    _emit(envelope("entropy", params, results))


def cmd_test(args):
    bits = _load_bits(args)
    cfg = BatteryConfig(alpha=args.alpha, block_bits=args.block_bits, min_stream_bits=args.min_bits)
    result = run_battery(bits, cfg)
    if args.text:
        sys.stdout.write(result.report_text() + "\n")
        return
    doc = envelope("test", {"input": args.input, "alpha": cfg.alpha}, result.to_dict())
    _emit(doc)


def cmd_simulate(args):
    if args.config:
        try:
            model = SourceModel.from_json(_read_bytes(args.config).decode("utf-8"))
        except json.JSONDecodeError as exc:
            raise CliError(f"{args.config}: invalid JSON ({exc.msg})", EXIT_IO) from None
    else:
        model = SourceModel()
    seed = args.seed if args.seed is not None else _default_seed()
    if seed is not None:
        model = SourceModel.from_dict(dict(model.to_dict(), seed=seed))
    real = generate(model, args.n_samples, args.devices)
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create {out_dir}: {exc.strerror}", EXIT_IO) from None
    files = []
    for i, stream in enumerate(real.streams):
        path = out_dir / f"{args.prefix}{i}.csv"
        _write_bytes(path, write_samples_csv(stream).encode("utf-8"))
        files.append(str(path))
    results = {"files": files, "theta": real.theta, "saturated": real.saturated}
    _emit(envelope("simulate", {"model": model.to_dict(), "n_samples": args.n_samples}, results))


def cmd_mi(args):
    a = _load_samples(args.a, args)
    b = _load_samples(args.b, args)
    rep = mutual_information(a, b, args.block_len, args.quant_bits)
    params = {"block_len": args.block_len, "quant_bits": args.quant_bits}
    _emit(envelope("mi", params, rep.to_dict()))


def cmd_sweep(args):
    bits = _load_bits(args)
    cfg = BatteryConfig(alpha=args.alpha)
    grid = sweep(bits, args.k_range, args.m_range, battery=cfg, jobs=args.jobs)
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create {out_dir}: {exc.strerror}", EXIT_IO) from None
    ret_path = out_dir / "retention.csv"
    pass_path = out_dir / "pass_fraction.csv"
    _write_bytes(ret_path, grid.to_csv("retention_fraction").encode("utf-8"))
    _write_bytes(pass_path, grid.to_csv("battery_pass_fraction").encode("utf-8"))
    cells = [
        {
            "k": c.k,
            "m": c.m,
            "output_bits": c.output_bits,
            "retention_fraction": c.retention_fraction,
            "battery_pass_fraction": c.battery_pass_fraction,
            "status": c.status,
        }
        for row in grid.cells
        for c in row
    ]
    params = {"input": args.input, "k_values": grid.k_values, "m_values": grid.m_values, "alpha": args.alpha}
    results = {
        "input_bits": grid.input_bits,
        "retention_csv": str(ret_path),
        "pass_fraction_csv": str(pass_path),
        "cells": cells,
    }
    doc = envelope("sweep", params, results)
    _write_bytes(out_dir / "sweep.json", (json.dumps(doc, indent=2) + "\n").encode("utf-8"))
    _emit(doc)
    if grid.all_insufficient:
        raise CliError("every cell produced fewer bits than the battery minimum", EXIT_INSUFFICIENT)


# -- parser -----------------------------------------------------------------


def _bit_input(p):
    p.add_argument("input", help="bit file ('-' for stdin); .bin is packed, else ASCII 0/1")
    p.add_argument("--format", choices=("ascii01", "packed_msb"), help="input format")
    p.add_argument("--bit-count", type=int, help="number of valid bits in the input")


def _bit_output(p):
    p.add_argument("-o", "--output", help="output bit file (default: stdout)")
    p.add_argument("--output-format", choices=("ascii01", "packed_msb"))


def _sample_meta(p):
    p.add_argument("--adc-bits", type=int, default=16)
    p.add_argument("--sample-rate", type=float, default=1.0, help="Hz")
    p.add_argument("--full-scale", type=float, default=1.0, help="volts")


def build_parser():
    parser = argparse.ArgumentParser(prog=TOOL, description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distill", help="Moonshine typical-set distillation")
    _bit_input(p)
    _bit_output(p)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--warmup-fraction", type=float, default=1.0)
    p.add_argument("--table-out", help="write the remap table as JSON")
    p.add_argument("--table-in", help="use a peer's remap table instead of deriving one")
    p.set_defaults(func=cmd_distill)

    p = sub.add_parser("vn", help="Von Neumann corrector")
    _bit_input(p)
    _bit_output(p)
    p.set_defaults(func=cmd_vn)

    p = sub.add_parser("extract", help="bin-mean bit extraction from a sample CSV")
    p.add_argument("input")
    _sample_meta(p)
    p.add_argument("--bin-size", type=int, default=10)
    _bit_output(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("entropy", help="entropy rate from samples, ACF or PSD")
    p.add_argument("--samples", help="sample CSV")
    p.add_argument("--acf", help="single-column ACF CSV (lag 0 first)")
    p.add_argument("--psd", help="single-column one-sided PSD CSV (units^2/Hz)")
    p.add_argument("--order", type=int, default=64)
    p.add_argument("--method", choices=METHODS + ("all",), default="levinson")
    p.add_argument("--volts", action="store_true", help="convert ADC codes to volts first")
    _sample_meta(p)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("test", help="run the nine-statistic randomness battery")
    _bit_input(p)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--block-bits", type=int, default=100)
    p.add_argument("--min-bits", type=int, default=1000)
    p.add_argument("--text", action="store_true", help="print the tabular report")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("simulate", help="generate correlated device sample streams")
    p.add_argument("--config", help="SourceModel JSON")
    p.add_argument("--n-samples", type=int, default=150_000)
    p.add_argument("--devices", type=int, default=2)
    p.add_argument("--seed", type=int, help=f"overrides the model seed (default ${SEED_ENV})")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--prefix", default="device")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mi", help="mutual information between two sample CSVs")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--block-len", type=int, default=150_000)
    p.add_argument("--quant-bits", type=int, default=6)
    _sample_meta(p)
    p.set_defaults(func=cmd_mi)

    p = sub.add_parser("sweep", help="retention and battery grids over (k, m)")
    _bit_input(p)
    p.add_argument("--k-range", type=_int_range, default=_int_range("4:12"))
    p.add_argument("--m-range", type=_int_range, default=_int_range("0:16"))
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", default="sweep_out")
    p.set_defaults(func=cmd_sweep)
    return parser


def _exit_code(exc):
    if isinstance(exc, InsufficientDataError):
        return EXIT_INSUFFICIENT
    if isinstance(exc, BitFormatError):
        return EXIT_IO
    if isinstance(exc, (ConfigError, DegenerateDataError, NotPositiveDefiniteError)):
        return EXIT_CONFIG
    return EXIT_CONFIG


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except CliError as exc:
        print(f"{TOOL}: error: {exc}", file=sys.stderr)
        return exc.code
    except EntropyStillError as exc:
        print(f"{TOOL}: error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
