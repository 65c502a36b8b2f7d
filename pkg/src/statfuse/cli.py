"""statfuse command line: fuse, evaluate, compare, synth.

Exit codes: 0 success, 1 usage / I/O / parse / alignment errors, 2 numeric
failures.  Logs go to stderr; data goes to files (or stdout for reports).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import io as imio
from .errors import DimensionError, NumericError, ParseError, RangeError, ShapeError, StatfuseError
from .fusion import FusionConfig, FusionMethod, fuse_band, fused_to_stack
from .metrics import QualityReport, QualityRow, evaluate_stack, origin_row
from .raster import check_alignment
from .synth import bundled_scene, synthesize_pair
from .window_stats import DEFAULT_EPSILON, WindowSpec

log = logging.getLogger("statfuse")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
EPSILON_ENV = "STATFUSE_EPSILON"
PAPER_WINDOWS = {"lmm": "11x11", "lmvm": "11x11", "rvs": "5x5", "lcm": "11x11"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunManifest:
    """Everything that determines a run's outputs."""

    subcommand: str
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    method: str | None = None
    windows: dict[str, str] = field(default_factory=dict)
    ratio: int | None = None
    epsilon: float | None = None
    clamp: list[float] | None = None
    levels: int | None = None
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def default_epsilon() -> float:
    raw = os.environ.get(EPSILON_ENV)
    if raw in (None, ""):
        return DEFAULT_EPSILON
    try:
        value = float(raw)
    except ValueError:
        raise UsageError(f"{EPSILON_ENV}={raw!r} is not a number") from None
    if not value >= 0:
        raise UsageError(f"{EPSILON_ENV} must be >= 0, got {raw}")
    return value


def _float_pair(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty clamp range {text!r}")
    return lo, hi


def _window(text: str) -> str:
    try:
        WindowSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def _method_list(text: str) -> list[FusionMethod]:
    try:
        return [FusionMethod.parse(m) for m in text.split(",") if m.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_fusion_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ratio", type=int, default=1, help="PAN/MS resolution ratio (integer)")
    p.add_argument("--window", type=_window, help="window WxH applied to every method")
    for name, default in PAPER_WINDOWS.items():
        p.add_argument(f"--window-{name}", type=_window, help=f"{name.upper()} window (default {default})")
    p.add_argument("--epsilon", type=float, help=f"degeneracy threshold (default 1e-12, env {EPSILON_ENV})")
    p.add_argument("--clamp", type=_float_pair, metavar="LO,HI", help="clamp fused values to [LO, HI]")


def _add_report_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--levels", type=int, default=256, help="histogram levels for entropy")
    p.add_argument("--format", choices=("csv", "json"), help="report format (default from extension, else csv)")


def build_config(args, method=FusionMethod.RVS) -> FusionConfig:
    eps = args.epsilon if args.epsilon is not None else default_epsilon()
    if eps < 0:
        raise UsageError("--epsilon must be >= 0")
    if args.ratio < 1:
        raise UsageError("--ratio must be a positive integer")
    windows = {}
    for name, default in PAPER_WINDOWS.items():
        text = getattr(args, f"window_{name}") or args.window or default
        windows[f"window_{name}"] = WindowSpec.parse(text, eps)
    return FusionConfig(method=method, ratio=args.ratio, clamp=args.clamp, **windows)


def _manifest(args, cfg: FusionConfig | None, inputs, outputs, **extra) -> RunManifest:
    m = RunManifest(args.command, [str(p) for p in inputs], [str(p) for p in outputs])
    if cfg is not None:
        m.method = cfg.method.value
        m.windows = {meth.value: str(cfg.window(meth)) for meth in FusionMethod}
        m.ratio = cfg.ratio
        m.epsilon = cfg.window_rvs.epsilon
        m.clamp = list(cfg.clamp) if cfg.clamp else None
    m.levels = getattr(args, "levels", None)
    m.seed = getattr(args, "seed", None)
    m.extra = extra
    return m


def _write_manifest(args, manifest: RunManifest) -> None:
    if getattr(args, "manifest", None):
        Path(args.manifest).write_text(manifest.to_json(), encoding="utf-8")


def _load_inputs(pan_path, ms_path):
    pan_stack = imio.read_image(pan_path)
    if pan_stack.band_count != 1:
        raise UsageError(f"{pan_path}: PAN must be a single-band PGM, found {pan_stack.band_count} bands")
    return pan_stack[0], imio.read_image(ms_path)


def _require_alignment(pan, ms, ratio):
    verdict = check_alignment(pan, ms, ratio)
    if not verdict:
        raise DimensionError(verdict.message)


def _run_method(pan, ms, cfg: FusionConfig):
    fused = []
    for k, band in enumerate(ms):
        start = time.perf_counter()
        fused.append(fuse_band(pan, band, cfg, k))
        log.info("%s band %d fused in %.3f s", cfg.method.value, k + 1, time.perf_counter() - start)
    return fused


def cmd_fuse(args) -> int:
    pan, ms = _load_inputs(args.pan, args.ms)
    cfg = build_config(args, FusionMethod.parse(args.method))
    _require_alignment(pan, ms, cfg.ratio)
    fused = _run_method(pan, ms, cfg)
    out = args.output or f"fused_{cfg.method.value.lower()}.{'ppm' if ms.band_count == 3 else 'pgm'}"
    imio.write_image(fused_to_stack(fused), out, maxval=_maxval(ms))
    log.info("wrote %s", out)
    _write_manifest(args, _manifest(args, cfg, [args.pan, args.ms], [out]))
    return EXIT_OK


def _maxval(stack) -> int:
    return max(b.maxval for b in stack)


def _emit_report(report: QualityReport, path, fmt) -> None:
    fmt = fmt or imio.report_format_for(path)
    imio.write_report(report, path, fmt)
    if path not in (None, "-"):
        log.info("wrote %s", path)


def cmd_evaluate(args) -> int:
    fused = imio.read_image(args.fused)
    reference = imio.read_image(args.reference)
    if fused.band_count != reference.band_count:
        raise UsageError(
            f"band counts differ: {args.fused} has {fused.band_count}, {args.reference} has {reference.band_count}"
        )
    report = evaluate_stack(
        list(fused), reference, args.levels, method=args.label, include_origin=args.with_origin
    )
    _emit_report(report, args.output, args.format)
    _write_manifest(args, _manifest(args, None, [args.fused, args.reference], [args.output or "-"]))
    return EXIT_OK


def cmd_compare(args) -> int:
    pan, ms = _load_inputs(args.pan, args.ms)
    base = build_config(args)
    _require_alignment(pan, ms, base.ratio)
    reference = ms
    if args.truth:
        reference = imio.read_image(args.truth)
        if reference.band_count != ms.band_count:
            raise UsageError(f"{args.truth}: expected {ms.band_count} bands, found {reference.band_count}")

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ext = "ppm" if ms.band_count == 3 else "pgm"
    report = QualityReport([origin_row(b, k + 1, args.levels) for k, b in enumerate(reference)])
    outputs = []
    failed = False
    for method in args.methods:
        cfg = base.with_method(method)
        try:
            fused = _run_method(pan, ms, cfg)
        except StatfuseError as exc:
            log.error("%s failed: %s", method.value, exc)
            failed = True
            for k in range(ms.band_count):
                report.rows.append(QualityRow(method.value, k + 1, errors={"method": str(exc)}))
            continue
        path = outdir / f"fused_{method.value.lower()}.{ext}"
        imio.write_image(fused_to_stack(fused), path, maxval=_maxval(ms))
        outputs.append(path)
        # score the written (rounded, clamped) image so `evaluate` on it agrees
        written = imio.read_image(path)
        report.extend(evaluate_stack(list(written), reference, args.levels, method=method.value,
                                     include_origin=False))

    report.sort()
    report_path = args.report or outdir / f"report.{args.format or 'csv'}"
    _emit_report(report, report_path, args.format)
    outputs.append(report_path)
    _summarize(report)
    _write_manifest(
        args,
        _manifest(args, base, [args.pan, args.ms] + ([args.truth] if args.truth else []), outputs,
                  methods=[m.value for m in args.methods]),
    )
    return EXIT_NUMERIC if failed else EXIT_OK


def _summarize(report: QualityReport) -> None:
    for row in report.rows:
        if row.is_origin:
            continue
        vals = " ".join(
            f"{k}={'-' if v is None else format(v, '.4f')}" for k, v in row.values().items()
        )
        log.info("%-5s band %d %s", row.method, row.band, vals)


def cmd_synth(args) -> int:
    reference = imio.read_image(args.reference) if args.reference else bundled_scene()
    if reference.band_count != 3:
        raise UsageError(f"reference must have 3 bands, found {reference.band_count}")
    if args.ratio < 1:
        raise UsageError("--ratio must be a positive integer")
    if reference.width % args.ratio or reference.height % args.ratio:
        raise DimensionError(
            f"reference {reference.width}x{reference.height} is not divisible by ratio {args.ratio}"
        )
    weights = None
    if args.weights:
        try:
            weights = [float(w) for w in args.weights.split(",")]
        except ValueError:
            raise UsageError(f"--weights expects comma-separated numbers, got {args.weights!r}") from None
    pan, ms, truth = synthesize_pair(reference, args.ratio, args.seed, args.noise, weights)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = [
        Path(args.pan) if args.pan else outdir / "pan.pgm",
        Path(args.ms) if args.ms else outdir / "ms.ppm",
        Path(args.truth) if args.truth else outdir / "truth.ppm",
    ]
    maxval = _maxval(reference)
    for stack, path in zip((pan, ms, truth), paths):
        imio.write_image(stack, path, maxval=maxval)
        log.info("wrote %s", path)
    _write_manifest(
        args,
        _manifest(args, None, [args.reference or "<bundled scene>"], paths, ratio=args.ratio,
                  noise=args.noise, weights=weights),
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="statfuse", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log errors")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fuse", help="pan-sharpen an MS image with one method")
    p.add_argument("pan", help="PAN image (PGM)")
    p.add_argument("ms", help="low-resolution MS image (PGM/PPM)")
    p.add_argument("--method", default="rvs", type=FusionMethod.parse, help="lmm, lmvm, rvs or lcm")
    p.add_argument("-o", "--output", help="fused image path")
    p.add_argument("--manifest", help="write the run manifest (JSON) here")
    _add_fusion_flags(p)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("evaluate", help="score a fused image against a reference")
    p.add_argument("fused")
    p.add_argument("reference", help="reference MS (upsampled by nearest neighbour if smaller)")
    p.add_argument("-o", "--output", help="report path (default stdout)")
    p.add_argument("--label", default="FUSED", help="method label for report rows")
    p.add_argument("--with-origin", action="store_true", help="add ORIGIN rows (SD, En of the reference)")
    p.add_argument("--manifest", help="write the run manifest (JSON) here")
    _add_report_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="run all methods and write a combined report")
    p.add_argument("pan")
    p.add_argument("ms")
    p.add_argument("--outdir", default=".", help="directory for fused images and the report")
    p.add_argument("--report", help="report path (default OUTDIR/report.csv)")
    p.add_argument("--methods", type=_method_list, default=list(FusionMethod), help="comma-separated subset")
    p.add_argument("--truth", help="score against this full-resolution reference instead of the MS")
    p.add_argument("--manifest", help="write the run manifest (JSON) here")
    _add_fusion_flags(p)
    _add_report_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="make a synthetic PAN/MS/truth triple")
    p.add_argument("reference", nargs="?", help="3-band reference PPM (default: bundled scene)")
    p.add_argument("--ratio", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0, help="PAN noise standard deviation (DN)")
    p.add_argument("--weights", help="PAN weights per band, e.g. 0.3,0.4,0.3 (default equal)")
    p.add_argument("--outdir", default=".")
    p.add_argument("--pan")
    p.add_argument("--ms")
    p.add_argument("--truth")
    p.add_argument("--manifest", help="write the run manifest (JSON) here")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(name)s: %(message)s", stream=sys.stderr, force=True)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        log.error("no such file: %s", exc.filename)
    except (OSError, ParseError, RangeError, ShapeError, DimensionError, UsageError) as exc:
        log.error("%s", exc)
    except (NumericError, ArithmeticError) as exc:
        log.error("numeric failure: %s", exc)
        return EXIT_NUMERIC
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
