"""Command-line entry point: ``stereocue {enhance,simulate,evaluate,bench}``.

Exit status is 0 on success, 1 on a runtime failure (unreadable WAV,
missing file, ...) and 2 on a usage error.  Settings resolve as command-line
flag, then ``--config`` JSON, then built-in defaults.  ``STEREOCUE_LOG``
sets the log level (default WARNING).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import metrics
from ._kernels import get_backend
from .enhance import ENHANCERS
from .errors import ConfigurationError, StreamOrderError, WavFormatError
from .pipeline import MODES, PipelineConfig, run_stream
from .simulate import SceneSpec, synthesize_scene
from .wavio import read_stereo, write_wav

log = logging.getLogger("stereocue")


class UsageError(Exception):
    pass


# flag name -> PipelineConfig field, for flags that override the config file
_CONFIG_FLAGS = ("mode", "enhancer", "alpha", "lookahead", "n_bands")


def load_config(args, **overrides) -> PipelineConfig:
    settings = {}
    if getattr(args, "config", None):
        try:
            settings = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config}: {exc}") from exc
        if not isinstance(settings, dict):
            raise UsageError(f"config {args.config} must hold a JSON object")
    for name in _CONFIG_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            settings[name] = value
    settings.update(overrides)
    try:
        return PipelineConfig.from_dict(settings)
    except (ConfigurationError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


def _backend(args):
    try:
        return get_backend(getattr(args, "backend", None))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _write_rows(rows: list[dict], path: str | None) -> None:
    if path and path.endswith(".json"):
        text = metrics.rows_to_json(rows)
    else:
        text = metrics.rows_to_csv(rows)
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def enhance_signal(x, config, reference=None, backend=None):
    """Run the pipeline and undo its latency so output sample ``t`` lines up
    with input sample ``t``."""
    y, report = run_stream(x, config, reference, backend)
    lat = config.latency_samples
    return y[:, lat : lat + x.shape[1]], report


def cmd_enhance(args) -> int:
    config = load_config(args)
    x, sr = read_stereo(args.input)
    if sr != config.sample_rate:
        config = load_config(args, sample_rate=sr)
    ref = None
    if args.reference:
        ref, _ = read_stereo(args.reference, sr)
        if ref.shape != x.shape:
            raise WavFormatError(f"reference length {ref.shape[1]} differs from input {x.shape[1]}")
    y, report = enhance_signal(x, config, ref, _backend(args))
    write_wav(args.output, y, sr, pcm16=args.pcm16)
    text = report.to_json()
    if args.report:
        Path(args.report).write_text(text)
    log.info("wrote %s (rtf %.3f, latency %.1f ms)", args.output, report.rtf, report.latency_ms)
    return 0


def cmd_simulate(args) -> int:
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    lines = []
    for i in range(args.count):
        spec = SceneSpec(
            snr_db=args.snr if args.snr is not None else 10.0,
            overlap_ratio=args.overlap,
            duration=args.duration,
            seed=args.seed + i,
        )
        scene = synthesize_scene(spec)
        d = out / f"scene_{i:03d}"
        d.mkdir(exist_ok=True)
        write_wav(d / "mixture.wav", scene.mixture, spec.sample_rate)
        write_wav(d / "clean.wav", scene.clean_sum, spec.sample_rate)
        for j, img in enumerate(scene.images):
            write_wav(d / f"source_{j}.wav", img, spec.sample_rate)
        (d / "metadata.json").write_text(scene.metadata_json())
        lines.append(f"{d.name}/mixture.wav {d.name}/clean.wav")
    manifest = Path(args.manifest) if args.manifest else out / "manifest.txt"
    manifest.write_text("\n".join(lines) + "\n")
    log.info("wrote %d scenes and %s", args.count, manifest)
    return 0


def read_manifest(path) -> list[tuple[Path, Path]]:
    """Lines ``mixture.wav reference.wav`` (paths relative to the manifest);
    blank lines and ``#`` comments are skipped."""
    path = Path(path)
    pairs = []
    for n, line in enumerate(path.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise UsageError(f"{path}:{n}: expected 'mixture reference', got {line!r}")
        pairs.append(tuple(p if Path(p).is_absolute() else path.parent / p for p in map(Path, parts)))
    return pairs


def _score(out, ref, label, mode, params) -> dict:
    rep = metrics.evaluate(out, ref, params)
    return {"file": str(label), "mode": mode, **rep.to_dict()}


def cmd_evaluate(args) -> int:
    params = metrics.MetricParams(threshold_db=args.threshold_db)
    rows = []
    if args.manifest:
        modes = args.modes.split(",") if args.modes else list(MODES)
        for m in modes:
            if m not in MODES:
                raise UsageError(f"unknown mode {m!r}; choose from {', '.join(MODES)}")
        backend = _backend(args)
        for mix_path, ref_path in read_manifest(args.manifest):
            x, sr = read_stereo(mix_path)
            ref, _ = read_stereo(ref_path, sr)
            if ref.shape != x.shape:
                raise WavFormatError(f"{ref_path}: length differs from {mix_path}")
            for m in modes:
                config = load_config(args, mode=m, sample_rate=sr)
                oracle = ref if ENHANCERS[config.enhancer].needs_reference else None
                y, _ = enhance_signal(x, config, oracle, backend)
                rows.append(_score(y, ref, mix_path, m, params))
    else:
        if not args.processed or not args.reference:
            raise UsageError("evaluate needs PROCESSED and --reference, or --manifest")
        out, sr = read_stereo(args.processed)
        ref, _ = read_stereo(args.reference, sr)
        rows.append(_score(out, ref, args.processed, args.label or "", params))
    _write_rows(rows, args.report)
    return 0


def cmd_bench(args) -> int:
    modes = args.modes.split(",") if args.modes else list(MODES)
    scene = synthesize_scene(SceneSpec(duration=args.duration, seed=args.seed))
    backend = _backend(args)
    reports = []
    for m in modes:
        config = load_config(args, mode=m)
        ref = scene.clean_sum if ENHANCERS[config.enhancer].needs_reference else None
        _, report = run_stream(scene.mixture, config, ref, backend)
        reports.append(report.to_dict())
        log.info("%s: rtf %.4f", m, report.rtf)
    text = json.dumps(reports, indent=2)
    if args.report:
        Path(args.report).write_text(text)
    else:
        print(text)
    return 0


def _add_pipeline_flags(p, with_mode=True):
    if with_mode:
        p.add_argument("--mode", choices=MODES, help="processing configuration")
    p.add_argument("--enhancer", choices=sorted(ENHANCERS), help="single-channel gain estimator")
    p.add_argument("--config", help="JSON file with pipeline settings")
    p.add_argument("--alpha", type=float, help="SCM forgetting factor")
    p.add_argument("--lookahead", type=int, help="enhancer look-ahead in frames")
    p.add_argument("--n-bands", dest="n_bands", type=int, help="number of ERB bands")
    p.add_argument("--backend", choices=("auto", "python", "compiled"), help="kernel implementation")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stereocue", description="Cue-preserving stereo speech enhancement.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enhance", help="enhance a stereo WAV file")
    p.add_argument("input")
    p.add_argument("output")
    _add_pipeline_flags(p)
    p.add_argument("--reference", help="clean stereo WAV (needed by the oracle enhancer)")
    p.add_argument("--report", help="write the run report JSON here")
    p.add_argument("--pcm16", action="store_true", help="write 16-bit PCM instead of float32")
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("simulate", help="generate synthetic two-source scenes")
    p.add_argument("outdir")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--snr", type=float)
    p.add_argument("--overlap", type=float, help="overlap ratio in [0, 1] (default: full overlap)")
    p.add_argument("--duration", type=float, default=10.0)
    p.add_argument("--manifest", help="manifest path (default OUTDIR/manifest.txt)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="IPD/ILD errors against a clean reference")
    p.add_argument("processed", nargs="?")
    p.add_argument("--reference")
    p.add_argument("--label", help="mode label for the report row")
    p.add_argument("--manifest", help="enhance and score every scene listed")
    p.add_argument("--modes", help="comma-separated modes for --manifest (default: all)")
    _add_pipeline_flags(p, with_mode=False)
    p.add_argument("--threshold-db", dest="threshold_db", type=float, default=40.0)
    p.add_argument("--report", help="CSV or .json output (default: CSV on stdout)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="real-time factor of each mode on a synthetic scene")
    p.add_argument("--modes", help="comma-separated modes (default: all)")
    p.add_argument("--duration", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    _add_pipeline_flags(p, with_mode=False)
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("STEREOCUE_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on bad usage
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"stereocue: error: {exc}", file=sys.stderr)
        return 2
    except (WavFormatError, ConfigurationError, StreamOrderError, OSError) as exc:
        print(f"stereocue: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
