"""Command-line interface.

Exit codes: 0 success, 1 I/O error, 2 invalid input, 3 infeasible
alignment, 4 plug-in protocol failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .core import as_time
from .exceptions import (CorpusParseError, InfeasibleSegmentationError, InvalidInputError, PluginProtocolError,
                         ValidationError)
from .features import DefaultScorer, Models
from .duration import DurationModel
from .io import parse_corpus, read_alignments, read_weights, serialize_alignments, write_corpus, write_weights
from .metrics import DEFAULT_BAND, DEFAULT_SIGMA, MockTranscriber, evaluate_clip
from .pipeline import PipelineConfig, dub_clip
from .plugins import CommandDurationModel, CommandScorer, CommandTranscriber
from .simulate import simulate_corpus
from .tuning import DEFAULT_W5_CANDIDATES, tune_step1, tune_step2

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_PLUGIN = 0, 1, 2, 3, 4


def _ms(text) -> Fraction:
    return Fraction(as_time(text)) / 1000


def _band(text) -> tuple:
    try:
        lo, hi = text.split(":")
        band = (as_time(lo), as_time(hi))
    except ValueError:
        raise argparse.ArgumentTypeError(f"band must look like LO:HI, got {text!r}") from None
    if band[0] > band[1]:
        raise argparse.ArgumentTypeError("band lower edge exceeds upper edge")
    return band


def _candidates(text) -> tuple:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _models(args) -> Models:
    duration = CommandDurationModel(args.duration_cmd) if getattr(args, "duration_cmd", None) else DurationModel()
    scorer = CommandScorer(args.scorer_cmd) if getattr(args, "scorer_cmd", None) else DefaultScorer()
    return Models(duration, scorer)


def _corpus(args):
    return parse_corpus(args.corpus, _ms(args.min_pause_ms))


def cmd_align(args) -> int:
    weights, _ = read_weights(args.weights)
    config = PipelineConfig(args.mode, weights, _models(args), _ms(args.min_pause_ms),
                            quantum=None if args.quantum_ms is None else _ms(args.quantum_ms))
    results = []
    for clip in _corpus(args):
        results.extend(dub_clip(clip, config, args.n_jobs))
    serialize_alignments(results, args.out)
    return EXIT_OK


def _mean(values):
    kept = [v for v in values if v is not None]
    return sum(kept) / len(kept) if kept else None


def cmd_evaluate(args) -> int:
    clips = _corpus(args)
    by_clip = {}
    for res in read_alignments(args.alignments):
        by_clip.setdefault(res.clip_id, []).append(res)
    models = _models(args)
    transcriber = CommandTranscriber(args.transcriber_cmd) if args.transcriber_cmd else MockTranscriber(args.seed)
    rows = []
    for clip in clips:
        results = sorted(by_clip.get(clip.id, []), key=lambda r: r.sentence_index)
        if [r.sentence_index for r in results] != list(range(len(clip.pairs))):
            raise InvalidInputError(f"alignments do not cover every sentence of clip {clip.id!r}")
        report = evaluate_clip(results, clip, models, transcriber, args.sigma, args.band)
        rows.append({"id": clip.id, **report.as_dict()})
    keys = ("smoothness", "fluency", "intelligibility", "length_compliance", "segmentation_accuracy")
    summary = {k: _mean([r[k] for r in rows]) for k in keys}
    report = {"params": {"sigma": float(args.sigma), "band": [float(b) for b in args.band], "seed": args.seed,
                         "transcriber": "command" if args.transcriber_cmd else "mock"},
              "corpus": summary, "clips": rows}
    Path(args.report).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_tune(args) -> int:
    clips = _corpus(args)
    models = _models(args)
    if args.step == "step1":
        result = tune_step1(clips, args.grid_step, models)
        write_weights(result.weights, args.out_weights,
                      extra={"tuning": {"step": 1, "grid_step": args.grid_step, "accuracy": result.accuracy}})
        return EXIT_OK
    if args.weights:
        weights, _ = read_weights(args.weights)
    else:
        weights = tune_step1(clips, args.grid_step, models).weights
    result = tune_step2(clips, weights, args.w5_candidates, models, args.sigma)
    write_weights(weights.with_w5(result.w5), args.out_weights, sigma=args.sigma,
                  extra={"tuning": {"step": 2, "w5_candidates": list(args.w5_candidates),
                                    "smoothness": result.smoothness}})
    return EXIT_OK


def cmd_simulate(args) -> int:
    if not 0 <= args.offscreen_ratio <= 1:
        raise InvalidInputError("--offscreen-ratio must lie in [0, 1]")
    if args.clips < 0:
        raise InvalidInputError("--clips must be nonnegative")
    write_corpus(simulate_corpus(args.clips, args.seed, args.offscreen_ratio), args.out)
    return EXIT_OK


def _plugin_flags(p, duration=True, scorer=True):
    if duration:
        p.add_argument("--duration-cmd", help="external duration model command")
    if scorer:
        p.add_argument("--scorer-cmd", help="external s1/s2 scorer command")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prosodic-align", description="Prosodic alignment for automatic dubbing.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("align", help="segment and relax every clip of a corpus")
    p.add_argument("--mode", required=True, type=str.lower, choices=["iso", "onoff"])
    p.add_argument("--corpus", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--quantum-ms", default=None, help="off-screen boundary step (default: a quarter of the min pause)")
    p.add_argument("--min-pause-ms", default="300")
    p.add_argument("--n-jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    _plugin_flags(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("evaluate", help="score an alignments file")
    p.add_argument("--alignments", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--transcriber-cmd")
    p.add_argument("--sigma", type=as_time, default=DEFAULT_SIGMA)
    p.add_argument("--band", type=_band, default=DEFAULT_BAND)
    p.add_argument("--seed", type=int, default=0, help="mock transcriber seed")
    p.add_argument("--min-pause-ms", default="300")
    p.add_argument("--report", required=True)
    _plugin_flags(p, scorer=False)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("tune", help="tune feature weights")
    p.add_argument("step", choices=["step1", "step2"])
    p.add_argument("--corpus", required=True)
    p.add_argument("--grid-step", type=float, default=0.1)
    p.add_argument("--weights", help="step2: fixed w1..w4 (default: run step1 first)")
    p.add_argument("--w5-candidates", type=_candidates, default=DEFAULT_W5_CANDIDATES)
    p.add_argument("--sigma", type=as_time, default=DEFAULT_SIGMA)
    p.add_argument("--min-pause-ms", default="300")
    p.add_argument("--out-weights", required=True)
    _plugin_flags(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("simulate", help="write a seeded synthetic corpus")
    p.add_argument("--clips", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--offscreen-ratio", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleSegmentationError as exc:
        code, msg = EXIT_INFEASIBLE, f"infeasible: {exc}"
    except PluginProtocolError as exc:
        code, msg = EXIT_PLUGIN, f"plug-in error: {exc}"
    except (CorpusParseError, ValidationError, InvalidInputError) as exc:
        code, msg = EXIT_INVALID, f"invalid input: {exc}"
    except OSError as exc:
        code, msg = EXIT_IO, f"i/o error: {exc}"
    print(f"prosodic-align: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
