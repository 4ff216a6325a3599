"""JSON-lines corpus, alignment and weights files.

Corpus: one clip per line::

    {"id": "c1", "lang_src": "en", "lang_tgt": "fr", "extent_ms": [0, 9000],
     "sentences": [{"src_words": [{"w": "hello", "start_ms": 120, "end_ms": 480}, ...],
                    "tgt_text": "bonjour ...", "onscreen": true, "ref_breakpoints": [3, 7]}]}

``extent_ms`` and ``ref_breakpoints`` are optional. Times on the wire are
integer milliseconds; fractional milliseconds are rounded half to even.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path

from .core import (DEFAULT_MIN_PAUSE, AlignmentResult, Clip, Segmentation, SegmentResult, SentencePair,
                   SourceSentence, TargetSentence, TimedWord, as_time, validate_clip)
from .exceptions import CorpusParseError, InvalidInputError, ValidationError
from .features import FeatureWeights
from .metrics import DEFAULT_BAND, DEFAULT_SIGMA

ALIGNMENT_FORMAT = "prosodic-alignment"
FORMAT_VERSION = 1


def to_ms(seconds: Fraction) -> int:
    return round(Fraction(seconds) * 1000)


def from_ms(value) -> Fraction:
    return Fraction(value, 1000)


def _dumps(record) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(", ", ": "), allow_nan=False)


def _require(record, key, kind, line, where=""):
    if key not in record:
        raise CorpusParseError("missing field", line, where + key)
    value = record[key]
    ok = isinstance(value, kind) and not (kind is int and isinstance(value, bool))
    if not ok:
        raise CorpusParseError(f"expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}",
                               line, where + key)
    return value


def clip_from_record(record, line=None, min_pause=DEFAULT_MIN_PAUSE) -> Clip:
    if not isinstance(record, dict):
        raise CorpusParseError("clip record must be a JSON object", line)
    clip_id = _require(record, "id", str, line)
    lang_src = _require(record, "lang_src", str, line)
    lang_tgt = _require(record, "lang_tgt", str, line)
    sentences = _require(record, "sentences", list, line)
    pairs = []
    for si, sent in enumerate(sentences):
        where = f"sentences[{si}]."
        if not isinstance(sent, dict):
            raise CorpusParseError("sentence must be an object", line, f"sentences[{si}]")
        raw_words = _require(sent, "src_words", list, line, where)
        words = []
        for wi, w in enumerate(raw_words):
            wwhere = f"{where}src_words[{wi}]."
            if not isinstance(w, dict):
                raise CorpusParseError("word must be an object", line, wwhere.rstrip("."))
            text = _require(w, "w", str, line, wwhere)
            start = _require(w, "start_ms", int, line, wwhere)
            end = _require(w, "end_ms", int, line, wwhere)
            try:
                words.append(TimedWord(text, from_ms(start), from_ms(end)))
            except InvalidInputError as exc:
                raise CorpusParseError(str(exc), line, wwhere.rstrip(".")) from None
        if not words:
            raise CorpusParseError("sentence has no source words", line, where + "src_words")
        tgt_text = _require(sent, "tgt_text", str, line, where)
        if not tgt_text.split():
            raise CorpusParseError("empty target text", line, where + "tgt_text")
        onscreen = _require(sent, "onscreen", bool, line, where)
        reference = None
        if sent.get("ref_breakpoints") is not None:
            bps = _require(sent, "ref_breakpoints", list, line, where)
            try:
                if not all(isinstance(b, int) and not isinstance(b, bool) for b in bps):
                    raise InvalidInputError("breakpoints must be integers")
                reference = Segmentation(tuple(bps))
            except InvalidInputError as exc:
                raise CorpusParseError(str(exc), line, where + "ref_breakpoints") from None
        source = SourceSentence.from_words(words, min_pause)
        pairs.append(SentencePair(source, TargetSentence(tuple(tgt_text.split()), onscreen, lang_tgt),
                                  reference))
    extent = None
    if record.get("extent_ms") is not None:
        ext = _require(record, "extent_ms", list, line)
        if len(ext) != 2 or not all(isinstance(v, int) and not isinstance(v, bool) for v in ext):
            raise CorpusParseError("expected [begin_ms, end_ms]", line, "extent_ms")
        extent = (from_ms(ext[0]), from_ms(ext[1]))
    return Clip(clip_id, tuple(pairs), (lang_src, lang_tgt), extent)


def clip_to_record(clip: Clip) -> dict:
    record = {"id": clip.id, "lang_src": clip.language_pair[0], "lang_tgt": clip.language_pair[1]}
    if clip.extent is not None:
        record["extent_ms"] = [to_ms(clip.extent[0]), to_ms(clip.extent[1])]
    sentences = []
    for pair in clip.pairs:
        sent = {
            "src_words": [{"w": w.text, "start_ms": to_ms(w.start), "end_ms": to_ms(w.end)}
                          for w in pair.source.words],
            "tgt_text": pair.target.text,
            "onscreen": pair.target.onscreen,
        }
        if pair.reference is not None:
            sent["ref_breakpoints"] = list(pair.reference.breakpoints)
        sentences.append(sent)
    record["sentences"] = sentences
    return record


def iter_corpus(path, min_pause=DEFAULT_MIN_PAUSE, validate=True):
    """Yield clips from a JSON-lines corpus, one per non-blank line."""
    min_pause = as_time(min_pause)
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorpusParseError(f"invalid JSON: {exc.msg}", lineno) from None
            clip = clip_from_record(record, lineno, min_pause)
            if validate:
                problems = validate_clip(clip)
                if problems:
                    raise ValidationError(problems, lineno)
            yield clip


def parse_corpus(path, min_pause=DEFAULT_MIN_PAUSE, validate=True) -> list:
    return list(iter_corpus(path, min_pause, validate))


def write_corpus(clips, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for clip in clips:
            fh.write(_dumps(clip_to_record(clip)) + "\n")


def _num(x):
    if isinstance(x, float) and math.isinf(x):
        return None
    return float(x)


def result_to_record(result: AlignmentResult) -> dict:
    return {
        "clip_id": result.clip_id,
        "sentence": result.sentence_index,
        "mode": result.mode,
        "onscreen": result.onscreen,
        "breakpoints": list(result.breakpoints),
        "segmentation_score": _num(result.segmentation_score),
        "relaxation_score": _num(result.relaxation_score),
        "warnings": list(result.warnings),
        "segments": [
            {
                "text": s.text,
                "begin_ms": to_ms(s.begin),
                "end_ms": to_ms(s.end),
                "source_begin_ms": to_ms(s.source_begin),
                "source_end_ms": to_ms(s.source_end),
                "delta_left": float(s.delta_left),
                "delta_right": float(s.delta_right),
                "r_e": float(s.source_rate),
                "r_f": float(s.target_rate),
            }
            for s in result.segments
        ],
    }


def header_record() -> dict:
    return {"format": ALIGNMENT_FORMAT, "version": FORMAT_VERSION, "time_unit": "ms",
            "ms_rounding": "half-even"}


def serialize_alignments(results, path) -> None:
    """Write a header line then one record per sentence; output bytes depend only on ``results``."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_dumps(header_record()) + "\n")
        for res in results:
            fh.write(_dumps(result_to_record(res)) + "\n")


def _score(v):
    return float("-inf") if v is None else float(v)


def read_alignments(path) -> list:
    """Parse an alignments file back into :class:`AlignmentResult` objects.

    Rates come back through their shortest decimal form, so short decimals are exact.
    """
    out = []
    with open(path, encoding="utf-8") as fh:
        lines = [(n, l) for n, l in enumerate(fh, start=1) if l.strip()]
    if not lines:
        raise CorpusParseError("alignments file is empty")
    n0, first = lines[0]
    header = json.loads(first)
    if header.get("format") != ALIGNMENT_FORMAT:
        raise CorpusParseError("not an alignments file", n0, "format")
    for lineno, raw in lines[1:]:
        try:
            rec = json.loads(raw)
            segs = tuple(
                SegmentResult(s["text"], from_ms(s["begin_ms"]), from_ms(s["end_ms"]),
                              from_ms(s["source_begin_ms"]), from_ms(s["source_end_ms"]),
                              as_time(s["delta_left"]), as_time(s["delta_right"]), as_time(s["r_e"]),
                              as_time(s["r_f"]))
                for s in rec["segments"])
            out.append(AlignmentResult(rec["clip_id"], rec["sentence"], rec["mode"], rec["onscreen"],
                                       tuple(rec["breakpoints"]), segs, _score(rec["segmentation_score"]),
                                       _score(rec["relaxation_score"]), tuple(rec["warnings"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusParseError(f"malformed alignment record: {exc}", lineno) from None
    return out


def write_weights(weights: FeatureWeights, path, sigma=DEFAULT_SIGMA, band=DEFAULT_BAND, extra=None) -> None:
    record = {"w1": weights.w1, "w2": weights.w2, "w3": weights.w3, "w4": weights.w4, "w5": weights.w5,
              "metric_params": {"sigma": float(sigma), "band": [float(band[0]), float(band[1])]}}
    if extra:
        record.update(extra)
    Path(path).write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")


def read_weights(path) -> tuple:
    """Return ``(FeatureWeights, metric_params)`` from a weights file."""
    try:
        record = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusParseError(f"invalid weights JSON: {exc.msg}", exc.lineno) from None
    try:
        weights = FeatureWeights(*(record[f"w{a}"] for a in range(1, 6)))
    except KeyError as exc:
        raise CorpusParseError("missing weight", field=exc.args[0]) from None
    params = record.get("metric_params") or {}
    sigma = as_time(params.get("sigma", float(DEFAULT_SIGMA)))
    band = tuple(as_time(v) for v in params.get("band", [float(b) for b in DEFAULT_BAND]))
    return weights, {"sigma": sigma, "band": band}
