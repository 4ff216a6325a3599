"""Automatic dubbing metrics: smoothness, fluency, WER-based intelligibility,
length compliance and segmentation accuracy."""

from __future__ import annotations

import random
import unicodedata
import zlib
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .core import Segmentation, as_time
from .exceptions import DegenerateDenominatorError, InvalidInputError, UndefinedMetricError

DEFAULT_SIGMA = Fraction(1, 4)
DEFAULT_BAND = (Fraction(8, 10), Fraction(13, 10))
CORRUPTION_ONSET = Fraction(13, 10)
CORRUPTION_SPAN = Fraction(7, 10)
UNK = "<unk>"


def _frac(x):
    if x == float("inf"):
        return x
    return as_time(x)


def _rates(results_or_rates) -> list:
    out = []
    for item in results_or_rates:
        if hasattr(item, "segments"):
            out.extend(seg.target_rate for seg in item.segments)
        else:
            out.append(item)
    return out


def smoothness(results, sigma=DEFAULT_SIGMA) -> float:
    """Percent of adjacent segment pairs, across the whole clip, whose rates differ by at most ``sigma``
    in min/max ratio (``min/max >= 1 - sigma``)."""
    rates = _rates(results)
    if len(rates) < 2:
        raise UndefinedMetricError("smoothness needs at least two segments")
    floor = 1 - _frac(sigma)
    good = sum(1 for a, b in zip(rates, rates[1:]) if min(a, b) / max(a, b) >= floor)
    return 100.0 * good / (len(rates) - 1)


def fluency(results, band=DEFAULT_BAND) -> float:
    """Percent of segments whose speaking rate lies inside ``band`` (inclusive)."""
    rates = _rates(results)
    if not rates:
        raise UndefinedMetricError("fluency needs at least one segment")
    lo, hi = _frac(band[0]), _frac(band[1])
    return 100.0 * sum(1 for r in rates if lo <= r <= hi) / len(rates)


def normalize_words(text) -> list:
    """Lowercase, drop punctuation, split on whitespace."""
    if not isinstance(text, str):
        text = " ".join(text)
    kept = "".join(" " if unicodedata.category(c).startswith("P") else c for c in text.lower())
    return kept.split()


def edit_distance(ref: Sequence, hyp: Sequence) -> int:
    prev = list(range(len(hyp) + 1))
    for i, r in enumerate(ref, start=1):
        cur = [i]
        for j, h in enumerate(hyp, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (r != h)))
        prev = cur
    return prev[-1]


def wer(reference, hypothesis) -> Fraction:
    """Word error rate after normalization; may exceed 1 with many insertions."""
    ref, hyp = normalize_words(reference), normalize_words(hypothesis)
    if not ref:
        raise UndefinedMetricError("WER is undefined for an empty reference")
    return Fraction(edit_distance(ref, hyp), len(ref))


def intelligibility(aligned_hypothesis, plain_hypothesis, reference) -> Fraction:
    """Ratio of recognition accuracy with prosodic alignment to accuracy without it."""
    denom = 1 - wer(reference, plain_hypothesis)
    if denom == 0:
        raise DegenerateDenominatorError("WER without alignment is 1; intelligibility is undefined")
    return (1 - wer(reference, aligned_hypothesis)) / denom


def _chars(text) -> int:
    return len(text if isinstance(text, str) else " ".join(text))


def length_compliance(pairs, tolerance=Fraction(1, 10)) -> float:
    """Percent of (source phrase, target phrase) pairs whose character length is within
    ``tolerance`` of the source length, bounds included."""
    pairs = list(pairs)
    if not pairs:
        raise UndefinedMetricError("length compliance needs at least one phrase pair")
    tol = _frac(tolerance)
    ok = 0
    for src, tgt in pairs:
        s, t = _chars(src), _chars(tgt)
        if (1 - tol) * s <= t <= (1 + tol) * s:
            ok += 1
    return 100.0 * ok / len(pairs)


def segmentation_f1(predicted: Sequence[Segmentation], reference: Sequence[Segmentation]) -> Fraction:
    if len(predicted) != len(reference):
        raise InvalidInputError(f"{len(predicted)} predicted vs {len(reference)} reference segmentations")
    matched = n_pred = n_ref = 0
    for p, r in zip(predicted, reference):
        if p.m != r.m:
            raise InvalidInputError(f"segmentations cover different sentences (m={p.m} vs m={r.m})")
        if r.k < 2:
            continue
        pi, ri = set(p.breakpoints[:-1]), set(r.breakpoints[:-1])
        matched += len(pi & ri)
        n_pred += len(pi)
        n_ref += len(ri)
    if not n_ref:
        raise UndefinedMetricError("no reference sentence has an internal breakpoint")
    if not matched:
        return Fraction(0)
    precision, recall = Fraction(matched, n_pred), Fraction(matched, n_ref)
    return 2 * precision * recall / (precision + recall)


def segmentation_accuracy(predicted, reference) -> float:
    """Micro-averaged F1 (percent) of internal breakpoints; one-phrase sentences are skipped."""
    return 100.0 * float(segmentation_f1(predicted, reference))


def corruption_probability(rate) -> Fraction:
    p = (Fraction(rate) - CORRUPTION_ONSET) / CORRUPTION_SPAN
    return min(max(p, Fraction(0)), Fraction(1))


class MockTranscriber:
    """Seeded ASR substitute that garbles words spoken too fast.

    Each word is corrupted with probability ``clamp((rate - 1.3) / 0.7, 0, 1)``;
    a corrupted word is dropped or replaced by ``<unk>`` with equal odds.
    The uniform draws depend only on the seed and word position, so raising
    a rate can only add corruptions.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed

    def transcribe(self, segments, key: str = "") -> list:
        rng = random.Random(zlib.crc32(f"{self.seed}:{key}".encode("utf-8")))
        out = []
        for text, _begin, _end, rate in segments:
            p = corruption_probability(rate)
            for word in normalize_words(text):
                hit, drop = rng.random(), rng.random()
                if hit < p:
                    if drop >= 0.5:
                        out.append(UNK)
                else:
                    out.append(word)
        return out


def mock_transcriber(results, seed: int = 0, key: str = "") -> list:
    """Hypothesis words for aligned results under :class:`MockTranscriber`."""
    return MockTranscriber(seed).transcribe(_segments(results), key)


def _segments(results) -> list:
    return [(s.text, s.begin, s.end, s.target_rate) for r in results for s in r.segments]


def _unaligned_segments(clip, models) -> list:
    """Each sentence spoken at normal speed, without any timing constraint."""
    out = []
    for pair in clip.pairs:
        speech = models.duration.duration(pair.target.words, pair.target.language)
        out.append((pair.target.text, pair.source.start, pair.source.start + speech, Fraction(1)))
    return out


@dataclass
class MetricsReport:
    smoothness: Optional[float]
    fluency: float
    intelligibility: Optional[float]
    length_compliance: float
    segmentation_accuracy: Optional[float] = None

    def as_dict(self) -> dict:
        return asdict(self)


def _transcribe(transcriber, segments, key):
    if isinstance(transcriber, MockTranscriber):
        return transcriber.transcribe(segments, key)
    return transcriber.transcribe(segments)


def evaluate_clip(results, clip, models, transcriber=None, sigma=DEFAULT_SIGMA, band=DEFAULT_BAND) -> MetricsReport:
    """All metrics for one clip's alignment results."""
    transcriber = transcriber if transcriber is not None else MockTranscriber()
    rates = _rates(results)
    sm = smoothness(rates, sigma) if len(rates) >= 2 else None
    reference = [w for pair in clip.pairs for w in normalize_words(pair.target.words)]
    aligned = _transcribe(transcriber, _segments(results), f"{clip.id}:aligned")
    plain = _transcribe(transcriber, _unaligned_segments(clip, models), f"{clip.id}:plain")
    try:
        intel = float(intelligibility(aligned, plain, reference))
    except UndefinedMetricError:
        intel = None
    phrases = []
    for res in results:
        src = clip.pairs[res.sentence_index].source
        for t, seg in enumerate(res.segments, start=1):
            phrases.append((" ".join(src.segment_tokens(t)), seg.text))
    predicted, refs = [], []
    for res in results:
        ref = clip.pairs[res.sentence_index].reference
        if ref is not None and ref.k == len(res.breakpoints):
            predicted.append(Segmentation(res.breakpoints))
            refs.append(ref)
    try:
        acc = segmentation_accuracy(predicted, refs) if refs else None
    except UndefinedMetricError:
        acc = None
    return MetricsReport(sm, fluency(rates, band), intel, length_compliance(phrases), acc)
