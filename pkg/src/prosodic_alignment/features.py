"""Feature functions and the log-linear transition scores.

Scores s1..s5 all lie in (0, 1]. A transition's log-score is the weighted
sum of their logs. Each weighted term ``w_a * log s_a`` is a float; terms
are accumulated as exact integers (every finite double is an integer
multiple of 2**-1074), so sums are independent of evaluation order and
ties can be compared with zero tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from .core import SentencePair, Segmentation, source_intervals
from .duration import DurationModel, char_count, synth_duration
from .exceptions import InvalidInputError
from .plugins import SCORE_FLOOR

SCALE = 1 << 1074

STRONG_PUNCT = ".!?;:"
WEAK_PUNCT = ",—–-"
LM_FINAL = Fraction(1)
LM_STRONG = Fraction(9, 10)
LM_WEAK = Fraction(6, 10)
LM_OTHER = Fraction(1, 10)


def exact(x: float) -> int:
    """``x`` scaled by 2**1074: an exact integer for any finite double."""
    num, den = x.as_integer_ratio()
    return num * (SCALE // den)


def from_exact(v: int) -> float:
    return float(Fraction(v, SCALE))


def log_score(s) -> float:
    return math.log(float(s))


@dataclass(frozen=True)
class FeatureWeights:
    """Weights of the log-linear models; w1..w4 drive segmentation, w5 the isochrony term."""

    w1: float = 0.25
    w2: float = 0.25
    w3: float = 0.25
    w4: float = 0.25
    w5: float = 1.0

    def __post_init__(self):
        for name in ("w1", "w2", "w3", "w4", "w5"):
            value = float(getattr(self, name))
            if not value >= 0 or math.isinf(value):
                raise InvalidInputError(f"weight {name} must be a finite nonnegative number, got {value}")
            object.__setattr__(self, name, value)

    @property
    def step1(self) -> tuple:
        return (self.w1, self.w2, self.w3, self.w4)

    def as_tuple(self) -> tuple:
        return (self.w1, self.w2, self.w3, self.w4, self.w5)

    @property
    def is_normalized(self) -> bool:
        return abs(math.fsum(self.step1) - 1.0) <= 1e-9

    def scaled(self, c: float) -> "FeatureWeights":
        return FeatureWeights(*(c * w for w in self.as_tuple()))

    def with_w5(self, w5: float) -> "FeatureWeights":
        return FeatureWeights(self.w1, self.w2, self.w3, self.w4, w5)


def lm_break_score(words: Sequence[str], j: int) -> Fraction:
    """s1: plausibility of ending a phrase after target word ``j`` (1-based)."""
    m = len(words)
    if not 1 <= j <= m:
        raise InvalidInputError(f"break index {j} outside 1..{m}")
    if j == m:
        return LM_FINAL
    last = words[j - 1].rstrip("\"')]}»”")
    if last and last[-1] in STRONG_PUNCT:
        return LM_STRONG
    if last and last[-1] in WEAK_PUNCT:
        return LM_WEAK
    return LM_OTHER


def _chars(tokens) -> int:
    return sum(char_count(t) for t in tokens)


def semantic_match_score(src_seg, tgt_seg, src_words, tgt_words) -> Fraction:
    """s2: agreement of the segment-level target/source length ratio with the sentence-level one.

    Equals ``exp(-|ln(segment ratio / sentence ratio)|)``, computed exactly as a min/max ratio.
    """
    a, b = _chars(src_seg), _chars(tgt_seg)
    c, d = _chars(src_words), _chars(tgt_words)
    if not (a and b and c and d):
        raise InvalidInputError("semantic match needs nonempty segments")
    x = Fraction(b, a) / Fraction(d, c)
    return min(x, 1 / x)


def rate_variation_score(prev_rate, rate) -> Fraction:
    """s3: min/max ratio of consecutive target speaking rates; 1 with no predecessor."""
    if prev_rate is None:
        return Fraction(1)
    return ratio_score(prev_rate, rate)


def rate_match_score(source_rate, target_rate) -> Fraction:
    """s4: min/max ratio of source and target speaking rates."""
    return ratio_score(source_rate, target_rate)


def ratio_score(a, b):
    if a <= 0 or b <= 0:
        raise InvalidInputError("speaking rates must be positive")
    return min(a, b) / max(a, b)


@lru_cache(maxsize=None)
def isochrony_score(delta_left, delta_right) -> float:
    """s5: ``exp(-(|dl| + |dr|))``, maximal when the interval is untouched."""
    return math.exp(-float(abs(Fraction(delta_left)) + abs(Fraction(delta_right))))


class DefaultScorer:
    """The built-in s1/s2 heuristics behind the same interface as :class:`CommandScorer`."""

    def lm_break(self, words, j):
        return lm_break_score(words, j)

    def semantic_match(self, src_seg, tgt_seg, src_words, tgt_words):
        return semantic_match_score(src_seg, tgt_seg, src_words, tgt_words)


@dataclass(frozen=True)
class Models:
    """Pluggable oracles: speech duration and the s1/s2 scorers."""

    duration: object = field(default_factory=DurationModel)
    scorer: object = field(default_factory=DefaultScorer)


def floored(score) -> Fraction:
    return max(Fraction(score), SCORE_FLOOR)


def combine(terms) -> int:
    """Exact sum of ``w * log s`` over (weight, score) pairs."""
    total = 0
    for w, s in terms:
        if w:
            total += exact(w * log_score(s))
    return total


class SentenceContext:
    """Per-sentence caches shared by the segmentation and local relaxation steps."""

    def __init__(self, pair: SentencePair, models: Optional[Models] = None, source_language: str = "en"):
        self.pair = pair
        self.models = models or Models()
        self.source = pair.source
        self.words = pair.target.words
        self.m = pair.target.m
        self.k = pair.source.k
        self.language = pair.target.language
        self.intervals = source_intervals(pair.source)
        self.source_rates = [
            synth_duration(self.models.duration, pair.source.segment_tokens(t), source_language)
            / self.intervals[t - 1].length
            for t in range(1, self.k + 1)
        ]
        self._speech = {}
        self._s1 = {}
        self._s2 = {}

    def speech(self, lo: int, hi: int) -> Fraction:
        """Duration of target words ``lo+1 .. hi``."""
        key = (lo, hi)
        if key not in self._speech:
            self._speech[key] = synth_duration(self.models.duration, self.words[lo:hi], self.language)
        return self._speech[key]

    def s1(self, j: int) -> Fraction:
        if j not in self._s1:
            self._s1[j] = floored(self.models.scorer.lm_break(self.words, j))
        return self._s1[j]

    def s2(self, lo: int, hi: int, t: int) -> Fraction:
        key = (lo, hi, t)
        if key not in self._s2:
            self._s2[key] = floored(self.models.scorer.semantic_match(
                self.source.segment_tokens(t), self.words[lo:hi], self.source.tokens, self.words))
        return self._s2[key]

    def unrelaxed_rate(self, lo: int, hi: int, t: int) -> Fraction:
        return self.speech(lo, hi) / self.intervals[t - 1].length

    def step1_features(self, prev2: Optional[int], prev: int, j: int, t: int) -> tuple:
        rate = self.unrelaxed_rate(prev, j, t)
        prev_rate = None if t == 1 else self.unrelaxed_rate(prev2, prev, t - 1)
        return (self.s1(j), self.s2(prev, j, t), rate_variation_score(prev_rate, rate),
                rate_match_score(self.source_rates[t - 1], rate))


def transition_exact_step1(prev2, prev, j, t, context: SentenceContext, weights: FeatureWeights) -> int:
    return combine(zip(weights.step1, context.step1_features(prev2, prev, j, t)))


def transition_score_step1(prev2, prev, j, t, context: SentenceContext, weights: FeatureWeights) -> float:
    """Log-score of closing segment ``t`` at word ``j`` after breaks ``prev2``, ``prev``.

    ``prev`` is ``j_{t-1}`` (0 for t=1) and ``prev2`` is ``j_{t-2}`` (0 for t=2,
    ignored for t=1); the second-order dependency comes from the rate-variation
    feature, which compares adjacent segments. Rates use the original intervals.
    """
    if not 0 <= prev < j <= context.m:
        raise InvalidInputError(f"need 0 <= j' < j <= m, got j'={prev}, j={j}")
    return from_exact(transition_exact_step1(prev2, prev, j, t, context, weights))


class RelaxContext:
    """Step-2 caches for a sentence with fixed breakpoints."""

    def __init__(self, context: SentenceContext, segmentation: Segmentation):
        if segmentation.m != context.m or segmentation.k != context.k:
            raise InvalidInputError(
                f"segmentation (m={segmentation.m}, k={segmentation.k}) does not fit sentence "
                f"(m={context.m}, k={context.k})")
        self.context = context
        self.segmentation = segmentation
        self.min_pause = context.source.min_pause
        bps = (0,) + segmentation.breakpoints
        self.bounds = list(zip(bps, bps[1:]))
        self.speech = [context.speech(lo, hi) for lo, hi in self.bounds]
        self.fixed = [(context.s1(hi), context.s2(lo, hi, t))
                      for t, (lo, hi) in enumerate(self.bounds, start=1)]
        self._cache = {}

    def relaxed_length(self, t: int, dl, dr) -> Fraction:
        iv = self.context.intervals[t - 1]
        return iv.length + (Fraction(dl) + Fraction(dr)) * self.min_pause

    def rate(self, t: int, dl, dr) -> Fraction:
        return self.speech[t - 1] / self.relaxed_length(t, dl, dr)

    def features(self, dl, dr, prev, t: int) -> tuple:
        """(s1..s5) for segment ``t`` relaxed by (dl, dr) after a predecessor relaxed by ``prev``."""
        rate = self.rate(t, dl, dr)
        prev_rate = None if prev is None else self.rate(t - 1, *prev)
        s1, s2 = self.fixed[t - 1]
        return (s1, s2, rate_variation_score(prev_rate, rate),
                rate_match_score(self.context.source_rates[t - 1], rate), isochrony_score(dl, dr))

    def exact(self, dl, dr, prev, t: int, weights: FeatureWeights) -> int:
        prev_sum = None if prev is None else prev[0] + prev[1]
        key = (t, dl + dr, abs(dl) + abs(dr), prev_sum, weights)
        if key not in self._cache:
            self._cache[key] = combine(zip(weights.as_tuple(), self.features(dl, dr, prev, t)))
        return self._cache[key]


def transition_score_step2(dl, dr, prev_dl, prev_dr, t, context: RelaxContext,
                           weights: FeatureWeights) -> float:
    """Log-score of relaxing segment ``t`` by (dl, dr) after (prev_dl, prev_dr).

    Pass ``None`` for the previous deltas when ``t == 1``.
    """
    prev = None if prev_dl is None else (Fraction(prev_dl), Fraction(prev_dr))
    return from_exact(context.exact(Fraction(dl), Fraction(dr), prev, t, weights))
