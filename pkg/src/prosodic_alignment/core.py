"""Domain types: timed source words, target sentences, clips, segmentations
and relaxation plans.

All times are exact rationals (``fractions.Fraction``) in seconds so that
dynamic-programming scores and tie-breaks are reproducible bit for bit.
Floats passed in are converted through their shortest decimal repr, so
``0.3`` becomes exactly ``3/10``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .exceptions import InvalidInputError

DEFAULT_MIN_PAUSE = Fraction(3, 10)


def as_time(value) -> Fraction:
    """Convert seconds given as int, float, str, Decimal or Fraction to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("boolean is not a time value")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise InvalidInputError(f"non-finite time value {value!r}")
        return Fraction(repr(value))
    if isinstance(value, (str, Decimal)):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a time value")


def ms(value: Fraction) -> Fraction:
    return value * 1000


@dataclass(frozen=True)
class TimedWord:
    text: str
    start: Fraction
    end: Fraction

    def __post_init__(self):
        object.__setattr__(self, "start", as_time(self.start))
        object.__setattr__(self, "end", as_time(self.end))
        if not self.text or not self.text.strip():
            raise InvalidInputError("timed word text must be nonempty")
        if self.start < 0 or self.end < self.start:
            raise InvalidInputError(
                f"word {self.text!r}: need 0 <= start <= end, got [{self.start}, {self.end}]"
            )


@dataclass(frozen=True)
class SourceInterval:
    begin: Fraction
    end: Fraction
    segment_index: int

    @property
    def length(self) -> Fraction:
        return self.end - self.begin


@dataclass(frozen=True)
class SourceSentence:
    """Timed source words with 1-based phrase breakpoints ``i_1 < ... < i_k = n``.

    The constructor does not check the pause rule; use :func:`validate_clip`
    or build through :meth:`from_words`, which detects the breakpoints.
    """

    words: tuple
    breakpoints: tuple
    min_pause: Fraction = DEFAULT_MIN_PAUSE

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        object.__setattr__(self, "breakpoints", tuple(int(b) for b in self.breakpoints))
        object.__setattr__(self, "min_pause", as_time(self.min_pause))
        if not self.words:
            raise InvalidInputError("source sentence has no words")

    @classmethod
    def from_words(cls, words: Sequence[TimedWord], min_pause=DEFAULT_MIN_PAUSE) -> "SourceSentence":
        min_pause = as_time(min_pause)
        return cls(tuple(words), tuple(detect_breakpoints(words, min_pause)), min_pause)

    @property
    def n(self) -> int:
        return len(self.words)

    @property
    def k(self) -> int:
        return len(self.breakpoints)

    @property
    def start(self) -> Fraction:
        return self.words[0].start

    @property
    def end(self) -> Fraction:
        return self.words[-1].end

    @property
    def duration(self) -> Fraction:
        return self.end - self.start

    @property
    def tokens(self) -> tuple:
        return tuple(w.text for w in self.words)

    def segment_tokens(self, t: int) -> tuple:
        """Tokens of the t-th (1-based) source phrase."""
        lo = self.breakpoints[t - 2] if t > 1 else 0
        return self.tokens[lo:self.breakpoints[t - 1]]


@dataclass(frozen=True)
class TargetSentence:
    words: tuple
    onscreen: bool = True
    language: str = "und"

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        if not self.words:
            raise InvalidInputError("target sentence has no words")

    @classmethod
    def from_text(cls, text: str, onscreen: bool = True, language: str = "und") -> "TargetSentence":
        return cls(tuple(text.split()), onscreen, language)

    @property
    def m(self) -> int:
        return len(self.words)

    @property
    def text(self) -> str:
        return " ".join(self.words)


@dataclass(frozen=True)
class Segmentation:
    """Target breakpoints ``1 <= j_1 < ... < j_k = m`` (1-based word indices)."""

    breakpoints: tuple

    def __post_init__(self):
        bps = tuple(int(b) for b in self.breakpoints)
        if not bps:
            raise InvalidInputError("segmentation needs at least one breakpoint")
        if bps[0] < 1 or any(b <= a for a, b in zip(bps, bps[1:])):
            raise InvalidInputError(f"breakpoints must be strictly increasing and >= 1: {bps}")
        object.__setattr__(self, "breakpoints", bps)

    @property
    def k(self) -> int:
        return len(self.breakpoints)

    @property
    def m(self) -> int:
        return self.breakpoints[-1]

    def segments(self, words: Sequence[str]) -> list:
        if len(words) != self.m:
            raise InvalidInputError(f"segmentation ends at {self.m} but sentence has {len(words)} words")
        out, lo = [], 0
        for hi in self.breakpoints:
            out.append(tuple(words[lo:hi]))
            lo = hi
        return out


@dataclass(frozen=True)
class SentencePair:
    source: SourceSentence
    target: TargetSentence
    reference: Optional[Segmentation] = None

    @property
    def feasible(self) -> bool:
        return self.target.m >= self.source.k


@dataclass(frozen=True)
class Clip:
    """A run of consecutive sentences from one video.

    ``extent`` is the media span the dubbed speech may occupy; it defaults
    to ``[0, end of last source word]``.
    """

    id: str
    pairs: tuple
    language_pair: tuple = ("en", "und")
    extent: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        object.__setattr__(self, "language_pair", tuple(self.language_pair))
        if self.extent is not None:
            b, e = self.extent
            object.__setattr__(self, "extent", (as_time(b), as_time(e)))

    @property
    def begin(self) -> Fraction:
        return self.extent[0] if self.extent is not None else Fraction(0)

    @property
    def end(self) -> Fraction:
        if self.extent is not None:
            return self.extent[1]
        return self.pairs[-1].source.end if self.pairs else Fraction(0)


@dataclass(frozen=True)
class RelaxedSegment:
    """One target phrase placed on the timeline.

    ``speech`` is the oracle duration of the phrase at normal speed, in seconds.
    """

    source_begin: Fraction
    source_end: Fraction
    begin: Fraction
    end: Fraction
    speech: Fraction

    @property
    def length(self) -> Fraction:
        return self.end - self.begin

    @property
    def rate(self) -> Fraction:
        return self.speech / self.length

    def deltas(self, min_pause: Fraction) -> tuple:
        """Left/right relaxations as signed fractions of ``min_pause`` (positive extends)."""
        return ((self.source_begin - self.begin) / min_pause, (self.end - self.source_end) / min_pause)


@dataclass(frozen=True)
class RelaxationPlan:
    """Relaxed intervals for consecutive segments of one sentence or one off-screen run.

    ``groups`` holds the number of segments per sentence when the plan spans
    several sentences.
    """

    segments: tuple
    min_pause: Fraction
    onscreen: bool
    score: float = 0.0
    warnings: tuple = ()
    groups: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "warnings", tuple(self.warnings))
        if not self.groups:
            object.__setattr__(self, "groups", (len(self.segments),))

    @property
    def deltas(self) -> list:
        return [s.deltas(self.min_pause) for s in self.segments]

    @property
    def rates(self) -> list:
        return [s.rate for s in self.segments]

    @property
    def intervals(self) -> list:
        return [(s.begin, s.end) for s in self.segments]

    def split(self) -> list:
        """Per-sentence sub-plans, in order."""
        out, lo = [], 0
        for size in self.groups:
            out.append(RelaxationPlan(self.segments[lo:lo + size], self.min_pause, self.onscreen,
                                      self.score, self.warnings))
            lo += size
        return out


@dataclass(frozen=True)
class SegmentResult:
    text: str
    begin: Fraction
    end: Fraction
    source_begin: Fraction
    source_end: Fraction
    delta_left: Fraction
    delta_right: Fraction
    source_rate: Fraction
    target_rate: Fraction


@dataclass(frozen=True)
class AlignmentResult:
    clip_id: str
    sentence_index: int
    mode: str
    onscreen: bool
    breakpoints: tuple
    segments: tuple
    segmentation_score: float
    relaxation_score: float
    warnings: tuple = field(default=())

    @property
    def target_rates(self) -> list:
        return [s.target_rate for s in self.segments]


@dataclass(frozen=True)
class Violation:
    sentence: Optional[int]
    rule: str
    message: str

    def __str__(self):
        where = "clip" if self.sentence is None else f"sentence {self.sentence}"
        return f"{where}: [{self.rule}] {self.message}"


def detect_breakpoints(words: Sequence[TimedWord], min_pause=DEFAULT_MIN_PAUSE) -> list:
    """Indices (1-based) of words followed by a pause of at least ``min_pause``, plus ``n``."""
    if not words:
        raise InvalidInputError("cannot detect breakpoints in an empty word list")
    min_pause = as_time(min_pause)
    if min_pause <= 0:
        raise InvalidInputError("min_pause must be positive")
    out = [i for i in range(1, len(words)) if words[i].start - words[i - 1].end >= min_pause]
    out.append(len(words))
    return out


def source_intervals(sentence: SourceSentence) -> list:
    """Phrase intervals ``s_t``: from the first word after ``i_{t-1}`` to word ``i_t``."""
    out, lo = [], 0
    for t, hi in enumerate(sentence.breakpoints, start=1):
        out.append(SourceInterval(sentence.words[lo].start, sentence.words[hi - 1].end, t))
        lo = hi
    return out


def _sentence_violations(idx: int, pair: SentencePair) -> Iterable[Violation]:
    src = pair.source
    words = src.words
    for a, b in zip(words, words[1:]):
        if b.start < a.end:
            yield Violation(idx, "word-order", f"word {b.text!r} starts before {a.text!r} ends")
            break
    bps = src.breakpoints
    if not bps or bps[-1] != src.n or bps[0] < 1 or any(b <= a for a, b in zip(bps, bps[1:])):
        yield Violation(idx, "breakpoint-order",
                        f"source breakpoints {list(bps)} must increase strictly and end at n={src.n}")
    else:
        for i in bps[:-1]:
            pause = words[i].start - words[i - 1].end
            if pause < src.min_pause:
                yield Violation(idx, "pause",
                                f"pause after word {i} is {float(pause):.3f}s < {float(src.min_pause):.3f}s")
    ref = pair.reference
    if ref is not None:
        if ref.m != pair.target.m:
            yield Violation(idx, "reference", f"reference ends at {ref.m}, target has {pair.target.m} words")
        elif ref.k != src.k:
            yield Violation(idx, "reference", f"reference has {ref.k} segments, source has {src.k}")


def validate_clip(clip: Clip) -> list:
    """Return every invariant violation in ``clip`` (empty list when well formed)."""
    report = []
    if not clip.pairs:
        return [Violation(None, "empty-clip", "clip has no sentences")]
    for idx, pair in enumerate(clip.pairs):
        report.extend(_sentence_violations(idx, pair))
    for idx in range(1, len(clip.pairs)):
        prev, cur = clip.pairs[idx - 1].source, clip.pairs[idx].source
        if cur.start < prev.end:
            report.append(Violation(idx, "temporal-order",
                                    f"sentence starts at {float(cur.start):.3f}s before previous ends "
                                    f"at {float(prev.end):.3f}s"))
    if clip.extent is not None:
        if clip.pairs[0].source.start < clip.begin or clip.pairs[-1].source.end > clip.end:
            report.append(Violation(None, "extent", "sentences fall outside the clip extent"))
    return report
