"""Duration oracle standing in for text-to-speech at normal speed, and
speaking-rate computation.

Any object with a ``duration(tokens, language) -> Fraction`` method can act
as the oracle, provided it is deterministic and additive over token lists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .core import as_time
from .exceptions import DegenerateIntervalError, InvalidInputError

DEFAULT_SECONDS_PER_CHAR = Fraction(8, 100)


def char_count(token: str) -> int:
    return sum(1 for c in token if not c.isspace())


@dataclass(frozen=True)
class DurationModel:
    """Additive character model: each non-space character costs a fixed time.

    ``per_language`` overrides the base rate for a language code and
    ``overrides`` pins the duration of individual tokens.
    """

    seconds_per_char: Fraction = DEFAULT_SECONDS_PER_CHAR
    per_language: Mapping[str, Fraction] = field(default_factory=dict)
    overrides: Mapping[str, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "seconds_per_char", as_time(self.seconds_per_char))
        object.__setattr__(self, "per_language",
                           {k: as_time(v) for k, v in dict(self.per_language).items()})
        object.__setattr__(self, "overrides", {k: as_time(v) for k, v in dict(self.overrides).items()})
        rates = [self.seconds_per_char, *self.per_language.values(), *self.overrides.values()]
        if any(r <= 0 for r in rates):
            raise InvalidInputError("duration model constants must be positive")

    def __hash__(self):
        return hash((self.seconds_per_char, tuple(sorted(self.per_language.items())),
                     tuple(sorted(self.overrides.items()))))

    def rate_for(self, language: str) -> Fraction:
        return self.per_language.get(language, self.seconds_per_char)

    def duration(self, tokens: Sequence[str], language: str = "und") -> Fraction:
        per_char = self.rate_for(language)
        total = Fraction(0)
        for tok in tokens:
            if tok in self.overrides:
                total += self.overrides[tok]
            else:
                total += per_char * char_count(tok)
        return total


def synth_duration(model, text: Sequence[str], language: str = "und") -> Fraction:
    """Seconds needed to speak ``text`` (a token list) at normal speed."""
    if isinstance(text, str):
        text = text.split()
    if not any(char_count(tok) for tok in text):
        raise InvalidInputError("cannot synthesize empty text")
    value = model.duration(tuple(text), language)
    if value <= 0:
        raise InvalidInputError(f"duration oracle returned non-positive duration {value}")
    return value


def _interval_length(interval) -> Fraction:
    if hasattr(interval, "length"):
        return interval.length
    if isinstance(interval, tuple):
        begin, end = interval
        return as_time(end) - as_time(begin)
    return as_time(interval)


def speaking_rate(speech: Fraction, interval) -> Fraction:
    """Synthesized duration over the available interval length."""
    length = _interval_length(interval)
    if length <= 0:
        raise DegenerateIntervalError(f"interval length must be positive, got {length}")
    return speech / length


def source_rate(model, segment, interval, language: str = "en") -> Fraction:
    """r_e(t): source phrase duration at normal speed over its original interval."""
    return speaking_rate(synth_duration(model, segment, language), interval)


def target_rate(model, segment, relaxed_interval, language: str = "und") -> Fraction:
    """r_f(t): target phrase duration at normal speed over its relaxed interval."""
    return speaking_rate(synth_duration(model, segment, language), relaxed_interval)
