"""Seeded synthetic corpus generator.

Source words are timed at roughly the default synthesis speed, so source
rates sit near 1. Each target phrase is longer than its source phrase by a
drawn verbosity factor, ends with a comma (or a period at sentence end),
and the phrase ends become the reference breakpoints.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .core import Clip, Segmentation, SentencePair, SourceSentence, TargetSentence, TimedWord

_ONSETS = "b c d f g k l m n p r s t v z ch sh tr pl br".split()
_VOWELS = "a e i o u ai ou".split()


def _word(rng: random.Random, max_syllables=3) -> str:
    return "".join(rng.choice(_ONSETS) + rng.choice(_VOWELS) for _ in range(rng.randint(1, max_syllables)))


def _chars(words) -> int:
    return sum(len(w) for w in words)


def _target_phrase(rng, budget: int) -> list:
    """Pseudo-words whose total length is ``budget`` characters (at least one word)."""
    words = []
    while _chars(words) < budget:
        remaining = budget - _chars(words)
        w = _word(rng)
        if len(w) >= remaining or remaining - len(w) < 2:
            w = (w * (remaining // len(w) + 1))[:remaining]
        words.append(w)
    return words


def simulate_clip(rng: random.Random, clip_id: str, n_sentences=4, max_phrases=4, offscreen_ratio=0.0,
                  verbosity=(Fraction(11, 10), Fraction(14, 10)), seconds_per_char=Fraction(2, 25),
                  language_pair=("en", "fr")) -> Clip:
    t = Fraction(rng.randint(200, 600), 1000)
    clip_begin = Fraction(0)
    pairs = []
    for s in range(n_sentences):
        k = rng.randint(1, max_phrases)
        src_words, tgt_words, breaks = [], [], []
        for p in range(k):
            phrase = [_word(rng) for _ in range(rng.randint(1, 4))]
            for i, w in enumerate(phrase):
                d = seconds_per_char * len(w) * Fraction(rng.randint(90, 110), 100)
                d = Fraction(round(d * 1000), 1000)
                src_words.append(TimedWord(w, t, t + d))
                t += d
                if i < len(phrase) - 1:
                    t += Fraction(rng.randint(0, 120), 1000)
            lo, hi = (int(v * 100) for v in verbosity)
            budget = max(1, round(_chars(phrase) * Fraction(rng.randint(lo, hi), 100)))
            words = _target_phrase(rng, budget)
            words[-1] += "." if p == k - 1 else ","
            tgt_words.extend(words)
            breaks.append(len(tgt_words))
            if p < k - 1:
                t += Fraction(rng.randint(300, 800), 1000)
        source = SourceSentence.from_words(src_words)
        onscreen = rng.random() >= offscreen_ratio
        pairs.append(SentencePair(source, TargetSentence(tuple(tgt_words), onscreen, language_pair[1]),
                                  Segmentation(tuple(breaks))))
        if s < n_sentences - 1:
            t += Fraction(rng.randint(500, 1500), 1000)
    extent = (clip_begin, t + Fraction(rng.randint(200, 800), 1000))
    return Clip(clip_id, tuple(pairs), language_pair, extent)


def simulate_corpus(n_clips: int, seed: int = 0, offscreen_ratio=0.0, **kwargs) -> list:
    """``n_clips`` clips, each drawn from its own ``seed``-derived stream."""
    return [simulate_clip(random.Random(f"{seed}:{c}"), f"sim-{seed}-{c:04d}",
                          offscreen_ratio=offscreen_ratio, **kwargs)
            for c in range(n_clips)]
