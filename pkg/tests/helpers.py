"""Seeded random instances shared by the tests."""

from fractions import Fraction as F

from prosodic_alignment.core import Clip, SentencePair, SourceSentence, TargetSentence, TimedWord
from prosodic_alignment.features import FeatureWeights

VOCAB = ["ab", "cde,", "fghij", "k.", "lmno", "pq", "rstu,", "vwxyz", "yo;", "zzz"]


def timed_phrases(rng, k, t0=F(0), min_gap=300, max_gap=700):
    """Words for ``k`` phrases separated by pauses of ``min_gap..max_gap`` ms."""
    words, t = [], F(t0)
    for p in range(k):
        nw = rng.randint(1, 3)
        for i in range(nw):
            d = F(rng.randint(100, 450), 1000)
            words.append(TimedWord("w" * rng.randint(2, 7), t, t + d))
            t += d
            if i < nw - 1:
                t += F(rng.randint(0, 100), 1000)
        if p < k - 1:
            t += F(rng.randint(min_gap, max_gap), 1000)
    return words


def rand_pair(rng, k, m=None, onscreen=True, t0=F(0), min_gap=300, max_gap=700):
    src = SourceSentence.from_words(timed_phrases(rng, k, t0, min_gap, max_gap))
    assert src.k == k
    m = m or rng.randint(k, k + 6)
    return SentencePair(src, TargetSentence(tuple(rng.choice(VOCAB) for _ in range(m)), onscreen))


def rand_weights(rng, w5_choices=(0.0, 0.1, 0.5, 1.0, 2.0)):
    w = [rng.random() for _ in range(4)]
    s = sum(w)
    return FeatureWeights(*[x / s for x in w], w5=rng.choice(w5_choices))


def pair_from(spec, onscreen=True, text=None, t0=F(0)):
    """Build a pair from ``[(word, start, end), ...]`` in seconds."""
    words = [TimedWord(w, F(str(a)), F(str(b))) for w, a, b in spec]
    src = SourceSentence.from_words(words)
    return SentencePair(src, TargetSentence.from_text(text or " ".join(w for w, _, _ in spec), onscreen))


def rand_clip(rng, n=4, onscreen=None, cid="c", max_k=3):
    pairs, t = [], F(rng.randint(200, 600), 1000)
    for i in range(n):
        flag = rng.random() < 0.5 if onscreen is None else onscreen[i] if isinstance(onscreen, (list, tuple)) else onscreen
        p = rand_pair(rng, rng.randint(1, max_k), onscreen=flag, t0=t)
        pairs.append(p)
        t = p.source.end + F(rng.randint(300, 1200), 1000)
    return Clip(cid, tuple(pairs), ("en", "fr"), (F(0), t))
