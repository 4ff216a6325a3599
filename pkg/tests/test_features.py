import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from helpers import rand_pair, rand_weights
from prosodic_alignment.core import Segmentation
from prosodic_alignment.exceptions import InvalidInputError
from prosodic_alignment.features import (FeatureWeights, RelaxContext, SentenceContext, exact, from_exact,
                                         isochrony_score, lm_break_score, rate_match_score, rate_variation_score,
                                         semantic_match_score, transition_score_step1, transition_score_step2)
from prosodic_alignment.relaxer import relax_local
from prosodic_alignment.segmenter import segment

positive = st.fractions(min_value=F(1, 1000), max_value=50)


def test_lm_break_defaults():
    words = ["well,", "we", "go.", "now"]
    assert lm_break_score(words, 4) == 1
    assert lm_break_score(words, 3) == F(9, 10)
    assert lm_break_score(words, 1) == F(6, 10)
    assert lm_break_score(words, 2) == F(1, 10)
    assert lm_break_score(['he said "no."', "x"], 1) == F(9, 10)
    with pytest.raises(InvalidInputError):
        lm_break_score(words, 0)


def test_lm_break_punctuation_beats_plain():
    words = ["a", "b,", "c", "d."]
    assert lm_break_score(words, 2) >= lm_break_score(words, 1)


def test_semantic_match_examples():
    assert semantic_match_score(["ab"], ["abcd"], ["ab", "cd"], ["abcd", "efgh"]) == 1
    assert semantic_match_score(["ab"], ["abcdefgh"], ["ab", "cd"], ["abcd", "efgh"]) == F(1, 2)
    assert semantic_match_score(["ab"], ["ab"], ["ab", "cd"], ["abcd", "efgh"]) == F(1, 2)
    assert math.isclose(float(F(1, 2)), math.exp(-abs(math.log(2))))


def test_rate_variation_examples():
    assert rate_variation_score(F(6, 5), F(6, 5)) == 1
    assert rate_variation_score(1, 2) == F(1, 2)
    assert rate_variation_score(None, 3) == 1


def test_rate_match_examples():
    assert rate_match_score(F(1), F(1)) == 1
    assert rate_match_score(F(1), F(3, 2)) == F(2, 3)
    with pytest.raises(InvalidInputError):
        rate_match_score(0, 1)


@given(positive, positive, positive)
@settings(max_examples=80)
def test_ratio_scores_symmetric_scale_invariant(a, b, c):
    for fn in (rate_variation_score, rate_match_score):
        s = fn(a, b)
        assert 0 < s <= 1
        assert s == fn(b, a) == fn(c * a, c * b)
        assert (s == 1) == (a == b)


def test_isochrony_examples():
    assert isochrony_score(0, 0) == 1.0
    assert isochrony_score(F(1, 4), F(-1, 4)) == pytest.approx(0.6065306597)
    assert isochrony_score(F(1, 2), 0) == isochrony_score(F(-1, 4), F(1, 4))


def test_weights_validation():
    with pytest.raises(InvalidInputError):
        FeatureWeights(-0.1, 0.5, 0.3, 0.3)
    with pytest.raises(InvalidInputError):
        FeatureWeights(float("inf"))
    w = FeatureWeights(0.1, 0.2, 0.3, 0.4, 2)
    assert w.is_normalized and not w.scaled(2).is_normalized
    assert w.with_w5(0).as_tuple() == (0.1, 0.2, 0.3, 0.4, 0.0)


def test_exact_accumulation_is_order_free():
    xs = [0.1, 1e-300, -3.7, 2.5e10, -2.5e10, 1e-17]
    assert sum(exact(x) for x in xs) == sum(exact(x) for x in reversed(xs))
    assert from_exact(exact(-0.6931471805599453)) == -0.6931471805599453


def _ctx(words, gaps=(F(1, 2),)):
    from prosodic_alignment.core import SentencePair, SourceSentence, TargetSentence, TimedWord
    src, t = [], F(0)
    for i, g in enumerate(gaps + (None,)):
        src.append(TimedWord("abcd", t, t + F(1, 2)))
        t += F(1, 2) + (g or 0)
    pair = SentencePair(SourceSentence.from_words(src), TargetSentence(tuple(words)))
    return SentenceContext(pair)


def test_step1_all_features_one_gives_zero():
    from prosodic_alignment.core import SentencePair, SourceSentence, TargetSentence, TimedWord
    pair = SentencePair(SourceSentence.from_words([TimedWord("abcd", 0, F(32, 100))]), TargetSentence(("wxyz",)))
    assert transition_score_step1(None, 0, 1, 1, SentenceContext(pair), FeatureWeights()) == 0


def test_step1_single_feature_reduction():
    ctx = _ctx(["ab", "cd", "efgh"])
    w = FeatureWeights(1, 0, 0, 0)
    assert transition_score_step1(None, 0, 2, 1, ctx, w) == pytest.approx(math.log(0.1))
    ctx = _ctx(["ab,", "cd", "efgh"])
    assert transition_score_step1(None, 0, 1, 1, ctx, w) == pytest.approx(math.log(0.6))


def test_step1_rejects_bad_indices():
    with pytest.raises(InvalidInputError):
        transition_score_step1(None, 2, 2, 1, _ctx(["a", "b", "c"]), FeatureWeights())


def test_step2_reduces_to_step1_at_zero():
    rng = random.Random(5)
    for _ in range(20):
        pair = rand_pair(rng, rng.randint(1, 3))
        w = rand_weights(rng)
        seg = segment(pair, w)
        ctx = SentenceContext(pair)
        rc = RelaxContext(ctx, seg)
        bps = (0, 0) + seg.breakpoints
        for t in range(1, seg.k + 1):
            s1 = transition_score_step1(bps[t - 1], bps[t], bps[t + 1], t, ctx, w)
            s2 = transition_score_step2(0, 0, None if t == 1 else 0, None if t == 1 else 0, t, rc, w)
            assert s1 == s2


def test_step2_isochrony_only():
    ctx = _ctx(["ab", "cd"])
    rc = RelaxContext(ctx, Segmentation((1, 2)))
    w = FeatureWeights(0, 0, 0, 0, 1)
    assert transition_score_step2(F(1, 2), 0, None, None, 1, rc, w) == pytest.approx(-0.5)


def test_large_w5_forces_zero_deltas():
    rng = random.Random(11)
    for _ in range(15):
        pair = rand_pair(rng, rng.randint(1, 3))
        seg = segment(pair, FeatureWeights())
        plan = relax_local(pair, seg, FeatureWeights(w5=1e6))
        assert all(d == (0, 0) for d in plan.deltas)


def test_argmax_invariant_under_weight_scaling():
    rng = random.Random(3)
    for _ in range(30):
        pair = rand_pair(rng, rng.randint(1, 4))
        w = rand_weights(rng)
        seg = segment(pair, w)
        assert segment(pair, w.scaled(2)) == seg
        assert segment(pair, w.scaled(0.37)) == seg
        assert relax_local(pair, seg, w.scaled(2)).deltas == relax_local(pair, seg, w).deltas


def test_features_in_unit_interval():
    rng = random.Random(8)
    for _ in range(20):
        pair = rand_pair(rng, rng.randint(1, 3))
        ctx = SentenceContext(pair)
        rc = RelaxContext(ctx, segment(pair, FeatureWeights()))
        for t in range(1, rc.segmentation.k + 1):
            prev = None if t == 1 else (F(1, 4), F(-1, 4))
            for s in rc.features(F(1, 2), F(-1, 4), prev, t):
                assert 0 < s <= 1
