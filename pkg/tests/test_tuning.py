from fractions import Fraction as F

import pytest

from helpers import pair_from
from prosodic_alignment.core import Clip, Segmentation, SentencePair
from prosodic_alignment.exceptions import InvalidInputError
from prosodic_alignment.features import FeatureWeights
from prosodic_alignment.segmenter import segment
from prosodic_alignment.metrics import segmentation_f1
from prosodic_alignment.simulate import simulate_corpus
from prosodic_alignment.tuning import simplex_lattice, tune_step1, tune_step2


@pytest.fixture(scope="module")
def corpus():
    return simulate_corpus(6, seed=11, offscreen_ratio=0.0)


def test_lattice_sizes():
    assert len(simplex_lattice(0.1)) == 286
    assert sorted(simplex_lattice(1)) == sorted([(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)])
    assert all(sum(p) == 1 for p in simplex_lattice(0.25))
    assert (F(1, 4),) * 4 in simplex_lattice(0.25)
    for bad in (0, 0.3, -0.5):
        with pytest.raises(InvalidInputError):
            simplex_lattice(bad)


def test_step1_is_lattice_maximum(corpus):
    result = tune_step1(corpus, 0.25)
    pairs = [p for c in corpus for p in c.pairs if p.source.k >= 2]
    refs = [p.reference for p in pairs]
    table = {}
    for point in simplex_lattice(0.25):
        w = FeatureWeights(*map(float, point))
        table[point] = 100 * float(segmentation_f1([segment(p, w) for p in pairs], refs))
    assert result.accuracy == max(table.values())
    uniform = table[(F(1, 4),) * 4]
    assert result.accuracy >= uniform
    best = max(p for p, v in table.items() if v == result.accuracy)
    assert result.weights.step1 == tuple(map(float, best))


def test_step1_corner_lattice(corpus):
    result = tune_step1(corpus, 1)
    assert sorted(result.weights.step1) == [0, 0, 0, 1]
    assert len(result.sweep) == 4


def test_step1_needs_annotations():
    pair = pair_from([("ab", 0, 0.5), ("cd", 1, 1.5)], text="x y z")
    with pytest.raises(InvalidInputError):
        tune_step1([Clip("c", (pair,))])


def test_step1_deterministic(corpus):
    assert tune_step1(corpus, 0.25) == tune_step1(corpus, 0.25)


def _uneven_clip():
    pair = pair_from([("abcde", 0.5, 0.9), ("abcde", 1.5, 1.9)], text="abcde, abcdefghi.")
    pair = SentencePair(pair.source, pair.target, Segmentation((1, 2)))
    return Clip("u", (pair,), extent=(0, 3))


def test_step2_singleton_and_empty(corpus):
    w = FeatureWeights()
    assert tune_step2(corpus[:2], w, [0]).w5 == 0
    with pytest.raises(InvalidInputError):
        tune_step2(corpus[:2], w, [])
    with pytest.raises(InvalidInputError):
        tune_step2(corpus[:2], w, [-1])


def test_step2_ties_take_largest():
    pair = pair_from([("abcd", 0.5, 0.82), ("abcd", 1.5, 1.82)], text="abcd, abcd.")
    pair = SentencePair(pair.source, pair.target, Segmentation((1, 2)))
    clip = Clip("s", (pair,), extent=(0, 3))
    result = tune_step2([clip], FeatureWeights(), [0.5, 1, 4])
    assert result.w5 == 4 and result.smoothness == 100


def test_step2_relaxation_helps():
    w = FeatureWeights(0, 0, 1, 0)
    result = tune_step2([_uneven_clip()], w, [0.01, 100])
    assert result.w5 == 0.01
    assert dict(result.sweep)[0.01] > dict(result.sweep)[100]


def test_step2_deterministic_and_monotone(corpus):
    w = FeatureWeights()
    a = tune_step2(corpus, w, [0.5, 2])
    assert a == tune_step2(corpus, w, [0.5, 2])
    b = tune_step2(corpus, w, [0.25, 0.5, 2, 8])
    assert b.smoothness >= a.smoothness
