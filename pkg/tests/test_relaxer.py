import random
from fractions import Fraction as F

import pytest

from helpers import pair_from, rand_pair, rand_weights
from prosodic_alignment.core import RelaxationPlan, RelaxedSegment, Segmentation
from prosodic_alignment.exceptions import InvalidInputError, OracleTooLargeError
from prosodic_alignment.features import FeatureWeights
from prosodic_alignment.relaxer import (GRID, UNINTELLIGIBLE, OffscreenRun, boundary_lattice, brute_force_relax,
                                        brute_force_relax_global, brute_force_relax_local, local_plan_score,
                                        offscreen_score, plan_violations, relax_global, relax_local,
                                        trim_slow_segments)
from prosodic_alignment.segmenter import segment

EPS = F(3, 10)


def test_grid_shape():
    assert len(GRID) == 9
    assert sorted(-g for g in GRID) == list(GRID)
    assert GRID[-1] == 1


@pytest.mark.parametrize("rate,score", [(F(1, 2), 1), (1, 1), (F(5, 4), F(3, 4)), (2, 0), (F(5, 2), 0),
                                        (F(4, 5), 1), (F(3, 2), F(1, 2))])
def test_offscreen_score_branches(rate, score):
    assert offscreen_score(rate) == score


def test_offscreen_score_monotone():
    values = [offscreen_score(F(i, 100)) for i in range(1, 400)]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_large_w5_returns_zero_plan():
    rng = random.Random(1)
    pair = rand_pair(rng, 3)
    plan = relax_local(pair, segment(pair, FeatureWeights()), FeatureWeights(w5=1e5))
    assert plan.deltas == [(0, 0)] * 3


def test_slow_single_segment_stays_within_grid():
    pair = pair_from([("abcdefgh", 0, 2)], text="ab")
    plan = relax_local(pair, Segmentation((1,)), FeatureWeights(0, 0, 0, 1, 0))
    (dl, dr), = plan.deltas
    assert abs(dl) <= 1 and abs(dr) <= 1
    assert plan.segments[0].rate < 1


def test_blocked_edges_leave_zero_plan():
    pair = pair_from([("abc", 1, 1.3)], text="abcdefghijkl")
    w = FeatureWeights(0.25, 0.25, 0.25, 0.25, 0.01)
    seg = Segmentation((1,))
    for fn in (relax_local, brute_force_relax_local):
        plan = fn(pair, seg, w, None, 0, 0)
        assert plan.deltas == [(0, 0)]


def test_fast_segment_extends_into_free_silence():
    pair = pair_from([("abc", 1, 1.3)], text="abcdefghijkl")
    plan = relax_local(pair, Segmentation((1,)), FeatureWeights(0, 0, 0, 1, 0.01))
    assert plan.deltas == [(1, 1)]


def test_rooms_cap_edges():
    pair = pair_from([("abc", 1, 1.3)], text="abcdefghijkl")
    plan = relax_local(pair, Segmentation((1,)), FeatureWeights(0, 0, 0, 1, 0.01), None, F(15, 100), F(1, 10))
    assert plan.deltas == [(F(1, 2), F(1, 4))]


def test_zero_plan_score_is_lower_bound():
    rng = random.Random(3)
    for _ in range(20):
        k = rng.randint(1, 3)
        pair = rand_pair(rng, k)
        w = rand_weights(rng)
        seg = segment(pair, w)
        plan = relax_local(pair, seg, w)
        assert plan.score >= local_plan_score(pair, seg, [(0, 0)] * k, w)
        assert plan.score == local_plan_score(pair, seg, plan.deltas, w)


def test_local_dp_matches_oracle_k2():
    rng = random.Random(4)
    for _ in range(15):
        pair = rand_pair(rng, 2)
        w = rand_weights(rng)
        seg = segment(pair, w)
        rooms = [rng.choice([None, F(0), F(rng.randint(0, 400), 1000)]) for _ in range(2)]
        resid = rng.choice([0, F(1, 20)])
        a = relax_local(pair, seg, w, None, *rooms, resid)
        b = brute_force_relax(pair, seg, w, None, *rooms, resid)
        assert a.deltas == b.deltas and a.score == b.score
        assert not plan_violations(a, min_residual=resid)


def test_local_oracle_limit():
    rng = random.Random(5)
    pair = rand_pair(rng, 4, m=6)
    with pytest.raises(OracleTooLargeError):
        brute_force_relax_local(pair, segment(pair, FeatureWeights()), FeatureWeights())


def test_tight_gap_coupling():
    # phrases 0.3 s apart: the right extension of phrase 1 plus the left one of phrase 2 fit in 0.3 s
    pair = pair_from([("ab", 0, 0.5), ("cd", 0.8, 1.3)], text="abcdefghijklmno pqrstuvwxyzabcd")
    plan = relax_local(pair, Segmentation((1, 2)), FeatureWeights(0, 0, 0, 1, 0.001), None, 0, 0)
    (_, dr1), (dl2, _) = plan.deltas
    assert dr1 + dl2 <= 1
    assert not plan_violations(plan)


def _offscreen(rng, n_sent, k_max=3, max_gap=900):
    sentences, t = [], F(rng.randint(0, 500), 1000)
    left = t - F(rng.randint(0, 500), 1000)
    for _ in range(n_sent):
        k = rng.randint(1, k_max)
        pair = rand_pair(rng, k, onscreen=False, t0=t, max_gap=max_gap)
        sentences.append((pair, segment(pair, FeatureWeights())))
        t = pair.source.end + F(rng.randint(300, max_gap), 1000)
    return OffscreenRun(sentences, max(left, F(0)), t - F(rng.randint(0, 300), 1000))


def test_offscreen_run_validation():
    rng = random.Random(6)
    pair = rand_pair(rng, 1, onscreen=True)
    with pytest.raises(InvalidInputError):
        OffscreenRun([(pair, Segmentation((pair.target.m,)))], 0, 100)
    pair = rand_pair(rng, 1, onscreen=False, t0=F(1))
    with pytest.raises(InvalidInputError):
        OffscreenRun([(pair, Segmentation((pair.target.m,)))], 2, 100)
    with pytest.raises(InvalidInputError):
        OffscreenRun([], 0, 1)


def test_lattice_candidates_inside_gaps():
    rng = random.Random(7)
    for _ in range(10):
        run = _offscreen(rng, 2)
        lat = boundary_lattice(run)
        assert lat.quantum == EPS / 4
        for s, (b, e) in enumerate(lat.source):
            assert b in lat.begins[s] and e in lat.ends[s]
            assert min(lat.begins[s]) >= (run.left_bound if s == 0 else lat.source[s - 1][1])
            assert max(lat.ends[s]) <= (run.right_bound if s == len(lat.source) - 1 else lat.source[s + 1][0])


def test_global_dp_matches_oracle():
    rng = random.Random(8)
    for _ in range(12):
        run = _offscreen(rng, rng.randint(1, 2), k_max=2, max_gap=500)
        resid = rng.choice([0, F(1, 20)])
        a = relax_global(run, min_residual=resid)
        b = brute_force_relax_global(run, min_residual=resid)
        assert a.intervals == b.intervals and a.score == b.score and a.warnings == b.warnings
        assert not plan_violations(a, (run.left_bound, run.right_bound), resid)


def test_global_beats_identity():
    rng = random.Random(9)
    for _ in range(10):
        run = _offscreen(rng, 2)
        plan = relax_global(run)
        lat = boundary_lattice(run)
        ident = [offscreen_score(sp / (e - b)) for sp, (b, e) in zip(lat.speech, lat.source)]
        if all(ident):
            import math
            assert plan.score >= sum(math.log(float(s)) for s in ident) - 1e-12


def test_slow_run_keeps_original_boundaries():
    pair = pair_from([("abcdefgh", 1, 2), ("ijklmnop", 2.5, 3.5)], onscreen=False, text="ab cd")
    run = OffscreenRun([(pair, Segmentation((1, 2)))], 0, 5)
    plan = relax_global(run)
    assert plan.intervals == [(1, 2), (F(5, 2), F(7, 2))]
    assert plan.score == 0


def test_unintelligible_run_warns_and_maximizes_time():
    pair = pair_from([("ab", 1, 1.1)], onscreen=False, text="abcdefghijklmnopqrstuvwxyzabcdefghij")
    run = OffscreenRun([(pair, Segmentation((1,)))], F(9, 10), F(12, 10))
    plan = relax_global(run)
    assert plan.warnings == (UNINTELLIGIBLE,)
    assert plan.score == float("-inf")
    assert plan.intervals == [(F(37, 40), F(47, 40))]
    assert brute_force_relax(run).intervals == plan.intervals


def test_global_oracle_limit(monkeypatch):
    import prosodic_alignment.relaxer as relaxer
    monkeypatch.setattr(relaxer, "ORACLE_LIMIT", 5)
    with pytest.raises(OracleTooLargeError):
        brute_force_relax_global(_offscreen(random.Random(10), 2))


def _plan(rates_and_lengths, onscreen=False):
    segs, t = [], F(0)
    for speech, length in rates_and_lengths:
        segs.append(RelaxedSegment(t, t + length, t, t + length, F(speech)))
        t += length + 1
    return RelaxationPlan(tuple(segs), EPS, onscreen)


def test_trim_halves_slow_segment():
    plan = trim_slow_segments(_plan([(1, 2)]))
    assert plan.segments[0].length == 1 and plan.segments[0].rate == 1
    assert plan.segments[0].begin == 0


def test_trim_leaves_fast_segment():
    p = _plan([(F(13, 10), 1)])
    assert trim_slow_segments(p).segments == p.segments


def test_trim_idempotent_and_ordered():
    p = trim_slow_segments(_plan([(1, 2), (3, 2), (F(1, 2), 4)]))
    assert trim_slow_segments(p) == p
    assert all(r >= 1 for r in p.rates)
    assert not plan_violations(p)


def test_trim_skips_onscreen_plans():
    p = _plan([(1, 2)], onscreen=True)
    assert trim_slow_segments(p) is p


def test_plan_violations_detects_problems():
    bad = RelaxationPlan((RelaxedSegment(0, 1, 0, 2, F(1)), RelaxedSegment(2, 3, F(3, 2), 3, F(1))), EPS, True)
    problems = plan_violations(bad, (F(1, 2), 3))
    assert any("overlap" in p for p in problems)
    assert any("grid" in p for p in problems)
    assert any("bounds" in p for p in problems)
