"""Step 1: choose target breakpoints by dynamic programming.

The rate-variation feature compares each segment with its predecessor, so
the chart is indexed by the last two breakpoints ``(j_{t-1}, j_t)``. The
search runs backwards (best completion of each state) and the answer is
read forwards, which yields the lexicographically smallest breakpoint
sequence among exact score ties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

from .core import Segmentation, SentencePair
from .exceptions import InfeasibleSegmentationError, OracleTooLargeError
from .features import (FeatureWeights, Models, SentenceContext, exact, from_exact, log_score,
                       transition_exact_step1)

ORACLE_LIMIT = 10**6


@dataclass
class SegmentationChart:
    """``completion[t][(j_{t-1}, j_t)]``: best exact score of segments ``t+1..k``."""

    k: int
    m: int
    completion: list
    total: int

    def value(self, t: int, prev: int, j: int) -> Optional[float]:
        v = self.completion[t].get((prev, j))
        return None if v is None else from_exact(v)


@dataclass
class SegmentationOutcome:
    segmentation: Segmentation
    score: float
    exact_score: int
    chart: SegmentationChart
    evaluations: int


class SegmentationProblem:
    """A sentence prepared for repeated segmentation under different weights.

    Feature logs are computed once per transition and reused across solves,
    which is what makes the weight sweep of the tuner affordable.
    """

    def __init__(self, pair: SentencePair, models: Optional[Models] = None,
                 context: Optional[SentenceContext] = None, sentence_index=None):
        self.context = context or SentenceContext(pair, models)
        self.m, self.k = self.context.m, self.context.k
        if self.m < self.k:
            raise InfeasibleSegmentationError(self.m, self.k, sentence_index)
        self._logs = {}
        self.evaluations = 0

    def logs(self, prev2, prev, j, t) -> tuple:
        key = (prev2 if t > 1 else None, prev, j, t)
        cached = self._logs.get(key)
        if cached is None:
            self.evaluations += 1
            cached = tuple(log_score(s) for s in self.context.step1_features(prev2, prev, j, t))
            self._logs[key] = cached
        return cached

    def transition(self, prev2, prev, j, t, weights: tuple) -> int:
        total = 0
        for w, lg in zip(weights, self.logs(prev2, prev, j, t)):
            if w:
                total += exact(w * lg)
        return total

    def _states(self, t):
        lo_b, hi_b = (self.m if t == self.k else t), self.m - (self.k - t)
        for b in range(lo_b, hi_b + 1):
            if t == 1:
                yield (0, b)
            else:
                for a in range(t - 1, b):
                    yield (a, b)

    def _successors(self, t, b):
        """Admissible ``j_{t+1}`` after ``j_t = b``."""
        if t + 1 == self.k:
            return range(self.m, self.m + 1)
        return range(b + 1, self.m - (self.k - t - 1) + 1)

    def solve(self, weights: FeatureWeights) -> SegmentationOutcome:
        w = weights.step1
        k, m = self.k, self.m
        completion = [dict() for _ in range(k + 1)]
        completion[k] = {state: 0 for state in self._states(k)}
        for t in range(k - 1, 0, -1):
            nxt = completion[t + 1]
            table = completion[t]
            for a, b in self._states(t):
                best = None
                for c in self._successors(t, b):
                    v = self.transition(a, b, c, t + 1, w) + nxt[(b, c)]
                    if best is None or v > best:
                        best = v
                table[(a, b)] = best

        def first_value(j1):
            return self.transition(None, 0, j1, 1, w) + completion[1][(0, j1)]

        candidates = [b for _, b in self._states(1)]
        total = max(first_value(j1) for j1 in candidates)
        bps = [next(j1 for j1 in candidates if first_value(j1) == total)]
        prev = 0
        for t in range(1, k):
            a, b = prev, bps[-1]
            target = completion[t][(a, b)]
            c = next(c for c in self._successors(t, b)
                     if self.transition(a, b, c, t + 1, w) + completion[t + 1][(b, c)] == target)
            prev = b
            bps.append(c)
        chart = SegmentationChart(k, m, completion, total)
        return SegmentationOutcome(Segmentation(tuple(bps)), from_exact(total), total, chart, self.evaluations)


def segment(pair: SentencePair, weights: FeatureWeights, models: Optional[Models] = None) -> Segmentation:
    """Breakpoints maximizing the summed step-1 transition scores."""
    return SegmentationProblem(pair, models).solve(weights).segmentation


def segmentation_score(context: SentenceContext, segmentation: Segmentation, weights: FeatureWeights) -> int:
    """Exact total step-1 score of a complete segmentation."""
    bps = (0, 0) + segmentation.breakpoints
    return sum(transition_exact_step1(bps[t - 1], bps[t], bps[t + 1], t, context, weights)
               for t in range(1, segmentation.k + 1))


def brute_force_segment(pair: SentencePair, weights: FeatureWeights, models: Optional[Models] = None,
                        context: Optional[SentenceContext] = None) -> SegmentationOutcome:
    """Exhaustive argmax over all ``C(m-1, k-1)`` segmentations (test oracle)."""
    context = context or SentenceContext(pair, models)
    m, k = context.m, context.k
    if m < k:
        raise InfeasibleSegmentationError(m, k)
    count = math.comb(m - 1, k - 1)
    if count > ORACLE_LIMIT:
        raise OracleTooLargeError(f"{count} segmentations exceed the oracle limit of {ORACLE_LIMIT}")
    best, best_seg, seen = None, None, 0
    for inner in combinations(range(1, m), k - 1):
        seg = Segmentation(inner + (m,))
        seen += 1
        score = segmentation_score(context, seg, weights)
        if best is None or score > best:
            best, best_seg = score, seg
    return SegmentationOutcome(best_seg, from_exact(best), best, None, seen)
