"""Two-step weight tuning.

Step 1 sweeps the simplex lattice of w1..w4 and keeps the weights with the
best segmentation accuracy against reference breakpoints. Step 2 fixes
those weights and the reference breakpoints, and picks the isochrony weight
w5 that gives the smoothest speaking rates after local relaxation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .core import Clip
from .exceptions import InvalidInputError
from .features import FeatureWeights, Models, SentenceContext
from .metrics import DEFAULT_SIGMA, segmentation_f1
from .pipeline import edge_rooms
from .relaxer import GRID, relax_local
from .segmenter import SegmentationProblem

DEFAULT_W5_CANDIDATES = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)


@dataclass
class Step1Result:
    weights: FeatureWeights
    accuracy: float
    sweep: list = field(default_factory=list)


@dataclass
class Step2Result:
    w5: float
    smoothness: float
    sweep: list = field(default_factory=list)


def simplex_lattice(step, dims: int = 4) -> list:
    """All weight vectors with entries in ``step * Z>=0`` summing to one, as Fractions."""
    step = Fraction(str(step)) if isinstance(step, float) else Fraction(step)
    if step <= 0 or (1 / step).denominator != 1:
        raise InvalidInputError(f"grid step {step} must divide 1 evenly")
    n = int(1 / step)

    def parts(total, k):
        if k == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in parts(total - first, k - 1):
                yield (first,) + rest

    return [tuple(Fraction(p, n) for p in combo) for combo in parts(n, dims)]


def _annotated(clips) -> list:
    out = []
    for clip in clips:
        for pair in clip.pairs:
            ref = pair.reference
            if ref is not None and ref.k == pair.source.k and ref.m == pair.target.m:
                out.append((clip, pair))
    return out


def tune_step1(clips: Sequence[Clip], grid_step=0.1, models: Optional[Models] = None,
               w5: float = 1.0) -> Step1Result:
    """Exhaustive simplex sweep of w1..w4 maximizing breakpoint F1.

    Ties go to the lexicographically largest weight vector.
    """
    data = [(p, c) for c, p in _annotated(clips) if p.source.k >= 2]
    if not data:
        raise InvalidInputError("step-1 tuning needs at least one annotated sentence with two or more phrases")
    problems = [SegmentationProblem(p, context=SentenceContext(p, models, c.language_pair[0])) for p, c in data]
    refs = [p.reference for p, _ in data]
    best, best_w, sweep = None, None, []
    for point in simplex_lattice(grid_step):
        weights = FeatureWeights(*(float(x) for x in point), w5=w5)
        predicted = [prob.solve(weights).segmentation for prob in problems]
        acc = segmentation_f1(predicted, refs)
        sweep.append((weights.step1, 100.0 * float(acc)))
        if best is None or (acc, point) > (best, best_w):
            best, best_w = acc, point
    return Step1Result(FeatureWeights(*(float(x) for x in best_w), w5=w5), 100.0 * float(best), sweep)


def _clip_smoothness(rates, sigma) -> Optional[Fraction]:
    if len(rates) < 2:
        return None
    floor = 1 - Fraction(sigma)
    good = sum(1 for a, b in zip(rates, rates[1:]) if min(a, b) / max(a, b) >= floor)
    return Fraction(good, len(rates) - 1)


def tune_step2(clips: Sequence[Clip], weights: FeatureWeights, candidates=DEFAULT_W5_CANDIDATES,
               models: Optional[Models] = None, sigma=DEFAULT_SIGMA, grid=GRID) -> Step2Result:
    """Pick w5 maximizing mean clip smoothness of locally relaxed reference segmentations.

    Sentences without a usable reference are segmented with ``weights``.
    Ties go to the largest candidate.
    """
    candidates = sorted({float(c) for c in candidates})
    if not candidates:
        raise InvalidInputError("step-2 tuning needs at least one w5 candidate")
    if any(c < 0 for c in candidates):
        raise InvalidInputError("w5 candidates must be nonnegative")
    sigma = Fraction(str(sigma)) if isinstance(sigma, float) else Fraction(sigma)
    prepared = []
    for clip in clips:
        sentences = []
        for i, pair in enumerate(clip.pairs):
            ctx = SentenceContext(pair, models, clip.language_pair[0])
            ref = pair.reference
            if ref is None or ref.k != pair.source.k or ref.m != pair.target.m:
                ref = SegmentationProblem(pair, context=ctx, sentence_index=i).solve(weights).segmentation
            sentences.append((pair, ref, ctx, edge_rooms(clip, i, Fraction(0))))
        prepared.append(sentences)
    if not prepared:
        raise InvalidInputError("step-2 tuning needs training clips")
    best, best_w5, sweep = None, None, []
    for w5 in candidates:
        w = weights.with_w5(w5)
        scores = []
        for sentences in prepared:
            rates = []
            for pair, ref, ctx, (left, right) in sentences:
                plan = relax_local(pair, ref, w, models, left, right, grid=grid, context=ctx)
                rates.extend(plan.rates)
            sm = _clip_smoothness(rates, sigma)
            if sm is not None:
                scores.append(sm)
        if not scores:
            raise InvalidInputError("no training clip has two or more segments")
        mean = sum(scores, Fraction(0)) / len(scores)
        sweep.append((w5, 100.0 * float(mean)))
        if best is None or mean >= best:
            best, best_w5 = mean, w5
    return Step2Result(best_w5, 100.0 * float(best), sweep)
