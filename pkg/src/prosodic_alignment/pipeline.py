"""Whole-clip alignment in the two dubbing modes.

ISO relaxes every sentence locally, as if all were on screen. ONOFF shares
the segmentation step, relaxes on-screen sentences exactly as ISO does,
then relaxes each maximal block of off-screen sentences jointly, bounded by
the already-relaxed on-screen neighbours.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import (DEFAULT_MIN_PAUSE, AlignmentResult, Clip, RelaxationPlan, SegmentResult, as_time)
from .exceptions import InfeasibleSegmentationError, InvalidInputError
from .features import FeatureWeights, Models, SentenceContext, log_score
from .relaxer import GRID, OffscreenRun, offscreen_score, relax_global, relax_local, trim_slow_segments
from .segmenter import SegmentationProblem

ISO = "ISO"
ONOFF = "ONOFF"


@dataclass(frozen=True)
class PipelineConfig:
    mode: str = ONOFF
    weights: FeatureWeights = field(default_factory=FeatureWeights)
    models: Models = field(default_factory=Models)
    min_pause: Fraction = DEFAULT_MIN_PAUSE
    grid: tuple = GRID
    quantum: Optional[Fraction] = None
    onscreen_residual: Fraction = Fraction(0)
    offscreen_residual: Fraction = Fraction(0)

    def __post_init__(self):
        mode = str(self.mode).upper().replace("/", "")
        if mode not in (ISO, ONOFF):
            raise InvalidInputError(f"unknown mode {self.mode!r}; expected ISO or ONOFF")
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "min_pause", as_time(self.min_pause))
        if self.min_pause <= 0:
            raise InvalidInputError("min_pause must be positive")
        if self.quantum is not None:
            object.__setattr__(self, "quantum", as_time(self.quantum))
        object.__setattr__(self, "onscreen_residual", as_time(self.onscreen_residual))
        object.__setattr__(self, "offscreen_residual", as_time(self.offscreen_residual))


def _map(fn, items, n_jobs):
    if n_jobs is None or n_jobs == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=None if n_jobs < 0 else n_jobs) as pool:
        return list(pool.map(fn, items))


def edge_rooms(clip: Clip, i: int, residual: Fraction) -> tuple:
    """Silence a sentence may claim on each side: half of a shared gap, all of a clip edge."""
    src = clip.pairs[i].source
    if i == 0:
        left = src.start - clip.begin
    else:
        left = (src.start - clip.pairs[i - 1].source.end - residual) / 2
    if i == len(clip.pairs) - 1:
        right = clip.end - src.end
    else:
        right = (clip.pairs[i + 1].source.start - src.end - residual) / 2
    return max(left, Fraction(0)), max(right, Fraction(0))


def _segment_all(clip: Clip, config: PipelineConfig, n_jobs):
    src_lang = clip.language_pair[0]

    def run(i):
        ctx = SentenceContext(clip.pairs[i], config.models, src_lang)
        try:
            outcome = SegmentationProblem(clip.pairs[i], context=ctx, sentence_index=i).solve(config.weights)
        except InfeasibleSegmentationError as exc:
            raise InfeasibleSegmentationError(exc.m, exc.k, i) from None
        return ctx, outcome

    return _map(run, list(range(len(clip.pairs))), n_jobs)


def _relax_onscreen(clip, i, ctx, outcome, config):
    left, right = edge_rooms(clip, i, config.onscreen_residual)
    return relax_local(clip.pairs[i], outcome.segmentation, config.weights, config.models, left, right,
                       config.onscreen_residual, config.grid, context=ctx)


def _result(clip, i, mode, ctx, outcome, plan: RelaxationPlan, relax_score) -> AlignmentResult:
    pair = clip.pairs[i]
    segs = []
    for t, (tokens, seg) in enumerate(zip(outcome.segmentation.segments(pair.target.words), plan.segments)):
        dl, dr = seg.deltas(plan.min_pause)
        segs.append(SegmentResult(" ".join(tokens), seg.begin, seg.end, seg.source_begin, seg.source_end,
                                  dl, dr, ctx.source_rates[t], seg.rate))
    return AlignmentResult(clip.id, i, mode, pair.target.onscreen, outcome.segmentation.breakpoints,
                           tuple(segs), outcome.score, relax_score, plan.warnings)


def dub_isochrone(clip: Clip, config: PipelineConfig, n_jobs=1) -> list:
    """Segment then relax locally, sentence by sentence."""
    steps = _segment_all(clip, config, n_jobs)

    def run(i):
        ctx, outcome = steps[i]
        plan = _relax_onscreen(clip, i, ctx, outcome, config)
        return _result(clip, i, ISO, ctx, outcome, plan, plan.score)

    return _map(run, list(range(len(clip.pairs))), n_jobs)


def offscreen_runs(clip: Clip) -> list:
    """Maximal blocks of consecutive off-screen sentences, as index lists."""
    runs, current = [], []
    for i, pair in enumerate(clip.pairs):
        if pair.target.onscreen:
            if current:
                runs.append(current)
            current = []
        else:
            current.append(i)
    if current:
        runs.append(current)
    return runs


def dub_onoff(clip: Clip, config: PipelineConfig, n_jobs=1) -> list:
    """Local relaxation for on-screen sentences, global relaxation per off-screen run."""
    steps = _segment_all(clip, config, n_jobs)
    onscreen = [i for i, p in enumerate(clip.pairs) if p.target.onscreen]
    plans = dict(zip(onscreen, _map(lambda i: _relax_onscreen(clip, i, *steps[i], config), onscreen, n_jobs)))
    results = {i: _result(clip, i, ONOFF, *steps[i], plans[i], plans[i].score) for i in onscreen}

    def run(indices):
        first, last = indices[0], indices[-1]
        r = config.offscreen_residual
        left = plans[first - 1].segments[-1].end + r if first > 0 else clip.begin
        right = plans[last + 1].segments[0].begin - r if last + 1 < len(clip.pairs) else clip.end
        block = OffscreenRun([(clip.pairs[i], steps[i][1].segmentation) for i in indices],
                             min(left, clip.pairs[first].source.start),
                             max(right, clip.pairs[last].source.end), clip.language_pair[0])
        plan = relax_global(block, config.models, config.quantum, r)
        out = []
        for i, part, trimmed in zip(indices, plan.split(), trim_slow_segments(plan).split()):
            scores = [offscreen_score(rate) for rate in part.rates]
            score = float("-inf") if any(s == 0 for s in scores) else sum(log_score(s) for s in scores)
            out.append((i, _result(clip, i, ONOFF, *steps[i], trimmed, score)))
        return out

    for chunk in _map(run, offscreen_runs(clip), n_jobs):
        results.update(chunk)
    return [results[i] for i in range(len(clip.pairs))]


def dub_clip(clip: Clip, config: PipelineConfig, n_jobs=1) -> list:
    if config.mode == ISO:
        return dub_isochrone(clip, config, n_jobs)
    return dub_onoff(clip, config, n_jobs)
