"""Estimator-style front end.

``fit`` tunes the feature weights on annotated clips, ``predict`` aligns
clips and ``score`` reports mean smoothness. Hyperparameters are plain
constructor arguments so ``get_params``/``set_params``/``clone`` work.
"""

from __future__ import annotations

from pathlib import Path

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .core import Clip, validate_clip
from .exceptions import InvalidInputError, UndefinedMetricError, ValidationError
from .features import FeatureWeights, Models
from .metrics import smoothness
from .pipeline import ONOFF, PipelineConfig, dub_clip
from .tuning import DEFAULT_W5_CANDIDATES, tune_step1, tune_step2


def check_clips(X) -> list:
    """Coerce ``X`` (a Clip, an iterable of Clips or a corpus path) to a validated list."""
    if isinstance(X, (str, Path)):
        from .io import parse_corpus
        return parse_corpus(X)
    if isinstance(X, Clip):
        X = [X]
    try:
        clips = list(X)
    except TypeError:
        raise InvalidInputError(f"expected clips, got {type(X).__name__}") from None
    for i, clip in enumerate(clips):
        if not isinstance(clip, Clip):
            raise InvalidInputError(f"item {i} is {type(clip).__name__}, not Clip")
        problems = validate_clip(clip)
        if problems:
            raise ValidationError(problems)
    return clips


class ProsodicAligner(BaseEstimator):
    """Prosodic aligner in ISO or ONOFF mode.

    With ``tune=False``, ``fit`` only validates and freezes the given weights.
    """

    def __init__(self, mode=ONOFF, w1=0.25, w2=0.25, w3=0.25, w4=0.25, w5=1.0, min_pause=0.3,
                 quantum=None, grid_step=0.1, w5_candidates=DEFAULT_W5_CANDIDATES, tune=True,
                 sigma=0.25, models=None, n_jobs=1):
        self.mode = mode
        self.w1 = w1
        self.w2 = w2
        self.w3 = w3
        self.w4 = w4
        self.w5 = w5
        self.min_pause = min_pause
        self.quantum = quantum
        self.grid_step = grid_step
        self.w5_candidates = w5_candidates
        self.tune = tune
        self.sigma = sigma
        self.models = models
        self.n_jobs = n_jobs

    def _models(self):
        return self.models if self.models is not None else Models()

    def fit(self, X, y=None):
        clips = check_clips(X)
        weights = FeatureWeights(self.w1, self.w2, self.w3, self.w4, self.w5)
        if self.tune:
            step1 = tune_step1(clips, self.grid_step, self._models(), w5=self.w5)
            step2 = tune_step2(clips, step1.weights, self.w5_candidates, self._models(), self.sigma)
            weights = step1.weights.with_w5(step2.w5)
            self.step1_ = step1
            self.step2_ = step2
        self.weights_ = weights
        self.config_ = PipelineConfig(self.mode, weights, self._models(), self.min_pause, quantum=self.quantum)
        return self

    def predict(self, X) -> list:
        """Alignment results, one list per clip."""
        check_is_fitted(self, "config_")
        return [dub_clip(c, self.config_, self.n_jobs) for c in check_clips(X)]

    def score(self, X, y=None) -> float:
        """Mean clip smoothness (percent) over clips with two or more segments."""
        values = []
        for results in self.predict(X):
            try:
                values.append(smoothness(results, self.sigma))
            except UndefinedMetricError:
                continue
        if not values:
            raise UndefinedMetricError("no clip has two or more segments")
        return sum(values) / len(values)
