"""Prosodic alignment for automatic dubbing, with isochrone (ISO) and
on/off-screen (ONOFF) relaxation."""

from .core import (AlignmentResult, Clip, RelaxationPlan, RelaxedSegment, Segmentation, SegmentResult,
                   SentencePair, SourceInterval, SourceSentence, TargetSentence, TimedWord, Violation,
                   detect_breakpoints, source_intervals, validate_clip)
from .duration import DurationModel, source_rate, speaking_rate, synth_duration, target_rate
from .estimator import ProsodicAligner, check_clips
from .exceptions import (AlignmentError, CorpusParseError, DegenerateDenominatorError, DegenerateIntervalError,
                         InfeasibleSegmentationError, InvalidInputError, OracleTooLargeError, PluginProtocolError,
                         UndefinedMetricError, ValidationError)
from .features import DefaultScorer, FeatureWeights, Models, transition_score_step1, transition_score_step2
from .io import parse_corpus, read_alignments, read_weights, serialize_alignments, write_corpus, write_weights
from .metrics import (MockTranscriber, evaluate_clip, fluency, intelligibility, length_compliance,
                      segmentation_accuracy, smoothness, wer)
from .pipeline import ISO, ONOFF, PipelineConfig, dub_clip, dub_isochrone, dub_onoff
from .relaxer import (OffscreenRun, brute_force_relax, offscreen_score, relax_global, relax_local,
                      trim_slow_segments)
from .segmenter import brute_force_segment, segment
from .simulate import simulate_corpus
from .tuning import tune_step1, tune_step2

__version__ = "0.1.0"
