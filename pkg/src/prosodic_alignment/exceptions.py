"""Exception types raised by the alignment engine."""


class AlignmentError(Exception):
    """Base class for all engine errors."""


class InvalidInputError(AlignmentError, ValueError):
    pass


class DegenerateIntervalError(AlignmentError, ValueError):
    pass


class InfeasibleSegmentationError(AlignmentError):
    """Raised when a target sentence has fewer words than source phrases."""

    def __init__(self, m, k, sentence_index=None):
        self.m = m
        self.k = k
        self.sentence_index = sentence_index
        where = "" if sentence_index is None else f" (sentence {sentence_index})"
        super().__init__(f"cannot split {m} target words into {k} segments{where}")


class OracleTooLargeError(AlignmentError):
    pass


class UndefinedMetricError(AlignmentError, ValueError):
    pass


class DegenerateDenominatorError(UndefinedMetricError):
    pass


class PluginProtocolError(AlignmentError):
    pass


class CorpusParseError(AlignmentError, ValueError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field {field!r}")
        prefix = ", ".join(loc)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ValidationError(AlignmentError, ValueError):
    """Carries the list of invariant violations found in a clip."""

    def __init__(self, violations, line=None):
        self.violations = list(violations)
        self.line = line
        head = f"line {line}: " if line is not None else ""
        super().__init__(head + "; ".join(str(v) for v in self.violations))
