"""Line-oriented subprocess plug-ins.

Every plug-in is a long-running child process that reads UTF-8 request
lines on stdin and answers each request with exactly one line on stdout.
Calls are serialized with a lock, so a plug-in never sees interleaved
requests.
"""

from __future__ import annotations

import os
import select
import shlex
import subprocess
import threading
from fractions import Fraction

from .exceptions import PluginProtocolError

SCORE_FLOOR = Fraction(1, 10**6)


class LineCommand:
    def __init__(self, command, timeout: float = 30.0):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.argv:
            raise PluginProtocolError("empty plug-in command")
        self.timeout = timeout
        self._proc = None
        self._buffer = b""
        self._lock = threading.Lock()

    def _start(self):
        try:
            self._proc = subprocess.Popen(self.argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                          bufsize=0)
        except OSError as exc:
            raise PluginProtocolError(f"cannot start plug-in {self.argv[0]!r}: {exc}") from exc
        self._buffer = b""

    def _readline(self) -> str:
        fd = self._proc.stdout.fileno()
        while b"\n" not in self._buffer:
            ready, _, _ = select.select([fd], [], [], self.timeout)
            if not ready:
                raise PluginProtocolError(f"plug-in {self.argv[0]!r} timed out after {self.timeout}s")
            chunk = os.read(fd, 65536)
            if not chunk:
                raise PluginProtocolError(f"plug-in {self.argv[0]!r} closed its output")
            self._buffer += chunk
        line, _, self._buffer = self._buffer.partition(b"\n")
        return line.decode("utf-8").rstrip("\r")

    def request(self, lines) -> str:
        """Send request lines and return the single reply line."""
        payload = "".join(line + "\n" for line in lines).encode("utf-8")
        with self._lock:
            if self._proc is None or self._proc.poll() is not None:
                self._start()
            try:
                self._proc.stdin.write(payload)
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise PluginProtocolError(f"plug-in {self.argv[0]!r} rejected input: {exc}") from exc
            return self._readline()

    def close(self):
        with self._lock:
            if self._proc is not None:
                try:
                    self._proc.stdin.close()
                    self._proc.wait(timeout=self.timeout)
                except (OSError, subprocess.TimeoutExpired):
                    self._proc.kill()
                self._proc = None

    def __del__(self):
        proc = getattr(self, "_proc", None)
        if proc is not None and proc.poll() is None:
            proc.kill()


def parse_decimal(reply: str, what: str) -> Fraction:
    try:
        value = Fraction(reply.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise PluginProtocolError(f"{what}: expected a decimal number, got {reply!r}") from exc
    return value


def _clean(text: str) -> str:
    return " ".join(text.replace("\t", " ").split())


class CommandDurationModel:
    """Duration oracle backed by an external command (one text line in, seconds out)."""

    def __init__(self, command, timeout: float = 30.0):
        self._cmd = LineCommand(command, timeout)
        self._cache = {}

    def duration(self, tokens, language: str = "und") -> Fraction:
        key = (tuple(tokens), language)
        if key not in self._cache:
            value = parse_decimal(self._cmd.request([_clean(" ".join(tokens))]), "duration plug-in")
            if value <= 0:
                raise PluginProtocolError(f"duration plug-in returned non-positive value {value}")
            self._cache[key] = value
        return self._cache[key]


class CommandScorer:
    """External s1/s2 scorer.

    Requests are tab-separated: ``lm_break<TAB>target sentence<TAB>j`` or
    ``semantic_match<TAB>src segment<TAB>tgt segment<TAB>src sentence<TAB>tgt sentence``.
    The reply is a decimal in (0, 1]; zero is floored at 1e-6.
    """

    def __init__(self, command, timeout: float = 30.0):
        self._cmd = LineCommand(command, timeout)
        self._cache = {}

    def _score(self, fields) -> Fraction:
        key = tuple(fields)
        if key not in self._cache:
            value = parse_decimal(self._cmd.request(["\t".join(fields)]), f"{fields[0]} scorer")
            if value < 0 or value > 1:
                raise PluginProtocolError(f"{fields[0]} scorer returned {value}, outside [0, 1]")
            self._cache[key] = max(value, SCORE_FLOOR)
        return self._cache[key]

    def lm_break(self, words, j: int) -> Fraction:
        return self._score(["lm_break", _clean(" ".join(words)), str(j)])

    def semantic_match(self, src_seg, tgt_seg, src_words, tgt_words) -> Fraction:
        return self._score(["semantic_match", _clean(" ".join(src_seg)), _clean(" ".join(tgt_seg)),
                            _clean(" ".join(src_words)), _clean(" ".join(tgt_words))])


class CommandTranscriber:
    """External ASR stand-in.

    One request per transcription: a line ``begin_ms<TAB>end_ms<TAB>rate<TAB>text``
    per segment, terminated by an empty line. The reply is the hypothesis
    transcript on one line.
    """

    def __init__(self, command, timeout: float = 60.0):
        self._cmd = LineCommand(command, timeout)

    def transcribe(self, segments) -> list:
        lines = [f"{round(b * 1000)}\t{round(e * 1000)}\t{float(r)!r}\t{_clean(text)}"
                 for text, b, e, r in segments]
        lines.append("")
        return self._cmd.request(lines).split()
