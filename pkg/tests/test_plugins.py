import random
import sys
import textwrap
from fractions import Fraction as F

import pytest

from helpers import rand_clip
from prosodic_alignment.exceptions import PluginProtocolError
from prosodic_alignment.features import DefaultScorer, Models
from prosodic_alignment.metrics import evaluate_clip
from prosodic_alignment.pipeline import PipelineConfig, dub_clip
from prosodic_alignment.plugins import (CommandDurationModel, CommandScorer, CommandTranscriber, LineCommand,
                                        parse_decimal)

DURATION = """
import sys
for line in sys.stdin:
    n = sum(1 for c in line.rstrip("\\n") if not c.isspace())
    print(f"{n * 8}/100", flush=True)
"""

SCORER = """
import sys
from prosodic_alignment.features import lm_break_score, semantic_match_score
for line in sys.stdin:
    f = line.rstrip("\\n").split("\\t")
    if f[0] == "lm_break":
        s = lm_break_score(f[1].split(), int(f[2]))
    else:
        s = semantic_match_score(*(x.split() for x in f[1:]))
    print(f"{s.numerator}/{s.denominator}", flush=True)
"""

ECHO_TRANSCRIBER = """
import sys
words = []
for line in sys.stdin:
    line = line.rstrip("\\n")
    if not line:
        print(" ".join(words), flush=True)
        words = []
    else:
        words.extend(line.split("\\t")[3].split())
"""


def script(tmp_path, name, body):
    p = tmp_path / name
    p.write_text(textwrap.dedent(body))
    return [sys.executable, str(p)]


def test_parse_decimal():
    assert parse_decimal(" 0.25 ", "x") == F(1, 4)
    assert parse_decimal("1e-3", "x") == F(1, 1000)
    with pytest.raises(PluginProtocolError):
        parse_decimal("fast", "x")


def test_line_command_round_trip(tmp_path):
    cmd = LineCommand(script(tmp_path, "echo.py", "import sys\nfor l in sys.stdin: print(l.strip()[::-1], flush=True)"))
    assert cmd.request(["abc"]) == "cba"
    assert cmd.request(["xy"]) == "yx"
    cmd.close()
    assert cmd.request(["restart"]) == "tratser"
    cmd.close()


def test_plugins_reproduce_default_models(tmp_path):
    rng = random.Random(0)
    models = Models(CommandDurationModel(script(tmp_path, "d.py", DURATION)),
                    CommandScorer(script(tmp_path, "s.py", SCORER)))
    for _ in range(3):
        clip = rand_clip(rng)
        for mode in ("ISO", "ONOFF"):
            ref = dub_clip(clip, PipelineConfig(mode))
            got = dub_clip(clip, PipelineConfig(mode, models=models))
            assert got == ref


def test_echo_transcriber_gives_unit_intelligibility(tmp_path):
    rng = random.Random(1)
    clip = rand_clip(rng)
    results = dub_clip(clip, PipelineConfig())
    report = evaluate_clip(results, clip, Models(), CommandTranscriber(script(tmp_path, "t.py", ECHO_TRANSCRIBER)))
    assert report.intelligibility == 1.0


def test_non_numeric_reply(tmp_path):
    model = CommandDurationModel(script(tmp_path, "bad.py", "import sys\nfor l in sys.stdin: print('soon', flush=True)"))
    with pytest.raises(PluginProtocolError, match="decimal"):
        model.duration(["abc"])


def test_non_positive_duration(tmp_path):
    model = CommandDurationModel(script(tmp_path, "zero.py", "import sys\nfor l in sys.stdin: print(0, flush=True)"))
    with pytest.raises(PluginProtocolError):
        model.duration(["abc"])


def test_score_out_of_range_and_floor(tmp_path):
    high = CommandScorer(script(tmp_path, "hi.py", "import sys\nfor l in sys.stdin: print(1.5, flush=True)"))
    with pytest.raises(PluginProtocolError):
        high.lm_break(["a", "b"], 1)
    zero = CommandScorer(script(tmp_path, "lo.py", "import sys\nfor l in sys.stdin: print(0, flush=True)"))
    assert zero.lm_break(["a", "b"], 1) == F(1, 10**6)


def test_process_exits_early(tmp_path):
    model = CommandDurationModel(script(tmp_path, "quit.py", "pass"))
    with pytest.raises(PluginProtocolError):
        model.duration(["abc"])


def test_timeout(tmp_path):
    slow = script(tmp_path, "slow.py", "import sys, time\nfor l in sys.stdin: time.sleep(5)")
    model = CommandDurationModel(slow, timeout=0.3)
    with pytest.raises(PluginProtocolError, match="timed out"):
        model.duration(["abc"])


def test_missing_executable():
    with pytest.raises(PluginProtocolError):
        CommandDurationModel("/nonexistent/plugin --flag").duration(["x"])
    with pytest.raises(PluginProtocolError):
        LineCommand("")


def test_default_scorer_interface():
    s = DefaultScorer()
    assert s.lm_break(["a,", "b"], 1) == F(6, 10)
    assert s.semantic_match(["ab"], ["abcd"], ["ab", "cd"], ["abcd", "efgh"]) == 1


def test_concurrent_requests_are_serialized(tmp_path):
    from concurrent.futures import ThreadPoolExecutor
    model = CommandDurationModel(script(tmp_path, "d.py", DURATION))
    texts = [["x" * n] for n in range(1, 40)]
    with ThreadPoolExecutor(8) as pool:
        got = list(pool.map(model.duration, texts))
    assert got == [F(8 * n, 100) for n in range(1, 40)]
