"""Step 2: move segment boundaries to control the target speaking rate.

On-screen sentences are relaxed locally: every segment may extend or shrink
each side by a grid fraction of the minimum pause. Off-screen runs are
relaxed globally: boundaries may move anywhere inside the surrounding
silences, scored by how intelligible the resulting speaking rate is.

Both searches are chain-structured max-sum problems solved by a backward
pass plus a forward read-out. Ties on the exact score are broken by the
smaller total boundary shift, then by the lexicographically smallest
assignment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .core import (RelaxationPlan, RelaxedSegment, Segmentation, SentencePair, as_time,
                   source_intervals)
from .duration import synth_duration
from .exceptions import InvalidInputError, OracleTooLargeError
from .features import (FeatureWeights, Models, RelaxContext, SentenceContext, exact, from_exact,
                       isochrony_score, log_score, rate_match_score, rate_variation_score)

GRID = tuple(Fraction(i, 4) for i in range(-4, 5))
ORACLE_LIMIT = 10**6
UNINTELLIGIBLE = "unintelligible-run"


def offscreen_score(rate) -> Fraction:
    """Score of an off-screen segment's speaking rate: 1 up to normal speed,
    falling linearly to 0 at double speed, 0 beyond."""
    if rate <= 1:
        return Fraction(1)
    if rate <= 2:
        return 2 - Fraction(rate)
    return Fraction(0)


def _chain_argmax(domains, unary, pairwise):
    """Maximize sum of unary and consecutive pairwise terms over a chain.

    ``unary(i, x)`` returns ``(score, shift)`` or None (infeasible);
    ``pairwise(i, x, y)`` scores ``x`` at position i followed by ``y``, or
    None. The objective is ``(score, -shift)``; among ties the first values
    in domain order win, position by position.
    """
    n = len(domains)
    un = []
    for i, dom in enumerate(domains):
        un.append([unary(i, x) for x in dom])
    value = [None] * n
    value[n - 1] = [None if u is None else (u[0], -u[1]) for u in un[n - 1]]
    for i in range(n - 2, -1, -1):
        nxt = value[i + 1]
        row = []
        for xi, x in enumerate(domains[i]):
            u = un[i][xi]
            if u is None:
                row.append(None)
                continue
            best = None
            for yi, y in enumerate(domains[i + 1]):
                v = nxt[yi]
                if v is None:
                    continue
                p = pairwise(i, x, y)
                if p is None:
                    continue
                cand = (p + v[0], v[1])
                if best is None or cand > best:
                    best = cand
            row.append(None if best is None else (u[0] + best[0], best[1] - u[1]))
        value[i] = row
    feasible = [v for v in value[0] if v is not None]
    if not feasible:
        return None, None
    total = max(feasible)
    xi = value[0].index(total)
    choice = [domains[0][xi]]
    for i in range(n - 1):
        u = un[i][xi]
        want = (value[i][xi][0] - u[0], value[i][xi][1] + u[1])
        for yi, y in enumerate(domains[i + 1]):
            v = value[i + 1][yi]
            if v is None:
                continue
            p = pairwise(i, choice[-1], y)
            if p is not None and (p + v[0], v[1]) == want:
                xi = yi
                break
        choice.append(domains[i + 1][xi])
    return choice, total


def _grid_scale(grid) -> int:
    return math.lcm(*(Fraction(g).denominator for g in grid))


class _LocalTerms:
    """Step-2 transition scores split into exact per-feature parts.

    With breakpoints fixed, s1/s2 are constant per segment, s3 depends on the
    previous and current ``dl + dr``, s4 on the current ``dl + dr`` and s5 on
    ``|dl| + |dr|``. Sums are keyed in integer grid units.
    """

    def __init__(self, relax: RelaxContext, weights: FeatureWeights, grid):
        self.relax = relax
        self.scale = _grid_scale(grid)
        self.w = weights.as_tuple()
        self.k = relax.segmentation.k
        self._const = [self._part(0, relax.fixed[t][0]) + self._part(1, relax.fixed[t][1])
                       for t in range(self.k)]
        self._rates = {}
        self._s3 = {}
        self._s4 = {}
        self._s5 = {}

    def _part(self, a, score) -> int:
        w = self.w[a]
        return exact(w * log_score(score)) if w else 0

    def units(self, dl, dr) -> tuple:
        return (int((dl + dr) * self.scale), int((abs(dl) + abs(dr)) * self.scale))

    def rate(self, t, su) -> Fraction:
        key = (t, su)
        if key not in self._rates:
            self._rates[key] = self.relax.rate(t, Fraction(su, self.scale), 0)
        return self._rates[key]

    def term(self, t, su, au, prev_su=None) -> int:
        """Exact score of segment ``t`` (1-based) given delta sums in grid units."""
        rate = self.rate(t, su)
        key = (t, su)
        if key not in self._s4:
            self._s4[key] = self._part(3, rate_match_score(self.relax.context.source_rates[t - 1], rate))
        if au not in self._s5:
            self._s5[au] = self._part(4, isochrony_score(Fraction(au, self.scale), 0))
        total = self._const[t - 1] + self._s4[key] + self._s5[au]
        if prev_su is not None:
            key3 = (t, prev_su, su)
            if key3 not in self._s3:
                self._s3[key3] = self._part(2, rate_variation_score(self.rate(t - 1, prev_su), rate))
            total += self._s3[key3]
        return total


@dataclass(frozen=True)
class _LocalSetup:
    relax: RelaxContext
    min_pause: Fraction
    grid: tuple
    left_room: Optional[Fraction]
    right_room: Optional[Fraction]
    min_residual: Fraction

    @property
    def intervals(self):
        return self.relax.context.intervals


def _local_setup(pair, segmentation, models, left_room, right_room, min_residual, grid, context,
                 source_language):
    context = context or SentenceContext(pair, models, source_language)
    grid = tuple(sorted(Fraction(g) for g in grid))
    room = lambda r: None if r is None else as_time(r)
    return _LocalSetup(RelaxContext(context, segmentation), context.source.min_pause, grid,
                       room(left_room), room(right_room), as_time(min_residual))


def _local_plan(setup: _LocalSetup, deltas, score) -> RelaxationPlan:
    segs = []
    for t, (dl, dr) in enumerate(deltas, start=1):
        iv = setup.intervals[t - 1]
        segs.append(RelaxedSegment(iv.begin, iv.end, iv.begin - dl * setup.min_pause,
                                   iv.end + dr * setup.min_pause, setup.relax.speech[t - 1]))
    return RelaxationPlan(tuple(segs), setup.min_pause, True, score)


def relax_local(pair: SentencePair, segmentation: Segmentation, weights: FeatureWeights,
                models: Optional[Models] = None, left_room=None, right_room=None, min_residual=0,
                grid: Sequence = GRID, context: Optional[SentenceContext] = None,
                source_language: str = "en") -> RelaxationPlan:
    """Per-segment (dl, dr) grid relaxations maximizing the summed step-2 scores.

    ``left_room``/``right_room`` cap how far the first segment may start
    earlier and the last may end later (None means unlimited). Adjacent
    segments must keep at least ``min_residual`` seconds of silence.
    """
    s = _local_setup(pair, segmentation, models, left_room, right_room, min_residual, grid, context,
                     source_language)
    k = segmentation.k
    eps, ivs = s.min_pause, s.intervals
    terms = _LocalTerms(s.relax, weights, s.grid)
    # state: (dl, dr, sum units, abs units, dl units, dr units)
    states = [(dl, dr, *terms.units(dl, dr), int(dl * terms.scale), int(dr * terms.scale))
              for dl in s.grid for dr in s.grid]
    # largest admissible dr(t) + dl(t+1), in grid units
    slack = [math.floor((ivs[t + 1].begin - ivs[t].end - s.min_residual) / eps * terms.scale)
             for t in range(k - 1)]

    def unary(i, x):
        dl, dr, su, au = x[:4]
        if ivs[i].length + (dl + dr) * eps <= 0:
            return None
        if i == 0 and s.left_room is not None and dl * eps > s.left_room:
            return None
        if i == k - 1 and s.right_room is not None and dr * eps > s.right_room:
            return None
        return (terms.term(1, su, au) if i == 0 else 0, au)

    def pairwise(i, x, y):
        if x[5] + y[4] > slack[i]:
            return None
        return terms.term(i + 2, y[2], y[3], x[2])

    choice, total = _chain_argmax([states] * k, unary, pairwise)
    return _local_plan(s, [x[:2] for x in choice], from_exact(total[0]))


def local_plan_score(pair, segmentation, deltas, weights, models=None, source_language="en") -> float:
    """Step-2 total of a given assignment of (dl, dr) per segment."""
    relax = RelaxContext(SentenceContext(pair, models, source_language), segmentation)
    total, prev = 0, None
    for t, (dl, dr) in enumerate(deltas, start=1):
        total += relax.exact(Fraction(dl), Fraction(dr), prev, t, weights)
        prev = (Fraction(dl), Fraction(dr))
    return from_exact(total)


@dataclass(frozen=True)
class OffscreenRun:
    """Consecutive off-screen sentences relaxed jointly inside ``[left_bound, right_bound]``."""

    sentences: tuple
    left_bound: Fraction
    right_bound: Fraction
    source_language: str = "en"

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        object.__setattr__(self, "left_bound", as_time(self.left_bound))
        object.__setattr__(self, "right_bound", as_time(self.right_bound))
        if not self.sentences:
            raise InvalidInputError("off-screen run needs at least one sentence")
        if any(p.target.onscreen for p, _ in self.sentences):
            raise InvalidInputError("off-screen run contains an on-screen sentence")
        if self.right_bound < self.left_bound:
            raise InvalidInputError("run bounds out of order")
        first, last = self.sentences[0][0].source, self.sentences[-1][0].source
        if first.start < self.left_bound or last.end > self.right_bound:
            raise InvalidInputError("run sentences cross the run bounds")

    @property
    def min_pause(self) -> Fraction:
        return self.sentences[0][0].source.min_pause


@dataclass
class BoundaryLattice:
    """Candidate begin/end positions for every segment of a run.

    Boundaries only move outwards into silence, in steps of ``quantum``
    anchored at the original boundary. ``begins[s]``/``ends[s]`` are sorted
    ascending.
    """

    source: list
    speech: list
    groups: tuple
    begins: list
    ends: list
    quantum: Fraction
    min_residual: Fraction
    left_bound: Fraction
    right_bound: Fraction

    @property
    def size(self) -> int:
        total = len(self.begins[0]) * len(self.ends[-1])
        for s in range(len(self.source) - 1):
            total *= sum(1 for e in self.ends[s] for b in self.begins[s + 1]
                         if b - e >= self.min_residual)
        return total


def boundary_lattice(run: OffscreenRun, models: Optional[Models] = None, quantum=None,
                     min_residual=0) -> BoundaryLattice:
    models = models or Models()
    q = run.min_pause / 4 if quantum is None else as_time(quantum)
    if q <= 0:
        raise InvalidInputError("lattice quantum must be positive")
    r = as_time(min_residual)
    source, speech, groups = [], [], []
    for pair, seg in run.sentences:
        groups.append(seg.k)
        for t, tokens in enumerate(seg.segments(pair.target.words), start=1):
            iv = source_intervals(pair.source)[t - 1]
            source.append((iv.begin, iv.end))
            speech.append(synth_duration(models.duration, tokens, pair.target.language))
    S = len(source)
    begins, ends = [], []
    for s, (b, e) in enumerate(source):
        lo = run.left_bound if s == 0 else source[s - 1][1] + r
        hi = run.right_bound if s == S - 1 else source[s + 1][0] - r
        nb = max(0, math.floor((b - lo) / q))
        ne = max(0, math.floor((hi - e) / q))
        begins.append([b - i * q for i in range(nb, -1, -1)])
        ends.append([e + i * q for i in range(ne + 1)])
    return BoundaryLattice(source, speech, tuple(groups), begins, ends, q, r, run.left_bound,
                           run.right_bound)


def _global_plan(lat: BoundaryLattice, run: OffscreenRun, positions, score, warnings) -> RelaxationPlan:
    segs = [RelaxedSegment(lat.source[s][0], lat.source[s][1], positions[2 * s], positions[2 * s + 1],
                           lat.speech[s]) for s in range(len(lat.source))]
    return RelaxationPlan(tuple(segs), run.min_pause, False, score, warnings, lat.groups)


def relax_global(run: OffscreenRun, models: Optional[Models] = None, quantum=None,
                 min_residual=0) -> RelaxationPlan:
    """Boundary positions across a whole off-screen run maximizing the summed log rate score.

    When every assignment leaves some segment above double speed, the plan
    giving the most total speaking time is returned with a warning.
    """
    lat = boundary_lattice(run, models, quantum, min_residual)
    domains = []
    for s in range(len(lat.source)):
        domains += [lat.begins[s], lat.ends[s]]
    orig = []
    for b, e in lat.source:
        orig += [b, e]
    q = lat.quantum

    def unary(i, x):
        return (0, int(abs(x - orig[i]) / q))

    def pairwise(i, x, y):
        if i % 2 == 1:
            return 0 if y - x >= lat.min_residual else None
        length = y - x
        if length <= 0:
            return None
        sc = offscreen_score(lat.speech[i // 2] / length)
        return None if sc == 0 else exact(log_score(sc))

    choice, total = _chain_argmax(domains, unary, pairwise)
    if choice is not None:
        return _global_plan(lat, run, choice, from_exact(total[0]), ())

    def longest(i, x, y):
        if i % 2 == 1:
            return 0 if y - x >= lat.min_residual else None
        return y - x if y > x else None

    choice, _ = _chain_argmax(domains, unary, longest)
    return _global_plan(lat, run, choice, float("-inf"), (UNINTELLIGIBLE,))


def trim_slow_segments(plan: RelaxationPlan) -> RelaxationPlan:
    """Pull in the end of every off-screen segment slower than normal speed so its rate is 1."""
    if plan.onscreen:
        return plan
    segs = []
    for seg in plan.segments:
        if seg.rate < 1:
            seg = RelaxedSegment(seg.source_begin, seg.source_end, seg.begin, seg.begin + seg.speech,
                                 seg.speech)
        segs.append(seg)
    return RelaxationPlan(tuple(segs), plan.min_pause, plan.onscreen, plan.score, plan.warnings,
                          plan.groups)


def plan_violations(plan: RelaxationPlan, bounds=None, min_residual=0, grid=GRID) -> list:
    """Broken plan constraints: ordering/overlap, positive length, grid and bound limits."""
    problems = []
    r = as_time(min_residual)
    segs = plan.segments
    for i, seg in enumerate(segs):
        if seg.end <= seg.begin:
            problems.append(f"segment {i} has non-positive length")
        if i and seg.begin - segs[i - 1].end < r:
            problems.append(f"segments {i - 1} and {i} overlap or leave less than {r}s")
        if plan.onscreen:
            dl, dr = seg.deltas(plan.min_pause)
            if dl not in grid or dr not in grid:
                problems.append(f"segment {i} relaxation ({dl}, {dr}) is off the grid")
    if bounds is not None and segs:
        lo, hi = bounds
        if segs[0].begin < lo or segs[-1].end > hi:
            problems.append("plan crosses its bounds")
    return problems


# ---------------------------------------------------------------------------
# Exhaustive oracles
# ---------------------------------------------------------------------------

def _units(values) -> int:
    return math.lcm(*(Fraction(v).denominator for v in values))


def _select(feasible, approx, term_ids, term_exact, shift, lex):
    """Exact argmax among rows; tie-break by smaller shift, then lexicographic ``lex`` columns."""
    rows = np.flatnonzero(feasible)
    if rows.size == 0:
        return None, None
    top = approx[rows].max()
    rows = rows[approx[rows] >= top - 1e-9 * max(1.0, abs(top))]
    uniq, inv = np.unique(term_ids[rows], axis=0, return_inverse=True)
    exact_vals = [sum(term_exact[c][u[c]] for c in range(len(u))) for u in uniq]
    best = max(exact_vals)
    rows = rows[np.array([exact_vals[i] == best for i in inv.ravel()])]
    rows = rows[shift[rows] == shift[rows].min()]
    order = np.lexsort(lex[rows].T[::-1])
    return int(rows[order[0]]), best


def _product(sizes):
    total = math.prod(sizes)
    if total > ORACLE_LIMIT:
        raise OracleTooLargeError(f"{total} assignments exceed the oracle limit of {ORACLE_LIMIT}")
    return np.indices(sizes).reshape(len(sizes), -1).T


def brute_force_relax_local(pair, segmentation, weights, models=None, left_room=None, right_room=None,
                            min_residual=0, grid=GRID, context=None, source_language="en"):
    """Exhaustive version of :func:`relax_local` (test oracle)."""
    s = _local_setup(pair, segmentation, models, left_room, right_room, min_residual, grid, context,
                     source_language)
    k, eps, G = segmentation.k, s.min_pause, len(s.grid)
    states = [(dl, dr) for dl in s.grid for dr in s.grid]
    combos = _product([len(states)] * k)

    unit = _units([eps, s.min_residual, *(g * eps for g in s.grid), *(v for iv in s.intervals for v in (iv.begin, iv.end)),
                   *(r for r in (s.left_room, s.right_room) if r is not None)])
    as_int = lambda f: int(f * unit)
    grid_units = np.array([as_int(g * eps) for g in s.grid], dtype=np.int64)
    dl_u = grid_units[combos // G]
    dr_u = grid_units[combos % G]
    b0 = np.array([as_int(iv.begin) for iv in s.intervals], dtype=np.int64)
    e0 = np.array([as_int(iv.end) for iv in s.intervals], dtype=np.int64)
    begins, ends = b0 - dl_u, e0 + dr_u
    feasible = np.all(ends > begins, axis=1)
    if k > 1:
        feasible &= np.all(begins[:, 1:] - ends[:, :-1] >= as_int(s.min_residual), axis=1)
    if s.left_room is not None:
        feasible &= begins[:, 0] >= b0[0] - as_int(s.left_room)
    if s.right_room is not None:
        feasible &= ends[:, -1] <= e0[-1] + as_int(s.right_room)

    n = len(states)
    terms = _LocalTerms(s.relax, weights, s.grid)
    units = [terms.units(dl, dr) for dl, dr in states]
    positive = [[s.intervals[t].length + sum(x) * eps > 0 for x in states] for t in range(k)]
    term_exact, term_float, ids = [], [], np.zeros_like(combos)
    for t in range(1, k + 1):
        ex = []
        for pi in range(n if t > 1 else 1):
            for ci in range(n):
                ok = positive[t - 1][ci] and (t == 1 or positive[t - 2][pi])
                if not ok:
                    ex.append(0)
                elif t == 1:
                    ex.append(terms.term(1, *units[ci]))
                else:
                    ex.append(terms.term(t, *units[ci], units[pi][0]))
        term_exact.append(ex)
        term_float.append(np.array([from_exact(v) for v in ex]))
        ids[:, t - 1] = combos[:, t - 1] if t == 1 else combos[:, t - 2] * n + combos[:, t - 1]
    approx = sum(term_float[c][ids[:, c]] for c in range(k))
    shift_units = np.array([int((abs(dl) + abs(dr)) * _grid_scale(s.grid)) for dl, dr in states])
    shift = shift_units[combos].sum(axis=1)
    # states are sorted by (dl, dr), so state indices order assignments lexicographically
    row, best = _select(feasible, approx, ids, term_exact, shift, combos)
    deltas = [states[i] for i in combos[row]]
    return _local_plan(s, deltas, from_exact(best))


def brute_force_relax_global(run: OffscreenRun, models=None, quantum=None, min_residual=0):
    """Exhaustive version of :func:`relax_global` (test oracle)."""
    lat = boundary_lattice(run, models, quantum, min_residual)
    S = len(lat.source)
    # Enumerate the leading begin, each (end, next begin) pair inside a gap, and the trailing end.
    # Pairs that leave less than the residual pause are dropped here and re-checked below.
    blocks = [[(b,) for b in lat.begins[0]]]
    for s in range(S - 1):
        blocks.append([(e, b) for e in lat.ends[s] for b in lat.begins[s + 1] if b - e >= lat.min_residual])
    blocks.append([(e,) for e in lat.ends[-1]])
    combos = _product([len(bl) for bl in blocks])
    values, block_of = [], []
    for bi, bl in enumerate(blocks):
        for c in range(len(bl[0])):
            values.append([opt[c] for opt in bl])
            block_of.append(bi)
    unit = _units([lat.quantum, lat.min_residual, lat.left_bound, lat.right_bound,
                   *(v for src in lat.source for v in src)])
    pos_int = np.empty((len(combos), 2 * S), dtype=np.int64)
    for v in range(2 * S):
        table = np.array([int(p * unit) for p in values[v]], dtype=np.int64)
        pos_int[:, v] = table[combos[:, block_of[v]]]
    begins, ends = pos_int[:, 0::2], pos_int[:, 1::2]
    feasible = np.all(ends > begins, axis=1)
    feasible &= begins[:, 0] >= int(lat.left_bound * unit)
    feasible &= ends[:, -1] <= int(lat.right_bound * unit)
    if S > 1:
        feasible &= np.all(begins[:, 1:] - ends[:, :-1] >= int(lat.min_residual * unit), axis=1)

    lengths = ends - begins
    ids = np.zeros((len(combos), S), dtype=np.int64)
    term_exact, term_float, dead = [], [], np.zeros(len(combos), dtype=bool)
    for s in range(S):
        uniq, inv = np.unique(lengths[:, s], return_inverse=True)
        ids[:, s] = inv.ravel()
        ex, fl, zero = [], [], []
        for L in uniq:
            L = Fraction(int(L), unit)
            sc = offscreen_score(lat.speech[s] / L) if L > 0 else Fraction(0)
            zero.append(sc == 0)
            ex.append(0 if sc == 0 else exact(log_score(sc)))
            fl.append(from_exact(ex[-1]))
        term_exact.append(ex)
        term_float.append(np.array(fl))
        dead |= np.array(zero)[ids[:, s]]
    orig = np.array([int(v * unit) for src in lat.source for v in src], dtype=np.int64)
    shift = (np.abs(pos_int - orig) // int(lat.quantum * unit)).sum(axis=1)
    warnings = ()
    if np.any(feasible & ~dead):
        approx = sum(term_float[s][ids[:, s]] for s in range(S))
        row, best = _select(feasible & ~dead, approx, ids, term_exact, shift, pos_int)
        score = from_exact(best)
    else:
        total_len = lengths.sum(axis=1)
        len_ids = np.unique(total_len, return_inverse=True)[1].reshape(-1, 1)
        uniq = np.unique(total_len)
        row, _ = _select(feasible, total_len.astype(float), len_ids, [[int(v) for v in uniq]], shift,
                         pos_int)
        score, warnings = float("-inf"), (UNINTELLIGIBLE,)
    chosen = [values[v][combos[row, block_of[v]]] for v in range(2 * S)]
    return _global_plan(lat, run, chosen, score, warnings)


def brute_force_relax(target, *args, **kwargs) -> RelaxationPlan:
    """Dispatch to the local oracle for a sentence pair or the global one for an off-screen run."""
    if isinstance(target, OffscreenRun):
        return brute_force_relax_global(target, *args, **kwargs)
    return brute_force_relax_local(target, *args, **kwargs)
