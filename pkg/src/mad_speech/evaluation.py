"""Scoring benchmarks and measuring agreement with ground-truth diversity."""

import csv
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

import numpy as np

from .errors import (
    DegenerateRanking,
    DimMismatch,
    IncompleteTable,
    LengthMismatch,
    TooFewPoints,
)
from .fileio import format_float, thread_count
from .metrics import Metric, score
from .projection import head_forward


def average_ranks(values):
    """1-based ranks; tied values share the mean of the positions they occupy."""
    x = np.asarray(values, dtype=np.float64)
    n = x.size
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(n, dtype=np.float64)
    sorted_x = x[order]
    i = 0
    while i < n:
        j = i
        while j + 1 < n and sorted_x[j + 1] == sorted_x[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman_rho(x, y):
    """Pearson correlation of average ranks.

    A constant side gives rho = 0 and a :class:`DegenerateRanking` warning.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"lengths differ: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise TooFewPoints(f"need at least 2 points, got {x.size}")
    rx = average_ranks(x)
    ry = average_ranks(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        warnings.warn("constant input, Spearman rho set to 0", DegenerateRanking, stacklevel=2)
        return 0.0
    rho = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, rho))


# ---------------------------------------------------------------------------
# score tables

@dataclass
class ScoreTable:
    """Scores indexed by (level, set); ``scores[l, s]`` is NaN when missing."""

    metric: Metric
    ranks: np.ndarray  # ground-truth rank per level
    scores: np.ndarray  # (levels, sets_per_level)
    facet: Optional[str] = None

    def rows(self):
        for l in range(self.scores.shape[0]):
            for s in range(self.scores.shape[1]):
                yield l, float(self.ranks[l]), s, float(self.scores[l, s])

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level_index", "level_rank", "set_index", "score"])
        for l, rank, s, value in self.rows():
            w.writerow([l, format_float(rank), s, format_float(value)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, metric=Metric.VENDI, facet=None):
        reader = csv.DictReader(io.StringIO(text))
        required = {"level_index", "level_rank", "set_index", "score"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise IncompleteTable(f"score table needs columns {sorted(required)}")
        entries = []
        for lineno, row in enumerate(reader, start=2):
            try:
                entries.append((int(row["level_index"]), float(row["level_rank"]),
                                int(row["set_index"]), float(row["score"])))
            except (TypeError, ValueError):
                raise IncompleteTable(f"line {lineno}: malformed score row") from None
        if not entries:
            raise IncompleteTable("score table is empty")
        n_levels = max(e[0] for e in entries) + 1
        n_sets = max(e[2] for e in entries) + 1
        scores = np.full((n_levels, n_sets), np.nan)
        ranks = np.full(n_levels, np.nan)
        for l, rank, s, value in entries:
            scores[l, s] = value
            ranks[l] = rank
        return cls(Metric.parse(metric), ranks, scores, facet)


def _project_ids(store, head, ids):
    vectors = store.get(ids)
    if head is not None:
        if head.input_dim != store.dim:
            raise DimMismatch(f"head expects dim {head.input_dim}, store has dim {store.dim}")
        vectors = head_forward(head, vectors)
    return vectors


def score_sets(sets, store, head=None, metric=Metric.VENDI, threads=None):
    """Score each list of utterance ids; returns a float64 array."""
    metric = Metric.parse(metric)
    unique = list(dict.fromkeys(uid for s in sets for uid in s))
    vectors = _project_ids(store, head, unique)
    where = {uid: i for i, uid in enumerate(unique)}

    def one(ids):
        return score(vectors[[where[u] for u in ids]], metric).value

    workers = min(thread_count(threads), max(1, len(sets)))
    if workers == 1:
        return np.array([one(s) for s in sets])
    with ThreadPoolExecutor(workers) as pool:
        return np.array(list(pool.map(one, sets)))


def score_benchmark(benchmark, store, head=None, metric=Metric.VENDI, threads=None):
    """Project every set through ``head`` (if any) and score it with ``metric``."""
    metric = Metric.parse(metric)
    flat = [s for level in benchmark.levels for s in level.sets]
    values = score_sets(flat, store, head, metric, threads)
    n_sets = max(len(level.sets) for level in benchmark.levels)
    scores = np.full((len(benchmark.levels), n_sets), np.nan)
    k = 0
    for l, level in enumerate(benchmark.levels):
        for s in range(len(level.sets)):
            scores[l, s] = values[k]
            k += 1
    ranks = np.array([level.rank for level in benchmark.levels], dtype=np.float64)
    return ScoreTable(metric, ranks, scores, getattr(benchmark.facet, "value", benchmark.facet))


# ---------------------------------------------------------------------------
# correlation reports

@dataclass
class CorrelationReport:
    facet: Optional[str]
    metric: str
    per_seed_rho: List[float]
    mean_rho: float
    std_error: float  # sample standard deviation of per_seed_rho (ddof=1)
    n_seeds: int
    sem: float  # std_error / sqrt(n_seeds)
    seed_averaged_rho: float  # rho of per-level mean scores vs ranks
    pooled_rho: Optional[float] = None
    degenerate_seeds: int = 0
    levels: List[int] = field(default_factory=list)

    def to_dict(self):
        return {
            "facet": self.facet,
            "metric": self.metric,
            "mean_rho": self.mean_rho,
            "std_error": self.std_error,
            "std_error_formula": "sample standard deviation (ddof=1) of per-seed rho",
            "sem": self.sem,
            "n_seeds": self.n_seeds,
            "seed_averaged_rho": self.seed_averaged_rho,
            "pooled_rho": self.pooled_rho,
            "degenerate_seeds": self.degenerate_seeds,
            "levels": self.levels,
            "per_seed_rho": self.per_seed_rho,
        }


def evaluate(table, ranks=None, level_indices=None, pooled=False):
    """Per-seed Spearman correlation between scores and ground-truth ranks.

    Seed ``s`` pairs the ``s``-th set of every level. ``level_indices``
    restricts the correlation to a subset of levels (for example the
    female-ratio <= 0.5 half of a gender series).
    """
    scores = np.asarray(table.scores, dtype=np.float64)
    ranks = np.asarray(table.ranks if ranks is None else ranks, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[0] != ranks.size:
        raise IncompleteTable(f"table has {scores.shape[0]} levels, {ranks.size} ranks given")
    levels = list(range(scores.shape[0])) if level_indices is None else [int(i) for i in level_indices]
    if len(levels) < 2:
        raise IncompleteTable("need at least 2 levels to correlate")
    sub = scores[levels]
    sub_ranks = ranks[levels]
    if np.isnan(sub).any():
        l, s = np.argwhere(np.isnan(sub))[0]
        raise IncompleteTable(f"missing score for level {levels[l]}, set {s}")
    if sub.shape[1] < 1:
        raise IncompleteTable("no sets to evaluate")

    per_seed = []
    degenerate = 0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateRanking)
        for s in range(sub.shape[1]):
            n_before = len(caught)
            per_seed.append(spearman_rho(sub[:, s], sub_ranks))
            degenerate += len(caught) > n_before
        seed_avg = spearman_rho(sub.mean(axis=1), sub_ranks)
        pooled_rho = None
        if pooled:
            pooled_rho = spearman_rho(sub.ravel(), np.repeat(sub_ranks, sub.shape[1]))
    if degenerate:
        warnings.warn(f"{degenerate} seed(s) had constant scores", DegenerateRanking, stacklevel=2)

    rho = np.array(per_seed)
    n = rho.size
    sd = float(rho.std(ddof=1)) if n > 1 else 0.0
    return CorrelationReport(
        facet=table.facet,
        metric=Metric.parse(table.metric).value,
        per_seed_rho=[float(r) for r in rho],
        mean_rho=float(rho.mean()),
        std_error=sd,
        n_seeds=n,
        sem=sd / math.sqrt(n),
        seed_averaged_rho=seed_avg,
        pooled_rho=pooled_rho,
        degenerate_seeds=degenerate,
        levels=levels,
    )


# ---------------------------------------------------------------------------
# win rates

@dataclass
class WinRateReport:
    facet: Optional[str]
    metric: Optional[str]
    wins_a: int
    wins_b: int
    ties: int
    total: int

    @property
    def proportion(self):
        return self.wins_a / self.total

    @property
    def tie_rate(self):
        return self.ties / self.total

    @property
    def exact_proportion(self):
        return Fraction(self.wins_a, self.total)

    @property
    def exact_tie_rate(self):
        return Fraction(self.ties, self.total)

    def swapped(self):
        return WinRateReport(self.facet, self.metric, self.wins_b, self.wins_a, self.ties, self.total)

    def to_dict(self):
        return {
            "facet": self.facet,
            "metric": self.metric,
            "wins_a": self.wins_a,
            "wins_b": self.wins_b,
            "ties": self.ties,
            "total": self.total,
            "proportion": self.proportion,
            "tie_rate": self.tie_rate,
        }


def win_rate(scores_a, scores_b, paired=True, facet=None, metric=None):
    """How often system A scores strictly higher than system B.

    Paired comparisons line up index by index; unpaired ones compare every
    score of A with every score of B. Ties are counted separately.
    """
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if paired:
        if a.shape != b.shape:
            raise LengthMismatch(f"paired scores differ in length: {a.size} vs {b.size}")
        wins_a = int(np.sum(a > b))
        wins_b = int(np.sum(b > a))
        total = a.size
    else:
        diff = a[:, None] - b[None, :]
        wins_a = int(np.sum(diff > 0))
        wins_b = int(np.sum(diff < 0))
        total = diff.size
    if total == 0:
        raise TooFewPoints("no comparisons to make")
    return WinRateReport(
        facet=getattr(facet, "value", facet),
        metric=None if metric is None else Metric.parse(metric).value,
        wins_a=wins_a,
        wins_b=wins_b,
        ties=total - wins_a - wins_b,
        total=total,
    )
