"""Series of utterance sets with controlled, known diversity.

Every set draws from its own generator stream, seeded by
``(seed, facet, level index, set index)``, so serial and threaded generation
produce identical benchmarks.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Optional

import numpy as np

from .errors import (
    DataError,
    EmptyDistribution,
    InsufficientClasses,
    InsufficientSpeakers,
    InsufficientUtterances,
)
from .evaluation import average_ranks
from .facets import Facet
from .fileio import atomic_write_text, dumps, thread_count

MANIFEST_FORMAT = "mads-benchmark"
MANIFEST_VERSION = 1
SPEECH_TAG = "speech"

DEFAULT_SPEAKER_COUNTS = (5, 10, 15, 20, 25, 33)
DEFAULT_FEMALE_RATIOS = tuple(round(0.1 * i, 10) for i in range(11))
DEFAULT_NOISE_CLASS_COUNTS = (1, 5, 10, 25, 50, 100)
DEFAULT_SETS_PER_LEVEL = 100


class SpeakerPolicy(str, Enum):
    EQUAL = "equal"  # same number of distinct speakers at every level
    OPPOSED = "opposed"  # speaker count moves against the facet's diversity
    NONE = "none"  # speakers are not controlled

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        v = str(value).lower().replace("-", "_")
        aliases = {
            "equal": cls.EQUAL, "equal_speaker_count": cls.EQUAL, "equalspeakercount": cls.EQUAL,
            "opposed": cls.OPPOSED, "speaker_opposed": cls.OPPOSED, "speakeropposed": cls.OPPOSED,
            "none": cls.NONE,
        }
        if v not in aliases:
            raise ValueError(f"unknown speaker policy {value!r}")
        return aliases[v]


class OpposedSchedule(str, Enum):
    GENDER_VS_VOICE = "gender_vs_voice"
    EMOTION_VS_VOICE = "emotion_vs_voice"
    ACCENT_VS_VOICE = "accent_vs_voice"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        v = str(value).lower().replace("-", "_")
        v = {"gendervsvoice": "gender_vs_voice", "emotionvsvoice": "emotion_vs_voice",
             "accentvsvoice": "accent_vs_voice"}.get(v, v)
        return cls(v)


# ---------------------------------------------------------------------------
# data types

@dataclass
class UtteranceRecord:
    utterance_id: str
    speaker_id: str
    gender: str  # "F" or "M"
    emotion: Optional[str] = None
    accent: Optional[str] = None
    noise_classes: Optional[List[str]] = None
    embedding_ref: Optional[int] = None

    def __post_init__(self):
        if not self.utterance_id:
            raise ValueError("utterance_id must be non-empty")
        g = str(self.gender).strip().lower()
        if g in ("f", "female"):
            self.gender = "F"
        elif g in ("m", "male"):
            self.gender = "M"
        else:
            raise ValueError(f"gender must be 'F' or 'M', got {self.gender!r}")
        if self.noise_classes is not None:
            self.noise_classes = [str(t) for t in self.noise_classes]

    @classmethod
    def from_dict(cls, d):
        known = {"utterance_id", "speaker_id", "gender", "emotion", "accent", "noise_classes", "embedding_ref"}
        missing = {"utterance_id", "speaker_id", "gender"} - set(d)
        if missing:
            raise ValueError(f"missing fields {sorted(missing)}")
        return cls(**{k: v for k, v in d.items() if k in known})

    def noise_class(self):
        """The single background-noise class, or None if the tags are not exactly one noise + speech."""
        if not self.noise_classes or len(self.noise_classes) > 2:
            return None
        rest = [t for t in self.noise_classes if t.strip().lower() != SPEECH_TAG]
        if len(rest) != 1 or len(self.noise_classes) - len(rest) > 1:
            return None
        return rest[0]

    def label(self, facet):
        facet = Facet.parse(facet)
        if facet is Facet.VOICE:
            return self.speaker_id
        if facet is Facet.GENDER:
            return self.gender
        if facet is Facet.EMOTION:
            return self.emotion
        if facet is Facet.ACCENT:
            return self.accent
        return self.noise_class()


class PoolFormatError(DataError):
    pass


def load_pool(path):
    """Read JSON Lines metadata, one UtteranceRecord per line."""
    path = Path(path)
    records, seen = [], {}
    with path.open(encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                if not isinstance(d, dict):
                    raise ValueError("line is not a JSON object")
                rec = UtteranceRecord.from_dict(d)
            except (json.JSONDecodeError, ValueError, TypeError) as exc:
                raise PoolFormatError(f"{path}:{lineno}: {exc}") from None
            if rec.utterance_id in seen:
                raise PoolFormatError(
                    f"{path}:{lineno}: duplicate utterance_id {rec.utterance_id!r} (first on line {seen[rec.utterance_id]})"
                )
            seen[rec.utterance_id] = lineno
            records.append(rec)
    return records


def dump_pool(records):
    lines = []
    for r in records:
        d = {"utterance_id": r.utterance_id, "speaker_id": r.speaker_id, "gender": r.gender,
             "emotion": r.emotion, "accent": r.accent, "noise_classes": r.noise_classes}
        if r.embedding_ref is not None:
            d["embedding_ref"] = r.embedding_ref
        lines.append(json.dumps(d, ensure_ascii=False))
    return "\n".join(lines) + "\n"


@dataclass
class DiversityLevel:
    rank: float
    descriptor: dict
    sets: List[List[str]] = field(default_factory=list)


@dataclass
class FacetBenchmark:
    facet: Facet
    levels: List[DiversityLevel]
    sets_per_level: int
    set_size: int
    seed: int
    parameters: dict = field(default_factory=dict)

    def to_manifest(self):
        return {
            "format": MANIFEST_FORMAT,
            "version": MANIFEST_VERSION,
            "facet": self.facet.value,
            "seed": self.seed,
            "set_size": self.set_size,
            "sets_per_level": self.sets_per_level,
            "parameters": self.parameters,
            "levels": [
                {"rank": float(l.rank), "descriptor": l.descriptor, "sets": l.sets}
                for l in self.levels
            ],
        }

    def dumps(self):
        return dumps(self.to_manifest()) + "\n"

    @classmethod
    def from_manifest(cls, m):
        if not isinstance(m, dict) or m.get("format") != MANIFEST_FORMAT:
            raise DataError("not a benchmark manifest")
        if m.get("version") != MANIFEST_VERSION:
            raise DataError(f"unsupported manifest version {m.get('version')!r}")
        try:
            levels = [DiversityLevel(float(l["rank"]), dict(l["descriptor"]),
                                     [[str(u) for u in s] for s in l["sets"]])
                      for l in m["levels"]]
            return cls(Facet.parse(m["facet"]), levels, int(m["sets_per_level"]),
                       int(m["set_size"]), int(m["seed"]), dict(m.get("parameters", {})))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed manifest: {exc}") from None


def write_manifest(path, benchmark):
    atomic_write_text(path, benchmark.dumps())


def read_manifest(path):
    path = Path(path)
    try:
        m = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return FacetBenchmark.from_manifest(m)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# counting helpers

def class_entropy(counts):
    """Shannon entropy (nats) of the normalized counts."""
    c = np.asarray(counts, dtype=np.float64)
    if c.size == 0 or np.any(c < 0) or c.sum() <= 0:
        raise EmptyDistribution("counts must be non-negative with a positive total")
    p = c[c > 0] / c.sum()
    return float(-np.sum(p * np.log(p)))


def largest_remainder(shares, total):
    """Integer counts summing to ``total``, proportional to ``shares``.

    Leftover units go to the largest fractional parts; ties go to the earlier
    position.
    """
    shares = np.asarray(shares, dtype=np.float64)
    quotas = shares / shares.sum() * total
    base = np.floor(quotas + 1e-9).astype(int)
    frac = np.round(quotas - base, 9)
    left = total - int(base.sum())
    order = sorted(range(len(shares)), key=lambda i: (-frac[i], i))
    for i in order[:left]:
        base[i] += 1
    return [int(x) for x in base]


def equal_split(total, n):
    """``total`` split over ``n`` slots as evenly as possible; the first ``total % n`` get one extra."""
    q, r = divmod(total, n)
    return [q + 1] * r + [q] * (n - r)


def _half_up(x):
    return int(math.floor(x + 0.5 + 1e-9))


def _set_rng(seed, facet, level, index):
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, facet.tag, level, index]))


def _pick(rng, items, k):
    """``k`` distinct items, uniformly, in random order."""
    return [items[i] for i in rng.choice(len(items), size=k, replace=False)]


def _generate(levels, make_set, sets_per_level, threads):
    tasks = [(l, s) for l in range(len(levels)) for s in range(sets_per_level)]
    workers = min(thread_count(threads), len(tasks)) or 1
    if workers == 1:
        results = [make_set(l, s) for l, s in tasks]
    else:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(lambda t: make_set(*t), tasks))
    for (l, _), ids in zip(tasks, results):
        levels[l].sets.append(ids)
    return levels


def _by_speaker(pool, keep=lambda r: True):
    groups = {}
    for r in pool:
        if keep(r):
            groups.setdefault(r.speaker_id, []).append(r.utterance_id)
    return {k: groups[k] for k in sorted(groups)}


def _draw_from_speakers(rng, utts_by_speaker, n_speakers, total, what=""):
    """``n_speakers`` random speakers contributing ``total`` utterances as evenly as possible."""
    speakers = list(utts_by_speaker)
    if len(speakers) < n_speakers:
        raise InsufficientSpeakers(f"{what}need {n_speakers} speakers, pool has {len(speakers)}")
    need = math.ceil(total / n_speakers)
    eligible = [s for s in speakers if len(utts_by_speaker[s]) >= need]
    if len(eligible) < n_speakers:
        short = next(s for s in speakers if len(utts_by_speaker[s]) < need)
        raise InsufficientUtterances(
            short, f"{what}only {len(eligible)} speakers have the {need} utterances needed "
                   f"for {n_speakers} speakers (e.g. {short!r} has {len(utts_by_speaker[short])})")
    chosen = _pick(rng, eligible, n_speakers)  # random order, so the remainder lands on random speakers
    quotas = equal_split(total, n_speakers)
    ids = []
    for spk, k in zip(chosen, quotas):
        ids += _pick(rng, utts_by_speaker[spk], k)
    return ids


# ---------------------------------------------------------------------------
# voice

def sample_voice_series(pool, speaker_counts=DEFAULT_SPEAKER_COUNTS, set_size=200, gender_filter=None,
                        sets_per_level=DEFAULT_SETS_PER_LEVEL, seed=0, threads=None):
    """Levels differ in the number of distinct speakers, each equally represented."""
    gender = None if gender_filter is None else UtteranceRecord("x", "x", gender_filter).gender
    utts = _by_speaker(pool, lambda r: gender is None or r.gender == gender)
    counts = [int(c) for c in speaker_counts]
    if max(counts) > len(utts):
        raise InsufficientSpeakers(f"need {max(counts)} speakers, pool has {len(utts)} of gender {gender}")
    ranks = average_ranks(counts)
    levels = [DiversityLevel(float(r), {"speakers": c}) for r, c in zip(ranks, counts)]

    def make(l, s):
        rng = _set_rng(seed, Facet.VOICE, l, s)
        return _draw_from_speakers(rng, utts, counts[l], set_size, f"level {l}: ")

    _generate(levels, make, sets_per_level, threads)
    params = {"speaker_counts": counts, "gender_filter": gender}
    return FacetBenchmark(Facet.VOICE, levels, sets_per_level, set_size, seed, params)


# ---------------------------------------------------------------------------
# gender

def opposed_speaker_count(ratio, max_speakers, min_speakers):
    """Speaker count falling linearly from ``max_speakers`` (one gender) to ``min_speakers`` (balanced)."""
    balance = min(ratio, 1.0 - ratio) / 0.5
    return _half_up(max_speakers - (max_speakers - min_speakers) * balance)


def _gender_speaker_split(n_speakers, n_female, n_male):
    if n_female == 0:
        return 0, n_speakers
    if n_male == 0:
        return n_speakers, 0
    if n_speakers < 2:
        raise InsufficientSpeakers("a mixed-gender set needs at least 2 speakers")
    nf = _half_up(n_speakers * n_female / (n_female + n_male))
    nf = min(max(nf, 1), n_speakers - 1, n_female)
    nm = n_speakers - nf
    if nm > n_male:
        nm = n_male
        nf = n_speakers - nm
    return nf, nm


def sample_gender_series(pool, ratios=DEFAULT_FEMALE_RATIOS, set_size=100, speaker_policy=SpeakerPolicy.EQUAL,
                         n_speakers=10, max_speakers=30, min_speakers=2,
                         sets_per_level=DEFAULT_SETS_PER_LEVEL, seed=0, threads=None):
    """Levels differ in the proportion of female utterances.

    Ground-truth rank follows ``min(ratio, 1 - ratio)``. With the opposed
    policy the speaker count is largest for single-gender sets and smallest
    for balanced ones.
    """
    policy = SpeakerPolicy.parse(speaker_policy)
    ratios = [float(r) for r in ratios]
    if any(not 0.0 <= r <= 1.0 for r in ratios):
        raise ValueError("female ratios must lie in [0, 1]")
    by_gender = {g: _by_speaker(pool, lambda r, g=g: r.gender == g) for g in ("F", "M")}
    all_by_gender = {g: [r.utterance_id for r in pool if r.gender == g] for g in ("F", "M")}

    ranks = average_ranks([round(min(r, 1.0 - r), 9) for r in ratios])
    levels, plans = [], []
    for r, rho in zip(ranks, ratios):
        n_f = _half_up(rho * set_size)
        n_m = set_size - n_f
        for g, k in (("F", n_f), ("M", n_m)):
            if k > len(all_by_gender[g]):
                raise InsufficientUtterances(g, f"ratio {rho}: need {k} {g} utterances, pool has {len(all_by_gender[g])}")
        if policy is SpeakerPolicy.NONE:
            n_spk, split = None, None
        else:
            n_spk = n_speakers if policy is SpeakerPolicy.EQUAL else opposed_speaker_count(rho, max_speakers, min_speakers)
            split = _gender_speaker_split(n_spk, n_f, n_m)
        desc = {"female_ratio": rho, "female": n_f, "male": n_m, "speakers": n_spk}
        levels.append(DiversityLevel(float(r), desc))
        plans.append((n_f, n_m, split))

    def make(l, s):
        rng = _set_rng(seed, Facet.GENDER, l, s)
        n_f, n_m, split = plans[l]
        ids = []
        for g, k, i in (("F", n_f, 0), ("M", n_m, 1)):
            if k == 0:
                continue
            if split is None:
                ids += _pick(rng, all_by_gender[g], k)
            else:
                ids += _draw_from_speakers(rng, by_gender[g], split[i], k, f"level {l} ({g}): ")
        return ids

    _generate(levels, make, sets_per_level, threads)
    params = {"ratios": ratios, "speaker_policy": policy.value, "n_speakers": n_speakers,
              "max_speakers": max_speakers, "min_speakers": min_speakers}
    return FacetBenchmark(Facet.GENDER, levels, sets_per_level, set_size, seed, params)


# ---------------------------------------------------------------------------
# emotion / accent

def dominance_distribution(dominant_share, n_classes):
    rest = (1.0 - dominant_share) / (n_classes - 1) if n_classes > 1 else 0.0
    return [dominant_share] + [rest] * (n_classes - 1)


def _allocate_with_speakers(rng, class_counts, utts, n_speakers, what=""):
    """Utterance ids realizing ``class_counts`` with a fixed number of distinct speakers.

    ``utts[speaker][cls]`` lists the ids available. Each active class is
    first covered by at least one speaker, the remaining speaker slots go to
    random speakers of the classes with the highest demand per speaker, then
    every utterance slot goes to the eligible speaker with the fewest slots
    so far. ``n_speakers=None`` uses the smallest
    covering set.
    """
    active = [c for c, k in class_counts.items() if k > 0]
    has = {c: [s for s in utts if utts[s].get(c)] for c in active}
    tie = {s: i for i, s in enumerate(_pick(rng, list(utts), len(utts)))}

    chosen = []
    for c in sorted(active, key=lambda c: (len(has[c]), str(c))):
        if not has[c]:
            raise InsufficientUtterances(c, f"{what}no speaker has class {c!r}")
        if any(s in chosen for s in has[c]):
            continue
        free = [s for s in has[c] if s not in chosen]
        chosen.append(free[int(rng.integers(len(free)))])
    if n_speakers is not None:
        if len(chosen) > n_speakers:
            raise InsufficientSpeakers(
                f"{what}covering {len(active)} classes needs {len(chosen)} speakers, only {n_speakers} allowed")
        others = [s for s in utts if s not in chosen and any(utts[s].get(c) for c in active)]
        if n_speakers - len(chosen) > len(others):
            raise InsufficientSpeakers(f"{what}need {n_speakers} speakers, only {len(chosen) + len(others)} usable")
        # extra speakers go first to classes the chosen speakers cannot fill,
        # then to the class with the most utterances per chosen speaker
        while len(chosen) < n_speakers:
            def priority(c):
                holders = [s for s in chosen if utts[s].get(c)]
                covered = sum(len(utts[s][c]) for s in holders) >= class_counts[c]
                return covered, -class_counts[c] / len(holders), str(c)
            for c in sorted(active, key=priority):
                free = [s for s in others if s not in chosen and utts[s].get(c)]
                if free:
                    chosen.append(free[int(rng.integers(len(free)))])
                    break

    assigned = {s: 0 for s in chosen}
    take = {}
    for c in sorted(active, key=lambda c: (sum(1 for s in chosen if utts[s].get(c)), str(c))):
        cap = {s: len(utts[s].get(c, ())) for s in chosen}
        for _ in range(class_counts[c]):
            cands = [s for s in chosen if cap[s] > take.get((s, c), 0)]
            if not cands:
                raise InsufficientUtterances(c, f"{what}chosen speakers lack utterances of class {c!r}")
            s = min(cands, key=lambda s: (assigned[s], tie[s]))
            take[(s, c)] = take.get((s, c), 0) + 1
            assigned[s] += 1
    idle = [s for s in chosen if assigned[s] == 0]
    if idle:
        raise InsufficientUtterances(c, f"{what}{len(idle)} of {len(chosen)} speakers received no utterances")
    ids = []
    for (s, c), k in sorted(take.items(), key=lambda kv: (tie[kv[0][0]], str(kv[0][1]))):
        ids += _pick(rng, utts[s][c], k)
    return ids


def sample_entropy_series(pool, facet, level_count=6, set_size=100, speaker_policy=SpeakerPolicy.EQUAL,
                          n_speakers=4, low_entropy_speakers=4, high_entropy_speakers=1, classes=None,
                          sets_per_level=DEFAULT_SETS_PER_LEVEL, seed=0, threads=None):
    """Levels differ in the entropy of the class distribution (emotion or accent).

    The dominant class share falls linearly from 1 to ``1/E``; the other
    classes split the rest evenly and counts are rounded by largest
    remainder. Which class dominates is drawn per set. With the opposed
    policy the low-entropy half of the levels uses ``low_entropy_speakers``
    and the high-entropy half ``high_entropy_speakers`` (``None`` = the
    fewest speakers that cover the classes).
    """
    facet = Facet.parse(facet)
    if facet not in (Facet.EMOTION, Facet.ACCENT):
        raise ValueError("entropy series are defined for emotion and accent")
    policy = SpeakerPolicy.parse(speaker_policy)
    labelled = [r for r in pool if r.label(facet) is not None]
    available = sorted({r.label(facet) for r in labelled})
    cls_list = available if classes is None else [c for c in classes]
    missing = [c for c in cls_list if c not in available]
    if missing:
        raise InsufficientClasses(f"classes {missing} not present in pool")
    if len(cls_list) < 2:
        raise InsufficientClasses(f"need at least 2 {facet.value} classes, found {len(cls_list)}")
    if level_count < 2:
        raise ValueError("level_count must be >= 2")
    n_cls = len(cls_list)
    keep = set(cls_list)

    utts = {}  # speaker -> class -> ids
    by_class = {c: [] for c in cls_list}
    for r in labelled:
        c = r.label(facet)
        if c in keep:
            utts.setdefault(r.speaker_id, {}).setdefault(c, []).append(r.utterance_id)
            by_class[c].append(r.utterance_id)
    utts = {s: utts[s] for s in sorted(utts)}

    shares = np.linspace(1.0, 1.0 / n_cls, level_count)
    profiles = [largest_remainder(dominance_distribution(p, n_cls), set_size) for p in shares]
    top = profiles[0][0]
    for c in cls_list:
        if len(by_class[c]) < top:
            raise InsufficientUtterances(c, f"class {c!r} has {len(by_class[c])} utterances, {top} may be needed")
    entropies = [class_entropy(p) for p in profiles]
    ranks = average_ranks([round(h, 12) for h in entropies])

    def speakers_for(level):
        if policy is SpeakerPolicy.EQUAL:
            return n_speakers
        if policy is SpeakerPolicy.OPPOSED:
            return high_entropy_speakers if level >= level_count / 2 else low_entropy_speakers
        return None

    levels = []
    for l, (p, counts, h, r) in enumerate(zip(shares, profiles, entropies, ranks)):
        desc = {"dominant_share": float(p), "class_counts": counts, "entropy": h,
                "speakers": speakers_for(l) if policy is not SpeakerPolicy.NONE else None}
        levels.append(DiversityLevel(float(r), desc))

    def make(l, s):
        rng = _set_rng(seed, facet, l, s)
        order = _pick(rng, cls_list, n_cls)  # order[0] dominates
        counts = dict(zip(order, profiles[l]))
        if policy is SpeakerPolicy.NONE:
            ids = []
            for c in order:
                ids += _pick(rng, by_class[c], counts[c])
            return ids
        return _allocate_with_speakers(rng, counts, utts, speakers_for(l), f"level {l}: ")

    _generate(levels, make, sets_per_level, threads)
    params = {"level_count": level_count, "classes": cls_list, "speaker_policy": policy.value,
              "n_speakers": n_speakers, "low_entropy_speakers": low_entropy_speakers,
              "high_entropy_speakers": high_entropy_speakers}
    return FacetBenchmark(facet, levels, sets_per_level, set_size, seed, params)


# ---------------------------------------------------------------------------
# background noise

def sample_noise_series(pool, class_counts=DEFAULT_NOISE_CLASS_COUNTS, set_size=100,
                        sets_per_level=DEFAULT_SETS_PER_LEVEL, seed=0, threads=None):
    """Levels differ in the number of distinct background-noise classes.

    Only utterances tagged with exactly one noise class (besides speech) are
    eligible.
    """
    by_class = {}
    for r in pool:
        c = r.noise_class()
        if c is not None:
            by_class.setdefault(c, []).append(r.utterance_id)
    by_class = {c: by_class[c] for c in sorted(by_class)}
    counts = [int(c) for c in class_counts]
    if max(counts) > len(by_class):
        raise InsufficientClasses(f"need {max(counts)} noise classes, pool has {len(by_class)}")
    ranks = average_ranks(counts)
    levels = [DiversityLevel(float(r), {"noise_classes": c}) for r, c in zip(ranks, counts)]

    def make(l, s):
        rng = _set_rng(seed, Facet.NOISE, l, s)
        # noise classes play the role speakers play in the voice series
        return _draw_from_speakers(rng, by_class, counts[l], set_size, f"level {l}: ")

    try:
        _generate(levels, make, sets_per_level, threads)
    except InsufficientSpeakers as exc:
        raise InsufficientClasses(str(exc)) from None
    params = {"class_counts": counts}
    return FacetBenchmark(Facet.NOISE, levels, sets_per_level, set_size, seed, params)


# ---------------------------------------------------------------------------
# opposed-facet series

def sample_opposed_series(pool, schedule, sets_per_level=DEFAULT_SETS_PER_LEVEL, seed=0, threads=None, **kwargs):
    """Built-in series where the speaker count moves against the primary facet.

    * ``gender_vs_voice``: 30 speakers at female ratio 0 or 1, 2 at ratio 0.5.
    * ``emotion_vs_voice``: 4 speakers at low entropy, 1 at high entropy.
    * ``accent_vs_voice``: 30 speakers at low entropy, 7 at high entropy.

    Keyword arguments override the schedule's defaults.
    """
    schedule = OpposedSchedule.parse(schedule)
    common = dict(sets_per_level=sets_per_level, seed=seed, threads=threads)
    if schedule is OpposedSchedule.GENDER_VS_VOICE:
        args = dict(max_speakers=30, min_speakers=2, set_size=100)
        args.update(kwargs)
        bench = sample_gender_series(pool, speaker_policy=SpeakerPolicy.OPPOSED, **args, **common)
    elif schedule is OpposedSchedule.EMOTION_VS_VOICE:
        args = dict(low_entropy_speakers=4, high_entropy_speakers=1)
        args.update(kwargs)
        bench = sample_entropy_series(pool, Facet.EMOTION, speaker_policy=SpeakerPolicy.OPPOSED, **args, **common)
    else:
        args = dict(low_entropy_speakers=30, high_entropy_speakers=7)
        args.update(kwargs)
        bench = sample_entropy_series(pool, Facet.ACCENT, speaker_policy=SpeakerPolicy.OPPOSED, **args, **common)
    bench.parameters["schedule"] = schedule.value
    return bench
