"""Synthetic utterance pools for benchmark tests."""

from mad_speech.benchmark import UtteranceRecord


def speaker_pool(n_female=40, n_male=40, utts=60):
    pool = []
    for g, n in (("F", n_female), ("M", n_male)):
        for s in range(n):
            for u in range(utts):
                pool.append(UtteranceRecord(f"{g}{s:02d}_{u:03d}", f"{g}{s:02d}", g))
    return pool


def emotion_pool(n_speakers=8, classes=("angry", "happy", "neutral", "sad"), utts=100):
    """Every speaker records every emotion."""
    pool = []
    for s in range(n_speakers):
        for c in classes:
            for u in range(utts):
                pool.append(UtteranceRecord(f"s{s}_{c}_{u:03d}", f"s{s}", "FM"[s % 2], emotion=c))
    return pool


def accent_pool(n_accents=4, speakers_per_accent=35, utts=30):
    """Each speaker has a single accent."""
    pool = []
    for a in range(n_accents):
        for s in range(speakers_per_accent):
            spk = f"a{a}s{s:02d}"
            for u in range(utts):
                pool.append(UtteranceRecord(f"{spk}_{u:02d}", spk, "FM"[s % 2], accent=f"acc{a}"))
    return pool


def noise_pool(n_classes=100, per_class=100):
    pool = []
    for c in range(n_classes):
        for u in range(per_class):
            pool.append(UtteranceRecord(f"n{c:03d}_{u}", f"spk{u}", "F", noise_classes=["speech", f"noise{c:03d}"]))
    # ineligible records: extra tags, or speech only
    pool.append(UtteranceRecord("multi", "x", "F", noise_classes=["speech", "dog", "rain"]))
    pool.append(UtteranceRecord("clean", "x", "F", noise_classes=["speech"]))
    return pool
