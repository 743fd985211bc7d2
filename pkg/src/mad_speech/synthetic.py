"""Synthetic embedding stores with known structure.

Used for end-to-end checks where real speech embeddings are unavailable:
speakers are clusters on the unit sphere, and an optional gender block makes
gender a separate, weaker direction in the same vector.
"""

import numpy as np

from .benchmark import UtteranceRecord
from .store import EmbeddingStore


def _unit_rows(rng, n, dim):
    x = rng.normal(size=(n, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def speaker_cluster_store(n_speakers=40, utts_per_speaker=60, dim=64, sigma=0.05, seed=0, gender="F"):
    """One unit-sphere centre per speaker plus isotropic noise of scale ``sigma`` per coordinate.

    Returns ``(store, pool)``; every speaker has the given gender.
    """
    rng = np.random.default_rng(seed)
    centers = _unit_rows(rng, n_speakers, dim)
    ids, rows, pool = [], [], []
    for s in range(n_speakers):
        for u in range(utts_per_speaker):
            uid = f"spk{s:03d}_utt{u:03d}"
            ids.append(uid)
            rows.append(centers[s] + sigma * rng.normal(size=dim))
            pool.append(UtteranceRecord(uid, f"spk{s:03d}", gender))
    return EmbeddingStore(ids, np.array(rows)), pool


def voice_gender_store(n_speakers_per_gender=40, utts_per_speaker=60, voice_dim=48, gender_dim=16,
                       voice_scale=1.0, gender_scale=0.35, sigma=0.05, seed=0):
    """Embeddings ``concat(voice block, gender block) + noise``.

    The voice block is a random unit direction per speaker; the gender block
    is one of two fixed unit directions (female / male). Speaker identity
    dominates the raw geometry, so plain embeddings track voice diversity
    rather than gender diversity.
    """
    rng = np.random.default_rng(seed)
    gender_dirs = _unit_rows(rng, 2, gender_dim)
    n = 2 * n_speakers_per_gender
    voices = _unit_rows(rng, n, voice_dim)
    ids, rows, pool = [], [], []
    for s in range(n):
        g = "F" if s < n_speakers_per_gender else "M"
        gvec = gender_dirs[0 if g == "F" else 1]
        for u in range(utts_per_speaker):
            uid = f"{g}{s:03d}_utt{u:03d}"
            vec = np.concatenate([voice_scale * voices[s], gender_scale * gvec])
            ids.append(uid)
            rows.append(vec + sigma * rng.normal(size=voice_dim + gender_dim))
            pool.append(UtteranceRecord(uid, f"{g}{s:03d}", g))
    return EmbeddingStore(ids, np.array(rows)), pool


def labelled_class_store(n_classes=4, n_speakers=8, utts_per_pair=30, dim=32, class_scale=1.0,
                         speaker_scale=0.5, sigma=0.05, seed=0, facet="emotion"):
    """Every speaker has utterances of every class; embedding = class + speaker + noise directions."""
    rng = np.random.default_rng(seed)
    cls_dirs = _unit_rows(rng, n_classes, dim)
    spk_dirs = _unit_rows(rng, n_speakers, dim)
    ids, rows, pool = [], [], []
    for s in range(n_speakers):
        for c in range(n_classes):
            for u in range(utts_per_pair):
                uid = f"s{s:02d}_c{c:02d}_{u:03d}"
                ids.append(uid)
                rows.append(class_scale * cls_dirs[c] + speaker_scale * spk_dirs[s] + sigma * rng.normal(size=dim))
                label = f"class{c:02d}"
                pool.append(UtteranceRecord(
                    uid, f"s{s:02d}", "F" if s % 2 == 0 else "M",
                    emotion=label if facet == "emotion" else None,
                    accent=label if facet == "accent" else None,
                ))
    return EmbeddingStore(ids, np.array(rows)), pool
