"""Diversity of a set of embeddings: mean pairwise cosine dissimilarity and Vendi score."""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DimMismatch,
    EmptySequence,
    NonFiniteInput,
    NumericalBoundsViolation,
    TooFewVectors,
    ZeroNormVector,
)
from .linalg import symmetric_eigvalsh

EIG_TOL = 1e-9
BOUNDS_TOL = 1e-9
ZERO_EIGENVALUE = 1e-12


class Metric(str, Enum):
    MEAN_PAIRWISE_DISSIMILARITY = "cosine"
    VENDI = "vendi"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {
            "cosine": cls.MEAN_PAIRWISE_DISSIMILARITY,
            "mean_pairwise_dissimilarity": cls.MEAN_PAIRWISE_DISSIMILARITY,
            "meanpairwisedissimilarity": cls.MEAN_PAIRWISE_DISSIMILARITY,
            "avg_cosine": cls.MEAN_PAIRWISE_DISSIMILARITY,
            "vendi": cls.VENDI,
            "vendi_score": cls.VENDI,
            "vendiscore": cls.VENDI,
        }
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown metric {value!r}; expected 'cosine' or 'vendi'") from None


class EmbeddingSet:
    """Validated, ordered set of utterance embeddings.

    Storage dtype is preserved (float32 stores stay compact); every score is
    computed in float64.
    """

    def __init__(self, vectors, ids: Optional[Sequence[str]] = None):
        arr = np.asarray(vectors)
        if arr.ndim != 2:
            raise DimMismatch(f"expected a 2-D array of vectors, got shape {arr.shape}")
        if arr.shape[1] == 0:
            raise DimMismatch("embedding dimension must be positive")
        if not np.issubdtype(arr.dtype, np.floating):
            arr = arr.astype(np.float64)
        finite = np.all(np.isfinite(arr), axis=1)
        if not finite.all():
            raise NonFiniteInput(int(np.argmin(finite)))
        norms = np.linalg.norm(arr.astype(np.float64), axis=1)
        if np.any(norms == 0.0):
            raise ZeroNormVector(int(np.argmin(norms != 0.0)))
        if ids is not None:
            ids = list(ids)
            if len(ids) != arr.shape[0]:
                raise DimMismatch(f"{len(ids)} ids for {arr.shape[0]} vectors")
        self.vectors = arr
        self.ids = ids

    @property
    def n(self):
        return self.vectors.shape[0]

    @property
    def dim(self):
        return self.vectors.shape[1]

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class SimilaritySpectrum:
    eigenvalues: np.ndarray  # non-increasing, clamped to [0, 1]
    n: int


@dataclass(frozen=True)
class DiversityScore:
    metric: Metric
    value: float
    n: int

    def to_dict(self):
        return {"metric": self.metric.value, "value": self.value, "n": self.n}


def _as_set(x):
    return x if isinstance(x, EmbeddingSet) else EmbeddingSet(x)


def pool_time_axis(frames):
    """Average frame-level vectors over time into one utterance vector."""
    if frames is None or len(frames) == 0:
        raise EmptySequence("no frames to pool")
    try:
        arr = np.asarray(frames, dtype=np.float64)
    except ValueError:
        raise DimMismatch("frames have differing dimensions") from None
    if arr.ndim != 2:
        raise DimMismatch(f"expected frames x dim, got shape {arr.shape}")
    finite = np.all(np.isfinite(arr), axis=1)
    if not finite.all():
        raise NonFiniteInput(int(np.argmin(finite)))
    return arr.mean(axis=0)


def cosine_similarity_matrix(embeddings):
    """Pairwise cosine similarities with an exact unit diagonal.

    The strict upper triangle is computed and mirrored, so the result is
    symmetric bit-for-bit.
    """
    s = _as_set(embeddings)
    if s.n < 2:
        raise TooFewVectors(f"need at least 2 vectors, got {s.n}")
    x = s.vectors.astype(np.float64)
    u = x / np.linalg.norm(x, axis=1, keepdims=True)
    gram = u @ u.T
    k = np.triu(gram, 1)
    k = k + k.T
    np.fill_diagonal(k, 1.0)
    return k


def _clamp(value, lo, hi, what):
    if value < lo - BOUNDS_TOL or value > hi + BOUNDS_TOL:
        raise NumericalBoundsViolation(f"{what} = {value!r} outside [{lo}, {hi}]")
    return min(max(value, lo), hi)


def mean_pairwise_dissimilarity(embeddings):
    """One minus the mean cosine similarity over distinct pairs."""
    k = cosine_similarity_matrix(embeddings)
    n = k.shape[0]
    upper = np.triu(k, 1).sum()
    value = 1.0 - upper * 2.0 / (n * (n - 1))
    return DiversityScore(Metric.MEAN_PAIRWISE_DISSIMILARITY, _clamp(value, 0.0, 2.0, "dissimilarity"), n)


def eigen_spectrum(k, n=None):
    """Eigenvalues of ``k / n`` sorted non-increasing and clamped into [0, 1]."""
    k = np.asarray(k, dtype=np.float64)
    if n is None:
        n = k.shape[0]
    w = symmetric_eigvalsh(k / n)
    if w.size and (w[-1] < -EIG_TOL or w[0] > 1.0 + EIG_TOL):
        raise NumericalBoundsViolation(
            f"spectrum [{w[-1]!r}, {w[0]!r}] outside [0, 1] beyond tolerance {EIG_TOL}"
        )
    return SimilaritySpectrum(np.clip(w, 0.0, 1.0), int(n))


def spectrum_entropy(eigenvalues):
    lam = np.asarray(eigenvalues, dtype=np.float64)
    lam = lam[lam >= ZERO_EIGENVALUE]
    return float(-np.sum(lam * np.log(lam)))


def vendi_score(embeddings):
    """Exponential of the Shannon entropy of the normalized similarity spectrum."""
    s = _as_set(embeddings)
    spectrum = eigen_spectrum(cosine_similarity_matrix(s), s.n)
    value = float(np.exp(spectrum_entropy(spectrum.eigenvalues)))
    return DiversityScore(Metric.VENDI, _clamp(value, 1.0, float(s.n), "vendi score"), s.n)


def score(embeddings, metric):
    metric = Metric.parse(metric)
    if metric is Metric.VENDI:
        return vendi_score(embeddings)
    return mean_pairwise_dissimilarity(embeddings)
