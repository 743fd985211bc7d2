"""Acoustic diversity metrics for sets of speech embeddings.

Scores are built from (optional) facet projection heads followed by an
aggregation function: mean pairwise cosine dissimilarity or the Vendi score.
The benchmark and evaluation modules construct sets with known diversity
levels and measure rank agreement with a metric.
"""

__version__ = "0.1.0"

from .facets import Facet
from .metrics import (
    DiversityScore,
    EmbeddingSet,
    Metric,
    SimilaritySpectrum,
    cosine_similarity_matrix,
    eigen_spectrum,
    mean_pairwise_dissimilarity,
    pool_time_axis,
    score,
    vendi_score,
)
from .projection import ProjectionHead, gelu, head_forward, head_load, head_save
from .store import EmbeddingStore, store_read, store_write

__all__ = [
    "DiversityScore",
    "EmbeddingSet",
    "EmbeddingStore",
    "Facet",
    "Metric",
    "ProjectionHead",
    "SimilaritySpectrum",
    "cosine_similarity_matrix",
    "eigen_spectrum",
    "gelu",
    "head_forward",
    "head_load",
    "head_save",
    "mean_pairwise_dissimilarity",
    "pool_time_axis",
    "score",
    "store_read",
    "store_write",
    "vendi_score",
]
