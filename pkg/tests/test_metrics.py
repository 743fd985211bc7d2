import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mad_speech.errors import (
    DimMismatch,
    EmptySequence,
    NonFiniteInput,
    NumericalBoundsViolation,
    TooFewVectors,
    ZeroNormVector,
)
from mad_speech.metrics import (
    EmbeddingSet,
    Metric,
    cosine_similarity_matrix,
    eigen_spectrum,
    mean_pairwise_dissimilarity,
    pool_time_axis,
    score,
    spectrum_entropy,
    vendi_score,
)


def brute_mean_dissimilarity(x):
    # ordered-pair sum, written independently of the upper-triangle route
    x = np.asarray(x, dtype=float)
    n = len(x)
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                total += x[i] @ x[j] / (math.sqrt(x[i] @ x[i]) * math.sqrt(x[j] @ x[j]))
    return 1.0 - total / (n * (n - 1))


# --- pool_time_axis

def test_pool_time_axis_examples():
    assert np.allclose(pool_time_axis([(1, 0), (0, 1)]), (0.5, 0.5))
    assert np.array_equal(pool_time_axis([(2, 2)]), (2, 2))
    frames = [(1, 2, 3), (3, 2, 1), (2, 2, 2)]
    oracle = [sum(f[k] for f in frames) / 3 for k in range(3)]
    assert np.allclose(pool_time_axis(frames), oracle)
    assert np.allclose(oracle, (2, 2, 2))


def test_pool_time_axis_errors():
    with pytest.raises(EmptySequence):
        pool_time_axis([])
    with pytest.raises(DimMismatch):
        pool_time_axis([(1, 2), (1, 2, 3)])
    with pytest.raises(NonFiniteInput):
        pool_time_axis([(1, 2), (np.nan, 2)])


# --- embedding set validation

def test_embedding_set_rejects_bad_rows():
    with pytest.raises(ZeroNormVector) as info:
        EmbeddingSet([[1, 0], [0, 0]])
    assert info.value.index == 1
    with pytest.raises(NonFiniteInput) as info:
        EmbeddingSet([[1, 0], [np.inf, 0]])
    assert info.value.index == 1
    with pytest.raises(DimMismatch):
        EmbeddingSet([1.0, 2.0])
    with pytest.raises(TooFewVectors):
        cosine_similarity_matrix([[1.0, 0.0]])


# --- cosine matrix

def test_cosine_matrix_examples():
    assert np.array_equal(cosine_similarity_matrix([[1, 0], [0, 1]]), np.eye(2))
    assert np.allclose(cosine_similarity_matrix([[1, 0], [2, 0]]), np.ones((2, 2)))
    r = 1 / math.sqrt(2)
    assert np.allclose(cosine_similarity_matrix([[1, 0], [1, 1]]), [[1, r], [r, 1]])


def test_cosine_matrix_exact_symmetry_and_diagonal():
    x = np.random.default_rng(0).normal(size=(17, 9))
    k = cosine_similarity_matrix(x)
    assert np.array_equal(k, k.T)
    assert np.all(np.diag(k) == 1.0)


# --- mean pairwise dissimilarity

def test_mean_dissimilarity_examples():
    v = [0.3, 0.4]
    assert mean_pairwise_dissimilarity([v, v]).value == pytest.approx(0.0, abs=1e-15)
    assert mean_pairwise_dissimilarity([[1, 0], [0, 1]]).value == pytest.approx(1.0, abs=1e-15)
    assert mean_pairwise_dissimilarity([[1, 0], [-1, 0]]).value == pytest.approx(2.0, abs=1e-15)
    r = 1 / math.sqrt(2)
    x = [[1, 0], [0, 1], [r, r]]
    expected = 1 - (0 + r + r) / 3
    got = mean_pairwise_dissimilarity(x)
    assert got.value == pytest.approx(expected, abs=1e-12)
    assert got.value == pytest.approx(0.5286, abs=1e-4)
    assert got.metric is Metric.MEAN_PAIRWISE_DISSIMILARITY and got.n == 3


def test_mean_dissimilarity_matches_ordered_pair_oracle():
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = rng.normal(size=(rng.integers(2, 15), rng.integers(1, 8)))
        assert mean_pairwise_dissimilarity(x).value == pytest.approx(brute_mean_dissimilarity(x), abs=1e-12)


# --- spectrum and vendi

def test_eigen_spectrum_examples():
    assert np.allclose(eigen_spectrum(np.eye(2)).eigenvalues, [0.5, 0.5])
    assert np.allclose(eigen_spectrum(np.ones((3, 3))).eigenvalues, [1, 0, 0], atol=1e-15)
    assert np.allclose(eigen_spectrum([[1, 0.5], [0.5, 1]]).eigenvalues, [0.75, 0.25])


def test_eigen_spectrum_rejects_indefinite():
    with pytest.raises(NumericalBoundsViolation):
        eigen_spectrum([[1.0, 2.0], [2.0, 1.0]])


def test_vendi_examples():
    v = [1.0, 2.0, 3.0]
    assert vendi_score([v] * 4).value == pytest.approx(1.0, abs=1e-12)
    assert vendi_score(np.eye(4)).value == pytest.approx(4.0, abs=1e-12)
    # two unit vectors at cosine 0.5
    x = [[1.0, 0.0], [0.5, math.sqrt(3) / 2]]
    expected = math.exp(-(0.75 * math.log(0.75) + 0.25 * math.log(0.25)))
    assert vendi_score(x).value == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(1.7548, abs=1e-4)


def test_spectrum_entropy_ignores_tiny_and_negative_zero():
    assert spectrum_entropy([1.0, 0.0, 1e-13]) == 0.0
    assert spectrum_entropy([0.5, 0.5]) == pytest.approx(math.log(2))


def test_score_dispatch():
    x = np.eye(3)
    assert score(x, "vendi").value == pytest.approx(3.0)
    assert score(x, "cosine").value == pytest.approx(1.0)
    assert score(x, Metric.VENDI).to_dict() == {"metric": "vendi", "value": score(x, "vendi").value, "n": 3}
    with pytest.raises(ValueError):
        score(x, "euclid")


# --- properties

vector_sets = st.integers(2, 12).flatmap(
    lambda n: st.integers(1, 6).flatmap(
        lambda d: arrays(np.float64, (n, d), elements=st.floats(-10, 10, allow_nan=False, allow_infinity=False))
    )
).filter(lambda a: np.all(np.linalg.norm(a, axis=1) > 1e-3))


@settings(max_examples=80, deadline=None)
@given(vector_sets, st.floats(0.01, 100.0), st.randoms(use_true_random=False))
def test_scale_and_permutation_invariance(x, c, rnd):
    perm = list(range(len(x)))
    rnd.shuffle(perm)
    scales = np.array([c if i % 2 else 1.0 for i in range(len(x))])[:, None]
    for metric in Metric:
        base = score(x, metric).value
        assert score(x * scales, metric).value == pytest.approx(base, abs=1e-12)
        assert score(x[perm], metric).value == pytest.approx(base, abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(vector_sets)
def test_metric_bounds_and_trace(x):
    n = len(x)
    vs = vendi_score(x).value
    assert 1.0 <= vs <= n
    d = mean_pairwise_dissimilarity(x).value
    assert 0.0 <= d <= 2.0
    spec = eigen_spectrum(cosine_similarity_matrix(x), n)
    assert abs(spec.eigenvalues.sum() - 1.0) <= 1e-9
    assert np.all(np.diff(spec.eigenvalues) <= 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 24), st.integers(0, 2**32 - 1))
def test_orthonormal_sets_reach_upper_bound(n, seed):
    q, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(n + 3, n)))
    assert vendi_score(q.T).value == pytest.approx(n, abs=1e-9)
