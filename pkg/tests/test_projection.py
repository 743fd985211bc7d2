import math
import struct
import zlib

import numpy as np
import pytest
from scipy.stats import norm

from mad_speech.errors import ChecksumMismatch, CorruptHeader, DimMismatch, VersionUnsupported
from mad_speech.facets import Facet
from mad_speech.projection import (
    DEFAULT_HIDDEN_DIMS,
    Layer,
    ProjectionHead,
    gelu,
    gelu_grad,
    head_forward,
    head_load,
    head_save,
)
from oracles import central_difference


def test_gelu_examples():
    assert gelu(0.0) == 0.0
    assert abs(gelu(10.0) - 10.0) < 1e-9
    assert gelu(1.0) == pytest.approx(1.0 * norm.cdf(1.0), abs=1e-12)
    assert gelu(1.0) == pytest.approx(0.841345, abs=1e-6)


def test_gelu_grad_matches_finite_differences():
    xs = np.linspace(-4, 4, 41)
    numeric = (gelu(xs + 1e-6) - gelu(xs - 1e-6)) / 2e-6
    assert np.allclose(gelu_grad(xs), numeric, atol=1e-8)


def test_default_architectures():
    for facet in Facet:
        head = ProjectionHead.initialize(facet)
        expected = (256, 256, 128, 128) if facet is Facet.GENDER else (256, 128)
        assert DEFAULT_HIDDEN_DIMS[facet] == expected
        assert head.dims == (192,) + expected
        assert head.dropout_rate == 0.1
        for layer in head.layers:
            limit = math.sqrt(6.0 / (layer.in_dim + layer.out_dim))
            assert np.all(np.abs(layer.weights) <= limit)
            assert np.all(layer.bias == 0.0)


def test_dims_must_chain():
    with pytest.raises(DimMismatch):
        ProjectionHead("voice", [(np.eye(3), np.zeros(3)), (np.eye(2), np.zeros(2))])
    with pytest.raises(DimMismatch):
        ProjectionHead("voice", [(np.eye(2), np.zeros(3))])
    with pytest.raises(DimMismatch):
        ProjectionHead("voice", [(np.array([[np.nan]]), np.zeros(1))])


def test_forward_examples():
    ident = ProjectionHead("voice", [(np.eye(2), np.zeros(2))])
    assert np.array_equal(head_forward(ident, [1.0, 2.0]), [1.0, 2.0])
    b = np.array([0.5, -1.5])
    zero = ProjectionHead("voice", [(np.zeros((2, 3)), b)])
    assert np.array_equal(head_forward(zero, [7.0, 8.0, 9.0]), b)
    with pytest.raises(DimMismatch):
        head_forward(ident, [1.0, 2.0, 3.0])


def test_two_layer_forward_matches_scalar_oracle():
    w1 = [[0.5, -1.0], [2.0, 0.25]]
    b1 = [0.1, -0.2]
    w2 = [[1.0, -0.5], [0.3, 0.7]]
    b2 = [0.0, 1.0]
    head = ProjectionHead("emotion", [(np.array(w1), np.array(b1)), (np.array(w2), np.array(b2))])
    x = [0.3, -1.2]

    def phi(t):
        return 0.5 * (1 + math.erf(t / math.sqrt(2)))

    hidden = [sum(w1[i][j] * x[j] for j in range(2)) + b1[i] for i in range(2)]
    hidden = [h * phi(h) for h in hidden]
    out = [sum(w2[i][j] * hidden[j] for j in range(2)) + b2[i] for i in range(2)]
    assert np.allclose(head_forward(head, x), out, atol=1e-14)


def test_inference_is_deterministic_and_batched_equals_single():
    head = ProjectionHead.initialize("gender", input_dim=8, seed=3)
    x = np.random.default_rng(0).normal(size=(5, 8))
    out = head_forward(head, x)
    assert np.array_equal(out, head_forward(head, x))
    for i in range(5):
        assert np.allclose(out[i], head_forward(head, x[i]), atol=1e-14)


def test_dropout_is_unbiased():
    rng = np.random.default_rng(0)
    w = rng.normal(size=(3, 6))
    b = rng.normal(size=3)
    head = ProjectionHead("voice", [(w, b)], dropout_rate=0.1)
    x = rng.normal(size=6) + 2.0
    expected = head_forward(head, x)
    batch = np.tile(x, (100_000, 1))
    mean = head_forward(head, batch, training=True, rng=np.random.default_rng(1)).mean(axis=0)
    assert np.linalg.norm(mean - expected) <= 0.02 * np.linalg.norm(expected)


def test_training_mode_needs_generator():
    head = ProjectionHead.initialize("voice", input_dim=4)
    with pytest.raises(ValueError):
        head_forward(head, np.ones(4), training=True)


def test_gradients_of_layer_stack():
    from mad_speech.projection import backward_layers, forward_layers

    rng = np.random.default_rng(5)
    head = ProjectionHead.initialize("gender", input_dim=5, hidden_dims=(4, 3, 2), seed=1)
    x = rng.normal(size=(3, 5))
    target = rng.normal(size=(3, 2))
    cache = []
    out = forward_layers(head.layers, x, cache)
    grads = backward_layers(head.layers, cache, out - target)

    for i, layer in enumerate(head.layers):
        def loss_w(w, i=i):
            layers = list(head.layers)
            layers[i] = Layer(w, layers[i].bias)
            return 0.5 * np.sum((forward_layers(layers, x) - target) ** 2)
        assert np.allclose(grads[i][0], central_difference(loss_w, layer.weights), atol=1e-8)


# --- head file

def test_round_trip_is_bit_exact_after_first_save():
    head = ProjectionHead.initialize("gender", seed=7)
    head.descriptor["note"] = "x"
    blob = head_save(head)
    loaded = head_load(blob)
    assert loaded.dims == (192, 256, 256, 128, 128)
    assert loaded.facet is Facet.GENDER
    assert loaded.dropout_rate == head.dropout_rate
    assert loaded.descriptor["note"] == "x"
    assert head_save(loaded) == blob
    for a, b in zip(head.layers, loaded.layers):
        assert np.array_equal(a.weights.astype(np.float32), b.weights)
        assert np.array_equal(a.bias.astype(np.float32), b.bias)


def test_head_file_layout():
    head = ProjectionHead("noise", [(np.array([[1.0, 2.0]]), np.array([3.0]))], dropout_rate=0.0)
    blob = head_save(head)
    assert blob[:4] == b"MADH"
    version, tag, count = struct.unpack_from("<IBB", blob, 4)
    assert (version, tag, count) == (1, 4, 1)
    assert struct.unpack_from("<II", blob, 10) == (2, 1)
    assert struct.unpack_from("<3f", blob, 18) == (1.0, 2.0, 3.0)
    assert struct.unpack("<I", blob[-4:])[0] == zlib.crc32(blob[:-4])


def test_head_file_corruption_detected():
    blob = head_save(ProjectionHead.initialize("voice", input_dim=4, hidden_dims=(3,)))
    with pytest.raises(CorruptHeader):
        head_load(blob[:7])
    for cut in range(0, len(blob), 3):
        with pytest.raises((CorruptHeader, ChecksumMismatch)):
            head_load(blob[:cut])
    flipped = bytearray(blob)
    flipped[20] ^= 0x01
    with pytest.raises(ChecksumMismatch):
        head_load(bytes(flipped))
    bad_version = bytearray(blob)
    bad_version[4] = 9
    with pytest.raises(VersionUnsupported):
        head_load(bytes(bad_version))
    with pytest.raises(CorruptHeader):
        head_load(b"XXXX" + blob[4:])
