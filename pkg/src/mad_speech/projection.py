"""Facet projection heads: small GELU MLPs applied on top of base embeddings."""

import json
import math
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .errors import CorruptHeader, ChecksumMismatch, DimMismatch, VersionUnsupported
from .facets import Facet

HEAD_MAGIC = b"MADH"
HEAD_VERSION = 1
BASE_EMBEDDING_DIM = 192

DEFAULT_HIDDEN_DIMS = {
    Facet.VOICE: (256, 128),
    Facet.GENDER: (256, 256, 128, 128),
    Facet.EMOTION: (256, 128),
    Facet.ACCENT: (256, 128),
    Facet.NOISE: (256, 128),
}
DEFAULT_DROPOUT = 0.1

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def gelu(x):
    """``x * Phi(x)`` with the exact Gaussian CDF."""
    x = np.asarray(x, dtype=np.float64)
    out = x * 0.5 * (1.0 + erf(x / _SQRT2))
    return float(out) if out.ndim == 0 else out


def gelu_grad(x):
    x = np.asarray(x, dtype=np.float64)
    cdf = 0.5 * (1.0 + erf(x / _SQRT2))
    return cdf + x * _INV_SQRT_2PI * np.exp(-0.5 * x * x)


@dataclass
class Layer:
    weights: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray  # (out_dim,)

    @property
    def in_dim(self):
        return self.weights.shape[1]

    @property
    def out_dim(self):
        return self.weights.shape[0]


@dataclass
class ProjectionHead:
    facet: Facet
    layers: list
    dropout_rate: float = DEFAULT_DROPOUT
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        self.facet = Facet.parse(self.facet)
        self.layers = [
            Layer(np.asarray(w, dtype=np.float64), np.asarray(b, dtype=np.float64))
            for w, b in (_unpack(l) for l in self.layers)
        ]
        self.validate()

    @property
    def input_dim(self):
        return self.layers[0].in_dim

    @property
    def output_dim(self):
        return self.layers[-1].out_dim

    @property
    def dims(self):
        return (self.input_dim,) + tuple(l.out_dim for l in self.layers)

    def validate(self):
        if not self.layers:
            raise DimMismatch("a head needs at least one layer")
        if len(self.layers) > 255:
            raise DimMismatch("at most 255 layers are supported")
        prev = None
        for i, layer in enumerate(self.layers):
            w, b = layer.weights, layer.bias
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise DimMismatch(f"layer {i}: weights {w.shape} do not match bias {b.shape}")
            if prev is not None and w.shape[1] != prev:
                raise DimMismatch(f"layer {i} expects {w.shape[1]} inputs, previous layer gives {prev}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise DimMismatch(f"layer {i} has non-finite parameters")
            prev = w.shape[0]
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")

    @classmethod
    def initialize(cls, facet, input_dim=BASE_EMBEDDING_DIM, hidden_dims=None,
                   dropout_rate=DEFAULT_DROPOUT, seed=0):
        """Fresh head with Glorot-uniform weights and zero biases."""
        facet = Facet.parse(facet)
        dims = (input_dim,) + tuple(hidden_dims or DEFAULT_HIDDEN_DIMS[facet])
        rng = np.random.default_rng(seed)
        layers = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            layers.append(Layer(rng.uniform(-limit, limit, size=(fan_out, fan_in)), np.zeros(fan_out)))
        descriptor = {"init": "glorot_uniform", "init_seed": int(seed)}
        return cls(facet, layers, dropout_rate, descriptor)

    def copy(self):
        return ProjectionHead(
            self.facet,
            [Layer(l.weights.copy(), l.bias.copy()) for l in self.layers],
            self.dropout_rate,
            json.loads(json.dumps(self.descriptor)),
        )

    def __call__(self, x):
        return head_forward(self, x)


def _unpack(layer):
    if isinstance(layer, Layer):
        return layer.weights, layer.bias
    w, b = layer
    return w, b


def apply_dropout(x, rate, rng):
    """Inverted dropout: zero each coordinate with probability ``rate``, rescale survivors."""
    if rate == 0.0:
        return x
    keep = rng.random(x.shape) >= rate
    return np.where(keep, x / (1.0 - rate), 0.0)


def forward_layers(layers, x, cache=None):
    h = x
    last = len(layers) - 1
    for i, layer in enumerate(layers):
        z = h @ layer.weights.T + layer.bias
        if cache is not None:
            cache.append((h, z))
        h = gelu(z) if i < last else z
    return h


def backward_layers(layers, cache, grad_out):
    """Gradients ``[(dW, db), ...]`` of a batched forward pass given ``dLoss/dOutput``."""
    grads = [None] * len(layers)
    g = grad_out
    last = len(layers) - 1
    for i in range(last, -1, -1):
        h, z = cache[i]
        if i < last:
            g = g * gelu_grad(z)
        grads[i] = (g.T @ h, g.sum(axis=0))
        if i:
            g = g @ layers[i].weights
    return grads


def head_forward(head, x, training=False, rng=None):
    """Project one vector or a batch of row vectors through ``head``.

    Inference mode is deterministic. Training mode applies inverted dropout to
    the input only and needs a caller-owned ``numpy.random.Generator``.
    """
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != head.input_dim:
        raise DimMismatch(f"head expects input dim {head.input_dim}, got shape {np.shape(x)}")
    if training:
        if rng is None:
            raise ValueError("training mode needs a dropout generator")
        arr = apply_dropout(arr, head.dropout_rate, rng)
    out = forward_layers(head.layers, arr)
    return out[0] if single else out


# ---------------------------------------------------------------------------
# binary head file

def head_save(head):
    """Serialize ``head``; weights are stored as little-endian float32."""
    head.validate()
    parts = [HEAD_MAGIC, struct.pack("<IBB", HEAD_VERSION, head.facet.tag, len(head.layers))]
    for layer in head.layers:
        parts.append(struct.pack("<II", layer.in_dim, layer.out_dim))
        parts.append(np.ascontiguousarray(layer.weights, dtype="<f4").tobytes())
        parts.append(np.ascontiguousarray(layer.bias, dtype="<f4").tobytes())
    desc = dict(head.descriptor)
    desc["dropout_rate"] = head.dropout_rate
    desc["facet"] = head.facet.value
    desc["dims"] = list(head.dims)
    blob = json.dumps(desc, sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts.append(struct.pack("<I", len(blob)))
    parts.append(blob)
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def head_load(data):
    data = bytes(data)
    total = len(data)
    fixed = 4 + 4 + 1 + 1
    if total < fixed + 4:
        raise CorruptHeader(f"head file too short ({total} bytes)", offset=total)
    if data[:4] != HEAD_MAGIC:
        raise CorruptHeader("bad magic, not a head file", offset=0)
    version, facet_tag, n_layers = struct.unpack_from("<IBB", data, 4)
    if version != HEAD_VERSION:
        raise VersionUnsupported(f"head format version {version} (supported: {HEAD_VERSION})", offset=4)
    try:
        facet = Facet.from_tag(facet_tag)
    except ValueError:
        raise CorruptHeader(f"unknown facet tag {facet_tag}", offset=8) from None
    if n_layers == 0:
        raise CorruptHeader("head file declares zero layers", offset=9)

    pos = fixed
    raw_layers = []
    for i in range(n_layers):
        if pos + 8 > total - 4:
            raise CorruptHeader(f"truncated in layer {i} header", offset=pos)
        in_dim, out_dim = struct.unpack_from("<II", data, pos)
        pos += 8
        nbytes = 4 * out_dim * (in_dim + 1)
        if in_dim == 0 or out_dim == 0 or pos + nbytes > total - 4:
            raise CorruptHeader(f"layer {i} ({in_dim}x{out_dim}) does not fit in file", offset=pos - 8)
        raw_layers.append((in_dim, out_dim, pos))
        pos += nbytes

    blob = b""
    if total - pos != 4:
        if total - pos < 8:
            raise CorruptHeader("trailing bytes after layers", offset=pos)
        (blob_len,) = struct.unpack_from("<I", data, pos)
        if pos + 4 + blob_len + 4 != total:
            raise CorruptHeader("descriptor length does not match file size", offset=pos)
        blob = data[pos + 4:pos + 4 + blob_len]
        pos += 4 + blob_len

    (stored,) = struct.unpack_from("<I", data, pos)
    actual = zlib.crc32(data[:pos])
    if stored != actual:
        raise ChecksumMismatch(f"CRC32 {actual:08x} != stored {stored:08x}", offset=pos)

    layers = []
    for in_dim, out_dim, off in raw_layers:
        w = np.frombuffer(data, dtype="<f4", count=out_dim * in_dim, offset=off).reshape(out_dim, in_dim)
        b = np.frombuffer(data, dtype="<f4", count=out_dim, offset=off + 4 * out_dim * in_dim)
        layers.append(Layer(w.astype(np.float64), b.astype(np.float64)))

    descriptor = {}
    if blob:
        try:
            descriptor = json.loads(blob.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CorruptHeader(f"bad descriptor block: {exc}", offset=pos - len(blob)) from None
        if not isinstance(descriptor, dict):
            raise CorruptHeader("descriptor block is not a JSON object", offset=pos - len(blob))
    dropout = descriptor.pop("dropout_rate", DEFAULT_DROPOUT)
    descriptor.pop("facet", None)
    dims = descriptor.pop("dims", None)
    head = ProjectionHead(facet, layers, float(dropout), descriptor)
    if dims is not None and tuple(dims) != head.dims:
        raise CorruptHeader(f"descriptor dims {dims} disagree with layers {head.dims}")
    return head
