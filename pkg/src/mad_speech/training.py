"""Contrastive training of projection heads on frozen base embeddings."""

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Hashable, List, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateBatch,
    InsufficientGroups,
    NoValidTriplets,
    ShapeMismatch,
    ZeroNormRow,
)
from .facets import Facet
from .projection import ProjectionHead, apply_dropout, backward_layers, forward_layers

log = logging.getLogger(__name__)


class LossKind(str, Enum):
    STANDARD_CONTRASTIVE = "contrastive"
    SEMI_HARD_TRIPLET = "triplet"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        v = str(value).lower().replace("-", "_")
        aliases = {
            "contrastive": cls.STANDARD_CONTRASTIVE,
            "standard_contrastive": cls.STANDARD_CONTRASTIVE,
            "standardcontrastive": cls.STANDARD_CONTRASTIVE,
            "infonce": cls.STANDARD_CONTRASTIVE,
            "triplet": cls.SEMI_HARD_TRIPLET,
            "semi_hard_triplet": cls.SEMI_HARD_TRIPLET,
            "semihardtriplet": cls.SEMI_HARD_TRIPLET,
        }
        if v not in aliases:
            raise ValueError(f"unknown loss {value!r}")
        return aliases[v]


WEIGHT_DECAY_BY_FACET = {
    Facet.VOICE: 1e-3,
    Facet.EMOTION: 1e-3,
    Facet.NOISE: 1e-3,
    Facet.GENDER: 1e-4,
    Facet.ACCENT: 1e-4,
}


@dataclass
class TrainingConfig:
    loss: LossKind = LossKind.STANDARD_CONTRASTIVE
    learning_rate: float = 1e-4
    batch_size: int = 128
    weight_decay: float = 1e-3
    steps: int = 1000
    contrastive_temperature: float = 0.07
    triplet_margin: float = 0.2
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    symmetric: bool = True  # two-direction InfoNCE
    triplet_fallback: str = "farthest"  # or "skip"
    eval_every: int = 0  # validation cadence in steps; 0 disables
    validation_batches: int = 4

    def __post_init__(self):
        self.loss = LossKind.parse(self.loss)
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2")
        if self.contrastive_temperature <= 0:
            raise ValueError("contrastive_temperature must be > 0")
        if self.triplet_margin <= 0:
            raise ValueError("triplet_margin must be > 0")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        if self.triplet_fallback not in ("farthest", "skip"):
            raise ValueError("triplet_fallback must be 'farthest' or 'skip'")

    @classmethod
    def for_facet(cls, facet, **overrides):
        overrides.setdefault("weight_decay", WEIGHT_DECAY_BY_FACET[Facet.parse(facet)])
        return cls(**overrides)

    @classmethod
    def from_mapping(cls, mapping, facet=None):
        known = {f.name for f in fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise ValueError(f"unknown training config keys: {sorted(unknown)}")
        if facet is not None:
            return cls.for_facet(facet, **mapping)
        return cls(**mapping)

    def to_dict(self):
        d = asdict(self)
        d["loss"] = self.loss.value
        return d


def load_training_config(path, facet=None):
    """Read a JSON or TOML file whose keys mirror :class:`TrainingConfig`."""
    path = Path(path)
    text = path.read_bytes()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # python < 3.11
            import tomli as tomllib
        mapping = tomllib.loads(text.decode("utf-8"))
    else:
        mapping = json.loads(text.decode("utf-8"))
    if not isinstance(mapping, dict):
        raise ValueError(f"{path}: config must be a key-value mapping")
    return TrainingConfig.from_mapping(mapping, facet=facet)


@dataclass(frozen=True)
class LabeledFeature:
    vector: np.ndarray
    group_id: Hashable

    def __post_init__(self):
        if self.group_id is None or self.group_id == "":
            raise ValueError("group_id must be non-empty")


# ---------------------------------------------------------------------------
# positive-pair sampling

class PairSampler:
    """Draws (anchor, positive) index pairs that share a group."""

    def __init__(self, group_ids: Sequence[Hashable]):
        members = {}
        for i, g in enumerate(group_ids):
            members.setdefault(g, []).append(i)
        self.groups = [np.array(m) for m in members.values() if len(m) >= 2]
        self.group_keys = [g for g, m in members.items() if len(m) >= 2]
        self.sizes = np.array([len(m) for m in self.groups], dtype=np.int64)
        self.offsets = np.concatenate([[0], np.cumsum(self.sizes)[:-1]]).astype(np.int64)
        self.members = np.concatenate(self.groups) if self.groups else np.zeros(0, dtype=np.int64)
        if len(self.groups) < 2:
            raise InsufficientGroups(
                f"need at least 2 groups with >= 2 members, found {len(self.groups)}"
            )

    def sample(self, batch_size, rng):
        n_groups = len(self.groups)
        replace = n_groups < batch_size
        chosen = rng.choice(n_groups, size=batch_size, replace=replace)
        sizes = self.sizes[chosen]
        # two distinct members per group: second index skips over the first
        i = rng.integers(0, sizes)
        j = rng.integers(0, sizes - 1)
        j = j + (j >= i)
        flat_a = self.offsets[chosen] + i
        flat_p = self.offsets[chosen] + j
        return [(int(a), int(p)) for a, p in zip(self.members[flat_a], self.members[flat_p])]


def sample_positive_batch(data, batch_size, rng):
    """``batch_size`` same-group pairs, one group per pair, groups drawn uniformly.

    Groups are drawn without replacement unless there are fewer eligible
    groups than ``batch_size``.
    """
    return PairSampler([d.group_id for d in data]).sample(batch_size, rng)


# ---------------------------------------------------------------------------
# losses

def _normalize_rows(x):
    x = np.asarray(x, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise ZeroNormRow(f"row {int(np.argmin(norms[:, 0]))} has zero norm")
    return x / norms, norms


def _normalize_backward(u, norms, grad_u):
    return (grad_u - u * np.sum(u * grad_u, axis=1, keepdims=True)) / norms


def _log_softmax(z, axis):
    z = z - z.max(axis=axis, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=axis, keepdims=True))


def standard_contrastive_loss(anchors, positives, temperature, symmetric=True):
    """In-batch InfoNCE on cosine logits.

    Returns ``(loss, (grad_anchors, grad_positives))``.
    """
    anchors = np.asarray(anchors, dtype=np.float64)
    positives = np.asarray(positives, dtype=np.float64)
    if anchors.ndim != 2 or anchors.shape != positives.shape:
        raise ShapeMismatch(f"anchors {anchors.shape} vs positives {positives.shape}")
    b = anchors.shape[0]
    if b < 2:
        raise DegenerateBatch(f"batch of {b} has no negatives")
    ua, na = _normalize_rows(anchors)
    up, np_ = _normalize_rows(positives)
    logits = ua @ up.T / temperature

    diag = np.arange(b)
    row_lsm = _log_softmax(logits, axis=1)
    row_loss = -row_lsm[diag, diag].mean()
    grad_logits = (np.exp(row_lsm) - np.eye(b)) / b
    if symmetric:
        col_lsm = _log_softmax(logits, axis=0)
        col_loss = -col_lsm[diag, diag].mean()
        loss = 0.5 * (row_loss + col_loss)
        grad_logits = 0.5 * (grad_logits + (np.exp(col_lsm) - np.eye(b)) / b)
    else:
        loss = row_loss

    grad_ua = grad_logits @ up / temperature
    grad_up = grad_logits.T @ ua / temperature
    return float(loss), (_normalize_backward(ua, na, grad_ua), _normalize_backward(up, np_, grad_up))


def select_semi_hard(dist, group_ids, fallback="farthest"):
    """Triplets ``(a, p, n)`` for every ordered same-group pair, as an int array of shape (k, 3).

    ``n`` is the closest negative strictly farther from ``a`` than ``p``;
    when none exists, the farthest negative (or the pair is dropped when
    ``fallback == "skip"``).
    """
    labels = np.asarray(group_ids)
    same = labels[:, None] == labels[None, :]
    out = []
    for a in range(len(labels)):
        neg = np.flatnonzero(~same[a])
        pos = np.flatnonzero(same[a])
        pos = pos[pos != a]
        if neg.size == 0 or pos.size == 0:
            continue
        order = np.argsort(dist[a, neg], kind="stable")
        neg_sorted = neg[order]
        d_sorted = dist[a, neg_sorted]
        # first negative strictly farther than each positive
        idx = np.searchsorted(d_sorted, dist[a, pos], side="right")
        found = idx < neg.size
        chosen = neg_sorted[np.minimum(idx, neg.size - 1)]
        if fallback == "farthest":
            farthest = neg_sorted[np.searchsorted(d_sorted, d_sorted[-1], side="left")]
            chosen = np.where(found, chosen, farthest)
        else:
            pos, chosen = pos[found], chosen[found]
        out.append(np.stack([np.full(pos.size, a), pos, chosen], axis=1))
    if not out:
        return np.zeros((0, 3), dtype=np.int64)
    return np.concatenate(out).astype(np.int64)


def semi_hard_triplet_loss(embeddings, group_ids, margin, fallback="farthest"):
    """Mean hinge ``max(0, d(a,p) - d(a,n) + margin)`` over semi-hard triplets.

    Distances are squared Euclidean between L2-normalized rows.
    Returns ``(loss, grad_embeddings)``.
    """
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != len(group_ids):
        raise ShapeMismatch(f"{x.shape} embeddings for {len(group_ids)} labels")
    u, norms = _normalize_rows(x)
    dist = 2.0 - 2.0 * (u @ u.T)
    triplets = select_semi_hard(dist, group_ids, fallback)
    if len(triplets) == 0:
        raise NoValidTriplets("batch has no (anchor, positive, negative) triplet")
    a, p, n = triplets[:, 0], triplets[:, 1], triplets[:, 2]
    hinge = dist[a, p] - dist[a, n] + margin
    active = hinge > 0
    loss = float(np.where(active, hinge, 0.0).mean())

    # dLoss/dDist, then dDist_ij/du_i = -2 u_j
    coef = np.zeros_like(dist)
    w = active / len(triplets)
    np.add.at(coef, (a, p), w)
    np.add.at(coef, (a, n), -w)
    grad_u = -2.0 * (coef + coef.T) @ u
    return loss, _normalize_backward(u, norms, grad_u)


# ---------------------------------------------------------------------------
# optimizer

@dataclass
class AdamState:
    step: int
    m: List[np.ndarray]
    v: List[np.ndarray]

    @classmethod
    def zeros_like(cls, params):
        return cls(0, [np.zeros_like(p, dtype=np.float64) for p in params],
                   [np.zeros_like(p, dtype=np.float64) for p in params])


def adam_step(params, grads, state, config, decay_mask=None):
    """One Adam update with bias correction and decoupled weight decay.

    ``decay_mask[i]`` says whether ``params[i]`` is decayed (biases are not).
    Returns ``(new_params, new_state)``; inputs are left untouched.
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ShapeMismatch("params, grads and optimizer state have different lengths")
    if decay_mask is None:
        decay_mask = [True] * len(params)
    lr = config.learning_rate
    b1, b2, eps = config.adam_beta1, config.adam_beta2, config.adam_epsilon
    t = state.step + 1
    bc1 = 1.0 - b1 ** t
    bc2 = 1.0 - b2 ** t
    new_params, new_m, new_v = [], [], []
    for p, g, m, v, decay in zip(params, grads, state.m, state.v, decay_mask):
        if np.shape(p) != np.shape(g) or np.shape(p) != np.shape(m):
            raise ShapeMismatch(f"param {np.shape(p)} vs grad {np.shape(g)}")
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * (g * g)
        p = np.asarray(p, dtype=np.float64)
        if decay and config.weight_decay:
            p = p * (1.0 - lr * config.weight_decay)
        p = p - lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
        new_params.append(p)
        new_m.append(m)
        new_v.append(v)
    return new_params, AdamState(t, new_m, new_v)


# ---------------------------------------------------------------------------
# training loop

@dataclass
class TrainingLog:
    train_loss: List[float] = field(default_factory=list)
    val_loss: dict = field(default_factory=dict)  # step -> loss
    best_step: Optional[int] = None

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "train_loss", "val_loss"])
        for step, loss in enumerate(self.train_loss, start=1):
            val = self.val_loss.get(step)
            w.writerow([step, f"{loss:.17g}", "" if val is None else f"{val:.17g}"])
        return buf.getvalue()


def _head_params(head):
    params, mask = [], []
    for layer in head.layers:
        params += [layer.weights, layer.bias]
        mask += [True, False]
    return params, mask


def _set_head_params(head, params):
    for i, layer in enumerate(head.layers):
        layer.weights, layer.bias = params[2 * i], params[2 * i + 1]


def _batch_loss_and_grads(head, x, labels, pairs, config, rng=None):
    a_idx = [a for a, _ in pairs]
    p_idx = [p for _, p in pairs]
    batch = np.concatenate([x[a_idx], x[p_idx]], axis=0)
    if rng is not None:
        batch = apply_dropout(batch, head.dropout_rate, rng)
    cache = []
    out = forward_layers(head.layers, batch, cache)
    b = len(pairs)
    if config.loss is LossKind.STANDARD_CONTRASTIVE:
        loss, (ga, gp) = standard_contrastive_loss(
            out[:b], out[b:], config.contrastive_temperature, config.symmetric
        )
        grad_out = np.concatenate([ga, gp], axis=0)
    else:
        ids = [labels[i] for i in a_idx] + [labels[i] for i in p_idx]
        loss, grad_out = semi_hard_triplet_loss(out, ids, config.triplet_margin, config.triplet_fallback)
    return loss, cache, grad_out


def train_head(features, head_template, config, validation=None):
    """Optimize a copy of ``head_template`` on ``features`` (a list of LabeledFeature).

    The base vectors are only read. When ``validation`` is given and
    ``config.eval_every > 0`` the weights with the lowest validation loss are
    returned instead of the final ones.
    """
    x = np.array([np.asarray(f.vector, dtype=np.float64) for f in features])
    labels = [f.group_id for f in features]
    sampler = PairSampler(labels)
    head = head_template.copy()
    if x.shape[1] != head.input_dim:
        raise ShapeMismatch(f"features have dim {x.shape[1]}, head expects {head.input_dim}")

    rng = np.random.default_rng(config.seed)
    params, mask = _head_params(head)
    state = AdamState.zeros_like(params)
    trace = TrainingLog()

    val_batches = None
    if validation is not None and config.eval_every > 0:
        xv = np.array([np.asarray(f.vector, dtype=np.float64) for f in validation])
        lv = [f.group_id for f in validation]
        vs = PairSampler(lv)
        vrng = np.random.default_rng([config.seed, 1])
        val_batches = (xv, lv, [vs.sample(config.batch_size, vrng) for _ in range(config.validation_batches)])
    best = (np.inf, None)

    for step in range(1, config.steps + 1):
        pairs = sampler.sample(config.batch_size, rng)
        loss, cache, grad_out = _batch_loss_and_grads(head, x, labels, pairs, config, rng)
        grads = [g for pair in backward_layers(head.layers, cache, grad_out) for g in pair]
        params, state = adam_step(params, grads, state, config, mask)
        _set_head_params(head, params)
        trace.train_loss.append(loss)

        if val_batches is not None and (step % config.eval_every == 0 or step == config.steps):
            xv, lv, batches = val_batches
            vloss = float(np.mean([
                _batch_loss_and_grads(head, xv, lv, pairs, config)[0] for pairs in batches
            ]))
            trace.val_loss[step] = vloss
            if vloss < best[0]:
                best = (vloss, [p.copy() for p in params])
                trace.best_step = step
            log.debug("step %d train %.5f val %.5f", step, loss, vloss)

    if best[1] is not None:
        _set_head_params(head, best[1])
    head.descriptor.update({
        "training": config.to_dict(),
        "steps_run": config.steps,
        "best_step": trace.best_step,
    })
    return head, trace
