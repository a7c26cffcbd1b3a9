"""The path classifier network.

Input nodes are embedded and concatenated, run through forward- and
backward-reading peephole LSTM layers whose outputs are summed per step,
max-pooled over time into a fixed-size path vector, and classified.  The
argument-detection head inserts a tanh layer before the softmax; the
preposition head connects the pooled vector straight to the softmax.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .embeddings import FEATURES, INIT_SCALE, Vocabulary, init_embedding, node_features
from .lstm import init_direction_params, lstm_backward_direction, lstm_forward_direction

ARGUMENT_LABELS = ("arg1", "arg2", "argN", "null")
POSITIVE_LABELS = ("arg1", "arg2", "argN")
NULL_LABEL = "null"
NONE_PREPOSITION = "NONE"

DEFAULT_DIMS = {"word": 300, "pos": 50, "dep": 50, "ne": 50}


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax along the last axis."""
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def cross_entropy(probs_or_logits: np.ndarray, gold: int, logits: bool = False) -> float:
    """Negative log-probability of the gold class.

    With ``logits=True`` the value is computed in log-space
    (log-sum-exp), which stays finite for extreme inputs.
    """
    if logits:
        z = probs_or_logits
        zmax = z.max()
        return float(zmax + np.log(np.sum(np.exp(z - zmax))) - z[gold])
    return float(-np.log(probs_or_logits[gold]))


def bi_sum(h_fw: np.ndarray, h_bw: np.ndarray) -> np.ndarray:
    """Per-step sum of the two directional outputs."""
    if h_fw.shape != h_bw.shape:
        raise ValueError("directional outputs differ in shape: %s vs %s" % (h_fw.shape, h_bw.shape))
    return h_fw + h_bw


def max_over_time(hs: np.ndarray) -> np.ndarray:
    """Elementwise maximum over the time axis of (T, dim_l)."""
    if hs.shape[0] < 1:
        raise ValueError("max-over-time needs at least one step")
    return hs.max(axis=0)


def apply_dropout(x: np.ndarray, rate: float, training: bool, rng) -> np.ndarray:
    """Inverted dropout: zero coordinates with probability ``rate`` and
    scale survivors by 1/(1-rate); the identity outside training."""
    if not 0.0 <= rate < 1.0:
        raise ValueError("dropout rate must be in [0, 1)")
    if not training or rate == 0.0:
        return x
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * mask


@dataclass(frozen=True)
class NetworkConfig:
    task: str  # "argument" | "preposition"
    labels: tuple
    features: tuple = FEATURES
    dims: dict = field(default_factory=lambda: dict(DEFAULT_DIMS))
    dim_l: int = 450
    dim_h: int = 50
    freeze_word: bool = False

    def __post_init__(self):
        if self.task not in ("argument", "preposition"):
            raise ValueError("task must be 'argument' or 'preposition'")
        unknown = set(self.features) - set(FEATURES)
        if unknown:
            raise ValueError("unknown features: %s" % sorted(unknown))
        if not self.labels:
            raise ValueError("label set must not be empty")

    @property
    def dim_in(self) -> int:
        return sum(self.dims[name] for name in self.features)

    @property
    def has_higher(self) -> bool:
        return self.task == "argument"

    @property
    def n_classes(self) -> int:
        return len(self.labels)

    def to_json(self) -> dict:
        d = asdict(self)
        d["labels"] = list(self.labels)
        d["features"] = list(self.features)
        return d

    @classmethod
    def from_json(cls, d) -> "NetworkConfig":
        return cls(
            task=d["task"],
            labels=tuple(d["labels"]),
            features=tuple(d["features"]),
            dims=dict(d["dims"]),
            dim_l=d["dim_l"],
            dim_h=d["dim_h"],
            freeze_word=d.get("freeze_word", False),
        )


def head_forward(h_path: np.ndarray, params: dict, task: str) -> np.ndarray:
    """Class probabilities from a pooled path vector."""
    if task == "argument":
        hidden = np.tanh(params["head.M_higher"] @ h_path)
        return softmax(params["head.M_out"] @ hidden)
    if task == "preposition":
        return softmax(params["head.M_out"] @ h_path)
    raise ValueError("unknown task %r" % task)


class Network:
    """Parameters, vocabularies and exact gradients for one task head."""

    def __init__(self, config: NetworkConfig, vocabs: dict, params: dict | None = None, rng=None):
        self.config = config
        self.vocabs = vocabs
        self.label_index = {label: k for k, label in enumerate(config.labels)}
        if params is None:
            if rng is None:
                rng = np.random.default_rng(0)
            params = self._init_params(rng)
        self.params = params

    def _init_params(self, rng, pretrained_words=None) -> dict:
        cfg = self.config
        params = {}
        for name in cfg.features:
            pretrained = pretrained_words if name == "word" else None
            params["emb." + name] = init_embedding(
                self.vocabs[name], cfg.dims[name], rng, pretrained
            )
        params.update(init_direction_params("fw", cfg.dim_l, cfg.dim_in, rng))
        params.update(init_direction_params("bw", cfg.dim_l, cfg.dim_in, rng))
        if cfg.has_higher:
            params["head.M_higher"] = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(cfg.dim_h, cfg.dim_l))
            params["head.M_out"] = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(cfg.n_classes, cfg.dim_h))
        else:
            params["head.M_out"] = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(cfg.n_classes, cfg.dim_l))
        return params

    @classmethod
    def create(cls, config, vocabs, rng, pretrained_words=None) -> "Network":
        net = cls(config, vocabs, params={}, rng=None)
        net.params = net._init_params(rng, pretrained_words)
        return net

    # -- encoding ----------------------------------------------------------

    def encode(self, nodes) -> dict:
        """Feature index arrays (one per active feature) for a node list."""
        cfg = self.config
        ids = {name: np.empty(len(nodes), dtype=np.intp) for name in cfg.features}
        for t, node in enumerate(nodes):
            values = dict(zip(FEATURES, node_features(node)))
            for name in cfg.features:
                ids[name][t] = self.vocabs[name].id(values[name])
        return ids

    def _inputs(self, encoded) -> np.ndarray:
        parts = [self.params["emb." + name][:, encoded[name]].T for name in self.config.features]
        return np.concatenate(parts, axis=1)  # (T, dim_in)

    # -- forward -----------------------------------------------------------

    def forward(self, encoded, dropout_mask=None):
        """Probabilities plus the cache needed for backprop."""
        cfg = self.config
        xs = self._inputs(encoded)
        if dropout_mask is not None:
            xs = xs * dropout_mask
        hs_fw, cache_fw = lstm_forward_direction(self.params, "fw", xs)
        hs_bw_rev, cache_bw = lstm_forward_direction(self.params, "bw", xs[::-1])
        hs = bi_sum(hs_fw, hs_bw_rev[::-1])
        h_path = hs.max(axis=0)
        winner = hs.argmax(axis=0)
        if cfg.has_higher:
            hidden = np.tanh(self.params["head.M_higher"] @ h_path)
            logits = self.params["head.M_out"] @ hidden
        else:
            hidden = None
            logits = self.params["head.M_out"] @ h_path
        probs = softmax(logits)
        cache = {
            "encoded": encoded,
            "mask": dropout_mask,
            "fw": cache_fw,
            "bw": cache_bw,
            "h_path": h_path,
            "winner": winner,
            "hidden": hidden,
            "logits": logits,
            "probs": probs,
            "T": xs.shape[0],
        }
        return probs, cache

    def predict_proba(self, nodes) -> np.ndarray:
        probs, _ = self.forward(self.encode(nodes))
        return probs

    def predict(self, nodes):
        """(label, probability) of the argmax class."""
        probs = self.predict_proba(nodes)
        k = int(np.argmax(probs))
        return self.config.labels[k], float(probs[k])

    # -- gradients ---------------------------------------------------------

    def _backward(self, cache, gold: int, grads: dict, scale: float) -> None:
        cfg = self.config
        probs = cache["probs"]
        dlogits = probs.copy()
        dlogits[gold] -= 1.0
        dlogits *= scale

        if cfg.has_higher:
            hidden = cache["hidden"]
            grads["head.M_out"] += np.outer(dlogits, hidden)
            dhidden = self.params["head.M_out"].T @ dlogits
            dz = (1.0 - hidden * hidden) * dhidden
            grads["head.M_higher"] += np.outer(dz, cache["h_path"])
            dh_path = self.params["head.M_higher"].T @ dz
        else:
            grads["head.M_out"] += np.outer(dlogits, cache["h_path"])
            dh_path = self.params["head.M_out"].T @ dlogits

        # Max pooling routes each coordinate's gradient to its winning step.
        T = cache["T"]
        dhs = np.zeros((T, cfg.dim_l))
        dhs[cache["winner"], np.arange(cfg.dim_l)] = dh_path

        dx_fw = lstm_backward_direction(self.params, cache["fw"], dhs, grads)
        dx_bw_rev = lstm_backward_direction(self.params, cache["bw"], dhs[::-1], grads)
        dxs = dx_fw + dx_bw_rev[::-1]
        if cache["mask"] is not None:
            dxs = dxs * cache["mask"]

        offset = 0
        for name in cfg.features:
            dim = cfg.dims[name]
            if not (name == "word" and cfg.freeze_word):
                key = "emb." + name
                if key not in grads:
                    grads[key] = np.zeros_like(self.params[key])
                segment = dxs[:, offset : offset + dim]  # (T, dim)
                np.add.at(grads[key].T, cache["encoded"][name], segment)
            offset += dim

    def loss_and_grads(self, batch, dropout_masks=None):
        """Mean cross-entropy and its exact gradients over a batch.

        ``batch`` is a list of (encoded, gold_index); ``dropout_masks``
        optionally supplies one fixed (T, dim_in) mask per sample.
        """
        if not batch:
            raise ValueError("empty batch")
        grads = {"head.M_out": np.zeros_like(self.params["head.M_out"])}
        if self.config.has_higher:
            grads["head.M_higher"] = np.zeros_like(self.params["head.M_higher"])
        total = 0.0
        scale = 1.0 / len(batch)
        for k, (encoded, gold) in enumerate(batch):
            mask = dropout_masks[k] if dropout_masks is not None else None
            _, cache = self.forward(encoded, dropout_mask=mask)
            total += cross_entropy(cache["logits"], gold, logits=True)
            self._backward(cache, gold, grads, scale)
        return total * scale, grads
