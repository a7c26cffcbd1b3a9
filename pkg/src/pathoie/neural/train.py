"""Mini-batch training loop and the model checkpoint container.

Checkpoints are written to a self-describing binary container (JSON
header plus raw little-endian float64 array payloads) rather than a zip
so that identical models serialize to identical bytes.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass

import numpy as np

from .embeddings import Vocabulary
from .network import Network, NetworkConfig
from .optim import AdamState, adam_step

log = logging.getLogger(__name__)

MAGIC = b"PATHOIE-CKPT-1\n"


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    dropout: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")


def train(network: Network, samples, labels, config: TrainConfig):
    """Shuffled mini-batch training; deterministic for a fixed seed.

    ``samples`` is a list of node sequences, ``labels`` the matching label
    strings.  Returns per-epoch ``(epoch, mean_loss, accuracy)`` history.
    """
    if not samples:
        raise ValueError("cannot train on an empty sample set")
    if len(samples) != len(labels):
        raise ValueError("samples and labels differ in length")
    encoded = [network.encode(nodes) for nodes in samples]
    lengths = [len(nodes) for nodes in samples]
    gold = [network.label_index[label] for label in labels]

    rng = np.random.default_rng(config.seed)
    state = AdamState()
    dim_in = network.config.dim_in
    history = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(encoded))
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            chosen = order[start : start + config.batch_size]
            batch = [(encoded[k], gold[k]) for k in chosen]
            masks = None
            if config.dropout > 0.0:
                masks = [
                    (rng.random((lengths[k], dim_in)) >= config.dropout) / (1.0 - config.dropout)
                    for k in chosen
                ]
            loss, grads = network.loss_and_grads(batch, dropout_masks=masks)
            adam_step(
                network.params,
                grads,
                state,
                learning_rate=config.learning_rate,
                beta1=config.beta1,
                beta2=config.beta2,
                eps=config.eps,
            )
            epoch_loss += loss * len(chosen)
        mean_loss = epoch_loss / len(encoded)
        correct = 0
        for enc, g in zip(encoded, gold):
            probs, _ = network.forward(enc)
            if int(np.argmax(probs)) == g:
                correct += 1
        accuracy = correct / len(encoded)
        history.append((epoch, mean_loss, accuracy))
        log.info("stage=train epoch=%d loss=%.6f accuracy=%.4f", epoch, mean_loss, accuracy)
    return history


# ---------------------------------------------------------------------------
# Checkpoint container


def save_checkpoint(path, network: Network, extra=None) -> None:
    """Write config, vocabularies and all parameter arrays to ``path``."""
    names = sorted(network.params)
    header = {
        "format": "pathoie-checkpoint",
        "version": 1,
        "config": network.config.to_json(),
        "vocabs": {name: vocab.tokens for name, vocab in sorted(network.vocabs.items())},
        "arrays": [
            {"name": name, "dtype": "float64", "shape": list(network.params[name].shape)}
            for name in names
        ],
        "extra": extra or {},
    }
    blob = json.dumps(header, sort_keys=True, ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack(">I", len(blob)))
        f.write(blob)
        for name in names:
            f.write(np.ascontiguousarray(network.params[name], dtype=np.float64).tobytes())


def load_checkpoint(path) -> Network:
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError("%s is not a checkpoint file" % path)
        (size,) = struct.unpack(">I", f.read(4))
        header = json.loads(f.read(size).decode("utf-8"))
        if header.get("version") != 1:
            raise ValueError("unsupported checkpoint version %r" % header.get("version"))
        config = NetworkConfig.from_json(header["config"])
        vocabs = {
            name: Vocabulary.from_list(tokens) for name, tokens in header["vocabs"].items()
        }
        params = {}
        for spec in header["arrays"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            data = f.read(count * 8)
            params[spec["name"]] = np.frombuffer(data, dtype=np.float64).reshape(shape).copy()
    network = Network(config, vocabs, params=params)
    network.extra = header.get("extra", {})
    return network


def checkpoint_extra(path) -> dict:
    """Read only the free-form metadata block of a checkpoint."""
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError("%s is not a checkpoint file" % path)
        (size,) = struct.unpack(">I", f.read(4))
        header = json.loads(f.read(size).decode("utf-8"))
    return header.get("extra", {})
