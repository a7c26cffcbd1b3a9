"""Learning core: embeddings, bi-directional peephole LSTM, task heads,
exact gradients, ADAM and dropout, written directly on numpy."""

from .embeddings import (
    FEATURES,
    Vocabulary,
    build_vocabularies,
    embed_node,
    load_word_vectors,
    node_features,
)
from .lstm import lstm_backward_direction, lstm_forward_direction
from .network import (
    ARGUMENT_LABELS,
    Network,
    NetworkConfig,
    apply_dropout,
    bi_sum,
    cross_entropy,
    head_forward,
    max_over_time,
    softmax,
)
from .optim import AdamState, adam_step
from .train import TrainConfig, load_checkpoint, save_checkpoint, train

__all__ = [
    "FEATURES",
    "Vocabulary",
    "build_vocabularies",
    "embed_node",
    "load_word_vectors",
    "node_features",
    "lstm_forward_direction",
    "lstm_backward_direction",
    "ARGUMENT_LABELS",
    "Network",
    "NetworkConfig",
    "apply_dropout",
    "bi_sum",
    "cross_entropy",
    "head_forward",
    "max_over_time",
    "softmax",
    "AdamState",
    "adam_step",
    "TrainConfig",
    "train",
    "save_checkpoint",
    "load_checkpoint",
]
