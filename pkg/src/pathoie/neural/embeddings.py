"""Feature vocabularies and embedding tables.

Each path node contributes four categorical features: the lowercased
surface form, the POS tag, the incoming dependency edge (label plus
direction marker), and the named-entity tag.  Every vocabulary reserves
index 0 for the unknown token, so out-of-vocabulary lookups always hit a
valid column.
"""

from __future__ import annotations

import numpy as np

FEATURES = ("word", "pos", "dep", "ne")

INIT_SCALE = 0.05


class Vocabulary:
    """String-to-index mapping with a reserved unknown entry at index 0."""

    UNK = "<unk>"

    def __init__(self, tokens=()):
        self._tokens = [self.UNK]
        self._index = {self.UNK: 0}
        for token in tokens:
            self.add(token)

    def add(self, token: str) -> int:
        if token not in self._index:
            self._index[token] = len(self._tokens)
            self._tokens.append(token)
        return self._index[token]

    def id(self, token: str) -> int:
        return self._index.get(token, 0)

    def __contains__(self, token):
        return token in self._index

    def __len__(self):
        return len(self._tokens)

    @property
    def tokens(self) -> list:
        return list(self._tokens)

    @classmethod
    def from_list(cls, tokens) -> "Vocabulary":
        if not tokens or tokens[0] != cls.UNK:
            raise ValueError("serialized vocabulary must start with the unknown entry")
        vocab = cls()
        for token in tokens[1:]:
            vocab.add(token)
        return vocab


def node_features(node) -> tuple:
    """(word, pos, dep, ne) features of a path node or its dict form."""
    if isinstance(node, dict):
        return node["form"].lower(), node["pos"], node["dep"], node["ne"]
    return node.form.lower(), node.pos, node.edge, node.ne


def build_vocabularies(sample_nodes, features=FEATURES) -> dict:
    """Vocabularies over the nodes of all training samples.

    ``sample_nodes`` iterates over node sequences; first-appearance order
    keeps the result deterministic for a fixed corpus.
    """
    vocabs = {name: Vocabulary() for name in features}
    for nodes in sample_nodes:
        for node in nodes:
            values = dict(zip(FEATURES, node_features(node)))
            for name in features:
                vocabs[name].add(values[name])
    return vocabs


def load_word_vectors(path) -> tuple:
    """Parse a word-vector text file: header ``count dim``, then one token
    and ``dim`` floats per line.  Returns (dim, {token: vector})."""
    vectors = {}
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 2:
            raise ValueError("expected 'count dim' header, got %r" % " ".join(header))
        count, dim = int(header[0]), int(header[1])
        for line_no, line in enumerate(f, start=2):
            parts = line.rstrip("\n").split(" ")
            if len(parts) < dim + 1:
                raise ValueError("line %d: expected %d values" % (line_no, dim))
            token = parts[0]
            vectors[token] = np.array([float(v) for v in parts[1 : dim + 1]], dtype=np.float64)
    if len(vectors) != count:
        raise ValueError("header promised %d vectors, file has %d" % (count, len(vectors)))
    return dim, vectors


def init_embedding(vocab: Vocabulary, dim: int, rng, pretrained=None) -> np.ndarray:
    """A (dim, |vocab|) table, uniform in +-0.05, overlaid with any
    pretrained vectors for tokens that have one."""
    table = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(dim, len(vocab)))
    if pretrained:
        for column, token in enumerate(vocab.tokens):
            vector = pretrained.get(token)
            if vector is not None:
                if vector.shape != (dim,):
                    raise ValueError(
                        "pretrained vector for %r has dim %d, table wants %d"
                        % (token, vector.shape[0], dim)
                    )
                table[:, column] = vector
    return table


def embed_node(node, tables: dict, vocabs: dict, features=FEATURES) -> np.ndarray:
    """Concatenated input vector of one node; unknown features hit the
    reserved column 0."""
    values = dict(zip(FEATURES, node_features(node)))
    parts = [tables[name][:, vocabs[name].id(values[name])] for name in features]
    return np.concatenate(parts)
