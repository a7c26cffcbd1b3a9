"""Open information extraction over shortest dependency paths.

The pipeline bootstraps relation tuples from role-labeled and
pattern-matched sentences, augments them by distant supervision against a
linked corpus, selects hard negative paths with a feedback model, trains
bi-directional peephole-LSTM classifiers for argument detection and
preposition classification, and extracts scored binary triples.
"""

__version__ = "0.1.0"

from . import augment, bootstrap, corpus, dpath, extractor, neural, sampler  # noqa: F401
