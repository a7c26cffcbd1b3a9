"""Labeled training samples for the two classification tasks.

Positive samples label the rel-to-arg paths of bootstrapped tuples and
distant-supervision pairs with their argument slots (arg1 / arg2 / argN);
verb argN paths and noun arg2 paths additionally yield preposition-task
samples.  Negative samples come from feedback selection: a model trained
on positives alone scores every non-positive path, and paths it is
confident about (strictly above the threshold) are taken as null samples.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from . import dpath
from .bootstrap import is_verbal
from .corpus import DependencyTree
from .neural.network import NONE_PREPOSITION, NULL_LABEL

log = logging.getLogger(__name__)

# Verb-mediated candidate paths mirror the positive-path regime: at most
# this many nodes.
MAX_VERB_PATH_NODES = 6

CONTENT_POS_PREFIXES = ("NN", "VB", "JJ", "PRP", "WP")
CONTENT_POS_EXACT = {"CD"}


def is_content_pos(pos: str) -> bool:
    return pos.startswith(CONTENT_POS_PREFIXES) or pos in CONTENT_POS_EXACT


@dataclass(frozen=True)
class TrainingSample:
    sent_id: str
    path: dpath.DepPath
    label: str
    provenance: str  # bootstrap | augmented | negative

    def to_json(self) -> dict:
        return {
            "sent_id": self.sent_id,
            "rel": self.path.rel_index,
            "arg": self.path.arg_index,
            "nodes": [
                {
                    "index": n.index,
                    "form": n.form,
                    "lemma": n.lemma,
                    "pos": n.pos,
                    "ne": n.ne,
                    "dep": n.edge,
                }
                for n in self.path.nodes
            ],
            "label": self.label,
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, record: dict) -> "TrainingSample":
        nodes = tuple(
            dpath.PathNode(
                index=n.get("index", 0),
                form=n["form"],
                lemma=n["lemma"],
                pos=n["pos"],
                ne=n["ne"],
                edge=n["dep"],
            )
            for n in record["nodes"]
        )
        path = dpath.DepPath(nodes=nodes, rel_index=record["rel"], arg_index=record["arg"])
        return cls(
            sent_id=record["sent_id"],
            path=path,
            label=record["label"],
            provenance=record["provenance"],
        )


@dataclass(frozen=True)
class SamplerConfig:
    threshold: float = 0.9
    negative_ratio: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must be in (0, 1)")
        if self.negative_ratio <= 0:
            raise ValueError("negative_ratio must be positive")


def _make_sample(sent_id, tree, rel_index, arg_index, label, provenance):
    if rel_index == arg_index:
        log.warning("%s: rel and arg share token %d; sample skipped", sent_id, rel_index)
        return None
    try:
        path = dpath.shortest_path(tree, rel_index, arg_index)
    except ValueError as exc:
        log.warning("%s: %s; sample skipped", sent_id, exc)
        return None
    return TrainingSample(sent_id=sent_id, path=path, label=label, provenance=provenance)


def label_positives(tuples, pairs, trees: dict):
    """Positive samples for both tasks.

    ``tuples`` are bootstrapped :class:`ExtractionTuple` records,
    ``pairs`` augmentation :class:`AugmentedPair` records, ``trees`` maps
    sentence ids to dependency trees.  Returns
    ``(argument_samples, preposition_samples)``.
    """
    argument = []
    preposition = []

    def emit(sent_id, tree, rel, arg, label, provenance, prep=None, prep_task=False):
        sample = _make_sample(sent_id, tree, rel, arg, label, provenance)
        if sample is None:
            return
        argument.append(sample)
        if prep_task:
            preposition.append(
                TrainingSample(
                    sent_id=sent_id,
                    path=sample.path,
                    label=prep if prep is not None else NONE_PREPOSITION,
                    provenance=provenance,
                )
            )

    for tup in tuples:
        tree = trees.get(tup.sent_id)
        if tree is None:
            log.warning("no tree for sentence %s; tuple skipped", tup.sent_id)
            continue
        if tup.arg1 is not None:
            emit(tup.sent_id, tree, tup.rel_index, tup.arg1, "arg1", "bootstrap")
        if tup.arg2 is not None:
            emit(
                tup.sent_id,
                tree,
                tup.rel_index,
                tup.arg2,
                "arg2",
                "bootstrap",
                prep=tup.arg2_prep,
                prep_task=(tup.rel_kind == "noun"),
            )
        for index, prep in tup.argns:
            emit(
                tup.sent_id,
                tree,
                tup.rel_index,
                index,
                "argN",
                "bootstrap",
                prep=prep,
                prep_task=True,
            )

    for pair in pairs:
        tree = trees.get(pair.sent_id)
        if tree is None:
            log.warning("no tree for sentence %s; pair skipped", pair.sent_id)
            continue
        for slot, index in pair.arg_indices:
            prep_task = (slot == "argN") or (slot == "arg2" and pair.seed.rel_kind == "noun")
            emit(
                pair.sent_id,
                tree,
                pair.rel_index,
                index,
                slot,
                "augmented",
                prep=pair.seed.prep,
                prep_task=prep_task,
            )

    return argument, preposition


def enumerate_non_positive(sentence, tree: DependencyTree, positives) -> list:
    """The candidate pool for negative selection.

    Paths run from every non-punctuation token (as rel) to every content
    token (as arg); pairs already labeled positive are excluded, and paths
    whose rel is verbal are capped at the positive-path length limit.
    """
    positive_pairs = set()
    for item in positives:
        if isinstance(item, TrainingSample):
            positive_pairs.add((item.path.rel_index, item.path.arg_index))
        else:
            positive_pairs.add(tuple(item))
    if not positive_pairs:
        raise ValueError("pool enumeration needs at least one positive sample")

    pool = []
    for rel_tok in sentence.tokens:
        if rel_tok.is_punct:
            continue
        for arg_tok in sentence.tokens:
            if arg_tok.index == rel_tok.index or arg_tok.is_punct:
                continue
            if not is_content_pos(arg_tok.pos):
                continue
            if (rel_tok.index, arg_tok.index) in positive_pairs:
                continue
            path = dpath.shortest_path(tree, rel_tok.index, arg_tok.index)
            if is_verbal(rel_tok.pos) and dpath.path_length(path) > MAX_VERB_PATH_NODES:
                continue
            pool.append(path)
    return pool


def feedback_negative_sampling(model, pool, threshold: float, sent_ids=None) -> list:
    """Select the pool paths the positives-only model is confident about.

    A path joins the negative set exactly when its best class score is
    strictly above ``threshold``.  Output order follows the pool, so the
    result is deterministic for a fixed model and pool.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    selected = []
    for k, path in enumerate(pool):
        try:
            scores = model.predict_proba(path.nodes)
        except Exception as exc:
            raise ValueError("model cannot score pool path %d: %s" % (k, exc)) from exc
        if float(np.max(scores)) > threshold:
            sent_id = sent_ids[k] if sent_ids is not None else ""
            selected.append(
                TrainingSample(sent_id=sent_id, path=path, label=NULL_LABEL, provenance="negative")
            )
    return selected


def cap_negatives(model, negatives, max_count: int) -> list:
    """Keep the ``max_count`` highest-scoring negatives (stable on ties)."""
    if max_count < 0:
        raise ValueError("max_count must be >= 0")
    if len(negatives) <= max_count:
        return list(negatives)
    scored = [
        (-float(np.max(model.predict_proba(sample.path.nodes))), k)
        for k, sample in enumerate(negatives)
    ]
    scored.sort()
    keep = sorted(k for _, k in scored[:max_count])
    return [negatives[k] for k in keep]


def write_samples(samples, out) -> None:
    for sample in samples:
        out.write(json.dumps(sample.to_json(), ensure_ascii=False) + "\n")


def read_samples(path) -> list:
    samples = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                samples.append(TrainingSample.from_json(json.loads(line)))
    return samples
