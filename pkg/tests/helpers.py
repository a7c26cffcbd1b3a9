"""Shared construction helpers for the test suite."""

from pathlib import Path

import numpy as np

from pathoie.corpus import AnnotatedSentence, SrlFrame, Token, build_tree

DATA_DIR = Path(__file__).parent / "data"


def make_sentence(rows, sent_id="s", frames=(), dep_conf=1.0, srl_conf=1.0):
    """Build a validated sentence from (form, lemma, pos, head, deprel, ne)
    rows; lemma/ne may be omitted by passing 4- or 5-tuples."""
    tokens = []
    for index, row in enumerate(rows, start=1):
        if len(row) == 4:
            form, pos, head, deprel = row
            lemma, ne = form.lower(), "O"
        elif len(row) == 5:
            form, lemma, pos, head, deprel = row
            ne = "O"
        else:
            form, lemma, pos, head, deprel, ne = row
        tokens.append(
            Token(index=index, form=form, lemma=lemma, pos=pos, head=head, deprel=deprel, ne=ne)
        )
    sentence = AnnotatedSentence(
        tokens=tokens,
        frames=[SrlFrame(predicate=p, roles=tuple(r)) for p, r in frames],
        dep_confidence=dep_conf,
        srl_confidence=srl_conf,
        sent_id=sent_id,
    )
    sentence.validate()
    return sentence


def chain_sentence(n, sent_id="chain"):
    """Token i hangs off token i-1; token 1 is the root."""
    rows = [("w%d" % i, "NN", i - 1, "dep") for i in range(1, n + 1)]
    return make_sentence(rows, sent_id=sent_id)


def random_tree_sentence(rng, n, sent_id="rand"):
    """A uniformly random tree: each node attaches to a random predecessor."""
    rows = [("w1", "NN", 0, "root")]
    for i in range(2, n + 1):
        head = int(rng.integers(1, i))
        rows.append(("w%d" % i, "NN", head, "dep%d" % int(rng.integers(1, 4))))
    return make_sentence(rows, sent_id=sent_id)


def bfs_path(sentence, start, goal):
    """Independent breadth-first-search oracle over the undirected tree."""
    adjacency = {t.index: [] for t in sentence.tokens}
    for t in sentence.tokens:
        if t.head != 0:
            adjacency[t.index].append(t.head)
            adjacency[t.head].append(t.index)
    parent = {start: None}
    frontier = [start]
    while frontier:
        nxt = []
        for node in frontier:
            for neighbor in adjacency[node]:
                if neighbor not in parent:
                    parent[neighbor] = node
                    nxt.append(neighbor)
        frontier = nxt
    path = [goal]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return list(reversed(path))


def tree_of(sentence):
    return build_tree(sentence)


def make_rng(seed=0):
    return np.random.default_rng(seed)
