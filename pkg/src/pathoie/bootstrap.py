"""High-precision tuple extraction from annotated sentences.

Two bootstrapping routes produce the initial relation tuples:

* verb-mediated tuples read off semantic-role frames (predicate -> rel,
  A0 -> arg1, A1 -> arg2, AM-* -> argN, with preposition fillers replaced
  by their dependency child while the preposition lemma is retained), and
* noun-mediated tuples matched by declarative dependency patterns over
  subtrees (see ``data/noun_patterns.txt`` for the shipped inventory and
  the file format).

Corpus-level precision filtering keeps only the top-k sentences by parser
or role-labeler confidence.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from importlib import resources

from .corpus import AnnotatedSentence, DependencyTree, SrlFrame, build_tree

log = logging.getLogger(__name__)

DEFAULT_PREPOSITION = "of"

# POS tags never allowed to fill an unconstrained argument slot: closed-class
# function words.  Pronouns stay eligible (they are legitimate arguments).
ARG_EXCLUDED_POS = {"IN", "DT", "CC", "TO", "POS", "EX", "RP", "UH", "MD", "PDT", "WDT"}

NOUN_REL_POS = {"NN", "NNS"}


def is_verbal(pos: str) -> bool:
    return pos.startswith("VB")


def is_noun_rel(pos: str) -> bool:
    return pos in NOUN_REL_POS


@dataclass(frozen=True)
class ExtractionTuple:
    """A bootstrapped n-ary tuple anchored at token headwords."""

    sent_id: str
    rel_index: int
    rel_lemma: str
    rel_kind: str  # "verb" | "noun"
    arg1: int | None = None
    arg2: int | None = None
    arg2_prep: str | None = None
    argns: tuple = ()  # ((token index, preposition lemma or None), ...)
    pattern_id: int | None = None

    def __post_init__(self):
        if self.rel_kind not in ("verb", "noun"):
            raise ValueError("rel_kind must be 'verb' or 'noun'")
        if self.rel_kind == "noun" and self.argns:
            raise ValueError("noun tuples cannot carry argN slots")
        for prep in (self.arg2_prep, *(p for _, p in self.argns)):
            if prep is not None and prep != prep.lower():
                raise ValueError("preposition lemmas must be lowercase: %r" % prep)

    def to_json(self) -> dict:
        return {
            "sent_id": self.sent_id,
            "rel": {"index": self.rel_index, "lemma": self.rel_lemma, "kind": self.rel_kind},
            "arg1": self.arg1,
            "arg2": self.arg2,
            "arg2_prep": self.arg2_prep,
            "argns": [[i, p] for i, p in self.argns],
            "pattern_id": self.pattern_id,
        }

    @classmethod
    def from_json(cls, record: dict) -> "ExtractionTuple":
        return cls(
            sent_id=record["sent_id"],
            rel_index=record["rel"]["index"],
            rel_lemma=record["rel"]["lemma"],
            rel_kind=record["rel"]["kind"],
            arg1=record.get("arg1"),
            arg2=record.get("arg2"),
            arg2_prep=record.get("arg2_prep"),
            argns=tuple((i, p) for i, p in record.get("argns", [])),
            pattern_id=record.get("pattern_id"),
        )


def _resolve_role_word(tree: DependencyTree, index: int):
    """Apply the preposition rule to a role filler.

    Fillers tagged IN stand for their dependency child: the child becomes
    the argument headword and the preposition lemma is retained.  Returns
    ``(index, prep_or_None)`` or ``(None, None)`` when the role must be
    skipped.
    """
    tok = tree.token(index)
    if tok.is_punct:
        log.warning("role filler %d (%r) is punctuation; skipped", index, tok.form)
        return None, None
    if tok.pos != "IN":
        return index, None
    children = [c for c in tree.children(index) if not tree.token(c).is_punct]
    if not children:
        log.warning("preposition role filler %d (%r) has no child; skipped", index, tok.form)
        return None, None
    return children[0], tok.lemma.lower()


def srl_to_tuple(sentence: AnnotatedSentence, frame: SrlFrame, tree: DependencyTree | None = None):
    """Turn one semantic-role frame into a verb-mediated tuple."""
    if tree is None:
        tree = build_tree(sentence)
    arg1 = None
    arg2 = None
    arg2_prep = None
    argns = []
    for label, index in frame.roles:
        if index == frame.predicate:
            continue
        resolved, prep = _resolve_role_word(tree, index)
        if resolved is None:
            continue
        if label == "A0":
            if arg1 is None:
                arg1 = resolved
        elif label == "A1":
            if arg2 is None:
                arg2, arg2_prep = resolved, prep
        else:  # AM-*
            argns.append((resolved, prep))
    return ExtractionTuple(
        sent_id=sentence.sent_id,
        rel_index=frame.predicate,
        rel_lemma=sentence.token(frame.predicate).lemma,
        rel_kind="verb",
        arg1=arg1,
        arg2=arg2,
        arg2_prep=arg2_prep,
        argns=tuple(argns),
    )


# ---------------------------------------------------------------------------
# Noun patterns: declarative templates matched against tree subgraphs.


@dataclass(frozen=True)
class PatternNode:
    name: str
    pos: tuple = ()  # allowed POS tags; empty = unconstrained
    lemma: str | None = None
    arg: bool = False  # content-word slot: not punctuation, not function POS


@dataclass(frozen=True)
class NounPattern:
    """A rooted subtree template with role slots.

    ``edges`` are (parent, child) name pairs with an optional label
    constraint; ``orders`` require the left node to precede the right one
    in the sentence; ``slots`` maps arg1/rel/arg2/prep to node names.
    """

    pattern_id: int
    nodes: dict
    edges: tuple  # ((parent, child, label_or_None), ...)
    orders: tuple = ()
    slots: dict = field(default_factory=dict)

    def __post_init__(self):
        for slot in ("rel", "arg1", "arg2"):
            if slot not in self.slots:
                raise ValueError("pattern %d is missing slot %r" % (self.pattern_id, slot))
        children = [c for _, c, _ in self.edges]
        if len(set(children)) != len(children):
            raise ValueError("pattern %d: a node has two parents" % self.pattern_id)
        roots = [n for n in self.nodes if n not in children]
        if len(roots) != 1:
            raise ValueError("pattern %d must have exactly one root" % self.pattern_id)

    @property
    def root(self) -> str:
        children = {c for _, c, _ in self.edges}
        return next(n for n in self.nodes if n not in children)

    def children_of(self, name: str):
        return [(c, label) for p, c, label in self.edges if p == name]


def parse_patterns(text: str):
    """Parse the declarative pattern file format (see the shipped file)."""
    patterns = []
    stanza = []
    for raw in text.splitlines() + [""]:
        line = raw.split("#", 1)[0].strip()
        if not line:
            if stanza:
                patterns.append(_parse_stanza(stanza))
                stanza = []
            continue
        stanza.append(line)
    return patterns


def _parse_stanza(lines):
    pattern_id = None
    nodes = {}
    edges = []
    orders = []
    slots = {}
    for line in lines:
        parts = line.split()
        kind = parts[0]
        if kind == "pattern":
            pattern_id = int(parts[1])
        elif kind == "node":
            name = parts[1]
            pos = ()
            lemma = None
            arg = False
            for opt in parts[2:]:
                if opt == "arg":
                    arg = True
                elif opt.startswith("pos="):
                    pos = tuple(opt[4:].split("|"))
                elif opt.startswith("lemma="):
                    lemma = opt[6:]
                else:
                    raise ValueError("unknown node option %r" % opt)
            nodes[name] = PatternNode(name=name, pos=pos, lemma=lemma, arg=arg)
        elif kind == "edge":
            label = None
            for opt in parts[3:]:
                if opt.startswith("label="):
                    label = opt[6:]
                else:
                    raise ValueError("unknown edge option %r" % opt)
            edges.append((parts[1], parts[2], label))
        elif kind == "order":
            orders.append((parts[1], parts[2]))
        elif kind == "slots":
            for assignment in parts[1:]:
                slot, name = assignment.split("=", 1)
                slots[slot] = name
        else:
            raise ValueError("unknown pattern directive %r" % kind)
    if pattern_id is None:
        raise ValueError("pattern stanza without a 'pattern <id>' line")
    return NounPattern(
        pattern_id=pattern_id, nodes=nodes, edges=tuple(edges), orders=tuple(orders), slots=slots
    )


def load_patterns(path) -> list:
    with open(path, encoding="utf-8") as f:
        return parse_patterns(f.read())


def default_patterns() -> list:
    """The shipped ten-pattern inventory (reconstructed, replaceable)."""
    text = resources.files("pathoie").joinpath("data/noun_patterns.txt").read_text("utf-8")
    return parse_patterns(text)


def _node_matches(pnode: PatternNode, tree: DependencyTree, index: int) -> bool:
    tok = tree.token(index)
    if tok.is_punct:
        return False
    if pnode.pos and tok.pos not in pnode.pos:
        return False
    if pnode.lemma is not None and tok.lemma.lower() != pnode.lemma:
        return False
    if pnode.arg and tok.pos in ARG_EXCLUDED_POS:
        return False
    return True


def _descend(pattern, tree, pnode_name, tree_index, assignment, cont):
    """Match the pattern subtree below one assigned node, then continue.

    Pattern children map to distinct tree children of the assigned token;
    the whole assignment stays injective.
    """
    child_specs = pattern.children_of(pnode_name)
    tree_children = tree.children(tree_index)

    def assign(level):
        if level == len(child_specs):
            cont()
            return
        child_name, label = child_specs[level]
        for child_index in tree_children:
            if child_index in assignment.values():
                continue
            if label is not None and tree.token(child_index).deprel != label:
                continue
            if not _node_matches(pattern.nodes[child_name], tree, child_index):
                continue
            assignment[child_name] = child_index
            _descend(pattern, tree, child_name, child_index, assignment,
                     lambda lv=level: assign(lv + 1))
            del assignment[child_name]

    assign(0)


def _match_pattern(pattern: NounPattern, tree: DependencyTree):
    """All injective assignments of pattern nodes to tree tokens."""
    results = []
    root_name = pattern.root
    for index in range(1, len(tree) + 1):
        if not _node_matches(pattern.nodes[root_name], tree, index):
            continue
        assignment = {root_name: index}
        _descend(pattern, tree, root_name, index, assignment,
                 lambda: results.append(dict(assignment)))
    return [
        a for a in results
        if all(a[left] < a[right] for left, right in pattern.orders)
    ]


def match_noun_patterns(tree: DependencyTree, patterns=None) -> list:
    """All noun-mediated tuples matched by the pattern inventory.

    The output is order-independent: duplicate (rel, arg1, arg2, prep)
    matches collapse to the lowest pattern id, and results are sorted by
    token position.
    """
    if patterns is None:
        patterns = default_patterns()
    found = {}
    for pattern in patterns:
        for assignment in _match_pattern(pattern, tree):
            rel = assignment[pattern.slots["rel"]]
            arg1 = assignment[pattern.slots["arg1"]]
            arg2 = assignment[pattern.slots["arg2"]]
            if "prep" in pattern.slots:
                prep = tree.token(assignment[pattern.slots["prep"]]).lemma.lower()
            else:
                prep = DEFAULT_PREPOSITION
            key = (rel, arg1, arg2, prep)
            if key not in found or pattern.pattern_id < found[key]:
                found[key] = pattern.pattern_id
    return [
        ExtractionTuple(
            sent_id=tree.sentence.sent_id,
            rel_index=rel,
            rel_lemma=tree.token(rel).lemma,
            rel_kind="noun",
            arg1=arg1,
            arg2=arg2,
            arg2_prep=prep,
            pattern_id=pattern_id,
        )
        for (rel, arg1, arg2, prep), pattern_id in sorted(found.items())
    ]


def select_confident(sentences, key: str, k: int) -> list:
    """The k most confident sentences; ties keep corpus order."""
    if k < 0:
        raise ValueError("k must be >= 0")
    attr = {"dep": "dep_confidence", "srl": "srl_confidence"}.get(key, key)
    if attr not in ("dep_confidence", "srl_confidence"):
        raise ValueError("unknown confidence key %r" % key)
    return heapq.nlargest(k, sentences, key=lambda s: getattr(s, attr))
