"""Triple extraction from trained models.

For every candidate relation token (verbal, or NN/NNS for noun-mediated
relations) the argument model classifies the dependency path to every
candidate argument token.  Non-null detections are aligned into the
extraction templates:

    verb:  <arg1; rel; arg2>
           <arg2; be rel [prep]; argN>
           <arg1; rel arg2 [prep]; argN>
    noun:  <arg1; be rel [prep]; arg2>

Aligned headwords are spanned to their dependency subtrees to render the
phrases, and each triple is scored with the sentence's parse confidence
times the mean argument probability.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from . import dpath
from .bootstrap import is_noun_rel, is_verbal
from .corpus import AnnotatedSentence, DependencyTree
from .sampler import MAX_VERB_PATH_NODES, NONE_PREPOSITION, NULL_LABEL, is_content_pos

log = logging.getLogger(__name__)

# Dependents a verb-mediated relation keeps in its phrase: particles,
# modals, and negation.  Everything else belongs to the arguments.
VERB_PHRASE_POS = {"RP", "MD"}
NEGATION_LEMMAS = {"not", "n't"}

SLOT_PRIORITY = ("rel", "arg1", "arg2", "argN")


@dataclass(frozen=True)
class ArgDetection:
    index: int
    label: str  # arg1 | arg2 | argN
    prob: float
    path: dpath.DepPath


@dataclass(frozen=True)
class DetectionResult:
    sent_id: str
    rel_index: int
    rel_kind: str  # verb | noun
    args: tuple = ()
    preps: dict = field(default_factory=dict)  # arg index -> (lemma or None, prob)

    def by_label(self, label: str) -> list:
        return [a for a in self.args if a.label == label]


@dataclass(frozen=True)
class Triple:
    sent_id: str
    arg1: str
    rel: str
    arg2: str
    template: int
    score: float
    passive_be: bool = False
    noun_be: bool = False
    slots: dict = field(default_factory=dict)  # slot -> claimed token indices

    def to_json(self) -> dict:
        return {
            "sent_id": self.sent_id,
            "arg1": self.arg1,
            "rel": self.rel,
            "arg2": self.arg2,
            "score": self.score,
            "template": self.template,
            "flags": {"passive_be": self.passive_be, "noun_be": self.noun_be},
        }

    @classmethod
    def from_json(cls, record: dict) -> "Triple":
        flags = record.get("flags", {})
        return cls(
            sent_id=record["sent_id"],
            arg1=record["arg1"],
            rel=record["rel"],
            arg2=record["arg2"],
            template=record["template"],
            score=record["score"],
            passive_be=flags.get("passive_be", False),
            noun_be=flags.get("noun_be", False),
        )

    def render(self) -> str:
        return "⟨%s; %s; %s⟩ (%.3f)" % (self.arg1, self.rel, self.arg2, self.score)


def candidate_rels(sentence: AnnotatedSentence) -> list:
    """(index, kind) of tokens that may head a relation."""
    out = []
    for tok in sentence.tokens:
        if tok.is_punct:
            continue
        if is_verbal(tok.pos):
            out.append((tok.index, "verb"))
        elif is_noun_rel(tok.pos):
            out.append((tok.index, "noun"))
    return out


def detect_arguments(
    sentence: AnnotatedSentence,
    tree: DependencyTree,
    model,
    debug_paths=None,
) -> list:
    """Classify every candidate path and keep the non-null detections."""
    results = []
    for rel_index, kind in candidate_rels(sentence):
        args = []
        for tok in sentence.tokens:
            if tok.index == rel_index or tok.is_punct or not is_content_pos(tok.pos):
                continue
            path = dpath.shortest_path(tree, rel_index, tok.index)
            if kind == "verb" and dpath.path_length(path) > MAX_VERB_PATH_NODES:
                continue
            label, prob = model.predict(path.nodes)
            if debug_paths is not None:
                debug_paths("%s %s -> %s %.4f" % (sentence.sent_id, dpath.format_path(path), label, prob))
            if label != NULL_LABEL:
                args.append(ArgDetection(index=tok.index, label=label, prob=prob, path=path))
        if args:
            results.append(
                DetectionResult(
                    sent_id=sentence.sent_id,
                    rel_index=rel_index,
                    rel_kind=kind,
                    args=tuple(args),
                )
            )
    return results


def classify_preposition(path: dpath.DepPath, model):
    """(lemma or None, probability) for a rel-arg path; the non-preposition
    class suppresses the slot."""
    probs = model.predict_proba(path.nodes)
    k = int(probs.argmax())  # ties break to the first class, by construction
    label = model.config.labels[k]
    prob = float(probs[k])
    if label == NONE_PREPOSITION:
        return None, prob
    return label, prob


def attach_prepositions(detection: DetectionResult, model) -> DetectionResult:
    """Classify the preposition for every argN (verb) or arg2 (noun) arg."""
    want = "argN" if detection.rel_kind == "verb" else "arg2"
    preps = {}
    for arg in detection.args:
        if arg.label == want:
            preps[arg.index] = classify_preposition(arg.path, model)
    return DetectionResult(
        sent_id=detection.sent_id,
        rel_index=detection.rel_index,
        rel_kind=detection.rel_kind,
        args=detection.args,
        preps=preps,
    )


# ---------------------------------------------------------------------------
# Phrase spanning


def _dfs_claim(tree, start, blocked) -> list:
    out = []
    stack = [start]
    while stack:
        cur = stack.pop()
        out.append(cur)
        for child in tree.children(cur):
            if child not in blocked:
                stack.append(child)
    return out


def span_dependents(tree: DependencyTree, rel_index: int, rel_kind: str, slot_heads: dict) -> dict:
    """Claim token sets for each slot; claims are pairwise disjoint.

    Slots are processed in priority order (rel first).  A claim never
    enters another slot's headword or a token some earlier slot claimed.
    Verb relations keep only particle / modal / negation dependents; noun
    relations take their subtree minus the preposition branches that lead
    to their arguments.
    """
    other_heads = set(slot_heads.values())
    claims = {}
    claimed = set()

    if rel_kind == "verb":
        claim = [rel_index]
        for child in tree.children(rel_index):
            tok = tree.token(child)
            if child in other_heads or tok.is_punct:
                continue
            if tok.pos in VERB_PHRASE_POS or tok.lemma.lower() in NEGATION_LEMMAS:
                claim.append(child)
    else:
        prune = set(other_heads)
        for head in slot_heads.values():
            path = dpath.shortest_path(tree, rel_index, head)
            for node in path.nodes[1:-1]:
                if node.pos == "IN":
                    prune.add(node.index)
        claim = _dfs_claim(tree, rel_index, prune)
    claims["rel"] = sorted(claim)
    claimed |= set(claim)

    for slot in SLOT_PRIORITY[1:]:
        if slot not in slot_heads:
            continue
        head = slot_heads[slot]
        blocked = (other_heads | claimed | {rel_index}) - {head}
        claim = _dfs_claim(tree, head, blocked)
        claims[slot] = sorted(claim)
        claimed |= set(claim)
    return claims


def render_phrase(tree: DependencyTree, indices) -> str:
    """Token forms in surface order, punctuation dropped."""
    forms = [
        tree.token(i).form for i in sorted(indices) if not tree.token(i).is_punct
    ]
    return " ".join(forms)


# ---------------------------------------------------------------------------
# Template alignment and scoring


@dataclass(frozen=True)
class IncompleteTriple:
    """Headword-level template alignment, before phrase spanning."""

    template: int
    slot_heads: dict  # arg slots only (rel is implicit)
    arg_probs: tuple
    prep: str | None
    passive_be: bool = False
    noun_be: bool = False
    left_slot: str = "arg1"  # slot rendered in the triple's first position
    right_slot: str = "arg2"


def assemble_triples(detection: DetectionResult) -> list:
    """Align one detection into the extraction templates."""
    out = []
    arg1s = detection.by_label("arg1")
    arg2s = detection.by_label("arg2")
    argns = detection.by_label("argN")

    if detection.rel_kind == "verb":
        for a1 in arg1s:
            for a2 in arg2s:
                out.append(
                    IncompleteTriple(
                        template=1,
                        slot_heads={"arg1": a1.index, "arg2": a2.index},
                        arg_probs=(a1.prob, a2.prob),
                        prep=None,
                    )
                )
        for an in argns:
            prep, _ = detection.preps.get(an.index, (None, 0.0))
            for a2 in arg2s:
                out.append(
                    IncompleteTriple(
                        template=2,
                        slot_heads={"arg2": a2.index, "argN": an.index},
                        arg_probs=(a2.prob, an.prob),
                        prep=prep,
                        passive_be=True,
                        left_slot="arg2",
                        right_slot="argN",
                    )
                )
            for a1 in arg1s:
                for a2 in arg2s:
                    out.append(
                        IncompleteTriple(
                            template=3,
                            slot_heads={"arg1": a1.index, "arg2": a2.index, "argN": an.index},
                            arg_probs=(a1.prob, a2.prob, an.prob),
                            prep=prep,
                            left_slot="arg1",
                            right_slot="argN",
                        )
                    )
    else:
        for a1 in arg1s:
            for a2 in arg2s:
                prep, _ = detection.preps.get(a2.index, (None, 0.0))
                out.append(
                    IncompleteTriple(
                        template=4,
                        slot_heads={"arg1": a1.index, "arg2": a2.index},
                        arg_probs=(a1.prob, a2.prob),
                        prep=prep,
                        noun_be=True,
                    )
                )
    return out


def score_triple(arg_probs, dep_confidence: float) -> float:
    """Parse confidence times the mean argument probability."""
    if not arg_probs:
        return 0.0
    return dep_confidence * (sum(arg_probs) / len(arg_probs))


def complete_triple(
    incomplete: IncompleteTriple,
    detection: DetectionResult,
    sentence: AnnotatedSentence,
    tree: DependencyTree,
) -> Triple:
    """Span the aligned headwords and render the final phrases."""
    claims = span_dependents(
        tree, detection.rel_index, detection.rel_kind, incomplete.slot_heads
    )
    rel_words = render_phrase(tree, claims["rel"])
    phrases = {
        slot: render_phrase(tree, claims[slot]) for slot in incomplete.slot_heads
    }

    if incomplete.template == 3:
        rel_phrase = rel_words + " " + phrases["arg2"]
    else:
        rel_phrase = rel_words
    if incomplete.passive_be or incomplete.noun_be:
        rel_phrase = "be " + rel_phrase
    if incomplete.prep is not None:
        rel_phrase = rel_phrase + " " + incomplete.prep

    return Triple(
        sent_id=sentence.sent_id,
        arg1=phrases[incomplete.left_slot],
        rel=rel_phrase,
        arg2=phrases[incomplete.right_slot],
        template=incomplete.template,
        score=score_triple(incomplete.arg_probs, sentence.dep_confidence),
        passive_be=incomplete.passive_be,
        noun_be=incomplete.noun_be,
        slots={slot: list(claims[slot]) for slot in claims},
    )


def extract_sentence(
    sentence: AnnotatedSentence,
    tree: DependencyTree,
    argument_model,
    preposition_model,
    debug_paths=None,
) -> list:
    """All scored triples of one sentence, duplicates collapsed."""
    triples = []
    for detection in detect_arguments(sentence, tree, argument_model, debug_paths=debug_paths):
        detection = attach_prepositions(detection, preposition_model)
        for incomplete in assemble_triples(detection):
            triples.append(complete_triple(incomplete, detection, sentence, tree))
    # Identical surface triples keep their best-scoring instance.
    best = {}
    for triple in triples:
        key = (triple.arg1, triple.rel, triple.arg2)
        if key not in best or triple.score > best[key].score:
            best[key] = triple
    return sorted(best.values(), key=_triple_order)


def _triple_order(t: Triple):
    return (-t.score, t.sent_id, t.arg1, t.rel, t.arg2, t.template)


def filter_by_score(triples, threshold: float) -> list:
    """Strictly-above-threshold triples, highest score first."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be in [0, 1]")
    kept = [t for t in triples if t.score > threshold]
    return sorted(kept, key=_triple_order)


def write_triples(triples, out, text_mode=False) -> None:
    for triple in triples:
        if text_mode:
            out.write(triple.render() + "\n")
        else:
            out.write(json.dumps(triple.to_json(), ensure_ascii=False) + "\n")


def read_triples(path) -> list:
    triples = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                triples.append(Triple.from_json(json.loads(line)))
    return triples
