"""Seed triples and distant-supervision training-set augmentation.

Bootstrapped tuples are converted to binary candidate triples, filtered
into seeds (proper-noun or cardinal arguments, proper nouns linked to a
knowledge base, relation lemma that is not "be" or "do"), and each seed is
then matched against new sentences: both arguments must occur (same entity
for proper nouns, same surface form for cardinals), the relation lemma
must occur, every rel-arg pair must sit on an ancestor-chain dependency
path, and verb relations additionally cap that path at six edges.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from . import dpath
from .bootstrap import ExtractionTuple, is_noun_rel, is_verbal
from .corpus import AnnotatedSentence, build_tree

log = logging.getLogger(__name__)

PROPER_NOUN_POS = {"NNP", "NNPS"}
CARDINAL_POS = {"CD"}
BANNED_REL_LEMMAS = {"be", "do"}

# Verb-mediated paths longer than this many nodes are rejected.
MAX_VERB_PATH_NODES = 6


class LinkerError(Exception):
    """Entity linking failed."""

    def __init__(self, message, retryable=False):
        super().__init__(message)
        self.retryable = retryable


@dataclass(frozen=True)
class LinkedMention:
    sent_id: str
    start: int  # 1-based token index, inclusive
    end: int  # inclusive
    entity: str
    confidence: float = 1.0

    def __post_init__(self):
        if self.start < 1 or self.end < self.start:
            raise ValueError("invalid mention span %d..%d" % (self.start, self.end))
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("mention confidence %r outside [0, 1]" % self.confidence)


@dataclass(frozen=True)
class SeedArg:
    slot: str  # arg1 | arg2 | argN
    surface: str
    lemma: str
    kind: str  # proper-noun | cardinal
    entity: str | None = None

    def __post_init__(self):
        if self.kind not in ("proper-noun", "cardinal"):
            raise ValueError("argument kind must be proper-noun or cardinal")
        if self.kind == "proper-noun" and not self.entity:
            raise ValueError("proper-noun arguments must carry an entity id")


@dataclass(frozen=True)
class SeedTriple:
    rel_lemma: str
    rel_kind: str  # verb | noun
    prep: str | None
    left: SeedArg
    right: SeedArg
    origin_sent_id: str | None = None

    def __post_init__(self):
        if self.rel_lemma in BANNED_REL_LEMMAS:
            raise ValueError("seed relation lemma may not be %r" % self.rel_lemma)

    @property
    def args(self):
        return (self.left, self.right)

    def to_json(self) -> dict:
        return {
            "rel": {"lemma": self.rel_lemma, "kind": self.rel_kind, "prep": self.prep},
            "args": [
                {
                    "slot": a.slot,
                    "surface": a.surface,
                    "lemma": a.lemma,
                    "kind": a.kind,
                    "entity": a.entity,
                }
                for a in self.args
            ],
            "origin_sent_id": self.origin_sent_id,
        }

    @classmethod
    def from_json(cls, record: dict) -> "SeedTriple":
        args = [
            SeedArg(
                slot=a["slot"],
                surface=a["surface"],
                lemma=a["lemma"],
                kind=a["kind"],
                entity=a.get("entity"),
            )
            for a in record["args"]
        ]
        return cls(
            rel_lemma=record["rel"]["lemma"],
            rel_kind=record["rel"]["kind"],
            prep=record["rel"].get("prep"),
            left=args[0],
            right=args[1],
            origin_sent_id=record.get("origin_sent_id"),
        )


@dataclass(frozen=True)
class CandidateTriple:
    """A binary pairing of tuple slots, before seed filtering."""

    tuple: ExtractionTuple
    left_slot: str
    left_index: int
    right_slot: str
    right_index: int
    prep: str | None


def to_binary_triples(tup: ExtractionTuple) -> list:
    """Binary pairings of an n-ary tuple.

    Verb tuples pair arg1/arg2 and each of them with every argN; noun
    tuples yield the single arg1-arg2 pairing.  Absent slots are skipped.
    """
    out = []

    def pair(ls, li, rs, ri, prep):
        if li is not None and ri is not None:
            out.append(CandidateTriple(tup, ls, li, rs, ri, prep))

    pair("arg1", tup.arg1, "arg2", tup.arg2, tup.arg2_prep)
    if tup.rel_kind == "verb":
        for index, prep in tup.argns:
            pair("arg1", tup.arg1, "argN", index, prep)
            pair("arg2", tup.arg2, "argN", index, prep)
    return out


# ---------------------------------------------------------------------------
# Entity linking


class GazetteerLinker:
    """Exact-surface-form linker over a TSV entity dump (surface, id).

    Longest token span wins on overlap; among equal-length overlapping
    matches the leftmost wins.
    """

    def __init__(self, entries):
        self.entries = {}
        self.max_len = 1
        for surface, entity in entries:
            words = tuple(surface.split())
            self.entries[words] = entity
            self.max_len = max(self.max_len, len(words))

    @classmethod
    def from_file(cls, path):
        entries = []
        with open(path, encoding="utf-8") as f:
            for line in f:
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                surface, entity = line.split("\t")
                entries.append((surface, entity))
        return cls(entries)

    def link(self, sentence: AnnotatedSentence) -> list:
        forms = [t.form for t in sentence.tokens]
        candidates = []
        for start in range(len(forms)):
            for length in range(min(self.max_len, len(forms) - start), 0, -1):
                words = tuple(forms[start : start + length])
                if words in self.entries:
                    candidates.append((start + 1, start + length, self.entries[words]))
        # Longest span first, then leftmost; drop overlaps.
        candidates.sort(key=lambda c: (-(c[1] - c[0]), c[0]))
        taken = set()
        mentions = []
        for start, end, entity in candidates:
            span = set(range(start, end + 1))
            if span & taken:
                continue
            taken |= span
            mentions.append(
                LinkedMention(sent_id=sentence.sent_id, start=start, end=end, entity=entity)
            )
        mentions.sort(key=lambda m: m.start)
        return mentions


class HttpLinker:
    """Client for a remote annotate endpoint.

    Sends ``POST endpoint`` with form fields ``text`` and ``confidence``
    and expects a JSON object with a ``Resources`` list of
    ``{"@URI": ..., "@offset": ..., "@surfaceForm": ...,
    "@similarityScore": ...}`` records with character offsets into the
    posted text.
    """

    def __init__(self, endpoint, confidence=0.5, post=None, timeout=10.0):
        if post is None:
            import requests

            post = requests.post
        self.endpoint = endpoint
        self.confidence = confidence
        self.post = post
        self.timeout = timeout

    def link(self, sentence: AnnotatedSentence) -> list:
        text = sentence.text()
        try:
            response = self.post(
                self.endpoint,
                data={"text": text, "confidence": str(self.confidence)},
                headers={"Accept": "application/json"},
                timeout=self.timeout,
            )
        except Exception as exc:
            raise LinkerError("annotate endpoint unreachable: %s" % exc, retryable=True)
        try:
            payload = response.json()
            resources = payload.get("Resources", [])
        except Exception as exc:
            raise LinkerError("malformed annotate response: %s" % exc, retryable=False)

        # Character offset of each token in the joined text.
        offsets = {}
        pos = 0
        for tok in sentence.tokens:
            offsets[pos] = tok.index
            pos += len(tok.form) + 1

        mentions = []
        for res in resources:
            try:
                offset = int(res["@offset"])
                surface = res["@surfaceForm"]
                entity = res["@URI"]
                confidence = float(res.get("@similarityScore", 1.0))
            except (KeyError, TypeError, ValueError) as exc:
                raise LinkerError("malformed annotate resource: %s" % exc, retryable=False)
            if offset not in offsets:
                log.warning("mention %r at offset %d does not align to a token", surface, offset)
                continue
            start = offsets[offset]
            end = start + len(surface.split()) - 1
            if end > len(sentence.tokens):
                continue
            mentions.append(
                LinkedMention(
                    sent_id=sentence.sent_id,
                    start=start,
                    end=end,
                    entity=entity,
                    confidence=min(max(confidence, 0.0), 1.0),
                )
            )
        return mentions


def link_entities(sentence: AnnotatedSentence, linker) -> list:
    """Non-overlapping entity mentions for one sentence."""
    return linker.link(sentence)


# ---------------------------------------------------------------------------
# Seed filtering


def _mention_covering(mentions, index):
    for m in mentions:
        if m.start <= index <= m.end:
            return m
    return None


def filter_seeds(candidates, sentences_by_id, linker) -> list:
    """Keep candidates whose arguments are linked proper nouns or cardinal
    numbers and whose relation lemma is not "be" or "do"."""
    seeds = []
    mention_cache = {}
    for cand in candidates:
        tup = cand.tuple
        if tup.rel_lemma in BANNED_REL_LEMMAS:
            log.info("seed dropped (relation lemma %r): %s", tup.rel_lemma, tup.sent_id)
            continue
        sentence = sentences_by_id[tup.sent_id]
        args = []
        ok = True
        for slot, index in ((cand.left_slot, cand.left_index), (cand.right_slot, cand.right_index)):
            tok = sentence.token(index)
            if tok.pos in CARDINAL_POS:
                args.append(SeedArg(slot=slot, surface=tok.form, lemma=tok.lemma, kind="cardinal"))
                continue
            if tok.pos not in PROPER_NOUN_POS:
                log.info("seed dropped (%s %r is not proper/cardinal)", slot, tok.form)
                ok = False
                break
            if tup.sent_id not in mention_cache:
                try:
                    mention_cache[tup.sent_id] = linker.link(sentence)
                except LinkerError as exc:
                    log.warning("linker failed on %s: %s", tup.sent_id, exc)
                    mention_cache[tup.sent_id] = []
            mention = _mention_covering(mention_cache[tup.sent_id], index)
            if mention is None:
                log.info("seed dropped (%s %r not linked)", slot, tok.form)
                ok = False
                break
            surface = " ".join(
                sentence.token(i).form for i in range(mention.start, mention.end + 1)
            )
            args.append(
                SeedArg(
                    slot=slot,
                    surface=surface,
                    lemma=tok.lemma,
                    kind="proper-noun",
                    entity=mention.entity,
                )
            )
        if not ok:
            continue
        seeds.append(
            SeedTriple(
                rel_lemma=tup.rel_lemma,
                rel_kind=tup.rel_kind,
                prep=cand.prep,
                left=args[0],
                right=args[1],
                origin_sent_id=tup.sent_id,
            )
        )
    return seeds


# ---------------------------------------------------------------------------
# Distant supervision


class SentenceIndex:
    """Inverted indexes over a linked corpus for seed matching."""

    def __init__(self, sentences, linker):
        self.sentences = list(sentences)
        self.by_id = {s.sent_id: s for s in self.sentences}
        self.trees = {}
        self.entity_heads = {}  # entity id -> [(sent_id, head index)]
        self.lemma_index = {}  # lemma -> {sent_id: [indices]}
        self.cardinal_index = {}  # surface form -> {sent_id: [indices]}
        for sentence in self.sentences:
            tree = build_tree(sentence)
            self.trees[sentence.sent_id] = tree
            for tok in sentence.tokens:
                self.lemma_index.setdefault(tok.lemma, {}).setdefault(
                    sentence.sent_id, []
                ).append(tok.index)
                if tok.pos in CARDINAL_POS:
                    self.cardinal_index.setdefault(tok.form, {}).setdefault(
                        sentence.sent_id, []
                    ).append(tok.index)
            try:
                mentions = linker.link(sentence)
            except LinkerError as exc:
                log.warning("linker failed on %s: %s", sentence.sent_id, exc)
                mentions = []
            for mention in mentions:
                head = self._span_head(tree, mention)
                self.entity_heads.setdefault(mention.entity, []).append(
                    (sentence.sent_id, head)
                )

    @staticmethod
    def _span_head(tree, mention):
        """The token inside a span whose head lies outside it (leftmost wins)."""
        span = range(mention.start, mention.end + 1)
        for index in span:
            head = tree.parent(index)
            if head == 0 or not (mention.start <= head <= mention.end):
                return index
        return mention.start

    def arg_occurrences(self, arg: SeedArg) -> dict:
        """sent_id -> candidate headword indices for one seed argument."""
        out = {}
        if arg.kind == "proper-noun":
            for sent_id, head in self.entity_heads.get(arg.entity, ()):
                out.setdefault(sent_id, []).append(head)
        else:
            for sent_id, indices in self.cardinal_index.get(arg.surface, {}).items():
                out.setdefault(sent_id, []).extend(indices)
        return out


@dataclass(frozen=True)
class AugmentedPair:
    """A sentence found to express a seed, with the matched headwords."""

    sent_id: str
    seed: SeedTriple
    rel_index: int
    arg_indices: tuple  # ((slot, token index), ...) aligned with seed args

    def to_json(self) -> dict:
        return {
            "sent_id": self.sent_id,
            "seed": self.seed.to_json(),
            "rel_index": self.rel_index,
            "args": [{"slot": slot, "index": index} for slot, index in self.arg_indices],
        }


def _rel_pos_compatible(pos, rel_kind):
    return is_verbal(pos) if rel_kind == "verb" else is_noun_rel(pos)


def _path_ok(tree, rel_index, arg_index, rel_kind):
    path = dpath.shortest_path(tree, rel_index, arg_index)
    if not dpath.is_linear(path):
        return None
    if rel_kind == "verb" and dpath.path_length(path) > MAX_VERB_PATH_NODES:
        return None
    return path


def match_sentences(seed: SeedTriple, index: SentenceIndex) -> list:
    """Sentences expressing a seed under the distant-supervision checks.

    Among several relation tokens with the right lemma (or several
    mentions of an argument) the combination minimizing the summed path
    length wins, ties to the leftmost token.  The seed's own origin
    sentence is never returned.
    """
    left_occ = index.arg_occurrences(seed.left)
    right_occ = index.arg_occurrences(seed.right)
    rel_occ = index.lemma_index.get(seed.rel_lemma, {})

    pairs = []
    for sent_id in sorted(set(left_occ) & set(right_occ) & set(rel_occ)):
        if seed.origin_sent_id is not None and sent_id == seed.origin_sent_id:
            continue
        tree = index.trees[sent_id]
        sentence = index.by_id[sent_id]
        rel_candidates = [
            i
            for i in rel_occ[sent_id]
            if _rel_pos_compatible(sentence.token(i).pos, seed.rel_kind)
            and not sentence.token(i).is_punct
        ]
        best = None  # (total nodes, rel, left arg, right arg)
        for rel_index in rel_candidates:
            for li in sorted(left_occ[sent_id]):
                if li == rel_index:
                    continue
                lp = _path_ok(tree, rel_index, li, seed.rel_kind)
                if lp is None:
                    continue
                for ri in sorted(right_occ[sent_id]):
                    if ri == rel_index or ri == li:
                        continue
                    rp = _path_ok(tree, rel_index, ri, seed.rel_kind)
                    if rp is None:
                        continue
                    key = (len(lp) + len(rp), rel_index, li, ri)
                    if best is None or key < best:
                        best = key
        if best is not None:
            _, rel_index, li, ri = best
            pairs.append(
                AugmentedPair(
                    sent_id=sent_id,
                    seed=seed,
                    rel_index=rel_index,
                    arg_indices=((seed.left.slot, li), (seed.right.slot, ri)),
                )
            )
    return pairs


def write_jsonl(records, out) -> None:
    """Serialize an iterable of objects exposing ``to_json`` as JSON Lines."""
    for record in records:
        out.write(json.dumps(record.to_json(), ensure_ascii=False) + "\n")
