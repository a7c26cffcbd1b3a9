"""Data model and ingestion for dependency-annotated sentences.

Sentences arrive as blank-line-separated TSV blocks with seven token
columns (ID, FORM, LEMMA, POS, HEAD, DEPREL, NE) plus an optional
semantic-role block, and per-sentence ``#`` comment lines carrying the
sentence id and parser confidences.  See the README for the exact column
semantics.  All downstream stages consume the validated
``AnnotatedSentence`` / ``DependencyTree`` objects built here; nothing in
this package tokenizes, parses or tags text itself.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

# POS tags / dependency labels treated as punctuation.  Punctuation stays in
# the tree but is never proposed as a rel or arg headword downstream.
PUNCT_POS = {".", ",", ":", "``", "''", "-LRB-", "-RRB-", "HYPH", "SYM", "$", "#", "PUNCT", "NFP"}
PUNCT_DEPREL = {"punct", "p"}

# Role labels accepted in semantic-role frames: agent, patient, and the
# open-ended modifier family (AM-TMP, AM-LOC, AM-DIS, ...).
ROLE_RE = re.compile(r"^(A0|A1|AM(-[A-Z0-9]+)?)$")

_SENT_ID_RE = re.compile(r"^#\s*sent_id\s*=\s*(\S+)")
_DEP_CONF_RE = re.compile(r"^#\s*dep_conf\s*=\s*([0-9.eE+-]+)")
_SRL_CONF_RE = re.compile(r"^#\s*srl_conf\s*=\s*([0-9.eE+-]+)")


class CorpusError(Exception):
    """Base class for ingestion failures."""


class ParseError(CorpusError):
    """A line does not conform to the column format."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = "line %d: %s" % (line_no, message)
        super().__init__(message)
        self.line_no = line_no


class StructuralError(CorpusError):
    """Head links of a sentence do not form a tree."""

    def __init__(self, message, sent_id=None):
        if sent_id is not None:
            message = "sentence %s: %s" % (sent_id, message)
        super().__init__(message)
        self.sent_id = sent_id


@dataclass(frozen=True)
class Token:
    """One token of an annotated sentence (1-based ``index``)."""

    index: int
    form: str
    lemma: str
    pos: str
    head: int
    deprel: str
    ne: str = "O"

    def __post_init__(self):
        if self.index < 1:
            raise StructuralError("token index must be >= 1, got %d" % self.index)
        if self.head < 0:
            raise StructuralError("head must be >= 0, got %d" % self.head)
        if self.head == self.index:
            raise StructuralError("token %d is its own head" % self.index)
        if not self.pos or not self.deprel:
            raise StructuralError("token %d has empty POS or DEPREL" % self.index)

    @property
    def is_punct(self) -> bool:
        return self.pos in PUNCT_POS or self.deprel in PUNCT_DEPREL


@dataclass(frozen=True)
class SrlFrame:
    """A predicate with labeled role fillers (token indices)."""

    predicate: int
    roles: tuple = ()
    confidence: float = 1.0

    def validate(self, n_tokens: int) -> None:
        if not 1 <= self.predicate <= n_tokens:
            raise StructuralError("frame predicate index %d out of range" % self.predicate)
        for label, idx in self.roles:
            if not ROLE_RE.match(label):
                raise StructuralError("unknown role label %r" % label)
            if not 1 <= idx <= n_tokens:
                raise StructuralError("role %s index %d out of range" % (label, idx))
        if not 0.0 <= self.confidence <= 1.0:
            raise StructuralError("frame confidence %r outside [0, 1]" % self.confidence)


@dataclass
class AnnotatedSentence:
    """A validated sentence with tokens, optional SRL frames and confidences."""

    tokens: list
    frames: list = field(default_factory=list)
    dep_confidence: float = 1.0
    srl_confidence: float = 1.0
    sent_id: str = ""
    comments: list = field(default_factory=list)

    def __len__(self):
        return len(self.tokens)

    def token(self, index: int) -> Token:
        """Token by 1-based index."""
        return self.tokens[index - 1]

    def text(self) -> str:
        return " ".join(t.form for t in self.tokens)

    def validate(self) -> None:
        n = len(self.tokens)
        if n == 0:
            raise StructuralError("sentence has no tokens", self.sent_id)
        for expected, tok in enumerate(self.tokens, start=1):
            if tok.index != expected:
                raise StructuralError(
                    "token ids not contiguous: expected %d, got %d" % (expected, tok.index),
                    self.sent_id,
                )
            if tok.head > n:
                raise StructuralError(
                    "token %d has head %d beyond sentence end" % (tok.index, tok.head),
                    self.sent_id,
                )
        roots = [t.index for t in self.tokens if t.head == 0]
        if len(roots) != 1:
            raise StructuralError("expected exactly one root, found %d" % len(roots), self.sent_id)
        # Walk each token to the root; a repeated visit means a head cycle.
        for tok in self.tokens:
            seen = set()
            cur = tok.index
            while cur != 0:
                if cur in seen:
                    raise StructuralError("cycle in head links at token %d" % cur, self.sent_id)
                seen.add(cur)
                cur = self.tokens[cur - 1].head
        for conf, name in ((self.dep_confidence, "dep_conf"), (self.srl_confidence, "srl_conf")):
            if not 0.0 <= conf <= 1.0:
                raise StructuralError("%s %r outside [0, 1]" % (name, conf), self.sent_id)
        for frame in self.frames:
            frame.validate(n)


class DependencyTree:
    """Adjacency view (parent / children) over a validated sentence."""

    def __init__(self, sentence: AnnotatedSentence):
        sentence.validate()
        self.sentence = sentence
        n = len(sentence.tokens)
        self._children = [[] for _ in range(n + 1)]
        self._root = 0
        for tok in sentence.tokens:
            if tok.head == 0:
                self._root = tok.index
            else:
                self._children[tok.head].append(tok.index)
        n_edges = sum(len(c) for c in self._children)
        if n_edges != n - 1:
            raise StructuralError("expected %d edges, found %d" % (n - 1, n_edges), sentence.sent_id)

    @property
    def root(self) -> int:
        return self._root

    def parent(self, index: int) -> int:
        """Head index of ``index`` (0 for the root)."""
        return self.sentence.token(index).head

    def children(self, index: int) -> list:
        return list(self._children[index])

    def token(self, index: int) -> Token:
        return self.sentence.token(index)

    def __len__(self):
        return len(self.sentence.tokens)

    def descendants(self, index: int) -> list:
        """All indices in the subtree rooted at ``index``, including it."""
        out = []
        stack = [index]
        while stack:
            cur = stack.pop()
            out.append(cur)
            stack.extend(reversed(self._children[cur]))
        return out


def build_tree(sentence: AnnotatedSentence) -> DependencyTree:
    """Validate ``sentence`` and expose it as a DependencyTree."""
    return DependencyTree(sentence)


def _parse_block(lines, start_line_no):
    """Parse one sentence block (list of (line_no, text)) into a sentence."""
    comments = []
    token_rows = []
    for line_no, line in lines:
        if line.startswith("#"):
            comments.append(line)
        else:
            token_rows.append((line_no, line))
    sent_id = ""
    dep_conf = 1.0
    srl_conf = 1.0
    for comment in comments:
        m = _SENT_ID_RE.match(comment)
        if m:
            sent_id = m.group(1)
        m = _DEP_CONF_RE.match(comment)
        if m:
            dep_conf = float(m.group(1))
        m = _SRL_CONF_RE.match(comment)
        if m:
            srl_conf = float(m.group(1))

    tokens = []
    srl_cells = []
    n_extra = None
    for line_no, line in token_rows:
        cols = line.split("\t")
        if len(cols) < 7:
            raise ParseError(
                "expected at least 7 tab-separated columns, got %d" % len(cols), line_no
            )
        if n_extra is None:
            n_extra = len(cols) - 7
        elif len(cols) - 7 != n_extra:
            raise ParseError(
                "inconsistent column count within sentence block (%d vs %d)"
                % (len(cols), 7 + n_extra),
                line_no,
            )
        try:
            index = int(cols[0])
            head = int(cols[4])
        except ValueError as exc:
            raise ParseError("non-integer ID or HEAD field: %s" % exc, line_no) from None
        try:
            tokens.append(
                Token(
                    index=index,
                    form=cols[1],
                    lemma=cols[2],
                    pos=cols[3],
                    head=head,
                    deprel=cols[5],
                    ne=cols[6],
                )
            )
        except StructuralError as exc:
            raise StructuralError(str(exc), sent_id or "at line %d" % line_no) from None
        srl_cells.append(cols[7:])

    frames = []
    if n_extra:
        # Column 8 marks predicate tokens; columns 9.. hold one role column
        # per predicate, ordered by predicate position.
        predicates = [tokens[i].index for i in range(len(tokens)) if srl_cells[i][0] != "_"]
        if len(predicates) != n_extra - 1:
            raise ParseError(
                "found %d predicate markers but %d role columns"
                % (len(predicates), n_extra - 1),
                start_line_no,
            )
        for col, pred in enumerate(predicates, start=1):
            roles = []
            for i in range(len(tokens)):
                cell = srl_cells[i][col]
                if cell != "_":
                    roles.append((cell, tokens[i].index))
            frames.append(SrlFrame(predicate=pred, roles=tuple(roles), confidence=srl_conf))

    sentence = AnnotatedSentence(
        tokens=tokens,
        frames=frames,
        dep_confidence=dep_conf,
        srl_confidence=srl_conf,
        sent_id=sent_id,
        comments=comments,
    )
    sentence.validate()
    return sentence


def read_corpus(source: IO[str] | Iterable[str], errors: str = "raise") -> Iterator:
    """Stream validated sentences from a TSV corpus.

    ``errors="raise"`` propagates the first violation; ``errors="report"``
    yields ``(sentence_or_None, error_or_None)`` pairs so malformed blocks
    are surfaced instead of silently dropped.
    """
    if errors not in ("raise", "report"):
        raise ValueError("errors must be 'raise' or 'report'")

    def blocks():
        pending = []
        start = 1
        for line_no, raw in enumerate(source, start=1):
            line = raw.rstrip("\n")
            if line.strip() == "":
                if pending:
                    yield start, pending
                    pending = []
            else:
                if not pending:
                    start = line_no
                pending.append((line_no, line))
        if pending:
            yield start, pending

    for start_line_no, lines in blocks():
        try:
            sentence = _parse_block(lines, start_line_no)
        except CorpusError as exc:
            if errors == "raise":
                raise
            yield None, exc
            continue
        if errors == "report":
            yield sentence, None
        else:
            yield sentence


def read_corpus_file(path, errors: str = "raise"):
    """Read a corpus file into a list of sentences (convenience wrapper)."""
    with open(path, encoding="utf-8") as f:
        if errors == "report":
            return list(read_corpus(f, errors="report"))
        return list(read_corpus(f))


def read_srl_sidecar(path) -> dict:
    """Load a JSON Lines SRL sidecar keyed by sentence id.

    Each line: ``{"sent_id": ..., "frames": [{"predicate": i,
    "roles": [["A0", j], ...], "confidence": c}]}``.
    """
    frames_by_id = {}
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError("invalid JSON in SRL sidecar: %s" % exc, line_no) from None
            frames = [
                SrlFrame(
                    predicate=fr["predicate"],
                    roles=tuple((r[0], r[1]) for r in fr.get("roles", [])),
                    confidence=fr.get("confidence", 1.0),
                )
                for fr in record.get("frames", [])
            ]
            frames_by_id[record["sent_id"]] = frames
    return frames_by_id


def attach_sidecar_frames(sentences, frames_by_id) -> None:
    """Replace sentence frames with sidecar frames where the id matches."""
    for sentence in sentences:
        if sentence.sent_id in frames_by_id:
            frames = frames_by_id[sentence.sent_id]
            for frame in frames:
                frame.validate(len(sentence.tokens))
            sentence.frames = list(frames)


def write_corpus(sentences, out: IO[str]) -> None:
    """Write sentences back in the canonical column format.

    Reading a canonical file and writing it again is byte-identical:
    comments are replayed verbatim and SRL columns are regenerated from the
    frames in predicate order.
    """
    for sentence in sentences:
        for comment in sentence.comments:
            out.write(comment + "\n")
        frames = sorted(sentence.frames, key=lambda fr: fr.predicate)
        role_by_frame = [dict((idx, label) for label, idx in fr.roles) for fr in frames]
        predicates = {fr.predicate for fr in frames}
        for tok in sentence.tokens:
            cols = [str(tok.index), tok.form, tok.lemma, tok.pos, str(tok.head), tok.deprel, tok.ne]
            if frames:
                cols.append("Y" if tok.index in predicates else "_")
                for roles in role_by_frame:
                    cols.append(roles.get(tok.index, "_"))
            out.write("\t".join(cols) + "\n")
        out.write("\n")
