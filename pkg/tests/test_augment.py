"""Seed construction, entity linking, and distant supervision."""

import json

import pytest

from helpers import DATA_DIR, chain_sentence, make_sentence

from pathoie.augment import (
    GazetteerLinker,
    HttpLinker,
    LinkerError,
    SeedArg,
    SeedTriple,
    SentenceIndex,
    filter_seeds,
    link_entities,
    match_sentences,
    to_binary_triples,
)
from pathoie.bootstrap import ExtractionTuple


def verb_tuple(**kwargs):
    base = dict(sent_id="s", rel_index=2, rel_lemma="win", rel_kind="verb")
    base.update(kwargs)
    return ExtractionTuple(**base)


@pytest.fixture(scope="module")
def gazetteer():
    return GazetteerLinker.from_file(DATA_DIR / "entities.tsv")


class TestToBinaryTriples:
    def test_verb_tuple_with_one_argn_gives_three(self):
        tup = verb_tuple(arg1=1, arg2=3, argns=((5, "in"),))
        candidates = to_binary_triples(tup)
        assert len(candidates) == 3
        slot_pairs = {(c.left_slot, c.right_slot) for c in candidates}
        assert slot_pairs == {("arg1", "arg2"), ("arg1", "argN"), ("arg2", "argN")}

    def test_noun_tuple_gives_exactly_one(self):
        tup = ExtractionTuple(
            sent_id="s", rel_index=2, rel_lemma="capital", rel_kind="noun",
            arg1=1, arg2=4, arg2_prep="of",
        )
        (candidate,) = to_binary_triples(tup)
        assert (candidate.left_slot, candidate.right_slot) == ("arg1", "arg2")
        assert candidate.prep == "of"

    def test_arg1_only_gives_nothing(self):
        assert to_binary_triples(verb_tuple(arg1=1)) == []

    def test_two_argns_give_five(self):
        tup = verb_tuple(arg1=1, arg2=3, argns=((5, "in"), (6, None)))
        assert len(to_binary_triples(tup)) == 5


class TestGazetteerLinker:
    def test_empty_sentence_like_input(self, gazetteer):
        sentence = make_sentence([("and", "and", "CC", 0, "root")])
        assert link_entities(sentence, gazetteer) == []

    def test_exact_match(self, gazetteer, fixture_by_id):
        mentions = link_entities(fixture_by_id["gaborone"], gazetteer)
        entities = {m.entity for m in mentions}
        assert entities == {"E_GABORONE", "E_BOTSWANA"}

    def test_longest_span_wins(self, gazetteer):
        linker = GazetteerLinker([("Meadows Bank", "E_MB"), ("Bank", "E_BANK")])
        sentence = make_sentence(
            [
                ("Meadows", "Meadows", "NNP", 2, "nn", "ORG"),
                ("Bank", "Bank", "NNP", 0, "root", "ORG"),
            ]
        )
        (mention,) = linker.link(sentence)
        assert (mention.start, mention.end, mention.entity) == (1, 2, "E_MB")


class TestHttpLinker:
    def _sentence(self):
        return make_sentence(
            [
                ("Gaborone", "Gaborone", "NNP", 0, "root", "LOC"),
                ("is", "be", "VBZ", 1, "cop"),
                ("nice", "nice", "JJ", 1, "acomp"),
            ],
            sent_id="h",
        )

    def test_parses_annotate_response(self):
        class FakeResponse:
            def json(self):
                return {
                    "Resources": [
                        {"@URI": "E_GABORONE", "@offset": "0", "@surfaceForm": "Gaborone",
                         "@similarityScore": "0.93"}
                    ]
                }

        captured = {}

        def fake_post(url, data=None, headers=None, timeout=None):
            captured.update(url=url, data=data)
            return FakeResponse()

        linker = HttpLinker("http://linker/annotate", confidence=0.4, post=fake_post)
        (mention,) = linker.link(self._sentence())
        assert captured["url"] == "http://linker/annotate"
        assert captured["data"]["text"] == "Gaborone is nice"
        assert (mention.start, mention.end) == (1, 1)
        assert mention.entity == "E_GABORONE"
        assert mention.confidence == pytest.approx(0.93)

    def test_unreachable_endpoint_is_retryable(self):
        def fake_post(url, data=None, headers=None, timeout=None):
            raise OSError("connection refused")

        linker = HttpLinker("http://linker/annotate", post=fake_post)
        with pytest.raises(LinkerError) as err:
            linker.link(self._sentence())
        assert err.value.retryable

    def test_malformed_response_is_protocol_error(self):
        class BadResponse:
            def json(self):
                raise ValueError("not json")

        linker = HttpLinker("http://linker/annotate", post=lambda *a, **k: BadResponse())
        with pytest.raises(LinkerError) as err:
            linker.link(self._sentence())
        assert not err.value.retryable


class TestFilterSeeds:
    def test_linked_proper_nouns_kept(self, gazetteer, fixture_by_id, fixture_trees):
        from pathoie.bootstrap import match_noun_patterns

        (tup,) = match_noun_patterns(fixture_trees["gaborone"])
        candidates = to_binary_triples(tup)
        (seed,) = filter_seeds(candidates, fixture_by_id, gazetteer)
        assert seed.rel_lemma == "capital"
        assert seed.left.entity == "E_GABORONE"
        assert seed.right.entity == "E_BOTSWANA"
        assert seed.prep == "of"
        assert seed.origin_sent_id == "gaborone"

    def test_be_relation_dropped(self, gazetteer):
        sentence = make_sentence(
            [
                ("Vilnius", "Vilnius", "NNP", 2, "nsubj", "LOC"),
                ("was", "be", "VBD", 0, "root"),
                ("Lithuania", "Lithuania", "NNP", 2, "dobj", "LOC"),
            ],
            sent_id="s",
        )
        tup = ExtractionTuple(
            sent_id="s", rel_index=2, rel_lemma="be", rel_kind="verb", arg1=1, arg2=3
        )
        assert filter_seeds(to_binary_triples(tup), {"s": sentence}, gazetteer) == []

    def test_common_noun_argument_dropped(self, gazetteer):
        sentence = make_sentence(
            [
                ("people", "people", "NNS", 2, "nsubj"),
                ("like", "like", "VBP", 0, "root"),
                ("Nevada", "Nevada", "NNP", 2, "dobj", "LOC"),
            ],
            sent_id="s",
        )
        tup = ExtractionTuple(
            sent_id="s", rel_index=2, rel_lemma="like", rel_kind="verb", arg1=1, arg2=3
        )
        assert filter_seeds(to_binary_triples(tup), {"s": sentence}, gazetteer) == []

    def test_unlinked_proper_noun_dropped(self):
        linker = GazetteerLinker([])
        sentence = make_sentence(
            [
                ("Zubrowka", "Zubrowka", "NNP", 2, "nsubj", "LOC"),
                ("joined", "join", "VBD", 0, "root"),
                ("Ruritania", "Ruritania", "NNP", 2, "dobj", "LOC"),
            ],
            sent_id="s",
        )
        tup = ExtractionTuple(
            sent_id="s", rel_index=2, rel_lemma="join", rel_kind="verb", arg1=1, arg2=3
        )
        assert filter_seeds(to_binary_triples(tup), {"s": sentence}, linker) == []

    def test_cardinal_argument_kept_without_link(self, gazetteer):
        sentence = make_sentence(
            [
                ("Nadal", "Nadal", "NNP", 2, "nsubj", "PERSON"),
                ("won", "win", "VBD", 0, "root"),
                ("in", "in", "IN", 2, "prep"),
                ("2005", "2005", "CD", 3, "pobj", "DATE"),
            ],
            sent_id="s",
        )
        tup = ExtractionTuple(
            sent_id="s", rel_index=2, rel_lemma="win", rel_kind="verb",
            arg1=1, argns=((4, "in"),),
        )
        (seed,) = filter_seeds(to_binary_triples(tup), {"s": sentence}, gazetteer)
        assert seed.right.kind == "cardinal"
        assert seed.right.surface == "2005"
        assert seed.prep == "in"

    def test_seed_invariants(self):
        with pytest.raises(ValueError):
            SeedArg(slot="arg1", surface="x", lemma="x", kind="proper-noun", entity=None)
        with pytest.raises(ValueError):
            SeedTriple(
                rel_lemma="be",
                rel_kind="verb",
                prep=None,
                left=SeedArg("arg1", "2", "2", "cardinal"),
                right=SeedArg("arg2", "3", "3", "cardinal"),
            )


def capital_seed():
    return SeedTriple(
        rel_lemma="capital",
        rel_kind="noun",
        prep="of",
        left=SeedArg("arg1", "Gaborone", "Gaborone", "proper-noun", "E_GABORONE"),
        right=SeedArg("arg2", "Botswana", "Botswana", "proper-noun", "E_BOTSWANA"),
        origin_sent_id="gaborone",
    )


class TestMatchSentences:
    def test_khama_sentence_matches_capital_seed(self, gazetteer, fixture_sentences):
        index = SentenceIndex(fixture_sentences, gazetteer)
        pairs = match_sentences(capital_seed(), index)
        by_id = {p.sent_id: p for p in pairs}
        assert "khama" in by_id
        pair = by_id["khama"]
        sentence = index.by_id["khama"]
        assert sentence.token(pair.rel_index).lemma == "capital"
        args = dict(pair.arg_indices)
        assert sentence.token(args["arg1"]).form == "Gaborone"
        assert sentence.token(args["arg2"]).form == "Botswana"

    def test_origin_sentence_never_returned(self, gazetteer, fixture_sentences):
        index = SentenceIndex(fixture_sentences, gazetteer)
        pairs = match_sentences(capital_seed(), index)
        assert all(p.sent_id != "gaborone" for p in pairs)
        # without provenance the origin sentence is a legitimate match
        seed = SeedTriple(
            rel_lemma="capital", rel_kind="noun", prep="of",
            left=capital_seed().left, right=capital_seed().right,
        )
        pairs = match_sentences(seed, index)
        assert any(p.sent_id == "gaborone" for p in pairs)

    def test_missing_relation_lemma_no_match(self, gazetteer):
        sentence = make_sentence(
            [
                ("Gaborone", "Gaborone", "NNP", 2, "nsubj", "LOC"),
                ("borders", "border", "VBZ", 0, "root"),
                ("Botswana", "Botswana", "NNP", 2, "dobj", "LOC"),
            ],
            sent_id="other",
        )
        index = SentenceIndex([sentence], gazetteer)
        assert match_sentences(capital_seed(), index) == []

    def test_nonlinear_path_no_match(self, gazetteer):
        # capital and Botswana are siblings: the path bends at the verb
        sentence = make_sentence(
            [
                ("Gaborone", "Gaborone", "NNP", 3, "nsubj", "LOC"),
                ("capital", "capital", "NN", 1, "appos"),
                ("borders", "border", "VBZ", 0, "root"),
                ("Botswana", "Botswana", "NNP", 3, "dobj", "LOC"),
            ],
            sent_id="bend",
        )
        index = SentenceIndex([sentence], gazetteer)
        assert match_sentences(capital_seed(), index) == []

    def test_verb_seed_path_length_limit(self, gazetteer):
        # chain: won <- of* ... <- Nadal at distance 6 edges (7 nodes)
        rows = [("won", "win", "VBD", 0, "root")]
        for k in range(5):
            rows.append(("of%d" % k, "of", "NN", k + 1, "prep"))
        rows.append(("Nadal", "Nadal", "NNP", 6, "pobj", "PERSON"))
        rows.append(("2005", "2005", "CD", 1, "tmod", "DATE"))
        sentence = make_sentence(rows, sent_id="long")
        index = SentenceIndex([sentence], gazetteer)
        seed = SeedTriple(
            rel_lemma="win", rel_kind="verb", prep="in",
            left=SeedArg("arg1", "Nadal", "Nadal", "proper-noun", "E_NADAL"),
            right=SeedArg("argN", "2005", "2005", "cardinal"),
        )
        assert match_sentences(seed, index) == []
        # trimming one link brings the path inside the limit
        rows_short = rows[:5] + [
            ("Nadal", "Nadal", "NNP", 4, "pobj", "PERSON"),
            ("2005", "2005", "CD", 1, "tmod", "DATE"),
        ]
        sentence2 = make_sentence(rows_short, sent_id="short")
        index2 = SentenceIndex([sentence2], gazetteer)
        assert len(match_sentences(seed, index2)) == 1

    def test_rel_token_tie_breaks_to_minimal_total_path(self, gazetteer):
        # two "capital" tokens; the second is closer to both arguments
        sentence = make_sentence(
            [
                ("capital", "capital", "NN", 2, "nsubj"),
                ("matters", "matter", "VBZ", 0, "root"),
                ("in", "in", "IN", 2, "prep"),
                ("Botswana", "Botswana", "NNP", 7, "poss", "LOC"),
                ("'s", "'s", "POS", 4, "possessive"),
                ("own", "own", "JJ", 7, "amod"),
                ("capital", "capital", "NN", 3, "pobj"),
                ("of", "of", "IN", 7, "prep"),
                ("Gaborone", "Gaborone", "NNP", 8, "pobj", "LOC"),
            ],
            sent_id="two",
        )
        index = SentenceIndex([sentence], gazetteer)
        (pair,) = match_sentences(capital_seed(), index)
        assert pair.rel_index == 7


class TestSerialization:
    def test_seed_round_trip(self):
        seed = capital_seed()
        again = SeedTriple.from_json(json.loads(json.dumps(seed.to_json())))
        assert again == seed
