import string

import pytest
from hypothesis import given, settings, strategies as st

from textnovelty import DataError
from textnovelty.textproc import (FilterLists, RuleTagger, TextPipeline,
                                  acronym_of,
                                  expand_filter_lists, extract_noun_phrases,
                                  filter_terms, lemmatize, pos_tag,
                                  process_paper, tokenize)
from textnovelty.textproc.tagging import load_tag_lexicon

from conftest import make_record

MULLIS_TITLE = ("Specific Enzymatic Amplification of DNA In Vitro: "
                "The Polymerase Chain Reaction")


def phrases_of(text):
    tokens = lemmatize(pos_tag(tokenize(text)))
    return [" ".join(t.lemma for t in tokens[a:b])
            for a, b in extract_noun_phrases(tokens)]


class TestTokenize:
    def test_hyphen_kept(self):
        assert [t.surface for t in tokenize("X-ray diffraction.")] == \
            ["x-ray", "diffraction"]

    def test_empty(self):
        assert tokenize("") == []

    def test_punctuation_split(self):
        assert [t.surface for t in tokenize("DNA in vitro: PCR")] == \
            ["dna", "in", "vitro", "pcr"]

    def test_leading_trailing_hyphens_stripped(self):
        assert [t.surface for t in tokenize("-ray -- beta-")] == ["ray", "beta"]

    def test_sentence_index_advances(self):
        tokens = tokenize("alpha beta. gamma; delta")
        assert [t.sentence for t in tokens] == [0, 0, 1, 2]

    @given(st.text(alphabet=string.printable, max_size=120))
    def test_never_raises_and_tokens_clean(self, text):
        for token in tokenize(text):
            assert token.surface
            assert not token.surface.startswith("-")
            assert not token.surface.endswith("-")
            assert token.surface == token.surface.lower()


class TestPosTag:
    def test_suffix_rules(self):
        tagger = RuleTagger({})
        assert tagger("enzymatic") == "ADJ"
        assert tagger("42") == "NUM"
        assert tagger("amplification") == "NOUN"
        assert tagger("crystallize") == "VERB"
        assert tagger("rapidly") == "ADV"
        assert tagger("plasmid") == "NOUN"  # default

    def test_lexicon_overrides_suffix(self):
        tagger = RuleTagger({"novel": "ADJ"})
        assert tagger("novel") == "ADJ"

    def test_every_token_tagged(self):
        tokens = pos_tag(tokenize(MULLIS_TITLE))
        assert all(t.pos for t in tokens)

    @given(st.text(alphabet=string.ascii_lowercase + "-0123456789",
                   min_size=1, max_size=20))
    def test_fallback_total(self, surface):
        tagger = RuleTagger(load_tag_lexicon())
        from textnovelty.textproc.tagging import TAGSET
        assert tagger(surface) in TAGSET


class TestChunking:
    def test_mullis_example(self):
        assert phrases_of(MULLIS_TITLE) == [
            "specific enzymatic amplification", "dna", "vitro",
            "polymerase chain reaction",
        ]

    def test_all_verbs_no_phrases(self):
        assert phrases_of("is being shown") == []

    def test_adj_noun_pair(self):
        assert phrases_of("Giant magnetoresistance") == ["giant magnetoresistance"]

    def test_comma_separates_coordinated_nouns(self):
        assert phrases_of("nitroglycerin, nitroprusside") == \
            ["nitroglycerin", "nitroprusside"]


class TestLemmatize:
    def test_plural_rule(self):
        (token,) = lemmatize(pos_tag(tokenize("nanotubes")))
        assert token.lemma == "nanotube"

    def test_hyphenated_constituents(self):
        (token,) = lemmatize(pos_tag(tokenize("x-rays")))
        assert token.lemma == "x-ray"

    def test_fixpoint(self):
        (token,) = lemmatize(pos_tag(tokenize("dna")))
        assert token.lemma == "dna"

    def test_irregular_from_lexicon(self):
        (token,) = lemmatize(pos_tag(tokenize("criteria")))
        assert token.lemma == "criterion"


class TestExpandFilterLists:
    def test_hyphenated_stop_constituent(self):
        seed = FilterLists(stop_words={"journal"}, removal_words=set())
        out = expand_filter_lists(seed, {"journal-based": 50}, min_papers=10)
        assert "journal-based" in out.stop_words

    def test_hyphenated_all_removal(self):
        seed = FilterLists(stop_words=set(),
                           removal_words={"autonomous", "movement"})
        out = expand_filter_lists(seed, {"autonomous-movement": 50}, min_papers=10)
        assert "autonomous-movement" in out.removal_words

    def test_number_only_becomes_stop(self):
        seed = FilterLists(stop_words=set(), removal_words=set())
        out = expand_filter_lists(seed, {"2024": 99}, min_papers=10)
        assert out.is_stop("2024")

    def test_below_threshold_ignored(self):
        seed = FilterLists(stop_words={"journal"}, removal_words=set())
        out = expand_filter_lists(seed, {"journal-based": 3}, min_papers=10)
        assert "journal-based" not in out.stop_words

    def test_overlapping_seeds_fatal(self):
        with pytest.raises(DataError):
            FilterLists(stop_words={"x"}, removal_words={"x"})


class TestFilterTerms:
    LISTS = FilterLists(
        stop_words={"the", "of", "a", "review"},
        removal_words={"autonomous", "movement"})

    def test_leading_stop_stripped(self):
        terms = filter_terms([], [("the", "polymerase", "chain", "reaction")],
                             self.LISTS)
        assert terms.phrases == {"polymerase_chain_reaction"}

    def test_removal_words_kept_for_pairs_only(self):
        terms = filter_terms(["autonomous", "movement", "nanotube"], [],
                             self.LISTS)
        assert terms.words == {"nanotube"}
        assert terms.removal_kept == {"autonomous", "movement"}
        assert ("autonomous", "movement") not in terms.word_pairs
        assert ("autonomous", "nanotube") in terms.word_pairs
        assert ("movement", "nanotube") in terms.word_pairs

    def test_phrase_with_interior_stop_dropped(self):
        terms = filter_terms([], [("science", "of", "the", "university")],
                             self.LISTS)
        assert terms.phrases == set()

    def test_all_removal_phrase_dropped(self):
        terms = filter_terms([], [("autonomous", "movement")], self.LISTS)
        assert terms.phrases == set()

    def test_acronym_pair_dropped(self):
        terms = filter_terms(
            [], [("pcr",), ("polymerase", "chain", "reaction")], self.LISTS)
        assert terms.phrases == {"pcr", "polymerase_chain_reaction"}
        assert terms.phrase_pairs == set()

    def test_number_word_filtered_structurally(self):
        terms = filter_terms(["1984", "nanotube"], [], self.LISTS)
        assert terms.words == {"nanotube"}


class TestAcronym:
    def test_pcr(self):
        assert acronym_of("pcr", "polymerase_chain_reaction")
        assert acronym_of("polymerase_chain_reaction", "pcr")

    def test_length_mismatch(self):
        assert not acronym_of("dna", "deoxyribonucleic_acid")

    def test_identical_not_acronym(self):
        assert not acronym_of("pcr", "pcr")

    def test_hyphen_constituents_count(self):
        assert acronym_of("xrd", "x-ray_diffraction")


class TestProcessPaper:
    def test_title_only_equals_full_without_abstract(self, seed_pipeline):
        record = make_record("p", 1980, "Giant magnetoresistance of superlattices")
        lists = seed_pipeline.filter_lists_
        assert process_paper(record, lists, "full") == \
            process_paper(record, lists, "title_only")

    def test_title_only_ignores_abstract(self, seed_pipeline):
        record = make_record("p", 1980, "Alpha decay",
                             abstract="Novel zirconium isotopes")
        lists = seed_pipeline.filter_lists_
        full = process_paper(record, lists, "full")
        title_only = process_paper(record, lists, "title_only")
        assert "zirconium" in full.words
        assert "zirconium" not in title_only.words

    def test_mullis_terms(self, seed_pipeline):
        record = make_record("mullis", 1986, MULLIS_TITLE)
        terms = seed_pipeline.process_record(record)
        assert {"specific", "enzymatic", "amplification", "dna", "vitro",
                "polymerase", "chain", "reaction"} <= terms.words
        assert "polymerase_chain_reaction" in terms.phrases
        assert terms.word_count == len(terms.words)
        assert terms.phrase_count == len(terms.phrases)

    def test_deterministic(self, seed_pipeline):
        record = make_record("p", 1980, MULLIS_TITLE,
                             abstract="A method for in vitro amplification.")
        first = seed_pipeline.process_record(record)
        second = seed_pipeline.process_record(record)
        assert first == second

    def test_bad_mode(self, seed_pipeline):
        record = make_record("p", 1980, "Anything")
        with pytest.raises(ValueError):
            process_paper(record, seed_pipeline.filter_lists_, "both")


class TestTextPipelineFit:
    RECORD = None  # set per test via make_record

    @staticmethod
    def _survivors(pipe, records):
        pipe.fit(records)
        terms = pipe.process_record(records[0])
        return terms.words | terms.removal_kept

    def test_expansion_uses_corpus_vocab(self):
        # "journal-base" (lemma of journal-based) has a stop constituent,
        # so once it is common enough it is filtered everywhere
        records = [make_record(f"p{i}", 1950, "Journal-based citation impact")
                   for i in range(30)]
        pipe = TextPipeline(stop_words={"journal"}, removal_words=set(),
                            natural_stop_words=set(), min_papers=10)
        survivors = self._survivors(pipe, records)
        assert pipe.filter_lists_.is_stop("journal-base")
        assert not any("journal" in w for w in survivors)

    def test_per_million_threshold_scales_down(self):
        records = [make_record(f"p{i}", 1950, "Journal-based citation impact")
                   for i in range(3)]
        # an absolute threshold of 1000 never fires on 3 papers
        fixed = TextPipeline(stop_words={"journal"}, removal_words=set(),
                             natural_stop_words=set(), min_papers=1000)
        assert "journal-base" in self._survivors(fixed, records)
        scaled = TextPipeline(stop_words={"journal"}, removal_words=set(),
                              natural_stop_words=set(),
                              min_papers_per_million=300_000.0)
        # threshold scales to ~1 paper for a 3-paper corpus
        assert "journal-base" not in self._survivors(scaled, records)

    def test_transform_requires_fit(self):
        from sklearn.exceptions import NotFittedError
        with pytest.raises(NotFittedError):
            TextPipeline().transform([])


WORD_TEXTS = st.lists(
    st.text(alphabet=string.ascii_lowercase, min_size=1, max_size=8),
    min_size=0, max_size=12)


class TestProperties:
    @settings(max_examples=60)
    @given(WORD_TEXTS)
    def test_invariants_on_random_text(self, words):
        lists = FilterLists(stop_words={"the", "of"},
                            removal_words={"general", "movement"})
        terms = filter_terms(words, [tuple(words[:3])] if words else [], lists)
        universe = terms.words | terms.removal_kept
        for member in universe:
            assert not lists.is_stop(member)
        for a, b in terms.word_pairs:
            assert a < b
            assert a in universe and b in universe
            assert not (a in terms.removal_kept and b in terms.removal_kept)
        for a, b in terms.phrase_pairs:
            assert a < b
            assert a in terms.phrases and b in terms.phrases
            assert not acronym_of(a, b) and not acronym_of(b, a)
        for phrase in terms.phrases:
            assert not any(lists.is_stop(p) for p in phrase.split("_"))
