"""Co-occurrence counting, UMass and cv coherence against brute-force oracles."""

import math

import numpy as np
import pytest

from oracles import cv_oracle, umass_oracle, window_counts_oracle
from topicpipe.coherence import (
    WHOLE_DOC,
    CoherenceReport,
    cooccurrence_stats,
    cv,
    umass,
)
from topicpipe.corpus import TokenizerConfig, doc_tokens
from topicpipe.errors import DegenerateTopic
from topicpipe.topics import Topic, TopicSet


def topic_set(*term_lists):
    return TopicSet(
        topics=tuple(
            Topic(topic_id=i, terms=tuple((t, 1.0) for t in terms))
            for i, terms in enumerate(term_lists)
        ),
        n_terms=max(len(t) for t in term_lists),
    )


def corpus_tokens(corpus):
    config = TokenizerConfig()
    return [doc_tokens(d, config) for d in corpus]


class TestCooccurrenceStats:
    def test_whole_doc_hand_count(self):
        docs = [["a", "b"], ["a", "c"], ["b", "c"]]
        stats = cooccurrence_stats(docs, {"a", "b", "c"}, WHOLE_DOC)
        assert stats.count("a") == 2
        assert stats.pair_count("a", "b") == 1
        assert stats.pair_count("b", "a") == 1
        assert stats.n_windows == 3

    def test_window_wider_than_docs_equals_whole_doc(self):
        docs = [["x", "y", "z"], ["x", "q"], ["y"]]
        terms = {"x", "y", "z", "q"}
        wide = cooccurrence_stats(docs, terms, window=50)
        whole = cooccurrence_stats(docs, terms, WHOLE_DOC)
        assert wide.term_counts == whole.term_counts
        assert wide.pair_counts == whole.pair_counts
        assert wide.n_windows == whole.n_windows

    def test_absent_term_zero(self):
        stats = cooccurrence_stats([["a", "b"]], {"zz"}, WHOLE_DOC)
        assert stats.count("zz") == 0

    def test_sliding_window_counts_match_enumeration(self):
        rng = np.random.default_rng(30)
        docs = [
            [f"w{j}" for j in rng.integers(0, 8, size=rng.integers(1, 20))]
            for _ in range(40)
        ]
        terms = {f"w{j}" for j in range(8)}
        for window in (1, 2, 5, 11):
            stats = cooccurrence_stats(docs, terms, window)
            n_windows, term_counts, pair_counts = window_counts_oracle(docs, terms, window)
            assert stats.n_windows == n_windows
            assert stats.term_counts == term_counts
            assert stats.pair_counts == pair_counts

    def test_ngram_terms_counted(self):
        docs = [["atm", "card", "fail"], ["atm", "card"], ["card", "atm"]]
        stats = cooccurrence_stats(docs, {"atm_card", "card"}, WHOLE_DOC)
        assert stats.count("atm_card") == 2
        assert stats.count("card") == 3
        assert stats.pair_count("atm_card", "card") == 2

    def test_invalid_window(self):
        with pytest.raises(ValueError):
            cooccurrence_stats([["a"]], {"a"}, window=-2)


class TestUmass:
    def test_hand_computed_zero(self):
        docs = [["a", "b"], ["a", "c"], ["b", "c"]]
        stats = cooccurrence_stats(docs, {"a", "b"}, WHOLE_DOC)
        report = umass(topic_set(["a", "b"]), stats)
        # Single pair: ln((D(b, a) + 1) / D(a)) = ln(2/2) = 0.
        assert report.per_topic == (0.0,)
        assert report.aggregate == 0.0

    def test_always_cooccurring_positive(self):
        docs = [["x", "y"]] * 5 + [["z"]] * 3
        stats = cooccurrence_stats(docs, {"x", "y"}, WHOLE_DOC)
        report = umass(topic_set(["x", "y"]), stats)
        assert np.isclose(report.per_topic[0], math.log(6 / 5), atol=1e-12)
        assert report.per_topic[0] > 0

    def test_never_cooccurring_negative(self):
        docs = [["x"]] * 5 + [["y"]] * 5
        stats = cooccurrence_stats(docs, {"x", "y"}, WHOLE_DOC)
        report = umass(topic_set(["x", "y"]), stats)
        assert np.isclose(report.per_topic[0], math.log(1 / 5), atol=1e-12)

    def test_zero_frequency_terms_skipped_and_reported(self):
        docs = [["x", "y"]] * 4
        stats = cooccurrence_stats(docs, {"x", "y", "ghost"}, WHOLE_DOC)
        report = umass(topic_set(["x", "ghost", "y"]), stats)
        assert report.skipped == (("ghost",),)
        assert len(report.per_topic) == 1

    def test_degenerate_topic_raises(self):
        docs = [["x"]] * 3
        stats = cooccurrence_stats(docs, {"x", "missing"}, WHOLE_DOC)
        with pytest.raises(DegenerateTopic):
            umass(topic_set(["x", "missing"]), stats)

    def test_requires_whole_doc_stats(self):
        stats = cooccurrence_stats([["x", "y"]], {"x", "y"}, window=5)
        with pytest.raises(ValueError):
            umass(topic_set(["x", "y"]), stats)

    def test_matches_oracle_on_random_corpus(self, random_corpus):
        docs = corpus_tokens(random_corpus)
        term_lists = [
            ["word00", "word01", "word02", "word05", "word09"],
            ["word03", "word04", "word10", "word12"],
        ]
        stats = cooccurrence_stats(docs, {t for lst in term_lists for t in lst}, WHOLE_DOC)
        report = umass(topic_set(*term_lists), stats)
        oracle = umass_oracle(term_lists, docs)
        assert np.allclose(report.per_topic, oracle, atol=1e-12)
        assert np.isclose(report.aggregate, np.mean(oracle), atol=1e-12)


class TestCv:
    def test_terms_only_in_identical_windows_score_one(self):
        docs = [["a", "b", "c"]] * 4 + [["x", "y"]] * 6
        report = cv(topic_set(["a", "b", "c"]), docs, window=10)
        assert np.isclose(report.per_topic[0], 1.0, atol=1e-12)

    def test_matches_oracle_200_docs(self, random_corpus):
        docs = corpus_tokens(random_corpus)
        term_lists = [
            ["word00", "word01", "word02", "word05", "word09"],
            ["word03", "word07", "word11", "word15", "word20"],
        ]
        for window in (110, 5):
            report = cv(topic_set(*term_lists), docs, window=window)
            oracle = cv_oracle(term_lists, docs, window=window, epsilon=1e-12)
            assert np.allclose(report.per_topic, oracle, atol=1e-12)
            assert np.isclose(report.aggregate, np.mean(oracle), atol=1e-12)

    def test_scores_within_unit_interval(self, random_corpus):
        docs = corpus_tokens(random_corpus)
        report = cv(topic_set(["word00", "word01", "word18", "word25"]), docs)
        assert all(-1.0 <= s <= 1.0 for s in report.per_topic)

    def test_aggregate_is_mean(self, random_corpus):
        docs = corpus_tokens(random_corpus)
        report = cv(
            topic_set(["word00", "word01"], ["word02", "word03"], ["word04", "word06"]),
            docs,
        )
        assert np.isclose(report.aggregate, np.mean(report.per_topic), atol=1e-12)

    def test_invariant_under_document_permutation(self, random_corpus):
        docs = corpus_tokens(random_corpus)
        topics = topic_set(["word00", "word01", "word02"], ["word03", "word04", "word05"])
        base = cv(topics, docs)
        rng = np.random.default_rng(31)
        shuffled = [docs[i] for i in rng.permutation(len(docs))]
        assert np.allclose(cv(topics, shuffled).per_topic, base.per_topic, atol=1e-12)
        stats_a = cooccurrence_stats(docs, {"word00", "word01"}, WHOLE_DOC)
        stats_b = cooccurrence_stats(shuffled, {"word00", "word01"}, WHOLE_DOC)
        assert stats_a.term_counts == stats_b.term_counts
        assert stats_a.pair_counts == stats_b.pair_counts

    def test_invariant_under_corpus_duplication(self, random_corpus):
        docs = corpus_tokens(random_corpus)
        topics = topic_set(["word00", "word01", "word02"], ["word03", "word04", "word05"])
        base = cv(topics, docs)
        doubled = cv(topics, docs + docs)
        assert np.allclose(doubled.per_topic, base.per_topic, atol=1e-9)

    def test_missing_terms_dropped_and_logged(self, random_corpus):
        docs = corpus_tokens(random_corpus)
        report = cv(topic_set(["word00", "ghost_term", "word01"]), docs)
        assert report.skipped == (("ghost_term",),)

    def test_all_terms_missing_degenerate(self, random_corpus):
        docs = corpus_tokens(random_corpus)
        with pytest.raises(DegenerateTopic):
            cv(topic_set(["ghost1", "ghost2"]), docs)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            cv(topic_set(["a"]), [])


class TestReportSerialization:
    def test_json_roundtrip(self, random_corpus):
        docs = corpus_tokens(random_corpus)
        report = cv(topic_set(["word00", "word01"], ["word02", "word04"]), docs)
        back = CoherenceReport.from_json_dict(report.to_json_dict())
        assert back == report

    def test_csv_row_layout(self, random_corpus):
        docs = corpus_tokens(random_corpus)
        report = cv(topic_set(["word00", "word01"]), docs)
        row = report.csv_row("BERTopic-style", "kpca+kmeans")
        model, components, score = row.split(",")
        assert model == "BERTopic-style"
        assert components == "kpca+kmeans"
        assert float(score) == report.aggregate
