"""Class-based TF-IDF weights and top-term extraction."""

import math

import numpy as np
import pytest
from scipy import sparse

from topicpipe.cluster import ClusterAssignment
from topicpipe.corpus import CountMatrix, Vocabulary
from topicpipe.errors import EmptyClass
from topicpipe.topics import TopicSet, class_tfidf, top_terms


def counts_of(rows):
    return CountMatrix(matrix=sparse.csr_matrix(np.asarray(rows)))


def vocab_of(*terms):
    return Vocabulary(terms=tuple(terms), ngram_range=(1, 1), doc_freq={t: 1 for t in terms})


def assignment_of(labels):
    return ClusterAssignment(labels=np.asarray(labels))


class TestClassTfidf:
    def test_two_class_hand_computation(self):
        counts = counts_of([[4, 1, 0], [0, 2, 3]])
        weights, class_ids = class_tfidf(counts, assignment_of([0, 1]))
        assert class_ids == [0, 1]
        # totals are 5 and 5, A = 5, f = (4, 3, 3).
        expected = np.array(
            [
                [0.8 * math.log(1 + 5 / 4), 0.2 * math.log(1 + 5 / 3), 0.0],
                [0.0, 0.4 * math.log(1 + 5 / 3), 0.6 * math.log(1 + 5 / 3)],
            ]
        )
        assert np.allclose(weights, expected, atol=1e-12)

    def test_absent_term_zero_weight(self):
        counts = counts_of([[2, 0], [0, 3]])
        weights, _ = class_tfidf(counts, assignment_of([0, 1]))
        assert weights[0, 1] == 0.0
        assert weights[1, 0] == 0.0

    def test_single_class_ranking_equals_tf_ranking(self):
        tf = np.array([7, 3, 5, 1, 2])
        counts = counts_of([tf])
        weights, _ = class_tfidf(counts, assignment_of([0]))
        total = tf.sum()
        direct = (tf / total) * np.log1p(total / tf)
        assert np.allclose(weights[0], direct, atol=1e-12)
        assert list(np.argsort(-weights[0])) == list(np.argsort(-tf))

    def test_invariant_under_document_duplication(self):
        rows = [[3, 0, 2, 1], [1, 4, 0, 0], [0, 2, 2, 5]]
        labels = [0, 1, 1]
        base, _ = class_tfidf(counts_of(rows), assignment_of(labels))
        doubled, _ = class_tfidf(counts_of(rows + rows), assignment_of(labels + labels))
        assert np.allclose(base, doubled, atol=1e-12)

    def test_tf_fractions_sum_to_one_per_class(self):
        rows = [[3, 1, 2], [2, 2, 2], [1, 0, 5]]
        counts = counts_of(rows)
        weights, class_ids = class_tfidf(counts, assignment_of([0, 1, 1]))
        tf = np.array([[3, 1, 2], [3, 2, 7]], dtype=float)
        damp = np.log1p(tf.sum(axis=1).mean() / tf.sum(axis=0))
        fractions = weights / damp[None, :]
        assert np.allclose(fractions.sum(axis=1), 1.0, atol=1e-12)

    def test_noise_documents_excluded(self):
        rows = [[2, 1], [1, 3], [9, 9]]
        with_noise, _ = class_tfidf(counts_of(rows), assignment_of([0, 1, -1]))
        without, _ = class_tfidf(counts_of(rows[:2]), assignment_of([0, 1]))
        assert np.allclose(with_noise, without, atol=1e-15)

    def test_empty_class_raises(self):
        counts = counts_of([[1, 2], [0, 0]])
        with pytest.raises(EmptyClass):
            class_tfidf(counts, assignment_of([0, 1]))

    def test_all_noise_raises(self):
        with pytest.raises(EmptyClass):
            class_tfidf(counts_of([[1, 0]]), assignment_of([-1]))

    def test_weights_non_negative(self):
        rng = np.random.default_rng(21)
        rows = rng.integers(0, 6, size=(10, 7))
        rows[:, 0] += 1
        labels = rng.integers(0, 3, size=10)
        weights, _ = class_tfidf(counts_of(rows), assignment_of(labels))
        assert np.all(weights >= 0.0)


class TestTopTerms:
    def test_unique_max_comes_first(self):
        vocab = vocab_of("alpha", "beta", "gamma")
        weights = np.array([[0.1, 0.9, 0.3]])
        topics = top_terms(weights, vocab, n_terms=2)
        assert topics.topics[0].term_list == ("beta", "gamma")

    def test_n_terms_beyond_vocab_no_padding(self):
        vocab = vocab_of("alpha", "beta")
        topics = top_terms(np.array([[0.5, 0.2]]), vocab, n_terms=10)
        assert topics.topics[0].term_list == ("alpha", "beta")
        assert len(topics.topics[0].terms) == 2

    def test_tie_broken_lexicographically(self):
        vocab = vocab_of("zeta", "alpha", "mid")
        weights = np.array([[0.4, 0.4, 0.1]])
        topics = top_terms(weights, vocab, n_terms=3)
        assert topics.topics[0].term_list == ("alpha", "zeta", "mid")

    def test_stable_pure_function(self):
        rng = np.random.default_rng(22)
        vocab = vocab_of(*[f"term{i}" for i in range(12)])
        weights = rng.random((3, 12))
        a = top_terms(weights, vocab, n_terms=5)
        b = top_terms(weights, vocab, n_terms=5)
        assert a == b

    def test_class_ids_preserved(self):
        vocab = vocab_of("alpha", "beta")
        weights = np.array([[1.0, 0.0], [0.0, 1.0]])
        topics = top_terms(weights, vocab, n_terms=1, class_ids=[3, 7])
        assert [t.topic_id for t in topics.topics] == [3, 7]

    def test_n_terms_precondition(self):
        with pytest.raises(ValueError):
            top_terms(np.array([[1.0]]), vocab_of("alpha"), n_terms=0)


class TestTopicSetSerialization:
    def test_json_roundtrip(self):
        vocab = vocab_of("alpha", "beta", "gamma")
        topics = top_terms(np.array([[0.3, 0.6, 0.1], [0.2, 0.1, 0.9]]), vocab, n_terms=2)
        back = TopicSet.from_json_dict(topics.to_json_dict())
        assert back == topics

    def test_markdown_layout(self):
        vocab = vocab_of("card", "atm")
        topics = top_terms(np.array([[0.2, 0.8]]), vocab, n_terms=2)
        md = topics.to_markdown()
        assert md.splitlines()[0] == "| Topic | Terms |"
        assert "| Topic 1 | atm, card |" in md
