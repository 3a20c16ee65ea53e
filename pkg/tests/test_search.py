import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import collection_from_docs
from ds4rs.embedding import ReferenceEmbedder, embed_reference
from ds4rs.index import FieldKind, IndexedDataset, build_index
from ds4rs.metadata import DatasetSize, RecommendationTask, parse_metadata
from ds4rs.search import (
    DEFAULT_LIMIT,
    EmptyQueryError,
    FingerprintMismatchError,
    MAX_LIMIT,
    MAX_QUERY_LENGTH,
    SearchQuery,
    SizeBucket,
    apply_filters,
    score_dataset,
    search,
    search_response,
    size_bucket,
)
from oracle import oracle_field_text, oracle_search
from synth import make_corpus, make_query


class TestSizeBucket:
    @pytest.mark.parametrize(
        ("count", "expected"),
        [
            (0, SizeBucket.SMALL),
            (50_000, SizeBucket.SMALL),
            (999_999, SizeBucket.SMALL),
            (1_000_000, SizeBucket.MEDIUM),
            (25_000_000, SizeBucket.MEDIUM),
            (99_999_999, SizeBucket.MEDIUM),
            (100_000_000, SizeBucket.LARGE),
            (4_000_000_000, SizeBucket.LARGE),
        ],
    )
    def test_thresholds(self, count, expected):
        assert size_bucket(DatasetSize(num_interactions=count)) is expected

    def test_absent_count_is_unknown(self):
        assert size_bucket(DatasetSize()) is SizeBucket.UNKNOWN
        # only num_interactions decides the bucket
        assert size_bucket(DatasetSize(num_users=10**9)) is SizeBucket.UNKNOWN


class TestSearchQuery:
    def test_defaults(self):
        query = SearchQuery(text="movies")
        assert query.limit == DEFAULT_LIMIT == 20
        assert query.size_filter is None

    def test_blank_text_rejected(self):
        with pytest.raises(EmptyQueryError):
            SearchQuery(text="   ")

    def test_too_long_text_rejected(self):
        with pytest.raises(ValueError):
            SearchQuery(text="x" * (MAX_QUERY_LENGTH + 1))

    @pytest.mark.parametrize("limit", [0, -3, MAX_LIMIT + 1])
    def test_limit_bounds(self, limit):
        with pytest.raises(ValueError):
            SearchQuery(text="movies", limit=limit)


def entry_with_uniform_vectors(text="movies") -> IndexedDataset:
    metadata = parse_metadata(json.dumps({
        "schema_version": "1",
        "id": "uniform-set",
        "name": "Uniform",
        "description": "Same vector on every field.",
        "tasks": ["top_n"],
        "domains": ["movies"],
        "size": {"num_interactions": 10},
        "record_examples": [],
        "download_url": "https://example.org/u.zip",
    }))
    vector = embed_reference(text, 64)
    return IndexedDataset(
        metadata=metadata,
        field_vectors={field: vector for field in FieldKind},
        size_bucket=SizeBucket.SMALL,
    )


class TestScoreDataset:
    def test_tie_breaks_in_canonical_field_order(self):
        entry = entry_with_uniform_vectors()
        query_vec = embed_reference("movies", 64)
        relevance, explanation = score_dataset(query_vec, entry)
        assert relevance == pytest.approx(1.0, abs=1e-6)
        assert [fs.field for fs in explanation] == [
            FieldKind.NAME, FieldKind.DESCRIPTION, FieldKind.TASKS, FieldKind.DOMAINS
        ]

    def test_max_dominance(self, corpus_index):
        query_vec = embed_reference("movie ratings benchmark", 256)
        for entry in corpus_index.entries:
            relevance, explanation = score_dataset(query_vec, entry)
            scores = [fs.score for fs in explanation]
            assert relevance == max(scores)
            assert all(relevance >= s for s in scores)
            assert len(explanation) == len(entry.field_vectors)

    def test_explanation_sorted_descending(self, corpus_index):
        query_vec = embed_reference("click logs advertising", 256)
        for entry in corpus_index.entries:
            _, explanation = score_dataset(query_vec, entry)
            scores = [fs.score for fs in explanation]
            assert scores == sorted(scores, reverse=True)


class TestApplyFilters:
    def build(self, docs):
        collection = collection_from_docs(docs)
        return build_index(collection, ReferenceEmbedder(64))

    def base_doc(self, i, **overrides):
        doc = {
            "schema_version": "1",
            "id": f"set-{i}",
            "name": f"Set {i}",
            "description": "Filterable dataset.",
            "tasks": ["top_n"],
            "domains": ["movies"],
            "size": {"num_interactions": 10},
            "record_examples": [],
            "download_url": "https://example.org/s.zip",
        }
        doc.update(overrides)
        return doc

    def test_size_filter_excludes_unknown(self):
        index = self.build([
            self.base_doc(0, size={"num_interactions": 10}),
            self.base_doc(1, size={"num_interactions": 5_000_000}),
            self.base_doc(2, size={}),
        ])
        query = SearchQuery(text="x", size_filter=frozenset({SizeBucket.SMALL}))
        kept = apply_filters(index.entries, query)
        assert [e.metadata.id for e in kept] == ["set-0"]

    def test_unknown_passes_when_selected(self):
        index = self.build([
            self.base_doc(0, size={"num_interactions": 10}),
            self.base_doc(2, size={}),
        ])
        query = SearchQuery(
            text="x", size_filter=frozenset({SizeBucket.UNKNOWN, SizeBucket.SMALL})
        )
        kept = apply_filters(index.entries, query)
        assert [e.metadata.id for e in kept] == ["set-0", "set-2"]

    def test_task_filter_intersects(self):
        index = self.build([
            self.base_doc(0, tasks=["ctr_prediction", "top_n"]),
            self.base_doc(1, tasks=["rating_prediction"]),
        ])
        query = SearchQuery(
            text="x", task_filter=frozenset({RecommendationTask.CTR_PREDICTION})
        )
        kept = apply_filters(index.entries, query)
        assert [e.metadata.id for e in kept] == ["set-0"]

    def test_domain_filter_case_insensitive(self):
        index = self.build([
            self.base_doc(0, domains=["Movies"]),
            self.base_doc(1, domains=["books"]),
        ])
        query = SearchQuery(text="x", domain_filter=frozenset({"mOvIeS"}))
        kept = apply_filters(index.entries, query)
        assert [e.metadata.id for e in kept] == ["set-0"]

    def test_no_filters_keeps_all(self, corpus_index):
        query = SearchQuery(text="x")
        assert len(apply_filters(corpus_index.entries, query)) == 3


class TestSearch:
    def test_identity_retrieval_on_fixture(self, corpus_docs, corpus_index):
        embedder = ReferenceEmbedder(256)
        for doc in corpus_docs:
            query = SearchQuery(text=oracle_field_text(doc, "name"))
            results = search(corpus_index, query, embedder)
            assert results[0].dataset.id == doc["id"]
            assert results[0].relevance == pytest.approx(1.0, abs=1e-6)

    def test_ranking_sound(self, corpus_index):
        embedder = ReferenceEmbedder(256)
        results = search(corpus_index, SearchQuery(text="ratings reviews"), embedder)
        pairs = [(-r.relevance, r.dataset.id) for r in results]
        assert pairs == sorted(pairs)

    def test_limit_contract(self, corpus_index):
        embedder = ReferenceEmbedder(256)
        for limit in (1, 2, 3, 50):
            response = search_response(
                corpus_index, SearchQuery(text="data", limit=limit), embedder
            )
            assert len(response.results) == min(limit, response.total_matched)
            assert response.total_matched == 3

    def test_fingerprint_mismatch(self, corpus_index):
        with pytest.raises(FingerprintMismatchError):
            search(corpus_index, SearchQuery(text="x"), ReferenceEmbedder(128))

    def test_untokenizable_query(self, corpus_index):
        with pytest.raises(EmptyQueryError):
            search(corpus_index, SearchQuery(text="!!!"), ReferenceEmbedder(256))

    def test_empty_index(self):
        from ds4rs.metadata import Collection

        index = build_index(Collection([], []), ReferenceEmbedder(256))
        response = search_response(index, SearchQuery(text="x"), ReferenceEmbedder(256))
        assert response.results == ()
        assert response.total_matched == 0

    @given(st.integers(0, 10**9))
    @settings(max_examples=25, deadline=None)
    def test_matches_oracle_on_random_corpora(self, seed):
        rng = random.Random(seed)
        docs = make_corpus(rng, rng.randint(2, 10))
        collection = collection_from_docs(docs)
        index = build_index(collection, ReferenceEmbedder(64))
        embedder = ReferenceEmbedder(64)
        for _ in range(3):
            text = make_query(rng, docs)
            try:
                response = search_response(index, SearchQuery(text=text), embedder)
            except EmptyQueryError:
                continue
            total, expected = oracle_search(docs, text, 64)
            assert response.total_matched == total
            oracle_rel = {row[0]: row[1] for row in expected}
            ids = [r.dataset.id for r in response.results]
            assert sorted(ids) == sorted(oracle_rel)
            for result in response.results:
                assert result.relevance == pytest.approx(
                    oracle_rel[result.dataset.id], abs=1e-6
                )
            # Rankings must agree except where relevances tie within the
            # float32/float64 noise floor; exact ties break by id ascending.
            pairs = [(-r.relevance, r.dataset.id) for r in response.results]
            assert pairs == sorted(pairs)
            for earlier, later in zip(ids, ids[1:]):
                assert oracle_rel[later] <= oracle_rel[earlier] + 1e-6
