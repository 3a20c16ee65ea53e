"""Online retrieval: score, filter, rank, and explain.

A query is embedded once, compared against every stored field vector with
cosine similarity, and each dataset's relevance is the maximum similarity
across its fields. Results carry the full per-field score breakdown so a
caller can always see which field drove a match. Ranking is total and
reproducible: relevance descending, ties broken by dataset id ascending.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ds4rs.embedding import (
    DegenerateVectorError,
    Embedder,
    EmbeddingVector,
    EmptyTextError,
    cosine,
)
from ds4rs.index import FIELD_ORDER, FieldKind, IndexedDataset, SearchIndex
from ds4rs.metadata import DatasetMetadata, DatasetSize, RecommendationTask

__all__ = [
    "SizeBucket",
    "size_bucket",
    "SearchQuery",
    "FieldScore",
    "SearchResult",
    "SearchResponse",
    "MAX_QUERY_LENGTH",
    "MAX_LIMIT",
    "DEFAULT_LIMIT",
    "score_dataset",
    "apply_filters",
    "search",
    "search_response",
    "SearchError",
    "EmptyQueryError",
    "FingerprintMismatchError",
]

MAX_QUERY_LENGTH = 1000
DEFAULT_LIMIT = 20
MAX_LIMIT = 100

SMALL_MAX_INTERACTIONS = 1_000_000
MEDIUM_MAX_INTERACTIONS = 100_000_000


class SizeBucket(str, Enum):
    """Coarse dataset-size tiers derived from the interaction count."""

    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"
    UNKNOWN = "unknown"


def size_bucket(size: DatasetSize) -> SizeBucket:
    """small < 1M interactions <= medium < 100M <= large; no count -> unknown."""
    count = size.num_interactions
    if count is None:
        return SizeBucket.UNKNOWN
    if count < SMALL_MAX_INTERACTIONS:
        return SizeBucket.SMALL
    if count < MEDIUM_MAX_INTERACTIONS:
        return SizeBucket.MEDIUM
    return SizeBucket.LARGE


class SearchError(Exception):
    """Base class for query-time failures."""


class EmptyQueryError(SearchError):
    """The query text is blank or encodes to no usable vector."""


class FingerprintMismatchError(SearchError):
    """Query embedder and index were built in different vector spaces."""

    def __init__(self, query_fingerprint: str, index_fingerprint: str) -> None:
        super().__init__(
            f"query embedder '{query_fingerprint}' does not match "
            f"index embedder '{index_fingerprint}'"
        )
        self.query_fingerprint = query_fingerprint
        self.index_fingerprint = index_fingerprint


@dataclass(frozen=True)
class SearchQuery:
    """Free-form query text plus optional categorical filters."""

    text: str
    size_filter: frozenset[SizeBucket] | None = None
    task_filter: frozenset[RecommendationTask] | None = None
    domain_filter: frozenset[str] | None = None
    limit: int = DEFAULT_LIMIT

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise EmptyQueryError("query text must not be empty")
        if len(self.text) > MAX_QUERY_LENGTH:
            raise ValueError(f"query text exceeds {MAX_QUERY_LENGTH} characters")
        if not 1 <= self.limit <= MAX_LIMIT:
            raise ValueError(f"limit must be within [1, {MAX_LIMIT}]")


@dataclass(frozen=True)
class FieldScore:
    field: FieldKind
    score: float


@dataclass(frozen=True)
class SearchResult:
    """One ranked hit with its full per-field explanation."""

    dataset: DatasetMetadata
    relevance: float
    explanation: tuple[FieldScore, ...]

    @property
    def top_field(self) -> FieldKind:
        return self.explanation[0].field


@dataclass(frozen=True)
class SearchResponse:
    """Ranked results plus the filter-surviving count before truncation."""

    results: tuple[SearchResult, ...]
    total_matched: int


def score_dataset(
    query_vec: EmbeddingVector, entry: IndexedDataset
) -> tuple[float, tuple[FieldScore, ...]]:
    """Cosine per present field; relevance is the maximum.

    The explanation lists every present field sorted by score descending,
    ties broken by canonical field order.
    """
    scores = [
        FieldScore(field, cosine(query_vec, entry.field_vectors[field]))
        for field in entry.present_fields()
    ]
    explanation = tuple(
        sorted(scores, key=lambda s: (-s.score, FIELD_ORDER.index(s.field)))
    )
    return explanation[0].score, explanation


def apply_filters(
    entries: tuple[IndexedDataset, ...] | list[IndexedDataset], query: SearchQuery
) -> list[IndexedDataset]:
    """Keep entries satisfying every active filter.

    Size filtering is strict: the 'unknown' bucket passes only when it is
    explicitly requested, so a size filter never returns datasets that might
    violate it. Domain matching is case-insensitive and exact per domain.
    """
    domain_filter = (
        frozenset(d.lower() for d in query.domain_filter)
        if query.domain_filter is not None
        else None
    )
    kept = []
    for entry in entries:
        if query.size_filter is not None and entry.size_bucket not in query.size_filter:
            continue
        if query.task_filter is not None and not (
            entry.metadata.tasks & query.task_filter
        ):
            continue
        if domain_filter is not None and not (
            {d.lower() for d in entry.metadata.domains} & domain_filter
        ):
            continue
        kept.append(entry)
    return kept


def search_response(
    index: SearchIndex, query: SearchQuery, query_embedder: Embedder
) -> SearchResponse:
    """Run one search: embed the query once, filter, score, rank, truncate."""
    if query_embedder.spec.fingerprint != index.embedder.fingerprint:
        raise FingerprintMismatchError(
            query_embedder.spec.fingerprint, index.embedder.fingerprint
        )
    try:
        query_vec = query_embedder.embed(query.text)
    except (EmptyTextError, DegenerateVectorError) as exc:
        raise EmptyQueryError(f"query encodes to no usable vector: {exc}") from exc

    survivors = apply_filters(index.entries, query)
    results = []
    for entry in survivors:
        relevance, explanation = score_dataset(query_vec, entry)
        results.append(
            SearchResult(
                dataset=entry.metadata, relevance=relevance, explanation=explanation
            )
        )
    results.sort(key=lambda r: (-r.relevance, r.dataset.id))
    return SearchResponse(
        results=tuple(results[: query.limit]), total_matched=len(survivors)
    )


def search(
    index: SearchIndex, query: SearchQuery, query_embedder: Embedder
) -> list[SearchResult]:
    """Ranked results only; see :func:`search_response` for the total count."""
    return list(search_response(index, query, query_embedder).results)
