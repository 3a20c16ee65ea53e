"""Explainable semantic search over recommender-system dataset metadata.

The package splits into an offline half (validate metadata, build an index
file) and an online half (query the index from the CLI or over HTTP). Field
vectors are kept per metadata field so every relevance score can be traced
back to the field that produced it.
"""

from ds4rs.embedding import (
    EmbedderKind,
    EmbedderSpec,
    EmbeddingError,
    EmbeddingVector,
    ExternalEmbedder,
    ProviderConfig,
    ReferenceEmbedder,
    cosine,
    embed_reference,
    fnv1a64,
    tokenize,
)
from ds4rs.index import (
    FieldKind,
    IndexedDataset,
    IndexingError,
    SearchIndex,
    build_index,
    field_text,
    load_index,
    serialize_index,
)
from ds4rs.metadata import (
    DatasetMetadata,
    DatasetSize,
    Diagnostic,
    DiagnosticCode,
    RecommendationTask,
    Severity,
    ValidationReport,
    load_collection,
    parse_metadata,
    serialize_metadata,
)
from ds4rs.search import (
    FieldScore,
    SearchQuery,
    SearchResponse,
    SearchResult,
    SizeBucket,
    search,
    search_response,
    size_bucket,
)

__version__ = "0.1.0"

__all__ = [
    "DatasetMetadata",
    "DatasetSize",
    "Diagnostic",
    "DiagnosticCode",
    "EmbedderKind",
    "EmbedderSpec",
    "EmbeddingError",
    "EmbeddingVector",
    "ExternalEmbedder",
    "FieldKind",
    "FieldScore",
    "IndexedDataset",
    "IndexingError",
    "ProviderConfig",
    "RecommendationTask",
    "ReferenceEmbedder",
    "SearchIndex",
    "SearchQuery",
    "SearchResponse",
    "SearchResult",
    "Severity",
    "SizeBucket",
    "ValidationReport",
    "build_index",
    "cosine",
    "embed_reference",
    "field_text",
    "fnv1a64",
    "load_collection",
    "load_index",
    "parse_metadata",
    "search",
    "search_response",
    "serialize_index",
    "serialize_metadata",
    "size_bucket",
    "tokenize",
    "__version__",
]
