"""Offline indexing pipeline and the immutable search index.

``build_index`` encodes the four searchable fields (name, description,
tasks, domains) of every dataset in a collection and assembles a
:class:`SearchIndex` that the online side serves read-only. Indexes
serialize to a canonical, byte-deterministic JSON document with vectors
stored as base64 little-endian float32, so the same collection always
produces the same bytes on any platform.
"""

from __future__ import annotations

import base64
import json
import logging
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum

import numpy as np

from ds4rs.embedding import (
    DegenerateVectorError,
    Embedder,
    EmbedderKind,
    EmbedderSpec,
    EmbeddingError,
    EmbeddingVector,
    EmptyTextError,
)
from ds4rs.metadata import (
    TASK_LABELS,
    Collection,
    DatasetMetadata,
    metadata_to_document,
    parse_metadata_report,
)

__all__ = [
    "FieldKind",
    "FIELD_ORDER",
    "IndexedDataset",
    "SearchIndex",
    "INDEX_FORMAT_VERSION",
    "INDEX_FILE_EXTENSION",
    "field_text",
    "build_index",
    "serialize_index",
    "load_index",
    "IndexingError",
    "EmbedderFailureError",
    "CorruptIndexError",
    "UnsupportedVersionError",
    "NormViolationError",
]

logger = logging.getLogger(__name__)

INDEX_FORMAT_VERSION = "1"
INDEX_FILE_EXTENSION = ".ds4rs-index.json"

# Norm tolerance applied to vectors decoded from an index file. Laxer than
# the encoding-time tolerance to absorb cross-platform float32 round-trips.
LOAD_NORM_TOLERANCE = 1e-5


class FieldKind(str, Enum):
    """The metadata fields that are embedded, in canonical order."""

    NAME = "name"
    DESCRIPTION = "description"
    TASKS = "tasks"
    DOMAINS = "domains"


FIELD_ORDER: tuple[FieldKind, ...] = (
    FieldKind.NAME,
    FieldKind.DESCRIPTION,
    FieldKind.TASKS,
    FieldKind.DOMAINS,
)


class IndexingError(Exception):
    """Base class for index build/load failures."""


class EmbedderFailureError(IndexingError):
    """The embedder failed while building; partial indexes are never emitted."""

    def __init__(self, dataset_id: str, field: FieldKind, cause: str) -> None:
        super().__init__(f"embedding failed for dataset '{dataset_id}' field '{field.value}': {cause}")
        self.dataset_id = dataset_id
        self.field = field


class CorruptIndexError(IndexingError):
    """The index document is structurally broken or violates an invariant."""


class UnsupportedVersionError(IndexingError):
    def __init__(self, found: str) -> None:
        super().__init__(f"unsupported index format version {found!r} (expected '{INDEX_FORMAT_VERSION}')")
        self.found = found


class NormViolationError(IndexingError):
    def __init__(self, dataset_id: str, field: str, norm: float) -> None:
        super().__init__(f"vector for dataset '{dataset_id}' field '{field}' is not unit-norm (|v| = {norm!r})")
        self.dataset_id = dataset_id
        self.field = field


@dataclass(frozen=True)
class IndexedDataset:
    """One dataset inside an index: full metadata for display plus the
    per-field embeddings that participate in scoring."""

    metadata: DatasetMetadata
    field_vectors: dict[FieldKind, EmbeddingVector]
    size_bucket: "SizeBucket"  # noqa: F821 - defined in ds4rs.search

    def present_fields(self) -> tuple[FieldKind, ...]:
        return tuple(f for f in FIELD_ORDER if f in self.field_vectors)


@dataclass(frozen=True)
class SearchIndex:
    """Immutable output of the offline pipeline; safe to share across threads."""

    embedder: EmbedderSpec
    built_at: str
    entries: tuple[IndexedDataset, ...]

    def __len__(self) -> int:
        return len(self.entries)


def field_text(metadata: DatasetMetadata, field: FieldKind) -> str:
    """The text that stands in for one metadata field when embedding.

    Plain-string fields pass through; tasks render as their human-readable
    labels in canonical task order, domains join in file order.
    """
    if field is FieldKind.NAME:
        return metadata.name
    if field is FieldKind.DESCRIPTION:
        return metadata.description
    if field is FieldKind.TASKS:
        return ", ".join(TASK_LABELS[task] for task in metadata.tasks_in_order())
    if field is FieldKind.DOMAINS:
        return ", ".join(metadata.domains)
    raise ValueError(f"unknown field kind: {field!r}")


def _now_rfc3339() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def build_index(
    collection: Collection,
    embedder: Embedder,
    built_at: str | None = None,
) -> SearchIndex:
    """Encode every field of every dataset and assemble the index.

    Fields whose text has no tokens or whose contributions cancel exactly
    are recorded as absent with a warning; provider failures abort the whole
    build. Entries are sorted ascending by dataset id.
    """
    from ds4rs.search import size_bucket  # local import to keep modules acyclic

    entries: list[IndexedDataset] = []
    for dataset in sorted(collection.datasets, key=lambda d: d.id):
        vectors: dict[FieldKind, EmbeddingVector] = {}
        for field in FIELD_ORDER:
            text = field_text(dataset, field)
            try:
                vectors[field] = embedder.embed(text)
            except (EmptyTextError, DegenerateVectorError) as exc:
                logger.warning(
                    "field '%s' of dataset '%s' has no usable vector (%s); skipped",
                    field.value,
                    dataset.id,
                    exc,
                )
            except EmbeddingError as exc:
                raise EmbedderFailureError(dataset.id, field, str(exc)) from exc
        if not vectors:
            logger.warning(
                "dataset '%s' has no embeddable field at all; excluded from the index",
                dataset.id,
            )
            continue
        entries.append(
            IndexedDataset(
                metadata=dataset,
                field_vectors=vectors,
                size_bucket=size_bucket(dataset.size),
            )
        )

    return SearchIndex(
        embedder=embedder.spec,
        built_at=built_at if built_at is not None else _now_rfc3339(),
        entries=tuple(entries),
    )


def _encode_vector(vector: EmbeddingVector) -> str:
    return base64.b64encode(vector.values.astype("<f4").tobytes()).decode("ascii")


def serialize_index(index: SearchIndex) -> bytes:
    """Canonical byte-deterministic serialization of an index."""
    entries = []
    for entry in index.entries:
        entries.append(
            {
                "metadata": metadata_to_document(entry.metadata),
                "size_bucket": entry.size_bucket.value,
                "vectors": {
                    field.value: _encode_vector(entry.field_vectors[field])
                    for field in entry.present_fields()
                },
            }
        )
    document = {
        "format_version": INDEX_FORMAT_VERSION,
        "embedder": {
            "kind": index.embedder.kind.value,
            "dim": index.embedder.dim,
            "fingerprint": index.embedder.fingerprint,
        },
        "built_at": index.built_at,
        "entries": entries,
    }
    return (json.dumps(document, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _require(mapping: dict, key: str, context: str):
    if not isinstance(mapping, dict) or key not in mapping:
        raise CorruptIndexError(f"{context}: missing '{key}'")
    return mapping[key]


def _decode_vector(encoded: str, dim: int, dataset_id: str, field: str) -> EmbeddingVector:
    try:
        raw = base64.b64decode(encoded, validate=True)
    except (ValueError, TypeError) as exc:
        raise CorruptIndexError(
            f"entry '{dataset_id}' field '{field}': invalid base64 vector"
        ) from exc
    if len(raw) % 4 != 0 or len(raw) // 4 != dim:
        raise CorruptIndexError(
            f"entry '{dataset_id}' field '{field}': expected {dim} float32 components, got {len(raw)} bytes"
        )
    values = np.frombuffer(raw, dtype="<f4").astype(np.float32)
    norm = float(np.linalg.norm(values.astype(np.float64)))
    if abs(norm - 1.0) > LOAD_NORM_TOLERANCE:
        raise NormViolationError(dataset_id, field, norm)
    return EmbeddingVector(values, norm_tolerance=LOAD_NORM_TOLERANCE)


def load_index(data: bytes) -> SearchIndex:
    """Parse a serialized index, re-validating every invariant.

    Checks the format version, embedder spec consistency, per-entry metadata
    validity, id ordering and uniqueness, vector dimensions, unit norms
    (within 1e-5 after float32 decode), and size-bucket consistency.
    """
    from ds4rs.search import SizeBucket, size_bucket  # local import, see build_index

    try:
        document = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptIndexError(f"index file is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise CorruptIndexError("index document must be a JSON object")

    version = _require(document, "format_version", "index document")
    if version != INDEX_FORMAT_VERSION:
        raise UnsupportedVersionError(str(version))

    raw_embedder = _require(document, "embedder", "index document")
    kind_value = _require(raw_embedder, "kind", "embedder")
    dim = _require(raw_embedder, "dim", "embedder")
    fingerprint = _require(raw_embedder, "fingerprint", "embedder")
    try:
        kind = EmbedderKind(kind_value)
    except ValueError as exc:
        raise CorruptIndexError(f"unknown embedder kind {kind_value!r}") from exc
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 2:
        raise CorruptIndexError(f"embedder dim must be an integer >= 2, got {dim!r}")
    if not isinstance(fingerprint, str) or not fingerprint:
        raise CorruptIndexError("embedder fingerprint must be a non-empty string")
    # The fingerprint is a pure function of kind and dim; a stored value that
    # disagrees means the file was edited or assembled from mismatched parts.
    factory = (
        EmbedderSpec.reference if kind is EmbedderKind.REFERENCE else EmbedderSpec.external
    )
    expected = factory(dim).fingerprint
    if fingerprint != expected:
        raise CorruptIndexError(
            f"embedder fingerprint {fingerprint!r} does not match "
            f"kind/dim (expected {expected!r})"
        )
    spec = EmbedderSpec(kind=kind, dim=dim, fingerprint=fingerprint)

    built_at = _require(document, "built_at", "index document")
    if not isinstance(built_at, str):
        raise CorruptIndexError("built_at must be a string")

    raw_entries = _require(document, "entries", "index document")
    if not isinstance(raw_entries, list):
        raise CorruptIndexError("entries must be an array")

    entries: list[IndexedDataset] = []
    previous_id: str | None = None
    for position, raw_entry in enumerate(raw_entries):
        context = f"entries[{position}]"
        raw_metadata = _require(raw_entry, "metadata", context)
        metadata, report = parse_metadata_report(
            json.dumps(raw_metadata), source=context
        )
        if metadata is None:
            details = "; ".join(d.message for d in report.errors)
            raise CorruptIndexError(f"{context}: invalid metadata ({details})")

        if previous_id is not None and metadata.id <= previous_id:
            raise CorruptIndexError(
                f"{context}: entries must be sorted by unique ascending id "
                f"('{metadata.id}' after '{previous_id}')"
            )
        previous_id = metadata.id

        bucket_value = _require(raw_entry, "size_bucket", context)
        try:
            bucket = SizeBucket(bucket_value)
        except ValueError as exc:
            raise CorruptIndexError(f"{context}: unknown size bucket {bucket_value!r}") from exc
        if bucket is not size_bucket(metadata.size):
            raise CorruptIndexError(
                f"{context}: stored size bucket '{bucket.value}' does not match the metadata"
            )

        raw_vectors = _require(raw_entry, "vectors", context)
        if not isinstance(raw_vectors, dict) or not raw_vectors:
            raise CorruptIndexError(f"{context}: vectors must be a non-empty object")
        vectors: dict[FieldKind, EmbeddingVector] = {}
        for field_value, encoded in raw_vectors.items():
            try:
                field = FieldKind(field_value)
            except ValueError as exc:
                raise CorruptIndexError(f"{context}: unknown field kind {field_value!r}") from exc
            if not isinstance(encoded, str):
                raise CorruptIndexError(f"{context}: vector for '{field_value}' must be a base64 string")
            vectors[field] = _decode_vector(encoded, dim, metadata.id, field.value)

        entries.append(
            IndexedDataset(metadata=metadata, field_vectors=vectors, size_bucket=bucket)
        )

    return SearchIndex(embedder=spec, built_at=built_at, entries=tuple(entries))
