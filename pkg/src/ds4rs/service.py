"""HTTP service exposing the search engine.

Serves an immutable index snapshot; every request handler grabs the current
snapshot reference once, so searches running during an admin reload each see
entirely the old or entirely the new index, never a mixture. The service
never mutates the index file and degrades loudly (503) when the external
embedding provider is down instead of returning empty results.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from ds4rs.embedding import (
    DimensionMismatchError,
    Embedder,
    EmbedderKind,
    ExternalEmbedder,
    ProviderConfig,
    ProviderError,
    ReferenceEmbedder,
)
from ds4rs.index import IndexingError, SearchIndex, load_index
from ds4rs.metadata import RecommendationTask
from ds4rs.search import (
    EmptyQueryError,
    FingerprintMismatchError,
    MAX_LIMIT,
    MAX_QUERY_LENGTH,
    DEFAULT_LIMIT,
    SearchQuery,
    SizeBucket,
    search_response,
)
from ds4rs.wire import (
    dataset_document,
    error_document,
    render_json,
    search_document,
)

__all__ = ["ServiceConfig", "create_app", "load_snapshot"]

logger = logging.getLogger(__name__)

JSON_MEDIA_TYPE = "application/json"


@dataclass(frozen=True)
class ServiceConfig:
    """Startup configuration for the online service."""

    index_path: str
    listen_address: str = "127.0.0.1:8080"
    embedder_kind: EmbedderKind = EmbedderKind.REFERENCE
    provider_url: str | None = None
    provider_timeout: float = 10.0
    cors_allowed_origins: tuple[str, ...] = ()


@dataclass
class _Snapshot:
    """One immutable served index plus its id lookup table."""

    index: SearchIndex
    by_id: dict = field(default_factory=dict)

    @classmethod
    def from_index(cls, index: SearchIndex) -> "_Snapshot":
        return cls(index=index, by_id={e.metadata.id: e for e in index.entries})


def _build_embedder(config: ServiceConfig, dim: int) -> Embedder:
    if config.embedder_kind is EmbedderKind.REFERENCE:
        return ReferenceEmbedder(dim)
    if config.provider_url is None:
        raise ValueError("external embedder requires a provider URL")
    return ExternalEmbedder(
        ProviderConfig(url=config.provider_url, timeout=config.provider_timeout), dim
    )


def load_snapshot(config: ServiceConfig) -> tuple[_Snapshot, Embedder]:
    """Load the index file and build the matching query embedder.

    Fails fast with FingerprintMismatchError when the index was built in a
    different vector space than the configured embedder would query in.
    """
    with open(config.index_path, "rb") as handle:
        index = load_index(handle.read())
    embedder = _build_embedder(config, index.embedder.dim)
    if embedder.spec.fingerprint != index.embedder.fingerprint:
        raise FingerprintMismatchError(
            embedder.spec.fingerprint, index.embedder.fingerprint
        )
    return _Snapshot.from_index(index), embedder


def _json_response(document: dict, status_code: int = 200) -> Response:
    return Response(
        content=render_json(document), status_code=status_code, media_type=JSON_MEDIA_TYPE
    )


def _error(status_code: int, code: str, message: str) -> Response:
    return _json_response(error_document(code, message), status_code)


def _parse_enum_filter(raw: str | None, enum_type, name: str):
    """Comma-separated enum values -> frozenset, or an error message."""
    if raw is None or raw == "":
        return None, None
    values = set()
    for piece in raw.split(","):
        piece = piece.strip()
        if not piece:
            continue
        try:
            values.add(enum_type(piece))
        except ValueError:
            return None, f"'{piece}' is not a valid {name}"
    return (frozenset(values) if values else None), None


def create_app(config: ServiceConfig) -> FastAPI:
    """Build the application, loading and validating the index up front."""
    snapshot, embedder = load_snapshot(config)

    app = FastAPI(title="ds4rs", docs_url=None, redoc_url=None, openapi_url=None)
    state = {"snapshot": snapshot}
    reload_lock = threading.Lock()

    if config.cors_allowed_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.cors_allowed_origins),
            allow_methods=["GET", "POST"],
            allow_headers=["*"],
        )

    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        start = time.perf_counter()
        response = await call_next(request)
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        logger.info(
            "%s %s %d %.1fms",
            request.method,
            request.url.path,
            response.status_code,
            elapsed_ms,
        )
        return response

    @app.get("/api/health")
    def health() -> Response:
        snap: _Snapshot = state["snapshot"]
        return _json_response(
            {
                "status": "ok",
                "datasets": len(snap.index.entries),
                "embedder": snap.index.embedder.fingerprint,
            }
        )

    @app.get("/api/search")
    def api_search(request: Request) -> Response:
        snap: _Snapshot = state["snapshot"]
        params = request.query_params

        q = params.get("q")
        if q is None or not q.strip():
            return _error(400, "MISSING_QUERY", "query parameter 'q' is required")
        if len(q) > MAX_QUERY_LENGTH:
            return _error(
                400, "INVALID_QUERY", f"query exceeds {MAX_QUERY_LENGTH} characters"
            )

        size_filter, bad = _parse_enum_filter(params.get("size"), SizeBucket, "size bucket")
        if bad:
            return _error(400, "INVALID_FILTER", bad)
        task_filter, bad = _parse_enum_filter(
            params.get("task"), RecommendationTask, "recommendation task"
        )
        if bad:
            return _error(400, "INVALID_FILTER", bad)

        raw_domain = params.get("domain")
        domain_filter = None
        if raw_domain:
            domains = frozenset(
                piece.strip() for piece in raw_domain.split(",") if piece.strip()
            )
            domain_filter = domains or None

        raw_limit = params.get("limit")
        limit = DEFAULT_LIMIT
        if raw_limit is not None and raw_limit != "":
            try:
                limit = int(raw_limit)
            except ValueError:
                limit = -1
            if not 1 <= limit <= MAX_LIMIT:
                return _error(
                    400, "INVALID_LIMIT", f"limit must be an integer in [1, {MAX_LIMIT}]"
                )

        query = SearchQuery(
            text=q,
            size_filter=size_filter,
            task_filter=task_filter,
            domain_filter=domain_filter,
            limit=limit,
        )
        try:
            response = search_response(snap.index, query, embedder)
        except EmptyQueryError as exc:
            return _error(400, "INVALID_QUERY", str(exc))
        except (ProviderError, DimensionMismatchError) as exc:
            return _error(503, "EMBEDDER_UNAVAILABLE", str(exc))
        return _json_response(search_document(q, response))

    @app.get("/api/datasets/{dataset_id}")
    def api_dataset(dataset_id: str) -> Response:
        snap: _Snapshot = state["snapshot"]
        entry = snap.by_id.get(dataset_id)
        if entry is None:
            return _error(404, "DATASET_NOT_FOUND", f"no dataset with id '{dataset_id}'")
        return _json_response(dataset_document(entry.metadata))

    @app.post("/api/admin/reload")
    def api_reload() -> Response:
        with reload_lock:
            old: _Snapshot = state["snapshot"]
            try:
                with open(config.index_path, "rb") as handle:
                    new_index = load_index(handle.read())
            except (OSError, IndexingError) as exc:
                return _error(422, "CORRUPT_INDEX", str(exc))
            if new_index.embedder.fingerprint != embedder.spec.fingerprint:
                return _error(
                    422,
                    "FINGERPRINT_MISMATCH",
                    f"new index embedder '{new_index.embedder.fingerprint}' does not "
                    f"match the configured embedder '{embedder.spec.fingerprint}'",
                )
            state["snapshot"] = _Snapshot.from_index(new_index)
            return _json_response(
                {
                    "reloaded": True,
                    "datasets_before": len(old.index.entries),
                    "datasets_after": len(new_index.entries),
                }
            )

    return app
