"""Response documents shared by the HTTP service and the CLI.

Both surfaces render search output through the same builders and the same
JSON writer, so `ds4rs search --format json` is byte-identical to the
`/api/search` body. The writer emits every float with exactly six decimal
places, which the standard json encoder cannot do; everything else follows
normal compact JSON.
"""

from __future__ import annotations

import json

from ds4rs.metadata import DatasetMetadata, metadata_to_document
from ds4rs.search import SearchResponse, SearchResult, size_bucket

__all__ = [
    "search_document",
    "result_document",
    "dataset_document",
    "error_document",
    "render_json",
]


def render_json(value) -> str:
    """Compact JSON with floats fixed at six decimal places, newline-terminated."""
    pieces: list[str] = []
    _render(value, pieces)
    pieces.append("\n")
    return "".join(pieces)


def _render(value, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, float):
        out.append(f"{value:.6f}")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, dict):
        out.append("{")
        for i, (key, item) in enumerate(value.items()):
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _render(item, out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _render(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot render {type(value).__name__} as JSON")


def result_document(result: SearchResult) -> dict:
    metadata = result.dataset
    return {
        "id": metadata.id,
        "name": metadata.name,
        "relevance": result.relevance,
        "top_field": result.top_field.value,
        "explanation": [
            {"field": fs.field.value, "score": fs.score} for fs in result.explanation
        ],
        "tasks": [task.value for task in metadata.tasks_in_order()],
        "domains": list(metadata.domains),
        "size_bucket": size_bucket(metadata.size).value,
        "download_url": metadata.download_url,
        "description": metadata.description,
        "record_examples": [dict(entry) for entry in metadata.record_examples],
    }


def search_document(query_text: str, response: SearchResponse) -> dict:
    return {
        "query": query_text,
        "total_matched": response.total_matched,
        "results": [result_document(result) for result in response.results],
    }


def dataset_document(metadata: DatasetMetadata) -> dict:
    """Canonical metadata document plus the derived size bucket."""
    document = metadata_to_document(metadata)
    document["size_bucket"] = size_bucket(metadata.size).value
    return document


def error_document(code: str, message: str) -> dict:
    return {"error": {"code": code, "message": message}}
