import json
from pathlib import Path

import pytest

from ds4rs.embedding import ReferenceEmbedder
from ds4rs.index import build_index, serialize_index
from ds4rs.metadata import Collection, DatasetMetadata, parse_metadata

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS_DIR = FIXTURES / "search_corpus"
VALID_DIR = FIXTURES / "valid"
INVALID_DIR = FIXTURES / "invalid"

BUILT_AT = "2026-01-15T12:00:00Z"


def collection_from_docs(docs: list[dict]) -> Collection:
    """Feed raw dicts through the real parsing path."""
    datasets = []
    for doc in docs:
        parsed = parse_metadata(json.dumps(doc), source=doc.get("id", "<doc>"))
        assert isinstance(parsed, DatasetMetadata), (
            f"synthetic doc rejected: {getattr(parsed, 'diagnostics', parsed)}"
        )
        datasets.append(parsed)
    return Collection(datasets=datasets, reports=[])


def load_corpus_docs(directory: Path = CORPUS_DIR) -> list[dict]:
    return [
        json.loads(path.read_text())
        for path in sorted(directory.glob("*.json"))
    ]


@pytest.fixture(scope="session")
def corpus_docs() -> list[dict]:
    return load_corpus_docs()


@pytest.fixture(scope="session")
def corpus_index(corpus_docs):
    collection = collection_from_docs(corpus_docs)
    return build_index(collection, ReferenceEmbedder(256), built_at=BUILT_AT)


@pytest.fixture(scope="session")
def corpus_index_file(corpus_index, tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("index") / "corpus.ds4rs-index.json"
    path.write_bytes(serialize_index(corpus_index))
    return path
