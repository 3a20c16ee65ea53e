"""Text-to-vector encoding layer.

Two embedders share one contract: a fully deterministic reference embedder
(signed feature hashing over FNV-1a token hashes) that needs no model
weights, and an adapter for an external sentence-embedding HTTP service.
All vectors are unit-normalized at encoding time so cosine similarity
reduces to a dot product; an index records the embedder fingerprint so
queries are only ever compared against vectors from the same space.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from enum import Enum
from typing import Protocol

import numpy as np
import requests

__all__ = [
    "NORM_TOLERANCE",
    "EmbeddingVector",
    "EmbedderKind",
    "EmbedderSpec",
    "Embedder",
    "ReferenceEmbedder",
    "ExternalEmbedder",
    "ProviderConfig",
    "tokenize",
    "fnv1a64",
    "embed_reference",
    "embed_external",
    "cosine",
    "EmbeddingError",
    "EmptyTextError",
    "DegenerateVectorError",
    "DimensionMismatchError",
    "ProviderError",
    "ProviderUnreachableError",
    "ProviderBadResponseError",
]

NORM_TOLERANCE = 1e-6

FNV_OFFSET_BASIS = 14695981039346656037
FNV_PRIME = 1099511628211
_U64_MASK = (1 << 64) - 1

REFERENCE_DIM = 256
_REFERENCE_VERSION = "v1"
_EXTERNAL_VERSION = "v1"


class EmbeddingError(Exception):
    """Base class for encoding failures."""


class EmptyTextError(EmbeddingError):
    """The text produced no tokens, so there is nothing to encode."""


class DegenerateVectorError(EmbeddingError):
    """Signed token contributions cancelled to an exact zero vector."""


class DimensionMismatchError(EmbeddingError):
    """Two vectors (or a vector and a spec) disagree on dimensionality."""


class ProviderError(EmbeddingError):
    """Base class for external-provider failures."""


class ProviderUnreachableError(ProviderError):
    """The provider could not be reached (connection refused, timeout)."""


class ProviderBadResponseError(ProviderError):
    """The provider answered, but not with a usable embedding response."""


class EmbeddingVector:
    """Unit-norm dense vector of float32 components.

    Instances are immutable; ``values`` exposes a read-only numpy view.
    Equality is bitwise on the float32 components.
    """

    __slots__ = ("_values",)

    def __init__(self, values, *, norm_tolerance: float = NORM_TOLERANCE) -> None:
        arr = np.array(values, dtype=np.float32, copy=True)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("embedding values must form a non-empty 1-d sequence")
        norm = float(np.linalg.norm(arr.astype(np.float64)))
        if abs(norm - 1.0) > norm_tolerance:
            raise ValueError(f"embedding is not unit-norm (|v| = {norm!r})")
        arr.setflags(write=False)
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def dim(self) -> int:
        return int(self._values.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingVector):
            return NotImplemented
        return (
            self.dim == other.dim
            and self._values.tobytes() == other._values.tobytes()
        )

    def __hash__(self) -> int:
        return hash(self._values.tobytes())

    def __repr__(self) -> str:
        return f"EmbeddingVector(dim={self.dim})"


class EmbedderKind(str, Enum):
    REFERENCE = "reference"
    EXTERNAL = "external"


@dataclass(frozen=True)
class EmbedderSpec:
    """Identity of an embedding configuration.

    The fingerprint is a pure function of kind, dimension, and embedder
    version; an index built under one fingerprint can only be queried by an
    embedder with the same fingerprint.
    """

    kind: EmbedderKind
    dim: int
    fingerprint: str

    @classmethod
    def reference(cls, dim: int = REFERENCE_DIM) -> EmbedderSpec:
        if dim < 2:
            raise ValueError("reference embedder dimension must be at least 2")
        return cls(EmbedderKind.REFERENCE, dim, f"ref-{_REFERENCE_VERSION}-{dim}")

    @classmethod
    def external(cls, dim: int) -> EmbedderSpec:
        if dim < 2:
            raise ValueError("external embedder dimension must be at least 2")
        return cls(EmbedderKind.EXTERNAL, dim, f"ext-{_EXTERNAL_VERSION}-{dim}")


class Embedder(Protocol):
    """Anything that encodes text into the shared vector space."""

    @property
    def spec(self) -> EmbedderSpec: ...

    def embed(self, text: str) -> EmbeddingVector: ...


def tokenize(text: str) -> list[str]:
    """Lowercase and split on every character that is not a letter or digit.

    Unicode letters (category L*) and decimal digits (Nd) count as token
    characters; everything else separates. Empty pieces are dropped, order
    and duplicates are preserved.
    """
    tokens: list[str] = []
    current: list[str] = []
    for ch in text.lower():
        category = unicodedata.category(ch)
        if category.startswith("L") or category == "Nd":
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return tokens


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash: XOR each byte into the state, then multiply."""
    value = FNV_OFFSET_BASIS
    for byte in data:
        value = ((value ^ byte) * FNV_PRIME) & _U64_MASK
    return value


def embed_reference(text: str, dim: int = REFERENCE_DIM) -> EmbeddingVector:
    """Deterministic signed feature hashing.

    Each token contributes +1 or -1 (sign drawn from bit 32 of its FNV-1a
    hash) to the component at ``hash mod dim``; the accumulated vector is
    then L2-normalized. The signing keeps unrelated texts near-orthogonal
    in expectation.
    """
    if dim < 2:
        raise ValueError("dim must be at least 2")
    tokens = tokenize(text)
    if not tokens:
        raise EmptyTextError(f"text {text!r} contains no tokens")
    accumulator = np.zeros(dim, dtype=np.float64)
    for token in tokens:
        h = fnv1a64(token.encode("utf-8"))
        index = h % dim
        sign = 1.0 if ((h >> 32) & 1) == 0 else -1.0
        accumulator[index] += sign
    norm = float(np.linalg.norm(accumulator))
    if norm == 0.0:
        raise DegenerateVectorError(
            f"token contributions of {text!r} cancelled to the zero vector"
        )
    return EmbeddingVector(accumulator / norm)


def cosine(u: EmbeddingVector, v: EmbeddingVector) -> float:
    """Cosine similarity, accumulated in float64 and clamped to [-1, 1].

    Iteration is index-ascending for both arguments, so the result is
    exactly symmetric in its inputs.
    """
    if u.dim != v.dim:
        raise DimensionMismatchError(f"dimension mismatch: {u.dim} vs {v.dim}")
    a = u.values.astype(np.float64)
    b = v.values.astype(np.float64)
    score = float(np.dot(a, b)) / (
        float(np.linalg.norm(a)) * float(np.linalg.norm(b))
    )
    return max(-1.0, min(1.0, score))


@dataclass(frozen=True)
class ProviderConfig:
    """Where and how to reach the external embedding service."""

    url: str
    timeout: float = 10.0


def embed_external(text: str, provider: ProviderConfig, dim: int) -> EmbeddingVector:
    """Encode one text through the external provider (see ExternalEmbedder)."""
    return ExternalEmbedder(provider, dim).embed(text)


class ReferenceEmbedder:
    """In-process deterministic embedder; the default for tests and offline use."""

    def __init__(self, dim: int = REFERENCE_DIM) -> None:
        self._spec = EmbedderSpec.reference(dim)

    @property
    def spec(self) -> EmbedderSpec:
        return self._spec

    def embed(self, text: str) -> EmbeddingVector:
        return embed_reference(text, self._spec.dim)

    def embed_many(self, texts: list[str]) -> list[EmbeddingVector]:
        return [self.embed(text) for text in texts]


class ExternalEmbedder:
    """Client for an external sentence-embedding HTTP service.

    Wire contract: POST ``{"texts": [...]}`` to the configured URL; the
    service answers ``{"dim": <int>, "vectors": [[...], ...]}`` in request
    order. Returned vectors are L2-normalized here, so the provider does
    not have to normalize. Stateless; safe for concurrent callers.
    """

    def __init__(self, provider: ProviderConfig, dim: int) -> None:
        self._provider = provider
        self._spec = EmbedderSpec.external(dim)

    @property
    def spec(self) -> EmbedderSpec:
        return self._spec

    def embed(self, text: str) -> EmbeddingVector:
        return self.embed_many([text])[0]

    def embed_many(self, texts: list[str]) -> list[EmbeddingVector]:
        try:
            response = requests.post(
                self._provider.url,
                json={"texts": texts},
                timeout=self._provider.timeout,
            )
        except (requests.ConnectionError, requests.Timeout) as exc:
            raise ProviderUnreachableError(
                f"embedding provider at {self._provider.url} unreachable: {exc}"
            ) from exc
        except requests.RequestException as exc:
            raise ProviderBadResponseError(f"embedding request failed: {exc}") from exc

        if response.status_code != 200:
            raise ProviderBadResponseError(
                f"embedding provider returned HTTP {response.status_code}"
            )
        try:
            payload = response.json()
            reported_dim = payload["dim"]
            vectors = payload["vectors"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderBadResponseError(
                f"malformed embedding response: {exc}"
            ) from exc

        if reported_dim != self._spec.dim:
            raise DimensionMismatchError(
                f"provider reports dim {reported_dim}, expected {self._spec.dim}"
            )
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise ProviderBadResponseError(
                f"expected {len(texts)} vectors, got {len(vectors) if isinstance(vectors, list) else type(vectors).__name__}"
            )

        results: list[EmbeddingVector] = []
        for vector in vectors:
            arr = np.asarray(vector, dtype=np.float64)
            if arr.ndim != 1 or arr.shape[0] != self._spec.dim:
                raise DimensionMismatchError(
                    f"provider vector has {arr.shape} components, expected {self._spec.dim}"
                )
            norm = float(np.linalg.norm(arr))
            if norm == 0.0 or not np.isfinite(norm):
                raise ProviderBadResponseError("provider returned an unusable vector")
            results.append(EmbeddingVector(arr / norm))
        return results
