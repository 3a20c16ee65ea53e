"""Independent brute-force reimplementation of the scoring pipeline.

Everything here is written from the documented rules alone, on purpose in a
different style than the package: sparse dict vectors instead of numpy
arrays, itertools.groupby tokenization, hex hash constants. Tests compare
the real implementation against these routines; the two sides share no code.

Works on raw metadata dicts (parsed JSON), never on package objects.
"""

from __future__ import annotations

import math
import unicodedata
from itertools import groupby

FNV_BASIS = 0xCBF29CE484222325
FNV_MULT = 0x100000001B3

LABELS = (
    ("ctr_prediction", "CTR prediction"),
    ("rating_prediction", "rating prediction"),
    ("top_n", "Top-N recommendation"),
)

FIELDS = ("name", "description", "tasks", "domains")


def oracle_fnv(data: bytes) -> int:
    h = FNV_BASIS
    for b in data:
        h = ((h ^ b) * FNV_MULT) % 2**64
    return h


def _is_word_char(ch: str) -> bool:
    cat = unicodedata.category(ch)
    return cat[0] == "L" or cat == "Nd"


def oracle_tokenize(text: str) -> list[str]:
    pieces = groupby(text.lower(), key=_is_word_char)
    return ["".join(run) for wordy, run in pieces if wordy]


def oracle_embed(text: str, dim: int) -> dict[int, float]:
    """Sparse unit vector {index: component}; raises on empty/cancelled."""
    tokens = oracle_tokenize(text)
    if not tokens:
        raise ValueError("no tokens")
    acc: dict[int, float] = {}
    for tok in tokens:
        h = oracle_fnv(tok.encode("utf-8"))
        idx = h % dim
        sign = 1.0 if (h >> 32) % 2 == 0 else -1.0
        acc[idx] = acc.get(idx, 0.0) + sign
    acc = {i: x for i, x in acc.items() if x != 0.0}
    norm = math.sqrt(sum(x * x for x in acc.values()))
    if norm == 0.0:
        raise ValueError("cancelled to zero")
    return {i: x / norm for i, x in acc.items()}


def oracle_cosine(u: dict[int, float], v: dict[int, float]) -> float:
    if len(v) < len(u):
        u, v = v, u
    dot = sum(x * v.get(i, 0.0) for i, x in u.items())
    nu = math.sqrt(sum(x * x for x in u.values()))
    nv = math.sqrt(sum(x * x for x in v.values()))
    return min(1.0, max(-1.0, dot / (nu * nv)))


def oracle_field_text(doc: dict, field: str) -> str:
    if field == "name":
        return doc["name"]
    if field == "description":
        return doc["description"]
    if field == "tasks":
        chosen = [label for value, label in LABELS if value in doc["tasks"]]
        return ", ".join(chosen)
    if field == "domains":
        return ", ".join(doc["domains"])
    raise KeyError(field)


def oracle_bucket(doc: dict) -> str:
    count = doc.get("size", {}).get("num_interactions")
    if count is None:
        return "unknown"
    if count < 1_000_000:
        return "small"
    if count < 100_000_000:
        return "medium"
    return "large"


def oracle_passes(doc: dict, size_sel, task_sel, domain_sel) -> bool:
    if size_sel is not None and oracle_bucket(doc) not in size_sel:
        return False
    if task_sel is not None and not set(doc["tasks"]) & set(task_sel):
        return False
    if domain_sel is not None:
        have = {d.lower() for d in doc["domains"]}
        want = {d.lower() for d in domain_sel}
        if not have & want:
            return False
    return True


def oracle_embed_fields(doc: dict, dim: int) -> dict[str, dict[int, float]]:
    """Field vectors for one dataset; unembeddable fields are left out."""
    vectors = {}
    for field in FIELDS:
        try:
            vectors[field] = oracle_embed(oracle_field_text(doc, field), dim)
        except ValueError:
            pass
    return vectors


def oracle_search(
    docs: list[dict],
    query: str,
    dim: int,
    size_sel=None,
    task_sel=None,
    domain_sel=None,
    limit: int = 20,
):
    """Full pipeline: embed fields, all cosines, max, sort, truncate.

    Returns (total_matched, ranked) where ranked is a list of
    (id, relevance, [(field, score), ...]) with the explanation sorted by
    score descending, ties in canonical field order; ranking sorted by
    relevance descending, ties by id ascending.
    """
    qvec = oracle_embed(query, dim)
    scored = []
    for doc in docs:
        if not oracle_passes(doc, size_sel, task_sel, domain_sel):
            continue
        vectors = oracle_embed_fields(doc, dim)
        if not vectors:
            continue
        pairs = [
            (field, oracle_cosine(qvec, vec)) for field, vec in vectors.items()
        ]
        pairs.sort(key=lambda fs: (-fs[1], FIELDS.index(fs[0])))
        relevance = pairs[0][1]
        scored.append((doc["id"], relevance, pairs))
    scored.sort(key=lambda row: (-row[1], row[0]))
    return len(scored), scored[:limit]
