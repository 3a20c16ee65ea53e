"""Dataset metadata schema: parsing, validation, and collection loading.

A dataset contribution is a single UTF-8 JSON file describing one dataset
(name, description, recommendation tasks, domains, size counts, record
examples, download link). This module turns raw file bytes into validated
:class:`DatasetMetadata` values, reporting every violation it finds instead
of stopping at the first one, and loads whole directories of contributions
into a :class:`Collection`.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from urllib.parse import urlsplit

__all__ = [
    "RecommendationTask",
    "TASK_LABELS",
    "DatasetSize",
    "DatasetMetadata",
    "DiagnosticCode",
    "Severity",
    "Diagnostic",
    "ValidationReport",
    "Collection",
    "parse_metadata",
    "parse_metadata_report",
    "validate_collection",
    "load_collection",
    "metadata_to_document",
    "serialize_metadata",
]

SLUG_PATTERN = re.compile(r"[a-z0-9-]{1,64}")
MAX_NAME_LENGTH = 200
MAX_DESCRIPTION_LENGTH = 5000
MAX_DOMAIN_LENGTH = 50
MAX_RECORD_EXAMPLES = 10
SCHEMA_VERSION = "1"

# Top-level keys of a metadata file, in canonical serialization order.
CANONICAL_KEYS = (
    "schema_version",
    "id",
    "name",
    "description",
    "tasks",
    "domains",
    "size",
    "record_examples",
    "download_url",
    "license",
)

SIZE_KEYS = ("num_interactions", "num_users", "num_items")


class RecommendationTask(str, Enum):
    """Closed set of recommendation task categories."""

    CTR_PREDICTION = "ctr_prediction"
    RATING_PREDICTION = "rating_prediction"
    TOP_N = "top_n"


# Human-readable labels in canonical task order; used when task lists are
# rendered as text (index field encoding, UI badges).
TASK_LABELS = {
    RecommendationTask.CTR_PREDICTION: "CTR prediction",
    RecommendationTask.RATING_PREDICTION: "rating prediction",
    RecommendationTask.TOP_N: "Top-N recommendation",
}

TASK_ORDER = tuple(TASK_LABELS)


@dataclass(frozen=True)
class DatasetSize:
    """Optional interaction/user/item counts of a dataset.

    Any subset of the counts may be present; datasets with no counts at all
    are flagged with a warning and sort into the "unknown" size bucket.
    """

    num_interactions: int | None = None
    num_users: int | None = None
    num_items: int | None = None

    @property
    def has_any_count(self) -> bool:
        return any(
            count is not None
            for count in (self.num_interactions, self.num_users, self.num_items)
        )


@dataclass(frozen=True)
class DatasetMetadata:
    """One validated dataset contribution."""

    id: str
    schema_version: str
    name: str
    description: str
    tasks: frozenset[RecommendationTask]
    domains: tuple[str, ...]
    size: DatasetSize
    record_examples: tuple[dict[str, str], ...]
    download_url: str
    license: str | None = None

    def tasks_in_order(self) -> tuple[RecommendationTask, ...]:
        """Tasks in the canonical enum order (deterministic everywhere)."""
        return tuple(task for task in TASK_ORDER if task in self.tasks)


class DiagnosticCode(str, Enum):
    """Machine-readable validation diagnostic codes."""

    MALFORMED_SYNTAX = "MALFORMED_SYNTAX"
    MISSING_FIELD = "MISSING_FIELD"
    EMPTY_FIELD = "EMPTY_FIELD"
    FIELD_TOO_LONG = "FIELD_TOO_LONG"
    INVALID_SLUG = "INVALID_SLUG"
    INVALID_TASK = "INVALID_TASK"
    INVALID_URL = "INVALID_URL"
    INVALID_TYPE = "INVALID_TYPE"
    NESTED_RECORD_EXAMPLE = "NESTED_RECORD_EXAMPLE"
    UNSUPPORTED_SCHEMA_VERSION = "UNSUPPORTED_SCHEMA_VERSION"
    UNKNOWN_FIELD = "UNKNOWN_FIELD"
    FILENAME_MISMATCH = "FILENAME_MISMATCH"
    DUPLICATE_ID = "DUPLICATE_ID"
    MISSING_SIZE = "MISSING_SIZE"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    code: DiagnosticCode
    severity: Severity
    message: str
    json_path: str

    def to_document(self) -> dict:
        return {
            "code": self.code.value,
            "severity": self.severity.value,
            "message": self.message,
            "json_path": self.json_path,
        }


@dataclass
class ValidationReport:
    """All diagnostics collected for one source file (or dataset id)."""

    file: str
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity is Severity.ERROR]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity is Severity.WARNING]

    @property
    def is_valid(self) -> bool:
        """A file is valid iff it produced zero error-severity diagnostics."""
        return not self.errors

    def to_document(self) -> dict:
        return {
            "file": self.file,
            "diagnostics": [d.to_document() for d in self.diagnostics],
        }


@dataclass
class Collection:
    """A loaded directory of contributions.

    ``datasets`` holds every individually valid dataset with a unique id;
    ``reports`` holds one entry per file that produced any diagnostic.
    Files whose report contains errors are excluded from ``datasets``.
    """

    datasets: list[DatasetMetadata]
    reports: list[ValidationReport]


class _Validator:
    """Accumulates diagnostics while pulling typed fields out of raw JSON."""

    def __init__(self, source: str) -> None:
        self.report = ValidationReport(file=source)

    def error(self, code: DiagnosticCode, message: str, json_path: str) -> None:
        self.report.diagnostics.append(
            Diagnostic(code, Severity.ERROR, message, json_path)
        )

    def warning(self, code: DiagnosticCode, message: str, json_path: str) -> None:
        self.report.diagnostics.append(
            Diagnostic(code, Severity.WARNING, message, json_path)
        )

    def require(self, raw: dict, key: str):
        if key not in raw:
            self.error(
                DiagnosticCode.MISSING_FIELD, f"required field '{key}' is missing", f"$.{key}"
            )
            return None
        return raw[key]

    def string_field(
        self,
        raw: dict,
        key: str,
        *,
        max_length: int | None = None,
        require_non_blank: bool = True,
    ) -> str | None:
        value = self.require(raw, key)
        if value is None:
            return None
        if not isinstance(value, str):
            self.error(
                DiagnosticCode.INVALID_TYPE, f"'{key}' must be a string", f"$.{key}"
            )
            return None
        if require_non_blank and not value.strip():
            self.error(
                DiagnosticCode.EMPTY_FIELD, f"'{key}' must not be empty", f"$.{key}"
            )
            return None
        if max_length is not None and len(value) > max_length:
            self.error(
                DiagnosticCode.FIELD_TOO_LONG,
                f"'{key}' exceeds {max_length} characters ({len(value)})",
                f"$.{key}",
            )
            return None
        return value


def _validate_url(value: str) -> bool:
    try:
        parts = urlsplit(value)
    except ValueError:
        # urlsplit rejects some inputs (bad IPv6 brackets) with an exception
        return False
    return parts.scheme in ("http", "https") and bool(parts.netloc)


def _is_count(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= 0


def parse_metadata_report(
    data: bytes | str, source: str = "<memory>"
) -> tuple[DatasetMetadata | None, ValidationReport]:
    """Parse one metadata file, collecting every diagnostic.

    Returns the parsed metadata (``None`` when any error fired) together
    with the report, which may carry warnings even for valid files.
    Total over arbitrary input: malformed bytes become diagnostics, never
    exceptions.
    """
    v = _Validator(source)

    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            v.error(DiagnosticCode.MALFORMED_SYNTAX, f"not valid UTF-8: {exc}", "$")
            return None, v.report
    else:
        text = data

    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        v.error(DiagnosticCode.MALFORMED_SYNTAX, f"not valid JSON: {exc.msg}", "$")
        return None, v.report

    if not isinstance(raw, dict):
        v.error(DiagnosticCode.INVALID_TYPE, "top-level value must be an object", "$")
        return None, v.report

    for key in raw:
        if key not in CANONICAL_KEYS:
            v.warning(
                DiagnosticCode.UNKNOWN_FIELD, f"unknown field '{key}' ignored", f"$.{key}"
            )

    schema_version = v.string_field(raw, "schema_version")
    if schema_version is not None and schema_version != SCHEMA_VERSION:
        v.error(
            DiagnosticCode.UNSUPPORTED_SCHEMA_VERSION,
            f"schema_version '{schema_version}' is not supported (expected '{SCHEMA_VERSION}')",
            "$.schema_version",
        )

    dataset_id = v.require(raw, "id")
    if dataset_id is not None:
        if not isinstance(dataset_id, str):
            v.error(DiagnosticCode.INVALID_TYPE, "'id' must be a string", "$.id")
            dataset_id = None
        elif not SLUG_PATTERN.fullmatch(dataset_id):
            v.error(
                DiagnosticCode.INVALID_SLUG,
                f"id '{dataset_id}' is not a slug (lowercase letters, digits, hyphens; 1-64 chars)",
                "$.id",
            )
            dataset_id = None

    name = v.string_field(raw, "name", max_length=MAX_NAME_LENGTH)
    description = v.string_field(raw, "description", max_length=MAX_DESCRIPTION_LENGTH)

    tasks: frozenset[RecommendationTask] | None = None
    raw_tasks = v.require(raw, "tasks")
    if raw_tasks is not None:
        if not isinstance(raw_tasks, list):
            v.error(DiagnosticCode.INVALID_TYPE, "'tasks' must be an array", "$.tasks")
        elif not raw_tasks:
            v.error(
                DiagnosticCode.EMPTY_FIELD, "'tasks' must list at least one task", "$.tasks"
            )
        else:
            parsed_tasks = set()
            ok = True
            for i, item in enumerate(raw_tasks):
                try:
                    parsed_tasks.add(RecommendationTask(item))
                except ValueError:
                    allowed = ", ".join(t.value for t in RecommendationTask)
                    v.error(
                        DiagnosticCode.INVALID_TASK,
                        f"unknown task {item!r} (allowed: {allowed})",
                        f"$.tasks[{i}]",
                    )
                    ok = False
            if ok:
                tasks = frozenset(parsed_tasks)

    domains: tuple[str, ...] | None = None
    raw_domains = v.require(raw, "domains")
    if raw_domains is not None:
        if not isinstance(raw_domains, list):
            v.error(DiagnosticCode.INVALID_TYPE, "'domains' must be an array", "$.domains")
        elif not raw_domains:
            v.error(
                DiagnosticCode.EMPTY_FIELD, "'domains' must list at least one domain", "$.domains"
            )
        else:
            ok = True
            for i, item in enumerate(raw_domains):
                path = f"$.domains[{i}]"
                if not isinstance(item, str):
                    v.error(DiagnosticCode.INVALID_TYPE, "domain must be a string", path)
                    ok = False
                elif not item.strip():
                    v.error(DiagnosticCode.EMPTY_FIELD, "domain must not be empty", path)
                    ok = False
                elif len(item) > MAX_DOMAIN_LENGTH:
                    v.error(
                        DiagnosticCode.FIELD_TOO_LONG,
                        f"domain exceeds {MAX_DOMAIN_LENGTH} characters",
                        path,
                    )
                    ok = False
            if ok:
                domains = tuple(raw_domains)

    # Absent size is tolerated (files may predate the field); the dataset
    # then sorts into the unknown bucket and draws a collection-level warning.
    size = DatasetSize()
    raw_size = raw.get("size")
    if raw_size is not None:
        if not isinstance(raw_size, dict):
            v.error(DiagnosticCode.INVALID_TYPE, "'size' must be an object", "$.size")
        else:
            counts = {}
            ok = True
            for key in raw_size:
                if key not in SIZE_KEYS:
                    v.warning(
                        DiagnosticCode.UNKNOWN_FIELD,
                        f"unknown size field '{key}' ignored",
                        f"$.size.{key}",
                    )
            for key in SIZE_KEYS:
                if key in raw_size:
                    value = raw_size[key]
                    if not _is_count(value):
                        v.error(
                            DiagnosticCode.INVALID_TYPE,
                            f"'{key}' must be a non-negative integer",
                            f"$.size.{key}",
                        )
                        ok = False
                    else:
                        counts[key] = value
            if ok:
                size = DatasetSize(**counts)

    record_examples: tuple[dict[str, str], ...] | None = None
    raw_examples = v.require(raw, "record_examples")
    if raw_examples is not None:
        if not isinstance(raw_examples, list):
            v.error(
                DiagnosticCode.INVALID_TYPE, "'record_examples' must be an array", "$.record_examples"
            )
        elif len(raw_examples) > MAX_RECORD_EXAMPLES:
            v.error(
                DiagnosticCode.FIELD_TOO_LONG,
                f"'record_examples' holds more than {MAX_RECORD_EXAMPLES} entries",
                "$.record_examples",
            )
        else:
            ok = True
            for i, entry in enumerate(raw_examples):
                path = f"$.record_examples[{i}]"
                if not isinstance(entry, dict):
                    v.error(
                        DiagnosticCode.INVALID_TYPE, "record example must be an object", path
                    )
                    ok = False
                    continue
                for key, value in entry.items():
                    if isinstance(value, (dict, list)):
                        v.error(
                            DiagnosticCode.NESTED_RECORD_EXAMPLE,
                            "record example values must be flat strings, not nested structures",
                            f"{path}.{key}",
                        )
                        ok = False
                    elif not isinstance(value, str):
                        v.error(
                            DiagnosticCode.INVALID_TYPE,
                            "record example values must be strings",
                            f"{path}.{key}",
                        )
                        ok = False
            if ok:
                record_examples = tuple(dict(entry) for entry in raw_examples)

    download_url = None
    raw_url = v.require(raw, "download_url")
    if raw_url is not None:
        if not isinstance(raw_url, str):
            v.error(
                DiagnosticCode.INVALID_TYPE, "'download_url' must be a string", "$.download_url"
            )
        elif not _validate_url(raw_url):
            v.error(
                DiagnosticCode.INVALID_URL,
                f"'{raw_url}' is not an absolute http(s) URL",
                "$.download_url",
            )
        else:
            download_url = raw_url

    license_value = raw.get("license")
    if license_value is not None and not isinstance(license_value, str):
        v.error(DiagnosticCode.INVALID_TYPE, "'license' must be a string", "$.license")
        license_value = None

    if not v.report.is_valid:
        return None, v.report

    metadata = DatasetMetadata(
        id=dataset_id,
        schema_version=schema_version,
        name=name,
        description=description,
        tasks=tasks,
        domains=domains,
        size=size,
        record_examples=record_examples,
        download_url=download_url,
        license=license_value,
    )
    return metadata, v.report


def parse_metadata(
    data: bytes | str, source: str = "<memory>"
) -> DatasetMetadata | ValidationReport:
    """Parse one metadata file: metadata on success, the report on failure."""
    metadata, report = parse_metadata_report(data, source)
    return metadata if metadata is not None else report


def validate_collection(datasets: list[DatasetMetadata]) -> list[ValidationReport]:
    """Cross-dataset checks over already-parsed metadata.

    Emits a DUPLICATE_ID error report for every id claimed by more than one
    dataset and a MISSING_SIZE warning report for every dataset with no size
    count at all. An empty result means the collection-level checks pass.
    """
    reports: list[ValidationReport] = []

    seen: dict[str, int] = {}
    for dataset in datasets:
        seen[dataset.id] = seen.get(dataset.id, 0) + 1
    for dataset_id in sorted(seen):
        count = seen[dataset_id]
        if count > 1:
            report = ValidationReport(file=dataset_id)
            report.diagnostics.append(
                Diagnostic(
                    DiagnosticCode.DUPLICATE_ID,
                    Severity.ERROR,
                    f"id '{dataset_id}' is used by {count} datasets",
                    "$.id",
                )
            )
            reports.append(report)

    for dataset in datasets:
        if not dataset.size.has_any_count:
            report = ValidationReport(file=dataset.id)
            report.diagnostics.append(
                Diagnostic(
                    DiagnosticCode.MISSING_SIZE,
                    Severity.WARNING,
                    "no size count present; dataset will sort into the 'unknown' size bucket",
                    "$.size",
                )
            )
            reports.append(report)

    return reports


def load_collection(directory: str | Path) -> Collection:
    """Load every ``*.json`` file in ``directory`` (non-recursive).

    Files are processed in lexicographic filename order, so the result is
    independent of filesystem enumeration order. Invalid files land in
    ``reports`` and are excluded from ``datasets``; when several files claim
    the same id, all of them are excluded.
    """
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"collection directory not found: {root}")

    parsed: list[tuple[Path, DatasetMetadata | None, ValidationReport]] = []
    for path in sorted(root.glob("*.json"), key=lambda p: p.name):
        data = path.read_bytes()
        metadata, report = parse_metadata_report(data, path.name)
        if metadata is not None and path.stem != metadata.id:
            report.diagnostics.append(
                Diagnostic(
                    DiagnosticCode.FILENAME_MISMATCH,
                    Severity.WARNING,
                    f"filename '{path.name}' does not match id '{metadata.id}'",
                    "$.id",
                )
            )
        parsed.append((path, metadata, report))

    id_counts: dict[str, int] = {}
    for _, metadata, _ in parsed:
        if metadata is not None:
            id_counts[metadata.id] = id_counts.get(metadata.id, 0) + 1

    datasets: list[DatasetMetadata] = []
    reports: list[ValidationReport] = []
    for path, metadata, report in parsed:
        if metadata is not None and id_counts[metadata.id] > 1:
            report.diagnostics.append(
                Diagnostic(
                    DiagnosticCode.DUPLICATE_ID,
                    Severity.ERROR,
                    f"id '{metadata.id}' is claimed by {id_counts[metadata.id]} files",
                    "$.id",
                )
            )
            metadata = None
        if metadata is not None:
            datasets.append(metadata)
        if report.diagnostics:
            reports.append(report)

    return Collection(datasets=datasets, reports=reports)


def metadata_to_document(metadata: DatasetMetadata) -> dict:
    """Canonical JSON document for one dataset: fixed key order, arrays in
    input order (tasks in canonical task order), absent counts omitted."""
    size: dict[str, int] = {}
    for key in SIZE_KEYS:
        value = getattr(metadata.size, key)
        if value is not None:
            size[key] = value
    document = {
        "schema_version": metadata.schema_version,
        "id": metadata.id,
        "name": metadata.name,
        "description": metadata.description,
        "tasks": [task.value for task in metadata.tasks_in_order()],
        "domains": list(metadata.domains),
        "size": size,
        "record_examples": [dict(entry) for entry in metadata.record_examples],
        "download_url": metadata.download_url,
    }
    if metadata.license is not None:
        document["license"] = metadata.license
    return document


def serialize_metadata(metadata: DatasetMetadata) -> str:
    """Canonical file serialization: 2-space indent, UTF-8 text, trailing
    newline. ``parse_metadata(serialize_metadata(m))`` reproduces ``m``."""
    return json.dumps(metadata_to_document(metadata), indent=2, ensure_ascii=False) + "\n"
