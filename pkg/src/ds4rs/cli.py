"""Command line interface.

Four subcommands cover the offline and online halves of the tool:

    ds4rs validate <dir>                      check files, report diagnostics
    ds4rs index --datasets <dir> --out <f>    build an index file
    ds4rs search --index <f> <query>          query an index from the terminal
    ds4rs serve --index <f> --listen <addr>   run the HTTP service

Exit codes: 0 success, 1 validation errors, 2 usage or configuration
errors, 3 I/O or build failures.
"""

from __future__ import annotations

import argparse
import logging
import os
import socket
import sys
import tempfile

from ds4rs.embedding import (
    DimensionMismatchError,
    Embedder,
    EmbedderKind,
    ExternalEmbedder,
    ProviderConfig,
    ProviderError,
    ReferenceEmbedder,
    REFERENCE_DIM,
)
from ds4rs.index import (
    INDEX_FILE_EXTENSION,
    IndexingError,
    build_index,
    load_index,
    serialize_index,
)
from ds4rs.metadata import (
    RecommendationTask,
    Severity,
    load_collection,
    validate_collection,
)
from ds4rs.search import (
    DEFAULT_LIMIT,
    EmptyQueryError,
    FingerprintMismatchError,
    MAX_LIMIT,
    SearchQuery,
    SizeBucket,
    search_response,
)
from ds4rs.wire import render_json, search_document

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_IO = 3

ENV_LISTEN = "DS4RS_LISTEN"
ENV_INDEX = "DS4RS_INDEX"
ENV_EMBEDDER_URL = "DS4RS_EMBEDDER_URL"
ENV_CORS_ORIGINS = "DS4RS_CORS_ORIGINS"


def _print_reports(reports) -> tuple[int, int]:
    """Print diagnostics to stderr, return (error count, warning count)."""
    errors = 0
    warnings = 0
    for report in reports:
        for diag in report.diagnostics:
            if diag.severity is Severity.ERROR:
                errors += 1
            else:
                warnings += 1
            print(
                f"{diag.severity.value.upper()} {diag.code.value} "
                f"{report.file} {diag.json_path} {diag.message}",
                file=sys.stderr,
            )
    return errors, warnings


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        collection = load_collection(args.directory)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    reports = list(collection.reports) + validate_collection(collection.datasets)
    if args.format == "json":
        sys.stdout.write(render_json([report.to_document() for report in reports]))
        has_errors = any(report.errors for report in reports)
        return EXIT_VALIDATION if has_errors else EXIT_OK
    errors, warnings = _print_reports(reports)
    print(f"{len(collection.datasets)} datasets valid")
    if errors or warnings:
        print(f"{errors} errors, {warnings} warnings", file=sys.stderr)
    return EXIT_VALIDATION if errors else EXIT_OK


_EMBEDDER_FLAGS = {
    "ref": EmbedderKind.REFERENCE,
    "external": EmbedderKind.EXTERNAL,
}


def _make_embedder(parser: argparse.ArgumentParser, args: argparse.Namespace) -> Embedder:
    kind = _EMBEDDER_FLAGS[args.embedder]
    if kind is EmbedderKind.REFERENCE:
        return ReferenceEmbedder(args.dim if args.dim else REFERENCE_DIM)
    url = args.provider_url or os.environ.get(ENV_EMBEDDER_URL)
    if not url:
        parser.error("--embedder external requires --provider-url or DS4RS_EMBEDDER_URL")
    if not args.dim:
        parser.error("--embedder external requires --dim")
    return ExternalEmbedder(ProviderConfig(url=url, timeout=args.provider_timeout), args.dim)


def cmd_index(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    try:
        collection = load_collection(args.datasets)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    reports = list(collection.reports) + validate_collection(collection.datasets)
    errors, _ = _print_reports(reports)
    if errors:
        print("error: refusing to build an index from a directory with "
              "validation errors", file=sys.stderr)
        return EXIT_VALIDATION

    embedder = _make_embedder(parser, args)
    try:
        index = build_index(collection, embedder, built_at=args.built_at)
        payload = serialize_index(index)
    except (IndexingError, ProviderError, DimensionMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    out_path = args.out
    # Write-then-rename keeps a concurrent reader from ever seeing a torn file.
    try:
        out_dir = os.path.dirname(os.path.abspath(out_path))
        fd, tmp_path = tempfile.mkstemp(dir=out_dir, suffix=INDEX_FILE_EXTENSION + ".tmp")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(payload)
            os.replace(tmp_path, out_path)
        except BaseException:
            os.unlink(tmp_path)
            raise
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(
        f"indexed {len(index.entries)} datasets "
        f"({index.embedder.fingerprint}) -> {out_path}"
    )
    return EXIT_OK


def _parse_multi(parser, values, enum_type, name):
    """Repeatable, comma-separable filter flags -> frozenset or None."""
    if not values:
        return None
    parsed = set()
    for value in values:
        for piece in value.split(","):
            piece = piece.strip()
            if not piece:
                continue
            try:
                parsed.add(enum_type(piece))
            except ValueError:
                parser.error(f"'{piece}' is not a valid {name}")
    return frozenset(parsed) if parsed else None


def cmd_search(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    index_path = args.index or os.environ.get(ENV_INDEX)
    if not index_path:
        parser.error("--index or DS4RS_INDEX is required")
    try:
        with open(index_path, "rb") as handle:
            index = load_index(handle.read())
    except (OSError, IndexingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    if not args.dim:
        args.dim = index.embedder.dim
    embedder = _make_embedder(parser, args)

    size_filter = _parse_multi(parser, args.size, SizeBucket, "size bucket")
    task_filter = _parse_multi(parser, args.task, RecommendationTask, "recommendation task")
    domain_filter = None
    if args.domain:
        domains = set()
        for value in args.domain:
            domains.update(p.strip() for p in value.split(",") if p.strip())
        domain_filter = frozenset(domains) if domains else None
    if not 1 <= args.limit <= MAX_LIMIT:
        parser.error(f"--limit must be in [1, {MAX_LIMIT}]")

    try:
        query = SearchQuery(
            text=args.query,
            size_filter=size_filter,
            task_filter=task_filter,
            domain_filter=domain_filter,
            limit=args.limit,
        )
        response = search_response(index, query, embedder)
    except (EmptyQueryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FingerprintMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ProviderError, DimensionMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    if args.format == "json":
        sys.stdout.write(render_json(search_document(args.query, response)))
        return EXIT_OK

    print(f"showing {len(response.results)} of {response.total_matched} matched")
    for rank, result in enumerate(response.results, start=1):
        print(f"{rank:3d}. {result.relevance:.6f}  {result.dataset.id}  "
              f"({result.top_field.value})")
        scores = "  ".join(
            f"{fs.field.value}={fs.score:.6f}" for fs in result.explanation
        )
        print(f"      {scores}")
    return EXIT_OK


def _parse_listen(parser: argparse.ArgumentParser, listen: str) -> tuple[str, int]:
    host, sep, port_text = listen.rpartition(":")
    if not sep or not host:
        parser.error(f"invalid listen address '{listen}', expected HOST:PORT")
    try:
        port = int(port_text)
    except ValueError:
        parser.error(f"invalid port in listen address '{listen}'")
    return host, port


def cmd_serve(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    import uvicorn

    from ds4rs.service import ServiceConfig, create_app

    index_path = args.index or os.environ.get(ENV_INDEX)
    if not index_path:
        parser.error("--index or DS4RS_INDEX is required")
    listen = args.listen or os.environ.get(ENV_LISTEN) or "127.0.0.1:8080"
    host, port = _parse_listen(parser, listen)
    cors_raw = args.cors_origins or os.environ.get(ENV_CORS_ORIGINS) or ""
    cors = tuple(p.strip() for p in cors_raw.split(",") if p.strip())

    kind = _EMBEDDER_FLAGS[args.embedder]
    provider_url = args.provider_url or os.environ.get(ENV_EMBEDDER_URL)
    if kind is EmbedderKind.EXTERNAL and not provider_url:
        parser.error("--embedder external requires --provider-url or DS4RS_EMBEDDER_URL")

    config = ServiceConfig(
        index_path=index_path,
        listen_address=listen,
        embedder_kind=kind,
        provider_url=provider_url,
        provider_timeout=args.provider_timeout,
        cors_allowed_origins=cors,
    )
    logging.basicConfig(
        level=logging.INFO, format="%(asctime)s %(name)s %(message)s"
    )
    try:
        app = create_app(config)
    except FingerprintMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, IndexingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        sock = socket.create_server((host, port))
    except OSError as exc:
        print(f"error: cannot bind {listen}: {exc}", file=sys.stderr)
        return EXIT_IO
    server = uvicorn.Server(
        uvicorn.Config(app, host=host, port=port, log_level="warning")
    )
    server.run(sockets=[sock])
    return EXIT_OK


def _add_embedder_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--embedder",
        choices=sorted(_EMBEDDER_FLAGS),
        default="ref",
        help="query embedder kind (default: ref)",
    )
    sub.add_argument("--provider-url", help="external embedding provider endpoint")
    sub.add_argument(
        "--provider-timeout", type=float, default=10.0,
        help="provider request timeout in seconds",
    )
    sub.add_argument(
        "--dim", type=int, default=0,
        help="vector dimensionality (default: 256 for ref, the index's for search)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ds4rs",
        description="Explainable semantic search over recommender dataset metadata.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate a metadata directory")
    p_validate.add_argument("directory")
    p_validate.add_argument("--format", choices=["text", "json"], default="text")

    p_index = sub.add_parser("index", help="build an index file")
    p_index.add_argument("--datasets", required=True, help="metadata directory")
    p_index.add_argument("--out", required=True, help="index file to write")
    p_index.add_argument(
        "--built-at", default=None,
        help="pin the build timestamp (RFC 3339 UTC) for reproducible output",
    )
    _add_embedder_flags(p_index)

    p_search = sub.add_parser("search", help="query an index file")
    p_search.add_argument("--index", help=f"index file (or {ENV_INDEX})")
    p_search.add_argument("query")
    p_search.add_argument("--size", action="append", help="size bucket filter")
    p_search.add_argument("--task", action="append", help="task filter")
    p_search.add_argument("--domain", action="append", help="domain filter")
    p_search.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    p_search.add_argument("--format", choices=["text", "json"], default="text")
    _add_embedder_flags(p_search)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--index", help=f"index file (or {ENV_INDEX})")
    p_serve.add_argument("--listen", help=f"HOST:PORT (or {ENV_LISTEN})")
    p_serve.add_argument(
        "--cors-origins", help=f"comma-separated allowed origins (or {ENV_CORS_ORIGINS})"
    )
    _add_embedder_flags(p_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "validate":
        return cmd_validate(args)
    if args.command == "index":
        return cmd_index(parser, args)
    if args.command == "search":
        return cmd_search(parser, args)
    if args.command == "serve":
        return cmd_serve(parser, args)
    parser.error(f"unknown command {args.command!r}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
