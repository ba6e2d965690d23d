"""``acmtrace`` command line: parse -> validate -> query/matrix/cluster/export.

Exit status: 0 clean, 1 validation errors (or warnings with
``--deny-warnings``), 2 parse, IO or usage failure. Reports go to stdout,
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter
from pathlib import Path
from typing import Sequence, TextIO

from . import __version__
from .clustering import submodel_report
from .diagnostics import Diagnostic, format_diagnostics, has_errors, sort_diagnostics
from .dsl import ParseResult, parse_file
from .interchange import export_dot, export_json
from .matrix import RENDERERS, build_matrix, render_matrix
from .metamodel import KEYWORD_KINDS, LAYER_COUNT, ArtifactKind, GraphBuildError, LinkKind, TraceGraph, build_graph
from .query import DEFAULT_MAX_CHAINS, Direction, TraceQueryOptions, chains_between, trace_from
from .validator import validate

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2


class CommandError(Exception):
    def __init__(self, code: int, message: str = "", diagnostics: list[Diagnostic] | None = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.diagnostics = diagnostics or []


def _load(path: str) -> ParseResult:
    try:
        result = parse_file(path)
    except (OSError, UnicodeDecodeError) as exc:
        raise CommandError(EXIT_USAGE, f"acmtrace: cannot read {path}: {exc}") from None
    if not result.ok:
        raise CommandError(EXIT_USAGE, diagnostics=result.diagnostics)
    return result


def _build(result: ParseResult) -> TraceGraph:
    try:
        return build_graph(result.artifacts, result.links)
    except GraphBuildError as exc:
        raise CommandError(EXIT_INVALID, diagnostics=sort_diagnostics(exc.diagnostics)) from None


def _gated_graph(path: str) -> TraceGraph:
    """Graph for commands that only run on models without validation errors."""
    graph = _build(_load(path))
    diagnostics = validate(graph)
    if has_errors(diagnostics):
        raise CommandError(EXIT_INVALID, "acmtrace: model has validation errors; run 'acmtrace check'",
                           [d for d in diagnostics if d.is_error])
    return graph


def _kind(keyword: str) -> ArtifactKind:
    return KEYWORD_KINDS[keyword]


def cmd_check(args, out: TextIO, err: TextIO) -> int:
    result = _load(args.path)
    try:
        diagnostics = validate(_build(result))
    except CommandError as exc:
        diagnostics = exc.diagnostics
    if diagnostics or args.format == "json":
        err.write(format_diagnostics(diagnostics, args.format))
    if has_errors(diagnostics) or (args.deny_warnings and diagnostics):
        return EXIT_INVALID
    return EXIT_OK


def cmd_trace(args, out: TextIO, err: TextIO) -> int:
    graph = _gated_graph(args.path)
    for ident in filter(None, (args.source, args.to)):
        if ident not in graph:
            raise CommandError(EXIT_USAGE, f"acmtrace: unknown artifact '{ident}'")
    if args.to:
        if args.to_kind or args.dir != "forward" or args.max_depth:
            raise CommandError(EXIT_USAGE, "acmtrace: --to cannot be combined with --dir back, --to-kind or --max-depth")
        result = chains_between(graph, args.source, args.to, args.max_chains)
    else:
        opts = TraceQueryOptions(
            direction=Direction(args.dir),
            to_kind=_kind(args.to_kind) if args.to_kind else None,
            max_depth=args.max_depth,
            max_chains=args.max_chains,
        )
        result = trace_from(graph, args.source, opts)
    if not result.traces:
        out.write("no chains\n")
    for trace in result.traces:
        out.write(trace.format() + "\n")
    if result.overflow:
        err.write(f"acmtrace: output truncated at {args.max_chains} chains\n")
    return EXIT_OK


def cmd_matrix(args, out: TextIO, err: TextIO) -> int:
    graph = _gated_graph(args.path)
    m = build_matrix(graph, _kind(args.rows), _kind(args.cols), args.cap)
    out.write(render_matrix(m, args.format))
    return EXIT_OK


def cmd_clusters(args, out: TextIO, err: TextIO) -> int:
    report = submodel_report(_gated_graph(args.path))
    out.write(report.to_json() if args.format == "json" else report.to_text())
    return EXIT_OK


def cmd_export(args, out: TextIO, err: TextIO) -> int:
    graph = _gated_graph(args.path)
    text = export_json(graph) if args.format == "json" else export_dot(graph)
    if args.output:
        try:
            Path(args.output).write_text(text, encoding="utf-8", newline="\n")
        except OSError as exc:
            raise CommandError(EXIT_USAGE, f"acmtrace: cannot write {args.output}: {exc}") from None
    else:
        out.write(text)
    return EXIT_OK


def cmd_stats(args, out: TextIO, err: TextIO) -> int:
    result = _load(args.path)
    kinds = Counter(a.kind for a in result.artifacts)
    links = Counter(l.kind for l in result.links)
    kw_width = max(len(k.keyword) + len(k.value) for k in ArtifactKind) + 3
    lines = ["artifacts by kind:"]
    for kind in ArtifactKind:
        lines.append(f"  {f'{kind.keyword} ({kind.value})':<{kw_width}}  {kinds[kind]:>6}")
    lines.append("links by kind:")
    link_width = max(len(k.value) for k in LinkKind)
    for kind in LinkKind:
        lines.append(f"  {kind.value:<{link_width}}  {links[kind]:>6}")
    lines.append("layer coverage:")
    for layer in range(LAYER_COUNT):
        layer_kinds = [k for k in ArtifactKind if k.layer == layer]
        present = [k for k in layer_kinds if kinds[k]]
        total = sum(kinds[k] for k in layer_kinds)
        lines.append(f"  layer {layer}: {total} artifacts, {len(present)}/{len(layer_kinds)} kinds present")
    lines.append(f"  requirements: {kinds[ArtifactKind.Requirement]} artifacts")
    lines.append(f"total: {len(result.artifacts)} artifacts, {len(result.links)} links")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def _positive(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    kinds = list(KEYWORD_KINDS)
    parser = argparse.ArgumentParser(prog="acmtrace", description="Traceability checks and reports for .acm models.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a model and print diagnostics")
    p.add_argument("path")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--deny-warnings", action="store_true", help="exit 1 on warnings too")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("trace", help="list trace chains from an artifact")
    p.add_argument("path")
    p.add_argument("--from", dest="source", required=True, metavar="ID")
    p.add_argument("--dir", choices=[d.value for d in Direction], default="forward")
    p.add_argument("--to-kind", choices=kinds)
    p.add_argument("--to", metavar="ID", help="list chains down to this artifact instead")
    p.add_argument("--max-depth", type=_positive)
    p.add_argument("--max-chains", type=_positive, default=DEFAULT_MAX_CHAINS)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("matrix", help="traceability matrix between two kinds")
    p.add_argument("path")
    p.add_argument("--rows", choices=kinds, required=True)
    p.add_argument("--cols", choices=kinds, required=True)
    p.add_argument("--format", choices=sorted(RENDERERS), default="csv")
    p.add_argument("--cap", type=_positive, default=DEFAULT_MAX_CHAINS)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("clusters", help="data submodels per operation service")
    p.add_argument("path")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_clusters)

    p = sub.add_parser("export", help="canonical JSON or DOT export")
    p.add_argument("path")
    p.add_argument("--format", choices=["json", "dot"], default="json")
    p.add_argument("-o", "--output", metavar="FILE")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("stats", help="artifact and link counts")
    p.add_argument("path")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out, err)
    except CommandError as exc:
        if exc.diagnostics:
            err.write(format_diagnostics(exc.diagnostics))
        if exc.message:
            err.write(exc.message + "\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
