"""Traceability matrices between two artifact kinds, and their renderings."""

from __future__ import annotations

import html
from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter

from .metamodel import ArtifactKind, TraceGraph, is_abstract_side
from .query import DEFAULT_MAX_CHAINS, chains_between


@dataclass(frozen=True)
class Cell:
    chain_count: int
    overflowed: bool = False

    @property
    def reachable(self) -> bool:
        return self.chain_count >= 1

    def label(self) -> str:
        return f"{self.chain_count}+" if self.overflowed else str(self.chain_count)


EMPTY_CELL = Cell(0)


@dataclass(frozen=True)
class TraceMatrix:
    row_kind: ArtifactKind
    col_kind: ArtifactKind
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    cells: tuple[tuple[Cell, ...], ...]
    cap: int = DEFAULT_MAX_CHAINS

    def cell(self, row: str, col: str) -> Cell:
        return self.cells[self.rows.index(row)][self.cols.index(col)]


def _is_acyclic(graph: TraceGraph) -> bool:
    sorter = TopologicalSorter({a: [l.abstract for l in graph.refines_up(a)] for a in graph.artifacts})
    try:
        sorter.prepare()
    except CycleError:
        return False
    return True


def _topological(graph: TraceGraph) -> list[str]:
    sorter = TopologicalSorter({a: [l.abstract for l in graph.refines_up(a)] for a in graph.artifacts})
    return list(sorter.static_order())


def _path_counts_dag(graph: TraceGraph, sources: tuple[str, ...], targets: set[str],
                     order: list[str], cap: int) -> dict[str, dict[str, int]]:
    """Chain counts from each source to each target, saturated at ``cap + 1``.

    Counts are propagated bottom-up: each node keeps a sparse map of
    target -> number of chains, summed over its refinement children.
    """
    limit = cap + 1
    below: dict[str, dict[str, int]] = {}
    wanted = set(sources)
    for node in reversed(order):
        acc: dict[str, int] = {}
        for link in graph.refines_down(node):
            child = link.concrete
            if child in targets:
                acc[child] = min(limit, acc.get(child, 0) + 1)
            for tgt, n in below.get(child, {}).items():
                acc[tgt] = min(limit, acc.get(tgt, 0) + n)
        if acc:
            below[node] = acc
    return {s: below.get(s, {}) for s in wanted}


def build_matrix(graph: TraceGraph, row_kind: ArtifactKind, col_kind: ArtifactKind,
                 cap: int = DEFAULT_MAX_CHAINS) -> TraceMatrix:
    """Cell (r, c) counts simple refinement chains between r and c.

    Chains run from whichever kind is more abstract to the other one; for
    the same kind on both axes they run from row to column.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    rows = graph.ids_of_kind(row_kind)
    cols = graph.ids_of_kind(col_kind)
    row_abstract = is_abstract_side(row_kind, col_kind)
    upper, lower = (rows, cols) if row_abstract else (cols, rows)

    counts: dict[tuple[str, str], Cell] = {}
    if upper and lower and _is_acyclic(graph):
        per_source = _path_counts_dag(graph, upper, set(lower), _topological(graph), cap)
        for u, targets in per_source.items():
            for l, n in targets.items():
                counts[(u, l)] = Cell(min(n, cap), n > cap)
    else:
        for u in upper:
            for l in lower:
                found = chains_between(graph, u, l, cap)
                if found.traces:
                    counts[(u, l)] = Cell(len(found.traces), found.overflow)

    def lookup(r: str, c: str) -> Cell:
        return counts.get((r, c) if row_abstract else (c, r), EMPTY_CELL)

    cells = tuple(tuple(lookup(r, c) for c in cols) for r in rows)
    return TraceMatrix(row_kind, col_kind, rows, cols, cells, cap)


def render_csv(m: TraceMatrix) -> str:
    lines = ["," + ",".join(m.cols) if m.cols else ""]
    for r, row in zip(m.rows, m.cells):
        lines.append(",".join([r, *(c.label() for c in row)]))
    return "\n".join(lines) + "\n"


def render_text(m: TraceMatrix) -> str:
    table = [["", *m.cols]] + [[r, *(c.label() if c.reachable else "." for c in row)]
                               for r, row in zip(m.rows, m.cells)]
    widths = [max(len(line[i]) for line in table) for i in range(len(table[0]))]
    out = []
    for line in table:
        first = line[0].ljust(widths[0])
        rest = [cell.rjust(w) for cell, w in zip(line[1:], widths[1:])]
        out.append("  ".join([first, *rest]).rstrip())
    return "\n".join(out) + "\n"


def render_html(m: TraceMatrix) -> str:
    title = f"Traceability matrix: {m.row_kind.value} x {m.col_kind.value}"
    head = "".join(f"<th>{html.escape(c)}</th>" for c in m.cols)
    body = []
    for r, row in zip(m.rows, m.cells):
        tds = "".join(
            f'<td class="reachable">{c.label()}</td>' if c.reachable else "<td>0</td>" for c in row
        )
        body.append(f"<tr><th>{html.escape(r)}</th>{tds}</tr>")
    return "\n".join([
        "<!DOCTYPE html>",
        "<html>",
        "<head>",
        '<meta charset="utf-8">',
        f"<title>{html.escape(title)}</title>",
        "<style>",
        "table { border-collapse: collapse; font-family: sans-serif; }",
        "th, td { border: 1px solid #999; padding: 2px 8px; text-align: center; }",
        "td { color: #999; }",
        "td.reachable { background: #b7e1b0; color: #000; font-weight: bold; }",
        "</style>",
        "</head>",
        "<body>",
        f"<h1>{html.escape(title)}</h1>",
        "<table>",
        f"<tr><th></th>{head}</tr>",
        *body,
        "</table>",
        "</body>",
        "</html>",
        "",
    ])


RENDERERS = {"csv": render_csv, "html": render_html, "text": render_text}


def render_matrix(m: TraceMatrix, fmt: str = "csv") -> str:
    try:
        return RENDERERS[fmt](m)
    except KeyError:
        raise ValueError(f"unknown matrix format {fmt!r}") from None
