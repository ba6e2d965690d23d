"""Trace chain queries over refinement links.

A chain is a sequence of ``(source, link, target)`` triplets in declared
link orientation. Forward chains walk from abstract to concrete artifacts,
backward chains from concrete to abstract. Only refinement links take part.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, NamedTuple

from .metamodel import ArtifactKind, LinkKind, TraceGraph, TraceLink

DEFAULT_MAX_CHAINS = 1000


class UnknownArtifact(KeyError):
    def __str__(self) -> str:
        return f"unknown artifact '{self.args[0]}'"


class WrongKind(ValueError):
    pass


class Direction(str, Enum):
    forward = "forward"
    back = "back"


class Triplet(NamedTuple):
    source: str
    link: TraceLink
    target: str


@dataclass(frozen=True)
class Trace:
    start: str
    direction: Direction
    triplets: tuple[Triplet, ...]

    @property
    def ids(self) -> tuple[str, ...]:
        return (self.start, *(_far_end(t.link, self.direction) for t in self.triplets))

    @property
    def end(self) -> str:
        return self.ids[-1]

    def __len__(self) -> int:
        return len(self.triplets)

    def format(self) -> str:
        parts = [self.start]
        for t in self.triplets:
            arrow = f"-{t.link.kind.value}->" if self.direction is Direction.forward else f"<-{t.link.kind.value}-"
            parts += [arrow, _far_end(t.link, self.direction)]
        return " ".join(parts)


@dataclass(frozen=True)
class TraceQueryOptions:
    direction: Direction = Direction.forward
    to_kind: ArtifactKind | None = None
    max_depth: int | None = None
    max_chains: int = DEFAULT_MAX_CHAINS

    def __post_init__(self) -> None:
        object.__setattr__(self, "direction", Direction(self.direction))
        if self.max_chains < 1:
            raise ValueError("max_chains must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


class QueryResult(NamedTuple):
    traces: list[Trace]
    overflow: bool


def _far_end(link: TraceLink, direction: Direction) -> str:
    return link.concrete if direction is Direction.forward else link.abstract


def _steps(graph: TraceGraph, node: str, direction: Direction) -> tuple[TraceLink, ...]:
    return graph.refines_down(node) if direction is Direction.forward else graph.refines_up(node)


def _walk(
    graph: TraceGraph,
    start: str,
    direction: Direction,
    *,
    accept,
    maximal_only: bool,
    max_depth: int | None,
    within: frozenset[str] | None = None,
) -> Iterator[tuple[TraceLink, ...]]:
    """Depth-first enumeration of simple chains in lexicographic id order.

    Neighbours are visited sorted by id, so chains come out already sorted.
    With ``maximal_only`` a chain is yielded when it cannot be extended;
    otherwise every accepted prefix is yielded in pre-order. ``within``
    restricts the walk to a node subset; accepted nodes are then treated
    as terminal.
    """
    on_path = {start}
    links: list[TraceLink] = []
    stack = [iter(_steps(graph, start, direction))]
    while stack:
        step = next(stack[-1], None)
        if step is None:
            stack.pop()
            if links:
                on_path.discard(_far_end(links.pop(), direction))
            continue
        nxt = _far_end(step, direction)
        if nxt in on_path or (within is not None and nxt not in within):
            continue
        links.append(step)
        on_path.add(nxt)
        at_limit = max_depth is not None and len(links) >= max_depth
        if maximal_only:
            extendable = not at_limit and any(
                _far_end(l, direction) not in on_path for l in _steps(graph, nxt, direction)
            )
            if not extendable and accept(nxt):
                yield tuple(links)
        elif accept(nxt):
            yield tuple(links)
            at_limit = at_limit or within is not None
        if at_limit:
            on_path.discard(nxt)
            links.pop()
        else:
            stack.append(iter(_steps(graph, nxt, direction)))


def _collect(start: str, direction: Direction, chains: Iterator[tuple[TraceLink, ...]], cap: int) -> QueryResult:
    traces: list[Trace] = []
    for links in chains:
        if len(traces) == cap:
            return QueryResult(traces, True)
        traces.append(Trace(start, direction, tuple(Triplet(l.source, l, l.target) for l in links)))
    return QueryResult(traces, False)


def _require(graph: TraceGraph, artifact_id: str) -> None:
    if artifact_id not in graph:
        raise UnknownArtifact(artifact_id)


def trace_from(graph: TraceGraph, artifact_id: str, opts: TraceQueryOptions | None = None) -> QueryResult:
    """All simple refinement chains leaving ``artifact_id``.

    Without ``to_kind`` the chains are maximal. With ``to_kind`` every
    simple chain whose last artifact has that kind is returned, whether or
    not it could be extended further.
    """
    opts = opts or TraceQueryOptions()
    _require(graph, artifact_id)
    if opts.to_kind is None:
        accept = lambda _node: True  # noqa: E731
    else:
        accept = lambda node: graph.kind_of(node) is opts.to_kind  # noqa: E731
    chains = _walk(
        graph, artifact_id, opts.direction,
        accept=accept, maximal_only=opts.to_kind is None, max_depth=opts.max_depth,
    )
    return _collect(artifact_id, opts.direction, chains, opts.max_chains)


def chains_between(
    graph: TraceGraph, source: str, target: str, max_chains: int = DEFAULT_MAX_CHAINS
) -> QueryResult:
    """Simple forward chains from ``source`` down to ``target``."""
    _require(graph, source)
    _require(graph, target)
    if max_chains < 1:
        raise ValueError("max_chains must be >= 1")
    if source == target:
        return QueryResult([], False)
    chains = _walk(
        graph, source, Direction.forward,
        accept=lambda node: node == target, maximal_only=False, max_depth=None,
        within=ancestors(graph, target) | {target},
    )
    return _collect(source, Direction.forward, chains, max_chains)


def ancestors(graph: TraceGraph, artifact_id: str) -> frozenset[str]:
    """Artifacts with a refinement path down to ``artifact_id``."""
    seen: set[str] = set()
    todo = [artifact_id]
    while todo:
        for link in graph.refines_up(todo.pop()):
            if link.abstract not in seen:
                seen.add(link.abstract)
                todo.append(link.abstract)
    seen.discard(artifact_id)
    return frozenset(seen)


def services_of_module(graph: TraceGraph, module_id: str) -> list[str]:
    """Operation services reached by module <- view function <- dialogue <- service."""
    _require(graph, module_id)
    if graph.kind_of(module_id) is not ArtifactKind.SoftwareModule:
        raise WrongKind(f"'{module_id}' is a {graph.kind_of(module_id).value}, not a SoftwareModule")
    services: set[str] = set()
    for vf_link in graph.incoming(module_id, LinkKind.decomposes):
        if graph.kind_of(vf_link.source) is not ArtifactKind.ViewFunction:
            continue
        for dg_link in graph.incoming(vf_link.source, LinkKind.performs):
            for os_link in graph.incoming(dg_link.source, LinkKind.realized_by):
                services.add(os_link.source)
    return sorted(services)
