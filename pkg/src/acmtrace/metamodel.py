"""Typed artifact/link universe and the immutable traceability graph.

Artifacts live on abstraction layers running top-down from survey material
(layer 0) to data classes and methods (layer 5). Links are typed and only
legal between specific artifact kinds. Refinement links form the trace
chains; structural links (``allocated_to``, ``member_of``, ``constrains``,
``submodel_of``) never appear inside a chain.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping

from .diagnostics import Diagnostic, Severity, SourceLocation

ID_PATTERN = re.compile(r"[A-Za-z_][A-Za-z0-9_.-]*\Z")


class ArtifactKind(str, Enum):
    SurveyArtifact = "SurveyArtifact"
    Requirement = "Requirement"
    BusinessProcess = "BusinessProcess"
    BusinessFunction = "BusinessFunction"
    BusinessOperation = "BusinessOperation"
    AutomatedFunction = "AutomatedFunction"
    OperationService = "OperationService"
    Dialogue = "Dialogue"
    ViewFunction = "ViewFunction"
    FunctionalComponent = "FunctionalComponent"
    SoftwareModule = "SoftwareModule"
    DataClass = "DataClass"
    ClassMethod = "ClassMethod"

    @property
    def layer(self) -> int | None:
        return _LAYERS[self]

    @property
    def keyword(self) -> str:
        return KIND_KEYWORDS[self]

    @property
    def rank(self) -> int:
        """Top-down position; lower is more abstract. Breaks ties within a layer."""
        return _RANKS[self]


K = ArtifactKind

_LAYERS: dict[ArtifactKind, int | None] = {
    K.SurveyArtifact: 0,
    K.Requirement: None,
    K.BusinessProcess: 1,
    K.BusinessFunction: 1,
    K.BusinessOperation: 1,
    K.AutomatedFunction: 1,
    K.OperationService: 2,
    K.Dialogue: 3,
    K.ViewFunction: 3,
    K.FunctionalComponent: 4,
    K.SoftwareModule: 4,
    K.DataClass: 5,
    K.ClassMethod: 5,
}

_RANKS = {kind: i for i, kind in enumerate(ArtifactKind)}

KIND_KEYWORDS: dict[ArtifactKind, str] = {
    K.SurveyArtifact: "survey",
    K.Requirement: "requirement",
    K.BusinessProcess: "process",
    K.BusinessFunction: "function",
    K.BusinessOperation: "operation",
    K.AutomatedFunction: "autofn",
    K.OperationService: "service",
    K.Dialogue: "dialogue",
    K.ViewFunction: "viewfn",
    K.FunctionalComponent: "component",
    K.SoftwareModule: "module",
    K.DataClass: "class",
    K.ClassMethod: "method",
}
KEYWORD_KINDS: dict[str, ArtifactKind] = {kw: kind for kind, kw in KIND_KEYWORDS.items()}

LAYER_COUNT = 6


class LinkKind(str, Enum):
    justifies = "justifies"
    constrains = "constrains"
    refines = "refines"
    decomposes = "decomposes"
    contains = "contains"
    automated_by = "automated_by"
    bundled_in = "bundled_in"
    realized_by = "realized_by"
    performs = "performs"
    allocated_to = "allocated_to"
    member_of = "member_of"
    submodel_of = "submodel_of"

    @property
    def refinement(self) -> bool:
        return self in _ABSTRACT_END

    @property
    def abstract_end(self) -> str | None:
        """``"source"`` or ``"target"`` for refinement kinds, else None."""
        return _ABSTRACT_END.get(self)

    @property
    def legal_pairs(self) -> frozenset[tuple[ArtifactKind, ArtifactKind]]:
        return LEGAL_PAIRS[self]


L = LinkKind

_ANY_CONSTRAINED = [k for k in ArtifactKind if k not in (K.SurveyArtifact, K.Requirement)]

LEGAL_PAIRS: Mapping[LinkKind, frozenset[tuple[ArtifactKind, ArtifactKind]]] = MappingProxyType({
    L.justifies: frozenset(
        (K.SurveyArtifact, dst)
        for dst in (K.BusinessProcess, K.BusinessFunction, K.BusinessOperation,
                    K.AutomatedFunction, K.Requirement)
    ),
    L.decomposes: frozenset({
        (K.BusinessProcess, K.BusinessFunction),
        (K.BusinessFunction, K.BusinessFunction),
        (K.BusinessFunction, K.BusinessOperation),
        (K.ViewFunction, K.SoftwareModule),
        (K.SoftwareModule, K.ClassMethod),
    }),
    L.contains: frozenset({(K.BusinessOperation, K.AutomatedFunction)}),
    L.automated_by: frozenset({(K.BusinessOperation, K.OperationService)}),
    L.bundled_in: frozenset({(K.AutomatedFunction, K.OperationService)}),
    L.realized_by: frozenset({(K.OperationService, K.Dialogue)}),
    L.performs: frozenset({(K.Dialogue, K.ViewFunction)}),
    L.refines: frozenset({(K.Requirement, K.Requirement)}),
    L.allocated_to: frozenset({(K.SoftwareModule, K.FunctionalComponent)}),
    L.member_of: frozenset({(K.ClassMethod, K.DataClass)}),
    L.constrains: frozenset((K.Requirement, dst) for dst in _ANY_CONSTRAINED),
    L.submodel_of: frozenset({(K.DataClass, K.OperationService)}),
})

_ABSTRACT_END: dict[LinkKind, str] = {
    kind: "source"
    for kind in (L.justifies, L.decomposes, L.contains, L.automated_by,
                 L.bundled_in, L.realized_by, L.performs, L.refines)
}

REFINEMENT_KINDS = frozenset(_ABSTRACT_END)


def legality(kind: LinkKind, src: ArtifactKind, dst: ArtifactKind) -> bool:
    return (src, dst) in LEGAL_PAIRS[kind]


def is_abstract_side(row_kind: ArtifactKind, col_kind: ArtifactKind) -> bool:
    """Whether ``row_kind`` sits above ``col_kind`` in the top-down ordering."""
    return row_kind.rank <= col_kind.rank


@dataclass(frozen=True)
class Artifact:
    id: str
    kind: ArtifactKind
    name: str
    description: str | None = None
    attrs: Mapping[str, str] = field(default_factory=dict)
    loc: SourceLocation = field(default=SourceLocation("<memory>"), compare=False)

    def __post_init__(self) -> None:
        if not ID_PATTERN.match(self.id):
            raise ValueError(f"invalid artifact id {self.id!r}")
        if not self.name:
            raise ValueError(f"artifact {self.id} has an empty name")
        object.__setattr__(self, "attrs", MappingProxyType(dict(sorted(self.attrs.items()))))

    def __hash__(self) -> int:
        return hash((self.id, self.kind))


@dataclass(frozen=True)
class TraceLink:
    kind: LinkKind
    source: str
    target: str
    rationale: str | None = None
    seq: int | None = None
    loc: SourceLocation = field(default=SourceLocation("<memory>"), compare=False)

    def __post_init__(self) -> None:
        if self.seq is not None:
            if self.kind is not LinkKind.realized_by:
                raise ValueError(f"seq is only allowed on realized_by links, not {self.kind.value}")
            if self.seq < 1:
                raise ValueError("seq must be a positive integer")

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.source, self.kind.value, self.target)

    @property
    def abstract(self) -> str:
        return self.target if self.kind.abstract_end == "target" else self.source

    @property
    def concrete(self) -> str:
        return self.source if self.kind.abstract_end == "target" else self.target

    def __str__(self) -> str:
        return f"{self.source} -{self.kind.value}-> {self.target}"


class GraphBuildError(Exception):
    """Raised by :func:`build_graph` with every structural problem found."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(d.message for d in diagnostics))


# Builder error codes; validator rules use R001..R016.
DUPLICATE_ID = "B001"
UNKNOWN_ENDPOINT = "B002"
DUPLICATE_LINK = "B003"
ILLEGAL_LINK_PAIR = "B004"


class TraceGraph:
    """Immutable, indexed artifact graph. Construct with :func:`build_graph`."""

    def __init__(self, artifacts: Iterable[Artifact], links: Iterable[TraceLink]):
        self.artifacts: Mapping[str, Artifact] = MappingProxyType(
            {a.id: a for a in sorted(artifacts, key=lambda a: a.id)}
        )
        self.links: tuple[TraceLink, ...] = tuple(sorted(links, key=lambda l: l.key))
        out: dict[str, dict[LinkKind, list[TraceLink]]] = defaultdict(lambda: defaultdict(list))
        inc: dict[str, dict[LinkKind, list[TraceLink]]] = defaultdict(lambda: defaultdict(list))
        for link in self.links:
            out[link.source][link.kind].append(link)
            inc[link.target][link.kind].append(link)
        self._out = {k: {lk: tuple(v) for lk, v in d.items()} for k, d in out.items()}
        self._in = {k: {lk: tuple(v) for lk, v in d.items()} for k, d in inc.items()}
        self._by_kind: dict[ArtifactKind, tuple[str, ...]] = {kind: () for kind in ArtifactKind}
        grouped: dict[ArtifactKind, list[str]] = defaultdict(list)
        for a in self.artifacts.values():
            grouped[a.kind].append(a.id)
        self._by_kind.update({k: tuple(v) for k, v in grouped.items()})
        # refinement adjacency oriented abstract -> concrete, sorted by (neighbour id, kind)
        down: dict[str, list[TraceLink]] = defaultdict(list)
        up: dict[str, list[TraceLink]] = defaultdict(list)
        for link in self.links:
            if link.kind.refinement:
                down[link.abstract].append(link)
                up[link.concrete].append(link)
        self._down = {k: tuple(sorted(v, key=lambda l: (l.concrete, l.kind.value))) for k, v in down.items()}
        self._up = {k: tuple(sorted(v, key=lambda l: (l.abstract, l.kind.value))) for k, v in up.items()}

    def __contains__(self, artifact_id: str) -> bool:
        return artifact_id in self.artifacts

    def __len__(self) -> int:
        return len(self.artifacts)

    def kind_of(self, artifact_id: str) -> ArtifactKind:
        return self.artifacts[artifact_id].kind

    def ids_of_kind(self, kind: ArtifactKind) -> tuple[str, ...]:
        return self._by_kind[kind]

    def outgoing(self, artifact_id: str, kind: LinkKind | None = None) -> tuple[TraceLink, ...]:
        by_kind = self._out.get(artifact_id, {})
        if kind is not None:
            return by_kind.get(kind, ())
        return tuple(l for lk in LinkKind for l in by_kind.get(lk, ()))

    def incoming(self, artifact_id: str, kind: LinkKind | None = None) -> tuple[TraceLink, ...]:
        by_kind = self._in.get(artifact_id, {})
        if kind is not None:
            return by_kind.get(kind, ())
        return tuple(l for lk in LinkKind for l in by_kind.get(lk, ()))

    def refines_down(self, artifact_id: str) -> tuple[TraceLink, ...]:
        """Refinement links whose abstract end is ``artifact_id``."""
        return self._down.get(artifact_id, ())

    def refines_up(self, artifact_id: str) -> tuple[TraceLink, ...]:
        """Refinement links whose concrete end is ``artifact_id``."""
        return self._up.get(artifact_id, ())

    def degree(self, artifact_id: str) -> int:
        return len(self.outgoing(artifact_id)) + len(self.incoming(artifact_id))


def build_graph(artifacts: Iterable[Artifact], links: Iterable[TraceLink]) -> TraceGraph:
    """Resolve links against artifacts and index them.

    All problems are collected before raising :class:`GraphBuildError`.
    """
    artifacts = list(artifacts)
    links = list(links)
    errors: list[Diagnostic] = []
    by_id: dict[str, Artifact] = {}
    for art in artifacts:
        first = by_id.get(art.id)
        if first is not None:
            errors.append(Diagnostic(
                DUPLICATE_ID, Severity.ERROR,
                f"DuplicateId: artifact '{art.id}' already declared at {first.loc}",
                art.loc, (art.id,),
            ))
            continue
        by_id[art.id] = art

    seen: dict[tuple[str, str, str], TraceLink] = {}
    for link in links:
        missing = [end for end in (link.source, link.target) if end not in by_id]
        for end in dict.fromkeys(missing):
            errors.append(Diagnostic(
                UNKNOWN_ENDPOINT, Severity.ERROR,
                f"UnknownEndpoint: '{end}' in link {link} is not declared",
                link.loc, (end,),
            ))
        if link.key in seen:
            errors.append(Diagnostic(
                DUPLICATE_LINK, Severity.ERROR,
                f"DuplicateLink: {link} already declared at {seen[link.key].loc}",
                link.loc, (link.source, link.target),
            ))
            continue
        seen[link.key] = link
        if not missing:
            src, dst = by_id[link.source].kind, by_id[link.target].kind
            if not legality(link.kind, src, dst):
                errors.append(Diagnostic(
                    ILLEGAL_LINK_PAIR, Severity.ERROR,
                    f"IllegalLinkPair: {link.kind.value} is not allowed from "
                    f"{src.value} to {dst.value} ({link})",
                    link.loc, (link.source, link.target),
                ))
    if errors:
        raise GraphBuildError(errors)
    return TraceGraph(by_id.values(), seen.values())
