"""Per-service data submodels and the coupling between them.

An operation service selects the data classes its modules work on:
service -> dialogue -> view function -> module -> method, and each method's
class. Coupling between two services is the Jaccard similarity of their
class sets; a service's cohesion is the fraction of its classes that no
other service uses. Both are reporting policy, meant to hint at
microservice boundaries rather than decide them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .metamodel import ArtifactKind, LinkKind, TraceGraph
from .query import UnknownArtifact, WrongKind


def _methods_of_service(graph: TraceGraph, service_id: str) -> set[str]:
    methods: set[str] = set()
    for r in graph.outgoing(service_id, LinkKind.realized_by):
        for p in graph.outgoing(r.target, LinkKind.performs):
            for d in graph.outgoing(p.target, LinkKind.decomposes):
                if graph.kind_of(d.target) is not ArtifactKind.SoftwareModule:
                    continue
                for m in graph.outgoing(d.target, LinkKind.decomposes):
                    if graph.kind_of(m.target) is ArtifactKind.ClassMethod:
                        methods.add(m.target)
    return methods


def data_submodel(graph: TraceGraph, service_id: str) -> list[str]:
    if service_id not in graph:
        raise UnknownArtifact(service_id)
    kind = graph.kind_of(service_id)
    if kind is not ArtifactKind.OperationService:
        raise WrongKind(f"'{service_id}' is a {kind.value}, not an OperationService")
    classes = {
        link.target
        for method in _methods_of_service(graph, service_id)
        for link in graph.outgoing(method, LinkKind.member_of)
    }
    return sorted(classes)


def jaccard(a: set[str] | frozenset[str], b: set[str] | frozenset[str]) -> Fraction:
    """Jaccard similarity; two empty sets count as uncoupled (0)."""
    union = len(a | b)
    return Fraction(len(a & b), union) if union else Fraction(0)


@dataclass(frozen=True)
class Coupling:
    first: str
    second: str
    jaccard: Fraction


@dataclass(frozen=True)
class SubmodelReport:
    assignments: dict[str, tuple[str, ...]]
    shared: tuple[tuple[str, tuple[str, ...]], ...]
    coupling: tuple[Coupling, ...]
    cohesion: dict[str, Fraction]

    def to_dict(self) -> dict:
        return {
            "assignments": {svc: list(classes) for svc, classes in self.assignments.items()},
            "shared": [{"class": cls, "services": list(svcs)} for cls, svcs in self.shared],
            "coupling": [
                {"services": [c.first, c.second], "jaccard": _frac(c.jaccard), "value": float(c.jaccard)}
                for c in self.coupling
            ],
            "cohesion": {
                svc: {"ratio": _frac(value), "value": float(value)} for svc, value in self.cohesion.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        lines = ["Data submodels:"]
        if not self.assignments:
            lines.append("  (no operation services)")
        for svc, classes in self.assignments.items():
            lines.append(f"  {svc}: {', '.join(classes) if classes else '-'}"
                         f"  (cohesion {_frac(self.cohesion[svc])})")
        lines.append("Shared classes:")
        if not self.shared:
            lines.append("  none")
        for cls, svcs in self.shared:
            lines.append(f"  {cls}: {', '.join(svcs)}")
        lines.append("Coupling (Jaccard):")
        if not self.coupling:
            lines.append("  none")
        width = max((len(c.first) + len(c.second) for c in self.coupling), default=0) + 3
        for c in self.coupling:
            pair = f"{c.first} ~ {c.second}"
            lines.append(f"  {pair:<{width}}  {_frac(c.jaccard)}")
        return "\n".join(lines) + "\n"


def _frac(value: Fraction) -> str:
    return str(value)


def submodel_report(graph: TraceGraph) -> SubmodelReport:
    services = graph.ids_of_kind(ArtifactKind.OperationService)
    assignments = {svc: tuple(data_submodel(graph, svc)) for svc in services}
    users: dict[str, list[str]] = {}
    for svc, classes in assignments.items():
        for cls in classes:
            users.setdefault(cls, []).append(svc)
    shared = tuple((cls, tuple(svcs)) for cls, svcs in sorted(users.items()) if len(svcs) > 1)
    coupling = tuple(
        Coupling(a, b, jaccard(set(assignments[a]), set(assignments[b])))
        for a, b in combinations(services, 2)
    )
    cohesion = {}
    for svc, classes in assignments.items():
        exclusive = sum(1 for cls in classes if len(users[cls]) == 1)
        cohesion[svc] = Fraction(exclusive, len(classes)) if classes else Fraction(1)
    return SubmodelReport(assignments, shared, coupling, cohesion)
