"""Completeness and layering rules over a built :class:`TraceGraph`.

Each rule is a pure function ``graph -> list[Diagnostic]`` registered in
:data:`CATALOG`. Errors make a model unfit for tracing; warnings flag
gaps that may be intentional (pending methods, shared modules, ...).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable

from .clustering import data_submodel
from .diagnostics import Diagnostic, Severity, sort_diagnostics
from .metamodel import ArtifactKind, LinkKind, TraceGraph, legality
from .query import services_of_module

K = ArtifactKind
L = LinkKind
E = Severity.ERROR
W = Severity.WARNING

Checker = Callable[[TraceGraph], list[Diagnostic]]


@dataclass(frozen=True)
class Rule:
    rule_id: str
    severity: Severity
    description: str
    checker: Checker


CATALOG: list[Rule] = []


def rule(rule_id: str, severity: Severity, description: str):
    def register(fn: Callable[[TraceGraph, Callable[..., Diagnostic]], list[Diagnostic]]) -> Checker:
        def checker(graph: TraceGraph) -> list[Diagnostic]:
            def diag(message: str, artifact_or_link, *related: str, severity: Severity = severity) -> Diagnostic:
                ids = related or (getattr(artifact_or_link, "id", None),)
                return Diagnostic(rule_id, severity, message, artifact_or_link.loc, tuple(i for i in ids if i))
            return fn(graph, diag)

        checker.__name__ = fn.__name__
        checker.__doc__ = fn.__doc__
        CATALOG.append(Rule(rule_id, severity, description, checker))
        return checker

    return register


def _of(graph: TraceGraph, kind: ArtifactKind):
    return [graph.artifacts[i] for i in graph.ids_of_kind(kind)]


@rule("R001", E, "link endpoints respect the link kind's legality table")
def check_legality(graph, diag):
    out = []
    for link in graph.links:
        src, dst = graph.kind_of(link.source), graph.kind_of(link.target)
        if not legality(link.kind, src, dst):
            out.append(diag(f"{link.kind.value} is not allowed from {src.value} to {dst.value}",
                            link, link.source, link.target))
    return out


@rule("R002", E, "refinement links form no cycles")
def check_acyclic(graph, diag):
    out = []
    for component in _refinement_cycles(graph):
        first = graph.artifacts[component[0]]
        out.append(diag(f"refinement cycle through {', '.join(component)}", first, *component))
    return out


def _refinement_cycles(graph: TraceGraph) -> list[list[str]]:
    """Strongly connected components with a cycle, iterative Tarjan."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    found: list[list[str]] = []
    counter = 0
    for root in graph.artifacts:
        if root in index:
            continue
        work = [(root, iter(graph.refines_down(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            link = next(it, None)
            if link is not None:
                nxt = link.concrete
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(graph.refines_down(nxt))))
                elif nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                members = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    members.append(member)
                    if member == node:
                        break
                self_loop = any(l.concrete == node for l in graph.refines_down(node))
                if len(members) > 1 or self_loop:
                    found.append(sorted(members))
    return sorted(found)


@rule("R003", E, "every business function decomposes down to a business operation")
def check_function_reaches_operation(graph, diag):
    reaching: set[str] = set()
    changed = True
    functions = _of(graph, K.BusinessFunction)
    while changed:
        changed = False
        for fn in functions:
            if fn.id in reaching:
                continue
            for link in graph.outgoing(fn.id, L.decomposes):
                if graph.kind_of(link.target) is K.BusinessOperation or link.target in reaching:
                    reaching.add(fn.id)
                    changed = True
                    break
    return [
        diag(f"business function {fn.id} has no decomposition path to a business operation", fn)
        for fn in functions if fn.id not in reaching
    ]


_BUSINESS = (K.BusinessProcess, K.BusinessFunction, K.BusinessOperation)


@rule("R004", W, "business elements are justified by survey material (directly or via an ancestor)")
def check_justified(graph, diag):
    justified = {
        a.id for kind in _BUSINESS for a in _of(graph, kind)
        if any(graph.kind_of(l.source) is K.SurveyArtifact for l in graph.incoming(a.id, L.justifies))
    }
    todo = list(justified)
    while todo:
        for link in graph.outgoing(todo.pop(), L.decomposes):
            if graph.kind_of(link.target) in _BUSINESS and link.target not in justified:
                justified.add(link.target)
                todo.append(link.target)
    return [
        diag(f"{a.kind.value} {a.id} is not justified by any survey artifact", a)
        for kind in _BUSINESS for a in _of(graph, kind) if a.id not in justified
    ]


@rule("R005", E, "a business operation with automated functions has exactly one operation service")
def check_operation_service(graph, diag):
    out = []
    for op in _of(graph, K.BusinessOperation):
        if not graph.outgoing(op.id, L.contains):
            continue
        services = [l.target for l in graph.outgoing(op.id, L.automated_by)]
        if not services:
            out.append(diag(f"business operation {op.id} contains automated functions "
                            f"but is not automated_by any operation service", op))
        elif len(services) > 1:
            out.append(diag(f"business operation {op.id} is automated_by {len(services)} "
                            f"operation services ({', '.join(services)}); expected one", op, op.id, *services))
    return out


def _needs_at_least_one(kind: ArtifactKind, link: LinkKind, target_kind: ArtifactKind, verb: str):
    def check(graph, diag):
        return [
            diag(f"{kind.value} {a.id} {verb} no {target_kind.value}", a)
            for a in _of(graph, kind)
            if not any(graph.kind_of(l.target) is target_kind for l in graph.outgoing(a.id, link))
        ]
    return check


def _needs_exactly_one(kind: ArtifactKind, link: LinkKind, target_kind: ArtifactKind):
    def check(graph, diag):
        out = []
        for a in _of(graph, kind):
            targets = [l.target for l in graph.outgoing(a.id, link)]
            if len(targets) != 1:
                found = f"{len(targets)} ({', '.join(targets)})" if targets else "none"
                out.append(diag(f"{kind.value} {a.id} must be {link.value} exactly one "
                                f"{target_kind.value}; found {found}", a, a.id, *targets))
        return out
    return check


rule("R006", E, "every operation service is realized by at least one dialogue")(
    _needs_at_least_one(K.OperationService, L.realized_by, K.Dialogue, "is realized_by"))
rule("R007", E, "every dialogue performs at least one view function")(
    _needs_at_least_one(K.Dialogue, L.performs, K.ViewFunction, "performs"))
rule("R008", E, "every view function decomposes into at least one software module")(
    _needs_at_least_one(K.ViewFunction, L.decomposes, K.SoftwareModule, "decomposes into"))
rule("R009", E, "every software module is allocated to exactly one functional component")(
    _needs_exactly_one(K.SoftwareModule, L.allocated_to, K.FunctionalComponent))
rule("R010", W, "every software module decomposes into at least one class method")(
    _needs_at_least_one(K.SoftwareModule, L.decomposes, K.ClassMethod, "decomposes into"))
rule("R011", E, "every class method is a member of exactly one data class")(
    _needs_exactly_one(K.ClassMethod, L.member_of, K.DataClass))


@rule("R012", E, "declared submodel assignments agree with the derived data submodel")
def check_submodel(graph, diag):
    out = []
    derived: dict[str, list[str]] = {}
    for link in graph.links:
        if link.kind is not L.submodel_of:
            continue
        if link.target not in derived:
            derived[link.target] = data_submodel(graph, link.target)
        if link.source not in derived[link.target]:
            out.append(diag(f"data class {link.source} is declared submodel_of {link.target} "
                            f"but no method of it is reached from that service", link,
                            link.source, link.target))
    return out


@rule("R013", W, "artifacts take part in at least one link")
def check_orphans(graph, diag):
    return [
        diag(f"{a.kind.value} {a.id} has no links", a)
        for a in graph.artifacts.values() if graph.degree(a.id) == 0
    ]


@rule("R014", E, "dialogue sequence numbers within a service are unique")
def check_seq(graph, diag):
    out = []
    for svc in _of(graph, K.OperationService):
        links = [l for l in graph.outgoing(svc.id, L.realized_by) if l.seq is not None]
        counts = Counter(l.seq for l in links)
        for seq, n in sorted(counts.items()):
            if n > 1:
                clashing = [l for l in links if l.seq == seq]
                out.append(diag(f"operation service {svc.id} uses seq {seq} for {n} dialogues "
                                f"({', '.join(l.target for l in clashing)})", clashing[-1],
                                svc.id, *(l.target for l in clashing)))
    return out


@rule("R015", W, "every software module backtraces to exactly one operation service")
def check_module_backtrace(graph, diag):
    out = []
    for module in _of(graph, K.SoftwareModule):
        services = services_of_module(graph, module.id)
        if not services:
            out.append(diag(f"software module {module.id} does not backtrace to any operation service", module))
        elif len(services) > 1:
            out.append(diag(f"software module {module.id} backtraces to {len(services)} operation "
                            f"services ({', '.join(services)})", module, module.id, *services))
    return out


@rule("R016", W, "every requirement constrains an element or refines another requirement")
def check_requirements(graph, diag):
    return [
        diag(f"requirement {r.id} neither constrains an element nor refines another requirement", r)
        for r in _of(graph, K.Requirement)
        if not graph.outgoing(r.id, L.constrains) and not graph.outgoing(r.id, L.refines)
    ]


RULES = {r.rule_id: r for r in CATALOG}


def validate(graph: TraceGraph) -> list[Diagnostic]:
    """Run every catalog rule; result is sorted by rule id, then location."""
    found: list[Diagnostic] = []
    for r in CATALOG:
        found.extend(r.checker(graph))
    return sort_diagnostics(found)
