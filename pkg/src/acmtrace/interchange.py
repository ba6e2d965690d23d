"""Canonical JSON import/export and Graphviz DOT export."""

from __future__ import annotations

import json
import re

from .diagnostics import SourceLocation
from .metamodel import LAYER_COUNT, Artifact, ArtifactKind, LinkKind, TraceGraph, TraceLink

FORMAT_VERSION = "1"


class InterchangeError(ValueError):
    pass


def to_document(graph: TraceGraph) -> dict:
    artifacts = []
    for a in graph.artifacts.values():
        entry = {"id": a.id, "kind": a.kind.value, "name": a.name}
        if a.description is not None:
            entry["description"] = a.description
        if a.attrs:
            entry["attrs"] = dict(a.attrs)
        artifacts.append(entry)
    links = []
    for l in graph.links:
        entry = {"kind": l.kind.value, "source": l.source, "target": l.target}
        if l.rationale is not None:
            entry["rationale"] = l.rationale
        if l.seq is not None:
            entry["seq"] = l.seq
        links.append(entry)
    return {"version": FORMAT_VERSION, "artifacts": artifacts, "links": links}


def export_json(graph: TraceGraph) -> str:
    return json.dumps(to_document(graph), indent=2, ensure_ascii=False) + "\n"


def _field(entry: dict, key: str, where: str, *, required: bool = True, kind: type = str):
    if key not in entry:
        if required:
            raise InterchangeError(f"{where}: missing '{key}'")
        return None
    value = entry[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise InterchangeError(f"{where}: '{key}' must be {kind.__name__}")
    return value


def import_json(text: str, file_name: str = "<json>") -> tuple[list[Artifact], list[TraceLink]]:
    """Read a document produced by :func:`export_json` (any formatting or key order)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InterchangeError(f"malformed document: {exc}") from None
    if not isinstance(doc, dict):
        raise InterchangeError("malformed document: top level must be an object")
    version = doc.get("version")
    if version != FORMAT_VERSION:
        raise InterchangeError(f"version mismatch: expected {FORMAT_VERSION!r}, got {version!r}")
    raw_artifacts, raw_links = doc.get("artifacts"), doc.get("links")
    if not isinstance(raw_artifacts, list) or not isinstance(raw_links, list):
        raise InterchangeError("malformed document: 'artifacts' and 'links' must be lists")

    loc = SourceLocation(file_name, 1, 1)
    artifacts = []
    for i, entry in enumerate(raw_artifacts):
        where = f"artifacts[{i}]"
        if not isinstance(entry, dict):
            raise InterchangeError(f"{where}: must be an object")
        ident = _field(entry, "id", where)
        where = f"{where} ({ident})"
        kind_name = _field(entry, "kind", where)
        try:
            kind = ArtifactKind(kind_name)
        except ValueError:
            raise InterchangeError(f"{where}: unknown kind {kind_name!r}") from None
        attrs = _field(entry, "attrs", where, required=False, kind=dict) or {}
        if not all(isinstance(v, str) for v in attrs.values()):
            raise InterchangeError(f"{where}: attribute values must be strings")
        try:
            artifacts.append(Artifact(
                id=ident, kind=kind, name=_field(entry, "name", where),
                description=_field(entry, "description", where, required=False),
                attrs=attrs, loc=loc,
            ))
        except ValueError as exc:
            raise InterchangeError(f"{where}: {exc}") from None

    links = []
    for i, entry in enumerate(raw_links):
        where = f"links[{i}]"
        if not isinstance(entry, dict):
            raise InterchangeError(f"{where}: must be an object")
        kind_name = _field(entry, "kind", where)
        try:
            kind = LinkKind(kind_name)
        except ValueError:
            raise InterchangeError(f"{where}: unknown link kind {kind_name!r}") from None
        try:
            links.append(TraceLink(
                kind=kind, source=_field(entry, "source", where), target=_field(entry, "target", where),
                rationale=_field(entry, "rationale", where, required=False),
                seq=_field(entry, "seq", where, required=False, kind=int), loc=loc,
            ))
        except ValueError as exc:
            raise InterchangeError(f"{where}: {exc}") from None
    return artifacts, links


_BARE_DOT_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_DOT_KEYWORDS = {"node", "edge", "graph", "digraph", "subgraph", "strict"}


def _dot_id(value: str) -> str:
    if _BARE_DOT_ID.match(value) and value.lower() not in _DOT_KEYWORDS:
        return value
    return _dot_string(value)


def _dot_string(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def export_dot(graph: TraceGraph) -> str:
    """Digraph with one cluster per abstraction layer plus one for requirements."""
    lines = ["digraph acm {", "  rankdir=TB;", "  node [shape=box];"]
    clusters: list[tuple[str, str, list[ArtifactKind]]] = [
        (f"cluster_layer{n}", f"layer {n}", [k for k in ArtifactKind if k.layer == n])
        for n in range(LAYER_COUNT)
    ]
    clusters.append(("cluster_requirements", "requirements", [ArtifactKind.Requirement]))
    for name, label, kinds in clusters:
        lines.append(f"  subgraph {name} {{")
        lines.append(f"    label={_dot_string(label)};")
        for a in graph.artifacts.values():
            if a.kind in kinds:
                node_label = _dot_string(f"{a.kind.value}\n{a.name}")
                lines.append(f"    {_dot_id(a.id)} [label={node_label}];")
        lines.append("  }")
    for l in graph.links:
        lines.append(f"  {_dot_id(l.source)} -> {_dot_id(l.target)} [label={_dot_string(l.kind.value)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
