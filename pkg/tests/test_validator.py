from __future__ import annotations

import pytest

from acmtrace.diagnostics import Severity
from acmtrace.dsl import parse
from acmtrace.metamodel import Artifact, ArtifactKind, TraceGraph, build_graph
from acmtrace.validator import CATALOG, RULES, validate

from conftest import FIX1, graph_of
from mutations import MUTATIONS, mutated_fixture
from oracle import random_model


def _validate_text(text: str):
    r = parse(text, "m.acm")
    assert r.diagnostics == []
    return validate(build_graph(r.artifacts, r.links))


def test_catalog_ids_unique_and_ordered():
    ids = [r.rule_id for r in CATALOG]
    assert ids == [f"R{i:03d}" for i in range(1, 17)]
    warnings = {r.rule_id for r in CATALOG if r.severity is Severity.WARNING}
    assert warnings == {"R004", "R010", "R013", "R015", "R016"}


def test_empty_graph_is_clean():
    assert validate(build_graph([], [])) == []


def test_fix1_clean(fix1):
    assert validate(fix1) == []


def test_fix2_clean(fix2):
    assert validate(fix2) == []


def test_fix1_without_automated_by(fix1_text):
    diags = _validate_text(fix1_text.replace("trace BO1 - automated_by -> OS1\n", ""))
    assert [(d.rule_id, d.related) for d in diags] == [("R005", ("BO1",))]
    assert diags[0].is_error


@pytest.mark.parametrize("mutation", MUTATIONS, ids=[m["rule"] for m in MUTATIONS])
def test_mutation_triggers_mapped_rule(mutation):
    diags = _validate_text(mutated_fixture(mutation))
    hits = [d for d in diags if d.rule_id == mutation["rule"]]
    assert hits, [d.format_text() for d in diags]
    assert any(mutation["artifact"] in d.related for d in hits)
    expected = RULES[mutation["rule"]].severity
    assert hits[0].severity is expected


@pytest.fixture(scope="module")
def fix2_text():
    from conftest import FIX2
    return FIX2.read_text(encoding="utf-8")


def test_adding_orphan_adds_exactly_one_r013(fix2_text):
    base = _validate_text(fix2_text)
    diags = _validate_text(fix2_text + '\nclass LONELY "Nobody uses me"\n')
    assert len(diags) == len(base) + 1
    (new,) = [d for d in diags if d not in base]
    assert (new.rule_id, new.related, new.severity) == ("R013", ("LONELY",), Severity.WARNING)


@pytest.mark.parametrize("seed", range(30))
def test_monotone_locality_random(seed):
    artifacts, links = random_model(seed, max_artifacts=20, max_links=30)
    base = validate(build_graph(artifacts, links))
    extra = Artifact("ZZ_ORPHAN", ArtifactKind.DataClass, "orphan")
    diags = validate(build_graph(artifacts + [extra], links))
    added = [d for d in diags if d not in base]
    assert [d.rule_id for d in added] == ["R013"]
    assert len(diags) == len(base) + 1


def test_validate_is_deterministic(fix2):
    assert validate(fix2) == validate(fix2)


def test_sorted_by_rule_then_location():
    text = 'function F2 "x"\nfunction F1 "y"\nmodule M "m"\n'
    diags = _validate_text(text)
    keys = [(d.rule_id, d.loc) for d in diags]
    assert keys == sorted(keys)
    assert [d.rule_id for d in diags][:2] == ["R003", "R003"]


def test_r002_cycle():
    g = graph_of('process P "p"\nfunction BF1 "a"\nfunction BF2 "b"\noperation O "o"\n'
                 "trace P - decomposes -> BF1\ntrace BF1 - decomposes -> BF2\n"
                 "trace BF2 - decomposes -> BF1\ntrace BF2 - decomposes -> O\n")
    cycles = [d for d in validate(g) if d.rule_id == "R002"]
    assert len(cycles) == 1 and cycles[0].related == ("BF1", "BF2")


def test_r002_self_loop():
    g = graph_of('function BF1 "a"\ntrace BF1 - decomposes -> BF1\n')
    assert [d.related for d in validate(g) if d.rule_id == "R002"] == [("BF1",)]


def test_r002_requirement_cycle():
    g = graph_of('requirement A "a"\nrequirement B "b"\nrequirement C "c"\n'
                 "trace A - refines -> B\ntrace B - refines -> C\ntrace C - refines -> A\n")
    assert [d.related for d in validate(g) if d.rule_id == "R002"] == [("A", "B", "C")]


def test_r003_through_nested_functions():
    base = 'survey S "s"\nprocess P "p"\nfunction F1 "a"\nfunction F2 "b"\noperation O "o"\n' \
           "trace S - justifies -> P\ntrace P - decomposes -> F1\ntrace F1 - decomposes -> F2\n"
    assert [d.related for d in _validate_text(base) if d.rule_id == "R003"] == [("F1",), ("F2",)]
    fixed = base + "trace F2 - decomposes -> O\n"
    assert [d for d in _validate_text(fixed) if d.rule_id == "R003"] == []


def test_r004_justification_is_transitive(fix1_text):
    diags = _validate_text(fix1_text.replace("trace SV1 - justifies -> BP1\n", "trace SV1 - justifies -> BF1\n"))
    assert [(d.rule_id, d.related) for d in diags] == [("R004", ("BP1",))]


def test_r005_two_services_is_error(fix1_text):
    text = fix1_text + 'service OS2 "second"\ntrace BO1 - automated_by -> OS2\n' \
        'dialogue DG2 "d"\ntrace OS2 - realized_by -> DG2\ntrace DG2 - performs -> VF1\n'
    r5 = [d for d in _validate_text(text) if d.rule_id == "R005"]
    assert len(r5) == 1 and r5[0].related == ("BO1", "OS1", "OS2")


def test_r005_manual_operation_exempt():
    diags = _validate_text('operation BO "manual"\nfunction BF "f"\ntrace BF - decomposes -> BO\n')
    assert not [d for d in diags if d.rule_id == "R005"]


def test_r009_two_components(fix1_text):
    text = fix1_text + 'component FC2 "other"\ntrace SM1 - allocated_to -> FC2\n'
    assert [(d.rule_id, d.related) for d in _validate_text(text)] == [("R009", ("SM1", "FC1", "FC2"))]


def test_r011_two_classes(fix1_text):
    text = fix1_text + 'class DC2 "other"\ntrace CM1 - member_of -> DC2\n'
    assert [(d.rule_id, d.related) for d in _validate_text(text)] == [("R011", ("CM1", "DC1", "DC2"))]


def test_r012_declared_submodel(fix1_text):
    ok = fix1_text + "trace DC1 - submodel_of -> OS1\n"
    assert _validate_text(ok) == []
    bad = ok + 'class DC9 "unused"\ntrace DC9 - submodel_of -> OS1\n'
    assert [(d.rule_id, d.related) for d in _validate_text(bad)] == [("R012", ("DC9", "OS1"))]


def test_r014_duplicate_seq(fix1_text):
    text = fix1_text.replace("trace OS1 - realized_by -> DG1", "trace OS1 - realized_by -> DG1 { seq: 1 }") + \
        'dialogue DG2 "d"\ntrace OS1 - realized_by -> DG2 { seq: 1 }\ntrace DG2 - performs -> VF1\n'
    diags = _validate_text(text)
    assert [(d.rule_id, d.related) for d in diags] == [("R014", ("OS1", "DG1", "DG2"))]


def test_r015_shared_module_warns(fix1_text):
    text = fix1_text + 'operation BO2 "b"\nautofn AF2 "a"\nservice OS2 "s"\ndialogue DG2 "d"\n' \
        'viewfn VF2 "v"\ntrace BF1 - decomposes -> BO2\ntrace BO2 - contains -> AF2\n' \
        "trace BO2 - automated_by -> OS2\ntrace AF2 - bundled_in -> OS2\n" \
        "trace OS2 - realized_by -> DG2\ntrace DG2 - performs -> VF2\ntrace VF2 - decomposes -> SM1\n"
    diags = _validate_text(text)
    assert [(d.rule_id, d.severity, d.related) for d in diags] == [
        ("R015", Severity.WARNING, ("SM1", "OS1", "OS2"))
    ]


def test_r016_black_box_requirement(fix1_text):
    text = fix1_text + 'requirement RQ1 "fast"\nrequirement RQ2 "faster"\n' \
        "trace SV1 - justifies -> RQ1\ntrace RQ1 - refines -> RQ2\n"
    assert [(d.rule_id, d.related) for d in _validate_text(text)] == [("R016", ("RQ2",))]
    text += "trace RQ2 - constrains -> OS1\n"
    assert _validate_text(text) == []


def test_r001_recheck_on_hand_built_graph():
    from acmtrace.metamodel import LinkKind, TraceLink
    a = Artifact("A", ArtifactKind.Dialogue, "a")
    b = Artifact("B", ArtifactKind.BusinessProcess, "b")
    g = TraceGraph([a, b], [TraceLink(LinkKind.decomposes, "A", "B")])  # bypasses build_graph
    assert "R001" in [d.rule_id for d in validate(g)]


def test_text_format(fix1_text):
    (d,) = _validate_text(fix1_text.replace("trace BO1 - automated_by -> OS1\n", ""))
    assert d.format_text().startswith("m.acm:6:1: error[R005]: ")
