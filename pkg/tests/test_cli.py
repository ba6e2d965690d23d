from __future__ import annotations

import json
import os
import subprocess
import sys

import pytest

from clirun import run
from conftest import FIX1, FIX2, FIXTURES


@pytest.fixture
def write(tmp_path):
    def _write(text: str, name: str = "m.acm"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write


@pytest.fixture
def fix1_minus_automation(write):
    return write(FIX1.read_text().replace("trace BO1 - automated_by -> OS1\n", ""))


# check

def test_check_clean():
    assert run("check", FIX1) == (0, "", "")


def test_check_reports_r005(fix1_minus_automation):
    code, out, err = run("check", fix1_minus_automation)
    assert code == 1 and out == ""
    (line,) = err.splitlines()
    assert "error[R005]" in line and "BO1" in line
    assert line.startswith(f"{fix1_minus_automation}:6:1: ")


def test_check_json(fix1_minus_automation):
    code, out, err = run("check", fix1_minus_automation, "--format", "json")
    assert code == 1
    (diag,) = json.loads(err)
    assert diag["rule_id"] == "R005" and diag["severity"] == "error" and diag["loc"]["line"] == 6
    assert run("check", FIX1, "--format", "json") == (0, "", "[]\n")


def test_check_missing_file(tmp_path):
    code, out, err = run("check", tmp_path / "absent.acm")
    assert code == 2 and "cannot read" in err


def test_check_parse_error(write):
    code, out, err = run("check", write('process BP1 "x"\nprocess BP2 "unterminated\n'))
    assert code == 2 and "error[P003]" in err


def test_check_build_errors_are_reported(write):
    code, _, err = run("check", write('process BP1 "a"\nprocess BP1 "b"\ntrace BP1 - decomposes -> NOPE\n'))
    assert code == 1
    assert "B001" in err and "B002" in err


def test_check_deny_warnings(write):
    path = write(FIX1.read_text() + 'class LONELY "spare"\n')
    code, _, err = run("check", path)
    assert code == 0 and "warning[R013]" in err
    assert run("check", path, "--deny-warnings")[0] == 1


def test_usage_errors():
    assert run()[0] == 2
    assert run("frobnicate", FIX1)[0] == 2
    assert run("check")[0] == 2


# trace

def test_trace_golden():
    code, out, err = run("trace", FIX1, "--from", "SM1", "--dir", "back", "--to-kind", "service")
    assert code == 0 and err == ""
    assert out == (FIXTURES / "golden" / "trace_sm1_back.txt").read_text()


def test_trace_sink():
    assert run("trace", FIX1, "--from", "CM1") == (0, "no chains\n", "")


def test_trace_unknown_id():
    code, out, err = run("trace", FIX1, "--from", "NOPE")
    assert code == 2 and "NOPE" in err


def test_trace_point_to_point():
    code, out, _ = run("trace", FIX1, "--from", "SV1", "--to", "CM1")
    assert code == 0
    assert out.splitlines() == [
        "SV1 -justifies-> BP1 -decomposes-> BF1 -decomposes-> BO1 -contains-> AF1 -bundled_in-> OS1"
        " -realized_by-> DG1 -performs-> VF1 -decomposes-> SM1 -decomposes-> CM1",
        "SV1 -justifies-> BP1 -decomposes-> BF1 -decomposes-> BO1 -automated_by-> OS1"
        " -realized_by-> DG1 -performs-> VF1 -decomposes-> SM1 -decomposes-> CM1",
    ]
    assert run("trace", FIX1, "--from", "SV1", "--to", "CM1", "--dir", "back")[0] == 2


def test_trace_truncation_note():
    code, out, err = run("trace", FIX1, "--from", "SV1", "--to", "CM1", "--max-chains", "1")
    assert code == 0 and len(out.splitlines()) == 1
    assert "truncated at 1" in err


def test_trace_refuses_invalid_model(fix1_minus_automation):
    code, out, err = run("trace", fix1_minus_automation, "--from", "SV1")
    assert code == 1 and out == "" and "R005" in err


# matrix

def test_matrix_csv():
    assert run("matrix", FIX1, "--rows", "process", "--cols", "method") == (0, ",CM1\nBP1,2\n", "")


def test_matrix_empty_kinds(write):
    path = write('component FC "c"\n')
    assert run("matrix", path, "--rows", "process", "--cols", "method") == (0, "\n", "")


def test_matrix_invalid_kind():
    assert run("matrix", FIX1, "--rows", "gizmo", "--cols", "method")[0] == 2


def test_matrix_formats():
    _, html, _ = run("matrix", FIX1, "--rows", "survey", "--cols", "method", "--format", "html")
    assert html.startswith("<!DOCTYPE html>")
    _, text, _ = run("matrix", FIX1, "--rows", "survey", "--cols", "method", "--format", "text")
    assert text == "     CM1\nSV1    2\n"


# clusters

def test_clusters_fix1():
    code, out, _ = run("clusters", FIX1, "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["assignments"] == {"OS1": ["DC1"]} and data["cohesion"]["OS1"]["ratio"] == "1"


def test_clusters_empty_model(write):
    code, out, _ = run("clusters", write(""), "--format", "json")
    assert code == 0
    assert json.loads(out) == {"assignments": {}, "shared": [], "coupling": [], "cohesion": {}}


def test_clusters_suppressed_on_errors(fix1_minus_automation):
    code, out, _ = run("clusters", fix1_minus_automation)
    assert code == 1 and out == ""


# export

def test_export_json_and_file(tmp_path):
    code, out, _ = run("export", FIX1)
    assert code == 0 and len(json.loads(out)["artifacts"]) == 12
    target = tmp_path / "out.json"
    assert run("export", FIX1, "-o", target) == (0, "", "")
    assert target.read_text(encoding="utf-8") == out


def test_export_dot():
    code, out, _ = run("export", FIX1, "--format", "dot")
    assert code == 0 and out.startswith("digraph acm {")


def test_export_unknown_format():
    assert run("export", FIX1, "--format", "yaml")[0] == 2


# stats

def test_stats_fix1():
    code, out, _ = run("stats", FIX1)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "artifacts by kind:"
    kind_rows = lines[1:14]
    assert len(kind_rows) == 13
    assert [int(r.split()[-1]) for r in kind_rows].count(0) == 1  # no requirement
    assert lines[-1] == "total: 12 artifacts, 12 links"
    assert "  layer 1: 4 artifacts, 4/4 kinds present" in lines


def test_stats_empty(write):
    code, out, _ = run("stats", write(""))
    assert code == 0 and out.splitlines()[-1] == "total: 0 artifacts, 0 links"
    assert all(r.split()[-1] == "0" for r in out.splitlines()[1:14])


def test_stats_broken_parse(write):
    assert run("stats", write('process "no id"\n'))[0] == 2


def test_stats_runs_on_invalid_model(fix1_minus_automation):
    assert run("stats", fix1_minus_automation)[0] == 0


# cross-cutting

COMMANDS = [
    ("check", "--format", "json"),
    ("trace", "--from", "SV1"),
    ("trace", "--from", "CM7", "--dir", "back"),
    ("matrix", "--rows", "survey", "--cols", "method", "--format", "html"),
    ("clusters",),
    ("clusters", "--format", "json"),
    ("export",),
    ("export", "--format", "dot"),
    ("stats",),
]


@pytest.mark.parametrize("cmd", COMMANDS, ids=lambda c: "-".join(c))
def test_byte_determinism(cmd):
    first = run(cmd[0], FIX2, *cmd[1:])
    assert first[0] == 0
    assert run(cmd[0], FIX2, *cmd[1:]) == first


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "acmtrace", "check", str(FIX1)], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == proc.stderr == ""


@pytest.mark.parametrize("cmd", [("export", "--format", "dot"), ("clusters", "--format", "json"), ("stats",)])
def test_output_independent_of_hash_seed(cmd):
    outputs = set()
    for seed in ("1", "2"):
        env = {**os.environ, "PYTHONHASHSEED": seed}
        proc = subprocess.run([sys.executable, "-m", "acmtrace", cmd[0], str(FIX2), *cmd[1:]],
                              capture_output=True, text=True, env=env)
        outputs.add((proc.returncode, proc.stdout))
    assert len(outputs) == 1
