import json
import subprocess
import sys

import pytest

from conftest import GOLDEN, run_cli
from tmkit.fixtures import FIXTURE_NAMES, fixture_file

TINY = """\
model tiny
thing t attrs n:int
thimac A
thimac B
node a: create t in A
node b: release t in A
node c: transfer out t in A
node d: transfer in t in B
node e: receive t in B
flow a -> b
flow b -> c
flow c -> d
flow d -> e
"""


@pytest.fixture()
def tiny(tmp_path):
    path = tmp_path / "tiny.tm"
    path.write_text(TINY)
    (tmp_path / "tiny.ev").write_text('event E1 "send" nodes a, b, c\nevent E2 "get" nodes c, d, e\n')
    (tmp_path / "tiny.grp").write_text("super All: E1, E2\n")
    return path


def test_check_fixture_ok():
    assert run_cli("check", "vending")[0] == 0


def test_check_illegal_flow_one_diagnostic(tiny):
    tiny.write_text(TINY + "flow a -> e\n")
    status, _, err = run_cli("check", tiny)
    assert status == 1
    diags = [line for line in err.splitlines() if line.startswith("tiny.tm:")]
    assert len(diags) == 1 and "illegal cross-thimac flow" in diags[0]


def test_check_missing_file(tmp_path):
    status, _, err = run_cli("check", tmp_path / "absent.tm")
    assert status == 2 and "no such file" in err


def test_parse_error_is_status_1(tiny):
    tiny.write_text("model x\nnode broken\n")
    status, _, err = run_cli("check", tiny)
    assert status == 1 and "tiny.tm:2:" in err


def test_usage_errors():
    assert run_cli("frobnicate", "vending")[0] == 2
    assert run_cli("carve", "vending", "--max-parts", "0")[0] == 2
    assert run_cli("carve", "vending", "--max-parts", "3")[0] == 2
    assert run_cli("simulate", "vending", "--max-steps", "0")[0] == 2
    assert run_cli("simulate", "vending", "--inject", "cola")[0] == 2


def test_path_target_uses_sibling_files(tiny):
    status, out, _ = run_cli("carve", tiny)
    assert status == 0 and 'label="All"' in out
    status, out, _ = run_cli("events", tiny)
    assert status == 0 and out.startswith('event E1 "send"')


def test_carve_auto_five_clusters():
    status, out, _ = run_cli("carve", "shopping", "--auto", "--max-parts", "5")
    assert status == 0
    assert out.count("subgraph cluster_") == 5


def test_carve_json(tmp_path):
    out_file = tmp_path / "c.json"
    status, out, _ = run_cli("carve", "vending", "--auto", "--max-parts", "3", "--format", "json", "--out", out_file)
    assert status == 0 and out == ""
    data = json.loads(out_file.read_text())
    assert [len(se["members"]) for se in data["super_events"]] == [9, 3, 10]


def test_simulate_trace_ends_with_message():
    status, out, _ = run_cli("simulate", "vending", "--inject", "cola+75", "--max-steps", "10000", "--format", "json")
    assert status == 0
    data = json.loads(out)
    assert data["status"] == "quiescent"
    assert data["firings"][-1]["node"] == "u_msg_recv"
    assert data["events"][-1] == "E22"


def test_simulate_budget_is_failure():
    status, out, err = run_cli("simulate", "vending", "--inject", "cola+75", "--max-steps", "3")
    assert status == 1 and len(out.splitlines()) == 3 and "budget" in err


def test_simulate_inject_lines(tmp_path):
    inj = tmp_path / "buy.inj"
    inj.write_text('inject u_sel_create selection name="tea"\ninject u_coins_create coins values="25,50"\n')
    status, out, _ = run_cli("simulate", "vending", "--injections", inj)
    assert status == 0 and '"node":"cb_change_create"' in out


def test_conforms_round_trip(tmp_path):
    trace = tmp_path / "t.jsonl"
    run_cli("simulate", "vending", "--inject", "cola+125", "--out", trace)
    status, out, _ = run_cli("conforms", "vending", "--trace", trace)
    assert status == 0 and json.loads(out)["conformant"] is True
    lines = trace.read_text().splitlines()
    idx = next(i for i, line in enumerate(lines) if '"d_bev_create"' in line)
    trace.write_text("\n".join([lines[idx]] + lines[:idx] + lines[idx + 1:]) + "\n")
    status, out, err = run_cli("conforms", "vending", "--trace", trace)
    assert status == 1 and "violation" in err


def test_validate_vending_summary(tmp_path):
    report = tmp_path / "r.json"
    status, out, _ = run_cli("validate", "vending", "--report", report)
    assert status == 0
    assert out.splitlines() == [
        "scenario drinks: 10/10 passed",
        "scenario coins: 55/55 passed",
        "scenario outputs: 190/190 passed",
    ]
    data = json.loads(report.read_text())
    assert data["passed"] is True and "wall_time" not in data


def test_validate_faulty_fixture_fails():
    status, out, _ = run_cli("validate", "vending-faulty-change")
    assert status == 1
    assert "scenario outputs: 56/190 passed" in out


def test_validate_timings_opt_in():
    status, out, _ = run_cli("validate", "shopping", "--format", "json", "--timings")
    assert status == 0 and "wall_time" in json.loads(out)


GOLDEN_ARGS = {
    "static.dot": ["export", "{f}", "static"],
    "behavior.dot": ["behavior", "{f}"],
    "carving.dot": ["carve", "{f}"],
    "auto-carving.json": ["carve", "{f}", "--auto", "--format", "json"],
    "report.json": ["validate", "{f}", "--format", "json"],
}


@pytest.mark.parametrize("fixture", FIXTURE_NAMES)
@pytest.mark.parametrize("name", sorted(GOLDEN_ARGS))
def test_golden_outputs(fixture, name):
    _, out, _ = run_cli(*[a.format(f=fixture) for a in GOLDEN_ARGS[name]])
    assert out == (GOLDEN / fixture / name).read_text(encoding="utf-8")


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "tmkit", "check", str(fixture_file("vending", ".tm"))],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
