from __future__ import annotations

import json
import shutil
import subprocess
import sys
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from archeval.cli import run_cli

GOOD = '@startuml\npackage "App" { [UI] }\ndatabase DB\n[UI] --> DB : query\n@enduml\n'


@pytest.fixture
def good(tmp_path):
    p = tmp_path / "good.puml"
    p.write_text(GOOD)
    return p


@pytest.fixture
def chat_server():
    """Local chat-completions endpoint answering every request with ``reply``."""
    state = {"reply": "", "requests": []}

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
            state["requests"].append((self.path, body, self.headers.get("Authorization")))
            out = json.dumps({"choices": [{"message": {"content": state["reply"]}}]}).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(out)))
            self.end_headers()
            self.wfile.write(out)

        def log_message(self, *args):
            pass

    server = HTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    state["url"] = f"http://127.0.0.1:{server.server_port}/v1"
    yield state
    server.shutdown()


def test_validate_valid(good, capsys):
    assert run_cli(["validate", str(good)]) == 0
    assert capsys.readouterr().out.strip() == "valid"


def test_validate_invalid_and_json(tmp_path, capsys):
    bad = tmp_path / "bad.puml"
    bad.write_text("@startuml\n[A] -->\n@enduml\n")
    assert run_cli(["validate", str(bad)]) == 1
    captured = capsys.readouterr()
    assert captured.out.strip() == "invalid" and "E_MALFORMED_ARROW" in captured.err
    assert run_cli(["validate", str(bad), "--json"]) == 1
    data = json.loads(capsys.readouterr().out)
    assert data["valid"] is False and data["diagnostics"][0]["code"] == "E_MALFORMED_ARROW"


def test_validate_renderer_missing_is_env_error(good, capsys):
    assert run_cli(["validate", str(good), "--mode", "renderer", "--renderer", "/nope/plantuml"]) == 3


def test_parse_emits_canonical_and_json(good, capsys):
    assert run_cli(["parse", str(good)]) == 0
    assert capsys.readouterr().out.startswith("@startuml")
    assert run_cli(["parse", str(good), "--emit", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert {n["display_name"] for n in data["nodes"]} == {"App", "UI", "DB"}


def test_eval_identity_json(good, capsys):
    assert run_cli(["eval", "--pred", str(good), "--ref", str(good), "--json"]) == 0
    out = capsys.readouterr().out
    data = json.loads(out)
    assert data["summary"]["node_f1"] == 1.0 and data["summary"]["ged_acc"] == 100.0


def test_eval_invalid_prediction_exits_1(good, tmp_path, capsys):
    pred = tmp_path / "p.puml"
    pred.write_text("no diagram")
    assert run_cli(["eval", "--pred", str(pred), "--ref", str(good)]) == 1


def test_eval_judge_matcher_without_endpoint(good, capsys):
    assert run_cli(["eval", "--pred", str(good), "--ref", str(good), "--matcher", "judge"]) == 3


def test_eval_with_judge_endpoint(good, chat_server, capsys, tmp_path):
    chat_server["reply"] = json.dumps(
        {"rationale": "fine", "scores": {"completeness": 5, "accuracy": 4, "rationality": 3, "readability": 2}})
    argv = ["eval", "--pred", str(good), "--ref", str(good), "--judge-endpoint", chat_server["url"],
            "--judge-model", "judge", "--judge-cache", str(tmp_path / "c"), "--json"]
    assert run_cli(argv, env={"ARCHEVAL_JUDGE_API_KEY": "k"}) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["judge"]["accuracy"] == 4
    path, body, auth = chat_server["requests"][0]
    assert path == "/v1/chat/completions" and body["model"] == "judge" and auth == "Bearer k"


def test_usage_errors(capsys):
    assert run_cli([]) == 2
    assert run_cli(["eval", "--pred", "x"]) == 2
    assert run_cli(["frobnicate"]) == 2
    assert "usage" in capsys.readouterr().err


def test_bench_missing_dataset(tmp_path, capsys):
    assert run_cli(["bench", "--dataset", str(tmp_path / "missing")]) == 3
    assert "does not exist" in capsys.readouterr().err


def _mini_dataset(tmp_path, dataset_root, names=("retool", "smart_recipe")):
    root = tmp_path / "data"
    for n in names:
        shutil.copytree(dataset_root / n, root / n)
    outputs = tmp_path / "outputs"
    for n in names:
        p = outputs / "echo" / "full" / f"{n}.puml"
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text((root / n / "reference.puml").read_text())
    return root, outputs


def test_bench_with_flags_and_report(tmp_path, dataset_root, capsys):
    root, outputs = _mini_dataset(tmp_path, dataset_root)
    results = tmp_path / "results"
    argv = ["bench", "--dataset", str(root), "--model", "echo", "--outputs", str(outputs), "--results",
            str(results), "--run-id", "t", "--workers", "2", "--json"]
    assert run_cli(argv) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["cells"] == 2 and data["failed_cells"] == 0
    group = data["aggregate"]["groups"][0]
    assert group["metrics"]["sv"]["mean"] == 1.0
    assert run_cli(["report", "--run", str(results / "t"), "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("model,setting,sv,node_f1")
    assert run_cli(["report", "--run", str(tmp_path)]) == 3


def test_bench_with_manifest(tmp_path, dataset_root, capsys):
    root, outputs = _mini_dataset(tmp_path, dataset_root)
    manifest = tmp_path / "m.json"
    manifest.write_text(json.dumps({"models": ["echo"], "outputs": "outputs", "results": "res", "run_id": "m"}))
    assert run_cli(["bench", "--dataset", str(root), "--manifest", str(manifest)]) == 0
    assert (tmp_path / "res" / "m" / "aggregate.json").is_file()
    assert "| echo | full |" in capsys.readouterr().out


def test_config_presets_and_flag_precedence(tmp_path, dataset_root, capsys):
    root, outputs = _mini_dataset(tmp_path, dataset_root)
    (root / "archeval.toml").write_text(
        f'[bench]\nmodel = "echo"\noutputs = "{outputs}"\nresults = "{tmp_path / "preset"}"\nrun_id = "p"\n'
    )
    assert run_cli(["bench", "--dataset", str(root), "--json"]) == 0
    assert (tmp_path / "preset" / "p" / "cases.jsonl").is_file()
    capsys.readouterr()
    assert run_cli(["bench", "--dataset", str(root), "--run-id", "explicit", "--json"]) == 0
    assert (tmp_path / "preset" / "explicit" / "cases.jsonl").is_file()


def test_bad_config_file(tmp_path, dataset_root, capsys):
    root, _ = _mini_dataset(tmp_path, dataset_root)
    (root / "archeval.toml").write_text("this is = = not toml")
    assert run_cli(["stats", "--dataset", str(root)]) == 3


def test_stats(dataset_root, capsys):
    assert run_cli(["stats", "--dataset", str(dataset_root), "--json"]) == 0
    rows = {r["case_id"]: r for r in json.loads(capsys.readouterr().out)}
    assert rows["deepcode"]["node_count"] == 33 and rows["deepcode"]["relation_count"] == 21


def test_kappa(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    a.write_text("1\n1\n2\n2\n")
    b.write_text("[1, 2, 2, 1]")
    assert run_cli(["kappa", "--a", str(a), "--b", str(b)]) == 0
    assert capsys.readouterr().out.strip() == "0.0000"
    assert run_cli(["kappa", "--a", str(a), "--b", str(b), "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["kappa"] == 0.0
    b.write_text("1,2")
    assert run_cli(["kappa", "--a", str(a), "--b", str(b)]) == 1


def test_generate(tmp_path, chat_server, capsys):
    prd = tmp_path / "case7" / "prd.md"
    prd.parent.mkdir()
    prd.write_text("# Core Objectives\nGoal.\n# Functional Features\nFeature.\n# System Architecture\nLayers.\n")
    chat_server["reply"] = "```plantuml\n@startuml\n[UI]\n@enduml\n```"
    argv = ["generate", "--prd", str(prd), "--setting", "noarch", "--endpoint", chat_server["url"], "--model", "g",
            "--output-root", str(tmp_path / "out"), "--json"]
    assert run_cli(argv) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["extracted_code"] == "@startuml\n[UI]\n@enduml" and record["case_id"] == "case7"
    assert (tmp_path / "out" / "g" / "no_arch" / "case7.json").is_file()
    sent = chat_server["requests"][0][1]["messages"][-1]["content"]
    assert "System Architecture" not in sent and "Core Objectives" in sent
    chat_server["reply"] = "Sorry, no diagram."
    assert run_cli(argv) == 1


def test_generate_unreachable(tmp_path, capsys):
    prd = tmp_path / "prd.md"
    prd.write_text("# Core Objectives\nGoal.\n")
    argv = ["generate", "--prd", str(prd), "--setting", "full", "--endpoint", "http://127.0.0.1:9", "--model", "g",
            "--output-root", str(tmp_path / "out")]
    assert run_cli(argv) == 3


def test_module_entry_point(good):
    proc = subprocess.run([sys.executable, "-m", "archeval", "validate", str(good)], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "valid"
