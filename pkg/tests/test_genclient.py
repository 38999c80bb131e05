from __future__ import annotations

import json

import pytest

from archeval.genclient import (
    EmptyModelOutput,
    GenerationConfig,
    GenerationRecord,
    GenerationTransportError,
    generate_diagram,
    load_record,
    record_path,
    safe_dirname,
)
from archeval.llm import FailingTransport, MockTransport
from archeval.prd import ContextSetting

PRD = "# Core Objectives\nBuild it.\n"
FENCED = "Here you go:\n```plantuml\n@startuml\n[UI] --> [DB]\n@enduml\n```\n"


def fixed_clock():
    return "2026-01-01T00:00:00+00:00"


def test_fenced_diagram_is_extracted_and_persisted(tmp_path):
    mock = MockTransport(FENCED)
    rec = generate_diagram(PRD, GenerationConfig("gen-model"), "case1", "min", mock, tmp_path, fixed_clock)
    assert rec.extracted_code == "@startuml\n[UI] --> [DB]\n@enduml"
    assert rec.raw_output == FENCED and rec.round == 1 and rec.setting is ContextSetting.MIN
    path = tmp_path / "gen-model" / "min" / "case1.json"
    assert path.is_file() and load_record(path) == rec
    assert mock.call_count == 1
    req = mock.calls[0]
    assert req.temperature == 0.0 and req.user_text == PRD and "@startuml" in req.messages[0][1]


def test_prose_only_is_kept_as_failure(tmp_path):
    rec = generate_diagram(PRD, GenerationConfig("m"), "c", "full", MockTransport("I would use three layers."),
                           tmp_path)
    assert rec.extracted_code is None and rec.warnings
    assert record_path(tmp_path, "m", ContextSetting.FULL, "c").is_file()


def test_unreachable_endpoint(tmp_path):
    failing = FailingTransport()
    cfg = GenerationConfig("m", max_retries=2)
    with pytest.raises(GenerationTransportError):
        generate_diagram(PRD, cfg, "c", "full", failing, tmp_path, sleep=lambda _: None)
    assert failing.calls == 3
    assert not (tmp_path / "m").exists()


def test_unreachable_http_endpoint(tmp_path):
    cfg = GenerationConfig("m", endpoint="http://127.0.0.1:9", max_retries=1, request_timeout=1)
    with pytest.raises(GenerationTransportError):
        generate_diagram(PRD, cfg, "c", "full", output_root=tmp_path, sleep=lambda _: None)


def test_no_endpoint_and_no_transport(tmp_path):
    with pytest.raises(GenerationTransportError):
        generate_diagram(PRD, GenerationConfig("m"), "c", "full", output_root=tmp_path)


def test_empty_output_and_empty_prd(tmp_path):
    with pytest.raises(EmptyModelOutput):
        generate_diagram(PRD, GenerationConfig("m"), "c", "full", MockTransport("  \n"), tmp_path)
    with pytest.raises(ValueError):
        generate_diagram("   ", GenerationConfig("m"), "c", "full", MockTransport(FENCED), tmp_path)


def test_config_invariants():
    with pytest.raises(ValueError):
        GenerationConfig("m", temperature=1.0)
    with pytest.raises(ValueError):
        GenerationConfig("")
    assert "@startuml" in GenerationConfig("m").system_prompt


def test_record_round_trip_and_layout(tmp_path):
    rec = generate_diagram(PRD, GenerationConfig("org/model:v1"), "c", "no_arch", MockTransport(FENCED), tmp_path,
                           fixed_clock)
    assert safe_dirname("org/model:v1") == "org_model_v1"
    data = json.loads(record_path(tmp_path, "org/model:v1", ContextSetting.NO_ARCH, "c").read_text())
    assert data["prompt_version"] == "gen-v1" and data["timestamp"] == fixed_clock()
    assert GenerationRecord.from_dict(data) == rec
    assert len(rec.prompt_digest) == 64
    assert not list(tmp_path.rglob("*.tmp"))
