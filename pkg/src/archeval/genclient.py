"""First-round diagram generation from a (possibly ablated) PRD."""

from __future__ import annotations

import json
import os
import re
import tempfile
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .llm import ChatRequest, HttpChatTransport, RetryPolicy, Transport, TransportError, complete_with_retry
from .model import digest_text
from .plantuml import NoDiagramFound, extract_plantuml_block
from .prd import ContextSetting
from .prompts import GEN_PROMPT, PromptTemplate

API_KEY_ENV = "ARCHEVAL_GEN_API_KEY"


class GenerationTransportError(TransportError):
    pass


class EmptyModelOutput(ValueError):
    pass


@dataclass(frozen=True)
class GenerationConfig:
    model_name: str
    endpoint: str | None = None
    temperature: float = 0.0
    prompt: PromptTemplate = GEN_PROMPT
    max_output_tokens: int = 4096
    request_timeout: float = 120.0
    max_retries: int = 3
    backoff: float = 1.0

    def __post_init__(self) -> None:
        if not self.model_name:
            raise ValueError("model_name is required")
        if self.temperature != 0:
            raise ValueError("generation temperature is pinned to 0")

    @property
    def system_prompt(self) -> str:
        return self.prompt.system


@dataclass(frozen=True)
class GenerationRecord:
    case_id: str
    setting: ContextSetting
    model_name: str
    raw_output: str
    extracted_code: str | None
    prompt_digest: str
    prompt_version: str
    timestamp: str
    round: int = 1
    warnings: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "setting": self.setting.value,
            "model_name": self.model_name,
            "raw_output": self.raw_output,
            "extracted_code": self.extracted_code,
            "prompt_digest": self.prompt_digest,
            "prompt_version": self.prompt_version,
            "timestamp": self.timestamp,
            "round": self.round,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> GenerationRecord:
        return cls(
            data["case_id"], ContextSetting.parse(data["setting"]), data["model_name"], data["raw_output"],
            data.get("extracted_code"), data.get("prompt_digest", ""), data.get("prompt_version", ""),
            data.get("timestamp", ""), data.get("round", 1), tuple(data.get("warnings", ())),
        )


def safe_dirname(name: str) -> str:
    return re.sub(r"[^\w.\-]+", "_", name).strip("._") or "model"


def record_path(output_root: Path, model_name: str, setting: ContextSetting, case_id: str) -> Path:
    return Path(output_root) / safe_dirname(model_name) / setting.value / f"{case_id}.json"


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def generate_diagram(
    prd_text: str,
    config: GenerationConfig,
    case_id: str,
    setting: ContextSetting | str,
    transport: Transport | None = None,
    output_root: str | Path = "outputs",
    clock: Callable[[], str] = _now,
    sleep: Callable[[float], None] = time.sleep,
) -> GenerationRecord:
    """Send one request, keep the raw answer verbatim, extract the diagram and
    persist the record before returning it."""
    if not prd_text or not prd_text.strip():
        raise ValueError("prd_text is empty")
    setting = ContextSetting.parse(setting)
    if transport is None:
        if not config.endpoint:
            raise GenerationTransportError("no generation endpoint configured")
        transport = HttpChatTransport(config.endpoint, os.environ.get(API_KEY_ENV), config.request_timeout)
    system, user = config.prompt.render(prd=prd_text)
    request = ChatRequest.build(
        config.model_name, system, user, temperature=0.0, max_tokens=config.max_output_tokens
    )
    try:
        raw = complete_with_retry(transport, request, RetryPolicy(config.max_retries, config.backoff, sleep))
    except TransportError as exc:
        raise GenerationTransportError(str(exc)) from exc
    if not raw or not raw.strip():
        raise EmptyModelOutput(f"{config.model_name} returned nothing for {case_id}")
    warnings: list[str] = []
    try:
        code = extract_plantuml_block(raw, warnings)
    except NoDiagramFound:
        code = None
        warnings.append("no @startuml block in model output")
    record = GenerationRecord(
        case_id=case_id,
        setting=setting,
        model_name=config.model_name,
        raw_output=raw,
        extracted_code=code,
        prompt_digest=digest_text(system + "\n" + user),
        prompt_version=config.prompt.version,
        timestamp=clock(),
        warnings=tuple(warnings),
    )
    path = record_path(Path(output_root), config.model_name, setting, case_id)
    write_atomic(path, json.dumps(record.to_dict(), ensure_ascii=False, indent=2) + "\n")
    return record


def load_record(path: str | Path) -> GenerationRecord:
    return GenerationRecord.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
