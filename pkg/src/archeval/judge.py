"""Language-model judge: four-dimension diagram scoring and node-equivalence
arbitration, with strict JSON parsing, bounded retries and a file cache."""

from __future__ import annotations

import ast
import enum
import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .alignment import JudgeUnavailable, normalize_label
from .llm import ChatRequest, HttpChatTransport, RetryPolicy, Transport, TransportError, complete_with_retry
from .prompts import ALIGN_PROMPT, JUDGE_CORRECTION, JUDGE_PROMPT, PromptTemplate

log = logging.getLogger(__name__)

API_KEY_ENV = "ARCHEVAL_JUDGE_API_KEY"
DIMENSIONS = ("completeness", "accuracy", "rationality", "readability")
_DIM_ALIASES = {"structural_readability": "readability", "structural readability": "readability"}
BATCH_SIZE = 20


class MalformedJudgeResponse(ValueError):
    pass


class JudgeTransportError(TransportError):
    pass


class Relation(str, enum.Enum):
    IDENTICAL = "identical"
    SYNONYM = "synonym"
    GENERALIZATION = "generalization"
    UNRELATED = "unrelated"


@dataclass(frozen=True)
class JudgeConfig:
    model_name: str
    endpoint: str | None = None
    temperature: float = 0.0
    max_retries: int = 3
    cache_dir: Path | None = None
    request_timeout: float = 60.0
    max_concurrency: int = 4
    backoff: float = 0.5
    prompt: PromptTemplate = JUDGE_PROMPT
    align_prompt: PromptTemplate = ALIGN_PROMPT

    def __post_init__(self) -> None:
        if not self.model_name:
            raise ValueError("judge model_name is required")
        if self.temperature != 0:
            raise ValueError("judge temperature is pinned to 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be >= 1")
        if self.cache_dir is not None:
            object.__setattr__(self, "cache_dir", Path(self.cache_dir))


@dataclass(frozen=True)
class JudgeScores:
    completeness: int
    accuracy: int
    rationality: int
    readability: int
    rationale: str = ""

    def __post_init__(self) -> None:
        for dim in DIMENSIONS:
            v = getattr(self, dim)
            if isinstance(v, bool) or not isinstance(v, int) or not 1 <= v <= 5:
                raise MalformedJudgeResponse(f"{dim} must be an integer in [1, 5], got {v!r}")

    @property
    def mean(self) -> float:
        return sum(getattr(self, d) for d in DIMENSIONS) / 4

    def to_dict(self) -> dict:
        return {d: getattr(self, d) for d in DIMENSIONS} | {"rationale": self.rationale}

    @classmethod
    def from_dict(cls, data: dict) -> JudgeScores:
        return cls(*(data[d] for d in DIMENSIONS), rationale=data.get("rationale", ""))


@dataclass(frozen=True)
class AlignmentVerdict:
    pred_name: str
    ref_name: str
    relation: Relation

    @property
    def equivalent(self) -> bool:
        return self.relation is not Relation.UNRELATED


# -- response parsing ---------------------------------------------------------


def _strip_fences(raw: str) -> str:
    # prefer the first fenced block that looks like JSON
    parts = raw.split("```")
    for block in parts[1::2]:
        body = block.split("\n", 1)[1] if "\n" in block else block
        if "{" in body or "[" in body:
            return body
    return raw


def _first_json(raw: str, opener: str = "{"):
    text = _strip_fences(raw)
    decoder = json.JSONDecoder()
    idx = text.find(opener)
    while idx != -1:
        try:
            obj, _ = decoder.raw_decode(text, idx)
            return obj
        except json.JSONDecodeError:
            idx = text.find(opener, idx + 1)
    raise MalformedJudgeResponse("no JSON object found in response")


def _score_value(dim: str, value) -> int:
    if isinstance(value, dict):
        if "score" not in value:
            raise MalformedJudgeResponse(f"{dim}: object without a 'score' field")
        value = value["score"]
    if isinstance(value, bool) or not isinstance(value, int):
        raise MalformedJudgeResponse(f"{dim}: score must be an integer, got {value!r}")
    if not 1 <= value <= 5:
        raise MalformedJudgeResponse(f"{dim}: score {value} outside [1, 5]")
    return value


def parse_judge_json(raw: str) -> JudgeScores:
    obj = _first_json(raw)
    if not isinstance(obj, dict):
        raise MalformedJudgeResponse("top-level JSON value is not an object")
    if "rationale" not in obj:
        raise MalformedJudgeResponse("missing key 'rationale'")
    if "scores" not in obj or not isinstance(obj["scores"], dict):
        raise MalformedJudgeResponse("missing key 'scores'")
    scores = {}
    for key, value in obj["scores"].items():
        k = str(key).strip().lower()
        scores[_DIM_ALIASES.get(k, k)] = value
    missing = [d for d in DIMENSIONS if d not in scores]
    if missing:
        raise MalformedJudgeResponse(f"missing score dimensions: {', '.join(missing)}")
    rationale = obj["rationale"]
    return JudgeScores(
        *(_score_value(d, scores[d]) for d in DIMENSIONS),
        rationale=rationale if isinstance(rationale, str) else json.dumps(rationale),
    )


def parse_alignment_json(raw: str, count: int) -> list[Relation | None]:
    """Relations for pairs 1..count; None where the model gave nothing usable."""
    items = []
    try:
        obj = _first_json(raw)
        if isinstance(obj, dict) and "verdicts" in obj:
            items = obj["verdicts"]
    except MalformedJudgeResponse:
        pass
    if not items:
        # a bare list of verdict objects
        try:
            items = _first_json(raw, "[")
        except MalformedJudgeResponse:
            items = []
    out: list[Relation | None] = [None] * count
    if not isinstance(items, list):
        return out
    for pos, item in enumerate(items):
        if not isinstance(item, dict):
            continue
        idx = item.get("id", pos + 1)
        if isinstance(idx, bool) or not isinstance(idx, int) or not 1 <= idx <= count:
            continue
        try:
            out[idx - 1] = Relation(str(item.get("relation", "")).strip().lower())
        except ValueError:
            continue
    return out


# -- cache --------------------------------------------------------------------


def cache_key(kind: str, template_version: str, model_name: str, *inputs: str) -> str:
    blob = json.dumps([kind, template_version, model_name, *inputs], ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class ResponseCache:
    """One JSON file per request hash; writes are atomic."""

    def __init__(self, root: Path | None):
        self.root = Path(root) if root else None

    def get(self, key: str) -> str | None:
        if self.root is None:
            return None
        path = self.root / f"{key}.json"
        try:
            return json.loads(path.read_text(encoding="utf-8"))["response"]
        except (OSError, ValueError, KeyError, TypeError):
            return None

    def put(self, key: str, response: str, meta: dict) -> None:
        if self.root is None:
            return
        self.root.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=f".{key}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump({**meta, "response": response}, fh, ensure_ascii=False, indent=1)
            os.replace(tmp, self.root / f"{key}.json")
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise


# -- client -------------------------------------------------------------------


class Judge:
    def __init__(
        self,
        config: JudgeConfig,
        transport: Transport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        if transport is None:
            if not config.endpoint:
                raise JudgeUnavailable("judge needs an endpoint or an explicit transport")
            transport = HttpChatTransport(config.endpoint, os.environ.get(API_KEY_ENV), config.request_timeout)
        self.transport = transport
        self.cache = ResponseCache(config.cache_dir)
        self._policy = RetryPolicy(config.max_retries, config.backoff, sleep)
        self._slots = threading.BoundedSemaphore(config.max_concurrency)

    def _send(self, request: ChatRequest) -> str:
        with self._slots:
            try:
                return complete_with_retry(self.transport, request, self._policy)
            except TransportError as exc:
                raise JudgeTransportError(str(exc)) from exc

    def score_diagram(self, reference: str, predicted: str) -> JudgeScores:
        if not predicted or not predicted.strip():
            raise ValueError("predicted_code is empty")
        tmpl = self.config.prompt
        system, user = tmpl.render(reference=reference, predicted=predicted)
        key = cache_key("score", tmpl.version, self.config.model_name, reference, predicted)
        cached = self.cache.get(key)
        if cached is not None:
            try:
                return parse_judge_json(cached)
            except MalformedJudgeResponse:
                log.warning("ignoring unparseable cache entry %s", key)
        request = ChatRequest.build(self.config.model_name, system, user, temperature=0.0)
        error: MalformedJudgeResponse | None = None
        for _ in range(self.config.max_retries + 1):
            raw = self._send(request)
            try:
                scores = parse_judge_json(raw)
            except MalformedJudgeResponse as exc:
                error = exc
                request = request.with_message("assistant", raw).with_message(
                    "user", JUDGE_CORRECTION.format(error=exc)
                )
                continue
            self.cache.put(key, raw, {"kind": "score", "template": tmpl.version, "model": self.config.model_name})
            return scores
        raise MalformedJudgeResponse(f"unparseable after {self.config.max_retries + 1} attempts: {error}")

    def judge_node_equivalence(self, candidates: Sequence[tuple[str, str, str]]) -> list[AlignmentVerdict]:
        if not candidates:
            raise ValueError("no candidates to judge")
        verdicts: list[AlignmentVerdict | None] = [None] * len(candidates)
        pending: list[int] = []
        for i, (p, r, _ctx) in enumerate(candidates):
            tp = normalize_label(p)
            if tp and tp == normalize_label(r):
                verdicts[i] = AlignmentVerdict(p, r, Relation.IDENTICAL)
            else:
                pending.append(i)
        for start in range(0, len(pending), BATCH_SIZE):
            batch = pending[start : start + BATCH_SIZE]
            relations = self._judge_batch([candidates[i] for i in batch])
            for i, rel in zip(batch, relations):
                p, r, _ = candidates[i]
                if rel is None:
                    log.warning("no usable verdict for %r vs %r; treating as unrelated", p, r)
                    rel = Relation.UNRELATED
                verdicts[i] = AlignmentVerdict(p, r, rel)
        return verdicts  # type: ignore[return-value]

    def _judge_batch(self, batch: Sequence[tuple[str, str, str]]) -> list[Relation | None]:
        tmpl = self.config.align_prompt
        lines = [f"{n}. predicted: {p!r} | reference: {r!r} | context: {c}" for n, (p, r, c) in enumerate(batch, 1)]
        system, user = tmpl.render(pairs="\n".join(lines))
        key = cache_key("align", tmpl.version, self.config.model_name, user)
        raw = self.cache.get(key)
        if raw is None:
            raw = self._send(ChatRequest.build(self.config.model_name, system, user, temperature=0.0))
            self.cache.put(key, raw, {"kind": "align", "template": tmpl.version, "model": self.config.model_name})
        return parse_alignment_json(raw, len(batch))


def score_diagram(
    prd_or_reference: str, predicted_code: str, config: JudgeConfig, transport: Transport | None = None
) -> JudgeScores:
    return Judge(config, transport).score_diagram(prd_or_reference, predicted_code)


def judge_node_equivalence(
    candidates: Sequence[tuple[str, str, str]], config: JudgeConfig, transport: Transport | None = None
) -> list[AlignmentVerdict]:
    return Judge(config, transport).judge_node_equivalence(candidates)


@dataclass
class ScriptedJudgeResponder:
    """Deterministic responder for MockTransport: fixed scores for diagram
    scoring and a lookup table (default unrelated) for alignment batches."""

    scores: dict = field(default_factory=lambda: {d: 4 for d in DIMENSIONS})
    relations: dict = field(default_factory=dict)  # (pred, ref) -> relation label

    def __call__(self, request: ChatRequest) -> str:
        text = request.user_text
        if "<PREDICTED_DIAGRAM>" in text:
            return json.dumps({"rationale": "scripted", "scores": self.scores})
        out = []
        for line in text.splitlines():
            head, sep, rest = line.partition(". predicted: ")
            if not sep or not head.strip().isdigit():
                continue
            pred_part, _, tail = rest.partition(" | reference: ")
            ref_part = tail.split(" | context: ")[0]
            pair = (_unrepr(pred_part), _unrepr(ref_part))
            out.append({"id": int(head), "relation": self.relations.get(pair, "unrelated")})
        return json.dumps({"verdicts": out})


def _unrepr(text: str) -> str:
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text
