"""Leaf-node alignment between a predicted and a reference diagram, and the
edge matching derived from it."""

from __future__ import annotations

import enum
import re
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

from .model import ArchEdge, ArchGraph, LayerMap, layer_of, leaf_nodes
from .synonyms import SynonymTable

STOPWORDS = frozenset({"the", "a", "an", "of", "and"})
JUDGE_FLOOR = 0.2

_STEREO_RE = re.compile(r"<<.*?>>|«.*?»")
_CAMEL_1 = re.compile(r"(?<=[a-z0-9])(?=[A-Z][a-z])")
_CAMEL_2 = re.compile(r"(?<=[A-Z])(?=[A-Z][a-z])")
_SPLIT_RE = re.compile(r"[\W_]+")


def normalize_label(text: str) -> list[str]:
    """Tokenize a node name for matching.

    >>> normalize_label("UserService")
    ['user', 'service']
    >>> normalize_label("<<component>> MySQL-DB")
    ['mysql', 'db']
    """
    text = unicodedata.normalize("NFC", text)
    text = _STEREO_RE.sub(" ", text)
    text = re.sub(r"[\[\](){}<>«»\"'`]", " ", text)
    text = _CAMEL_2.sub(" ", _CAMEL_1.sub(" ", text))
    tokens = [t for t in _SPLIT_RE.split(text.lower()) if t]
    kept = [t for t in tokens if t not in STOPWORDS]
    # a name made only of stopwords ("A", "The") keeps its tokens
    return kept or tokens


class MatchMode(str, enum.Enum):
    LEXICAL = "lexical"
    JUDGE = "judge"
    HYBRID = "hybrid"


class MatchMethod(str, enum.Enum):
    EXACT = "exact"
    SYNONYM = "synonym"
    JUDGE = "judge"
    TOKEN = "token"


# lower ranks win ties at equal score
_METHOD_RANK = {MatchMethod.EXACT: 0, MatchMethod.SYNONYM: 1, MatchMethod.JUDGE: 2, MatchMethod.TOKEN: 3}


class JudgeUnavailable(RuntimeError):
    pass


class EquivalenceJudge(Protocol):
    def judge_node_equivalence(self, candidates: Sequence[tuple[str, str, str]]) -> list: ...


@dataclass(frozen=True)
class MatchConfig:
    mode: MatchMode = MatchMode.LEXICAL
    similarity_threshold: float = 0.5
    synonyms: SynonymTable = field(default_factory=SynonymTable.default)
    direction_sensitive: bool = True
    layer_map: LayerMap = field(default_factory=LayerMap.default)

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", MatchMode(self.mode))
        if not 0.0 <= self.similarity_threshold <= 1.0:
            raise ValueError("similarity_threshold must lie in [0, 1]")


@dataclass(frozen=True)
class MatchedPair:
    pred: str
    ref: str
    score: float
    method: MatchMethod
    layer_correct: bool = False


@dataclass(frozen=True)
class NodeMatching:
    pairs: tuple[MatchedPair, ...]
    unmatched_pred: tuple[str, ...]
    unmatched_ref: tuple[str, ...]

    def pred_to_ref(self) -> dict[str, str]:
        return {p.pred: p.ref for p in self.pairs}


@dataclass(frozen=True)
class EdgeMatching:
    tp: tuple[tuple[ArchEdge, ArchEdge], ...]
    fp: tuple[ArchEdge, ...]
    fn: tuple[ArchEdge, ...]
    # predicted edges whose endpoints were resolved through container alignment
    container_resolved: tuple[ArchEdge, ...] = ()


@dataclass(frozen=True)
class _Candidate:
    score: float
    method: MatchMethod
    pred: str
    ref: str


def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 0.0
    return len(sa & sb) / len(sa | sb)


def score_names(pred_name: str, ref_name: str, synonyms: SynonymTable) -> tuple[float, MatchMethod]:
    """Lexical similarity of two names: exact, synonym concept, or token Jaccard."""
    tp, tr = normalize_label(pred_name), normalize_label(ref_name)
    if tp and tp == tr:
        return 1.0, MatchMethod.EXACT
    cp = synonyms.concept_of(tp)
    if cp is not None and cp == synonyms.concept_of(tr):
        return 1.0, MatchMethod.SYNONYM
    return jaccard(tp, tr), MatchMethod.TOKEN


def _path(graph: ArchGraph, node_id: str) -> tuple[str, ...]:
    return tuple(" ".join(normalize_label(graph.node(a).display_name)) for a in reversed(graph.ancestors(node_id)))


def _greedy(cands: list[_Candidate], pred: ArchGraph, ref: ArchGraph) -> list[_Candidate]:
    def key(c: _Candidate):
        return (
            -c.score,
            _METHOD_RANK[c.method],
            pred.node(c.pred).display_name,
            ref.node(c.ref).display_name,
            _path(pred, c.pred) != _path(ref, c.ref),
            c.pred,
            c.ref,
        )

    chosen = []
    used_p: set[str] = set()
    used_r: set[str] = set()
    for c in sorted(cands, key=key):
        if c.pred in used_p or c.ref in used_r:
            continue
        chosen.append(c)
        used_p.add(c.pred)
        used_r.add(c.ref)
    return chosen


def _lexical_candidates(
    pred: ArchGraph, ref: ArchGraph, pred_ids: list[str], ref_ids: list[str], config: MatchConfig
) -> tuple[list[_Candidate], list[_Candidate]]:
    """Accepted candidates and gray-zone/sub-threshold candidates (for the judge)."""
    accepted, rest = [], []
    for p in pred_ids:
        pname = pred.node(p).display_name
        for r in ref_ids:
            score, method = score_names(pname, ref.node(r).display_name, config.synonyms)
            cand = _Candidate(score, method, p, r)
            if method is not MatchMethod.TOKEN or (score >= config.similarity_threshold and score > 0):
                accepted.append(cand)
            else:
                rest.append(cand)
    return accepted, rest


def _context(graph: ArchGraph, node_id: str) -> str:
    path = [graph.node(a).display_name for a in reversed(graph.ancestors(node_id))]
    return " / ".join(path) if path else "(top level)"


def match_nodes(
    pred: ArchGraph,
    ref: ArchGraph,
    config: MatchConfig | None = None,
    judge: EquivalenceJudge | None = None,
) -> NodeMatching:
    """Injective alignment of predicted leaves to reference leaves.

    Lexical mode accepts exact, synonym and token matches at or above the
    threshold. Hybrid mode additionally asks the judge about token pairs in
    ``[0.2, threshold)``; judge mode asks about every non-exact, non-synonym
    pair scoring at least 0.2, so the judge can also veto a token match.
    """
    config = config or MatchConfig()
    if config.mode is not MatchMode.LEXICAL and judge is None:
        raise JudgeUnavailable(f"match mode {config.mode.value!r} needs a judge")
    pred_leaves, ref_leaves = leaf_nodes(pred), leaf_nodes(ref)
    accepted, rest = _lexical_candidates(pred, ref, pred_leaves, ref_leaves, config)
    if config.mode is not MatchMode.LEXICAL:
        if config.mode is MatchMode.HYBRID:
            asked = [c for c in rest if JUDGE_FLOOR <= c.score < config.similarity_threshold]
        else:
            token_accepted = [c for c in accepted if c.method is MatchMethod.TOKEN]
            accepted = [c for c in accepted if c.method is not MatchMethod.TOKEN]
            asked = token_accepted + [c for c in rest if c.score >= JUDGE_FLOOR]
            asked.sort(key=lambda c: (c.pred, c.ref))
        if asked:
            verdicts = judge.judge_node_equivalence(
                [
                    (pred.node(c.pred).display_name, ref.node(c.ref).display_name,
                     f"pred: {_context(pred, c.pred)}; ref: {_context(ref, c.ref)}")
                    for c in asked
                ]
            )
            for c, verdict in zip(asked, verdicts):
                if verdict.equivalent:
                    accepted.append(_Candidate(c.score, MatchMethod.JUDGE, c.pred, c.ref))
    chosen = _greedy(accepted, pred, ref)
    pairs = tuple(
        MatchedPair(
            c.pred, c.ref, c.score, c.method,
            layer_of(pred, c.pred, config.layer_map) == layer_of(ref, c.ref, config.layer_map),
        )
        for c in chosen
    )
    used_p = {c.pred for c in chosen}
    used_r = {c.ref for c in chosen}
    return NodeMatching(
        pairs,
        tuple(p for p in pred_leaves if p not in used_p),
        tuple(r for r in ref_leaves if r not in used_r),
    )


def match_containers(pred: ArchGraph, ref: ArchGraph, config: MatchConfig | None = None) -> dict[str, str]:
    """Lexical alignment of container nodes; used only to resolve edge endpoints."""
    config = config or MatchConfig()
    accepted, _ = _lexical_candidates(pred, ref, pred.containers(), ref.containers(), config)
    return {c.pred: c.ref for c in _greedy(accepted, pred, ref)}


def match_edges(
    pred: ArchGraph,
    ref: ArchGraph,
    nodes: NodeMatching,
    config: MatchConfig | None = None,
) -> EdgeMatching:
    """A predicted edge is a true positive when both resolved endpoints hit the
    endpoints of a not-yet-used reference edge. Labels are ignored."""
    config = config or MatchConfig()
    mapping = nodes.pred_to_ref()
    container_map = match_containers(pred, ref, config) if pred.containers() else {}
    resolve = {**container_map, **mapping}
    used = [False] * len(ref.edges)
    tp, fp, via_container = [], [], []
    for e in pred.edges:
        if pred.is_container(e.source) or pred.is_container(e.target):
            via_container.append(e)
        s, t = resolve.get(e.source), resolve.get(e.target)
        hit = None
        if s is not None and t is not None:
            for i, r in enumerate(ref.edges):
                if used[i]:
                    continue
                if (r.source, r.target) == (s, t) or (
                    not config.direction_sensitive and (r.source, r.target) == (t, s)
                ):
                    hit = i
                    break
        if hit is None:
            fp.append(e)
        else:
            used[hit] = True
            tp.append((e, ref.edges[hit]))
    fn = tuple(r for i, r in enumerate(ref.edges) if not used[i])
    return EdgeMatching(tuple(tp), tuple(fp), fn, tuple(via_container))
