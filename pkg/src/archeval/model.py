"""In-memory architecture diagram: a directed relation graph plus a containment forest."""

from __future__ import annotations

import enum
import hashlib
import re
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Mapping

UNLAYERED = "unlayered"


class GraphError(ValueError):
    """A graph violates one of its structural invariants."""


class UnknownNode(KeyError):
    pass


class NodeKind(str, enum.Enum):
    COMPONENT = "component"
    DATABASE = "database"
    ACTOR = "actor"
    QUEUE = "queue"
    INTERFACE = "interface"
    PACKAGE = "package"
    NODE = "node"
    CLOUD = "cloud"
    FOLDER = "folder"
    RECTANGLE = "rectangle"
    OTHER = "other"


_KIND_ORDER = {kind: i for i, kind in enumerate(NodeKind)}


class EdgeStyle(str, enum.Enum):
    SOLID = "solid"
    DASHED = "dashed"


class Direction(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class ArchNode:
    id: str
    display_name: str
    kind: NodeKind = NodeKind.COMPONENT
    alias: str | None = None
    stereotype: str | None = None
    parent: str | None = None


@dataclass(frozen=True)
class ArchEdge:
    source: str
    target: str
    label: str | None = None
    style: EdgeStyle = EdgeStyle.SOLID
    direction_hint: Direction | None = None


_STEREOTYPE_RE = re.compile(r"<<.*?>>|«.*?»")
_SEPARATOR_RE = re.compile(r"[\W_]+")


def normalize_name(text: str) -> str:
    """Lookup form of a name: NFC, lowercase, stereotypes removed, separators collapsed."""
    text = unicodedata.normalize("NFC", text)
    text = _STEREOTYPE_RE.sub(" ", text)
    text = text.replace("<<", " ").replace(">>", " ")
    return _SEPARATOR_RE.sub(" ", text.lower()).strip()


@dataclass(frozen=True, eq=False)
class ArchGraph:
    """Immutable diagram graph.

    Nodes and edges keep declaration order. Containment is carried by
    ``ArchNode.parent``; relation edges are the only edges.
    """

    nodes: tuple[ArchNode, ...] = ()
    edges: tuple[ArchEdge, ...] = ()
    source_digest: str = ""
    _by_id: dict[str, ArchNode] = field(init=False, repr=False)
    _children: dict[str, tuple[str, ...]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        by_id: dict[str, ArchNode] = {}
        for node in self.nodes:
            if node.id in by_id:
                raise GraphError(f"duplicate node id {node.id!r}")
            if not node.display_name:
                raise GraphError(f"node {node.id!r} has an empty display name")
            by_id[node.id] = node
        children: dict[str, list[str]] = {}
        for node in self.nodes:
            if node.parent is not None:
                if node.parent not in by_id:
                    raise GraphError(f"node {node.id!r} has unknown parent {node.parent!r}")
                children.setdefault(node.parent, []).append(node.id)
        for node in self.nodes:
            seen = {node.id}
            cur = node.parent
            while cur is not None:
                if cur in seen:
                    raise GraphError(f"containment cycle through {node.id!r}")
                seen.add(cur)
                cur = by_id[cur].parent
        for edge in self.edges:
            for end in (edge.source, edge.target):
                if end not in by_id:
                    raise GraphError(f"edge endpoint {end!r} is not a node")
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_children", {k: tuple(v) for k, v in children.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ArchGraph):
            return NotImplemented
        return (self.nodes, self.edges, self.source_digest) == (
            other.nodes,
            other.edges,
            other.source_digest,
        )

    def __hash__(self) -> int:
        return hash((self.nodes, self.edges, self.source_digest))

    def __contains__(self, node_id: object) -> bool:
        return node_id in self._by_id

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, node_id: str) -> ArchNode:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise UnknownNode(node_id) from None

    def children(self, node_id: str) -> tuple[str, ...]:
        self.node(node_id)
        return self._children.get(node_id, ())

    def roots(self) -> list[str]:
        return [n.id for n in self.nodes if n.parent is None]

    def is_container(self, node_id: str) -> bool:
        return bool(self.children(node_id))

    def containers(self) -> list[str]:
        return [n.id for n in self.nodes if n.id in self._children]

    def ancestors(self, node_id: str) -> list[str]:
        """Parent chain from the direct parent up to the top-level container."""
        out = []
        cur = self.node(node_id).parent
        while cur is not None:
            out.append(cur)
            cur = self._by_id[cur].parent
        return out

    def descendants(self, node_id: str) -> list[str]:
        out: list[str] = []
        stack = list(reversed(self.children(node_id)))
        while stack:
            cur = stack.pop()
            out.append(cur)
            stack.extend(reversed(self._children.get(cur, ())))
        return out

    def depth(self, node_id: str) -> int:
        """Top-level elements have depth 1."""
        return len(self.ancestors(node_id)) + 1

    def with_digest(self, digest: str) -> ArchGraph:
        return ArchGraph(self.nodes, self.edges, digest)


def digest_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8", "surrogatepass")).hexdigest()


def leaf_nodes(graph: ArchGraph) -> list[str]:
    """Ids of nodes without containment children, in declaration order."""
    return [n.id for n in graph.nodes if not graph.is_container(n.id)]


def degree(graph: ArchGraph, node_id: str) -> int:
    """In-degree plus out-degree over relation edges; a self-loop counts twice."""
    graph.node(node_id)
    return sum((e.source == node_id) + (e.target == node_id) for e in graph.edges)


def degrees(graph: ArchGraph) -> dict[str, int]:
    out = {n.id: 0 for n in graph.nodes}
    for e in graph.edges:
        out[e.source] += 1
        out[e.target] += 1
    return out


# Keys are normalized with normalize_name before lookup.
DEFAULT_LAYER_SYNONYMS: dict[str, tuple[str, ...]] = {
    "application": (
        "application", "application layer", "app layer", "presentation", "presentation layer",
        "frontend", "front end", "frontend layer", "ui", "ui layer", "user interface",
        "client", "client layer", "business", "business logic", "business logic layer",
        "business layer", "service layer", "services layer", "web layer", "api layer",
        "interface layer", "应用层", "表现层", "表示层", "业务层", "业务逻辑层", "前端",
    ),
    "support": (
        "support", "support layer", "supporting layer", "middleware", "middleware layer",
        "platform", "platform layer", "common services", "shared services", "core services",
        "support services", "支撑层", "支持层", "中间件", "中间件层", "平台层",
    ),
    "infrastructure": (
        "infrastructure", "infrastructure layer", "infra", "data", "data layer",
        "data storage", "storage", "storage layer", "persistence", "persistence layer",
        "database layer", "data access layer", "deployment", "基础设施层", "基础层",
        "数据层", "存储层",
    ),
}

_LAYER_SUFFIXES = (" layer", " tier", "层")


class LayerMap:
    """Maps container names to layer labels."""

    def __init__(self, entries: Mapping[str, str] | None = None, *, defaults: bool = True):
        self._table: dict[str, str] = {}
        if defaults:
            for label, names in DEFAULT_LAYER_SYNONYMS.items():
                for name in names:
                    self._table[normalize_name(name)] = label
        for name, label in (entries or {}).items():
            self._table[normalize_name(name)] = normalize_name(label)

    @classmethod
    def default(cls) -> LayerMap:
        return cls()

    def lookup(self, name: str) -> str:
        key = normalize_name(name)
        if key in self._table:
            return self._table[key]
        for suffix in _LAYER_SUFFIXES:
            if key.endswith(suffix) and key[: -len(suffix)].strip() in self._table:
                return self._table[key[: -len(suffix)].strip()]
        return f"other:{key}"


_DEFAULT_LAYER_MAP = LayerMap()


def layer_of(graph: ArchGraph, node_id: str, layer_map: LayerMap | None = None) -> str:
    """Layer label of the node's outermost container, or ``"unlayered"`` for top-level nodes."""
    chain = graph.ancestors(node_id)
    if not chain:
        return UNLAYERED
    top = graph.node(chain[-1])
    return (layer_map or _DEFAULT_LAYER_MAP).lookup(top.display_name)


def max_depth(graph: ArchGraph) -> int:
    return max((graph.depth(n.id) for n in graph.nodes), default=0)


# --- canonical serialization -------------------------------------------------

_ARROWS = {
    (EdgeStyle.SOLID, None): "-->",
    (EdgeStyle.DASHED, None): "..>",
}

_KIND_KEYWORD = {kind: kind.value for kind in NodeKind}
_KIND_KEYWORD[NodeKind.OTHER] = "frame"


def _arrow(edge: ArchEdge) -> str:
    if edge.direction_hint is None:
        return _ARROWS[(edge.style, None)]
    ch = "-" if edge.style is EdgeStyle.SOLID else "."
    return f"{ch}{edge.direction_hint.value}{ch}>"


def _quote(name: str) -> str:
    if '"' not in name:
        return f'"{name}"'
    if "]" not in name:
        return f"[{name}]"
    return '"' + name.replace('"', "'") + '"'


def _edge_signature(graph: ArchGraph, node_id: str, base: Mapping[str, tuple]) -> tuple:
    sig = []
    for e in graph.edges:
        if e.source == node_id:
            sig.append(("out", base[e.target], e.style.value, e.label or ""))
        if e.target == node_id:
            sig.append(("in", base[e.source], e.style.value, e.label or ""))
    return tuple(sorted(sig))


def canonical_serialize(graph: ArchGraph) -> str:
    """Deterministic PlantUML text; independent of declaration order and node ids."""
    base = {
        n.id: (_KIND_ORDER[n.kind], normalize_name(n.display_name), n.display_name, n.stereotype or "")
        for n in graph.nodes
    }

    def subtree_key(node_id: str) -> tuple:
        kids = sorted(subtree_key(c) for c in graph.children(node_id))
        return (base[node_id], _edge_signature(graph, node_id, base), tuple(kids))

    keys = {n.id: subtree_key(n.id) for n in graph.nodes}
    alias: dict[str, str] = {}
    lines = ["@startuml"]

    def emit(node_id: str, indent: int) -> None:
        node = graph.node(node_id)
        alias[node_id] = f"n{len(alias) + 1}"
        head = f"{'  ' * indent}{_KIND_KEYWORD[node.kind]} {_quote(node.display_name)} as {alias[node_id]}"
        if node.stereotype:
            head += f" <<{node.stereotype}>>"
        kids = sorted(graph.children(node_id), key=keys.__getitem__)
        if kids:
            lines.append(head + " {")
            for kid in kids:
                emit(kid, indent + 1)
            lines.append(f"{'  ' * indent}}}")
        else:
            lines.append(head)

    for root in sorted(graph.roots(), key=keys.__getitem__):
        emit(root, 0)
    order = {nid: i for i, nid in enumerate(alias)}
    edges = sorted(
        graph.edges,
        key=lambda e: (order[e.source], order[e.target], e.style.value,
                       e.direction_hint.value if e.direction_hint else "", e.label or ""),
    )
    for e in edges:
        line = f"{alias[e.source]} {_arrow(e)} {alias[e.target]}"
        if e.label:
            line += f" : {e.label}"
        lines.append(line)
    lines.append("@enduml")
    return "\n".join(lines)


def isomorphism_key(graph: ArchGraph) -> tuple:
    """Multiset signature used to compare graphs up to node renaming."""

    def path(node_id: str) -> tuple:
        chain = [node_id, *graph.ancestors(node_id)]
        return tuple(graph.node(n).display_name for n in reversed(chain))

    nodes = sorted(
        (n.display_name, n.kind.value, n.stereotype or "", path(n.id)) for n in graph.nodes
    )
    edges = sorted(
        (path(e.source), path(e.target), e.label or "", e.style.value,
         e.direction_hint.value if e.direction_hint else "")
        for e in graph.edges
    )
    return tuple(nodes), tuple(edges)


def build_graph(
    nodes: Iterable[tuple | ArchNode],
    edges: Iterable[tuple | ArchEdge] = (),
) -> ArchGraph:
    """Convenience constructor: nodes as ``(id, parent)`` or ``(id, parent, kind)`` tuples,
    edges as ``(source, target)`` tuples. Display name defaults to the id."""
    built_nodes = []
    for item in nodes:
        if isinstance(item, ArchNode):
            built_nodes.append(item)
            continue
        if isinstance(item, str):
            item = (item, None)
        node_id, parent, *rest = item
        kind = NodeKind(rest[0]) if rest else NodeKind.COMPONENT
        built_nodes.append(ArchNode(id=node_id, display_name=node_id, kind=kind, parent=parent))
    built_edges = [e if isinstance(e, ArchEdge) else ArchEdge(e[0], e[1]) for e in edges]
    return ArchGraph(tuple(built_nodes), tuple(built_edges))
