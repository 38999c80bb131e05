"""Graph generators shared by property tests."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from archeval.model import ArchEdge, ArchGraph, ArchNode, EdgeStyle, NodeKind

NAMES = [
    "UI", "Web Client", "API Gateway", "Auth Service", "Auth Server", "User Service", "MySQL", "Database",
    "Redis", "Cache", "Message Queue", "Kafka", "Order Service", "Payment Gateway", "Logger", "Search",
]
LEAF_KINDS = [NodeKind.COMPONENT, NodeKind.DATABASE, NodeKind.QUEUE, NodeKind.ACTOR, NodeKind.CLOUD]
CONTAINER_KINDS = [NodeKind.PACKAGE, NodeKind.NODE, NodeKind.FOLDER, NodeKind.RECTANGLE]
LAYERS = ["Application Layer", "Support Layer", "Infrastructure Layer", "Tools"]


def random_graph(
    rng: random.Random, max_nodes: int = 6, max_edges: int = 8, nest: bool = True, min_nodes: int = 0
) -> ArchGraph:
    n = rng.randint(min_nodes, max_nodes)
    nodes = []
    for i in range(n):
        parent = None
        if nest and i > 0 and rng.random() < 0.3:
            parent = f"v{rng.randrange(i)}"
        nodes.append(ArchNode(f"v{i}", rng.choice(NAMES), rng.choice(LEAF_KINDS), parent=parent))
    edges = []
    if n:
        for _ in range(rng.randint(0, max_edges)):
            edges.append(ArchEdge(f"v{rng.randrange(n)}", f"v{rng.randrange(n)}"))
    return ArchGraph(tuple(nodes), tuple(edges))


@st.composite
def diagram_graphs(draw, max_nodes: int = 10, max_edges: int = 12, unique_names: bool = False) -> ArchGraph:
    """Graphs that a PlantUML file could express: containers get container kinds."""
    n = draw(st.integers(0, max_nodes))
    if unique_names:
        names = draw(st.lists(st.sampled_from(NAMES + LAYERS), min_size=n, max_size=n, unique=True)) if n <= len(
            NAMES + LAYERS) else [f"Node {i}" for i in range(n)]
    else:
        names = [draw(st.sampled_from(NAMES + LAYERS)) for _ in range(n)]
    parents = [None] + [draw(st.one_of(st.none(), st.integers(0, i - 1))) for i in range(1, n)]
    has_child = {p for p in parents if p is not None}
    nodes = []
    for i in range(n):
        kind = draw(st.sampled_from(CONTAINER_KINDS if i in has_child else LEAF_KINDS))
        stereo = draw(st.one_of(st.none(), st.sampled_from(["service", "external"])))
        parent = None if parents[i] is None else f"n{parents[i]}"
        nodes.append(ArchNode(f"n{i}", names[i], kind, stereotype=stereo, parent=parent))
    edges = []
    if n:
        m = draw(st.integers(0, max_edges))
        for _ in range(m):
            s, t = draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))
            if s == t:
                continue
            style = draw(st.sampled_from(list(EdgeStyle)))
            label = draw(st.one_of(st.none(), st.sampled_from(["calls", "reads", "writes"])))
            edges.append(ArchEdge(f"n{s}", f"n{t}", label, style))
    return ArchGraph(tuple(nodes), tuple(edges))
