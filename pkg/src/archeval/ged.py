"""Graph edit distance over relation edges and node labels.

Containment is ignored (it carries zero cost). Edges are directed and may
repeat; each parallel copy is one edit unit. Node labels match when their
normalized tokens are equal or map to the same synonym concept.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field

from .alignment import jaccard, normalize_label
from .model import ArchGraph
from .synonyms import SynonymTable

DEFAULT_EXACT_CUTOFF = 8
DEFAULT_BUDGET = 5.0
MAX_REFINE_PASSES = 25


@dataclass(frozen=True)
class CostModel:
    node_insert: int = 1
    node_delete: int = 1
    node_substitute: int = 1
    edge_insert: int = 1
    edge_delete: int = 1

    def __post_init__(self) -> None:
        for name, value in vars(self).items():
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ValueError(f"{name} must be a non-negative integer")


@dataclass(frozen=True)
class GedResult:
    distance: int
    exact: bool
    mapping: tuple[tuple[str, str | None], ...]
    elapsed: float = field(compare=False)
    lower_bound: int = 0


def label_key(name: str, synonyms: SynonymTable) -> tuple:
    tokens = tuple(normalize_label(name))
    concept = synonyms.concept_of(tokens)
    return ("concept", concept) if concept is not None else ("tokens", tokens)


class _Problem:
    """Index-based view of a GED instance shared by the exact and greedy solvers."""

    def __init__(self, pred: ArchGraph, ref: ArchGraph, costs: CostModel, synonyms: SynonymTable):
        self.costs = costs
        self.pred_ids = [n.id for n in pred.nodes]
        self.ref_ids = [n.id for n in ref.nodes]
        pi = {nid: i for i, nid in enumerate(self.pred_ids)}
        ri = {nid: i for i, nid in enumerate(self.ref_ids)}
        self.np, self.nt = len(self.pred_ids), len(self.ref_ids)
        self.pkey = [label_key(n.display_name, synonyms) for n in pred.nodes]
        self.tkey = [label_key(n.display_name, synonyms) for n in ref.nodes]
        self.ptok = [normalize_label(n.display_name) for n in pred.nodes]
        self.ttok = [normalize_label(n.display_name) for n in ref.nodes]
        self.mp: Counter = Counter((pi[e.source], pi[e.target]) for e in pred.edges)
        self.mt: Counter = Counter((ri[e.source], ri[e.target]) for e in ref.edges)
        self.p_inc = self._incidence(self.np, self.mp)
        self.t_inc = self._incidence(self.nt, self.mt)
        self.pdeg = [sum(self.mp[q] * ((q[0] == u) + (q[1] == u)) for q in self.p_inc[u]) for u in range(self.np)]
        self.tdeg = [sum(self.mt[q] * ((q[0] == a) + (q[1] == a)) for q in self.t_inc[a]) for a in range(self.nt)]
        self.ppath = [self._path(pred, n) for n in self.pred_ids]
        self.tpath = [self._path(ref, n) for n in self.ref_ids]

    @staticmethod
    def _path(graph: ArchGraph, node_id: str) -> tuple[tuple[str, ...], ...]:
        return tuple(tuple(normalize_label(graph.node(x).display_name)) for x in graph.ancestors(node_id))

    @staticmethod
    def _incidence(n: int, m: Counter) -> list[list[tuple[int, int]]]:
        inc: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for (u, v) in m:
            inc[u].append((u, v))
            if v != u:
                inc[v].append((u, v))
        return inc

    def sub(self, u: int, a: int) -> int:
        return 0 if self.pkey[u] == self.tkey[a] else self.costs.node_substitute

    def edge_diff(self, mp: int, mt: int) -> int:
        if mp >= mt:
            return (mp - mt) * self.costs.edge_delete
        return (mt - mp) * self.costs.edge_insert

    def total_cost(self, f: list[int]) -> int:
        c = self.costs
        used = {a for a in f if a >= 0}
        cost = sum(c.node_delete if a < 0 else self.sub(u, a) for u, a in enumerate(f))
        cost += (self.nt - len(used)) * c.node_insert
        covered = set()
        for (u, v), m in self.mp.items():
            a, b = f[u], f[v]
            if a < 0 or b < 0:
                cost += m * c.edge_delete
            else:
                cost += self.edge_diff(m, self.mt.get((a, b), 0))
                covered.add((a, b))
        for q, m in self.mt.items():
            if q not in covered:
                cost += m * c.edge_insert
        return cost

    def node_lower_bound(self, rem_p: Counter, rem_t: Counter, n_rem_p: int, n_rem_t: int) -> int:
        c = self.costs
        z = sum(min(cnt, rem_t.get(k, 0)) for k, cnt in rem_p.items())
        k = min(n_rem_p, n_rem_t)
        z = min(z, k)
        best = None
        for s in {0, z, k}:
            zero = min(z, s)
            val = (s - zero) * c.node_substitute + (n_rem_p - s) * c.node_delete + (n_rem_t - s) * c.node_insert
            best = val if best is None else min(best, val)
        return best or 0

    def lower_bound(self) -> int:
        node_lb = self.node_lower_bound(Counter(self.pkey), Counter(self.tkey), self.np, self.nt)
        ep, et = sum(self.mp.values()), sum(self.mt.values())
        return node_lb + abs(ep - et) * min(self.costs.edge_insert, self.costs.edge_delete)


class _LocalCost:
    """Sparse re-evaluation of the cost terms touched by a move."""

    def __init__(self, prob: _Problem, f: list[int]):
        self.prob = prob
        self.f = f
        self.finv = [-1] * prob.nt
        for u, a in enumerate(f):
            if a >= 0:
                self.finv[a] = u

    def local(self, ps: set[int], ts: set[int]) -> int:
        prob, f, finv, c = self.prob, self.f, self.finv, self.prob.costs
        terms: dict[tuple, int] = {}
        for u in ps:
            for q in prob.p_inc[u]:
                a, b = f[q[0]], f[q[1]]
                if a < 0 or b < 0:
                    terms[("p", q)] = prob.mp[q] * c.edge_delete
                else:
                    terms[("x", q)] = prob.edge_diff(prob.mp[q], prob.mt.get((a, b), 0))
        for a in ts:
            for q in prob.t_inc[a]:
                x, y = finv[q[0]], finv[q[1]]
                if x < 0 or y < 0:
                    terms[("t", q)] = prob.mt[q] * c.edge_insert
                else:
                    terms[("x", (x, y))] = prob.edge_diff(prob.mp.get((x, y), 0), prob.mt[q])
        node = 0
        for u in ps:
            node += c.node_delete if f[u] < 0 else prob.sub(u, f[u])
        for a in ts:
            if finv[a] < 0:
                node += c.node_insert
        return sum(terms.values()) + node

    def assign(self, u: int, a: int) -> None:
        old = self.f[u]
        if old >= 0:
            self.finv[old] = -1
        self.f[u] = a
        if a >= 0:
            self.finv[a] = u

    def try_swap(self, u: int, v: int) -> int:
        """Swap the images of u and v if that lowers the cost; return the gain."""
        a, b = self.f[u], self.f[v]
        if a == b:
            return 0
        ps, ts = {u, v}, {x for x in (a, b) if x >= 0}
        before = self.local(ps, ts)
        self.assign(u, -1)
        self.assign(v, a)
        self.assign(u, b)
        after = self.local(ps, ts)
        if after < before:
            return before - after
        self.assign(v, -1)
        self.assign(u, a)
        self.assign(v, b)
        return 0

    def try_move(self, u: int, a_new: int) -> int:
        """Re-point u at a currently unused ref node (or delete it when a_new < 0)."""
        a_old = self.f[u]
        if a_old == a_new:
            return 0
        ts = {x for x in (a_old, a_new) if x >= 0}
        before = self.local({u}, ts)
        self.assign(u, a_new)
        after = self.local({u}, ts)
        if after < before:
            return before - after
        self.assign(u, a_old)
        return 0


def _greedy_mapping(prob: _Problem) -> list[int]:
    pairs = []
    for u in range(prob.np):
        for a in range(prob.nt):
            pairs.append(
                (
                    prob.sub(u, a),
                    -jaccard(prob.ptok[u], prob.ttok[a]),
                    prob.ppath[u] != prob.tpath[a],
                    abs(prob.pdeg[u] - prob.tdeg[a]),
                    u,
                    a,
                )
            )
    pairs.sort()
    f = [-1] * prob.np
    used = [False] * prob.nt
    c = prob.costs
    for sub, *_, u, a in pairs:
        if f[u] >= 0 or used[a]:
            continue
        # substitution only pays when it beats delete + insert
        if sub > c.node_delete + c.node_insert:
            continue
        f[u] = a
        used[a] = True
    return f


def _refine(prob: _Problem, f: list[int], max_passes: int = MAX_REFINE_PASSES) -> list[int]:
    """First-improvement local search over swaps and re-assignments.

    Bounded by pass count rather than wall clock so results are reproducible.
    """
    lc = _LocalCost(prob, list(f))
    for _ in range(max_passes):
        improved = False
        for u in range(prob.np):
            for v in range(u + 1, prob.np):
                if lc.try_swap(u, v):
                    improved = True
            for a in range(prob.nt):
                if lc.finv[a] < 0 and lc.try_move(u, a):
                    improved = True
            if lc.f[u] >= 0 and lc.try_move(u, -1):
                improved = True
        if not improved:
            break
    return lc.f


class _BudgetExceeded(Exception):
    pass


def _branch_and_bound(
    prob: _Problem, upper: int, upper_map: list[int], deadline: float
) -> tuple[int, list[int], bool]:
    """Depth-first search over node maps, pruned with an admissible bound.

    The bound for a partial map adds, for the unprocessed part, the best
    possible node assignment cost given label classes and the difference in
    remaining edge counts. Returns (distance, map, completed).
    """
    c = prob.costs
    order = sorted(range(prob.np), key=lambda u: (-prob.pdeg[u], u))
    pos = {u: k for k, u in enumerate(order)}
    ep_rem = [
        sum(m for (u, v), m in prob.mp.items() if pos[u] >= k or pos[v] >= k)
        for k in range(prob.np + 1)
    ]
    rem_p_keys = [Counter(prob.pkey[u] for u in order[k:]) for k in range(prob.np + 1)]
    emin = min(c.edge_insert, c.edge_delete)

    best_cost, best_map = upper, list(upper_map)
    f = [-1] * prob.np
    finv = [-1] * prob.nt
    rem_t = Counter(prob.tkey)
    n_unused = prob.nt
    et_rem = sum(prob.mt.values())  # ref edges with an endpoint not yet used
    ticks = 0

    def step_edge_cost(u: int, a: int) -> int:
        """Cost of edge terms that become fixed when u is mapped to a (-1: deleted)."""
        terms: dict[tuple[int, int], int] = {}
        for q in prob.p_inc[u]:
            w = q[1] if q[0] == u else q[0]
            if w != u and pos[w] > pos[u]:
                continue
            ia = a if q[0] == u else f[q[0]]
            ib = a if q[1] == u else f[q[1]]
            if ia < 0 or ib < 0:
                terms[q] = prob.mp[q] * c.edge_delete
            else:
                terms[q] = prob.edge_diff(prob.mp[q], prob.mt.get((ia, ib), 0))
        if a >= 0:
            for q in prob.t_inc[a]:
                b = q[1] if q[0] == a else q[0]
                if b != a and finv[b] < 0:
                    continue
                x = u if q[0] == a else finv[q[0]]
                y = u if q[1] == a else finv[q[1]]
                if (x, y) not in terms:
                    terms[(x, y)] = prob.edge_diff(0, prob.mt[q])
        return sum(terms.values())

    def covered_delta(a: int) -> int:
        """Ref edges that become fully inside the used set once a is used."""
        total = 0
        for q in prob.t_inc[a]:
            b = q[1] if q[0] == a else q[0]
            if b == a or finv[b] >= 0:
                total += prob.mt[q]
        return total

    def recurse(k: int, g: int) -> None:
        nonlocal best_cost, best_map, n_unused, et_rem, ticks
        ticks += 1
        if ticks & 1023 == 0 and time.perf_counter() > deadline:
            raise _BudgetExceeded
        if k == prob.np:
            total = g + n_unused * c.node_insert + et_rem * c.edge_insert
            if total < best_cost:
                best_cost, best_map = total, list(f)
            return
        u = order[k]
        options = [
            (prob.sub(u, a) + step_edge_cost(u, a), a) for a in range(prob.nt) if finv[a] < 0
        ]
        options.sort()
        options.append((c.node_delete + step_edge_cost(u, -1), -1))
        for inc, a in options:
            delta = 0
            if a >= 0:
                delta = covered_delta(a)
                finv[a] = u
                f[u] = a
                rem_t[prob.tkey[a]] -= 1
                n_unused -= 1
                et_rem -= delta
            lb = prob.node_lower_bound(rem_p_keys[k + 1], rem_t, prob.np - k - 1, n_unused)
            lb += abs(ep_rem[k + 1] - et_rem) * emin
            if g + inc + lb < best_cost:
                recurse(k + 1, g + inc)
            if a >= 0:
                finv[a] = -1
                rem_t[prob.tkey[a]] += 1
                n_unused += 1
                et_rem += delta
            f[u] = -1

    try:
        recurse(0, 0)
    except _BudgetExceeded:
        return best_cost, best_map, False
    return best_cost, best_map, True


def compute_ged(
    pred: ArchGraph,
    ref: ArchGraph,
    budget: float = DEFAULT_BUDGET,
    costs: CostModel | None = None,
    synonyms: SynonymTable | None = None,
    exact_cutoff: int = DEFAULT_EXACT_CUTOFF,
) -> GedResult:
    """Edit distance from ``pred`` to ``ref``.

    Exact branch and bound runs when neither graph exceeds ``exact_cutoff``
    nodes and finishes within ``budget`` seconds. Otherwise the greedy
    construction's cost is returned as an upper bound. A greedy result that
    meets the global lower bound is reported as exact.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    start = time.perf_counter()
    prob = _Problem(pred, ref, costs or CostModel(), synonyms or SynonymTable.default())
    lower = prob.lower_bound()
    f = _refine(prob, _greedy_mapping(prob))
    dist = prob.total_cost(f)
    exact = dist == lower
    if not exact and max(prob.np, prob.nt) <= exact_cutoff:
        dist, f, exact = _branch_and_bound(prob, dist, f, start + budget)
    mapping = tuple(
        (prob.pred_ids[u], prob.ref_ids[a] if a >= 0 else None) for u, a in enumerate(f)
    )
    return GedResult(dist, exact, mapping, time.perf_counter() - start, lower)
