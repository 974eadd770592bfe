"""Structural analysis: distance layers, window sets, uniformity, biconnectivity.

Window sets come in two flavours.  ``r_window(g, u, v, i)`` collects the
nodes whose distance to v is within i of d(u, v); ``r_window_by_index``
anchors the window at an explicit layer index instead.  ``m_window``
collects the nodes whose distances to two anchors differ by at most i.
The window-inequality checker and the uniformity certificate both scan all
candidate layer indices and demand a single index that works for every
node at once.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import NcgError
from .game import INF, DistanceTable, Graph, OwnedGraph, all_pairs_distances, exact


@dataclass(frozen=True)
class LayerProfile:
    """Distance layers A_0(u), A_1(u), ... out to the eccentricity of u."""

    source: int
    layers: tuple[frozenset[int], ...]

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(layer) for layer in self.layers)

    def size(self, r: int) -> int:
        return len(self.layers[r]) if 0 <= r < len(self.layers) else 0


def layers(g: Graph, u: int, table: DistanceTable | None = None) -> LayerProfile:
    """Partition of the nodes reachable from u by exact hop distance."""
    if table is None:
        table = all_pairs_distances(g)
    row = table.row(u)
    ecc = max((d for d in row if d != INF), default=0)
    buckets: list[set[int]] = [set() for _ in range(int(ecc) + 1)]
    for z, d in enumerate(row):
        if d != INF:
            buckets[int(d)].add(z)
    return LayerProfile(u, tuple(frozenset(b) for b in buckets))


def r_window(g: Graph, u: int, v: int, i: int, table: DistanceTable | None = None) -> frozenset[int]:
    """Nodes z with |d(z,v) - d(u,v)| <= i: the layer of u around v plus i layers each way."""
    if i < 0:
        raise ValueError("window radius must be non-negative")
    if table is None:
        table = all_pairs_distances(g)
    duv = table.d(u, v)
    row = table.row(v)
    return frozenset(
        z for z in range(g.n) if row[z] != INF and duv != INF and abs(row[z] - duv) <= i
    )


def r_window_by_index(g: Graph, v: int, r: int, i: int, table: DistanceTable | None = None) -> frozenset[int]:
    """Union of the layers of v with index in [r-i, r+i]."""
    if i < 0:
        raise ValueError("window radius must be non-negative")
    if table is None:
        table = all_pairs_distances(g)
    row = table.row(v)
    lo, hi = r - i, r + i
    return frozenset(z for z in range(g.n) if row[z] != INF and lo <= row[z] <= hi)


def m_window(g: Graph, v1: int, v2: int, i: int, table: DistanceTable | None = None) -> frozenset[int]:
    """Nodes whose distances to v1 and v2 differ by at most i in absolute value."""
    if i < 0:
        raise ValueError("window radius must be non-negative")
    if table is None:
        table = all_pairs_distances(g)
    r1, r2 = table.row(v1), table.row(v2)
    return frozenset(
        z
        for z in range(g.n)
        if r1[z] != INF and r2[z] != INF and abs(r1[z] - r2[z]) <= i
    )


def _layer_prefix_sums(g: Graph, table: DistanceTable) -> tuple[list[list[int]], int]:
    """Per-node prefix sums of layer sizes, indexed 0..diameter."""
    if not table.is_connected:
        raise NcgError("window scans need a connected graph")
    d = int(table.diameter)
    prefixes: list[list[int]] = []
    for u in range(g.n):
        counts = [0] * (d + 1)
        for dist in table.row(u):
            counts[int(dist)] += 1
        acc = 0
        prefix = []
        for c in counts:
            acc += c
            prefix.append(acc)
        prefixes.append(prefix)
    return prefixes, d


def _window_count(prefix: list[int], d: int, lo: int, hi: int) -> int:
    hi = min(hi, d)
    lo = max(lo, 0)
    if hi < lo:
        return 0
    return prefix[hi] - (prefix[lo - 1] if lo > 0 else 0)


@dataclass(frozen=True)
class WindowInequalityResult:
    """Outcome of the per-node layer-mass inequality scan."""

    ok: bool
    r: int
    threshold: Fraction
    min_slack: Fraction
    slack_by_node: tuple[Fraction, ...]

    @property
    def violating_nodes(self) -> tuple[int, ...]:
        return tuple(u for u, s in enumerate(self.slack_by_node) if s < 0)


def check_window_inequality(
    g: Graph, alpha, table: DistanceTable | None = None
) -> WindowInequalityResult:
    """Search for one layer index r making every node's widened-window mass large.

    The requirement per node u is ``sum_{i=2..d} |R^i_r(u)| >= n*d - n - 4*alpha``
    with d the diameter; the same r must serve every node.  On failure the
    result carries the best r (max-min slack) and its violating nodes.
    """
    alpha = exact(alpha)
    if table is None:
        table = all_pairs_distances(g)
    prefixes, d = _layer_prefix_sums(g, table)
    n = g.n
    threshold = Fraction(n * d - n) - 4 * alpha

    best: WindowInequalityResult | None = None
    for r in range(d + 1):
        slacks = []
        for u in range(n):
            mass = 0
            prefix = prefixes[u]
            for i in range(2, d + 1):
                mass += _window_count(prefix, d, r - i, r + i)
            slacks.append(Fraction(mass) - threshold)
        min_slack = min(slacks)
        result = WindowInequalityResult(
            min_slack >= 0, r, threshold, min_slack, tuple(slacks)
        )
        if result.ok:
            return result
        if best is None or min_slack > best.min_slack:
            best = result
    return best


def window_radius(alpha, n: int, epsilon) -> int:
    """ceil((4*alpha/n) / epsilon + 1), the certified window half-width."""
    alpha = exact(alpha)
    epsilon = exact(epsilon)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must be in (0, 1)")
    return math.ceil(Fraction(4) * alpha / n / epsilon + 1)


@dataclass(frozen=True)
class UniformityCertificate:
    """Witness that one distance window [r-x, r+x] captures >= n(1-eps) nodes per node."""

    epsilon: Fraction
    r: int
    x: int
    per_node_counts: tuple[int, ...]


def uniformity_certificate(
    g: Graph, alpha, epsilon, table: DistanceTable | None = None
) -> UniformityCertificate | None:
    """First layer index whose [r-x, r+x] window holds n(1-eps) nodes for everyone.

    Returns None when no index works; that is a data outcome, not an error.
    """
    alpha = exact(alpha)
    epsilon = exact(epsilon)
    x = window_radius(alpha, g.n, epsilon)
    if table is None:
        table = all_pairs_distances(g)
    prefixes, d = _layer_prefix_sums(g, table)
    need = g.n * (1 - epsilon)
    for r in range(d + 1):
        counts = [
            _window_count(prefixes[u], d, r - x, r + x) for u in range(g.n)
        ]
        if all(c >= need for c in counts):
            return UniformityCertificate(epsilon, r, x, tuple(counts))
    return None


def graph_power(g: Graph, p: int) -> Graph:
    """Graph with an edge uv whenever 1 <= d_g(u, v) <= p."""
    if p < 1:
        raise ValueError("power must be >= 1")
    table = all_pairs_distances(g)
    edges = [
        (u, v)
        for u in range(g.n)
        for v in range(u + 1, g.n)
        if 1 <= table.d(u, v) <= p
    ]
    return Graph(g.n, edges)


def is_distance_uniform(
    g: Graph, epsilon, mode: str = "uniform", table: DistanceTable | None = None
) -> tuple[bool, int | None]:
    """Single-layer (or two-consecutive-layer) concentration at one shared index."""
    epsilon = exact(epsilon)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must be in (0, 1)")
    if mode not in ("uniform", "almost_uniform"):
        raise ValueError(f"unknown mode {mode!r}")
    if table is None:
        table = all_pairs_distances(g)
    if not table.is_connected:
        return False, None
    d = int(table.diameter)
    need = g.n * (1 - epsilon)
    sizes = []
    for u in range(g.n):
        counts = [0] * (d + 2)
        for dist in table.row(u):
            counts[int(dist)] += 1
        sizes.append(counts)
    for r in range(d + 1):
        if mode == "uniform":
            hit = all(sizes[u][r] >= need for u in range(g.n))
        else:
            hit = all(max(sizes[u][r], sizes[u][r + 1]) >= need for u in range(g.n))
        if hit:
            return True, r
    return False, None


# ---------------------------------------------------------------------------
# biconnectivity


@dataclass(frozen=True)
class BiconnectivityDecomposition:
    """Edge partition into biconnected components, plus bridges and cut vertices."""

    components: tuple[frozenset[tuple[int, int]], ...]
    component_nodes: tuple[frozenset[int], ...]
    bridges: tuple[tuple[int, int], ...]
    cut_vertices: frozenset[int]

    @cached_property
    def nontrivial(self) -> tuple[int, ...]:
        """Indices of components with at least three nodes."""
        return tuple(
            i for i, nodes in enumerate(self.component_nodes) if len(nodes) >= 3
        )

    @property
    def nontrivial_count(self) -> int:
        return len(self.nontrivial)

    def nontrivial_containing(self, v: int) -> tuple[int, ...]:
        return tuple(i for i in self.nontrivial if v in self.component_nodes[i])

    @cached_property
    def nontrivial_edges(self) -> frozenset[tuple[int, int]]:
        out: set[tuple[int, int]] = set()
        for i in self.nontrivial:
            out |= self.components[i]
        return frozenset(out)


def biconnectivity(g: Graph) -> BiconnectivityDecomposition:
    """Lowpoint decomposition into biconnected components (edge sets)."""
    n = g.n
    disc = [-1] * n
    low = [0] * n
    components: list[frozenset[tuple[int, int]]] = []
    cut: set[int] = set()
    edge_stack: list[tuple[int, int]] = []
    timer = 0

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * n + 100))

    def dfs(u: int, parent: int):
        nonlocal timer
        disc[u] = low[u] = timer
        timer += 1
        children = 0
        for v in g.neighbors(u):
            if v == parent:
                continue
            if disc[v] == -1:
                children += 1
                edge_stack.append((u, v))
                dfs(v, u)
                low[u] = min(low[u], low[v])
                if (parent == -1 and children >= 1) or (parent != -1 and low[v] >= disc[u]):
                    if parent != -1 and low[v] >= disc[u]:
                        cut.add(u)
                    comp: set[tuple[int, int]] = set()
                    while True:
                        x, y = edge_stack.pop()
                        comp.add((x, y) if x < y else (y, x))
                        if (x, y) == (u, v):
                            break
                    components.append(frozenset(comp))
            elif disc[v] < disc[u]:
                edge_stack.append((u, v))
                low[u] = min(low[u], disc[v])

    try:
        for root in range(n):
            if disc[root] == -1:
                dfs(root, -1)
                if sum(1 for comp in components if any(root in e for e in comp)) >= 2:
                    cut.add(root)
    finally:
        sys.setrecursionlimit(old_limit)

    comp_nodes = tuple(frozenset(x for e in comp for x in e) for comp in components)
    bridges = tuple(
        sorted(next(iter(comp)) for comp, nodes in zip(components, comp_nodes) if len(nodes) == 2)
    )
    return BiconnectivityDecomposition(
        tuple(components), comp_nodes, bridges, frozenset(cut)
    )


def hanging_tree(
    g: Graph,
    decomposition: BiconnectivityDecomposition,
    u: int,
    component: int | None = None,
) -> frozenset[int]:
    """S(u): the component of u once the rest of its biconnected component is cut away."""
    if component is None:
        hosts = decomposition.nontrivial_containing(u)
        if not hosts:
            raise NcgError(f"node {u} is in no nontrivial biconnected component")
        if len(hosts) > 1:
            raise NcgError(
                f"node {u} sits in {len(hosts)} nontrivial components; pass one explicitly"
            )
        component = hosts[0]
    nodes = decomposition.component_nodes[component]
    if u not in nodes:
        raise NcgError(f"node {u} is not in the designated component")
    allowed = (set(range(g.n)) - set(nodes)) | {u}
    seen = {u}
    frontier = [u]
    while frontier:
        nxt = []
        for x in frontier:
            for y in g.neighbors(x):
                if y in allowed and y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(seen)


def nonbridge_outdegree(
    g: OwnedGraph, decomposition: BiconnectivityDecomposition, v: int
) -> int:
    """Number of purchases of v whose edge lies inside a nontrivial component."""
    nontrivial_edges = decomposition.nontrivial_edges
    return sum(
        1
        for t in g.profile.purchases[v]
        if ((v, t) if v < t else (t, v)) in nontrivial_edges
    )


def component_diameter(
    g: Graph, decomposition: BiconnectivityDecomposition, component: int
) -> int:
    """Diameter of one biconnected component, measured inside its own edges."""
    nodes = sorted(decomposition.component_nodes[component])
    edges = decomposition.components[component]
    index = {x: i for i, x in enumerate(nodes)}
    sub = Graph(len(nodes), [(index[a], index[b]) for a, b in edges])
    return int(all_pairs_distances(sub).diameter)
