"""Hinterland (A) sets, crossing graphs, detour bounds, independence bounds.

For a node v owning edges to v_1..v_k, the A set with respect to a
reference node u holds every node z all of whose shortest paths to u run
through v and enter v over one of those owned edges.  Membership is decided
on the shortest-path structure, not by path enumeration: all paths of z
pass through v iff d(z,v) + d(v,u) = d(z,u) and the shortest-path counts
multiply out, and the feasible entry points into v are exactly the
neighbors p of v with d(z,p) = d(z,v) - 1.

The crossing graph Z has one vertex per owned edge and connects two when
some graph edge joins their A subsets; the maximum component diameter of a
selected sub-family drives the detour term of the sell-and-buy bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .deviations import Deviation, DeviationDelta
from .errors import InvalidDeviationError, LimitExceededError, NcgError
from .game import (
    INF,
    DistanceTable,
    Game,
    Graph,
    OwnedGraph,
    all_pairs_distances,
)
from .structure import BiconnectivityDecomposition, component_diameter


@dataclass(frozen=True)
class ASetFamily:
    """A set, per-edge A subsets, and their crossing graph for one (v, edges, u)."""

    v: int
    u: int
    owned_targets: tuple[int, ...]
    a_set: frozenset[int]
    a_subsets: tuple[frozenset[int], ...]
    crossing_graph: Graph

    @property
    def k(self) -> int:
        return len(self.owned_targets)

    def subset_index(self, target: int) -> int:
        return self.owned_targets.index(target)


def _path_counts(g: Graph, table: DistanceTable, source: int) -> list[int]:
    """Number of shortest paths between source and every node (0 if unreachable)."""
    row = table.row(source)
    order = sorted((z for z in range(g.n) if row[z] != INF), key=lambda z: row[z])
    counts = [0] * g.n
    counts[source] = 1
    for z in order:
        if z == source:
            continue
        dz = row[z]
        counts[z] = sum(counts[w] for w in g.neighbors(z) if row[w] == dz - 1)
    return counts


def a_set_family(
    g: OwnedGraph,
    v: int,
    owned_targets,
    u: int,
    table: DistanceTable | None = None,
) -> ASetFamily:
    """Build the A set of (v, its owned edges to v_1..v_k) with respect to u."""
    owned = tuple(owned_targets)
    for t in owned:
        if t not in g.profile.purchases[v]:
            raise InvalidDeviationError(f"node {v} does not own an edge to {t}")
    if u == v:
        raise NcgError("reference node must differ from v")
    if table is None:
        table = all_pairs_distances(g)
    to_u = _path_counts(g, table, u)
    to_v = _path_counts(g, table, v)
    row_u, row_v = table.row(u), table.row(v)
    owned_set = set(owned)
    neighbors_v = g.neighbors(v)

    members: list[int] = []
    for z in range(g.n):
        if z == v or row_u[z] == INF:
            continue
        if row_v[z] + row_v[u] != row_u[z]:
            continue
        if to_v[z] * to_u[v] != to_u[z]:
            continue
        preds = {p for p in neighbors_v if table.d(z, p) == row_v[z] - 1}
        if preds <= owned_set:
            members.append(z)

    a_set = frozenset(members)
    a_subsets = tuple(
        frozenset(z for z in a_set if table.d(z, t) == row_v[z] - 1) for t in owned
    )
    edges = []
    for i in range(len(owned)):
        for j in range(i + 1, len(owned)):
            if crossings(g, a_subsets[i], a_subsets[j]):
                edges.append((i, j))
    return ASetFamily(v, u, owned, a_set, a_subsets, Graph(len(owned), edges))


def crossings(g: Graph, xs, ys) -> frozenset[tuple[int, int]]:
    """Edges of g with one endpoint in xs and the other in ys."""
    xs, ys = frozenset(xs), frozenset(ys)
    out = set()
    for a, b in g.edges:
        if (a in xs and b in ys) or (b in xs and a in ys):
            out.add((a, b))
    return frozenset(out)


def max_component_diameter(z: Graph, vertices=None) -> int:
    """Max diameter over connected components of z restricted to the given vertices.

    Isolated vertices contribute zero; an empty selection is zero.
    """
    if vertices is None:
        vertices = range(z.n)
    keep = sorted(set(vertices))
    if not keep:
        return 0
    index = {x: i for i, x in enumerate(keep)}
    sub = Graph(
        len(keep),
        [
            (index[a], index[b])
            for a, b in z.edges
            if a in index and b in index
        ],
    )
    table = all_pairs_distances(sub)
    best = 0
    for x in range(sub.n):
        for dist in table.row(x):
            if dist != INF and dist > best:
                best = int(dist)
    return best


def family_m_value(family: ASetFamily, sold_targets) -> int:
    """M of a sub-family: max crossing-component diameter over the sold edges."""
    indices = [family.subset_index(t) for t in sold_targets]
    return max_component_diameter(family.crossing_graph, indices)


def check_crossing_remark(
    g: OwnedGraph,
    decomposition: BiconnectivityDecomposition,
    family: ASetFamily,
) -> bool:
    """True iff every edge leaving any A subset has both endpoints inside V(H)."""
    hosts = decomposition.nontrivial_containing(family.v)
    if not hosts:
        raise NcgError("v must lie in a nontrivial biconnected component")
    h_nodes = set()
    for i in hosts:
        h_nodes |= decomposition.component_nodes[i]
    for subset in family.a_subsets:
        if not subset:
            continue
        for a, b in g.edges:
            inside_a, inside_b = a in subset, b in subset
            if inside_a == inside_b:
                continue
            if a not in h_nodes or b not in h_nodes:
                return False
    return True


def prop2_bound(
    game: Game,
    g: OwnedGraph,
    decomposition: BiconnectivityDecomposition,
    family: ASetFamily,
    sold_targets,
    table: DistanceTable | None = None,
) -> DeviationDelta:
    """Closed-form upper bound on selling some owned edges of v and buying a link to u.

    Evaluates ``-(l-1)*alpha + n + D(u) - D(v) + 2*d_H*|A|*(1 + M)`` exactly,
    with d_H the diameter of the biconnected component holding u and v, and
    M the max crossing-component diameter over the sold sub-family.
    """
    sold = tuple(sold_targets)
    for t in sold:
        if t not in family.owned_targets:
            raise InvalidDeviationError(f"{t} is not part of this family's owned edges")
    host = None
    for i in decomposition.nontrivial:
        nodes = decomposition.component_nodes[i]
        if family.u in nodes and family.v in nodes:
            host = i
            break
    if host is None:
        raise NcgError("u and v must share a nontrivial biconnected component")
    if table is None:
        table = all_pairs_distances(g)
    d_h = component_diameter(g, decomposition, host)
    l = len(sold)
    m_term = family_m_value(family, sold)
    bound = (
        -(l - 1) * game.alpha
        + game.n
        + (table.dist_sum(family.u) - table.dist_sum(family.v))
        + 2 * d_h * len(family.a_set) * (1 + m_term)
    )
    dev = Deviation(family.v, frozenset(sold), frozenset({family.u}))
    return DeviationDelta(dev, bound, "upper_bound", "prop2")


def wei_bound(z: Graph) -> Fraction:
    """Sum of 1/(1 + deg) over the vertices; a lower bound on the independence number."""
    return sum(
        (Fraction(1, 1 + z.degree(v)) for v in range(z.n)), start=Fraction(0)
    )


def independence_number(z: Graph, limit: int = 20) -> int:
    """Exact maximum independent set size by branch and bound."""
    if z.n > limit:
        raise LimitExceededError(f"independence number is exhaustive, n <= {limit}")
    masks = z.adjacency_masks

    def grow(avail: int) -> int:
        if avail == 0:
            return 0
        # branch on the available vertex with the most available neighbors
        best_v, best_deg = -1, -1
        bits = avail
        while bits:
            b = bits & -bits
            v = b.bit_length() - 1
            deg = (masks[v] & avail).bit_count()
            if deg > best_deg:
                best_v, best_deg = v, deg
            bits ^= b
        if best_deg == 0:
            return avail.bit_count()
        without = grow(avail & ~(1 << best_v))
        with_v = 1 + grow(avail & ~(1 << best_v) & ~masks[best_v])
        return max(without, with_v)

    return grow((1 << z.n) - 1)


def removal_distance_increase(
    g: OwnedGraph,
    decomposition: BiconnectivityDecomposition,
    v: int,
    component: int | None = None,
    table: DistanceTable | None = None,
) -> int:
    """Max distance increase among pairs != v after deleting v's purchases inside H.

    Pairs separated by the removal are skipped; removing nothing returns 0.
    """
    if component is None:
        hosts = decomposition.nontrivial_containing(v)
        if not hosts:
            raise NcgError(f"node {v} is in no nontrivial biconnected component")
        component = hosts[0]
    comp_edges = decomposition.components[component]
    removed = [
        (v, t)
        for t in g.profile.purchases[v]
        if ((v, t) if v < t else (t, v)) in comp_edges
    ]
    if not removed:
        return 0
    if table is None:
        table = all_pairs_distances(g)
    stripped = g.without_edges(removed)
    new_table = all_pairs_distances(stripped)
    worst = 0
    for z1 in range(g.n):
        if z1 == v:
            continue
        row_old, row_new = table.row(z1), new_table.row(z1)
        for z2 in range(z1 + 1, g.n):
            if z2 == v or row_old[z2] == INF or row_new[z2] == INF:
                continue
            inc = row_new[z2] - row_old[z2]
            if inc > worst:
                worst = int(inc)
    return worst
