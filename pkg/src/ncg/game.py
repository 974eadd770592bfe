"""Core model of the sum classic network creation game.

Players ``0..n-1`` buy links at price ``alpha``; the communication graph
contains an edge ``uv`` whenever either endpoint paid for it.  A player's
cost is ``alpha * |links bought| + sum of hop distances to everyone else``
and all accounting is exact: ``alpha`` is a rational, distance sums are
integers, and disconnection is an explicit infinity sentinel that orders
above every rational.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterable, Iterator

from .errors import InvalidProfileError, LimitExceededError

INF = math.inf

#: Largest n for which ``optimal_social_cost(mode="exact")`` will enumerate
#: all 2^(n choose 2) edge subsets by default.
EXHAUSTIVE_OPT_LIMIT = 7


def exact(value) -> Fraction:
    """Coerce to an exact rational, rejecting floats outright."""
    if isinstance(value, float):
        raise ValueError(
            "costs are exact: pass an int, Fraction, or 'p/q' string, not a float"
        )
    return Fraction(value)


@dataclass(frozen=True)
class Game:
    """A game instance: player count and exact link price."""

    n: int
    alpha: Fraction

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one player")
        object.__setattr__(self, "alpha", exact(self.alpha))
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")

    def players(self) -> range:
        return range(self.n)


class StrategyProfile:
    """Immutable per-player purchase sets.

    Mutual purchases (u buys v while v buys u) are representable and merely
    flagged, never rejected: they are legal strategies, they just waste alpha,
    which is why they never survive equilibrium verification.
    """

    def __init__(self, n: int, purchases: Iterable[Iterable[int]]):
        sets = tuple(frozenset(p) for p in purchases)
        if len(sets) != n:
            raise InvalidProfileError(f"expected {n} purchase sets, got {len(sets)}")
        for u, s in enumerate(sets):
            for t in s:
                if not isinstance(t, int) or isinstance(t, bool) or not 0 <= t < n:
                    raise InvalidProfileError(f"player {u}: target {t!r} out of range")
                if t == u:
                    raise InvalidProfileError(f"player {u} buys a link to itself")
        self.n = n
        self.purchases = sets

    @classmethod
    def empty(cls, n: int) -> "StrategyProfile":
        return cls(n, [()] * n)

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "StrategyProfile":
        buys: list[set[int]] = [set() for _ in range(n)]
        for u, t in pairs:
            if not 0 <= u < n:
                raise InvalidProfileError(f"buyer {u} out of range")
            buys[u].add(t)
        return cls(n, buys)

    @cached_property
    def mutual_pairs(self) -> tuple[tuple[int, int], ...]:
        out = []
        for u in range(self.n):
            for t in self.purchases[u]:
                if t > u and u in self.purchases[t]:
                    out.append((u, t))
        return tuple(out)

    @property
    def has_mutual_purchase(self) -> bool:
        return bool(self.mutual_pairs)

    @property
    def total_purchases(self) -> int:
        return sum(len(s) for s in self.purchases)

    def canonical(self) -> tuple[tuple[int, int], ...]:
        """Sorted (buyer, target) list; the identity used for hashing and dedup."""
        return tuple(sorted((u, t) for u in range(self.n) for t in self.purchases[u]))

    def replace(self, u: int, strategy: Iterable[int]) -> "StrategyProfile":
        new = list(self.purchases)
        new[u] = frozenset(strategy)
        return StrategyProfile(self.n, new)

    def __eq__(self, other):
        return (
            isinstance(other, StrategyProfile)
            and self.n == other.n
            and self.purchases == other.purchases
        )

    def __hash__(self):
        return hash((self.n, self.purchases))

    def __repr__(self):
        return f"StrategyProfile(n={self.n}, purchases={self.canonical()})"


def _norm_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class Graph:
    """Undirected simple graph on nodes ``0..n-1``."""

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        self.n = n
        seen = set()
        for u, v in edges:
            if u == v or not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"bad edge ({u}, {v})")
            seen.add(_norm_edge(u, v))
        self.edges = frozenset(seen)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def _adj(self) -> tuple[tuple[int, ...], ...]:
        lists: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            lists[u].append(v)
            lists[v].append(u)
        return tuple(tuple(sorted(l)) for l in lists)

    @cached_property
    def adjacency_masks(self) -> tuple[int, ...]:
        masks = [0] * self.n
        for u, v in self.edges:
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        return tuple(masks)

    def neighbors(self, u: int) -> tuple[int, ...]:
        return self._adj[u]

    def degree(self, u: int) -> int:
        return len(self._adj[u])

    def has_edge(self, u: int, v: int) -> bool:
        return _norm_edge(u, v) in self.edges

    def without_edges(self, removed: Iterable[tuple[int, int]]) -> "Graph":
        gone = {_norm_edge(u, v) for u, v in removed}
        return Graph(self.n, self.edges - gone)

    def is_tree(self) -> bool:
        return self.m == self.n - 1 and all_pairs_distances(self).is_connected

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={sorted(self.edges)})"


class OwnedGraph(Graph):
    """The communication graph of a profile plus its purchase orientation.

    ``owners[edge]`` lists every endpoint that paid for the edge; a mutual
    purchase collapses to a single edge with two owners.
    """

    def __init__(self, profile: StrategyProfile):
        owners: dict[tuple[int, int], list[int]] = {}
        for u in range(profile.n):
            for t in profile.purchases[u]:
                owners.setdefault(_norm_edge(u, t), []).append(u)
        super().__init__(profile.n, owners.keys())
        self.owners = {e: tuple(sorted(o)) for e, o in owners.items()}
        self.profile = profile

    def owns(self, player: int, other: int) -> bool:
        return other in self.profile.purchases[player]


def build_graph(profile: StrategyProfile) -> OwnedGraph:
    """Communication graph of a profile: edge uv iff v in s_u or u in s_v."""
    return OwnedGraph(profile)


class DistanceTable:
    """All-pairs hop distances with INF marking disconnected pairs."""

    def __init__(self, rows: tuple[tuple[float, ...], ...]):
        self.dist = rows
        self.n = len(rows)

    def d(self, u: int, v: int):
        return self.dist[u][v]

    def row(self, u: int) -> tuple[float, ...]:
        return self.dist[u]

    @cached_property
    def eccentricity(self) -> tuple[float, ...]:
        return tuple(max(row) if row else 0 for row in self.dist)

    @property
    def diameter(self):
        return max(self.eccentricity) if self.n else 0

    @cached_property
    def is_connected(self) -> bool:
        return self.diameter != INF

    def dist_sum(self, u: int):
        """Sum of distances from u to everyone else; INF if anyone is unreachable."""
        row = self.dist[u]
        if INF in row:
            return INF
        return sum(row)

    @cached_property
    def total(self):
        """Sum of dist_sum over all nodes (each unordered pair counted twice)."""
        terms = [self.dist_sum(u) for u in range(self.n)]
        return INF if INF in terms else sum(terms)


def _bfs_row(adj, n: int, source: int) -> tuple[float, ...]:
    dist = [INF] * n
    dist[source] = 0
    queue = deque([source])
    while queue:
        x = queue.popleft()
        dx = dist[x] + 1
        for y in adj[x]:
            if dist[y] == INF:
                dist[y] = dx
                queue.append(y)
    return tuple(dist)


def all_pairs_distances(g: Graph) -> DistanceTable:
    """Exact hop distances via one BFS per node; O(n * (n + m))."""
    adj = [g.neighbors(u) for u in range(g.n)]
    return DistanceTable(tuple(_bfs_row(adj, g.n, s) for s in range(g.n)))


def player_cost(game: Game, profile: StrategyProfile, u: int, table: DistanceTable | None = None):
    """alpha * |s_u| plus the distance sum of u; INF when u cannot reach someone."""
    if not 0 <= u < game.n:
        raise InvalidProfileError(f"player {u} out of range")
    if table is None:
        table = all_pairs_distances(build_graph(profile))
    dsum = table.dist_sum(u)
    if dsum == INF:
        return INF
    return game.alpha * len(profile.purchases[u]) + dsum


def social_cost(game: Game, profile: StrategyProfile, table: DistanceTable | None = None):
    """Sum of player costs; equals alpha * total purchases + total distance."""
    if table is None:
        table = all_pairs_distances(build_graph(profile))
    total = table.total
    if total == INF:
        return INF
    return game.alpha * profile.total_purchases + total


def graph_social_cost(alpha: Fraction, g: Graph, table: DistanceTable | None = None):
    """Social cost of a bare graph with every edge bought exactly once."""
    if table is None:
        table = all_pairs_distances(g)
    total = table.total
    if total == INF:
        return INF
    return alpha * g.m + total


@lru_cache(maxsize=None)
def _min_total_distance_by_edges(n: int) -> tuple[float, ...]:
    """For each edge count m, the least total distance over connected graphs.

    Index m of the result is the minimum of ``sum_u D(u)`` over all connected
    labelled graphs on n nodes with exactly m edges (INF when none exists).
    Shared by every alpha: the optimum social cost is then a 1-D scan.
    """
    pairs = list(combinations(range(n), 2))
    npairs = len(pairs)
    best = [INF] * (npairs + 1)
    if n == 1:
        best[0] = 0
        return tuple(best)
    full = (1 << n) - 1
    min_edges = n - 1
    for mask in range(1 << npairs):
        m = mask.bit_count()
        if m < min_edges:
            continue
        adj = [0] * n
        bits = mask
        while bits:
            b = bits & -bits
            u, v = pairs[b.bit_length() - 1]
            adj[u] |= 1 << v
            adj[v] |= 1 << u
            bits ^= b
        total = 0
        connected = True
        for s in range(n):
            seen = 1 << s
            frontier = adj[s]
            seen |= frontier
            depth = 1
            acc = frontier.bit_count()
            while seen != full and frontier:
                nxt = 0
                f = frontier
                while f:
                    b = f & -f
                    nxt |= adj[b.bit_length() - 1]
                    f ^= b
                nxt &= ~seen
                depth += 1
                acc += depth * nxt.bit_count()
                seen |= nxt
                frontier = nxt
            if seen != full:
                connected = False
                break
            total += acc
        if connected and total < best[m]:
            best[m] = total
    return tuple(best)


def star_clique_bound(game: Game) -> Fraction:
    """min(star, clique) closed forms; an upper bound on the social optimum."""
    n, alpha = game.n, game.alpha
    star = alpha * (n - 1) + 2 * (n - 1) ** 2
    clique = alpha * (n * (n - 1) // 2) + n * (n - 1)
    return min(star, clique)


def optimal_social_cost(game: Game, mode: str = "exact", limit: int = EXHAUSTIVE_OPT_LIMIT):
    """Social optimum: exact by exhausting connected graphs, or the closed-form bound.

    Exact mode enumerates undirected graphs rather than profiles: social cost
    only depends on the edge set, with each edge costed once.
    """
    if mode == "star_clique_bound":
        return star_clique_bound(game)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    if game.n > limit:
        raise LimitExceededError(
            f"exact optimum limited to n <= {limit} "
            f"(2^{game.n * (game.n - 1) // 2} graphs); use mode='star_clique_bound'"
        )
    totals = _min_total_distance_by_edges(game.n)
    best = INF
    for m, total in enumerate(totals):
        if total == INF:
            continue
        cost = game.alpha * m + total
        if cost < best:
            best = cost
    return best


def price_ratio(
    game: Game,
    profile: StrategyProfile,
    mode: str = "auto",
    limit: int = EXHAUSTIVE_OPT_LIMIT,
):
    """C(s) divided by the social optimum, as an exact rational; INF if disconnected."""
    cost = social_cost(game, profile)
    if cost == INF:
        return INF
    if mode == "auto":
        mode = "exact" if game.n <= limit else "star_clique_bound"
    opt = optimal_social_cost(game, mode=mode, limit=limit)
    return cost / opt


def connected_graph_masks(n: int) -> Iterator[tuple[int, tuple[tuple[int, int], ...]]]:
    """Yield (mask, pairs) for every connected labelled graph on n nodes."""
    pairs = tuple(combinations(range(n), 2))
    full = (1 << n) - 1
    for mask in range(1 << len(pairs)):
        if n > 1 and mask.bit_count() < n - 1:
            continue
        adj = [0] * n
        bits = mask
        while bits:
            b = bits & -bits
            u, v = pairs[b.bit_length() - 1]
            adj[u] |= 1 << v
            adj[v] |= 1 << u
            bits ^= b
        seen = 1
        frontier = 1
        while frontier:
            nxt = 0
            f = frontier
            while f:
                b = f & -f
                nxt |= adj[b.bit_length() - 1]
                f ^= b
            frontier = nxt & ~seen
            seen |= frontier
        if seen == full:
            yield mask, pairs
