"""Generators for canonical and random strategy profiles.

Every generator is deterministic given its parameters and seed.  Exhaustive
enumeration is over labelled objects only, so the closed-form counts stay
checkable: the all-profiles family walks every edge subset and, inside it,
every single-owner orientation (3 states per node pair, mutual purchases
excluded); the tree family walks Pruefer sequences times edge orientations.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterator

from .errors import LimitExceededError, NcgError, RejectionLimitError
from .game import Graph, StrategyProfile, build_graph
from .structure import biconnectivity

ALL_FAMILY_LIMIT = 5
TREES_FAMILY_LIMIT = 8

CONSTRUCTION_KINDS = (
    "star",
    "clique",
    "path",
    "cycle",
    "tree_from_pruefer",
    "clique_of_stars",
    "random",
)


@dataclass(frozen=True)
class ConstructionSpec:
    """Declarative recipe: same spec and seed always yield the same profile."""

    kind: str
    params: dict = field(default_factory=dict)
    orientation: str | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in CONSTRUCTION_KINDS:
            raise NcgError(f"unknown construction kind {self.kind!r}")


def make(spec: ConstructionSpec) -> StrategyProfile:
    p = dict(spec.params)
    if spec.kind == "star":
        return star_profile(int(p["n"]), spec.orientation or "leaves_buy")
    if spec.kind == "clique":
        return clique_profile(int(p["n"]))
    if spec.kind == "path":
        return path_profile(int(p["n"]), spec.orientation or "forward")
    if spec.kind == "cycle":
        return cycle_profile(int(p["n"]))
    if spec.kind == "tree_from_pruefer":
        seq = p["seq"]
        if isinstance(seq, str):
            seq = [int(x) for x in seq.split(":") if x != ""]
        return tree_from_pruefer(seq, spec.orientation or "child_buys", seed=spec.seed)
    if spec.kind == "clique_of_stars":
        return clique_of_stars(int(p["k"]), int(p["l"]), spec.orientation or "designated")
    if spec.kind == "random":
        prob = p.get("edge_prob", "1/2")
        from fractions import Fraction

        return random_profile(int(p["n"]), float(Fraction(str(prob))), spec.seed or 0)
    raise NcgError(f"unknown construction kind {spec.kind!r}")


def star_profile(n: int, orientation: str = "leaves_buy") -> StrategyProfile:
    """Star with center 0; either every leaf buys its link or the center buys all."""
    if n < 1:
        raise NcgError("star needs n >= 1")
    if orientation == "leaves_buy":
        return StrategyProfile.from_pairs(n, [(i, 0) for i in range(1, n)])
    if orientation == "center_buys":
        return StrategyProfile.from_pairs(n, [(0, i) for i in range(1, n)])
    raise NcgError(f"unknown star orientation {orientation!r}")


def clique_profile(n: int) -> StrategyProfile:
    """Complete graph, each edge bought once by its lower-indexed endpoint."""
    return StrategyProfile.from_pairs(n, [(u, v) for u, v in combinations(range(n), 2)])


def path_profile(n: int, orientation: str = "forward") -> StrategyProfile:
    if orientation == "forward":
        return StrategyProfile.from_pairs(n, [(i, i + 1) for i in range(n - 1)])
    if orientation == "backward":
        return StrategyProfile.from_pairs(n, [(i + 1, i) for i in range(n - 1)])
    raise NcgError(f"unknown path orientation {orientation!r}")


def cycle_profile(n: int) -> StrategyProfile:
    """Oriented cycle: every node buys the edge to its successor."""
    if n < 3:
        raise NcgError("cycle needs n >= 3")
    return StrategyProfile.from_pairs(n, [(i, (i + 1) % n) for i in range(n)])


def pruefer_decode(seq) -> list[tuple[int, int]]:
    """Edges of the labelled tree on len(seq) + 2 nodes encoded by the sequence."""
    seq = list(seq)
    n = len(seq) + 2
    if any(not 0 <= x < n for x in seq):
        raise NcgError("Pruefer entries must be node labels")
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u, v = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((u, v))
    return edges


def tree_from_pruefer(
    seq, orientation: str = "child_buys", seed: int | None = None
) -> StrategyProfile:
    """Tree profile from a Pruefer sequence, rooted at node 0 for orientation."""
    edges = pruefer_decode(seq)
    n = len(edges) + 1
    if orientation == "random":
        rng = random.Random(seed or 0)
        pairs = [(u, v) if rng.random() < 0.5 else (v, u) for u, v in edges]
        return StrategyProfile.from_pairs(n, pairs)
    parent = _root_tree(n, edges, root=0)
    if orientation == "child_buys":
        pairs = [(child, parent[child]) for child in range(n) if parent[child] != -1]
    elif orientation == "parent_buys":
        pairs = [(parent[child], child) for child in range(n) if parent[child] != -1]
    else:
        raise NcgError(f"unknown tree orientation {orientation!r}")
    return StrategyProfile.from_pairs(n, pairs)


def _root_tree(n: int, edges, root: int) -> list[int]:
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    parent = [-1] * n
    seen = {root}
    frontier = [root]
    while frontier:
        nxt = []
        for x in frontier:
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    parent[y] = x
                    nxt.append(y)
        frontier = nxt
    return parent


def clique_of_stars(k: int, l: int, orientation: str = "designated") -> StrategyProfile:
    """k star centers joined in a clique, each center with l-1 leaves (n = k*l).

    Centers are nodes 0..k-1; the leaves of center c are the next l-1 labels.
    Each center buys its own leaf links.  Clique-edge ownership comes in two
    flavours: "designated" has center 0 buy every clique link incident to it
    with the remaining clique edges bought by their lower-indexed endpoint
    (for center 0 the two rules agree, so this equals the all-lower-index
    orientation, accepted under the alias "lower_index"); "balanced" spreads
    the clique edges round-robin so every center buys about the same number.
    """
    if k < 2 or l < 1:
        raise NcgError("clique of stars needs k >= 2 and l >= 1")
    n = k * l
    pairs: list[tuple[int, int]] = []
    for c in range(k):
        for j in range(l - 1):
            leaf = k + c * (l - 1) + j
            pairs.append((c, leaf))
    if orientation in ("designated", "lower_index"):
        pairs.extend((i, j) for i, j in combinations(range(k), 2))
    elif orientation == "balanced":
        for step in range(1, k // 2 + 1):
            for i in range(k):
                j = (i + step) % k
                if step * 2 == k and i >= j:
                    continue  # opposite pairs would otherwise be bought twice
                pairs.append((i, j))
    else:
        raise NcgError(f"unknown clique-of-stars orientation {orientation!r}")
    return StrategyProfile.from_pairs(n, pairs)


def random_profile(n: int, edge_prob: float, seed: int) -> StrategyProfile:
    """Each unordered pair present independently; the owner is a fair coin flip."""
    if not 0 <= edge_prob <= 1:
        raise NcgError("edge probability must be in [0, 1]")
    rng = random.Random(seed)
    pairs = []
    for u, v in combinations(range(n), 2):
        if rng.random() < edge_prob:
            pairs.append((u, v) if rng.random() < 0.5 else (v, u))
    return StrategyProfile.from_pairs(n, pairs)


def random_biconnected(
    n: int,
    seed: int,
    edge_prob: float | None = None,
    min_core: int | None = None,
    max_tries: int = 2000,
) -> StrategyProfile:
    """Random profile whose graph has a nontrivial biconnected core.

    Rejection-samples until some nontrivial biconnected component holds at
    least half the nodes (or ``min_core`` of them).  Deterministic per seed.
    """
    if n < 3:
        raise NcgError("need n >= 3 for a nontrivial biconnected component")
    if edge_prob is None:
        edge_prob = min(0.85, 2.6 / n + 0.12)
    if min_core is None:
        min_core = (n + 1) // 2
    rng = random.Random(seed)
    for _ in range(max_tries):
        pairs = []
        for u, v in combinations(range(n), 2):
            if rng.random() < edge_prob:
                pairs.append((u, v) if rng.random() < 0.5 else (v, u))
        profile = StrategyProfile.from_pairs(n, pairs)
        decomp = biconnectivity(build_graph(profile))
        if any(
            len(decomp.component_nodes[i]) >= min_core for i in decomp.nontrivial
        ):
            return profile
    raise RejectionLimitError(
        f"no biconnected core of size >= {min_core} within {max_tries} samples"
    )


# ---------------------------------------------------------------------------
# exhaustive enumeration


def enumerate_profiles(
    n: int,
    family: str,
    all_limit: int = ALL_FAMILY_LIMIT,
    trees_limit: int = TREES_FAMILY_LIMIT,
) -> Iterator[StrategyProfile]:
    """Exhaustive, duplicate-free profile stream in a deterministic order.

    Families: "all" walks the 3^(n choose 2) single-owner pair states
    (grouped by edge set, orientations inner); "graphs_with_orientations"
    is the same restricted to connected graphs; "trees" walks the n^(n-2)
    Pruefer trees times the 2^(n-1) edge orientations.
    """
    for edges in enumerate_edge_groups(n, family, all_limit=all_limit, trees_limit=trees_limit):
        for orientation in range(1 << len(edges)):
            yield StrategyProfile.from_pairs(n, orientation_pairs(edges, orientation))


def enumerate_edge_groups(
    n: int,
    family: str,
    all_limit: int = ALL_FAMILY_LIMIT,
    trees_limit: int = TREES_FAMILY_LIMIT,
) -> Iterator[tuple[tuple[int, int], ...]]:
    """Edge sets underlying ``enumerate_profiles``, one per graph, same order.

    Each yielded edge tuple stands for its 2^m single-owner orientations;
    ``orientation_pairs`` maps an orientation index back to purchase pairs.
    """
    if family in ("all", "graphs_with_orientations"):
        if n > all_limit:
            raise LimitExceededError(
                f"family {family!r} walks 3^(n choose 2) profiles; limited to n <= {all_limit}"
            )
        pairs = list(combinations(range(n), 2))
        if n == 1:
            yield ()
            return
        for mask in range(1 << len(pairs)):
            present = tuple(pairs[i] for i in range(len(pairs)) if mask >> i & 1)
            if family == "graphs_with_orientations" and not _mask_connected(n, present):
                continue
            yield present
    elif family == "trees":
        if n > trees_limit:
            raise LimitExceededError(f"tree family limited to n <= {trees_limit}")
        if n == 1:
            yield ()
            return
        for seq in product(range(n), repeat=n - 2):
            yield tuple(pruefer_decode(seq))
    else:
        raise NcgError(f"unknown enumeration family {family!r}")


def orientation_pairs(
    edges: tuple[tuple[int, int], ...], orientation: int
) -> list[tuple[int, int]]:
    """Purchase pairs of one orientation index: bit i flips who buys edges[i]."""
    return [
        (u, v) if orientation >> i & 1 == 0 else (v, u)
        for i, (u, v) in enumerate(edges)
    ]


def _mask_connected(n: int, edges) -> bool:
    if len(edges) < n - 1:
        return False
    adj = [0] * n
    for u, v in edges:
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    seen, frontier = 1, 1
    while frontier:
        nxt = 0
        f = frontier
        while f:
            b = f & -f
            nxt |= adj[b.bit_length() - 1]
            f ^= b
        frontier = nxt & ~seen
        seen |= frontier
    return seen == (1 << n) - 1


def enumerate_graphs(n: int, connected_only: bool = True) -> Iterator[Graph]:
    """Every labelled (connected) graph on n nodes, in mask order."""
    pairs = list(combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        present = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        if connected_only and n > 1 and not _mask_connected(n, present):
            continue
        yield Graph(n, present)
