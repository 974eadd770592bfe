"""Core game model: profiles, graphs, distances, exact costs, social optimum."""

import math
from fractions import Fraction
from itertools import combinations

import pytest

from ncg import (
    Game,
    Graph,
    InvalidProfileError,
    LimitExceededError,
    StrategyProfile,
    all_pairs_distances,
    build_graph,
    optimal_social_cost,
    player_cost,
    price_ratio,
    social_cost,
    star_clique_bound,
)
from ncg.constructions import clique_profile, random_profile, star_profile

INF = math.inf


# --- independent oracle: exhaustive social optimum over edge subsets -------


def _bfs_dists(n, adj, s):
    dist = {s: 0}
    frontier = [s]
    while frontier:
        nxt = []
        for x in frontier:
            for y in adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    nxt.append(y)
        frontier = nxt
    return dist


def brute_force_opt(n, alpha):
    """Minimum social cost over all connected graphs, written independently."""
    best = None
    pairs = list(combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        adj = {u: [] for u in range(n)}
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        total = 0
        ok = True
        for s in range(n):
            dist = _bfs_dists(n, adj, s)
            if len(dist) != n:
                ok = False
                break
            total += sum(dist.values())
        if not ok:
            continue
        cost = Fraction(alpha) * len(edges) + total
        if best is None or cost < best:
            best = cost
    return best


def test_opt_oracle_frozen_values():
    # oracle first: these are the values the exhaustive scan produces
    assert brute_force_opt(4, 1) == 18  # clique
    assert brute_force_opt(4, 5) == 33  # star
    assert brute_force_opt(4, 2) == 24  # star, clique, and C_4 tie


@pytest.mark.parametrize("alpha", [Fraction(1, 3), 1, 2, 3, Fraction(7, 2), 10])
@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_opt_matches_oracle(n, alpha):
    assert optimal_social_cost(Game(n, alpha)) == brute_force_opt(n, alpha)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7])
@pytest.mark.parametrize("alpha", [Fraction(1, 2), 1, 2, 4, 19])
def test_star_clique_bound_equals_exact_opt(n, alpha):
    # the closed form is exact here, not just an upper bound
    game = Game(n, alpha)
    assert star_clique_bound(game) == optimal_social_cost(game)


def test_opt_limit_error_names_bound_mode():
    with pytest.raises(LimitExceededError, match="star_clique_bound"):
        optimal_social_cost(Game(8, 1))
    assert optimal_social_cost(Game(8, 1), mode="star_clique_bound") == 84


# --- profiles and graphs ----------------------------------------------------


def test_build_graph_star():
    p = StrategyProfile(4, [(), {0}, {0}, {0}])
    g = build_graph(p)
    assert g.m == 3
    assert g.degree(0) == 3
    for leaf in (1, 2, 3):
        assert g.owners[(0, leaf)] == (leaf,)


def test_build_graph_mutual_purchase_collapses():
    p = StrategyProfile(3, [{1}, {0}, ()])
    g = build_graph(p)
    assert g.m == 1
    assert g.owners[(0, 1)] == (0, 1)
    assert p.has_mutual_purchase
    assert p.mutual_pairs == ((0, 1),)


def test_build_graph_empty_profile():
    g = build_graph(StrategyProfile.empty(2))
    assert g.m == 0
    assert not all_pairs_distances(g).is_connected


def test_self_purchase_rejected():
    with pytest.raises(InvalidProfileError):
        StrategyProfile(3, [{0}, (), ()])
    with pytest.raises(InvalidProfileError):
        StrategyProfile(3, [{5}, (), ()])


def test_distance_table_path_and_clique():
    path = Graph(4, [(0, 1), (1, 2), (2, 3)])
    t = all_pairs_distances(path)
    assert t.d(0, 3) == 3
    assert t.diameter == 3
    clique = Graph(4, [(u, v) for u, v in combinations(range(4), 2)])
    tc = all_pairs_distances(clique)
    assert all(tc.d(u, v) == 1 for u in range(4) for v in range(4) if u != v)
    two = Graph(4, [(0, 1), (2, 3)])
    tt = all_pairs_distances(two)
    assert tt.d(0, 2) == INF
    assert not tt.is_connected


def test_player_cost_star():
    game = Game(4, 2)
    p = star_profile(4)
    assert player_cost(game, p, 1) == 7
    assert player_cost(game, p, 0) == 3
    assert social_cost(game, p) == 24


def test_player_cost_disconnected_is_infinite():
    game = Game(3, 1)
    p = StrategyProfile(3, [{1}, (), ()])
    assert player_cost(game, p, 2) == INF
    assert player_cost(game, p, 0) == INF  # node 2 unreachable from 0 too
    assert social_cost(game, p) == INF


def test_social_cost_k3():
    game = Game(3, 1)
    p = clique_profile(3)
    assert social_cost(game, p) == 9


def test_social_cost_two_accountings_agree():
    for seed in range(40):
        p = random_profile(6, 0.5, seed)
        game = Game(6, Fraction(3, 2))
        table = all_pairs_distances(build_graph(p))
        direct = sum(player_cost(game, p, u, table=table) for u in range(6))
        split = (
            INF
            if table.total == INF
            else game.alpha * p.total_purchases + table.total
        )
        assert social_cost(game, p) == direct == split


def test_price_ratio():
    game = Game(4, 2)
    assert price_ratio(game, star_profile(4)) == 1
    assert price_ratio(game, StrategyProfile.empty(4)) == INF


def test_alpha_must_be_exact():
    with pytest.raises(ValueError):
        Game(3, 0.5)
    assert Game(3, Fraction(1, 2)).alpha == Fraction(1, 2)


def test_canonical_and_replace():
    p = StrategyProfile(3, [{1, 2}, (), {1}])
    assert p.canonical() == ((0, 1), (0, 2), (2, 1))
    q = p.replace(0, {2})
    assert q.canonical() == ((0, 2), (2, 1))
    assert p.canonical() == ((0, 1), (0, 2), (2, 1))  # original untouched
