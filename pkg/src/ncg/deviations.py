"""Deviation deltas, exact best response, equilibrium verification, dynamics.

Exact deltas are always recomputed from scratch on the deviated graph.
Best response enumerates all 2^(n-1) purchase subsets of a player in
lexicographic order (by sorted target tuple) with a sound branch-and-bound
prune: any extension of a k-subset costs at least ``alpha*(k+1) + (n-1)``.
The first optimum met in lexicographic order is therefore the
lexicographically smallest one, which keeps dynamics deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

from .errors import InvalidDeviationError, LimitExceededError
from .formats import rational_to_json
from .game import INF, Game, StrategyProfile, build_graph, player_cost

#: Largest n for exhaustive per-player subset scans (best response, exact
#: and buying verification).
BEST_RESPONSE_LIMIT = 14

DEVIATION_CLASSES = (
    "exact",
    "buying",
    "add_one",
    "drop_one",
    "swap_one",
    "drop_all_buy_one",
    "paper_multi",
)

#: Classes whose "equilibrium" verdict covers the full deviation space.
COMPLETE_CLASSES = ("exact",)


@dataclass(frozen=True)
class Deviation:
    """One player's strategy change: sell owned edges, buy new targets."""

    player: int
    sell: frozenset[int]
    buy: frozenset[int]

    def sell_pairs(self) -> list[tuple[int, int]]:
        return [(self.player, t) for t in sorted(self.sell)]


@dataclass(frozen=True)
class DeviationDelta:
    deviation: Deviation
    delta: object  # exact Fraction/int, or +-INF
    kind: str  # "exact" | "upper_bound"
    derivation: str


@dataclass(frozen=True)
class EquilibriumReport:
    deviation_class: str
    verdict: str  # "equilibrium" | "violated"
    witness: DeviationDelta | None
    complete: bool  # False for restricted classes: necessary condition only

    @property
    def is_equilibrium(self) -> bool:
        return self.verdict == "equilibrium"

    def to_json_dict(self) -> dict:
        out = {
            "class": self.deviation_class,
            "verdict": self.verdict,
            "restricted": not self.complete,
            "witness": None,
        }
        if self.witness is not None:
            dev = self.witness.deviation
            out["witness"] = {
                "player": dev.player,
                "sell": [[u, v] for u, v in dev.sell_pairs()],
                "buy": sorted(dev.buy),
                "delta": rational_to_json(self.witness.delta),
            }
        return out


# ---------------------------------------------------------------------------
# bitmask BFS machinery


def _others_masks(profile: StrategyProfile, u: int) -> list[int]:
    """Adjacency masks of the graph formed by every purchase except u's own."""
    masks = [0] * profile.n
    for w in range(profile.n):
        if w == u:
            continue
        for t in profile.purchases[w]:
            masks[w] |= 1 << t
            masks[t] |= 1 << w
    return masks


def _dist_sum(masks: list[int], n: int, source: int, source_adj: int):
    """Distance sum from source, with the source row overridden; None if disconnected."""
    full = (1 << n) - 1
    seen = (1 << source) | source_adj
    frontier = source_adj & ~(1 << source)
    total = frontier.bit_count()
    depth = 1
    while frontier and seen != full:
        nxt = 0
        f = frontier
        while f:
            b = f & -f
            nxt |= masks[b.bit_length() - 1]
            f ^= b
        nxt &= ~seen
        depth += 1
        total += depth * nxt.bit_count()
        seen |= nxt
        frontier = nxt
    return total if seen == full else None


def _strategy_mask(strategy) -> int:
    mask = 0
    for t in strategy:
        mask |= 1 << t
    return mask


def _player_state(profile: StrategyProfile, u: int):
    """(masks, incoming, current strategy mask) for fast per-player evaluation."""
    masks = _others_masks(profile, u)
    incoming = masks[u]
    return masks, incoming, _strategy_mask(profile.purchases[u])


def _cost(game: Game, masks, incoming: int, u: int, strategy_mask: int, size: int):
    dsum = _dist_sum(masks, game.n, u, incoming | strategy_mask)
    if dsum is None:
        return INF
    return game.alpha * size + dsum


# ---------------------------------------------------------------------------
# exact deltas


def check_deviation(profile: StrategyProfile, dev: Deviation) -> None:
    """Raise InvalidDeviationError unless dev is well formed for this profile."""
    n = profile.n
    if not 0 <= dev.player < n:
        raise InvalidDeviationError(f"player {dev.player} out of range")
    owned = profile.purchases[dev.player]
    for t in dev.sell:
        if t not in owned:
            raise InvalidDeviationError(
                f"player {dev.player} sells edge to {t} it does not own"
            )
    for t in dev.buy:
        if not 0 <= t < n or t == dev.player:
            raise InvalidDeviationError(f"bad buy target {t}")
        if t in owned and t not in dev.sell:
            raise InvalidDeviationError(
                f"player {dev.player} already pays for the link to {t}"
            )


def apply_deviation(profile: StrategyProfile, dev: Deviation) -> StrategyProfile:
    check_deviation(profile, dev)
    new = (profile.purchases[dev.player] - dev.sell) | dev.buy
    return profile.replace(dev.player, new)


def exact_delta(game: Game, profile: StrategyProfile, dev: Deviation) -> DeviationDelta:
    """Cost change of the deviation, recomputed from scratch on the deviated graph."""
    check_deviation(profile, dev)
    u = dev.player
    masks, incoming, cur_mask = _player_state(profile, u)
    new_strategy = (profile.purchases[u] - dev.sell) | dev.buy
    old_d = _dist_sum(masks, game.n, u, incoming | cur_mask)
    new_d = _dist_sum(masks, game.n, u, incoming | _strategy_mask(new_strategy))
    if new_d is None:
        delta = INF
    elif old_d is None:
        delta = -INF
    else:
        delta = game.alpha * (len(new_strategy) - len(profile.purchases[u])) + (new_d - old_d)
    return DeviationDelta(dev, delta, "exact", "recomputed")


def sell_buy_delta(
    game: Game, profile: StrategyProfile, v: int, sold_targets, u: int
) -> DeviationDelta:
    """Exact delta of selling the given owned edges of v and buying a link to u.

    Degenerates to a pure buy when nothing is sold; rebuying a just-sold
    neighbor is the identity deviation with delta zero.
    """
    if u == v:
        raise InvalidDeviationError("buy target equals the deviating player")
    return exact_delta(game, profile, Deviation(v, frozenset(sold_targets), frozenset({u})))


# ---------------------------------------------------------------------------
# closed-form buying bounds


def buy_delta_bound(game: Game, profile: StrategyProfile, u: int, v: int):
    """Both closed-form upper bounds on the delta of u buying a link to v.

    The first compares distance sums; the second charges the hinterland of v
    (every node all of whose shortest paths to u run through v, plus v
    itself, improves by at least d(u,v) - 1).  Returns a pair of
    upper_bound deltas.
    """
    from .asets import a_set_family  # local import to avoid a cycle
    from .game import all_pairs_distances

    if u == v:
        raise InvalidDeviationError("cannot buy a self-link")
    g = build_graph(profile)
    table = all_pairs_distances(g)
    dev = Deviation(u, frozenset(), frozenset({v}))
    du, dv = table.dist_sum(u), table.dist_sum(v)
    if du == INF or dv == INF:
        simple = INF
    else:
        simple = game.alpha + game.n + dv - du
    family = a_set_family(g, v, sorted(profile.purchases[v]), u, table=table)
    duv = table.d(u, v)
    if duv == INF:
        hinterland = -INF
    else:
        hinterland = game.alpha - (duv - 1) * (len(family.a_set) + 1)
    return (
        DeviationDelta(dev, simple, "upper_bound", "buy_distance_sums"),
        DeviationDelta(dev, hinterland, "upper_bound", "buy_hinterland"),
    )


# ---------------------------------------------------------------------------
# best response


def _scan_subsets(
    game: Game,
    profile: StrategyProfile,
    u: int,
    stop_below,
    first_only: bool,
):
    """Lexicographic subset scan with branch-and-bound.

    When first_only is set, returns the first strategy whose cost is strictly
    below stop_below, else None.  Otherwise returns (best_strategy, best_cost)
    over the whole space, preferring the lexicographically smallest optimum.
    """
    n = game.n
    alpha = game.alpha
    masks, incoming, _ = _player_state(profile, u)
    targets = [t for t in range(n) if t != u]
    alpha_k = [alpha * k for k in range(n + 1)]
    floor_d = n - 1

    best_cost = stop_below
    best_set: tuple[int, ...] | None = None
    found = None

    def visit(start: int, chosen_mask: int, chosen: list[int]):
        nonlocal best_cost, best_set, found
        dsum = _dist_sum(masks, n, u, incoming | chosen_mask)
        if dsum is not None:
            cost = alpha_k[len(chosen)] + dsum
            if best_cost == INF or cost < best_cost:
                best_cost = cost
                best_set = tuple(chosen)
                if first_only:
                    found = (frozenset(chosen), cost)
                    return True
        k = len(chosen)
        for i in range(start, len(targets)):
            bound = alpha_k[k + 1] + floor_d
            if best_cost != INF and (bound > best_cost or (first_only and bound >= best_cost)):
                break
            t = targets[i]
            chosen.append(t)
            stop = visit(i + 1, chosen_mask | (1 << t), chosen)
            chosen.pop()
            if stop:
                return True
        return False

    visit(0, 0, [])
    if first_only:
        return found
    return frozenset(best_set), best_cost


def best_response(
    game: Game, profile: StrategyProfile, u: int, limit: int = BEST_RESPONSE_LIMIT
):
    """The cost-minimizing strategy of u against everyone else's purchases.

    Ties break to the lexicographically smallest optimal subset.
    """
    if game.n > limit:
        raise LimitExceededError(
            f"best response is exhaustive and limited to n <= {limit}; use the"
            " restricted classes (add_one / drop_one / swap_one / paper_multi)"
        )
    return _scan_subsets(game, profile, u, INF, first_only=False)


def _current_cost(game: Game, profile: StrategyProfile, u: int):
    masks, incoming, cur_mask = _player_state(profile, u)
    return _cost(game, masks, incoming, u, cur_mask, len(profile.purchases[u]))


def _first_improvement(game: Game, profile: StrategyProfile, u: int):
    """First strategy (lex order) strictly cheaper than u's current cost, or None."""
    current = _current_cost(game, profile, u)
    if current == INF:
        # any connecting strategy improves; the scan finds the first one
        return _scan_subsets(game, profile, u, INF, first_only=True)
    return _scan_subsets(game, profile, u, current, first_only=True)


# ---------------------------------------------------------------------------
# deviation class generators (restricted classes)


def _class_deviations(profile: StrategyProfile, u: int, klass: str, buy_cap: int) -> Iterator[Deviation]:
    n = profile.n
    owned = sorted(profile.purchases[u])
    others = [t for t in range(n) if t != u]
    not_owned = [t for t in others if t not in profile.purchases[u]]
    if klass == "add_one":
        for t in not_owned:
            yield Deviation(u, frozenset(), frozenset({t}))
    elif klass == "drop_one":
        for t in owned:
            yield Deviation(u, frozenset({t}), frozenset())
    elif klass == "swap_one":
        for s in owned:
            for t in others:
                if t == s or t in profile.purchases[u]:
                    continue
                yield Deviation(u, frozenset({s}), frozenset({t}))
    elif klass == "drop_all_buy_one":
        if owned:
            all_owned = frozenset(owned)
            for t in others:
                yield Deviation(u, all_owned, frozenset({t}))
    elif klass == "paper_multi":
        # sell any subset of owned edges, buy up to buy_cap targets
        sell_subsets = [()]
        for s in owned:
            sell_subsets += [prev + (s,) for prev in list(sell_subsets)]
        for sell in sorted(sell_subsets):
            sell_set = frozenset(sell)
            buyable = [t for t in others if t not in profile.purchases[u] or t in sell_set]
            stack: list[tuple[int, tuple[int, ...]]] = [(0, ())]
            while stack:
                start, chosen = stack.pop()
                if chosen or sell:
                    yield Deviation(u, sell_set, frozenset(chosen))
                if len(chosen) < buy_cap:
                    for i in range(len(buyable) - 1, start - 1, -1):
                        stack.append((i + 1, chosen + (buyable[i],)))
    else:
        raise ValueError(f"unknown deviation class {klass!r}")


def verify_equilibrium(
    game: Game,
    profile: StrategyProfile,
    deviation_class: str = "exact",
    limit: int = BEST_RESPONSE_LIMIT,
    buy_cap: int = 2,
) -> EquilibriumReport:
    """Check stability against one deviation class.

    "exact" scans each player's full strategy space and is the only class
    whose equilibrium verdict certifies a Nash equilibrium; every other
    class is a necessary condition only (the report carries that flag).
    A violated verdict always ships a concrete witness whose replayed exact
    delta is strictly negative.
    """
    if deviation_class not in DEVIATION_CLASSES:
        raise ValueError(f"unknown deviation class {deviation_class!r}")

    if deviation_class == "exact":
        if game.n > limit:
            raise LimitExceededError(
                f"exact verification needs best response, limited to n <= {limit};"
                " use a restricted class"
            )
        for u in range(game.n):
            hit = _first_improvement(game, profile, u)
            if hit is not None:
                new_strategy, new_cost = hit
                cur = profile.purchases[u]
                dev = Deviation(u, cur - new_strategy, new_strategy - cur)
                delta = exact_delta(game, profile, dev).delta
                witness = DeviationDelta(dev, delta, "exact", "best_response_scan")
                return EquilibriumReport("exact", "violated", witness, True)
        return EquilibriumReport("exact", "equilibrium", None, True)

    if deviation_class == "buying":
        if game.n > limit:
            raise LimitExceededError(
                f"buying verification is exhaustive over added link subsets,"
                f" limited to n <= {limit}"
            )
        for u in range(game.n):
            hit = _first_buying_improvement(game, profile, u)
            if hit is not None:
                return EquilibriumReport("buying", "violated", hit, False)
        return EquilibriumReport("buying", "equilibrium", None, False)

    for u in range(game.n):
        for dev in _class_deviations(profile, u, deviation_class, buy_cap):
            dd = exact_delta(game, profile, dev)
            if dd.delta < 0:
                return EquilibriumReport(deviation_class, "violated", dd, False)
    return EquilibriumReport(deviation_class, "equilibrium", None, False)


def _first_buying_improvement(game: Game, profile: StrategyProfile, u: int):
    """First subset of added links (lex order) that strictly lowers u's cost."""
    n = game.n
    alpha = game.alpha
    masks, incoming, cur_mask = _player_state(profile, u)
    base_size = len(profile.purchases[u])
    current = _cost(game, masks, incoming, u, cur_mask, base_size)
    addable = [t for t in range(n) if t != u and t not in profile.purchases[u]]
    alpha_k = [alpha * k for k in range(n + 1)]
    floor_d = n - 1

    def visit(start: int, added_mask: int, added: list[int]):
        if added:
            dsum = _dist_sum(masks, n, u, incoming | cur_mask | added_mask)
            if dsum is not None:
                cost = alpha_k[base_size + len(added)] + dsum
                if cost < current:
                    dev = Deviation(u, frozenset(), frozenset(added))
                    return DeviationDelta(dev, cost - current, "exact", "buying_scan")
        k = len(added)
        for i in range(start, len(addable)):
            if current != INF and alpha_k[base_size + k + 1] + floor_d >= current:
                break
            t = addable[i]
            added.append(t)
            hit = visit(i + 1, added_mask | (1 << t), added)
            added.pop()
            if hit is not None:
                return hit
        return None

    return visit(0, 0, [])


# ---------------------------------------------------------------------------
# best response dynamics


@dataclass(frozen=True)
class DynamicsMove:
    round: int
    player: int
    old_strategy: tuple[int, ...]
    new_strategy: tuple[int, ...]
    old_cost: object
    new_cost: object


@dataclass
class DynamicsTrace:
    moves: list[DynamicsMove]
    outcome: str  # "fixpoint" | "cycle" | "max_rounds"
    final_profile: StrategyProfile
    rounds: int
    repeated_profile: tuple[tuple[int, int], ...] | None = None

    def to_json_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "rounds": self.rounds,
            "moves": [
                {
                    "round": m.round,
                    "player": m.player,
                    "old": sorted(m.old_strategy),
                    "new": sorted(m.new_strategy),
                    "old_cost": rational_to_json(m.old_cost),
                    "new_cost": rational_to_json(m.new_cost),
                }
                for m in self.moves
            ],
            "final": [list(p) for p in self.final_profile.canonical()],
            "repeated_profile": (
                None
                if self.repeated_profile is None
                else [list(p) for p in self.repeated_profile]
            ),
        }


def best_response_dynamics(
    game: Game,
    initial_profile: StrategyProfile,
    schedule: str = "round_robin",
    max_rounds: int = 100,
    seed: int = 0,
    limit: int = BEST_RESPONSE_LIMIT,
) -> DynamicsTrace:
    """Iterate strict best-response moves until a fixpoint, a cycle, or the cap.

    A full pass with no strict improvement is a fixpoint and hence an exact
    Nash equilibrium.  Profiles are hashed by canonical purchase list; seeing
    one twice stops with outcome "cycle".
    """
    import random

    if schedule not in ("round_robin", "random_permutation"):
        raise ValueError(f"unknown schedule {schedule!r}")
    rng = random.Random(seed)
    profile = initial_profile
    seen = {profile.canonical()}
    moves: list[DynamicsMove] = []
    rounds_done = 0
    for rnd in range(1, max_rounds + 1):
        rounds_done = rnd
        order = list(range(game.n))
        if schedule == "random_permutation":
            rng.shuffle(order)
        improved = False
        for u in order:
            current = _current_cost(game, profile, u)
            strategy, cost = best_response(game, profile, u, limit=limit)
            if cost < current:
                old = tuple(sorted(profile.purchases[u]))
                profile = profile.replace(u, strategy)
                moves.append(
                    DynamicsMove(rnd, u, old, tuple(sorted(strategy)), current, cost)
                )
                improved = True
                canon = profile.canonical()
                if canon in seen:
                    return DynamicsTrace(moves, "cycle", profile, rnd, canon)
                seen.add(canon)
        if not improved:
            return DynamicsTrace(moves, "fixpoint", profile, rnd)
    return DynamicsTrace(moves, "max_rounds", profile, rounds_done)
