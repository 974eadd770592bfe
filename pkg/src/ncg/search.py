"""Experiment harness: exhaustive equilibrium enumeration, dynamics hunts, sweeps.

Enumeration streams profiles grouped by underlying graph so the cheap
rejection filters (drop one link, add one link, swap one link) can share
per-graph tables: every one of those deltas depends only on the edge set,
ownership just decides who may play the deviation.  Each filter is a sound
rejector; whatever survives goes through the exact verifier.  Certified
records carry their full analysis and replay deterministically.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from . import __version__
from .deviations import (
    BEST_RESPONSE_LIMIT,
    Deviation,
    DeviationDelta,
    EquilibriumReport,
    best_response_dynamics,
    exact_delta,
    verify_equilibrium,
)
from .errors import NcgError
from .formats import (
    profile_id,
    rational_from_json,
    rational_to_json,
    rational_to_text,
)
from .game import INF, Game, Graph, StrategyProfile, build_graph, all_pairs_distances
from .reports import analyze_profile, hard_failures
from .constructions import (
    enumerate_edge_groups,
    enumerate_profiles,
    orientation_pairs,
    random_profile,
)


@dataclass(frozen=True)
class ExperimentConfig:
    ns: tuple[int, ...]
    alphas: tuple[Fraction, ...]
    family: str = "all"  # all | graphs_with_orientations | trees | hunt
    verifier_class: str = "exact"
    seeds: tuple[int, ...] = (0,)
    workers: int = 1
    edge_prob: float = 0.3
    schedule: str = "round_robin"
    max_rounds: int = 60
    br_limit: int = BEST_RESPONSE_LIMIT

    def to_json_dict(self) -> dict:
        return {
            "ns": list(self.ns),
            "alphas": [rational_to_text(a) for a in self.alphas],
            "family": self.family,
            "verifier_class": self.verifier_class,
            "seeds": list(self.seeds),
            "workers": self.workers,
            "edge_prob": self.edge_prob,
            "schedule": self.schedule,
            "max_rounds": self.max_rounds,
            "br_limit": self.br_limit,
        }

    @property
    def config_hash(self) -> str:
        blob = dict(self.to_json_dict())
        blob.pop("workers")  # worker count must not change the result set
        payload = json.dumps(blob, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class ResultRecord:
    config_hash: str
    n: int
    alpha: Fraction
    profile: StrategyProfile
    report: EquilibriumReport
    analysis: dict
    elapsed: float

    @property
    def record_id(self) -> str:
        return profile_id(self.profile)

    def to_json_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "n": self.n,
            "alpha": rational_to_json(self.alpha),
            "profile_id": self.record_id,
            "purchases": [list(p) for p in self.profile.canonical()],
            "report": self.report.to_json_dict(),
            "analysis": self.analysis,
            "elapsed_ms": round(self.elapsed * 1000, 3),
        }


def record_from_json(data: dict) -> tuple[Game, StrategyProfile, dict]:
    alpha = rational_from_json(data["alpha"])
    game = Game(data["n"], alpha)
    profile = StrategyProfile.from_pairs(
        data["n"], [tuple(p) for p in data["purchases"]]
    )
    return game, profile, data


# ---------------------------------------------------------------------------
# per-graph rejection tables


class _GraphTables:
    """Single-move exact deltas of a bare graph, reusable across orientations.

    These deltas depend only on the edge set, so one table serves every
    orientation of the graph.  The add-one scan is built eagerly (it rejects
    or spares all orientations at once); the per-directed-edge drop and swap
    table is built on first use, since graphs rejected by add-one never need
    it.  Swap targets are restricted to non-neighbors so the recorded
    deviation is valid in every orientation that assigns the sold edge.
    """

    def __init__(self, game: Game, edges):
        self.game = game
        n = game.n
        self._edges = tuple(edges)
        masks = [0] * n
        for a, b in self._edges:
            masks[a] |= 1 << b
            masks[b] |= 1 << a
        self._masks = masks
        self._dsums = [_mask_dist_sum(masks, n, u) for u in range(n)]
        self.connected = all(d is not None for d in self._dsums)
        self.add_one: tuple[int, int, Fraction] | None = None
        self._directed: dict[tuple[int, int], tuple[str, int | None, Fraction]] | None = None
        if not self.connected:
            return
        alpha = game.alpha
        for u in range(n):
            if self.add_one is not None:
                break
            for t in range(n):
                if t == u or masks[u] >> t & 1:
                    continue
                masks[u] |= 1 << t
                masks[t] |= 1 << u
                delta = alpha + _mask_dist_sum(masks, n, u) - self._dsums[u]
                masks[u] &= ~(1 << t)
                masks[t] &= ~(1 << u)
                if delta < 0:
                    self.add_one = (u, t, delta)
                    break

    @property
    def directed(self) -> dict[tuple[int, int], tuple[str, int | None, Fraction]]:
        if self._directed is None:
            self._directed = self._build_directed()
        return self._directed

    def _build_directed(self):
        n = self.game.n
        alpha = self.game.alpha
        masks = self._masks
        dsums = self._dsums
        table: dict[tuple[int, int], tuple[str, int | None, Fraction]] = {}
        for a, b in self._edges:
            for owner, other in ((a, b), (b, a)):
                masks[owner] &= ~(1 << other)
                masks[other] &= ~(1 << owner)
                dropped = _mask_dist_sum(masks, n, owner)
                if dropped is not None and -alpha + (dropped - dsums[owner]) < 0:
                    table[(owner, other)] = ("drop", None, -alpha + (dropped - dsums[owner]))
                else:
                    for t in range(n):
                        if t == owner or masks[owner] >> t & 1:
                            continue
                        masks[owner] |= 1 << t
                        masks[t] |= 1 << owner
                        swapped = _mask_dist_sum(masks, n, owner)
                        masks[owner] &= ~(1 << t)
                        masks[t] &= ~(1 << owner)
                        if swapped is None:
                            continue
                        if swapped - dsums[owner] < 0:
                            table[(owner, other)] = ("swap", t, swapped - dsums[owner])
                            break
                masks[owner] |= 1 << other
                masks[other] |= 1 << owner
        return table

    def reject_pairs(self, pairs) -> bool:
        """Cheap verdict for one orientation given as purchase pairs."""
        if not self.connected or self.add_one is not None:
            return True
        directed = self.directed
        return any(pair in directed for pair in pairs)


def _mask_dist_sum(masks, n: int, source: int):
    full = (1 << n) - 1
    seen = (1 << source) | masks[source]
    frontier = masks[source]
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


def _disconnection_witness(game: Game, profile: StrategyProfile) -> DeviationDelta:
    """An always-improving deviation for a disconnected profile: player 0 buys
    one node of every other component."""
    g = build_graph(profile)
    table = all_pairs_distances(g)
    row = table.row(0)
    buy = set()
    reached = {z for z in range(game.n) if row[z] != INF}
    for z in range(game.n):
        if z not in reached:
            buy.add(z)
            comp_row = table.row(z)
            reached |= {w for w in range(game.n) if comp_row[w] != INF}
    dev = Deviation(0, frozenset(), frozenset(buy))
    return exact_delta(game, profile, dev)


def prefilter_witness(
    game: Game, profile: StrategyProfile, tables: _GraphTables | None = None
) -> DeviationDelta | None:
    """Rejection witness from the cheap single-move filters, or None.

    Sound: every witness replays through exact_delta to a strictly negative
    value, so a rejected profile can never be an exact equilibrium.  The
    add-one scan runs first because its table is shared by every orientation
    of the same graph; drops and swaps follow per directed owned edge.
    """
    if tables is None:
        tables = _GraphTables(game, build_graph(profile).edges)
    if not tables.connected:
        return _disconnection_witness(game, profile)
    if tables.add_one is not None:
        u, t, delta = tables.add_one
        dev = Deviation(u, frozenset(), frozenset({t}))
        return DeviationDelta(dev, delta, "exact", "prefilter_add")
    directed = tables.directed
    for u in range(game.n):
        for t in profile.purchases[u]:
            hit = directed.get((u, t))
            if hit is not None:
                kind, target, delta = hit
                if kind == "drop":
                    dev = Deviation(u, frozenset({t}), frozenset())
                else:
                    dev = Deviation(u, frozenset({t}), frozenset({target}))
                return DeviationDelta(dev, delta, "exact", f"prefilter_{kind}")
    return None


# ---------------------------------------------------------------------------
# enumeration and hunting


def enumerate_equilibria(config: ExperimentConfig) -> Iterator[ResultRecord]:
    """Filter every profile of the family through the prefilters, then verify.

    Yields one fully analyzed record per certified profile, in enumeration
    order; identical configs reproduce identical record streams.
    """
    if config.family == "hunt":
        yield from hunt_equilibria(config)
        return
    for n in config.ns:
        for alpha in config.alphas:
            game = Game(n, alpha)
            yield from _enumerate_single(game, config)


def _enumerate_single(game: Game, config: ExperimentConfig) -> Iterator[ResultRecord]:
    if config.workers > 1:
        yield from _enumerate_parallel(game, config)
        return
    for edges in enumerate_edge_groups(game.n, config.family):
        tables = _GraphTables(game, edges)
        if not tables.connected or tables.add_one is not None:
            continue  # no orientation of this graph can survive
        for orientation in range(1 << len(edges)):
            pairs = orientation_pairs(edges, orientation)
            if tables.reject_pairs(pairs):
                continue
            start = time.perf_counter()
            profile = StrategyProfile.from_pairs(game.n, pairs)
            report = verify_equilibrium(
                game, profile, config.verifier_class, limit=config.br_limit
            )
            if not report.is_equilibrium:
                continue
            analysis = analyze_profile(game, profile, report=report)
            yield ResultRecord(
                config.config_hash,
                game.n,
                game.alpha,
                profile,
                report,
                analysis,
                time.perf_counter() - start,
            )


def _verify_chunk(args) -> list[list[list[int]]]:
    """Worker body: certified purchase lists from a chunk of graph groups."""
    n, alpha_text, klass, br_limit, groups = args
    game = Game(n, Fraction(alpha_text))
    out = []
    for edges in groups:
        edges = tuple(tuple(e) for e in edges)
        tables = _GraphTables(game, edges)
        if not tables.connected or tables.add_one is not None:
            continue
        for orientation in range(1 << len(edges)):
            pairs = orientation_pairs(edges, orientation)
            if tables.reject_pairs(pairs):
                continue
            profile = StrategyProfile.from_pairs(n, pairs)
            if verify_equilibrium(game, profile, klass, limit=br_limit).is_equilibrium:
                out.append([list(p) for p in profile.canonical()])
    return out


def _enumerate_parallel(game: Game, config: ExperimentConfig) -> Iterator[ResultRecord]:
    from concurrent.futures import ProcessPoolExecutor

    def chunks() -> Iterator[tuple]:
        buf = []
        for edges in enumerate_edge_groups(game.n, config.family):
            buf.append([list(e) for e in edges])
            if len(buf) >= 64:
                yield (game.n, rational_to_text(game.alpha),
                       config.verifier_class, config.br_limit, buf)
                buf = []
        if buf:
            yield (game.n, rational_to_text(game.alpha),
                   config.verifier_class, config.br_limit, buf)

    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        for certified in pool.map(_verify_chunk, chunks()):
            for purchases in certified:
                start = time.perf_counter()
                profile = StrategyProfile.from_pairs(
                    game.n, [tuple(p) for p in purchases]
                )
                report = verify_equilibrium(
                    game, profile, config.verifier_class, limit=config.br_limit
                )
                analysis = analyze_profile(game, profile, report=report)
                yield ResultRecord(
                    config.config_hash,
                    game.n,
                    game.alpha,
                    profile,
                    report,
                    analysis,
                    time.perf_counter() - start,
                )


def hunt_equilibria(config: ExperimentConfig) -> Iterator[ResultRecord]:
    """Best-response dynamics from seeded random starts; fixpoints are verified,
    deduplicated by canonical profile, analyzed, and emitted."""
    for n in config.ns:
        for alpha in config.alphas:
            game = Game(n, alpha)
            seen: set = set()
            for seed in config.seeds:
                start = time.perf_counter()
                initial = random_profile(n, config.edge_prob, seed)
                trace = best_response_dynamics(
                    game,
                    initial,
                    schedule=config.schedule,
                    max_rounds=config.max_rounds,
                    seed=seed,
                    limit=config.br_limit,
                )
                if trace.outcome != "fixpoint":
                    continue
                profile = trace.final_profile
                canon = profile.canonical()
                if canon in seen:
                    continue
                seen.add(canon)
                report = verify_equilibrium(
                    game, profile, "exact", limit=config.br_limit
                )
                if not report.is_equilibrium:
                    raise NcgError(
                        "dynamics fixpoint failed exact verification; "
                        "this breaks the fixpoint invariant"
                    )
                analysis = analyze_profile(game, profile, report=report)
                yield ResultRecord(
                    config.config_hash,
                    n,
                    alpha,
                    profile,
                    report,
                    analysis,
                    time.perf_counter() - start,
                )


# ---------------------------------------------------------------------------
# persistence


def write_records(path: str, config: ExperimentConfig, records: Iterable[ResultRecord]) -> int:
    """Append-only line-delimited JSON with a leading run manifest; returns count."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        manifest = {
            "manifest": {
                "config_hash": config.config_hash,
                "config": config.to_json_dict(),
                "version": __version__,
            }
        }
        fh.write(json.dumps(manifest, sort_keys=True) + "\n")
        for record in records:
            fh.write(json.dumps(record.to_json_dict(), sort_keys=True) + "\n")
            count += 1
    return count


def read_records(path: str) -> tuple[dict | None, list[dict]]:
    manifest = None
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            data = json.loads(line)
            if "manifest" in data:
                manifest = data["manifest"]
            else:
                records.append(data)
    return manifest, records


# ---------------------------------------------------------------------------
# theorem sweep


SWEEP_COLUMNS = (
    "n",
    "alpha",
    "profile_id",
    "diam",
    "diam_H",
    "n_nontrivial_biconn",
    "max_degH_plus",
    "ratio",
    "prop1_ok",
    "unif50_ok",
    "unif25_ok",
    "diam_bound_ok",
    "tree_poa_ok",
)


@dataclass
class SweepResult:
    rows: list[dict]
    failures: list[dict]
    csv_text: str

    @property
    def ok(self) -> bool:
        return not self.failures


def _uniformity_flag(analysis: dict, num: int, den: int):
    for entry in analysis.get("uniformity", []):
        eps = entry["epsilon"]
        if eps["num"] * den == eps["den"] * num:
            return entry["ok"]
    return None


def theorem_sweep(records: Iterable[dict]) -> SweepResult:
    """One row per certified record plus the aggregate hard-assertion verdicts.

    Rows tabulate the distance-window, uniformity, diameter-vs-ratio, and
    tree ratio checks; any failed hard assertion lands in ``failures`` so
    callers can exit nonzero.
    """
    rows: list[dict] = []
    failures: list[dict] = []
    for data in records:
        analysis = data.get("analysis", data)
        rid = data.get("profile_id", analysis.get("graph_id", "?"))
        alpha = rational_from_json(data["alpha"])
        n = data["n"]
        diam = analysis.get("diam")
        ratio = analysis.get("ratio")
        ratio_frac = None if ratio is None else rational_from_json(ratio)
        prop1 = analysis.get("prop1")
        prop1_ok = None if prop1 is None else prop1["ok"]
        unif50 = _uniformity_flag(analysis, 1, 2)
        unif25 = _uniformity_flag(analysis, 1, 4)
        diam_bound_ok = None
        if ratio_frac is not None and diam is not None:
            diam_bound_ok = ratio_frac <= diam + 1
        is_tree = analysis.get("is_tree", False)
        tree_poa_ok = None
        if is_tree and ratio_frac is not None:
            tree_poa_ok = ratio_frac < 5
        row = {
            "n": n,
            "alpha": rational_to_text(alpha),
            "profile_id": rid,
            "diam": "" if diam is None else diam,
            "diam_H": _blank(analysis["biconn"].get("max_component_diameter")),
            "n_nontrivial_biconn": analysis["biconn"]["n_nontrivial"],
            "max_degH_plus": analysis["degrees"]["max_degH_plus"],
            "ratio": "" if ratio_frac is None else rational_to_text(ratio_frac),
            "prop1_ok": _blank(prop1_ok),
            "unif50_ok": _blank(unif50),
            "unif25_ok": _blank(unif25),
            "diam_bound_ok": _blank(diam_bound_ok),
            "tree_poa_ok": _blank(tree_poa_ok),
        }
        rows.append(row)
        verdict = (analysis.get("verification") or {}).get("verdict")
        certified = verdict == "equilibrium"
        if certified:
            for name, flag in (
                ("prop1", prop1_ok),
                ("unif50", unif50),
                ("unif25", unif25),
                ("diam_bound", diam_bound_ok),
                ("tree_poa", tree_poa_ok),
            ):
                if flag is False:
                    failures.append({"profile_id": rid, "check": name})
            for check in hard_failures(analysis):
                failures.append({"profile_id": rid, "check": check["name"]})

    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=SWEEP_COLUMNS)
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return SweepResult(rows, failures, buffer.getvalue())


def _blank(value):
    return "" if value is None else value


# ---------------------------------------------------------------------------
# isomorphism reporting (labelled profiles are never collapsed during search)


def _refine_colors(g: Graph, rounds: int | None = None) -> tuple[int, ...]:
    colors = [g.degree(u) for u in range(g.n)]
    for _ in range(rounds if rounds is not None else g.n):
        signatures = [
            (colors[u], tuple(sorted(colors[v] for v in g.neighbors(u))))
            for u in range(g.n)
        ]
        palette = {sig: i for i, sig in enumerate(sorted(set(signatures)))}
        new = [palette[sig] for sig in signatures]
        if new == colors:
            break
        colors = new
    return tuple(colors)


def is_isomorphic(g1: Graph, g2: Graph, limit: int = 10) -> bool:
    """Refinement-pruned backtracking isomorphism test for small graphs."""
    if g1.n != g2.n or g1.m != g2.m:
        return False
    if g1.n > limit:
        raise NcgError(f"isomorphism check limited to n <= {limit}")
    c1, c2 = _refine_colors(g1), _refine_colors(g2)
    if sorted(c1) != sorted(c2):
        return False
    order = sorted(range(g1.n), key=lambda u: (c1[u], -g1.degree(u)))
    mapping = [-1] * g1.n
    used = [False] * g2.n

    def assign(idx: int) -> bool:
        if idx == len(order):
            return True
        u = order[idx]
        for v in range(g2.n):
            if used[v] or c2[v] != c1[u]:
                continue
            ok = True
            for w in g1.neighbors(u):
                if mapping[w] != -1 and not g2.has_edge(v, mapping[w]):
                    ok = False
                    break
            if ok:
                for w in range(g1.n):
                    if mapping[w] != -1 and g2.has_edge(v, mapping[w]) and not g1.has_edge(u, w):
                        ok = False
                        break
            if ok:
                mapping[u] = v
                used[v] = True
                if assign(idx + 1):
                    return True
                mapping[u] = -1
                used[v] = False
        return False

    return assign(0)


def isomorphism_classes(graphs: list[Graph], limit: int = 10) -> list[list[int]]:
    """Group indices of graphs by isomorphism; a reporting option only."""
    classes: list[list[int]] = []
    for i, g in enumerate(graphs):
        placed = False
        for cls in classes:
            if is_isomorphic(graphs[cls[0]], g, limit=limit):
                cls.append(i)
                placed = True
                break
        if not placed:
            classes.append([i])
    return classes
