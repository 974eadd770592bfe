"""Observational reports and the per-profile analysis bundle.

Statements from the source material that involve unknown constants are
reported, never asserted; the only hard assertions are constant-free and
gated on the hypothesis actually holding (a certified equilibrium, an alpha
range, a component diameter).  ``analyze_profile`` assembles everything a
stored search record or the CLI needs for one profile.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .deviations import BEST_RESPONSE_LIMIT, EquilibriumReport, verify_equilibrium
from .formats import profile_id, rational_to_json
from .game import (
    EXHAUSTIVE_OPT_LIMIT,
    INF,
    Game,
    OwnedGraph,
    StrategyProfile,
    all_pairs_distances,
    build_graph,
    optimal_social_cost,
    social_cost,
)
from .structure import (
    BiconnectivityDecomposition,
    biconnectivity,
    check_window_inequality,
    component_diameter,
    nonbridge_outdegree,
    uniformity_certificate,
)

#: The two inconsistent diameter thresholds quoted for the unique-component
#: theorem; both are echoed in reports and neither is asserted.
UNIQUE_COMPONENT_DIAMETER_THRESHOLDS = (1998, 1988)


@dataclass(frozen=True)
class ComponentDegreeStats:
    index: int
    size: int
    diameter: int
    max_outdegree: int


@dataclass(frozen=True)
class DegreeBoundReport:
    """Non-bridge purchase counts against the 2n/alpha + 6 and 3n/alpha yardsticks."""

    n: int
    alpha: Fraction
    diameter: object
    nontrivial_count: int
    components: tuple[ComponentDegreeStats, ...]
    max_outdegree: int
    bound_two: object  # 2n/alpha + 6
    bound_three: object  # 3n/alpha
    certified_ne: bool
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def degree_bound_report(
    game: Game,
    g: OwnedGraph,
    decomposition: BiconnectivityDecomposition | None = None,
    certified_ne: bool = False,
    table=None,
) -> DegreeBoundReport:
    """Tabulate per-component max outdegrees; hard-assert only the d_H <= 2 case.

    The 2n/alpha + 6 column is purely observational (its validity window
    depends on constants with no closed form); the 3n/alpha bound is a hard
    check on certified equilibria whose component diameter is at most two.
    """
    if decomposition is None:
        decomposition = biconnectivity(g)
    if table is None:
        table = all_pairs_distances(g)
    alpha = game.alpha
    bound_two = 2 * Fraction(game.n) / alpha + 6 if alpha > 0 else INF
    bound_three = 3 * Fraction(game.n) / alpha if alpha > 0 else INF
    stats = []
    violations = []
    for i in decomposition.nontrivial:
        nodes = decomposition.component_nodes[i]
        d_h = component_diameter(g, decomposition, i)
        comp_edges = decomposition.components[i]
        max_out = 0
        for v in nodes:
            out = sum(
                1
                for t in g.profile.purchases[v]
                if ((v, t) if v < t else (t, v)) in comp_edges
            )
            max_out = max(max_out, out)
        stats.append(ComponentDegreeStats(i, len(nodes), d_h, max_out))
        if certified_ne and d_h <= 2 and alpha > 0 and max_out > bound_three:
            violations.append(
                f"component {i}: d_H={d_h} but max outdegree {max_out} > 3n/alpha={bound_three}"
            )
    return DegreeBoundReport(
        n=game.n,
        alpha=alpha,
        diameter=table.diameter,
        nontrivial_count=decomposition.nontrivial_count,
        components=tuple(stats),
        max_outdegree=max((s.max_outdegree for s in stats), default=0),
        bound_two=bound_two,
        bound_three=bound_three,
        certified_ne=certified_ne,
        violations=tuple(violations),
    )


@dataclass(frozen=True)
class StructureChecksReport:
    """Alpha-gated biconnectivity assertions plus the diameter-headroom observation."""

    alpha: Fraction
    n: int
    is_tree: bool
    nontrivial_count: int
    diameter: object
    max_component_diameter: int | None
    unique_component_applies: bool
    unique_component_ok: bool | None
    tree_range_applies: bool
    tree_range_ok: bool | None
    diameter_headroom_ok: bool | None  # diam(G) < diam(H) + 994, report only
    thresholds: tuple[int, int]
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def biconnected_structure_checks(
    game: Game,
    g: OwnedGraph,
    decomposition: BiconnectivityDecomposition | None = None,
    certified_ne: bool = False,
    table=None,
) -> StructureChecksReport:
    """Unique-component and tree-range assertions, gated on certification and alpha."""
    if decomposition is None:
        decomposition = biconnectivity(g)
    if table is None:
        table = all_pairs_distances(g)
    n, alpha = game.n, game.alpha
    is_tree = table.is_connected and g.m == n - 1
    comp_diams = [component_diameter(g, decomposition, i) for i in decomposition.nontrivial]
    max_dh = max(comp_diams, default=None)

    violations = []
    unique_applies = certified_ne and alpha < Fraction(n - 1, 2)
    unique_ok = None
    if unique_applies:
        unique_ok = decomposition.nontrivial_count <= 1
        if not unique_ok:
            violations.append(
                f"alpha={alpha} < (n-1)/2 but {decomposition.nontrivial_count} nontrivial components"
            )
    # the tree-range threshold 4n-13 goes negative for n <= 3 where cliques
    # are equilibria at alpha <= 1; the assertion only makes sense past both
    tree_applies = certified_ne and alpha > max(4 * n - 13, 1)
    tree_ok = None
    if tree_applies:
        tree_ok = is_tree
        if not tree_ok:
            violations.append(f"alpha={alpha} > 4n-13 but the graph is not a tree")

    headroom_ok = None
    if max_dh is not None and table.is_connected:
        headroom_ok = table.diameter < max_dh + 994

    return StructureChecksReport(
        alpha=alpha,
        n=n,
        is_tree=is_tree,
        nontrivial_count=decomposition.nontrivial_count,
        diameter=table.diameter,
        max_component_diameter=max_dh,
        unique_component_applies=unique_applies,
        unique_component_ok=unique_ok,
        tree_range_applies=tree_applies,
        tree_range_ok=tree_ok,
        diameter_headroom_ok=headroom_ok,
        thresholds=UNIQUE_COMPONENT_DIAMETER_THRESHOLDS,
        violations=tuple(violations),
    )


DEFAULT_EPSILONS = (Fraction(1, 2), Fraction(1, 4))


def analyze_profile(
    game: Game,
    profile: StrategyProfile,
    epsilons=DEFAULT_EPSILONS,
    certify: str = "auto",
    br_limit: int = BEST_RESPONSE_LIMIT,
    opt_limit: int = EXHAUSTIVE_OPT_LIMIT,
    report: EquilibriumReport | None = None,
) -> dict:
    """Full analysis record for one profile, JSON-ready.

    ``certify`` picks the verification run attached to the record: "auto"
    runs the exact class when n allows it and the buying class otherwise;
    "none" skips verification (every gated assertion then stays off).  A
    pre-computed report may be passed to avoid re-verifying.
    """
    g = build_graph(profile)
    table = all_pairs_distances(g)
    decomposition = biconnectivity(g)

    if report is None and certify != "none":
        klass = certify
        if klass == "auto":
            klass = "exact" if game.n <= br_limit else "buying"
        report = verify_equilibrium(game, profile, klass, limit=br_limit)
    certified_exact = (
        report is not None and report.deviation_class == "exact" and report.is_equilibrium
    )
    certified_buying = report is not None and report.is_equilibrium

    uniformity = []
    prop1 = None
    if table.is_connected:
        for eps in epsilons:
            cert = uniformity_certificate(g, game.alpha, eps, table=table)
            uniformity.append(
                {
                    "epsilon": rational_to_json(Fraction(eps)),
                    "ok": cert is not None,
                    "r": None if cert is None else cert.r,
                    "x": None if cert is None else cert.x,
                }
            )
        win = check_window_inequality(g, game.alpha, table=table)
        prop1 = {
            "ok": win.ok,
            "r": win.r,
            "min_slack": rational_to_json(win.min_slack),
            "violating_nodes": list(win.violating_nodes),
        }

    degrees = degree_bound_report(
        game, g, decomposition, certified_ne=certified_exact, table=table
    )
    structure = biconnected_structure_checks(
        game, g, decomposition, certified_ne=certified_exact, table=table
    )

    cost = social_cost(game, profile, table=table)
    ratio = None
    opt_mode = "exact" if game.n <= opt_limit else "star_clique_bound"
    if cost != INF:
        opt = optimal_social_cost(game, mode=opt_mode, limit=opt_limit)
        ratio = cost / opt

    diam = table.diameter
    checks = []
    if certified_buying and prop1 is not None:
        checks.append({"name": "window_inequality", "ok": prop1["ok"]})
        for entry in uniformity:
            eps = entry["epsilon"]
            checks.append(
                {
                    "name": f"uniformity_{eps['num']}_{eps['den']}",
                    "ok": entry["ok"],
                }
            )
    if certified_exact and ratio is not None and diam != INF:
        checks.append({"name": "ratio_le_diam_plus_1", "ok": ratio <= diam + 1})
    if degrees.violations:
        checks.append(
            {"name": "outdegree_3n_over_alpha", "ok": False, "witness": list(degrees.violations)}
        )
    elif certified_exact and any(s.diameter <= 2 for s in degrees.components):
        checks.append({"name": "outdegree_3n_over_alpha", "ok": True})
    for name, applies, ok in (
        ("unique_nontrivial_component", structure.unique_component_applies, structure.unique_component_ok),
        ("tree_range", structure.tree_range_applies, structure.tree_range_ok),
    ):
        if applies:
            checks.append({"name": name, "ok": bool(ok)})

    layer_sizes = None
    if table.is_connected:
        d = int(diam)
        counts = []
        for u in range(game.n):
            row = [0] * (d + 1)
            for dist in table.row(u):
                row[int(dist)] += 1
            counts.append(row)
        layer_sizes = {
            "max_layer": max(max(row) for row in counts),
            "eccentricities": [int(e) for e in table.eccentricity],
        }

    return {
        "graph_id": profile_id(profile),
        "n": game.n,
        "alpha": rational_to_json(game.alpha),
        "diam": None if diam == INF else int(diam),
        "connected": table.is_connected,
        "is_tree": structure.is_tree,
        "mutual_purchases": [list(p) for p in profile.mutual_pairs],
        "layers_summary": layer_sizes,
        "uniformity": uniformity,
        "prop1": prop1,
        "biconn": {
            "n_nontrivial": decomposition.nontrivial_count,
            "bridges": [list(b) for b in decomposition.bridges],
            "cut_vertices": sorted(decomposition.cut_vertices),
            "max_component_diameter": structure.max_component_diameter,
            "diameter_headroom_ok": structure.diameter_headroom_ok,
            "headroom_thresholds": list(structure.thresholds),
        },
        "degrees": {
            "max_degH_plus": degrees.max_outdegree,
            "bound_2n_over_alpha_plus_6": rational_to_json(degrees.bound_two),
            "bound_3n_over_alpha": rational_to_json(degrees.bound_three),
            "per_component": [
                {
                    "size": s.size,
                    "diameter": s.diameter,
                    "max_outdegree": s.max_outdegree,
                }
                for s in degrees.components
            ],
        },
        "social_cost": rational_to_json(cost),
        "ratio": None if ratio is None else rational_to_json(ratio),
        "opt_mode": opt_mode,
        "verification": None if report is None else report.to_json_dict(),
        "checks": checks,
    }


def hard_failures(analysis: dict) -> list[dict]:
    """Checks in an analysis record that are hard assertions and failed."""
    return [c for c in analysis.get("checks", []) if not c.get("ok", True)]
