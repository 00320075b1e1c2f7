"""The verification battery: every headline number recomputed and checked.

Each check returns a :class:`CheckResult`; the CLI ``verify`` command and
the acceptance test suite both run these.  Checks are deterministic given
their seeds.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import bounds as bnd
from .constructions import (
    ball_resistance,
    build_cycle_with_leaves,
    build_random_regular_girth,
    build_regular_tree,
    build_split_4regular,
    build_star,
    build_star_triangles_leaves,
    certified_rooting,
    extract_ball,
    p_rooted,
    regular_tree_resistance,
    root_via_sinks,
    rooted_union,
    split_tree_limits,
    split_tree_resistance,
    tree_resistance,
    tree_rooting_exceedance,
)
from .multigraph import Multigraph, RootedGraph, WeightedNetwork, girth, is_connected
from .resistance import (
    current_via_spanning_trees,
    flow_net_at,
    flow_power,
    kirchhoff_index_by_eigenvalues,
    pair_resistance,
    resistance_summary,
    rooted_summary,
    superpose,
    unit_current_flow,
    weighted_pair_resistance,
)
from .search import enumerate_optimal, verify_small_claims

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0
SPLIT_AVERAGE_LIMIT = (-3.0 + 7.0 * math.sqrt(5.0)) / 24.0


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed: float = 0.0


def _result(name: str, passed: bool, detail: str, t0: float) -> CheckResult:
    return CheckResult(name=name, passed=passed, detail=detail, elapsed=time.time() - t0)


# ---------------------------------------------------------------------------
# corpus


def small_connected_corpus(
    n_max: int = 6, m_max: int = 8, mult_cap: int = 3
) -> Iterable[Multigraph]:
    """Every connected multigraph with n <= n_max, m <= m_max, up to isomorphism."""
    from .multigraph import canonical_form
    from .search import _compositions, _connected_supports

    for n in range(2, n_max + 1):
        for m in range(n - 1, m_max + 1):
            seen: set[bytes] = set()
            max_support = min(m, n * (n - 1) // 2)
            for k in range(n - 1, max_support + 1):
                extra_total = m - k
                if extra_total > k * (mult_cap - 1):
                    continue
                for support in _connected_supports(n, k):
                    for extra in _compositions(extra_total, k, mult_cap - 1):
                        g = Multigraph(n, dict(zip(support, (1 + e for e in extra))))
                        label = canonical_form(g)
                        if label in seen:
                            continue
                        seen.add(label)
                        yield g


def _random_connected(n: int, m: int, rng: random.Random) -> Multigraph:
    """Random connected multigraph: random tree plus random extra edges."""
    edges: dict[tuple[int, int], int] = {}
    order = list(range(n))
    rng.shuffle(order)
    for i in range(1, n):
        u = order[i]
        v = order[rng.randrange(i)]
        p = (min(u, v), max(u, v))
        edges[p] = edges.get(p, 0) + 1
    for _ in range(m - (n - 1)):
        u, v = rng.sample(range(n), 2)
        p = (min(u, v), max(u, v))
        edges[p] = edges.get(p, 0) + 1
    return Multigraph(n, edges)


# ---------------------------------------------------------------------------
# criterion 1: closed-form golden values


def check_golden_values() -> CheckResult:
    t0 = time.time()
    failures = []
    for n in range(3, 51):
        a = resistance_summary(build_star(n)).A
        if abs(a - (2.0 - 2.0 / n)) >= 1e-9:
            failures.append(f"star n={n}: {a}")
    b = rooted_summary(build_star_triangles_leaves(6, 9)).B
    if abs(b - 2.0 / 3.0) >= 1e-9:
        failures.append(f"star of triangles B={b}")
    for n, m in ((4, 6), (5, 7), (6, 9)):
        c = m / (n * (n - 1) / 2.0)
        w = WeightedNetwork(n, {(u, v): c for u in range(n) for v in range(u + 1, n)})
        total = sum(
            weighted_pair_resistance(w, u, v) for u in range(n) for v in range(u + 1, n)
        )
        a = total / (n * (n - 1) / 2.0)
        if abs(a - (n - 1.0) / m) >= 1e-9:
            failures.append(f"uniform net n={n} m={m}: {a}")
    return _result(
        "golden-values",
        not failures,
        failures[0] if failures else "stars 3..50, star of triangles, uniform networks all exact",
        t0,
    )


# ---------------------------------------------------------------------------
# criterion 2: oracle equivalence


def check_oracle_equivalence(n_max: int = 6, m_max: int = 8, mult_cap: int = 3) -> CheckResult:
    t0 = time.time()
    worst = 0.0
    count = 0
    for g in small_connected_corpus(n_max, m_max, mult_cap):
        count += 1
        summary = resistance_summary(g)
        eig_total = kirchhoff_index_by_eigenvalues(g)
        worst = max(worst, abs(eig_total - summary.pairwise_total))
        pairs = (
            list(itertools.combinations(range(g.n), 2))
            if g.n <= 4
            else [(0, g.n - 1), (0, 1), (1, g.n - 1)]
        )
        for x, y in pairs:
            direct = pair_resistance(g, x, y)
            flow = unit_current_flow(g, x, y)
            worst = max(worst, abs(flow_power(flow) - direct))
            tree_power = 0.0
            for pair, mult in g.edges.items():
                cur = current_via_spanning_trees(g, x, y, pair)
                worst = max(worst, abs(cur - flow.edge_current[pair]))
                tree_power += mult * cur**2
            worst = max(worst, abs(tree_power - direct))
    return _result(
        "oracle-equivalence",
        worst < 1e-9,
        f"{count} graphs, max deviation {worst:.2e}",
        t0,
    )


# ---------------------------------------------------------------------------
# criterion 3: small-case optimality


def check_small_case_optimality() -> CheckResult:
    t0 = time.time()
    checks = verify_small_claims()
    bad = [c for c in checks if not c.passed]
    detail = "; ".join(f"{c.name}: {'ok' if c.passed else 'FAIL'}" for c in checks)
    return _result("small-case-optimality", not bad, detail, t0)


# ---------------------------------------------------------------------------
# criterion 4: sink-rooting inequality


def check_sink_rooting_inequality(
    graphs: int = 20, trials: int = 500, seed: int = 0
) -> CheckResult:
    t0 = time.time()
    rng = random.Random(seed)
    failures = []
    for i in range(graphs):
        n = rng.randrange(8, 61)
        m = n - 1 + rng.randrange(0, n)
        g = _random_connected(n, m, rng)
        for s in (1, 2, 5, 10):
            res = root_via_sinks(g, s, trials=trials, seed=rng.randrange(2**31))
            if res.mean_B > res.bound + 3 * res.std_error:
                failures.append(
                    f"graph {i} (n={n}, m={m}) s={s}: mean {res.mean_B:.5f} "
                    f"> bound {res.bound:.5f} + 3se {3 * res.std_error:.5f}"
                )
    return _result(
        "sink-rooting-inequality",
        not failures,
        failures[0] if failures else f"{graphs} graphs x s in (1,2,5,10): mean B within bound",
        t0,
    )


# ---------------------------------------------------------------------------
# criterion 5: split-construction pipeline


def check_split_pipeline(
    n_base: int = 6668,
    g_min: int = 14,
    radius: int = 6,
    eps: float = 0.02,
    sink_count: int = 165,
    seed: int = 7,
) -> CheckResult:
    t0 = time.time()
    g = build_split_4regular(n_base, seed=seed, g_min=g_min)
    b = n_base // 2
    res = certified_rooting(
        g,
        radius=radius,
        eps=eps,
        seed=seed + 1,
        placement="spread",
        sink_count=sink_count,
        sink_vertices=range(b, 3 * b),  # degree-3 side: 2 root edges per sink
    )
    n1 = g.n
    alpha1 = res.alpha_after
    # convex mix with leaves down to average degree 3
    leaves = math.ceil(n1 * (alpha1 - 3.0))
    mixed = rooted_union([res.rooted], extra_leaves=leaves)
    n_mix = mixed.n_nonroot
    m_mix = mixed.graph.m
    b_mix = (res.R_tot + leaves) / n_mix
    a_upper = 2.0 * b_mix
    ok_cert = res.max_ratio <= (1.0 + eps) * (1 + 1e-9)
    ok_stage = res.B <= 0.54 and n1 >= 10**4
    ok_mix = b_mix <= 0.66 and 2 * m_mix <= 3 * n_mix + 2
    detail = (
        f"n={n1} girth>={g_min} stage B={res.B:.5f} (<=0.54) alpha1={alpha1:.5f} "
        f"max_ratio={res.max_ratio:.5f} repairs={res.repaired_count} | "
        f"mix: leaves={leaves} B={b_mix:.5f} (<=0.66) alpha={2 * m_mix / n_mix:.5f} "
        f"A<=2B={a_upper:.5f}"
    )
    return _result("split-pipeline", ok_cert and ok_stage and ok_mix, detail, t0)


# ---------------------------------------------------------------------------
# criterion 6: cubic rooting toward the regular-tree bound


def check_cubic_rooting(n: int = 2000, seed: int = 5) -> CheckResult:
    t0 = time.time()
    details = []
    ok = True

    # literal run at girth 8 (radius 3): the certificate is enforced; with the
    # tree truncated at radius 3 the organic regime is out of reach, so sinks
    # are spread at the coverage density that keeps the certificate cheap
    g8 = build_random_regular_girth(n, 3, 8, seed=seed)
    res8 = certified_rooting(
        g8, radius=3, eps=0.05, seed=seed + 1, placement="spread", sink_count=260
    )
    bound8 = 1.05 * regular_tree_resistance(3, 3)
    ok &= res8.max_ratio <= 1.05 * (1 + 1e-9)
    ok &= res8.B <= bound8 + 1e-12
    details.append(
        f"girth8 l=3: B={res8.B:.4f} cert_bound={bound8:.4f} repairs={res8.repaired_count}"
    )

    # deeper ball: girth 12 lets radius 5 certify; the bound and the measured
    # value both sit inside [0.5, 0.70] and within 5% of 2/3
    g12 = build_random_regular_girth(n, 3, 12, seed=seed)
    res12 = certified_rooting(
        g12, radius=5, eps=0.05, seed=seed + 1, placement="spread", sink_count=40
    )
    bound12 = 1.05 * regular_tree_resistance(3, 5)
    ok &= res12.max_ratio <= 1.05 * (1 + 1e-9)
    ok &= 0.5 <= res12.B <= 0.70
    ok &= abs(res12.B - 2.0 / 3.0) <= 0.05 * (2.0 / 3.0)
    details.append(
        f"girth12 l=5: B={res12.B:.4f} in [0.5,0.70], |B-2/3|/(2/3)="
        f"{abs(res12.B - 2 / 3) / (2 / 3):.3f}, cert_bound={bound12:.4f}"
    )

    # the certified bound approaches (alpha-1)/(alpha(alpha-2)) = 2/3 as the
    # radius grows
    approach = [1.05 * regular_tree_resistance(3, layer) for layer in range(3, 9)]
    ok &= abs(approach[2] - 2.0 / 3.0) <= 0.05 * (2.0 / 3.0)  # radius 5
    details.append("certified bounds l=3..8: " + ", ".join(f"{v:.4f}" for v in approach))
    return _result("cubic-rooting", ok, " | ".join(details), t0)


# ---------------------------------------------------------------------------
# criterion 7: lower-bound certificates


def check_lower_bound_certificates() -> CheckResult:
    t0 = time.time()
    violations = []
    count = 0
    for g in small_connected_corpus(5, 7, 2):
        count += 1
        a = resistance_summary(g).A
        if a < bnd.lower_bound_one_step(g.alpha) - 1e-9:
            violations.append(f"one-step: n={g.n} edges={sorted(g.edges)}")
        if a < bnd.lower_bound_nonneighbor(g.n, g.m) - 1e-9:
            violations.append(f"non-neighbour: n={g.n} edges={sorted(g.edges)}")
        # root at 0 and check the two-step certificate when applicable
        rg = RootedGraph(g, 0)
        cert = bnd.two_step_certificate(rg)
        if cert.applicable:
            alpha = 2.0 * g.m / rg.n_nonroot
            if cert.total > cert.budget(alpha, rg.n_nonroot) + 1e-9:
                violations.append(f"two-step budget: n={g.n} edges={sorted(g.edges)}")
            b = rooted_summary(rg).B
            if b < cert.implied_B_lower - 1e-9:
                violations.append(f"two-step B: n={g.n} edges={sorted(g.edges)}")
    return _result(
        "lower-bound-certificates",
        not violations,
        violations[0] if violations else f"{count} graphs, zero violations",
        t0,
    )


# ---------------------------------------------------------------------------
# criterion 8: tree-rooting tail frequency


def check_tree_rooting_frequency(samples: int = 10000, seed: int = 3) -> CheckResult:
    t0 = time.time()
    failures = []
    rows = []
    for depth in range(4, 9):
        for eps in (0.2, 0.4):
            freq = tree_rooting_exceedance(depth, eps, samples, seed=seed)
            limit = 4.0 * (1.0 - eps) ** depth / eps
            rows.append(f"l={depth} eps={eps}: {freq:.4f} <= {limit:.4f}")
            if freq > limit:
                failures.append(rows[-1])
    return _result(
        "tree-rooting-frequency",
        not failures,
        failures[0] if failures else "; ".join(rows[-4:]),
        t0,
    )


# ---------------------------------------------------------------------------
# criterion 9: queen-bee suite


def check_queen_bee_suite() -> CheckResult:
    t0 = time.time()
    problems = []

    claims = verify_small_claims()
    qb = next(c for c in claims if c.name == "queen-bee-star-of-triangles")
    if not qb.passed:
        problems.append("exhaustive queen-bee search mismatch")

    env = bnd.default_envelope()
    alpha = 2.01
    while alpha <= 12.0 + 1e-12:
        if not env(alpha) < bnd.qb_lower(alpha):
            problems.append(f"gap not strict at alpha={alpha:.2f}")
            break
        alpha += 0.01

    for t in range(4, 10001):
        if not bnd.regular_chord_discriminant(t) < 0:
            problems.append(f"discriminant not negative at t={t}")
            break

    seg = bnd.chord_segment_checks()
    if not (
        abs(seg.quad_a + 0.2295) < 5e-5
        and abs(seg.quad_b - 1.63725) < 5e-5
        and abs(seg.quad_c + 2.9395) < 5e-5
    ):
        problems.append(f"printed coefficients not reproduced: {seg}")
    if not seg.discriminant < 0 or not seg.discriminant_exact_constant < 0:
        problems.append("chord discriminant not negative")
    if abs(seg.linear_root - 3.5987) > 5e-4:
        problems.append(f"linear comparison root {seg.linear_root}")

    return _result(
        "queen-bee-suite",
        not problems,
        problems[0]
        if problems
        else f"search ok; strict gap on (2.01,12]; discriminants < 0 (t<=10^4); "
        f"coefficients a={seg.quad_a:.5f} b={seg.quad_b:.5f} c={seg.quad_c:.5f} "
        f"root={seg.linear_root:.4f}",
        t0,
    )


# ---------------------------------------------------------------------------
# criterion 10: split-tree fixed point


def check_split_fixed_point() -> CheckResult:
    t0 = time.time()
    lim = split_tree_limits()
    ok = (
        abs(lim.x - GOLDEN_RATIO) < 1e-10
        and abs(lim.average - SPLIT_AVERAGE_LIMIT) < 1e-10
        and abs(lim.r_deg3 - math.sqrt(5.0) / 4.0) < 1e-10
        and abs(lim.r_deg4 - (-3.0 + 3.0 * math.sqrt(5.0)) / 8.0) < 1e-10
    )
    return _result(
        "split-fixed-point",
        ok,
        f"x={lim.x:.12f} r3={lim.r_deg3:.12f} r4={lim.r_deg4:.12f} avg={lim.average:.12f}",
        t0,
    )


# ---------------------------------------------------------------------------
# flow property battery (superposition, monotonicity, series/parallel, ...)


def check_flow_properties(seed: int = 1) -> CheckResult:
    t0 = time.time()
    rng = random.Random(seed)
    problems = []

    for trial in range(30):
        n = rng.randrange(4, 9)
        g = _random_connected(n, n - 1 + rng.randrange(0, 5), rng)
        x, y, z = rng.sample(range(n), 3)

        # triangle inequality and flow superposition
        rxy, ryz, rxz = (
            pair_resistance(g, x, y),
            pair_resistance(g, y, z),
            pair_resistance(g, x, z),
        )
        if rxz > rxy + ryz + 1e-9:
            problems.append(f"triangle inequality fails on trial {trial}")
        f1, f2 = unit_current_flow(g, x, y), unit_current_flow(g, y, z)
        combined = superpose(f1, f2)
        direct = unit_current_flow(g, x, z)
        if any(
            abs(combined.edge_current[p] - direct.edge_current[p]) > 1e-8
            for p in g.edges
        ):
            problems.append(f"superposition mismatch on trial {trial}")
        if abs(flow_net_at(combined, x) - 1.0) > 1e-8 or abs(flow_net_at(combined, z) + 1.0) > 1e-8:
            problems.append(f"KCL fails after superposition on trial {trial}")

        # potentials of a unit flow lie between the endpoint potentials
        pot = f1.potential
        if not (
            min(pot.values()) >= pot[y] - 1e-9 and max(pot.values()) <= pot[x] + 1e-9
        ):
            problems.append(f"potential range fails on trial {trial}")

        # monotonicity: deleting an edge never lowers resistance
        p_del = rng.choice(list(g.edges))
        edges = dict(g.edges)
        if edges[p_del] > 1:
            edges[p_del] -= 1
        else:
            del edges[p_del]
        g_del = Multigraph(g.n, edges)
        if is_connected(g_del):
            if pair_resistance(g_del, x, y) < rxy - 1e-9:
                problems.append(f"edge-deletion monotonicity fails on trial {trial}")
        # identification never raises resistance
        from .multigraph import merge_vertices

        others = [v for v in range(g.n) if v not in (x, y)]
        if len(others) >= 2:
            merged, mapping = merge_vertices(g, rng.sample(others, 2))
            if pair_resistance(merged, mapping[x], mapping[y]) > rxy + 1e-9:
                problems.append(f"identification monotonicity fails on trial {trial}")

    # series and parallel laws on random compositions
    for trial in range(20):
        r1 = rng.uniform(0.2, 3.0)
        r2 = rng.uniform(0.2, 3.0)
        w_series = WeightedNetwork(3, {(0, 1): 1.0 / r1, (1, 2): 1.0 / r2})
        if abs(weighted_pair_resistance(w_series, 0, 2) - (r1 + r2)) > 1e-9:
            problems.append("series law fails")
        w_par = WeightedNetwork(2, {(0, 1): 1.0 / r1 + 1.0 / r2})
        if abs(weighted_pair_resistance(w_par, 0, 1) - 1.0 / (1.0 / r1 + 1.0 / r2)) > 1e-9:
            problems.append("parallel law fails")

    # explicit cycle perturbation on a known cycle: power strictly rises
    c4 = build_cycle_with_leaves(4, 4)
    f = unit_current_flow(c4, 0, 2)
    base = flow_power(f)
    for delta in (-0.1, 0.07, 0.25):
        perturbed = 0.0
        cycle_sign = {(0, 1): 1, (1, 2): 1, (2, 3): -1, (0, 3): -1}
        for p, k in c4.edges.items():
            perturbed += k * (f.edge_current[p] + cycle_sign[p] * delta) ** 2
        if perturbed < base - 1e-12:
            problems.append("cycle perturbation lowered power")

    return _result(
        "flow-properties",
        not problems,
        problems[0] if problems else "superposition, KCL, triangle, monotonicity, series/parallel, power minimality",
        t0,
    )


# ---------------------------------------------------------------------------
# runner


ALL_CHECKS: dict[str, Callable[[], CheckResult]] = {
    "golden-values": check_golden_values,
    "oracle-equivalence": check_oracle_equivalence,
    "small-case-optimality": check_small_case_optimality,
    "sink-rooting-inequality": check_sink_rooting_inequality,
    "split-pipeline": check_split_pipeline,
    "cubic-rooting": check_cubic_rooting,
    "lower-bound-certificates": check_lower_bound_certificates,
    "tree-rooting-frequency": check_tree_rooting_frequency,
    "queen-bee-suite": check_queen_bee_suite,
    "split-fixed-point": check_split_fixed_point,
    "flow-properties": check_flow_properties,
}


def run_checks(name_filter: str | None = None) -> list[CheckResult]:
    results = []
    for name, fn in ALL_CHECKS.items():
        if name_filter and name_filter not in name:
            continue
        results.append(fn())
    return results
