"""Closed-form lower bounds, certificates, queen-bee theory, and bound envelopes.

Everything here is exact arithmetic on small formulas; the chord/discriminant
checks are done in rational arithmetic so there is no rounding doubt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .multigraph import RootedGraph

SPLIT_POINT_VALUE = 0.5271865  # rounded-up upper bound for alpha = 10/3


def lower_bound_one_step(alpha: float) -> float:
    """A(G) >= 1/alpha for any connected graph of average degree alpha."""
    if alpha < 2:
        raise ValueError("model needs average degree >= 2")
    return 1.0 / alpha


def lower_bound_nonneighbor(n: int, m: int) -> float:
    """A(G) >= 2/alpha - 4m/(n(n-1)), from R_xy >= 1/d_x + 1/d_y off edges."""
    alpha = 2.0 * m / n
    return 2.0 / alpha - 4.0 * m / (n * (n - 1))


def lower_bound_two_step_closed(alpha: float) -> float:
    """b(alpha) >= 1/(alpha - 1): the two-step (shorted second neighbourhood) bound."""
    if alpha <= 1:
        raise ValueError("need alpha > 1")
    return 1.0 / (alpha - 1.0)


@dataclass(frozen=True)
class TwoStepCertificate:
    """Per-vertex upper bounds on conductance-to-root after shorting distance >= 2.

    ``implied_B_lower = n / total`` lower-bounds B whenever the certificate is
    applicable (no leaf hangs off a non-root vertex; such a leaf makes a
    neighbour term degenerate, and an optimal graph never has one).
    """

    applicable: bool
    reason: str
    per_vertex_conductance_bound: Mapping[int, float]
    total: float
    implied_B_lower: float

    def budget(self, alpha: float, n: int) -> float:
        """The proof's ceiling (alpha - 1) n on the total."""
        return (alpha - 1.0) * n


def two_step_certificate(rg: RootedGraph) -> TwoStepCertificate:
    """Bound each vertex's two-step conductance by sum (1 + 1/(d_y-1))^-1 + e_x."""
    g = rg.graph
    for v in rg.nonroot_vertices():
        if g.degree(v) == 1 and rg.root_multiplicity(v) == 0:
            return TwoStepCertificate(
                applicable=False,
                reason=f"vertex {v} is a leaf not joined to the root",
                per_vertex_conductance_bound={},
                total=math.nan,
                implied_B_lower=math.nan,
            )
    bounds: dict[int, float] = {}
    for x in rg.nonroot_vertices():
        e_x = rg.root_multiplicity(x)
        total = float(e_x)
        for y, mult in g.adjacency[x].items():
            if y == rg.root:
                continue
            d_y = g.degree(y)
            total += mult / (1.0 + 1.0 / (d_y - 1.0))
        bounds[x] = total
    total = sum(bounds.values())
    n = rg.n_nonroot
    return TwoStepCertificate(
        applicable=True,
        reason="",
        per_vertex_conductance_bound=bounds,
        total=total,
        implied_B_lower=n / total,
    )


# ---------------------------------------------------------------------------
# upper-bound envelope


def regular_heuristic_value(alpha: float) -> float:
    """(alpha-1)/(alpha(alpha-2)): rooted resistance of the infinite regular tree."""
    if alpha <= 2:
        raise ValueError("need alpha > 2")
    return (alpha - 1.0) / (alpha * (alpha - 2.0))


@dataclass(frozen=True)
class BoundEnvelope:
    """Piecewise-linear lower convex hull of construction points (alpha, value)."""

    points: tuple[tuple[float, float], ...]
    hull: tuple[tuple[float, float], ...]

    def __call__(self, alpha: float) -> float:
        xs = [p[0] for p in self.hull]
        if not xs[0] <= alpha <= xs[-1]:
            raise ValueError(f"alpha {alpha} outside envelope domain [{xs[0]}, {xs[-1]}]")
        for (x0, y0), (x1, y1) in zip(self.hull, self.hull[1:]):
            if alpha <= x1:
                t = 0.0 if x1 == x0 else (alpha - x0) / (x1 - x0)
                return y0 + t * (y1 - y0)
        return self.hull[-1][1]

    def is_convex(self, tol: float = 1e-12) -> bool:
        h = self.hull
        for (x0, y0), (x1, y1), (x2, y2) in zip(h, h[1:], h[2:]):
            if (y1 - y0) / (x1 - x0) > (y2 - y1) / (x2 - x1) + tol:
                return False
        return True


def _lower_hull(points: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    pts = sorted(points)
    hull: list[tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            # keep only right turns (lower hull)
            if (x1 - x0) * (p[1] - y0) - (p[0] - x0) * (y1 - y0) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def upper_envelope(points: Sequence[tuple[float, float]]) -> BoundEnvelope:
    """Lower convex hull of upper-bound construction points; itself an upper bound."""
    if len(points) < 2:
        raise ValueError("need at least 2 points")
    if len({p[0] for p in points}) != len(points):
        raise ValueError("alphas must be distinct")
    return BoundEnvelope(points=tuple(sorted(points)), hull=tuple(_lower_hull(points)))


def default_envelope(k_max: int = 16) -> BoundEnvelope:
    """Envelope through the star (2, 1), the split point (10/3, 0.5271865), and
    the regular-tree curve at integer degrees 3..k_max."""
    pts = [(2.0, 1.0), (10.0 / 3.0, SPLIT_POINT_VALUE)]
    pts += [(float(k), regular_heuristic_value(k)) for k in range(3, k_max + 1)]
    return upper_envelope(pts)


_conjecture_cache: dict[int, BoundEnvelope] = {}


def _conjecture_hull(k_max: int, tol: float = 1e-6) -> BoundEnvelope:
    """Hull of the conjecture constraints, refined until stable at probe points."""
    if k_max in _conjecture_cache:
        return _conjecture_cache[k_max]
    probes = [2.5, 3.0, 3.3, 3.7, 4.5, float(k_max) - 0.5]
    prev = None
    env = None
    npts = 1024
    for _ in range(8):
        xs = [2.0 + (k_max - 2.0) * i / npts for i in range(1, npts + 1)]
        pts = [(2.0, 1.0)] + [(x, regular_heuristic_value(x)) for x in xs if x > 2.0]
        env = upper_envelope(pts)
        vals = [env(p) for p in probes]
        if prev is not None and max(abs(a - b) for a, b in zip(vals, prev)) < tol:
            break
        prev = vals
        npts *= 2
    _conjecture_cache[k_max] = env
    return env


def conjectured_lower_envelope(alpha: float, k_max: int = 16) -> float:
    """The maximal convex function below 1 at 2 and below the regular-tree curve.

    Computed as the lower convex hull of the constraint set on a refining
    grid until stable.  Observational only: it is the conjectured shape of
    the optimum, never asserted against graphs.
    """
    if alpha < 2 or alpha > k_max:
        raise ValueError(f"alpha must lie in [2, {k_max}]")
    if k_max < 16:
        raise ValueError("need k_max >= 16")
    return _conjecture_hull(k_max)(alpha)


# ---------------------------------------------------------------------------
# queen-bee model


def qb_component_lower(s: int, t: int, exact: bool = False) -> float:
    """Lower bound on a legal component's total resistance to the root.

    The component has s vertices and conductance budget 2s - 1 + t.  The
    linear bound (s+2)/3 - 2t/3 is floored by the cut bound s/(2s-1+t);
    ``exact`` uses the sharp 1/(t+1) for single-vertex components.
    """
    if s < 1 or t < 0:
        raise ValueError("need s >= 1 and t >= 0")
    if exact and s == 1:
        return 1.0 / (t + 1.0)
    linear = (s + 2.0) / 3.0 - 2.0 * t / 3.0
    floor = s / (2.0 * s - 1.0 + t)
    return max(linear, floor)


def qb_lower(alpha: float) -> float:
    """Queen-bee lower bound: (5-alpha)/3 up to 3.5, then 1/(alpha - 3/2)."""
    if alpha < 2:
        raise ValueError("need alpha >= 2")
    if alpha <= 3.5:
        return (5.0 - alpha) / 3.0
    return 1.0 / (alpha - 1.5)


@dataclass(frozen=True)
class QBGapRow:
    alpha: float
    envelope: float
    qb_bound: float
    margin: float
    strict: bool


def qb_gap_check(alpha_grid: Sequence[float], envelope: BoundEnvelope | None = None) -> list[QBGapRow]:
    """Envelope vs queen-bee bound on a grid; strict separation for alpha > 2."""
    env = envelope or default_envelope()
    rows = []
    for a in alpha_grid:
        e, q = env(a), qb_lower(a)
        rows.append(QBGapRow(alpha=a, envelope=e, qb_bound=q, margin=q - e, strict=e < q))
    return rows


# ---------------------------------------------------------------------------
# chord-vs-queen-bee comparisons (exact arithmetic)


def _curve(x: Fraction) -> Fraction:
    return (x - 1) / (x * (x - 2))


def regular_chord_discriminant(t: int) -> Fraction:
    """Discriminant of the quadratic comparing the integer-degree chord of the
    regular-tree curve on [t, t+1] against the queen-bee bound 1/(x - 3/2).

    Negative means the chord lies strictly below the queen-bee bound.  The
    direct computation is cross-checked against the closed rational form
    -(8t^5 - 41t^4 + 66t^3 - 71t^2 + 38t - 1) / (4 (t+1)^2 (t-1)^2 t^2 (t-2)^2).
    """
    if t < 4:
        raise ValueError("the positivity argument needs t >= 4")
    tf = Fraction(t)
    l = _curve(tf)
    dl = _curve(tf + 1) - l
    a = dl
    b = l - dl * (tf + Fraction(3, 2))
    c = 3 * tf * dl / 2 - 3 * l / 2 - 1
    disc = b * b - 4 * a * c
    num = 8 * tf**5 - 41 * tf**4 + 66 * tf**3 - 71 * tf**2 + 38 * tf - 1
    den = 4 * (tf + 1) ** 2 * (tf - 1) ** 2 * tf**2 * (tf - 2) ** 2
    closed = -num / den
    if disc != closed:
        raise AssertionError(f"discriminant mismatch at t={t}: {disc} vs {closed}")
    return disc


def shifted_quintic(s: int) -> int:
    """Numerator of the discriminant after substituting t = s + 4."""
    return 8 * s**5 + 119 * s**4 + 690 * s**3 + 1905 * s**2 + 2382 * s + 935


@dataclass(frozen=True)
class ChordSegmentReport:
    """The two hand-checkable comparisons on [10/3, 4] done from first principles.

    The chord runs through (10/3, 0.528) and (4, 3/8); 0.528 is the split
    construction's bound rounded up, which is what makes the printed
    coefficients round.  ``quad_*`` describe chord(x) = 1/(x - 3/2) rearranged
    to a quadratic; ``linear_root`` solves (5-x)/3 = chord(x).
    """

    slope: float
    intercept: float
    quad_a: float
    quad_b: float
    quad_c: float
    discriminant: float
    linear_root: float
    discriminant_exact_constant: float


def chord_segment_checks() -> ChordSegmentReport:
    """Recompute the two chord comparisons; both must show no crossing below 4."""
    y0 = Fraction(528, 1000)        # rounded-up split-point bound
    x0 = Fraction(10, 3)
    y1 = Fraction(3, 8)
    x1 = Fraction(4)
    slope = (y1 - y0) / (x1 - x0)
    intercept = y0 - slope * x0
    # chord(x) * (x - 3/2) - 1 = 0
    a = slope
    b = intercept - slope * Fraction(3, 2)
    c = -Fraction(3, 2) * intercept - 1
    disc = b * b - 4 * a * c
    # (5 - x)/3 - chord(x) = 0
    lin_root = (Fraction(5, 3) - intercept) / (slope + Fraction(1, 3))
    # same discriminant with the unrounded split constant: still negative
    y0e = Fraction(5271865, 10**7)
    se = (y1 - y0e) / (x1 - x0)
    ie = y0e - se * x0
    disc_e = (ie - se * Fraction(3, 2)) ** 2 - 4 * se * (-Fraction(3, 2) * ie - 1)
    return ChordSegmentReport(
        slope=float(slope),
        intercept=float(intercept),
        quad_a=float(a),
        quad_b=float(b),
        quad_c=float(c),
        discriminant=float(disc),
        linear_root=float(lin_root),
        discriminant_exact_constant=float(disc_e),
    )


def bound_sweep_rows(alphas: Sequence[float], k_max: int = 16) -> list[dict]:
    """Rows for the bound-curve CSV: every bound at each grid alpha."""
    env = default_envelope(k_max)
    out = []
    for a in alphas:
        e = env(a)
        q = qb_lower(a)
        out.append(
            {
                "alpha": a,
                "lower_two_step": lower_bound_two_step_closed(a),
                "qb_lower": q,
                "upper_envelope": e,
                "conjecture_f": conjectured_lower_envelope(a, k_max),
                "qb_margin": q - e,
            }
        )
    return out
