"""Core multigraph representations and structural queries.

A :class:`Multigraph` is a loopless graph on vertices ``0..n-1`` whose
unordered vertex pairs carry positive integer edge multiplicities.  All
types here are immutable; every operation returns a new object, so they
are safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import IO, Iterable, Mapping, Union

Pair = tuple[int, int]

CANONICAL_MAX_VERTICES = 9


class EdgeListParseError(ValueError):
    """Raised for malformed edge-list input; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _pair(u: int, v: int) -> Pair:
    if u == v:
        raise ValueError(f"self-loop at vertex {u}")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Multigraph:
    """Loopless multigraph: vertex count plus pair -> multiplicity map."""

    n: int
    edges: Mapping[Pair, int]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        clean: dict[Pair, int] = {}
        for (u, v), mult in self.edges.items():
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"vertex pair ({u},{v}) out of range for n={self.n}")
            p = _pair(u, v)
            if mult < 1 or mult != int(mult):
                raise ValueError(f"edge {p} has invalid multiplicity {mult}")
            clean[p] = clean.get(p, 0) + int(mult)
        object.__setattr__(self, "edges", clean)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple]) -> "Multigraph":
        """Build from an iterable of ``(u, v)`` or ``(u, v, mult)`` tuples."""
        acc: dict[Pair, int] = {}
        for e in edges:
            u, v = e[0], e[1]
            mult = e[2] if len(e) > 2 else 1
            p = _pair(u, v)
            acc[p] = acc.get(p, 0) + mult
        return cls(n, acc)

    @cached_property
    def m(self) -> int:
        """Edge count, with multiplicity."""
        return sum(self.edges.values())

    @property
    def alpha(self) -> float:
        """Average degree 2m/n."""
        return 2.0 * self.m / self.n

    @cached_property
    def adjacency(self) -> tuple[dict[int, int], ...]:
        """Per-vertex map neighbour -> multiplicity."""
        adj: list[dict[int, int]] = [dict() for _ in range(self.n)]
        for (u, v), mult in self.edges.items():
            adj[u][v] = mult
            adj[v][u] = mult
        return tuple(adj)

    def mult(self, u: int, v: int) -> int:
        return self.edges.get(_pair(u, v), 0)

    def degree(self, v: int) -> int:
        """Degree of ``v`` counting multiplicity."""
        if not 0 <= v < self.n:
            raise ValueError(f"invalid vertex {v}")
        return sum(self.adjacency[v].values())

    def degrees(self) -> list[int]:
        return [self.degree(v) for v in range(self.n)]

    def neighbors(self, v: int) -> list[int]:
        return sorted(self.adjacency[v])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Multigraph)
            and self.n == other.n
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.edges.items()))))

    def relabel(self, perm: Mapping[int, int]) -> "Multigraph":
        """Apply a vertex permutation (old id -> new id)."""
        return Multigraph(
            self.n, {_pair(perm[u], perm[v]): k for (u, v), k in self.edges.items()}
        )


@dataclass(frozen=True)
class RootedGraph:
    """A multigraph with a distinguished root vertex."""

    graph: Multigraph
    root: int

    def __post_init__(self):
        if not 0 <= self.root < self.graph.n:
            raise ValueError(f"root {self.root} not a vertex")

    @property
    def n_nonroot(self) -> int:
        return self.graph.n - 1

    def root_multiplicity(self, x: int) -> int:
        """Number of edges joining ``x`` to the root."""
        return self.graph.mult(x, self.root) if x != self.root else 0

    def nonroot_vertices(self) -> list[int]:
        return [v for v in range(self.graph.n) if v != self.root]

    def leaf_locations(self) -> dict[str, list[int]]:
        """Degree-1 vertices, split by whether they hang off the root.

        Diagnostic only: we never assume leaves must attach to the root.
        """
        on_root, elsewhere = [], []
        for v in self.nonroot_vertices():
            if self.graph.degree(v) == 1:
                (on_root if self.root_multiplicity(v) == 1 else elsewhere).append(v)
        return {"on_root": on_root, "elsewhere": elsewhere}


@dataclass(frozen=True)
class WeightedNetwork:
    """Nonnegative real conductances on vertex pairs (unit resistor = 1.0)."""

    n: int
    conductance: Mapping[Pair, float]

    def __post_init__(self):
        clean: dict[Pair, float] = {}
        for (u, v), c in self.conductance.items():
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"pair ({u},{v}) out of range")
            if c < 0 or not math.isfinite(c):
                raise ValueError(f"conductance of {(u, v)} must be finite and >= 0")
            if c > 0:
                clean[_pair(u, v)] = clean.get(_pair(u, v), 0.0) + float(c)
        object.__setattr__(self, "conductance", clean)

    @property
    def total_conductance(self) -> float:
        return sum(self.conductance.values())


# ---------------------------------------------------------------------------
# structural queries


def is_connected(g: Multigraph) -> bool:
    """True iff a single component spans all vertices."""
    if g.n == 1:
        return True
    adj = g.adjacency
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == g.n


def girth(g: Multigraph) -> Union[int, float]:
    """Length of the shortest cycle; parallel edges count as a 2-cycle.

    Returns ``math.inf`` for forests.
    """
    if any(k >= 2 for k in g.edges.values()):
        return 2
    adj = [sorted(g.adjacency[v]) for v in range(g.n)]
    best = math.inf
    for s in range(g.n):
        # BFS from s; a cross edge between visited vertices closes a cycle.
        dist = {s: 0}
        parent = {s: -1}
        frontier = [s]
        depth = 0
        while frontier and (2 * depth + 1) < best:
            nxt = []
            for u in frontier:
                du = dist[u]
                for w in adj[u]:
                    if w not in dist:
                        dist[w] = du + 1
                        parent[w] = u
                        nxt.append(w)
                    elif w != parent[u] and dist[w] >= du:
                        cyc = du + dist[w] + 1
                        if cyc < best:
                            best = cyc
            frontier = nxt
            depth += 1
    return best if best < math.inf else math.inf


def merge_vertices(g: Multigraph, group: Iterable[int]) -> tuple[Multigraph, dict[int, int]]:
    """Identify all vertices of ``group`` into one; drop resulting self-loops.

    Returns the merged graph and the old->new vertex map.  The merged
    super-vertex keeps the smallest id of the group after compaction.
    """
    group = set(group)
    if not group:
        raise ValueError("empty merge group")
    keep = min(group)
    mapping: dict[int, int] = {}
    nxt = 0
    for v in range(g.n):
        if v in group and v != keep:
            continue
        mapping[v] = nxt
        nxt += 1
    for v in group:
        mapping[v] = mapping[keep]
    acc: dict[Pair, int] = {}
    for (u, v), mult in g.edges.items():
        a, b = mapping[u], mapping[v]
        if a == b:
            continue
        p = _pair(a, b)
        acc[p] = acc.get(p, 0) + mult
    return Multigraph(nxt, acc), mapping


def contract_edge_add_leaf(
    rg: RootedGraph,
    x: int,
    via: int | None = None,
    root_resistance: Mapping[int, float] | None = None,
) -> RootedGraph:
    """Contract one edge incident with ``x``, then hang a fresh leaf on the root.

    The contracted edge goes toward ``via`` when given; otherwise toward the
    neighbour of minimum resistance-to-root when ``root_resistance`` is
    supplied (the root scores 0), falling back to the lowest-indexed
    neighbour.  Self-loops created by the contraction are deleted, parallel
    edges are kept as multiplicities.  Vertex count is preserved and the edge
    count never grows.
    """
    g = rg.graph
    if x == rg.root:
        raise ValueError("cannot contract at the root")
    nbrs = g.neighbors(x)
    if not nbrs:
        raise ValueError(f"vertex {x} is isolated")
    if via is not None:
        if via not in nbrs:
            raise ValueError(f"{via} is not a neighbour of {x}")
        y = via
    elif root_resistance is not None:
        score = lambda w: 0.0 if w == rg.root else root_resistance[w]
        y = min(nbrs, key=lambda w: (score(w), w))
    else:
        y = nbrs[0]

    # Merge x into y, compacting ids.
    mapping: dict[int, int] = {}
    nxt = 0
    for v in range(g.n):
        if v == x:
            continue
        mapping[v] = nxt
        nxt += 1
    mapping[x] = mapping[y]
    acc: dict[Pair, int] = {}
    for (u, v), mult in g.edges.items():
        a, b = mapping[u], mapping[v]
        if a == b:
            continue  # loop from a contracted parallel edge
        p = _pair(a, b)
        acc[p] = acc.get(p, 0) + mult
    root = mapping[rg.root]
    leaf = nxt  # fresh vertex restores the count
    acc[_pair(root, leaf)] = acc.get(_pair(root, leaf), 0) + 1
    return RootedGraph(Multigraph(nxt + 1, acc), root)


# ---------------------------------------------------------------------------
# canonical form


def canonical_form(g: Multigraph, pin: int | None = None) -> bytes:
    """Isomorphism-invariant label of a small multigraph.

    Minimises the flattened lower-triangular multiplicity matrix over vertex
    orderings, branching only inside colour classes of an iterated
    degree-signature refinement.  Two graphs get the same label iff they are
    isomorphic (iff isomorphic by a root-preserving map when ``pin`` names a
    root vertex).  Capped at 9 vertices: the search module only needs tiny n.
    """
    n = g.n
    if n > CANONICAL_MAX_VERTICES:
        raise ValueError(f"canonical_form limited to {CANONICAL_MAX_VERTICES} vertices, got {n}")
    adj = g.adjacency
    if n == 1:
        return b"\x01"

    # Iterated refinement: colour = (old colour, multiset of neighbour colours).
    colour = [(1,) if v == pin else (0,) for v in range(n)]
    for _ in range(n):
        sig = [
            (colour[v], tuple(sorted((colour[w], k) for w, k in adj[v].items())))
            for v in range(n)
        ]
        order = sorted(set(sig))
        new = [(order.index(s),) for s in sig]
        if len(set(new)) == len(set(colour)):
            colour = new
            break
        colour = new

    # Position blocks follow the (invariant) colour order.
    classes: dict[tuple, list[int]] = {}
    for v in range(n):
        classes.setdefault(colour[v], []).append(v)
    blocks = [classes[c] for c in sorted(classes)]
    block_of_pos: list[list[int]] = []
    for b in blocks:
        block_of_pos.extend([b] * len(b))

    # Twin classes: vertices interchangeable by a transposition.
    twin = list(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            if twin[j] != j or colour[i] != colour[j]:
                continue
            if all(adj[i].get(w, 0) == adj[j].get(w, 0) for w in range(n) if w not in (i, j)):
                twin[j] = twin[i]

    mult = [[adj[u].get(w, 0) for w in range(n)] for u in range(n)]
    best: list[int] | None = None

    def extend(placed: list[int], used: set[int], label: list[int]):
        nonlocal best
        p = len(placed)
        if p == n:
            if best is None or label < best:
                best = list(label)
            return
        cands = [v for v in block_of_pos[p] if v not in used]
        rows: dict[int, tuple] = {}
        seen_twins = set()
        for v in cands:
            t = twin[v]
            if t in seen_twins:
                continue
            seen_twins.add(t)
            rows[v] = tuple(mult[v][w] for w in placed)
        lo = min(rows.values())
        for v, row in rows.items():
            if row == lo:
                extend(placed + [v], used | {v}, label + list(row))

    # The first position's block is fixed by colouring, so branching starts
    # constrained; greedy row-minimal branching is exact for the lex order.
    extend([], set(), [])
    assert best is not None
    return bytes([n]) + bytes(best)


# ---------------------------------------------------------------------------
# edge-list text format


def write_edge_list(obj: Union[Multigraph, RootedGraph], fh: IO[str]) -> None:
    """Write ``n <count>`` / optional ``root <id>`` / ``u v mult`` lines."""
    if isinstance(obj, RootedGraph):
        g, root = obj.graph, obj.root
    else:
        g, root = obj, None
    fh.write(f"n {g.n}\n")
    if root is not None:
        fh.write(f"root {root}\n")
    for (u, v), mult in sorted(g.edges.items()):
        fh.write(f"{u} {v} {mult}\n")


def read_edge_list(fh: IO[str]) -> Union[Multigraph, RootedGraph]:
    """Parse the edge-list format; whitespace-tolerant, ``#`` starts a comment."""
    n = None
    root = None
    edges: dict[Pair, int] = {}
    for lineno, raw in enumerate(fh, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        tok = text.split()
        try:
            if tok[0] == "n":
                n = int(tok[1])
            elif tok[0] == "root":
                root = int(tok[1])
            else:
                u, v = int(tok[0]), int(tok[1])
                mult = int(tok[2]) if len(tok) > 2 else 1
                p = _pair(u, v)
                edges[p] = edges.get(p, 0) + mult
        except (IndexError, ValueError) as exc:
            raise EdgeListParseError(str(exc), lineno) from exc
    if n is None:
        raise EdgeListParseError("missing 'n <count>' header", 0)
    try:
        g = Multigraph(n, edges)
        return RootedGraph(g, root) if root is not None else g
    except ValueError as exc:
        raise EdgeListParseError(str(exc), 0) from exc
