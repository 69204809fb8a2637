"""Labelled connected marked graphs (lcmg's).

An lcmg is a directed graph with a basepoint, at most one directed edge per
ordered pair of vertices (so at most one self-loop per vertex) and a complex
label on every edge, including label 0.  Distances are lengths of directed
paths from the basepoint; balls are full induced subgraphs.
"""

from __future__ import annotations

import json
import warnings
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Sequence

from .errors import ResourceCapError, StructuralError
from .groups import DEFAULT_QUOTIENT_CAP, GroupModel, QuotientChain, Space
from .ring import SymmetrizedSupport

LABEL_TOL = 1e-12
DEFAULT_RADIUS_CAP = 16
DEFAULT_BALL_CAP = 2_000_000


class Lcmg:
    """Finite lcmg on vertices ``0..n-1`` (with display names) and a basepoint."""

    def __init__(
        self,
        vertices: Sequence[Hashable],
        basepoint: int,
        edges: Mapping[tuple[int, int], complex] | Iterable[tuple[int, int, complex]],
    ):
        self.vertices = tuple(vertices)
        n = len(self.vertices)
        if not 0 <= basepoint < n:
            raise StructuralError(f"basepoint {basepoint} not among {n} vertices")
        self.basepoint = basepoint
        if isinstance(edges, Mapping):
            items = [(u, v, c) for (u, v), c in edges.items()]
        else:
            items = list(edges)
        table: dict[tuple[int, int], complex] = {}
        for u, v, c in items:
            if not (0 <= u < n and 0 <= v < n):
                raise StructuralError(f"edge ({u}, {v}) references a missing vertex")
            if (u, v) in table:
                raise StructuralError(f"parallel directed edges ({u}, {v})")
            table[(u, v)] = complex(c)
        self.edges = dict(sorted(table.items()))
        if len(set(self.vertices)) != n:
            raise StructuralError("vertex names must be distinct")
        if self._weak_component_size() != n:
            raise StructuralError("graph is not connected")

    def _weak_component_size(self) -> int:
        nbrs: list[list[int]] = [[] for _ in self.vertices]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        seen = {self.basepoint}
        stack = [self.basepoint]
        while stack:
            for y in nbrs[stack.pop()]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen)

    def __len__(self) -> int:
        return len(self.vertices)

    def __repr__(self) -> str:
        return f"Lcmg(n={len(self)}, edges={len(self.edges)}, basepoint={self.basepoint})"

    @cached_property
    def index(self) -> dict[Hashable, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def out_edges(self) -> list[list[tuple[int, complex]]]:
        adj: list[list[tuple[int, complex]]] = [[] for _ in self.vertices]
        for (u, v), c in self.edges.items():
            adj[u].append((v, c))
        return adj

    @cached_property
    def in_edges(self) -> list[list[tuple[int, complex]]]:
        adj: list[list[tuple[int, complex]]] = [[] for _ in self.vertices]
        for (u, v), c in self.edges.items():
            adj[v].append((u, c))
        return adj

    @cached_property
    def distances(self) -> list[int | None]:
        """Directed distance from the basepoint; None when unreachable."""
        dist: list[int | None] = [None] * len(self.vertices)
        dist[self.basepoint] = 0
        queue = deque([self.basepoint])
        while queue:
            u = queue.popleft()
            for v, _ in self.out_edges[u]:
                if dist[v] is None:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    def to_json(self) -> dict:
        def name(v):
            return list(v) if isinstance(v, tuple) else v

        return {
            "vertices": [name(v) for v in self.vertices],
            "basepoint": self.basepoint,
            "edges": [[u, v, c.real, c.imag] for (u, v), c in self.edges.items()],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: Mapping) -> "Lcmg":
        def name(v):
            return tuple(v) if isinstance(v, list) else v

        return cls(
            [name(v) for v in data["vertices"]],
            int(data["basepoint"]),
            [(int(u), int(v), complex(re, im)) for u, v, re, im in data["edges"]],
        )


@dataclass(frozen=True, eq=False)
class Ball:
    graph: Lcmg
    radius: int
    source: str
    center: Hashable


def _restrict(g: Lcmg, keep: Sequence[int]) -> Lcmg:
    pos = {old: new for new, old in enumerate(keep)}
    edges = {
        (pos[u], pos[v]): c for (u, v), c in g.edges.items() if u in pos and v in pos
    }
    return Lcmg([g.vertices[i] for i in keep], pos[g.basepoint], edges)


def extract_ball(g: Lcmg, r: int) -> Ball:
    """Full subgraph on the vertices at directed distance <= r from the basepoint."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    keep = [i for i, d in enumerate(g.distances) if d is not None and d <= r]
    return Ball(_restrict(g, keep), r, "extract", g.vertices[g.basepoint])


def _as_support(space: Space, sym: SymmetrizedSupport, chain: QuotientChain | None, level: int | None):
    if sym.space == space:
        return sym
    if chain is not None and sym.space == chain.model:
        return sym.project(chain, level)
    raise StructuralError(f"support over {sym.space.describe()} does not fit {space.describe()}")


def cayley_lcmg(space: Space, sym: SymmetrizedSupport, cap: int = DEFAULT_QUOTIENT_CAP) -> Lcmg:
    """Cayley lcmg of a finite group: edge x -> x s labelled by the label of s.

    Only the component reachable from the identity by directed paths is kept;
    a warning is issued when the support does not generate the whole group.
    """
    if not space.finite:
        raise StructuralError("use cayley_ball_infinite for infinite groups")
    order_total = space.order
    if order_total > cap:
        raise ResourceCapError("group order", order_total, cap)
    if sym.space != space:
        raise StructuralError("support is not over this group")
    ident = space.identity()
    gens = sym.items()
    index = {ident: 0}
    order = [ident]
    queue = deque([ident])
    while queue:
        x = queue.popleft()
        for s, _ in gens:
            y = space.mul(x, s)
            if y not in index:
                index[y] = len(order)
                order.append(y)
                queue.append(y)
    if len(order) < order_total:
        warnings.warn(
            f"support generates a subgroup of order {len(order)} in a group of order "
            f"{order_total}; using the component of the identity",
            stacklevel=2,
        )
    reached = sorted(order)
    pos = {x: i for i, x in enumerate(reached)}
    edges = {}
    for x in reached:
        for s, c in gens:
            edges[(pos[x], pos[space.mul(x, s)])] = c
    return Lcmg(reached, pos[ident], edges)


def cayley_lcmg_finite(
    chain: QuotientChain, level: int, sym: SymmetrizedSupport, cap: int = DEFAULT_QUOTIENT_CAP
) -> Lcmg:
    """Cayley lcmg of G/K_n for the projected support pi_n(S).

    ``sym`` may live on G (it is projected, merged-coset labels summed) or
    already on the quotient.
    """
    q = chain.quotient(level)
    return cayley_lcmg(q, _as_support(q, sym, chain, level), cap)


def cayley_ball(
    space: Space,
    sym: SymmetrizedSupport,
    r: int,
    radius_cap: int = DEFAULT_RADIUS_CAP,
    size_cap: int = DEFAULT_BALL_CAP,
) -> Ball:
    """Radius-r ball around the identity of the Cayley lcmg of ``space``.

    Vertices are ordered by distance, then by canonical representative.
    """
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if r > radius_cap:
        raise ResourceCapError("ball radius", r, radius_cap)
    if sym.space != space:
        raise StructuralError("support is not over this group")
    ident = space.identity()
    gens = sym.items()
    steps = [s for s, _ in gens]
    layers = [[ident]]
    seen = {ident}
    for _ in range(r):
        nxt = set()
        for x in layers[-1]:
            for s in steps:
                y = space.mul(x, s)
                if y not in seen:
                    seen.add(y)
                    nxt.add(y)
        if len(seen) > size_cap:
            raise ResourceCapError("ball size", len(seen), size_cap)
        if not nxt:
            break
        layers.append(sorted(nxt))
    verts = [x for layer in layers for x in layer]
    pos = {x: i for i, x in enumerate(verts)}
    edges = {}
    for x in verts:
        i = pos[x]
        for s, c in gens:
            j = pos.get(space.mul(x, s))
            if j is not None:
                edges[(i, j)] = c
    return Ball(Lcmg(verts, 0, edges), r, f"cayley:{space.describe()}", ident)


def cayley_ball_infinite(
    model: GroupModel, sym: SymmetrizedSupport, r: int, radius_cap: int = DEFAULT_RADIUS_CAP
) -> Ball:
    """Exact radius-r ball of the Cayley lcmg of the (infinite) group ``model``."""
    return cayley_ball(model, sym, r, radius_cap)


def graph_involution(g: Lcmg) -> Lcmg:
    """Reverse every edge and conjugate its label."""
    return Lcmg(g.vertices, g.basepoint, {(v, u): c.conjugate() for (u, v), c in g.edges.items()})


def _close(a: complex, b: complex, tol: float) -> bool:
    return abs(a.real - b.real) <= tol and abs(a.imag - b.imag) <= tol


def is_self_involutive(g: Lcmg, tol: float = LABEL_TOL) -> bool:
    for (u, v), c in g.edges.items():
        back = g.edges.get((v, u))
        if back is None or not _close(back, c.conjugate(), tol):
            return False
    return True


def _label_classes(labels: Iterable[complex], tol: float) -> dict[complex, tuple[int, int]]:
    labels = set(labels)

    def cluster(values):
        ids = {}
        cid = -1
        prev = None
        for x in sorted(set(values)):
            if prev is None or x - prev > tol:
                cid += 1
            ids[x] = cid
            prev = x
        return ids

    re_ids = cluster(c.real for c in labels)
    im_ids = cluster(c.imag for c in labels)
    return {c: (re_ids[c.real], im_ids[c.imag]) for c in labels}


def _refined_colors(a: Lcmg, b: Lcmg, cls: dict[complex, tuple[int, int]]):
    """Joint colour refinement of both graphs; colours are comparable across them."""

    def initial(g: Lcmg):
        cols = []
        for i, d in enumerate(g.distances):
            loop = g.edges.get((i, i))
            cols.append((
                i == g.basepoint,
                -1 if d is None else d,
                None if loop is None else cls[loop],
                len(g.out_edges[i]),
                len(g.in_edges[i]),
            ))
        return cols

    raw = (initial(a), initial(b))
    n_classes = -1
    while True:
        ids: dict = {}
        cols = tuple([ids.setdefault(sig, len(ids)) for sig in r] for r in raw)
        if len(ids) == n_classes:
            return cols
        n_classes = len(ids)
        raw = tuple(
            [
                (
                    c[i],
                    tuple(sorted((cls[l], c[v]) for v, l in g.out_edges[i])),
                    tuple(sorted((cls[l], c[u]) for u, l in g.in_edges[i])),
                )
                for i in range(len(g))
            ]
            for g, c in ((a, cols[0]), (b, cols[1]))
        )


def find_isomorphism(a: Lcmg, b: Lcmg, tol: float = LABEL_TOL) -> list[int] | None:
    """Basepoint-, edge- and label-preserving bijection a -> b, or None.

    Backtracking over a breadth-first order of ``a``; each vertex is matched
    among the neighbours of its already-matched parent that carry the same
    label and refinement colour.
    """
    n = len(a)
    if n != len(b) or len(a.edges) != len(b.edges):
        return None
    if a.basepoint == b.basepoint and all(
        (e in b.edges and _close(c, b.edges[e], tol)) for e, c in a.edges.items()
    ):
        return list(range(n))
    cls =_label_classes(list(a.edges.values()) + list(b.edges.values()), tol)
    if sorted(map(cls.get, a.edges.values())) != sorted(map(cls.get, b.edges.values())):
        return None
    col_a, col_b = _refined_colors(a, b, cls)
    if sorted(col_a) != sorted(col_b) or col_a[a.basepoint] != col_b[b.basepoint]:
        return None

    # visiting order: BFS over the underlying undirected graph, each vertex with
    # an already-visited anchor and the edge that connects them
    order = [a.basepoint]
    anchor: list[tuple[int, bool, tuple[int, int]] | None] = [None]
    seen = {a.basepoint}
    head = 0
    while head < len(order):
        u = order[head]
        head += 1
        for v, l in a.out_edges[u]:
            if v not in seen:
                seen.add(v)
                order.append(v)
                anchor.append((u, True, cls[l]))
        for v, l in a.in_edges[u]:
            if v not in seen:
                seen.add(v)
                order.append(v)
                anchor.append((u, False, cls[l]))

    b_out = [{v: cls[l] for v, l in row} for row in b.out_edges]
    b_in = [{u: cls[l] for u, l in row} for row in b.in_edges]
    a_out = [{v: cls[l] for v, l in row} for row in a.out_edges]
    a_in = [{u: cls[l] for u, l in row} for row in a.in_edges]

    f = [-1] * n
    used = [False] * n

    def candidates(depth: int) -> list[int]:
        u = order[depth]
        if depth == 0:
            return [b.basepoint]
        p, forward, lab = anchor[depth]
        fp = f[p]
        pool = b_out[fp] if forward else b_in[fp]
        return [x for x, lx in pool.items() if lx == lab and not used[x] and col_b[x] == col_a[u]]

    def consistent(u: int, x: int) -> bool:
        # edges between u and matched vertices (and the self-loop) must correspond
        n_a = 0
        for v, lab in a_out[u].items():
            if v == u:
                if b_out[x].get(x) != lab:
                    return False
                n_a += 1
            elif f[v] >= 0:
                if b_out[x].get(f[v]) != lab:
                    return False
                n_a += 1
        for v, lab in a_in[u].items():
            if v != u and f[v] >= 0:
                if b_in[x].get(f[v]) != lab:
                    return False
                n_a += 1
        n_b = sum(1 for y in b_out[x] if y == x or (y != x and used[y]))
        n_b += sum(1 for y in b_in[x] if y != x and used[y])
        return n_a == n_b

    stack: list[list[int]] = [candidates(0)]
    while stack:
        cands = stack[-1]
        u = order[len(stack) - 1]
        if f[u] >= 0:
            used[f[u]] = False
            f[u] = -1
        while cands:
            x = cands.pop()
            if consistent(u, x):
                f[u] = x
                used[x] = True
                break
        if f[u] < 0:
            stack.pop()
            continue
        if len(stack) == n:
            break
        stack.append(candidates(len(stack)))
    else:
        return None

    for (u, v), c in a.edges.items():
        d = b.edges.get((f[u], f[v]))
        if d is None or not _close(c, d, tol):
            return None
    return f


def lcmg_isomorphic(a: Lcmg, b: Lcmg, tol: float = LABEL_TOL) -> bool:
    return find_isomorphism(a, b, tol) is not None


def _graph_of(x: Lcmg | Ball) -> tuple[Lcmg, int | None]:
    if isinstance(x, Ball):
        return x.graph, x.radius
    return x, None


@dataclass(frozen=True)
class MetricValue:
    """Distance restricted to radii <= r_max.

    ``radius`` is the largest radius with isomorphic balls (-1 if none).  When
    ``capped`` the balls agree through r_max and ``value`` is only an upper bound.
    """

    value: Fraction
    capped: bool
    radius: int

    def __str__(self) -> str:
        rel = "<=" if self.capped else "="
        return f"D {rel} {self.value}"


def ball_agreement_radius(a: Lcmg | Ball, b: Lcmg | Ball, r_max: int) -> int:
    """Largest r <= r_max for which the radius-r balls are lcmg isomorphic, else -1."""
    ga, ra = _graph_of(a)
    gb, rb = _graph_of(b)
    for lim in (ra, rb):
        if lim is not None and lim < r_max:
            raise ValueError(f"ball of radius {lim} cannot certify radius {r_max}")
    best = -1
    for r in range(r_max + 1):
        ba, bb = extract_ball(ga, r).graph, extract_ball(gb, r).graph
        if len(ba) != len(bb) or not lcmg_isomorphic(ba, bb):
            break
        best = r
    return best


def metric_D(a: Lcmg | Ball, b: Lcmg | Ball, r_max: int) -> MetricValue:
    """inf of 1/(n+1) over n <= r_max with isomorphic radius-n balls (1 if none)."""
    r = ball_agreement_radius(a, b, r_max)
    if r < 0:
        return MetricValue(Fraction(1), False, -1)
    return MetricValue(Fraction(1, r + 1), r == r_max, r)
