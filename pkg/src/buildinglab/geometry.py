"""Vertex-link geometries: PG(2, q), the symplectic quadrangle W(q) and K_{q+1,q+1}.

Projective points are stored as tuples of field-element indices scaled so
that the first nonzero coordinate is 1. The symplectic form on F_q^4 is

    <x, y> = x1 y3 - x3 y1 + x2 y4 - x4 y2.

Any nondegenerate alternating form gives an isomorphic quadrangle.
"""
from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .scalars import DEFAULT_CAP, FiniteField
from .errors import MalformedInput, OrderTooLarge

PROJECTIVE_PLANE = "ProjectivePlane"
SYMPLECTIC_QUADRANGLE = "SymplecticQuadrangle"

SL3_LINK = "SL3Link"
SP4_SPECIAL_LINK = "Sp4SpecialLink"
SP4_NONSPECIAL_LINK = "Sp4NonSpecialLink"
LINK_KINDS = (SL3_LINK, SP4_SPECIAL_LINK, SP4_NONSPECIAL_LINK)

GONALITY = {SL3_LINK: 3, SP4_SPECIAL_LINK: 4, SP4_NONSPECIAL_LINK: 2}


@dataclass(frozen=True)
class IncidenceGeometry:
    kind: str
    field: FiniteField
    points: list
    lines: list

    @property
    def q(self) -> int:
        return self.field.q

    def flags(self):
        for j, line in enumerate(self.lines):
            for i in line:
                yield i, j


@dataclass
class LinkGraph:
    """A finite bipartite link graph with a fixed edge orientation."""

    kind: str
    q: int
    vertices: list
    edges: list
    _adjacency: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbors(self) -> list[list[int]]:
        nbrs = [[] for _ in self.vertices]
        for u, w in self.edges:
            nbrs[u].append(w)
            nbrs[w].append(u)
        return nbrs

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_vertices, dtype=np.int64)
        for u, w in self.edges:
            deg[u] += 1
            deg[w] += 1
        return deg

    def adjacency(self) -> np.ndarray:
        if self._adjacency is None:
            adj = np.zeros((self.n_vertices, self.n_vertices), dtype=np.int64)
            for u, w in self.edges:
                adj[u, w] += 1
                adj[w, u] += 1
            self._adjacency = adj
        return self._adjacency

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "q": self.q,
            "vertices": [dict(v) for v in self.vertices],
            "edges": [[int(u), int(w)] for u, w in self.edges],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "LinkGraph":
        try:
            vertices = [
                {"id": int(v["id"]), "side": v.get("side"), "label": v.get("label", str(v["id"]))}
                for v in d["vertices"]
            ]
            edges = [(int(u), int(w)) for u, w in d["edges"]]
            graph = cls(kind=d["kind"], q=int(d["q"]), vertices=vertices, edges=edges)
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad graph description: {exc}") from exc
        ids = [v["id"] for v in vertices]
        if ids != list(range(len(ids))):
            raise MalformedInput("vertex ids must be 0..N-1 in order")
        for u, w in edges:
            if not (0 <= u < len(ids) and 0 <= w < len(ids)) or u == w:
                raise MalformedInput(f"bad edge {(u, w)}")
        return graph

    @classmethod
    def from_json(cls, text: str) -> "LinkGraph":
        return cls.from_dict(json.loads(text))


# -- projective coordinates ----------------------------------------------------

def _check_order(field_: FiniteField, cap: int):
    if field_.q > cap:
        raise OrderTooLarge(f"q = {field_.q} exceeds cap {cap}")


def projective_points(field_: FiniteField, dim: int) -> list[tuple]:
    """Canonical representatives of the 1-dim subspaces of F_q^dim, in lexicographic order."""
    pts = []
    for v in itertools.product(range(field_.q), repeat=dim):
        lead = next((c for c in v if c), None)
        if lead == 1:
            pts.append(v)
    return pts


def normalize(field_: FiniteField, v) -> tuple:
    lead = next((c for c in v if c), None)
    if lead is None:
        raise ValueError("zero vector has no projective class")
    inv = field_.inv(lead)
    return tuple(field_.mul(c, inv) for c in v)


def dot(field_: FiniteField, a, b) -> int:
    s = 0
    for x, y in zip(a, b):
        s = field_.add(s, field_.mul(x, y))
    return s


def symplectic_form(field_: FiniteField, x, y) -> int:
    m, a, s = field_.mul, field_.add, field_.sub
    return a(s(m(x[0], y[2]), m(x[2], y[0])), s(m(x[1], y[3]), m(x[3], y[1])))


def projective_plane(field_: FiniteField, cap: int = DEFAULT_CAP) -> IncidenceGeometry:
    """PG(2, q): lines are kernels of the canonical functionals."""
    _check_order(field_, cap)
    points = projective_points(field_, 3)
    index = {p: i for i, p in enumerate(points)}
    lines = []
    for functional in projective_points(field_, 3):
        lines.append(tuple(index[p] for p in points if dot(field_, functional, p) == 0))
    return IncidenceGeometry(PROJECTIVE_PLANE, field_, points, lines)


def symplectic_quadrangle(field_: FiniteField, cap: int = DEFAULT_CAP) -> IncidenceGeometry:
    """W(q): all points of P^3(F_q) and the totally isotropic lines."""
    _check_order(field_, cap)
    points = projective_points(field_, 4)
    index = {p: i for i, p in enumerate(points)}
    seen = set()
    lines = []
    f = field_
    for i, x in enumerate(points):
        for j in range(i + 1, len(points)):
            y = points[j]
            if symplectic_form(f, x, y) != 0:
                continue
            span = set()
            for a in range(f.q):
                for b in range(f.q):
                    if a == 0 and b == 0:
                        continue
                    v = tuple(f.add(f.mul(a, xc), f.mul(b, yc)) for xc, yc in zip(x, y))
                    span.add(index[normalize(f, v)])
            key = tuple(sorted(span))
            if key not in seen:
                seen.add(key)
                lines.append(key)
    lines.sort()
    return IncidenceGeometry(SYMPLECTIC_QUADRANGLE, field_, points, lines)


def is_totally_isotropic(field_: FiniteField, pts) -> bool:
    return all(symplectic_form(field_, x, y) == 0 for x in pts for y in pts)


# -- link graphs ---------------------------------------------------------------

def _fmt_point(field_, p):
    return "(" + ",".join(str(c) for c in p) + ")"


def incidence_graph(g: IncidenceGeometry) -> LinkGraph:
    """Point vertices first, then line vertices; every edge is oriented point -> line."""
    kind = SL3_LINK if g.kind == PROJECTIVE_PLANE else SP4_SPECIAL_LINK
    n_pts = len(g.points)
    vertices = [{"id": i, "side": "point", "label": _fmt_point(g.field, p)} for i, p in enumerate(g.points)]
    vertices += [
        {"id": n_pts + j, "side": "line", "label": "L" + str(j)} for j in range(len(g.lines))
    ]
    edges = sorted((i, n_pts + j) for i, j in g.flags())
    return LinkGraph(kind=kind, q=g.q, vertices=vertices, edges=edges)


def complete_bipartite(q: int) -> LinkGraph:
    """K_{q+1,q+1}, the generalized 2-gon, oriented left -> right."""
    if q < 1:
        raise ValueError("q must be >= 1")
    n = q + 1
    vertices = [{"id": i, "side": None, "label": f"a{i}"} for i in range(n)]
    vertices += [{"id": n + i, "side": None, "label": f"b{i}"} for i in range(n)]
    edges = [(i, n + j) for i in range(n) for j in range(n)]
    return LinkGraph(kind=SP4_NONSPECIAL_LINK, q=q, vertices=vertices, edges=edges)


def link_graph(kind: str, q: int) -> LinkGraph:
    """Build the link graph of the given kind from the field of order ``q``."""
    from .scalars import field_of_order

    if kind == SP4_NONSPECIAL_LINK:
        return complete_bipartite(q)
    field_ = field_of_order(q)
    if kind == SL3_LINK:
        return incidence_graph(projective_plane(field_))
    if kind == SP4_SPECIAL_LINK:
        return incidence_graph(symplectic_quadrangle(field_))
    raise ValueError(f"unknown link kind {kind!r}")


# -- validation ----------------------------------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    n: int
    girth: float
    diameter: float
    bipartite: bool
    regular: bool
    degree: int | None
    sides: tuple
    passed: bool

    def to_dict(self):
        return {
            "n": self.n,
            "girth": self.girth,
            "diameter": self.diameter,
            "bipartite": self.bipartite,
            "regular": self.regular,
            "degree": self.degree,
            "sides": list(self.sides),
            "passed": self.passed,
        }


def bfs_distances(nbrs, root):
    dist = [-1] * len(nbrs)
    dist[root] = 0
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in nbrs[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def girth(nbrs) -> float:
    """Length of a shortest cycle (inf for forests), by BFS from every vertex."""
    best = float("inf")
    for root in range(len(nbrs)):
        dist = [-1] * len(nbrs)
        parent = [-1] * len(nbrs)
        dist[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for w in nbrs[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif w != parent[u] or nbrs[u].count(w) > 1:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


def two_coloring(nbrs):
    color = [-1] * len(nbrs)
    for s in range(len(nbrs)):
        if color[s] >= 0:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in nbrs[u]:
                if color[w] < 0:
                    color[w] = 1 - color[u]
                    queue.append(w)
                elif color[w] == color[u]:
                    return None
    return color


def validate_generalized_polygon(g: LinkGraph, n: int | None = None) -> ValidationReport:
    """Girth 2n, diameter n, bipartite and (q+1)-regular. Failures are reported, not raised."""
    if n is None:
        n = GONALITY[g.kind]
    nbrs = g.neighbors()
    deg = g.degrees()
    regular = bool(np.all(deg == g.q + 1))
    colors = two_coloring(nbrs)
    bipartite = colors is not None
    sides = (colors.count(0), colors.count(1)) if bipartite else ()
    gi = girth(nbrs)
    diam = 0.0
    for root in range(len(nbrs)):
        dist = bfs_distances(nbrs, root)
        if min(dist) < 0:
            diam = float("inf")
            break
        diam = max(diam, max(dist))
    passed = bipartite and regular and gi == 2 * n and diam == n
    return ValidationReport(
        n=n,
        girth=gi,
        diameter=diam,
        bipartite=bipartite,
        regular=regular,
        degree=int(deg[0]) if regular else None,
        sides=sides,
        passed=passed,
    )


def dual_graph(g: LinkGraph) -> LinkGraph:
    """Swap the roles of the two sides (points <-> lines), reversing every edge."""
    colors = two_coloring(g.neighbors())
    order = [i for i in range(g.n_vertices) if colors[i] == 1] + [
        i for i in range(g.n_vertices) if colors[i] == 0
    ]
    relabel = {old: new for new, old in enumerate(order)}
    vertices = []
    for new, old in enumerate(order):
        v = dict(g.vertices[old])
        v["id"] = new
        vertices.append(v)
    edges = sorted((relabel[w], relabel[u]) for u, w in g.edges)
    return LinkGraph(kind=g.kind, q=g.q, vertices=vertices, edges=edges)
