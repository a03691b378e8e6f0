"""Equivariant maps on voltage 2-complexes: energy, differential, descent, chain report.

A voltage complex is a finite quotient complex whose oriented edges carry an
isometry ("voltage") of the target space. An edge ``(u, v, g)`` says that
the lift of ``v`` adjacent to the chosen lift of ``u`` is ``g`` times the
chosen lift of ``v``, so an equivariant map ``f`` pays ``d(f(u), g f(v))^2``
on that edge. Walking a triangle along its oriented edges, the voltages
(inverted on edges walked backwards) must multiply to the identity.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import cat0, spectra
from .errors import (
    BadHolonomy,
    ClassViolation,
    InvalidIsometry,
    InvalidPoint,
    LinkMismatch,
    MalformedInput,
    MissingLambda,
)
from .geometry import LinkGraph

GENERIC = "generic"
SPECIAL = "special"
NONSPECIAL = "nonspecial"
VERTEX_CLASSES = (GENERIC, SPECIAL, NONSPECIAL)

HOLONOMY_TOL = 1e-9
DEFAULT_RADIUS = 1e3
GRADIENT_TOL = 1e-6

CONVERGED = "Converged"
MAX_ITER = "MaxIter"
DIVERGING = "Diverging"


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    voltage: cat0.Isometry


@dataclass(frozen=True)
class VoltageComplex:
    space: cat0.ModelSpace
    vertex_class: tuple
    edges: tuple
    # each triangle: three (edge index, +1 | -1) pairs, -1 = walked backwards
    triangles: tuple = ()
    q: int | None = None
    pinned: frozenset = frozenset()

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_class)

    def incidences(self, v: int) -> list[tuple[int, int]]:
        """(edge, end) pairs at ``v``; end 0 = v is the source, 1 = the target.

        These are the vertices of the link of ``v``; a loop contributes both ends.
        """
        out = []
        for i, e in enumerate(self.edges):
            if e.src == v:
                out.append((i, 0))
            if e.dst == v:
                out.append((i, 1))
        return out

    def triangle_vertices(self, t) -> tuple[int, int, int]:
        """Corners a0, a1, a2 with edge k walked from a_k to a_{k+1}."""
        return tuple(self._walk_start(e, s) for e, s in t)

    def _walk_start(self, e: int, s: int) -> int:
        edge = self.edges[e]
        return edge.src if s > 0 else edge.dst

    def _walk_end(self, e: int, s: int) -> int:
        edge = self.edges[e]
        return edge.dst if s > 0 else edge.src

    def triangle_counts(self) -> list[int]:
        counts = [0] * len(self.edges)
        for t in self.triangles:
            for e, _ in t:
                counts[e] += 1
        return counts

    def holonomy(self, t) -> cat0.Isometry:
        h = self.space.identity()
        for e, s in t:
            g = self.edges[e].voltage
            h = h @ (g if s > 0 else g.inverse())
        return h

    def link_graph(self, v: int) -> tuple[LinkGraph, list]:
        """Link of ``v`` with, for each link edge, the opposite quotient edge."""
        inc = self.incidences(v)
        index = {x: i for i, x in enumerate(inc)}
        edges, opposite = [], []
        for t in self.triangles:
            corners = self.triangle_vertices(t)
            for k in range(3):
                if corners[k] != v:
                    continue
                out_e, out_s = t[k]
                in_e, in_s = t[k - 1]
                a = index[(out_e, 0 if out_s > 0 else 1)]
                b = index[(in_e, 1 if in_s > 0 else 0)]
                edges.append((a, b))
                opposite.append(t[(k + 1) % 3][0])
        vertices = [
            {"id": i, "side": None, "label": f"e{e}{'-+'[end]}"} for i, (e, end) in enumerate(inc)
        ]
        return LinkGraph(kind="VertexLink", q=self.q or 0, vertices=vertices, edges=edges), opposite


@dataclass
class EquivariantMap:
    space: cat0.ModelSpace
    values: list

    def copy(self) -> "EquivariantMap":
        return EquivariantMap(self.space, list(self.values))

    def to_json_obj(self):
        return {"values": [self.space.point_to_json(x) for x in self.values]}


# -- loading ---------------------------------------------------------------------

def _parse_triangle(edges, raw, k):
    if not isinstance(raw, (list, tuple)) or len(raw) != 3:
        raise MalformedInput(f"triangle {k} must list three edges")
    explicit = []
    for item in raw:
        if isinstance(item, (list, tuple)) and len(item) == 2:
            e, s = int(item[0]), int(item[1])
            if s not in (1, -1):
                raise MalformedInput(f"triangle {k}: orientation must be +1 or -1")
            explicit.append((e, s))
        elif isinstance(item, int):
            explicit.append((item, 0))
        else:
            raise MalformedInput(f"triangle {k}: bad entry {item!r}")
    for e, _ in explicit:
        if not 0 <= e < len(edges):
            raise MalformedInput(f"triangle {k}: edge {e} out of range")

    def chains(tri):
        for i in range(3):
            e, s = tri[i]
            e2, s2 = tri[(i + 1) % 3]
            end = edges[e].dst if s > 0 else edges[e].src
            start = edges[e2].src if s2 > 0 else edges[e2].dst
            if end != start:
                return False
        return True

    options = [[(e, s)] if s else [(e, 1), (e, -1)] for e, s in explicit]
    for a in options[0]:
        for b in options[1]:
            for c in options[2]:
                if chains((a, b, c)):
                    return (a, b, c)
    raise MalformedInput(f"triangle {k}: edges do not form a closed walk")


def build_complex(space, vertex_class, edges, triangles=(), q=None, pinned=()) -> VoltageComplex:
    """Validate and assemble a complex; triangles may give bare edge indices."""
    vertex_class = tuple(vertex_class)
    for c in vertex_class:
        if c not in VERTEX_CLASSES:
            raise MalformedInput(f"unknown vertex class {c!r}")
    n = len(vertex_class)
    parsed = []
    for e in edges:
        if isinstance(e, Edge):
            parsed.append(e)
        else:
            u, v, g = e
            parsed.append(Edge(int(u), int(v), g))
    for i, e in enumerate(parsed):
        if not (0 <= e.src < n and 0 <= e.dst < n):
            raise MalformedInput(f"edge {i} refers to a missing vertex")
        if e.voltage.space != space:
            raise MalformedInput(f"edge {i}: voltage acts on a different space")
        if vertex_class[e.src] == NONSPECIAL and vertex_class[e.dst] == NONSPECIAL:
            raise ClassViolation(f"edge {i} joins two non-special vertices")
    tris = tuple(_parse_triangle(parsed, t, k) for k, t in enumerate(triangles))
    c = VoltageComplex(space, vertex_class, tuple(parsed), tris, q, frozenset(int(p) for p in pinned))
    for k, t in enumerate(tris):
        h = c.holonomy(t)
        dev = h.deviation(space.identity())
        if dev > HOLONOMY_TOL:
            raise BadHolonomy(f"triangle {k}: holonomy differs from identity by {dev:.3e}")
    if q is not None and q < 1:
        raise MalformedInput("q must be positive")
    return c


def load_complex(desc) -> VoltageComplex:
    """Parse the complex JSON (a dict or a JSON string)."""
    if isinstance(desc, str):
        try:
            desc = json.loads(desc)
        except json.JSONDecodeError as exc:
            raise MalformedInput(f"invalid JSON: {exc}") from exc
    if not isinstance(desc, dict):
        raise MalformedInput("complex description must be an object")
    try:
        space = cat0.space_from_dict(desc["space"])
    except (KeyError, ValueError, TypeError) as exc:
        raise MalformedInput(f"bad space: {exc}") from exc
    try:
        verts = desc["vertices"]
        classes = [v.get("class", GENERIC) if isinstance(v, dict) else GENERIC for v in verts]
        pinned = [i for i, v in enumerate(verts) if isinstance(v, dict) and v.get("pinned")]
        edges = []
        for e in desc.get("edges", []):
            g = space.isometry_from_json(e.get("voltage"))
            edges.append(Edge(int(e["from"]), int(e["to"]), g))
        triangles = desc.get("triangles", [])
        q = desc.get("q")
    except (KeyError, TypeError, AttributeError, ValueError, InvalidIsometry) as exc:
        raise MalformedInput(f"bad complex description: {exc}") from exc
    return build_complex(space, classes, edges, triangles, None if q is None else int(q), pinned)


def complex_to_json_obj(c: VoltageComplex) -> dict:
    out = {
        "space": c.space.to_dict(),
        "vertices": [
            {"class": k, **({"pinned": True} if i in c.pinned else {})}
            for i, k in enumerate(c.vertex_class)
        ],
        "edges": [
            {"from": e.src, "to": e.dst, "voltage": c.space.isometry_to_json(e.voltage)}
            for e in c.edges
        ],
        "triangles": [[[e, s] for e, s in t] for t in c.triangles],
    }
    if c.q is not None:
        out["q"] = c.q
    return out


def load_map(space: cat0.ModelSpace, obj, n: int) -> EquivariantMap:
    if isinstance(obj, str):
        obj = json.loads(obj)
    values = obj["values"] if isinstance(obj, dict) else obj
    if len(values) != n:
        raise MalformedInput(f"map has {len(values)} values for {n} vertices")
    try:
        return EquivariantMap(space, [space.point_from_json(x) for x in values])
    except (InvalidPoint, TypeError, ValueError) as exc:
        raise MalformedInput(f"bad map value: {exc}") from exc


def random_map(c: VoltageComplex, rng, scale=1.0) -> EquivariantMap:
    return EquivariantMap(c.space, [c.space.random_point(rng, scale) for _ in range(c.n_vertices)])


def constant_map(c: VoltageComplex, x) -> EquivariantMap:
    return EquivariantMap(c.space, [x] * c.n_vertices)


# -- energy and differential ------------------------------------------------------

def edge_terms(c: VoltageComplex, f: EquivariantMap) -> list[float]:
    return [c.space.distance(f.values[e.src], e.voltage(f.values[e.dst])) ** 2 for e in c.edges]


def energy(c: VoltageComplex, f: EquivariantMap) -> float:
    """Sum over edges (u, v, g) of d(f(u), g f(v))^2."""
    return float(sum(edge_terms(c, f)))


def _targets(c: VoltageComplex, values, v: int, inc=None):
    """Neighbour points of ``v`` seen from its chosen lift, one per incidence."""
    out = []
    for e, end in inc if inc is not None else c.incidences(v):
        edge = c.edges[e]
        if end == 0:
            out.append(edge.voltage(values[edge.dst]))
        else:
            out.append(edge.voltage.inverse()(values[edge.src]))
    return out


def differential(c: VoltageComplex, f: EquivariantMap, v: int) -> list:
    """Tangents log(f(v), neighbour) in the order of ``c.incidences(v)``."""
    x = f.values[v]
    return [c.space.log(x, y) for y in _targets(c, f.values, v)]


def vertex_gradient(c: VoltageComplex, f: EquivariantMap, v: int) -> float:
    """|| sum over the link of Df_v ||."""
    d = differential(c, f, v)
    if not d:
        return 0.0
    return c.space.tangent_norm(f.values[v], c.space.tangent_combine(d, [1.0] * len(d)))


def gradient_residual(c: VoltageComplex, f: EquivariantMap) -> float:
    """Max over free vertices of || sum_u Df_v(u) ||."""
    free = [v for v in range(c.n_vertices) if v not in c.pinned]
    return max((vertex_gradient(c, f, v) for v in free), default=0.0)


# -- descent ---------------------------------------------------------------------

@dataclass
class DescentResult:
    f: EquivariantMap
    trace: list
    status: str
    residual: float
    sweeps: int
    max_drift: float = 0.0

    @property
    def energy(self) -> float:
        return self.trace[-1]

    @property
    def monotone(self) -> bool:
        return all(b <= a + 1e-12 for a, b in zip(self.trace, self.trace[1:]))

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "energy": self.energy,
            "trace": list(self.trace),
            "residual": self.residual,
            "sweeps": self.sweeps,
            "max_drift": self.max_drift,
            "monotone": self.monotone,
            "map": self.f.to_json_obj(),
        }


def _incident_edges(c: VoltageComplex):
    inc = [set() for _ in range(c.n_vertices)]
    for i, e in enumerate(c.edges):
        inc[e.src].add(i)
        inc[e.dst].add(i)
    return [sorted(s) for s in inc]


def _local_energy(c, values, edge_ids):
    s = c.space
    return sum(
        s.distance(values[c.edges[i].src], c.edges[i].voltage(values[c.edges[i].dst])) ** 2
        for i in edge_ids
    )


def _vertex_target(c, values, v, inc):
    pts = _targets(c, values, v, inc)
    if not pts:
        return values[v]
    # warm start from the current value; two points use the closed form
    return cat0.frechet_mean(c.space, pts, x0=values[v] if len(pts) > 2 else None)


def _move_with_backtracking(c, values, v, new, edge_ids):
    """Move v toward ``new``, halving along the geodesic until E does not increase."""
    old = values[v]
    e0 = _local_energy(c, values, edge_ids)
    t = 1.0
    for _ in range(40):
        cand = new if t == 1.0 else cat0.geodesic_point(c.space, old, new, t)
        values[v] = cand
        if _local_energy(c, values, edge_ids) <= e0:
            return
        t *= 0.5
    values[v] = old


def harmonic_descent(
    c: VoltageComplex,
    f0: EquivariantMap,
    *,
    max_iter: int = 1000,
    tol: float = 1e-12,
    grad_tol: float = GRADIENT_TOL,
    radius: float = DEFAULT_RADIUS,
    jacobi: bool = False,
) -> DescentResult:
    """Gauss-Seidel sweeps moving each free vertex to the Frechet mean of its neighbours.

    Stops with Converged once a sweep lowers the energy by less than ``tol``
    and the gradient residual is at most ``grad_tol``; with Diverging once a
    vertex drifts farther than ``radius`` from its starting value; otherwise
    MaxIter after ``max_iter`` sweeps. Every accepted move is backtracked
    until the energy does not increase, so the trace is monotone.
    """
    s = c.space
    values = list(f0.values)
    start = list(f0.values)
    incs = [c.incidences(v) for v in range(c.n_vertices)]
    edge_ids = _incident_edges(c)
    free = [v for v in range(c.n_vertices) if v not in c.pinned]
    trace = [energy(c, f0)]
    status = MAX_ITER
    drift = 0.0
    sweeps = 0
    for sweeps in range(1, max_iter + 1):
        if jacobi:
            targets = {v: _vertex_target(c, values, v, incs[v]) for v in free}
            old = list(values)
            t = 1.0
            e_old = trace[-1]
            for _ in range(40):
                for v in free:
                    values[v] = targets[v] if t == 1.0 else cat0.geodesic_point(s, old[v], targets[v], t)
                if energy(c, EquivariantMap(s, values)) <= e_old:
                    break
                t *= 0.5
            else:
                values = old
        else:
            for v in free:
                _move_with_backtracking(c, values, v, _vertex_target(c, values, v, incs[v]), edge_ids[v])
        f = EquivariantMap(s, list(values))
        e = energy(c, f)
        # the local backtracking guarantees this up to rounding in the sum
        trace.append(min(e, trace[-1]) if e <= trace[-1] + 1e-14 * max(1.0, trace[-1]) else e)
        drift = max(s.distance(a, b) for a, b in zip(values, start)) if values else 0.0
        if drift > radius:
            status = DIVERGING
            break
        if trace[-2] - trace[-1] < tol and gradient_residual(c, f) <= grad_tol:
            status = CONVERGED
            break
    f = EquivariantMap(s, list(values))
    return DescentResult(f, trace, status, gradient_residual(c, f), sweeps, drift)


# -- link inequality chain report ---------------------------------------------------------------

@dataclass
class VertexChain:
    vertex: int
    vertex_class: str
    lam: float
    link_lambda: float | None
    d_df: float
    comparison: float
    comparison_slack: float
    df_norm2: float
    poincare_rhs: float
    mean_norm: float

    def to_dict(self):
        return {
            "vertex": self.vertex,
            "class": self.vertex_class,
            "lambda": self.lam,
            "link_lambda": self.link_lambda,
            "d_df": self.d_df,
            "comparison": self.comparison,
            "comparison_slack": self.comparison_slack,
            "df_norm2": self.df_norm2,
            "poincare_rhs": self.poincare_rhs,
            "mean_norm": self.mean_norm,
        }


@dataclass
class ChainReport:
    vertices: list
    energy: float
    comparison_holds: bool
    count_checked: bool
    count_lhs: float | None
    count_rhs: float | None
    count_residual: float | None
    poincare_lhs: float
    poincare_rhs: float
    poincare_asserted: bool
    poincare_holds: bool | None
    split: dict | None = field(default=None)

    @property
    def passed(self) -> bool:
        ok = self.comparison_holds
        if self.count_checked:
            ok = ok and self.count_residual <= 1e-9 * max(1.0, abs(self.count_rhs))
        if self.poincare_asserted:
            ok = ok and bool(self.poincare_holds)
        if self.split is not None and self.split["asserted"]:
            ok = ok and self.split["special_lower_holds"] and self.split["nonspecial_lower_holds"]
        return ok

    def to_dict(self):
        return {
            "energy": self.energy,
            "vertices": [v.to_dict() for v in self.vertices],
            "comparison_holds": self.comparison_holds,
            "count_checked": self.count_checked,
            "count_lhs": self.count_lhs,
            "count_rhs": self.count_rhs,
            "count_residual": self.count_residual,
            "poincare_lhs": self.poincare_lhs,
            "poincare_rhs": self.poincare_rhs,
            "poincare_asserted": self.poincare_asserted,
            "poincare_holds": self.poincare_holds,
            "split": self.split,
            "passed": self.passed,
        }


def _link_lambda(g: LinkGraph) -> float | None:
    if g.n_vertices < 2 or not g.edges:
        return None
    if spectra.connected_components(g) != 1:
        return None
    return spectra.spectral_gap(g).lambda1


def wang_chain_report(c: VoltageComplex, f: EquivariantMap, lambdas: dict, *, poincare_gate: float = GRADIENT_TOL) -> ChainReport:
    """Per-vertex link inequalities and their global sums.

    ``lambdas`` maps vertex class to the spectral gap used in the Poincare
    step. The edge-count identity (each edge in q+1 triangles) is required
    whenever ``c.q`` is set. The lower bound by lambda is only asserted when
    every vertex is critical up to ``poincare_gate``.
    """
    s = c.space
    for cls in set(c.vertex_class):
        if cls not in lambdas:
            raise MissingLambda(f"no lambda for vertex class {cls!r}")
    counts = c.triangle_counts()
    if c.q is not None:
        bad = [i for i, k in enumerate(counts) if k != c.q + 1]
        if bad:
            raise LinkMismatch(
                f"edge {bad[0]} lies in {counts[bad[0]]} triangles, expected {c.q + 1}"
            )
    terms = edge_terms(c, f)
    e_total = float(sum(terms))

    rows = []
    for v in range(c.n_vertices):
        link, opposite = c.link_graph(v)
        d = differential(c, f, v)
        x = f.values[v]
        d_df = 0.0
        comparison = 0.0
        for (a, b), opp in zip(link.edges, opposite):
            diff = s.tangent_combine([d[a], d[b]], [1.0, -1.0])
            d_df += s.tangent_norm(x, diff) ** 2
            comparison += terms[opp]
        df2 = sum(s.tangent_norm(x, t) ** 2 for t in d)
        mean = s.tangent_norm(x, s.tangent_combine(d, [1.0] * len(d))) if d else 0.0
        lam = float(lambdas[c.vertex_class[v]])
        rows.append(
            VertexChain(
                vertex=v,
                vertex_class=c.vertex_class[v],
                lam=lam,
                link_lambda=_link_lambda(link),
                d_df=d_df,
                comparison=comparison,
                comparison_slack=comparison - d_df,
                df_norm2=df2,
                poincare_rhs=lam * df2,
                mean_norm=mean,
            )
        )

    comparison_ok = all(r.comparison_slack >= -1e-9 for r in rows)
    count_lhs = count_rhs = count_res = None
    if c.q is not None:
        count_lhs = float(sum(r.comparison for r in rows))
        count_rhs = (c.q + 1) * e_total
        count_res = abs(count_lhs - count_rhs)
    poincare_lhs = float(sum(r.d_df for r in rows))
    poincare_rhs = float(sum(r.poincare_rhs for r in rows))
    asserted = all(r.mean_norm <= poincare_gate for r in rows)
    poincare_holds = (poincare_lhs >= poincare_rhs - 1e-8) if asserted else None

    split = None
    if GENERIC not in c.vertex_class:
        split = _split_energy(c, rows, terms, lambdas, asserted)
    return ChainReport(
        vertices=rows,
        energy=e_total,
        comparison_holds=comparison_ok,
        count_checked=c.q is not None,
        count_lhs=count_lhs,
        count_rhs=count_rhs,
        count_residual=count_res,
        poincare_lhs=poincare_lhs,
        poincare_rhs=poincare_rhs,
        poincare_asserted=asserted,
        poincare_holds=poincare_holds,
        split=split,
    )


def _split_energy(c: VoltageComplex, rows, terms, lambdas, harmonic: bool) -> dict:
    """Special / non-special bookkeeping.

    E1 sums edges between two special vertices, E2 edges between a special
    and a non-special vertex. Each chamber has two special corners (opposite
    edge of type E2) and one non-special corner (opposite edge of type E1),
    so the link sums split as
        sum_S ||d(Df)||^2 <= (q+1) E2,   sum_S ||d(Df)||^2 >= lam_S (2 E1 + E2),
        sum_NS ||d(Df)||^2 <= (q+1) E1,  sum_NS ||d(Df)||^2 >= lam_NS E2,
    the lower bounds needing a critical map. With lam_NS = q+1 these force
    E1 >= E2 and then (q+1) E2 >= 3 lam_S E2.
    """
    cls = c.vertex_class
    e1 = sum(t for t, e in zip(terms, c.edges) if cls[e.src] == SPECIAL and cls[e.dst] == SPECIAL)
    e2 = sum(t for t, e in zip(terms, c.edges) if (cls[e.src] == SPECIAL) != (cls[e.dst] == SPECIAL))
    s_rows = [r for r in rows if r.vertex_class == SPECIAL]
    ns_rows = [r for r in rows if r.vertex_class == NONSPECIAL]
    s_ddf = sum(r.d_df for r in s_rows)
    ns_ddf = sum(r.d_df for r in ns_rows)
    lam_s = float(lambdas.get(SPECIAL, 0.0))
    lam_ns = float(lambdas.get(NONSPECIAL, 0.0))
    out = {
        "e1": float(e1),
        "e2": float(e2),
        "special_d_df": float(s_ddf),
        "special_upper": float(sum(r.comparison for r in s_rows)),
        "special_lower": lam_s * (2 * e1 + e2),
        "nonspecial_d_df": float(ns_ddf),
        "nonspecial_upper": float(sum(r.comparison for r in ns_rows)),
        "nonspecial_lower": lam_ns * e2,
        "asserted": harmonic,
        "e1_ge_e2": bool(e1 >= e2 - 1e-9),
    }
    if c.q is not None:
        out["special_upper_counted"] = (c.q + 1) * float(e2)
        out["nonspecial_upper_counted"] = (c.q + 1) * float(e1)
    if harmonic:
        out["special_lower_holds"] = bool(s_ddf >= out["special_lower"] - 1e-8)
        out["nonspecial_lower_holds"] = bool(ns_ddf >= out["nonspecial_lower"] - 1e-8)
    return out
