"""Small voltage complexes with known behaviour, used by the tests and the CLI."""
from __future__ import annotations

import math

import numpy as np

from . import cat0
from .harmonic import GENERIC, NONSPECIAL, SPECIAL, VoltageComplex, build_complex


def trivial(space: cat0.ModelSpace | None = None) -> VoltageComplex:
    """One vertex, no edges."""
    return build_complex(space or cat0.Euclidean(2), [GENERIC], [])


def identity_path(space: cat0.ModelSpace, n: int = 4) -> VoltageComplex:
    """A path on n vertices with identity voltages."""
    ident = space.identity()
    return build_complex(space, [GENERIC] * n, [(i, i + 1, ident) for i in range(n - 1)])


def tetrahedron_boundary(space: cat0.ModelSpace) -> VoltageComplex:
    """Boundary of a tetrahedron, identity voltages; each edge lies in 2 triangles (q = 1)."""
    ident = space.identity()
    pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    index = {p: i for i, p in enumerate(pairs)}
    edges = [(u, v, ident) for u, v in pairs]
    tris = []
    for a, b, c in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]:
        tris.append([[index[(a, b)], 1], [index[(b, c)], 1], [index[(a, c)], -1]])
    return build_complex(space, [GENERIC] * 4, edges, tris, q=1)


def octahedron(space: cat0.ModelSpace, voltages=None) -> VoltageComplex:
    """Octahedron boundary with the two poles non-special, the equator special.

    Every triangle has one pole and two equator vertices and the poles are not
    adjacent, so the class pattern matches a chamber with one non-special
    corner. Each edge lies in 2 triangles (q = 1); every vertex link is a 4-cycle.
    """
    ident = space.identity()
    north, south = 0, 5
    ring = [1, 2, 3, 4]
    pairs = [(north, r) for r in ring] + [(r, south) for r in ring]
    pairs += [(ring[i], ring[(i + 1) % 4]) for i in range(4)]
    index = {p: i for i, p in enumerate(pairs)}
    edges = [(u, v, ident) for u, v in pairs]

    def walk(a, b):
        return [index[(a, b)], 1] if (a, b) in index else [index[(b, a)], -1]

    tris = []
    for i in range(4):
        r, s = ring[i], ring[(i + 1) % 4]
        tris.append([walk(north, r), walk(r, s), walk(s, north)])
        tris.append([walk(south, r), walk(r, s), walk(s, south)])
    classes = [NONSPECIAL, SPECIAL, SPECIAL, SPECIAL, SPECIAL, NONSPECIAL]
    return build_complex(space, classes, edges, tris, q=1)


def euclidean_torus(a=(1.0, 0.0), b=(0.3, 1.0)) -> VoltageComplex:
    """One-vertex triangulated torus: loops a, b, ab in R^2 and two triangles.

    Each loop lies in both triangles (q = 1) and the vertex link is a hexagon.
    The constant maps are harmonic with energy |a|^2 + |b|^2 + |a+b|^2.
    """
    space = cat0.Euclidean(2)
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    ga, gb, gab = space.translation(a), space.translation(b), space.translation(a + b)
    edges = [(0, 0, ga), (0, 0, gb), (0, 0, gab)]
    tris = [[[0, 1], [1, 1], [2, -1]], [[1, 1], [0, 1], [2, -1]]]
    return build_complex(space, [GENERIC], edges, tris, q=1)


def loops(space: cat0.ModelSpace, isometries) -> VoltageComplex:
    """One vertex with one loop per isometry: descent minimises total displacement."""
    return build_complex(space, [GENERIC], [(0, 0, g) for g in isometries])


def hyperbolic_about(space: cat0.Hyperbolic, center_shift: float, angles) -> list:
    """Rotations by ``angles`` about the point boost(center_shift) applied to the origin."""
    t = space.boost(center_shift)
    return [t @ space.rotation(a) @ t.inverse() for a in angles]


def spd_stabilizers(space: cat0.SPD, base, angles) -> list:
    """Isometries base^{1/2} O base^{-1/2} fixing ``base`` (O planar rotations)."""
    out = []
    for k, a in enumerate(angles):
        o = np.eye(space.p)
        i, j = k % (space.p - 1), k % (space.p - 1) + 1
        c, s = math.cos(a), math.sin(a)
        o[i, i], o[i, j], o[j, i], o[j, j] = c, -s, s, c
        out.append(space.stabilizer_element(base, o))
    return out


def translation_with_parabolic(length: float = 1.0, shift: float = 1.0):
    """One vertex in H^2 with a translation of ``length`` and a parabolic sharing its attracting end.

    The displacement energy d(x, gx)^2 + d(x, px)^2 has infimum length^2,
    approached only by running off to the common ideal point.
    """
    space = cat0.Hyperbolic(2)
    return loops(space, [space.boost(length), space.parabolic(shift)])
