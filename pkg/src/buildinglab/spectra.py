"""Oriented incidence matrices, B = A^T A, spectral gaps and the rigidity margins."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import linalg
from .errors import Disconnected, NotMeanZero, StructureMismatch
from .geometry import (
    SL3_LINK,
    SP4_NONSPECIAL_LINK,
    SP4_SPECIAL_LINK,
    LinkGraph,
    bfs_distances,
    link_graph,
)

KERNEL_TOL = 1e-8


def oriented_incidence(g: LinkGraph) -> np.ndarray:
    """Edge x vertex matrix: +1 where the edge starts, -1 where it ends."""
    a = np.zeros((g.n_edges, g.n_vertices), dtype=np.int64)
    for i, (u, w) in enumerate(g.edges):
        a[i, u] = 1
        a[i, w] = -1
    return a


def gram_matrix(a: np.ndarray, g: LinkGraph | None = None) -> np.ndarray:
    """B = A^T A, checked entrywise against degree minus adjacency.

    The combinatorial side is rebuilt from the rows of ``a`` (or from ``g``
    when given), so any disagreement signals a construction bug.
    """
    a = np.asarray(a, dtype=np.int64)
    if np.any(np.count_nonzero(a == 1, axis=1) != 1) or np.any(np.count_nonzero(a == -1, axis=1) != 1):
        raise StructureMismatch("every row of A needs exactly one +1 and one -1")
    b = a.T @ a
    n = a.shape[1]
    edges = g.edges if g is not None else [
        (int(np.flatnonzero(row == 1)[0]), int(np.flatnonzero(row == -1)[0])) for row in a
    ]
    direct = np.zeros((n, n), dtype=np.int64)
    for u, w in edges:
        direct[u, u] += 1
        direct[w, w] += 1
        direct[u, w] -= 1
        direct[w, u] -= 1
    if not np.array_equal(b, direct):
        raise StructureMismatch("A^T A disagrees with degree - adjacency")
    return b


def eigenvalues_symmetric(m, tol: float = linalg.OFF_DIAGONAL_TOL, backend: str = "auto") -> list[float]:
    return [float(x) for x in linalg.eigvalsh(m, tol=tol, backend=backend)]


def expected_gap(kind: str, q: int) -> float:
    if kind == SL3_LINK:
        return q + 1 - math.sqrt(q)
    if kind == SP4_SPECIAL_LINK:
        return q + 1 - math.sqrt(2 * q)
    if kind == SP4_NONSPECIAL_LINK:
        return float(q + 1)
    raise ValueError(f"unknown link kind {kind!r}")


def connected_components(g: LinkGraph) -> int:
    nbrs = g.neighbors()
    seen = [False] * g.n_vertices
    count = 0
    for s in range(g.n_vertices):
        if not seen[s]:
            count += 1
            for v, d in enumerate(bfs_distances(nbrs, s)):
                if d >= 0:
                    seen[v] = True
    return count


@dataclass(frozen=True)
class SpectralReport:
    kind: str
    q: int
    n_vertices: int
    eigenvalues: tuple
    lambda1: float
    expected: float | None
    residual: float | None
    kernel_dim: int

    def to_dict(self):
        return {
            "kind": self.kind,
            "q": self.q,
            "n_vertices": self.n_vertices,
            "eigenvalues": list(self.eigenvalues),
            "lambda1": self.lambda1,
            "expected": self.expected,
            "residual": self.residual,
            "kernel_dim": self.kernel_dim,
        }


def spectral_gap(g: LinkGraph, backend: str = "auto") -> SpectralReport:
    b = gram_matrix(oriented_incidence(g), g)
    eig = linalg.eigvalsh(b.astype(float), backend=backend)
    kernel_dim = int(np.count_nonzero(eig <= KERNEL_TOL))
    components = connected_components(g)
    if kernel_dim != components:
        raise StructureMismatch(f"kernel dimension {kernel_dim} but {components} components")
    if kernel_dim > 1:
        raise Disconnected(f"{components} connected components")
    lambda1 = float(eig[kernel_dim])
    try:
        expected = expected_gap(g.kind, g.q)
    except ValueError:
        expected = None
    return SpectralReport(
        kind=g.kind,
        q=g.q,
        n_vertices=g.n_vertices,
        eigenvalues=tuple(float(x) for x in eig),
        lambda1=lambda1,
        expected=expected,
        residual=None if expected is None else abs(lambda1 - expected),
        kernel_dim=kernel_dim,
    )


@lru_cache(maxsize=None)
def link_gap(kind: str, q: int) -> float:
    """Computed spectral gap of the standard link of ``kind`` over F_q (cached)."""
    return spectral_gap(link_graph(kind, q)).lambda1


def distinct_values(values, tol: float = 1e-8) -> list[float]:
    out = []
    for x in sorted(values):
        if not out or x - out[-1] > tol:
            out.append(x)
    return out


def expected_spectrum(kind: str, q: int) -> list[float]:
    """Distinct eigenvalues of B for a thick generalized 3-gon / 4-gon / 2-gon."""
    if kind == SL3_LINK:
        r = math.sqrt(q)
        return [0.0, q + 1 - r, q + 1 + r, 2.0 * (q + 1)]
    if kind == SP4_SPECIAL_LINK:
        r = math.sqrt(2 * q)
        return [0.0, q + 1 - r, float(q + 1), q + 1 + r, 2.0 * (q + 1)]
    if kind == SP4_NONSPECIAL_LINK:
        return [0.0, float(q + 1), 2.0 * (q + 1)]
    raise ValueError(f"unknown link kind {kind!r}")


# -- Poincare inequality on a link --------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    lhs: float
    rhs: float
    slack: float
    passed: bool


def dirichlet_energy(g: LinkGraph, f) -> float:
    """||df||^2 = sum over edges of |f(u) - f(w)|^2 (vector values allowed)."""
    f = np.asarray(f, dtype=float).reshape(g.n_vertices, -1)
    e = np.asarray(g.edges, dtype=np.intp).reshape(-1, 2)
    diff = f[e[:, 0]] - f[e[:, 1]]
    return float(np.sum(diff * diff))


def verify_poincare(g: LinkGraph, f, dim: int = 1, lambda1: float | None = None, mean_tol: float = 1e-10) -> CheckResult:
    """Check ||df||^2 >= lambda1 ||f||^2 for a mean-zero f with values in R^dim."""
    f = np.asarray(f, dtype=float).reshape(g.n_vertices, dim)
    if np.max(np.abs(f.sum(axis=0)), initial=0.0) > mean_tol:
        raise NotMeanZero(f"component sums {f.sum(axis=0)}")
    if lambda1 is None:
        lambda1 = spectral_gap(g).lambda1
    lhs = dirichlet_energy(g, f)
    rhs = lambda1 * float(np.sum(f * f))
    slack = lhs - rhs
    return CheckResult(lhs=lhs, rhs=rhs, slack=slack, passed=slack >= -1e-9)


# -- rigidity margins ------------------------------------------------------------

@dataclass(frozen=True)
class MarginReport:
    kind: str
    q: int
    lam: float
    margin: float
    sign: int
    threshold: bool

    @property
    def positive(self) -> bool:
        return self.sign > 0

    def to_dict(self):
        return {
            "kind": self.kind,
            "q": self.q,
            "lambda": self.lam,
            "margin": self.margin,
            "sign": self.sign,
            "threshold": self.threshold,
        }


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def rigidity_margin(kind: str, q: int) -> MarginReport:
    """SL3: 2 lambda - (q+1). Sp4 special: 3 lambda - (q+1).

    The sign is decided in exact integer arithmetic:
    2(q+1-sqrt q) - (q+1) = (q+1) - 2 sqrt q has the sign of (q+1)^2 - 4q, and
    3(q+1-sqrt 2q) - (q+1) = 2(q+1) - 3 sqrt 2q has the sign of 4(q+1)^2 - 18q.
    """
    if q < 2:
        raise ValueError("rigidity margins need q >= 2")
    lam = expected_gap(kind, q)
    if kind == SL3_LINK:
        margin = 2 * lam - (q + 1)
        sign = _sign((q + 1) ** 2 - 4 * q)
    elif kind == SP4_SPECIAL_LINK:
        margin = 3 * lam - (q + 1)
        sign = _sign(4 * (q + 1) ** 2 - 18 * q)
    else:
        raise ValueError(f"no rigidity margin for {kind!r}")
    return MarginReport(kind=kind, q=q, lam=lam, margin=margin, sign=sign, threshold=sign == 0)
