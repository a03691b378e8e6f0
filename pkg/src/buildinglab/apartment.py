"""Barycentric subdivision of the sphere S^{p-1} into 2^p p! spherical simplices.

A simplex is fixed by a sign vector and a permutation sigma. Its vertices
are the normalised partial sums of the signed coordinate vectors taken in
the order sigma(1), sigma(2), ...; it is the set of unit vectors x with
signs_i x_i >= 0 and |x_{sigma(1)}| >= |x_{sigma(2)}| >= ... . Any two of its
points have inner product at least 1/p, so its diameter is at most
arccos(1/p) < pi/2.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import RankTooLarge

MAX_RANK = 7


@dataclass(frozen=True, eq=False)
class SphericalSimplex:
    p: int
    signs: tuple
    perm: tuple  # 0-based
    vertices: np.ndarray  # row k = vertex k

    def contains(self, x, tol: float = 1e-12) -> bool:
        y = np.asarray(x, dtype=float) * np.asarray(self.signs)
        if np.any(y < -tol):
            return False
        ordered = y[list(self.perm)]
        return bool(np.all(ordered[:-1] >= ordered[1:] - tol))


def _check_rank(p: int):
    if p < 2:
        raise ValueError("rank must be at least 2")
    if p > MAX_RANK:
        raise RankTooLarge(f"p={p} exceeds {MAX_RANK}")


def simplex_vertices(signs, perm) -> np.ndarray:
    p = len(signs)
    v = np.zeros((p, p))
    for k in range(p):
        idx = list(perm[: k + 1])
        v[k, idx] = np.asarray(signs, dtype=float)[idx] / math.sqrt(k + 1)
    return v


def make_simplex(signs, perm) -> SphericalSimplex:
    signs = tuple(int(s) for s in signs)
    perm = tuple(int(i) for i in perm)
    if sorted(perm) != list(range(len(signs))) or any(s not in (1, -1) for s in signs):
        raise ValueError("signs must be +-1 and perm a permutation of 0..p-1")
    return SphericalSimplex(len(signs), signs, perm, simplex_vertices(signs, perm))


def enumerate_simplices(p: int) -> list[SphericalSimplex]:
    _check_rank(p)
    return [
        make_simplex(signs, perm)
        for signs in itertools.product((1, -1), repeat=p)
        for perm in itertools.permutations(range(p))
    ]


def angle_bound(p: int) -> float:
    return math.acos(1.0 / p)


def pair_angles(x, y) -> np.ndarray:
    """Angles between unit vectors along the last axis (accurate near 0 and pi)."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return 2.0 * np.arctan2(np.linalg.norm(x - y, axis=-1), np.linalg.norm(x + y, axis=-1))


def _vertex_angles(v):
    return pair_angles(v[..., :, None, :], v[..., None, :, :])


def sample_points(vertices: np.ndarray, n: int, rng) -> np.ndarray:
    """Uniform Dirichlet combinations of the vertices, normalised to the sphere.

    ``vertices`` may carry leading batch axes: (..., p, p) -> (..., n, p).
    """
    batch = vertices.shape[:-2]
    k = vertices.shape[-2]
    w = rng.exponential(size=batch + (n, k))
    x = w @ vertices
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


@dataclass(frozen=True)
class DiameterReport:
    p: int
    vertex_diam: float
    sampled_diam: float
    min_inner: float
    bound: float

    @property
    def passed(self) -> bool:
        return (
            self.vertex_diam <= self.bound + 1e-9
            and self.sampled_diam <= self.bound + 1e-9
            and self.min_inner >= 1.0 / self.p - 1e-12
        )


def simplex_diameter(s: SphericalSimplex, samples: int = 1000, rng=None) -> DiameterReport:
    """Largest angle between vertices and over ``samples`` random pairs of points."""
    rng = np.random.default_rng(0) if rng is None else rng
    g = s.vertices @ s.vertices.T
    vertex_diam = float(np.max(_vertex_angles(s.vertices)))
    min_inner = float(np.min(g))
    sampled = 0.0
    if samples > 0:
        x = sample_points(s.vertices, samples, rng)
        y = sample_points(s.vertices, samples, rng)
        inner = np.sum(x * y, axis=1)
        sampled = float(np.max(pair_angles(x, y)))
        min_inner = min(min_inner, float(np.min(inner)))
    return DiameterReport(s.p, vertex_diam, sampled, min_inner, angle_bound(s.p))


def locate(x) -> tuple[tuple, tuple]:
    """Signs and permutation of a cell containing ``x`` (ties broken by index)."""
    x = np.asarray(x, dtype=float)
    signs = tuple(1 if v >= 0 else -1 for v in x)
    perm = tuple(int(i) for i in np.argsort(-np.abs(x), kind="stable"))
    return signs, perm


def containing_cells(x, tol: float = 1e-12) -> list[tuple[tuple, tuple]]:
    """Every (signs, perm) cell containing ``x``, by exhaustive membership tests."""
    x = np.asarray(x, dtype=float)
    p = x.size
    _check_rank(p)
    out = []
    for signs in itertools.product((1, -1), repeat=p):
        y = x * np.asarray(signs)
        if np.any(y < -tol):
            continue
        for perm in itertools.permutations(range(p)):
            ordered = y[list(perm)]
            if np.all(ordered[:-1] >= ordered[1:] - tol):
                out.append((signs, perm))
    return out


@dataclass(frozen=True)
class CoverReport:
    p: int
    samples: int
    covered: int
    unique: int

    @property
    def passed(self) -> bool:
        return self.covered == self.samples


def cover_check(p: int, samples: int, seed: int = 0, exhaustive: bool | None = None) -> CoverReport:
    """Random unit vectors each lie in a cell; exactly one when in general position.

    Cells are found by sorting coordinates; with ``exhaustive`` (default for
    p <= 4) every cell is also tested to count how many contain the point.
    """
    _check_rank(p)
    exhaustive = p <= 4 if exhaustive is None else exhaustive
    rng = np.random.default_rng(seed)
    xs = rng.normal(size=(samples, p))
    xs /= np.linalg.norm(xs, axis=1, keepdims=True)
    covered = unique = 0
    for x in xs:
        signs, perm = locate(x)
        if make_simplex(signs, perm).contains(x):
            covered += 1
        if exhaustive:
            unique += len(containing_cells(x)) == 1
        else:
            a = np.sort(np.abs(x))
            unique += bool(np.all(a > 0) and np.all(np.diff(a) > 0))
    return CoverReport(p, samples, covered, unique)


@dataclass(frozen=True)
class ApartmentReport:
    p: int
    n_simplices: int
    samples: int
    max_vertex_angle: float
    max_sampled_angle: float
    min_inner: float
    min_leading: float
    seed: int

    @property
    def max_diameter(self) -> float:
        return max(self.max_vertex_angle, self.max_sampled_angle)

    @property
    def bound(self) -> float:
        return angle_bound(self.p)

    @property
    def passed(self) -> bool:
        return (
            self.n_simplices == 2 ** self.p * math.factorial(self.p)
            and self.min_inner >= 1.0 / self.p - 1e-12
            and self.max_diameter <= self.bound + 1e-9
            and self.bound < math.pi / 2
            and self.min_leading >= math.sqrt(1.0 / self.p) - 1e-12
        )

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "n_simplices": self.n_simplices,
            "samples": self.samples,
            "seed": self.seed,
            "max_diameter": self.max_diameter,
            "max_vertex_angle": self.max_vertex_angle,
            "max_sampled_angle": self.max_sampled_angle,
            "min_inner": self.min_inner,
            "min_leading": self.min_leading,
            "bound": self.bound,
            "bound_pi_over_2_margin": math.pi / 2 - self.max_diameter,
            "passed": self.passed,
        }


def apartment_report(p: int, samples: int = 1000, seed: int = 0, chunk: int = 256) -> ApartmentReport:
    """Check every simplex: all vertex pairs plus ``samples`` random pairs each."""
    simplices = enumerate_simplices(p)
    rng = np.random.default_rng(seed)
    verts = np.stack([s.vertices for s in simplices])
    signs = np.array([s.signs for s in simplices], dtype=float)
    lead = np.array([s.perm[0] for s in simplices])

    gram = verts @ np.swapaxes(verts, 1, 2)
    max_vertex = float(np.max(_vertex_angles(verts)))
    min_inner = float(np.min(gram))
    max_sampled = 0.0
    min_leading = math.inf
    if samples > 0:
        for start in range(0, len(simplices), chunk):
            v = verts[start:start + chunk]
            x = sample_points(v, samples, rng)
            y = sample_points(v, samples, rng)
            inner = np.sum(x * y, axis=-1)
            max_sampled = max(max_sampled, float(np.max(pair_angles(x, y))))
            min_inner = min(min_inner, float(np.min(inner)))
            rows = np.arange(v.shape[0])
            sg = signs[start:start + chunk][rows, lead[start:start + chunk]]
            lx = x[rows, :, lead[start:start + chunk]] * sg[:, None]
            min_leading = min(min_leading, float(np.min(lx)))
    return ApartmentReport(
        p=p,
        n_simplices=len(simplices),
        samples=samples,
        max_vertex_angle=max_vertex,
        max_sampled_angle=max_sampled,
        min_inner=min_inner,
        min_leading=min_leading,
        seed=seed,
    )
