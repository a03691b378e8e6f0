"""Finite-rank nonpositively curved model spaces.

Four kinds: Euclidean space, hyperbolic space in the hyperboloid model,
symmetric positive-definite matrices with the affine-invariant metric, and
L^2 products of these. Each space implements distance, exp/log, tangent
inner products and an isometry group; everything else (geodesics,
Frechet means, displacement) is written once on top of that interface.

Points and tangents are numpy arrays, except on products where they are
tuples with one entry per factor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InvalidIsometry, InvalidPoint, NoConvergence, NumericalDegeneracy

ISOMETRY_TOL = 1e-10
STALL_TOL = 1e-6
# rounding in log/exp is absolute once the points cluster, so a stalled
# gradient this small is accepted whatever the spread
STALL_ABS = float(np.sqrt(np.finfo(float).eps))
ENERGY_SLACK = 1e-11


@dataclass(frozen=True, eq=False)
class Isometry:
    """An isometry of ``space``; ``data`` is whatever the space uses to act."""

    space: "ModelSpace"
    data: object

    def __call__(self, x):
        return self.space.apply(self.data, x)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry(self.space, self.space.compose(self.data, other.data))

    def inverse(self) -> "Isometry":
        return Isometry(self.space, self.space.invert(self.data))

    def deviation(self, other: "Isometry") -> float:
        """Max-entry difference of the defining matrices."""
        return self.space.isometry_deviation(self.data, other.data)


class ModelSpace:
    kind: str = ""

    # geometry
    def check_point(self, x):
        raise NotImplementedError

    def distance(self, x, y) -> float:
        raise NotImplementedError

    def exp(self, x, v):
        raise NotImplementedError

    def log(self, x, y):
        raise NotImplementedError

    def inner(self, x, u, v) -> float:
        raise NotImplementedError

    def tangent_norm(self, x, v) -> float:
        return math.sqrt(max(self.inner(x, v, v), 0.0))

    def zero_tangent(self, x):
        return np.zeros_like(x)

    # lower bound of the sectional curvature is -curvature_scale**2
    curvature_scale = 0.0

    def hessian_bound(self, d: float) -> float:
        """Upper bound for the Hessian of d(., p)^2 / 2 at distance d from p."""
        k = self.curvature_scale * d
        return 1.0 if k < 1e-8 else k / math.tanh(k)

    def tangent_combine(self, vs, coeffs):
        out = None
        for v, c in zip(vs, coeffs):
            out = c * v if out is None else out + c * v
        return out

    # isometries
    def identity_data(self):
        raise NotImplementedError

    def apply(self, g, x):
        raise NotImplementedError

    def compose(self, g, h):
        raise NotImplementedError

    def invert(self, g):
        raise NotImplementedError

    def check_isometry_data(self, g):
        raise NotImplementedError

    def isometry_deviation(self, g, h) -> float:
        return float(np.max(np.abs(np.asarray(g) - np.asarray(h))))

    def identity(self) -> Isometry:
        return Isometry(self, self.identity_data())

    def isometry(self, data) -> Isometry:
        return Isometry(self, self.check_isometry_data(data))

    # random sampling
    def random_point(self, rng, scale=1.0):
        raise NotImplementedError

    def random_tangent(self, rng, x, scale=1.0):
        raise NotImplementedError

    # serialisation
    def to_dict(self) -> dict:
        raise NotImplementedError

    def point_to_json(self, x):
        return np.asarray(x).tolist()

    def point_from_json(self, obj):
        return self.check_point(np.asarray(obj, dtype=float))

    def isometry_to_json(self, g: Isometry):
        return {"matrix": np.asarray(g.data).tolist()}

    def isometry_from_json(self, obj) -> Isometry:
        if obj is None or obj == "identity":
            return self.identity()
        try:
            return self.isometry(np.asarray(obj["matrix"], dtype=float))
        except (KeyError, TypeError) as exc:
            raise InvalidIsometry(f"bad isometry encoding: {exc}") from exc

    def __eq__(self, other):
        return isinstance(other, ModelSpace) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(repr(self.to_dict()))

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()})"


# -- Euclidean -------------------------------------------------------------------

class Euclidean(ModelSpace):
    kind = "euclidean"

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("dimension must be >= 1")
        self.n = n

    def check_point(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,) or not np.all(np.isfinite(x)):
            raise InvalidPoint(f"expected a finite vector of length {self.n}")
        return x

    def distance(self, x, y):
        return float(np.linalg.norm(np.asarray(x) - np.asarray(y)))

    def exp(self, x, v):
        return np.asarray(x) + np.asarray(v)

    def log(self, x, y):
        return np.asarray(y) - np.asarray(x)

    def inner(self, x, u, v):
        return float(np.dot(u, v))

    def identity_data(self):
        return (np.eye(self.n), np.zeros(self.n))

    def apply(self, g, x):
        q, t = g
        return q @ x + t

    def compose(self, g, h):
        return (g[0] @ h[0], g[0] @ h[1] + g[1])

    def invert(self, g):
        qt = g[0].T
        return (qt, -qt @ g[1])

    def check_isometry_data(self, g):
        q, t = (np.asarray(c, dtype=float) for c in g)
        if q.shape != (self.n, self.n) or t.shape != (self.n,):
            raise InvalidIsometry("shape mismatch")
        err = float(np.max(np.abs(q.T @ q - np.eye(self.n))))
        if err > ISOMETRY_TOL:
            raise InvalidIsometry(f"Q^T Q != I (error {err:.2e})")
        return (q, t)

    def isometry_deviation(self, g, h):
        return max(float(np.max(np.abs(g[0] - h[0]))), float(np.max(np.abs(g[1] - h[1]))))

    def translation(self, t) -> Isometry:
        return self.isometry((np.eye(self.n), np.asarray(t, dtype=float)))

    def rotation(self, angle, i=0, j=1, center=None) -> Isometry:
        q = np.eye(self.n)
        c, s = math.cos(angle), math.sin(angle)
        q[i, i], q[i, j], q[j, i], q[j, j] = c, -s, s, c
        center = np.zeros(self.n) if center is None else np.asarray(center, dtype=float)
        return self.isometry((q, center - q @ center))

    def random_point(self, rng, scale=1.0):
        return rng.normal(scale=scale, size=self.n)

    def random_tangent(self, rng, x, scale=1.0):
        return rng.normal(scale=scale, size=self.n)

    def to_dict(self):
        return {"kind": self.kind, "dim": self.n}

    def isometry_to_json(self, g):
        return {"matrix": g.data[0].tolist(), "translation": g.data[1].tolist()}

    def isometry_from_json(self, obj):
        if obj is None or obj == "identity":
            return self.identity()
        try:
            q = obj.get("matrix", np.eye(self.n).tolist())
            t = obj.get("translation", [0.0] * self.n)
            return self.isometry((q, t))
        except (AttributeError, TypeError) as exc:
            raise InvalidIsometry(f"bad isometry encoding: {exc}") from exc


# -- hyperbolic ------------------------------------------------------------------

def minkowski(x, y) -> float:
    return float(-x[0] * y[0] + np.dot(x[1:], y[1:]))


def acosh_one_plus(eps: float) -> float:
    """arccosh(1 + eps), by its series when eps < 1e-8."""
    if eps < 1e-8:
        return math.sqrt(2.0 * eps) * (1.0 - eps / 12.0 + 3.0 * eps * eps / 160.0)
    return math.acosh(1.0 + eps)


class Hyperbolic(ModelSpace):
    """H^n as the upper sheet of <x, x> = -1 in R^{1,n}."""

    kind = "hyperbolic"
    curvature_scale = 1.0

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("dimension must be >= 1")
        self.n = n
        self.form = np.diag([-1.0] + [1.0] * n)

    @property
    def origin(self):
        o = np.zeros(self.n + 1)
        o[0] = 1.0
        return o

    def check_point(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n + 1,) or not np.all(np.isfinite(x)):
            raise InvalidPoint(f"expected a vector of length {self.n + 1}")
        # rounding in <x, x> grows like x0^2
        if x[0] <= 0 or abs(minkowski(x, x) + 1.0) > 1e-10 * max(1.0, x[0] ** 2):
            raise InvalidPoint("not on the upper sheet of the hyperboloid")
        return x

    def project(self, x):
        x = np.array(x, dtype=float)
        x[0] = math.sqrt(1.0 + float(np.dot(x[1:], x[1:])))
        return x

    def _chord(self, x, y):
        d = np.asarray(x) - np.asarray(y)
        eps = 0.5 * minkowski(d, d)
        if eps < -1e-9:
            raise NumericalDegeneracy(f"arccosh argument {1 + eps} below 1")
        return max(eps, 0.0)

    def distance(self, x, y):
        return acosh_one_plus(self._chord(x, y))

    def frame(self, x):
        """Lorentz boost taking the origin to ``x``."""
        x = np.asarray(x, dtype=float)
        xs = x[1:]
        g = np.eye(self.n + 1)
        g[0, 0], g[0, 1:], g[1:, 0] = x[0], xs, xs
        g[1:, 1:] += np.outer(xs, xs) / (1.0 + x[0])
        return g

    # exp and log are computed after moving x to the origin: the direct
    # formulas lose ~cosh(d) digits to cancellation, which the exponential
    # map then amplifies by sinh(d)
    def exp(self, x, v):
        g = self.frame(x)
        vs = (self.invert(g) @ np.asarray(v, dtype=float))[1:]
        r = float(np.linalg.norm(vs))
        if r == 0.0:
            return np.array(x, dtype=float)
        out = np.concatenate([[math.cosh(r)], vs * (math.sinh(r) / r)])
        return self.project(g @ out)

    def log(self, x, y):
        if np.array_equal(x, y):
            return np.zeros(self.n + 1)
        g = self.frame(x)
        ys = (self.invert(g) @ np.asarray(y, dtype=float))[1:]
        r = float(np.linalg.norm(ys))
        if r == 0.0:
            return np.zeros(self.n + 1)
        return g @ np.concatenate([[0.0], ys * (math.asinh(r) / r)])

    def inner(self, x, u, v):
        return minkowski(u, v)

    def identity_data(self):
        return np.eye(self.n + 1)

    def apply(self, g, x):
        return self.project(g @ x)

    def compose(self, g, h):
        return g @ h

    def invert(self, g):
        return self.form @ g.T @ self.form

    def check_isometry_data(self, g):
        g = np.asarray(g, dtype=float)
        if g.shape != (self.n + 1, self.n + 1):
            raise InvalidIsometry("shape mismatch")
        err = float(np.max(np.abs(g.T @ self.form @ g - self.form)))
        if err > ISOMETRY_TOL * max(1.0, float(np.max(np.abs(g))) ** 2):
            raise InvalidIsometry(f"g^T J g != J (error {err:.2e})")
        if g[0, 0] <= 0:
            raise InvalidIsometry("does not preserve the upper sheet")
        return g

    # standard elements
    def rotation(self, angle, i=1, j=2) -> Isometry:
        g = np.eye(self.n + 1)
        c, s = math.cos(angle), math.sin(angle)
        g[i, i], g[i, j], g[j, i], g[j, j] = c, -s, s, c
        return self.isometry(g)

    def boost(self, length, axis=1) -> Isometry:
        """Translation of the given length along the geodesic through the origin in direction ``axis``."""
        g = np.eye(self.n + 1)
        c, s = math.cosh(length), math.sinh(length)
        g[0, 0], g[0, axis], g[axis, 0], g[axis, axis] = c, s, s, c
        return self.isometry(g)

    def parabolic(self, s, axis=1, other=2) -> Isometry:
        """Parabolic element fixing the ideal point [1 : e_axis], shifting along ``other``."""
        g = np.eye(self.n + 1)
        h = 0.5 * s * s
        a, b = axis, other
        g[0, 0], g[0, a], g[0, b] = 1 + h, -h, s
        g[a, 0], g[a, a], g[a, b] = h, 1 - h, s
        g[b, 0], g[b, a], g[b, b] = s, -s, 1.0
        return self.isometry(g)

    def translation_length(self, g: Isometry) -> float:
        """log of the spectral radius of the Lorentz matrix (0 for elliptic and parabolic)."""
        rho = float(np.max(np.abs(np.linalg.eigvals(np.asarray(g.data)))))
        return max(math.log(rho), 0.0)

    def random_point(self, rng, scale=1.0):
        return self.exp(self.origin, self.random_tangent(rng, self.origin, scale))

    def random_tangent(self, rng, x, scale=1.0):
        v = np.concatenate([[0.0], rng.normal(scale=scale, size=self.n)])
        x = np.asarray(x)
        # project onto T_x: v + <x, v> x
        return v + minkowski(x, v) * x

    def to_dict(self):
        return {"kind": self.kind, "dim": self.n}


# -- SPD matrices ----------------------------------------------------------------

class SPD(ModelSpace):
    """Symmetric positive-definite p x p matrices, distance ||log(x^-1/2 y x^-1/2)||_F."""

    kind = "spd"
    curvature_scale = math.sqrt(0.5)

    def __init__(self, p: int):
        if p < 1:
            raise ValueError("dimension must be >= 1")
        self.p = p

    def check_point(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.p, self.p) or not np.all(np.isfinite(x)):
            raise InvalidPoint(f"expected a {self.p}x{self.p} matrix")
        if np.max(np.abs(x - x.T)) > 1e-12 * max(1.0, float(np.max(np.abs(x)))):
            raise InvalidPoint("not symmetric")
        if linalg.eigvalsh(x)[0] <= 1e-10:
            raise InvalidPoint("not positive definite")
        return x

    def _split(self, x):
        w, v = linalg.eigh(x)
        if w[0] <= 1e-300:
            raise NumericalDegeneracy(f"eigenvalue underflow ({w[0]:.3e})")
        r = np.sqrt(w)
        return (v * r) @ v.T, (v / r) @ v.T

    def _whiten(self, x, y):
        s, si = self._split(x)
        m = si @ y @ si
        return s, si, 0.5 * (m + m.T)

    def distance(self, x, y):
        if np.array_equal(x, y):
            return 0.0
        _, _, m = self._whiten(x, y)
        w = linalg.eigvalsh(m)
        if w[0] <= 1e-300:
            raise NumericalDegeneracy(f"eigenvalue underflow ({w[0]:.3e})")
        return float(np.sqrt(np.sum(np.log(w) ** 2)))

    def exp(self, x, v):
        s, si = self._split(x)
        m = si @ np.asarray(v) @ si
        e = linalg.sym_funm(0.5 * (m + m.T), np.exp)
        out = s @ e @ s
        return 0.5 * (out + out.T)

    def log(self, x, y):
        if np.array_equal(x, y):
            return np.zeros((self.p, self.p))
        s, _, m = self._whiten(x, y)
        w, v = linalg.eigh(m)
        if w[0] <= 1e-300:
            raise NumericalDegeneracy(f"eigenvalue underflow ({w[0]:.3e})")
        lm = (v * np.log(w)) @ v.T
        out = s @ lm @ s
        return 0.5 * (out + out.T)

    def inner(self, x, u, v):
        xi = np.linalg.inv(x)
        return float(np.trace(xi @ u @ xi @ v))

    def tangent_norm(self, x, v):
        _, si = self._split(x)
        return float(np.linalg.norm(si @ v @ si))

    def identity_data(self):
        return np.eye(self.p)

    def apply(self, g, x):
        out = g @ x @ g.T
        return 0.5 * (out + out.T)

    def compose(self, g, h):
        return g @ h

    def invert(self, g):
        return np.linalg.inv(g)

    def check_isometry_data(self, g):
        g = np.asarray(g, dtype=float)
        if g.shape != (self.p, self.p):
            raise InvalidIsometry("shape mismatch")
        if abs(np.linalg.det(g)) < 1e-12:
            raise InvalidIsometry("not invertible")
        return g

    def stabilizer_element(self, base, orth) -> Isometry:
        """base^{1/2} O base^{-1/2}: an isometry fixing ``base`` for orthogonal O."""
        s, si = self._split(np.asarray(base, dtype=float))
        return self.isometry(s @ np.asarray(orth, dtype=float) @ si)

    def random_point(self, rng, scale=1.0):
        return self.exp(np.eye(self.p), self.random_tangent(rng, np.eye(self.p), scale))

    def random_tangent(self, rng, x, scale=1.0):
        a = rng.normal(scale=scale, size=(self.p, self.p))
        return 0.5 * (a + a.T)

    def to_dict(self):
        return {"kind": self.kind, "dim": self.p}


# -- products --------------------------------------------------------------------

class Product(ModelSpace):
    """L^2 product; nested products are flattened."""

    kind = "product"

    def __init__(self, factors):
        flat = []
        for f in factors:
            if isinstance(f, Product):
                flat.extend(f.factors)
            else:
                flat.append(f)
        if not flat:
            raise ValueError("a product needs at least one factor")
        self.factors = tuple(flat)
        self.curvature_scale = max(f.curvature_scale for f in flat)

    def _zip(self, *args):
        return zip(self.factors, *args)

    def check_point(self, x):
        if len(x) != len(self.factors):
            raise InvalidPoint("wrong number of factor components")
        return tuple(f.check_point(xi) for f, xi in self._zip(x))

    def distance(self, x, y):
        return math.sqrt(sum(f.distance(a, b) ** 2 for f, a, b in self._zip(x, y)))

    def exp(self, x, v):
        return tuple(f.exp(a, b) for f, a, b in self._zip(x, v))

    def log(self, x, y):
        return tuple(f.log(a, b) for f, a, b in self._zip(x, y))

    def inner(self, x, u, v):
        return sum(f.inner(a, b, c) for f, a, b, c in self._zip(x, u, v))

    def tangent_norm(self, x, v):
        return math.sqrt(sum(f.tangent_norm(a, b) ** 2 for f, a, b in self._zip(x, v)))

    def zero_tangent(self, x):
        return tuple(f.zero_tangent(a) for f, a in self._zip(x))

    def tangent_combine(self, vs, coeffs):
        vs = list(vs)
        coeffs = list(coeffs)
        return tuple(
            f.tangent_combine([v[i] for v in vs], coeffs) for i, f in enumerate(self.factors)
        )

    def identity_data(self):
        return tuple(f.identity_data() for f in self.factors)

    def apply(self, g, x):
        return tuple(f.apply(gi, xi) for f, gi, xi in self._zip(g, x))

    def compose(self, g, h):
        return tuple(f.compose(a, b) for f, a, b in self._zip(g, h))

    def invert(self, g):
        return tuple(f.invert(a) for f, a in self._zip(g))

    def check_isometry_data(self, g):
        if len(g) != len(self.factors):
            raise InvalidIsometry("wrong number of factor components")
        return tuple(f.check_isometry_data(gi) for f, gi in self._zip(g))

    def isometry_deviation(self, g, h):
        return max(f.isometry_deviation(a, b) for f, a, b in self._zip(g, h))

    def from_factors(self, isos) -> Isometry:
        return Isometry(self, tuple(i.data for i in isos))

    def random_point(self, rng, scale=1.0):
        return tuple(f.random_point(rng, scale) for f in self.factors)

    def random_tangent(self, rng, x, scale=1.0):
        return tuple(f.random_tangent(rng, a, scale) for f, a in self._zip(x))

    def to_dict(self):
        return {"kind": self.kind, "factors": [f.to_dict() for f in self.factors]}

    def point_to_json(self, x):
        return [f.point_to_json(a) for f, a in self._zip(x)]

    def point_from_json(self, obj):
        if len(obj) != len(self.factors):
            raise InvalidPoint("wrong number of factor components")
        return tuple(f.point_from_json(a) for f, a in self._zip(obj))

    def isometry_to_json(self, g):
        return {
            "factors": [f.isometry_to_json(Isometry(f, gi)) for f, gi in self._zip(g.data)]
        }

    def isometry_from_json(self, obj):
        if obj is None or obj == "identity":
            return self.identity()
        try:
            parts = obj["factors"]
        except (KeyError, TypeError) as exc:
            raise InvalidIsometry(f"bad isometry encoding: {exc}") from exc
        return Isometry(self, tuple(f.isometry_from_json(p).data for f, p in self._zip(parts)))


def space_from_dict(d) -> ModelSpace:
    kind = d.get("kind") if isinstance(d, dict) else None
    if kind == "euclidean":
        return Euclidean(int(d["dim"]))
    if kind == "hyperbolic":
        return Hyperbolic(int(d["dim"]))
    if kind == "spd":
        return SPD(int(d["dim"]))
    if kind == "product":
        return Product([space_from_dict(f) for f in d["factors"]])
    raise ValueError(f"unknown space description {d!r}")


# -- operations shared by every space ------------------------------------------

def distance(s: ModelSpace, x, y) -> float:
    return s.distance(x, y)


def exp_map(s: ModelSpace, x, v):
    return s.exp(x, v)


def log_map(s: ModelSpace, x, y):
    return s.log(x, y)


def geodesic_point(s: ModelSpace, x, y, t: float):
    if t == 0.0:
        return x
    if t == 1.0:
        return y
    return s.exp(x, s.tangent_combine([s.log(x, y)], [t]))


def apply_isometry(s: ModelSpace, g: Isometry, x):
    return g(x)


def compose(g: Isometry, h: Isometry) -> Isometry:
    return g @ h


def inverse(g: Isometry) -> Isometry:
    return g.inverse()


def displacement(s: ModelSpace, gens, x) -> float:
    """Sum over generators of d(x, g x)^2."""
    return sum(s.distance(x, g(x)) ** 2 for g in gens)


def weighted_energy(s: ModelSpace, x, points, weights) -> float:
    return 0.5 * sum(w * s.distance(x, p) ** 2 for p, w in zip(points, weights))


def frechet_mean(s: ModelSpace, points, weights=None, *, x0=None, tol=1e-10, max_iter=10000):
    """Minimiser of sum w_i d(x, p_i)^2.

    Gradient iteration x <- exp(x, t sum w_i log(x, p_i) / sum w_i) with t the
    inverse of a curvature bound on the Hessian (t = 1 when flat), halving
    t whenever the weighted energy would increase. Stops once
    ||sum w_i log(x, p_i)|| <= tol * sum(w) * max_i d(x, p_i), or once the
    energy has stopped decreasing (rounding floor of the coordinates, e.g.
    far-out hyperboloid points) with relative gradient below STALL_TOL or
    absolute gradient below STALL_ABS.
    """
    points = list(points)
    if not points:
        raise ValueError("need at least one point")
    weights = [1.0] * len(points) if weights is None else [float(w) for w in weights]
    if any(w < 0 for w in weights) or sum(weights) <= 0:
        raise ValueError("weights must be nonnegative and not all zero")
    pairs = [(p, w) for p, w in zip(points, weights) if w > 0]
    total = sum(w for _, w in pairs)
    if len(pairs) == 1:
        return pairs[0][0]
    if len(pairs) == 2 and x0 is None:
        (a, wa), (b, wb) = pairs
        return geodesic_point(s, a, b, wb / total)

    pts = [p for p, _ in pairs]
    ws = [w / total for _, w in pairs]
    x = pts[int(np.argmax(ws))] if x0 is None else x0
    energy = weighted_energy(s, x, pts, ws)
    flat = 0
    for _ in range(max_iter):
        logs = [s.log(x, p) for p in pts]
        grad = s.tangent_combine(logs, ws)
        gnorm = s.tangent_norm(x, grad)
        dists = [s.tangent_norm(x, v) for v in logs]
        maxd = max(dists)
        if maxd == 0.0 or gnorm <= tol * maxd:
            return x
        if flat >= 20:
            if gnorm <= max(STALL_TOL * maxd, STALL_ABS):
                return x
            raise NoConvergence(f"energy stalled with gradient norm {gnorm:.3e}")
        # near the minimum, energy differences drown in coordinate rounding
        # (which grows like x0^2 on the hyperboloid); tolerate that much
        slack = ENERGY_SLACK * max(energy, 1e-300)
        step = 1.0 / sum(w * s.hessian_bound(d) for d, w in zip(dists, ws))
        for _ in range(30):
            cand = s.exp(x, s.tangent_combine([grad], [step]))
            e_new = weighted_energy(s, cand, pts, ws)
            if e_new <= energy + slack:
                flat = flat + 1 if e_new >= energy else 0
                x, energy = cand, min(e_new, energy)
                break
            step *= 0.5
        else:
            flat = 20
    raise NoConvergence(f"Frechet mean did not converge in {max_iter} iterations")
