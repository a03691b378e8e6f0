"""Parabolic subgroups of indefinite orthogonal / unitary / quaternionic-unitary groups.

The form is Q = [[0, I_q, 0], [I_q, 0, 0], [0, 0, J]] on K^q + K^q + K^n3 with
J = diag(-I_{p-q}, I_{n3-(p-q)}). The stabiliser of the isotropic span
{e_1, ..., e_q} consists of block matrices

    g = [[M, Y, -M B* J R], [0, (M*)^-1, 0], [0, B, R]]

with R*JR = J and M^-1 Y + (M^-1 Y)* = -B*JB. Here * is the conjugate
transpose over K in {R, C, H}.

Quaternionic matrices are (m, n, 4) float arrays (w, x, y, z). They are
multiplied and inverted through the complex embedding
a + b j  ->  [[a, b], [-conj(b), conj(a)]] with a = w + x i, b = y + z i,
under which conjugate transpose is the complex conjugate transpose.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import ConstraintViolated, DimensionError, RankDeficient

MAX_N3 = 64
FORM_TOL = 1e-10
ISOTROPY_TOL = 1e-12


# -- scalar fields ---------------------------------------------------------------

class KField:
    name = ""

    def eye(self, n):
        raise NotImplementedError

    def zeros(self, m, n):
        raise NotImplementedError

    def from_real(self, a):
        raise NotImplementedError

    def matmul(self, a, b):
        raise NotImplementedError

    def ct(self, a):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def gaussian(self, rng, m, n, scale=1.0):
        raise NotImplementedError

    def abs(self, a):
        return np.abs(a)

    def max_abs(self, a) -> float:
        a = self.abs(a)
        return float(np.max(a)) if a.size else 0.0

    def fro(self, a) -> float:
        return float(np.sqrt(np.sum(self.abs(a) ** 2)))

    def rows(self, a) -> int:
        return a.shape[0]

    def cols(self, a) -> int:
        return a.shape[1]

    def block(self, rows):
        return np.block(rows) if self.name != "H" else np.concatenate(
            [np.concatenate(r, axis=1) for r in rows], axis=0
        )

    def real_embedding(self, a) -> np.ndarray:
        """Real matrix of the same rank (times the real dimension of K)."""
        raise NotImplementedError

    def mm(self, *mats):
        out = mats[0]
        for m in mats[1:]:
            out = self.matmul(out, m)
        return out


class RealField(KField):
    name = "R"

    def eye(self, n):
        return np.eye(n)

    def zeros(self, m, n):
        return np.zeros((m, n))

    def from_real(self, a):
        return np.asarray(a, dtype=float)

    def matmul(self, a, b):
        return a @ b

    def ct(self, a):
        return a.T

    def inv(self, a):
        return np.linalg.inv(a)

    def gaussian(self, rng, m, n, scale=1.0):
        return rng.normal(scale=scale, size=(m, n))

    def real_embedding(self, a):
        return a


class ComplexField(KField):
    name = "C"

    def eye(self, n):
        return np.eye(n, dtype=complex)

    def zeros(self, m, n):
        return np.zeros((m, n), dtype=complex)

    def from_real(self, a):
        return np.asarray(a, dtype=complex)

    def matmul(self, a, b):
        return a @ b

    def ct(self, a):
        return a.conj().T

    def inv(self, a):
        return np.linalg.inv(a)

    def gaussian(self, rng, m, n, scale=1.0):
        s = scale / np.sqrt(2.0)
        return rng.normal(scale=s, size=(m, n)) + 1j * rng.normal(scale=s, size=(m, n))

    def real_embedding(self, a):
        return np.block([[a.real, -a.imag], [a.imag, a.real]])


class QuaternionField(KField):
    name = "H"

    def eye(self, n):
        out = np.zeros((n, n, 4))
        out[np.arange(n), np.arange(n), 0] = 1.0
        return out

    def zeros(self, m, n):
        return np.zeros((m, n, 4))

    def from_real(self, a):
        a = np.asarray(a, dtype=float)
        out = np.zeros(a.shape + (4,))
        out[..., 0] = a
        return out

    @staticmethod
    def to_complex(a):
        """[[A, B], [-conj(B), conj(A)]] for a = A + B j."""
        A = a[..., 0] + 1j * a[..., 1]
        B = a[..., 2] + 1j * a[..., 3]
        return np.block([[A, B], [-B.conj(), A.conj()]])

    @staticmethod
    def from_complex(c):
        m, n = c.shape[0] // 2, c.shape[1] // 2
        A, B = c[:m, :n], c[:m, n:]
        return np.stack([A.real, A.imag, B.real, B.imag], axis=-1)

    def matmul(self, a, b):
        return self.from_complex(self.to_complex(a) @ self.to_complex(b))

    def ct(self, a):
        out = np.swapaxes(a, 0, 1).copy()
        out[..., 1:] *= -1.0
        return out

    def inv(self, a):
        return self.from_complex(np.linalg.inv(self.to_complex(a)))

    def gaussian(self, rng, m, n, scale=1.0):
        return rng.normal(scale=scale / 2.0, size=(m, n, 4))

    def abs(self, a):
        return np.sqrt(np.sum(a * a, axis=-1))

    def real_embedding(self, a):
        c = self.to_complex(a)
        return np.block([[c.real, -c.imag], [c.imag, c.real]])


FIELDS = {"R": RealField(), "C": ComplexField(), "H": QuaternionField()}


def get_field(name) -> KField:
    if isinstance(name, KField):
        return name
    key = str(name).upper()
    if key not in FIELDS:
        raise ValueError(f"unknown field {name!r}; expected one of R, C, H")
    return FIELDS[key]


# -- the form --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FormMatrix:
    field: KField
    q_iso: int
    p: int
    n3: int
    Q: np.ndarray
    J: np.ndarray
    signature: tuple

    @property
    def size(self) -> int:
        return 2 * self.q_iso + self.n3

    @property
    def n_negative(self) -> int:
        return self.p - self.q_iso


def standard_form(k_field, q_iso: int, p: int, n3: int) -> FormMatrix:
    k = get_field(k_field)
    if not (1 <= q_iso <= p <= q_iso + n3):
        raise DimensionError(f"need 1 <= q <= p <= q + n3, got q={q_iso}, p={p}, n3={n3}")
    if n3 > MAX_N3:
        raise DimensionError(f"n3={n3} exceeds {MAX_N3}")
    neg = p - q_iso
    j = np.diag([-1.0] * neg + [1.0] * (n3 - neg))
    q = np.zeros((2 * q_iso + n3,) * 2)
    q[:q_iso, q_iso:2 * q_iso] = np.eye(q_iso)
    q[q_iso:2 * q_iso, :q_iso] = np.eye(q_iso)
    q[2 * q_iso:, 2 * q_iso:] = j
    w = linalg.eigvalsh(q)
    sig = (int(np.sum(w > 0.5)), int(np.sum(w < -0.5)))
    if sig != (n3 - neg + q_iso, p):
        raise DimensionError(f"signature {sig} does not match ({n3 - neg + q_iso}, {p})")
    return FormMatrix(k, q_iso, p, n3, k.from_real(q), k.from_real(j), sig)


def _check_square(k: KField, g, n: int):
    if k.rows(g) != n or k.cols(g) != n:
        raise DimensionError(f"expected a {n}x{n} matrix")


def preserves_form(g, form: FormMatrix) -> float:
    """||g* Q g - Q||_max."""
    k = form.field
    _check_square(k, g, form.size)
    return k.max_abs(k.mm(k.ct(g), form.Q, g) - form.Q)


def form_inverse(g, form: FormMatrix):
    """g^-1 = Q^-1 g* Q (Q is its own inverse)."""
    k = form.field
    return k.mm(form.Q, k.ct(g), form.Q)


# -- parabolic elements -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ParabolicElement:
    form: FormMatrix
    M: np.ndarray
    Y: np.ndarray
    B: np.ndarray
    R: np.ndarray
    matrix: np.ndarray

    @property
    def field(self) -> KField:
        return self.form.field

    def is_nil(self, tol=1e-10) -> bool:
        k = self.field
        return (
            k.max_abs(self.M - k.eye(self.form.q_iso)) <= tol
            and k.max_abs(self.R - k.eye(self.form.n3)) <= tol
        )

    def __matmul__(self, other: "ParabolicElement") -> "ParabolicElement":
        return from_matrix(self.form, self.field.matmul(self.matrix, other.matrix))

    def inverse(self) -> "ParabolicElement":
        return from_matrix(self.form, form_inverse(self.matrix, self.form))


def _blocks(form: FormMatrix):
    q, n3 = form.q_iso, form.n3
    return slice(0, q), slice(q, 2 * q), slice(2 * q, 2 * q + n3)


def from_matrix(form: FormMatrix, g) -> ParabolicElement:
    """Read the blocks of an (already assembled) parabolic matrix."""
    _check_square(form.field, g, form.size)
    a, b, c = _blocks(form)
    return ParabolicElement(form, g[a, a], g[a, b], g[c, b], g[c, c], g)


def assemble(form: FormMatrix, M, Y, B, R):
    k = form.field
    q, n3 = form.q_iso, form.n3
    Z = -k.mm(M, k.ct(B), form.J, R)
    L = k.ct(k.inv(M))
    return k.block(
        [
            [M, Y, Z],
            [k.zeros(q, q), L, k.zeros(q, n3)],
            [k.zeros(n3, q), B, R],
        ]
    )


def _scale(k: KField, *mats) -> float:
    return max([1.0] + [k.max_abs(m) for m in mats])


def check_R(form: FormMatrix, R, tol=FORM_TOL) -> float:
    k = form.field
    res = k.max_abs(k.mm(k.ct(R), form.J, R) - form.J)
    if res > tol * _scale(k, R) ** 2:
        raise ConstraintViolated("R", res)
    return res


def check_M(form: FormMatrix, M) -> None:
    k = form.field
    s = np.linalg.svd(k.real_embedding(M), compute_uv=False)
    if s[-1] <= 1e-12 * max(1.0, s[0]):
        raise ConstraintViolated("M", float(s[-1]))


def y_residual(form: FormMatrix, M, Y, B) -> float:
    """||M^-1 Y + (M^-1 Y)* + B* J B||_max."""
    k = form.field
    x = k.matmul(k.inv(M), Y)
    return k.max_abs(x + k.ct(x) + k.mm(k.ct(B), form.J, B))


def make_parabolic(form: FormMatrix, M, Y, B, R, tol=FORM_TOL) -> ParabolicElement:
    """Assemble g with Z = -M B* J R, L = (M*)^-1, W = 0 after checking the constraints.

    Residuals are compared with ``tol`` times the squared size of the
    entries involved.
    """
    k = form.field
    q, n3 = form.q_iso, form.n3
    for name, m, shape in (("M", M, (q, q)), ("Y", Y, (q, q)), ("B", B, (n3, q)), ("R", R, (n3, n3))):
        if (k.rows(m), k.cols(m)) != shape:
            raise DimensionError(f"block {name} must be {shape[0]}x{shape[1]}")
    check_M(form, M)
    check_R(form, R, tol)
    res = y_residual(form, M, Y, B)
    if res > tol * _scale(k, k.matmul(k.inv(M), Y), B) ** 2:
        raise ConstraintViolated("Y", res)
    g = assemble(form, M, Y, B, R)
    return ParabolicElement(form, M, Y, B, R, g)


def make_nil(form: FormMatrix, Y, B, tol=FORM_TOL) -> ParabolicElement:
    k = form.field
    return make_parabolic(form, k.eye(form.q_iso), Y, B, k.eye(form.n3), tol)


def make_levi(form: FormMatrix, M, R, tol=FORM_TOL) -> ParabolicElement:
    k = form.field
    q = form.q_iso
    return make_parabolic(form, M, k.zeros(q, q), k.zeros(form.n3, q), R, tol)


def project(g: ParabolicElement) -> np.ndarray:
    """Levi projection diag(M, (M*)^-1, R)."""
    k = g.field
    q, n3 = g.form.q_iso, g.form.n3
    return k.block(
        [
            [g.M, k.zeros(q, q), k.zeros(q, n3)],
            [k.zeros(q, q), k.ct(k.inv(g.M)), k.zeros(q, n3)],
            [k.zeros(n3, q), k.zeros(n3, q), g.R],
        ]
    )


def parabolic_decompose(g: ParabolicElement) -> tuple[ParabolicElement, ParabolicElement]:
    """g = n . levi with n unipotent (blocks Y M*, B M*) and levi = diag(M, (M*)^-1, R)."""
    k = g.field
    levi = from_matrix(g.form, project(g))
    n = from_matrix(g.form, k.matmul(g.matrix, form_inverse(levi.matrix, g.form)))
    return n, levi


def nil_commutator(a: ParabolicElement, b: ParabolicElement) -> ParabolicElement:
    """a b a^-1 b^-1."""
    k = a.field
    m = k.mm(a.matrix, b.matrix, form_inverse(a.matrix, a.form), form_inverse(b.matrix, b.form))
    return from_matrix(a.form, m)


def conjugate_by_levi(n: ParabolicElement, M, R, tol=FORM_TOL) -> ParabolicElement:
    """levi n levi^-1, whose blocks are (M Y M*, R B M*)."""
    form = n.form
    levi = make_levi(form, M, R, tol)
    k = form.field
    return from_matrix(form, k.mm(levi.matrix, n.matrix, form_inverse(levi.matrix, form)))


def isotropic_check(basis, form: FormMatrix, tol=ISOTROPY_TOL) -> bool:
    """True iff v* Q w = 0 for all pairs of basis columns."""
    k = form.field
    if k.rows(basis) != form.size:
        raise DimensionError("basis vectors have the wrong length")
    emb = k.real_embedding(basis)
    dim_r = emb.shape[1]
    if np.linalg.matrix_rank(emb, tol=1e-10) < dim_r:
        raise RankDeficient("basis vectors are linearly dependent")
    return k.max_abs(k.mm(k.ct(basis), form.Q, basis)) <= tol


def basis_vectors(form: FormMatrix, indices) -> np.ndarray:
    """Columns e_i (0-based indices) as an N x len(indices) matrix over K."""
    e = np.zeros((form.size, len(indices)))
    for j, i in enumerate(indices):
        e[i, j] = 1.0
    return form.field.from_real(e)


# -- random instances --------------------------------------------------------------------

def gram_schmidt(k: KField, a):
    """Orthonormalise the columns of ``a`` under <u, v> = u* v (scalars act on the right)."""
    n = k.cols(a)
    cols = []
    for j in range(n):
        v = a[:, j:j + 1].copy()
        for u in cols:
            v = v - k.matmul(u, k.matmul(k.ct(u), v))
        nv = k.fro(v)
        if nv < 1e-12:
            raise RankDeficient("columns are linearly dependent")
        cols.append(v / nv)
    return np.concatenate(cols, axis=1)


def random_unitary(k: KField, rng, n: int):
    return gram_schmidt(k, k.gaussian(rng, n, n))


def random_M(k: KField, rng, q: int):
    """Unitary times an upper-triangular factor with diagonal in [0.5, 2]."""
    t = k.gaussian(rng, q, q, 0.3)
    t[~np.triu(np.ones((q, q), dtype=bool), 1)] = 0.0
    d = k.from_real(np.diag(rng.uniform(0.5, 2.0, size=q)))
    return k.matmul(random_unitary(k, rng, q), t + d)


def random_R(form: FormMatrix, rng, boost_scale: float = 0.5, unitary_only: bool = False):
    """K1 . boosts . K2 with K1, K2 block-unitary for the two J blocks."""
    k = form.field
    a = form.n_negative
    b = form.n3 - a

    def block_unitary():
        out = k.zeros(form.n3, form.n3)
        if a:
            out[:a, :a] = random_unitary(k, rng, a)
        if b:
            out[a:, a:] = random_unitary(k, rng, b)
        return out

    if unitary_only or a == 0 or b == 0:
        return block_unitary()
    h = np.eye(form.n3)
    for i in range(min(a, b)):
        t = rng.normal(scale=boost_scale)
        c, s = np.cosh(t), np.sinh(t)
        h[i, i], h[i, a + i], h[a + i, i], h[a + i, a + i] = c, s, s, c
    return k.mm(block_unitary(), k.from_real(h), block_unitary())


def random_skew(k: KField, rng, q: int):
    x = k.gaussian(rng, q, q)
    return 0.5 * (x - k.ct(x))


def random_Y(form: FormMatrix, rng, M, B):
    """M (S - B*JB / 2) with S skew-Hermitian: satisfies the Y constraint exactly."""
    k = form.field
    s = random_skew(k, rng, form.q_iso)
    return k.matmul(M, s - 0.5 * k.mm(k.ct(B), form.J, B))


def random_parabolic(form: FormMatrix, rng) -> ParabolicElement:
    k = form.field
    M = random_M(k, rng, form.q_iso)
    R = random_R(form, rng)
    B = k.gaussian(rng, form.n3, form.q_iso)
    return make_parabolic(form, M, random_Y(form, rng, M, B), B, R)


def random_nil(form: FormMatrix, rng) -> ParabolicElement:
    k = form.field
    B = k.gaussian(rng, form.n3, form.q_iso)
    return make_nil(form, random_Y(form, rng, k.eye(form.q_iso), B), B)


# -- trial suite -------------------------------------------------------------------------

def run_trials(k_field, q_iso: int, p: int, n3: int, trials: int, seed: int) -> dict:
    """Seeded random checks of every parabolic identity; returns the max residual of each."""
    form = standard_form(k_field, q_iso, p, n3)
    k = form.field
    rng = np.random.default_rng(seed)
    eye = k.eye(form.size)
    worst = {
        "form": 0.0,
        "reconstruction": 0.0,
        "projection_homomorphism": 0.0,
        "closure": 0.0,
        "commutator_b_block": 0.0,
        "double_commutator": 0.0,
        "levi_norm": 0.0,
        "levi_blocks": 0.0,
        "b_homomorphism": 0.0,
    }

    def bump(key, value):
        worst[key] = max(worst[key], float(value))

    for _ in range(trials):
        g1, g2 = random_parabolic(form, rng), random_parabolic(form, rng)
        bump("form", max(preserves_form(g1.matrix, form), preserves_form(g2.matrix, form)))

        n, levi = parabolic_decompose(g1)
        bump("reconstruction", k.max_abs(k.matmul(n.matrix, levi.matrix) - g1.matrix))

        prod = g1 @ g2
        bump("projection_homomorphism", k.max_abs(project(prod) - k.matmul(project(g1), project(g2))))
        a, _, c = _blocks(form)
        bump(
            "closure",
            max(
                preserves_form(prod.matrix, form),
                preserves_form(g1.inverse().matrix, form),
                k.max_abs(prod.matrix[c, a]),
                k.max_abs(prod.matrix[_blocks(form)[1], a]),
            ),
        )

        n1, n2, n3_, n4 = (random_nil(form, rng) for _ in range(4))
        c1, c2 = nil_commutator(n1, n2), nil_commutator(n3_, n4)
        bump("commutator_b_block", max(k.max_abs(c1.B), k.max_abs(c2.B)))
        bump("double_commutator", k.max_abs(nil_commutator(c1, c2).matrix - eye))
        bump("b_homomorphism", k.max_abs((n1 @ n2).B - (n1.B + n2.B)))

        M = random_unitary(k, rng, q_iso)
        R = random_R(form, rng, unitary_only=True)
        conj = conjugate_by_levi(n1, M, R)
        bump(
            "levi_norm",
            max(abs(k.fro(conj.Y) - k.fro(n1.Y)), abs(k.fro(conj.B) - k.fro(n1.B))),
        )
        Mg, Rg = random_M(k, rng, q_iso), random_R(form, rng)
        conj = conjugate_by_levi(n1, Mg, Rg)
        bump(
            "levi_blocks",
            max(
                k.max_abs(conj.Y - k.mm(Mg, n1.Y, k.ct(Mg))),
                k.max_abs(conj.B - k.mm(Rg, n1.B, k.ct(Mg))),
            ),
        )
    return {
        "field": k.name,
        "q": q_iso,
        "p": p,
        "n3": n3,
        "trials": trials,
        "seed": seed,
        "max_residuals": worst,
    }


# thresholds applied by the trial report
TRIAL_LIMITS = {
    "form": 1e-10,
    "reconstruction": 1e-10,
    "projection_homomorphism": 1e-9,
    "closure": 1e-9,
    "commutator_b_block": 1e-10,
    "double_commutator": 1e-12,
    "levi_norm": 1e-10,
    "levi_blocks": 1e-10,
    "b_homomorphism": 1e-10,
}


def trial_failures(report: dict) -> list[str]:
    return [k for k, v in report["max_residuals"].items() if v > TRIAL_LIMITS[k]]
