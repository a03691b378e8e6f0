"""Finite fields F_q (q = p^k) and real quaternions.

Elements of a :class:`FiniteField` are integer indices. The index of the
polynomial ``c_0 + c_1 x + ... + c_{k-1} x^{k-1}`` is ``sum(c_i * p**i)``,
so ``0`` is zero, ``1`` is one and, for ``k >= 2``, ``p`` is the class of
``x``. Arithmetic goes through precomputed addition and multiplication
tables, which keeps the incidence-geometry constructions cheap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivisionByZero, FieldMismatch, NoIrreducibleFound, NotPrime, OrderTooLarge

DEFAULT_CAP = 1024


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % d for d in range(3, math.isqrt(n) + 1, 2))


# -- polynomials over F_p as little-endian coefficient lists -------------------

def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_rem(a, b, p):
    """Remainder of ``a`` modulo ``b`` over F_p (``b`` nonzero)."""
    a = _trim(a)
    b = _trim(b)
    inv_lead = pow(b[-1], p - 2, p) if p > 2 else 1
    while len(a) >= len(b):
        coef = (a[-1] * inv_lead) % p
        shift = len(a) - len(b)
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - coef * bi) % p
        a = _trim(a)
    return a


def poly_mulmod(a, b, mod, p):
    prod = [0] * (len(a) + len(b))
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    return poly_rem(prod, mod, p)


def _monic_in_index_order(p, degree):
    # index order: c_0 + c_1 p + ... ascending
    for idx in range(p**degree):
        coeffs = []
        for _ in range(degree):
            idx, r = divmod(idx, p)
            coeffs.append(r)
        yield coeffs + [1]


def is_irreducible(poly, p) -> bool:
    """Trial division by every monic polynomial of degree 1..deg/2."""
    poly = _trim(poly)
    deg = len(poly) - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for g in _monic_in_index_order(p, d):
            if not poly_rem(poly, g, p):
                return False
    return True


def first_irreducible(p, k):
    """Lexicographically-first monic irreducible of degree ``k`` (index order)."""
    for cand in _monic_in_index_order(p, k):
        if is_irreducible(cand, p):
            return tuple(cand)
    raise NoIrreducibleFound(f"no irreducible polynomial of degree {k} over F_{p}")


# -- the field -------------------------------------------------------------------

class FiniteField:
    """The field with ``p**k`` elements in a polynomial basis."""

    def __init__(self, p: int, k: int = 1, cap: int = DEFAULT_CAP):
        if not is_prime(p):
            raise NotPrime(p)
        if k < 1:
            raise ValueError("extension degree must be >= 1")
        q = p**k
        if q > cap:
            raise OrderTooLarge(f"q = {q} exceeds cap {cap}")
        self.p = p
        self.k = k
        self.q = q
        self.modulus = first_irreducible(p, k) if k > 1 else (0, 1)

        digits = np.zeros((q, k), dtype=np.int64)
        for i in range(k):
            digits[:, i] = (np.arange(q) // p**i) % p
        self._digits = digits
        weights = p ** np.arange(k)
        self._add = (((digits[:, None, :] + digits[None, :, :]) % p) @ weights).astype(np.int32)
        self._neg = (((-digits) % p) @ weights).astype(np.int32)
        self._exp, self._log = self._discrete_log_tables()
        self._mul = self._build_mul_table()
        self._inv = np.zeros(q, dtype=np.int32)
        if q > 1:
            nz = np.arange(1, q)
            self._inv[1:] = self._exp[(-self._log[nz]) % (q - 1)]

    # construction helpers
    def _poly(self, a):
        return [int(c) for c in self._digits[a]]

    def _index(self, coeffs):
        return sum(int(c) * self.p**i for i, c in enumerate(coeffs))

    def _slow_mul(self, a, b):
        if self.k == 1:
            return (a * b) % self.p
        return self._index(poly_mulmod(self._poly(a), self._poly(b), self.modulus, self.p))

    def _discrete_log_tables(self):
        q = self.q
        order = q - 1
        for g in range(1, q):
            exp = [1]
            cur = g
            while cur != 1:
                exp.append(cur)
                cur = self._slow_mul(cur, g)
            if len(exp) == order:
                exp = np.array(exp, dtype=np.int32)
                log = np.zeros(q, dtype=np.int64)
                log[exp] = np.arange(order)
                return exp, log
        raise NoIrreducibleFound("multiplicative group is not cyclic; modulus search is broken")

    def _build_mul_table(self):
        q = self.q
        mul = np.zeros((q, q), dtype=np.int32)
        if q > 1:
            la = self._log[1:]
            mul[1:, 1:] = self._exp[(la[:, None] + la[None, :]) % (q - 1)]
        return mul

    # arithmetic on indices
    def add(self, a: int, b: int) -> int:
        return int(self._add[a, b])

    def sub(self, a: int, b: int) -> int:
        return int(self._add[a, self._neg[b]])

    def neg(self, a: int) -> int:
        return int(self._neg[a])

    def mul(self, a: int, b: int) -> int:
        return int(self._mul[a, b])

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("inverse of zero")
        return int(self._inv[a])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def power(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        if a == 0:
            return 0 if e else 1
        return int(self._exp[(self._log[a] * e) % (self.q - 1)])

    # tables, exposed for vectorised users
    @property
    def add_table(self):
        return self._add

    @property
    def mul_table(self):
        return self._mul

    @property
    def neg_table(self):
        return self._neg

    @property
    def inv_table(self):
        return self._inv

    def elements(self):
        return range(self.q)

    def element(self, a: int) -> "FieldElement":
        return FieldElement(self, a)

    @property
    def x(self) -> "FieldElement":
        """The class of the polynomial variable; only meaningful for k >= 2."""
        if self.k == 1:
            raise ValueError("prime fields have no polynomial variable")
        return FieldElement(self, self.p)

    def digits(self, a: int) -> tuple:
        return tuple(int(c) for c in self._digits[a])

    def fermat_check(self) -> bool:
        """Every nonzero ``a`` satisfies ``a**(q-1) == 1`` (square-and-multiply on the table)."""
        result = np.ones(self.q - 1, dtype=np.int64)
        base = np.arange(1, self.q)
        e = self.q - 1
        while e:
            if e & 1:
                result = self._mul[result, base]
            base = self._mul[base, base]
            e >>= 1
        return bool(np.all(result == 1))

    def _key(self):
        return (self.p, self.k, self.modulus)

    def __eq__(self, other):
        return isinstance(other, FiniteField) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"FiniteField(p={self.p}, k={self.k}, modulus={self.modulus})"


def field_create(p: int, k: int = 1, cap: int = DEFAULT_CAP) -> FiniteField:
    """Build F_{p^k}, verifying the modulus and (for q <= 512) the Fermat identity."""
    field = FiniteField(p, k, cap)
    if k > 1 and not is_irreducible(list(field.modulus), p):
        raise NoIrreducibleFound(f"modulus {field.modulus} failed the irreducibility check")
    if field.q <= 512 and not field.fermat_check():
        raise NoIrreducibleFound("Fermat check failed")
    return field


def field_of_order(q: int, cap: int = DEFAULT_CAP) -> FiniteField:
    """F_q for a prime power ``q``."""
    if q < 2:
        raise NotPrime(q)
    for p in range(2, q + 1):
        if q % p == 0:
            break
    k = 0
    n = q
    while n % p == 0:
        n //= p
        k += 1
    if n != 1:
        raise NotPrime(f"{q} is not a prime power")
    return field_create(p, k, cap)


class FieldElement:
    """An element bound to its field; mixing fields raises :class:`FieldMismatch`."""

    __slots__ = ("field", "value")

    def __init__(self, field: FiniteField, value: int):
        if not 0 <= value < field.q:
            raise ValueError(f"{value} is not an element index of {field!r}")
        self.field = field
        self.value = int(value)

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatch(f"{self.field!r} vs {other.field!r}")
            return other.value
        if isinstance(other, int):
            return other % self.field.p if self.field.k == 1 else _int_to_element(self.field, other)
        return NotImplemented

    def _wrap(self, v):
        return FieldElement(self.field, v)

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.add(self.value, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.sub(self.value, o))

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.sub(o, self.value))

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.mul(self.value, o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.div(self.value, o))

    def __neg__(self):
        return self._wrap(self.field.neg(self.value))

    def __pow__(self, e: int):
        return self._wrap(self.field.power(self.value, e))

    def inverse(self):
        return self._wrap(self.field.inv(self.value))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        if isinstance(other, int):
            o = self._coerce(other)
            return self.value == o
        return NotImplemented

    def __hash__(self):
        return hash((self.field, self.value))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"<F{self.field.q}: {self.value}>"


def _int_to_element(field, n):
    # integers map through the prime subfield
    return n % field.p


# -- quaternions -----------------------------------------------------------------

@dataclass(frozen=True)
class Quaternion:
    """``w + x i + y j + z k`` with the Hamilton relations ``ij = k``."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __add__(self, o):
        return Quaternion(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)

    def __sub__(self, o):
        return Quaternion(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, o):
        if isinstance(o, (int, float)):
            return Quaternion(self.w * o, self.x * o, self.y * o, self.z * o)
        a1, b1, c1, d1 = self.w, self.x, self.y, self.z
        a2, b2, c2, d2 = o.w, o.x, o.y, o.z
        return Quaternion(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )

    def __rmul__(self, o):
        if isinstance(o, (int, float)):
            return self * o
        return NotImplemented

    def conj(self):
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm(self) -> float:
        return math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)

    def inverse(self):
        n2 = self.w**2 + self.x**2 + self.y**2 + self.z**2
        if n2 == 0:
            raise DivisionByZero("inverse of the zero quaternion")
        c = self.conj()
        return Quaternion(c.w / n2, c.x / n2, c.y / n2, c.z / n2)

    def as_array(self):
        return np.array([self.w, self.x, self.y, self.z])

    @classmethod
    def from_array(cls, a):
        return cls(*(float(t) for t in a))


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def quat_mul(a, b):
    """Hamilton product of quaternion arrays with trailing axis of length 4 (broadcasting)."""
    a0, a1, a2, a3 = (a[..., i] for i in range(4))
    b0, b1, b2, b3 = (b[..., i] for i in range(4))
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def quat_conj(a):
    out = -np.asarray(a, dtype=float)
    out[..., 0] *= -1
    return out
