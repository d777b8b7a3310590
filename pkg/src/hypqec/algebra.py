"""Exact arithmetic in Z[phi] and its finite-field quotients.

``phi`` is the golden ratio, root of ``h(x) = x^2 - x - 1``.  Every maximal
ideal of Z[phi] contains a unique rational prime ``p`` and is one of

* ``<p>`` when ``h`` is irreducible mod ``p`` (quotient F_{p^2}),
* ``<p, phi - r>`` for a root ``r`` of ``h`` mod ``p`` (quotient F_p).

The ramified case is ``p = 5`` where ``h = (x - 3)^2`` mod 5 and the ideal is
``<2 phi - 1> = <sqrt 5>``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True, slots=True)
class GoldenInt:
    """The element ``a + b*phi`` of Z[phi]."""

    a: int = 0
    b: int = 0

    @classmethod
    def coerce(cls, x: GoldenInt | int) -> GoldenInt:
        if isinstance(x, GoldenInt):
            return x
        if isinstance(x, (int, np.integer)):
            return cls(int(x), 0)
        raise TypeError(f"cannot interpret {x!r} as an element of Z[phi]")

    def __add__(self, other):
        o = GoldenInt.coerce(other)
        return GoldenInt(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return GoldenInt(-self.a, -self.b)

    def __sub__(self, other):
        return self + (-GoldenInt.coerce(other))

    def __rsub__(self, other):
        return GoldenInt.coerce(other) - self

    def __mul__(self, other):
        return golden_mul(self, GoldenInt.coerce(other))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers are not in Z[phi] in general")
        out, base = GoldenInt(1, 0), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __float__(self):
        return self.a + self.b * PHI_FLOAT

    def conjugate(self) -> GoldenInt:
        """Galois conjugate, sending phi to 1 - phi."""
        return GoldenInt(self.a + self.b, -self.b)

    def norm(self) -> int:
        """Field norm ``x * conj(x) = a^2 + ab - b^2``."""
        return self.a * self.a + self.a * self.b - self.b * self.b

    def __repr__(self):
        return f"GoldenInt({self.a}, {self.b})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}φ"
        sign = "+" if self.b > 0 else "-"
        return f"{self.a}{sign}{abs(self.b)}φ"


PHI_FLOAT = (1.0 + 5.0**0.5) / 2.0
PHI = GoldenInt(0, 1)
SQRT5 = GoldenInt(-1, 2)


def golden_mul(x: GoldenInt, y: GoldenInt) -> GoldenInt:
    # phi^2 = phi + 1
    bb = x.b * y.b
    return GoldenInt(x.a * y.a + bb, x.a * y.b + x.b * y.a + bb)


# ---------------------------------------------------------------------------
# Prime ideals


class IdealKind(enum.Enum):
    INERT = "inert"
    SPLIT = "split"
    RAMIFIED = "ramified"


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class IdealSpec:
    """A maximal ideal of Z[phi]: ``<p>`` or ``<p, phi - root>``."""

    p: int
    kind: IdealKind
    root: int | None = None

    @property
    def degree(self) -> int:
        return 2 if self.kind is IdealKind.INERT else 1

    @property
    def q(self) -> int:
        return self.p**self.degree

    @cached_property
    def field(self) -> FiniteField:
        return FiniteField(self.p, self.degree)

    def label(self) -> str:
        if self.kind is IdealKind.INERT:
            return f"<{self.p}>"
        if self.kind is IdealKind.RAMIFIED:
            return "<2φ-1>"
        return f"<{self.p},φ-{self.root}>"


def golden_roots_mod(p: int) -> list[int]:
    """Roots of x^2 - x - 1 in F_p, by exhaustive search."""
    return [r for r in range(p) if (r * r - r - 1) % p == 0]


def classify_ideal(p: int, root: int | None = None) -> IdealSpec:
    """Classify the primes of Z[phi] above ``p``.

    For split ``p`` the smaller root is chosen unless ``root`` names the other
    one.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    roots = golden_roots_mod(p)
    if not roots:
        if root is not None:
            raise ValueError(f"x^2-x-1 has no root mod {p}")
        return IdealSpec(p, IdealKind.INERT)
    if len(roots) == 1:
        return IdealSpec(p, IdealKind.RAMIFIED, roots[0])
    if root is None:
        root = roots[0]
    elif root % p not in roots:
        raise ValueError(f"{root} is not a root of x^2-x-1 mod {p}")
    return IdealSpec(p, IdealKind.SPLIT, root % p)


def sqrt5_ideal() -> IdealSpec:
    """The ramified ideal <2 phi - 1>; its quotient is F_5 with phi -> 3."""
    return classify_ideal(5)


# ---------------------------------------------------------------------------
# Finite fields F_p and F_{p^2} = F_p[phi_bar]


class FiniteField:
    """F_p, or F_{p^2} on the basis {1, phi_bar} with phi_bar^2 = phi_bar + 1.

    Elements are small integer codes ``a + p*b`` standing for ``a + b*phi_bar``
    so that arrays of codes can be used as matrices.
    """

    def __init__(self, p: int, degree: int = 1):
        if degree not in (1, 2):
            raise ValueError("only degree 1 and 2 are supported")
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        if degree == 2 and golden_roots_mod(p):
            raise ValueError(f"x^2-x-1 is reducible mod {p}; F_{p}^2 needs another modulus")
        self.p = p
        self.degree = degree
        self.q = p**degree

    def __repr__(self):
        return f"FiniteField(p={self.p}, degree={self.degree})"

    def __eq__(self, other):
        return isinstance(other, FiniteField) and (self.p, self.degree) == (other.p, other.degree)

    def __hash__(self):
        return hash((self.p, self.degree))

    def split(self, codes):
        codes = np.asarray(codes, dtype=np.int64)
        return codes % self.p, codes // self.p

    def join(self, a, b):
        return (a % self.p) + self.p * (b % self.p)

    def add(self, x, y):
        if self.degree == 1:
            return (np.asarray(x, dtype=np.int64) + y) % self.p
        xa, xb = self.split(x)
        ya, yb = self.split(y)
        return self.join(xa + ya, xb + yb)

    def neg(self, x):
        if self.degree == 1:
            return (-np.asarray(x, dtype=np.int64)) % self.p
        xa, xb = self.split(x)
        return self.join(-xa, -xb)

    def mul(self, x, y):
        if self.degree == 1:
            return (np.asarray(x, dtype=np.int64) * y) % self.p
        xa, xb = self.split(x)
        ya, yb = self.split(y)
        bb = xb * yb
        return self.join(xa * ya + bb, xa * yb + xb * ya + bb)

    @cached_property
    def _inverses(self) -> np.ndarray:
        codes = np.arange(self.q)
        prod = self.mul(codes[:, None], codes[None, :])
        inv = np.full(self.q, -1, dtype=np.int64)
        rows, cols = np.nonzero(prod == 1)
        inv[rows] = cols
        return inv

    def inv(self, x):
        x = np.asarray(x, dtype=np.int64)
        if np.any(x == 0):
            raise ZeroDivisionError("0 has no inverse")
        return self._inverses[x]

    def matmul(self, A, B):
        """Matrix product over the field; works on stacks of matrices."""
        if self.degree == 1:
            return (np.asarray(A, dtype=np.int64) @ np.asarray(B, dtype=np.int64)) % self.p
        aa, ab = self.split(A)
        ba, bb = self.split(B)
        t = ab @ bb
        return self.join(aa @ ba + t, aa @ bb + ab @ ba + t)

    def identity(self, n: int) -> np.ndarray:
        return np.eye(n, dtype=np.int64)

    def elements(self) -> list[FqElem]:
        return [FqElem(self, c) for c in range(self.q)]

    def element(self, a: int, b: int = 0) -> FqElem:
        if self.degree == 1 and b % self.p:
            raise ValueError("prime field elements have no phi_bar part")
        return FqElem(self, int(self.join(a, b)))


@dataclass(frozen=True)
class FqElem:
    """A single element of a :class:`FiniteField`."""

    field: FiniteField
    code: int

    def _check(self, other: FqElem):
        if not isinstance(other, FqElem) or other.field != self.field:
            raise TypeError("elements of different fields")

    def __add__(self, other):
        self._check(other)
        return FqElem(self.field, int(self.field.add(self.code, other.code)))

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return FqElem(self.field, int(self.field.neg(self.code)))

    def __mul__(self, other):
        self._check(other)
        return FqElem(self.field, int(self.field.mul(self.code, other.code)))

    def inverse(self) -> FqElem:
        return FqElem(self.field, int(self.field.inv(self.code)))

    @property
    def parts(self) -> tuple[int, int]:
        return self.code % self.field.p, self.code // self.field.p

    def __repr__(self):
        a, b = self.parts
        return f"FqElem({a}+{b}φ̄ in F_{self.field.q})" if self.field.degree == 2 else f"FqElem({a} in F_{self.field.p})"


def fq_arith(op: str, x: FqElem, y: FqElem | None = None) -> FqElem:
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "neg":
        return -x
    if op == "inv":
        return x.inverse()
    raise ValueError(f"unknown field operation {op!r}")


def reduce(x: GoldenInt, ideal: IdealSpec) -> FqElem:
    """Image of ``x`` in Z[phi]/ideal."""
    field = ideal.field
    if ideal.kind is IdealKind.INERT:
        return FqElem(field, int(field.join(x.a, x.b)))
    return FqElem(field, (x.a + x.b * ideal.root) % ideal.p)


def reduce_array(a: np.ndarray, b: np.ndarray, ideal: IdealSpec) -> np.ndarray:
    """Entrywise reduction of coefficient arrays ``a + b*phi`` to field codes."""
    field = ideal.field
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if ideal.kind is IdealKind.INERT:
        return np.asarray(field.join(a % ideal.p, b % ideal.p), dtype=np.int64)
    return np.asarray((a + b * ideal.root) % ideal.p, dtype=np.int64)
