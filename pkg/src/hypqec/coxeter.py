"""Coxeter presentations and the reflection representation over Z[phi].

For a string Schläfli symbol ``{r_1, ..., r_D}`` the symmetry group of the
tessellation is generated by ``D + 1`` reflections ``a_0 .. a_D`` subject to
``(a_i a_j)^{m_ij} = e`` with ``m_ii = 1``, ``m_{i,i+1} = r_{i+1}`` and
``m_ij = 2`` otherwise.  The reflection representation acts on the basis
``e_0 .. e_D`` by ``a_i: e_j -> e_j - g_ij e_i`` where ``g`` is the Gram matrix
``g_ij = -2 cos(pi / m_ij)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import GoldenInt, FiniteField, IdealSpec, PHI_FLOAT, reduce_array
from .errors import ResourceCapExceeded

GENERATOR_LETTERS = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class SchlafliSymbol:
    entries: tuple[int, ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("empty Schläfli symbol")
        if any(int(r) < 2 for r in self.entries):
            raise ValueError(f"Schläfli entries must be >= 2: {self.entries}")

    @classmethod
    def parse(cls, text: str | SchlafliSymbol | tuple | list) -> SchlafliSymbol:
        if isinstance(text, SchlafliSymbol):
            return text
        if isinstance(text, (tuple, list)):
            return cls(tuple(int(r) for r in text))
        body = text.strip().strip("{}")
        try:
            return cls(tuple(int(tok) for tok in body.replace(" ", "").split(",") if tok))
        except ValueError as exc:
            raise ValueError(f"cannot parse Schläfli symbol {text!r}") from exc

    @property
    def dim(self) -> int:
        return len(self.entries)

    @property
    def rank(self) -> int:
        return len(self.entries) + 1

    def reversed(self) -> SchlafliSymbol:
        return SchlafliSymbol(tuple(reversed(self.entries)))

    def __str__(self):
        return "{" + ",".join(map(str, self.entries)) + "}"


@dataclass(frozen=True)
class CoxeterPresentation:
    rank: int
    exponents: tuple[tuple[int, ...], ...]
    symbol: SchlafliSymbol | None = None

    @property
    def letters(self) -> str:
        return GENERATOR_LETTERS[: self.rank]

    def relators(self) -> list[list[int]]:
        """Words ``(a_i a_j)^{m_ij}`` for i < j; the involutions are implicit."""
        rels = []
        for i in range(self.rank):
            for j in range(i + 1, self.rank):
                rels.append([i, j] * self.exponents[i][j])
        return rels

    def parse_word(self, word: str | list[int]) -> list[int]:
        if not isinstance(word, str):
            return [int(x) for x in word]
        out = []
        for ch in word.strip():
            k = self.letters.find(ch)
            if k < 0:
                raise ValueError(f"letter {ch!r} is not a generator of rank {self.rank}")
            out.append(k)
        return out

    def format_word(self, word: list[int]) -> str:
        return "".join(self.letters[i] for i in word)

    def subpresentation(self, gens: list[int]) -> CoxeterPresentation:
        """Presentation of the parabolic subgroup generated by ``gens``."""
        exps = tuple(tuple(self.exponents[i][j] for j in gens) for i in gens)
        return CoxeterPresentation(len(gens), exps)


def presentation_from_symbol(symbol) -> CoxeterPresentation:
    s = SchlafliSymbol.parse(symbol)
    n = s.rank
    m = [[2] * n for _ in range(n)]
    for i in range(n):
        m[i][i] = 1
    for i, r in enumerate(s.entries):
        m[i][i + 1] = m[i + 1][i] = int(r)
    return CoxeterPresentation(n, tuple(tuple(row) for row in m), s)


# ---------------------------------------------------------------------------
# exact matrices over Z[phi]: coefficient pairs (A, B) meaning A + B*phi

_OVERFLOW_GUARD = 1 << 62


class GoldenRing:
    """Matrix arithmetic over Z[phi]; a matrix is an int64 array of shape (2, n, n)."""

    name = "Z[phi]"

    @staticmethod
    def identity(n: int) -> np.ndarray:
        out = np.zeros((2, n, n), dtype=np.int64)
        out[0] = np.eye(n, dtype=np.int64)
        return out

    @staticmethod
    def matmul(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Product of (stacks of) exact matrices; raises instead of wrapping."""
        n = X.shape[-1]
        bound = int(np.abs(X).max(initial=0)) * int(np.abs(Y).max(initial=0)) * 3 * n
        if bound >= _OVERFLOW_GUARD:
            raise OverflowError("Z[phi] matrix coefficients exceed 64-bit range")
        xa, xb = X[..., 0, :, :], X[..., 1, :, :]
        ya, yb = Y[..., 0, :, :], Y[..., 1, :, :]
        t = xb @ yb
        return np.stack([xa @ ya + t, xa @ yb + xb @ ya + t], axis=-3)

    @staticmethod
    def equal(X, Y) -> bool:
        return bool(np.array_equal(X, Y))

    @staticmethod
    def to_float(X: np.ndarray) -> np.ndarray:
        return X[0] + PHI_FLOAT * X[1]

    @staticmethod
    def entry(X: np.ndarray, i: int, j: int) -> GoldenInt:
        return GoldenInt(int(X[0, i, j]), int(X[1, i, j]))


class FieldRing:
    """Matrix arithmetic over a finite field; matrices are (n, n) code arrays."""

    def __init__(self, field: FiniteField):
        self.field = field
        self.name = f"F_{field.q}"

    def identity(self, n: int) -> np.ndarray:
        return np.eye(n, dtype=np.int64)

    def matmul(self, X, Y):
        return self.field.matmul(X, Y)

    @staticmethod
    def equal(X, Y) -> bool:
        return bool(np.array_equal(X, Y))


@dataclass
class GramMatrix:
    """Gram matrix of the mirror normals with entries in Z[phi]."""

    a: np.ndarray  # unit coefficients
    b: np.ndarray  # phi coefficients
    symbol: SchlafliSymbol

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def entry(self, i: int, j: int) -> GoldenInt:
        return GoldenInt(int(self.a[i, j]), int(self.b[i, j]))

    def off_diagonal(self) -> list[GoldenInt]:
        return [self.entry(i, i + 1) for i in range(self.n - 1)]

    def to_float(self) -> np.ndarray:
        return self.a + PHI_FLOAT * self.b

    def signature(self, tol: float = 1e-9) -> tuple[int, int, int]:
        """(negative, zero, positive) eigenvalue counts at phi = 1.618..."""
        ev = np.linalg.eigvalsh(self.to_float())
        return int((ev < -tol).sum()), int((np.abs(ev) <= tol).sum()), int((ev > tol).sum())


# -2 cos(pi/m) for the exponents whose cosines lie in Z[phi]
def _cos_entry(m: int, golden_sign: int) -> GoldenInt:
    if m == 2:
        return GoldenInt(0, 0)
    if m == 3:
        return GoldenInt(-1, 0)
    if m == 5:
        return GoldenInt(0, golden_sign)
    raise ValueError(
        f"-2cos(pi/{m}) is not in Z[phi]; exact mode supports Schläfli entries 2, 3 and 5"
    )


def gram_from_symbol(symbol, golden_sign: int = -1) -> GramMatrix:
    """Tridiagonal Gram matrix; ``golden_sign=+1`` uses +phi for the 5-entries."""
    s = SchlafliSymbol.parse(symbol)
    if golden_sign not in (-1, 1):
        raise ValueError("golden_sign must be +1 or -1")
    n = s.rank
    a = 2 * np.eye(n, dtype=np.int64)
    b = np.zeros((n, n), dtype=np.int64)
    for i, m in enumerate(s.entries):
        x = _cos_entry(int(m), golden_sign)
        a[i, i + 1] = a[i + 1, i] = x.a
        b[i, i + 1] = b[i + 1, i] = x.b
    return GramMatrix(a, b, s)


@dataclass
class ReflectionRep:
    """Generator matrices rho(a_0) .. rho(a_D) over Z[phi] or a finite field."""

    ring: object
    generators: list[np.ndarray]
    gram: GramMatrix
    ideal: IdealSpec | None = None
    reduced_gram: np.ndarray | None = field(default=None, repr=False)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def exact(self) -> bool:
        return self.ideal is None

    def word_matrix(self, word: list[int]) -> np.ndarray:
        out = self.ring.identity(self.rank)
        for i in word:
            out = self.ring.matmul(out, self.generators[i])
        return out

    def is_identity(self, M) -> bool:
        return self.ring.equal(M, self.ring.identity(self.rank))


def reflection_rep(gram: GramMatrix) -> ReflectionRep:
    n = gram.n
    gens = []
    for i in range(n):
        M = GoldenRing.identity(n)
        # row i of rho(a_i) is delta_ij - g_ij
        M[0, i, :] -= gram.a[i, :]
        M[1, i, :] -= gram.b[i, :]
        gens.append(M)
    return ReflectionRep(GoldenRing(), gens, gram)


def golden_det(M: np.ndarray) -> GoldenInt:
    """Exact determinant by cofactor expansion (small matrices only)."""
    n = M.shape[-1]
    entries = [[GoldenInt(int(M[0, i, j]), int(M[1, i, j])) for j in range(n)] for i in range(n)]

    def det(rows, cols):
        if len(rows) == 1:
            return entries[rows[0]][cols[0]]
        total = GoldenInt()
        r = rows[0]
        for k, c in enumerate(cols):
            e = entries[r][c]
            if e.a == 0 and e.b == 0:
                continue
            minor = det(rows[1:], cols[:k] + cols[k + 1 :])
            term = e * minor
            total = total + term if k % 2 == 0 else total - term
        return total

    return det(list(range(n)), list(range(n)))


def verify_relations(rep: ReflectionRep, pres: CoxeterPresentation) -> dict[tuple[int, int], bool]:
    """Truth value of ``(rho(a_i) rho(a_j))^{m_ij} = I`` for every i <= j."""
    if rep.rank != pres.rank:
        raise ValueError("representation and presentation ranks differ")
    report = {}
    for i in range(pres.rank):
        for j in range(i, pres.rank):
            m = pres.exponents[i][j]
            base = rep.generators[i] if i == j else rep.ring.matmul(rep.generators[i], rep.generators[j])
            if i == j:
                m = 2
            P = rep.ring.identity(rep.rank)
            for _ in range(m):
                P = rep.ring.matmul(P, base)
            report[(i, j)] = rep.is_identity(P)
    return report


def reduce_rep(rep: ReflectionRep, ideal: IdealSpec) -> ReflectionRep:
    if not rep.exact:
        raise ValueError("representation is already reduced")
    ring = FieldRing(ideal.field)
    gens = [reduce_array(M[0], M[1], ideal) for M in rep.generators]
    g = reduce_array(rep.gram.a, rep.gram.b, ideal)
    return ReflectionRep(ring, gens, rep.gram, ideal, g)


def preserves_form(rep: ReflectionRep) -> bool:
    """Check rho(a)^T g rho(a) = g for every generator over the finite field."""
    if rep.exact:
        g = rep.gram
        G = np.stack([g.a, g.b])
        for M in rep.generators:
            Mt = np.ascontiguousarray(M.transpose(0, 2, 1))
            if not np.array_equal(GoldenRing.matmul(GoldenRing.matmul(Mt, G), M), G):
                return False
        return True
    F = rep.ring.field
    for M in rep.generators:
        if not np.array_equal(F.matmul(F.matmul(M.T, rep.reduced_gram), M), rep.reduced_gram):
            return False
    return True


def local_faithfulness(rep: ReflectionRep, reduced: ReflectionRep, l: int,
                       cap: int = 2_000_000) -> bool:
    """True iff no word of length <= l is trivial mod the ideal but not exactly.

    Breadth-first over the Cayley ball; exact matrices are hashed so every group
    element is visited once no matter how many words reach it.
    """
    if l < 0:
        raise ValueError("l must be non-negative")
    n = rep.rank
    ident_exact = GoldenRing.identity(n).tobytes()
    ident_red = reduced.ring.identity(n)
    seen = {ident_exact}
    frontier = [(rep.ring.identity(n), reduced.ring.identity(n))]
    for _ in range(l):
        nxt = []
        for X, Y in frontier:
            for k in range(n):
                Xk = rep.ring.matmul(X, rep.generators[k])
                key = Xk.tobytes()
                if key in seen:
                    continue
                seen.add(key)
                Yk = reduced.ring.matmul(Y, reduced.generators[k])
                if key != ident_exact and np.array_equal(Yk, ident_red):
                    return False
                nxt.append((Xk, Yk))
                if len(seen) > cap:
                    raise ResourceCapExceeded(f"Cayley ball exceeds {cap} elements at radius < {l}")
        frontier = nxt
    return True


def rotation_generators(rep: ReflectionRep) -> list[np.ndarray]:
    """All products rho(a_i) rho(a_j), i < j."""
    out = []
    for i in range(rep.rank):
        for j in range(i + 1, rep.rank):
            out.append(rep.ring.matmul(rep.generators[i], rep.generators[j]))
    return out
