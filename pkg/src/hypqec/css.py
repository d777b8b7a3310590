"""CSS codes from cell complexes.

Qubits sit on ``i``-cells, X-checks on ``(i-1)``-cells and Z-checks on
``(i+1)``-cells: ``H_X = d_i`` and ``H_Z = d_{i+1}^T``.  Z-type logicals are
cycles of ``H_X`` that are not boundaries, i.e. ``ker H_X`` modulo the row
space of ``H_Z``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import __version__
from .complex import CellComplex, euler_characteristic
from .errors import ParseError, VerificationError
from .gf2 import BitMatrix, RowSpace, echelon, kernel_basis, pack_rows, parse_parity_check, rank, unpack_rows

BUNDLE_MAGIC = "HYPQEC-CODE 1"


@dataclass
class CssCode:
    hx: BitMatrix
    hz: BitMatrix
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.hx.cols != self.hz.cols:
            raise ValueError(f"H_X has {self.hx.cols} columns, H_Z has {self.hz.cols}")
        if not self.css_condition():
            raise VerificationError("H_X H_Z^T != 0")

    def css_condition(self) -> bool:
        return (self.hx @ self.hz.transpose()).is_zero()

    @property
    def n(self) -> int:
        return self.hx.cols

    @cached_property
    def rank_x(self) -> int:
        return rank(self.hx)

    @cached_property
    def rank_z(self) -> int:
        return rank(self.hz)

    @property
    def k(self) -> int:
        return self.n - self.rank_x - self.rank_z

    @property
    def rate(self) -> float:
        return self.k / self.n if self.n else 0.0

    def checks(self, side: str) -> BitMatrix:
        """Parity checks that detect errors of type ``side``."""
        side = _side(side)
        return self.hx if side == "Z" else self.hz

    def stabilizers(self, side: str) -> BitMatrix:
        """Stabilizers of the same Pauli type as errors of type ``side``."""
        side = _side(side)
        return self.hz if side == "Z" else self.hx

    def __repr__(self):
        return f"CssCode(n={self.n}, k={self.k}, {self.meta.get('construction', '')!r})"


def _side(side: str) -> str:
    s = str(side).upper()
    if s not in ("X", "Z"):
        raise ValueError(f"side must be 'X' or 'Z', got {side!r}")
    return s


def from_complex(c: CellComplex, i: int = 2) -> CssCode:
    if not 0 < i < c.dim:
        raise ValueError(f"qubit dimension must lie strictly between 0 and {c.dim}")
    meta = {
        "symbol": c.symbol,
        "construction": c.construction,
        "qubit_dim": i,
        "group_order": c.order,
        "cell_counts": list(c.counts),
        "chi": euler_characteristic(c),
    }
    return CssCode(c.boundary(i), c.boundary(i + 1).transpose(), meta)


def rate_bound(n: int) -> int:
    """Smallest integer ``k`` allowed by ``k >= 13 n / 72 - 2``."""
    return math.ceil(13 * n / 72 - 2)


def rate_bound_check(code: CssCode) -> bool | None:
    """The {5,3,3,5} rate bound; None for codes from other symbols."""
    if code.meta.get("symbol") != "5,3,3,5":
        return None
    return code.k >= rate_bound(code.n)


# ---------------------------------------------------------------------------
# logical operators


def _reduce_rows(space: RowSpace, V: np.ndarray) -> np.ndarray:
    # packed rows of V minus their row-space components (reduced form: the
    # coefficient of basis row i is the bit of V at pivot i)
    V = V.copy()
    piv = space.pivots
    if not len(piv):
        return V
    words, bits = piv >> 6, (piv & 63).astype(np.uint64)
    C = ((V[:, words] >> bits) & np.uint64(1)).astype(bool)
    for i in range(len(piv)):
        sel = C[:, i]
        if sel.any():
            V[sel] ^= space.basis.data[i]
    return V


def logical_basis(code: CssCode, side: str = "Z") -> BitMatrix:
    """``k`` independent logicals of type ``side`` (rows), each verified."""
    side = _side(side)
    H, S = code.checks(side), code.stabilizers(side)
    space = RowSpace(S)
    K = kernel_basis(H)
    residual = _reduce_rows(space, K.data)
    L, _ = echelon(BitMatrix(K.rows, code.n, residual), full=True)
    if L.rows != code.k:
        raise VerificationError(f"found {L.rows} logical classes, expected k = {code.k}")
    if L.rows and H.apply(L.to_dense()).any():
        raise VerificationError("a logical operator has nonzero syndrome")
    if rank(S.vstack(L)) != space.dim + L.rows:
        raise VerificationError("logicals are not independent modulo stabilizers")
    return L


def is_logical(code: CssCode, v, side: str = "Z", space: RowSpace | None = None) -> bool:
    """Zero syndrome and not a stabilizer."""
    side = _side(side)
    v = np.asarray(v, dtype=np.uint8)
    if code.checks(side).apply(v).any():
        return False
    space = space or RowSpace(code.stabilizers(side))
    return v not in space


@dataclass
class LogicalSearchResult:
    weight: int | None
    vector: np.ndarray | None
    iterations: int
    history: list[int]  # best weight after each iteration

    @property
    def upper_bound(self) -> int | None:
        """Weight of the best logical found: an upper bound on the distance."""
        return self.weight


def random_logical_search(code: CssCode, side: str = "Z", iterations: int = 100,
                          seed: int = 0, climb_passes: int = 4,
                          target: int | None = None) -> LogicalSearchResult:
    """Randomised search for low-weight logicals.

    Each iteration eliminates a basis of the check kernel under a random column
    order (low-weight cycles fall out of the reduced rows), keeps the rows that
    are not stabilizers, and hill-climbs each by adding stabilizer rows that
    lower its weight.  The result only bounds the distance from above.
    """
    side = _side(side)
    if code.k == 0:
        return LogicalSearchResult(None, None, 0, [])
    H, S = code.checks(side), code.stabilizers(side)
    space = RowSpace(S)
    K = kernel_basis(H).to_dense()
    stab = S.to_dense()
    n = code.n
    best_w, best_v = None, None
    history = []
    for it in range(iterations):
        rng = np.random.default_rng([seed, it])
        perm = rng.permutation(n)
        R, _ = echelon(BitMatrix.from_dense(K[:, perm]), full=True)
        rows = np.empty((R.rows, n), dtype=np.uint8)
        rows[:, perm] = R.to_dense()
        weights = rows.sum(axis=1)
        for r in np.argsort(weights, kind="stable"):
            if best_w is not None and weights[r] >= best_w + 4 * climb_passes:
                break
            v = rows[r]
            if v in space:
                continue
            v = _climb(v, stab, rng, climb_passes)
            w = int(v.sum())
            if best_w is None or w < best_w:
                best_w, best_v = w, v.copy()
        history.append(best_w)
        if target is not None and best_w is not None and best_w <= target:
            break
    if best_v is not None and not is_logical(code, best_v, side, space):
        raise VerificationError("search returned a non-logical vector")
    return LogicalSearchResult(best_w, best_v, len(history), history)


def _climb(v: np.ndarray, stab: np.ndarray, rng, passes: int) -> np.ndarray:
    # add stabilizer rows while that strictly lowers the weight
    v = v.copy()
    for _ in range(passes):
        improved = False
        for s in rng.permutation(len(stab)):
            row = stab[s]
            overlap = int((v & row).sum())
            if 2 * overlap > int(row.sum()):
                v ^= row
                improved = True
        if not improved:
            break
    return v


# ---------------------------------------------------------------------------
# bundle files


def write_bundle(code: CssCode, path, extra: dict | None = None) -> None:
    """Magic line, one JSON header line, then H_X and H_Z in parity-check format."""
    header = dict(code.meta)
    header.update({"n": code.n, "k": code.k, "version": __version__})
    if extra:
        header.update(extra)
    parts = [BUNDLE_MAGIC, json.dumps(header, sort_keys=True)]
    for name, M in (("H_X", code.hx), ("H_Z", code.hz)):
        parts.append(f"[{name}]")
        parts.append(f"{M.cols} {M.rows}")
        S = M.to_sparse()
        S.sort_indices()
        for r in range(M.rows):
            parts.append(" ".join(map(str, S.indices[S.indptr[r] : S.indptr[r + 1]])))
    Path(path).write_text("\n".join(parts) + "\n")


def read_bundle(path, verify: bool = True) -> CssCode:
    try:
        lines = Path(path).read_text().splitlines()
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not a text bundle") from exc
    if not lines or lines[0] != BUNDLE_MAGIC:
        raise ParseError(f"{path}: missing bundle magic line")
    try:
        header = json.loads(lines[1])
    except (IndexError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: bad JSON header") from exc
    mats = {}
    k = 2
    for name in ("H_X", "H_Z"):
        if k >= len(lines) or lines[k] != f"[{name}]":
            raise ParseError(f"{path}: missing [{name}] section")
        try:
            _, m = map(int, lines[k + 1].split())
        except (IndexError, ValueError) as exc:
            raise ParseError(f"{path}: bad [{name}] header") from exc
        mats[name] = parse_parity_check(lines[k + 1 : k + 2 + m])
        k += 2 + m
    hx, hz = mats["H_X"], mats["H_Z"]
    meta = {key: v for key, v in header.items() if key not in ("n", "k")}
    if not verify:
        code = CssCode.__new__(CssCode)
        code.hx, code.hz, code.meta = hx, hz, meta
        return code
    code = CssCode(hx, hz, meta)
    if header.get("n") != code.n:
        raise VerificationError(f"header n = {header.get('n')} but H has {code.n} columns")
    return code


__all__ = [
    "CssCode", "from_complex", "rate_bound", "rate_bound_check", "logical_basis",
    "is_logical", "random_logical_search", "LogicalSearchResult", "write_bundle",
    "read_bundle", "pack_rows", "unpack_rows",
]
