"""Bit-packed linear algebra over GF(2).

Rows are stored as ``uint64`` words, bit ``j`` of a row in word ``j >> 6`` at
position ``j & 63``.  Elimination runs in :mod:`hypqec.kernels`; sparse
products go through scipy.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import ParseError


def _nwords(cols: int) -> int:
    return max(1, (cols + 63) // 64)


def pack_rows(A) -> np.ndarray:
    """Pack a dense 0/1 matrix into ``(rows, words)`` uint64."""
    A = np.asarray(A, dtype=np.uint8) & 1
    if A.ndim != 2:
        raise ValueError("expected a 2-d array")
    rows, cols = A.shape
    nw = _nwords(cols)
    by = np.packbits(A, axis=1, bitorder="little")
    out = np.zeros((rows, nw * 8), dtype=np.uint8)
    out[:, : by.shape[1]] = by
    return out.view("<u8").astype(np.uint64)


def unpack_rows(words: np.ndarray, cols: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype=np.uint64)
    if len(words) == 0:
        return np.zeros((0, cols), dtype=np.uint8)
    by = words.astype("<u8").view(np.uint8).reshape(len(words), -1)
    return np.unpackbits(by, axis=1, bitorder="little")[:, :cols]


class BitMatrix:
    """A dense GF(2) matrix with packed rows."""

    __slots__ = ("rows", "cols", "data", "_csr")

    def __init__(self, rows: int, cols: int, data: np.ndarray | None = None):
        if rows < 0 or cols < 0:
            raise ValueError("negative shape")
        self.rows, self.cols = int(rows), int(cols)
        nw = _nwords(self.cols)
        if data is None:
            data = np.zeros((self.rows, nw), dtype=np.uint64)
        data = np.ascontiguousarray(data, dtype=np.uint64)
        if data.shape != (self.rows, nw):
            raise ValueError(f"packed data has shape {data.shape}, expected {(self.rows, nw)}")
        if self.cols % 64 and self.rows:
            spill = data[:, -1] >> np.uint64(self.cols % 64)
            if np.any(spill):
                raise ValueError("bits set beyond the last column")
        self.data = data
        self._csr = None

    # construction ---------------------------------------------------------

    @classmethod
    def from_dense(cls, A) -> BitMatrix:
        A = np.asarray(A)
        return cls(A.shape[0], A.shape[1], pack_rows(A))

    @classmethod
    def from_indices(cls, rows: list, cols: int) -> BitMatrix:
        """One index list per row; repeated indices cancel in pairs."""
        A = np.zeros((len(rows), cols), dtype=np.uint8)
        for r, idx in enumerate(rows):
            for c in idx:
                if not 0 <= c < cols:
                    raise IndexError(f"column {c} out of range for width {cols}")
                A[r, c] ^= 1
        return cls.from_dense(A)

    @classmethod
    def from_sparse(cls, S) -> BitMatrix:
        """From a scipy sparse matrix, reducing entries mod 2."""
        S = sp.csr_matrix(S, copy=True)
        S.sum_duplicates()
        S.data = S.data.astype(np.int64) & 1
        S.eliminate_zeros()
        out = cls(S.shape[0], S.shape[1])
        r = np.repeat(np.arange(S.shape[0]), np.diff(S.indptr))
        c = S.indices.astype(np.int64)
        np.bitwise_xor.at(out.data, (r, c >> 6), np.left_shift(np.uint64(1), (c & 63).astype(np.uint64)))
        S.data = S.data.astype(np.uint8)
        out._csr = S
        return out

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    # views ----------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def to_dense(self) -> np.ndarray:
        return unpack_rows(self.data, self.cols)

    def to_sparse(self) -> sp.csr_matrix:
        if self._csr is None:
            r, c = np.nonzero(self.to_dense())
            self._csr = sp.csr_matrix(
                (np.ones(len(r), dtype=np.uint8), (r, c)), shape=self.shape
            )
        return self._csr

    def row_indices(self, i: int) -> np.ndarray:
        return np.flatnonzero(unpack_rows(self.data[i : i + 1], self.cols)[0])

    def row_weights(self) -> np.ndarray:
        return np.diff(self.to_sparse().indptr)

    def col_weights(self) -> np.ndarray:
        return np.bincount(self.to_sparse().indices, minlength=self.cols)

    @property
    def nnz(self) -> int:
        return int(self.to_sparse().nnz)

    def copy(self) -> BitMatrix:
        return BitMatrix(self.rows, self.cols, self.data.copy())

    def transpose(self) -> BitMatrix:
        return BitMatrix.from_sparse(self.to_sparse().T)

    T = property(transpose)

    def vstack(self, other: BitMatrix) -> BitMatrix:
        if other.cols != self.cols:
            raise ValueError("column counts differ")
        return BitMatrix(self.rows + other.rows, self.cols, np.vstack([self.data, other.data]))

    def __matmul__(self, other: BitMatrix) -> BitMatrix:
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        P = self.to_sparse().astype(np.int64) @ other.to_sparse().astype(np.int64)
        return BitMatrix.from_sparse(P)

    def apply(self, v) -> np.ndarray:
        """``M v`` for a 0/1 vector, or a batch of vectors as rows of ``v``."""
        v = np.asarray(v, dtype=np.int64)
        S = self.to_sparse()
        if v.ndim == 1:
            if len(v) != self.cols:
                raise ValueError("vector length does not match column count")
            return (S @ v).astype(np.uint8) & 1
        return ((S @ v.T).T).astype(np.uint8) & 1

    def is_zero(self) -> bool:
        return not np.any(self.data)

    def __eq__(self, other):
        return (
            isinstance(other, BitMatrix)
            and self.shape == other.shape
            and np.array_equal(self.data, other.data)
        )

    def __repr__(self):
        return f"BitMatrix({self.rows}x{self.cols}, nnz={self.nnz})"


# ---------------------------------------------------------------------------
# elimination


def echelon(M: BitMatrix, full: bool = True) -> tuple[BitMatrix, np.ndarray]:
    """Echelon form (reduced when ``full``) of the row space, and its pivots."""
    work = M.data.copy()
    r, piv = kernels.gf2_echelon(work, M.cols, bool(full))
    return BitMatrix(r, M.cols, work[:r]), np.asarray(piv, dtype=np.int64)


def rank(M: BitMatrix) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    work = M.data.copy()
    r, _ = kernels.gf2_echelon(work, M.cols, False)
    return int(r)


def _bits_at(words: np.ndarray, cols: np.ndarray) -> np.ndarray:
    cols = np.asarray(cols, dtype=np.int64)
    return ((words[:, cols >> 6] >> (cols & 63).astype(np.uint64)) & np.uint64(1)).astype(np.uint8)


def kernel_basis(M: BitMatrix, chunk: int = 2048) -> BitMatrix:
    """Rows of the result form a basis of ``{v : M v = 0}``."""
    R, piv = echelon(M, full=True)
    free = np.setdiff1d(np.arange(M.cols), piv)
    blocks = []
    for s in range(0, len(free), chunk):
        f = free[s : s + chunk]
        V = np.zeros((len(f), M.cols), dtype=np.uint8)
        V[np.arange(len(f)), f] = 1
        if len(piv):
            V[:, piv] = _bits_at(R.data, f).T
        blocks.append(pack_rows(V))
    data = np.vstack(blocks) if blocks else np.zeros((0, _nwords(M.cols)), dtype=np.uint64)
    return BitMatrix(len(free), M.cols, data)


class RowSpace:
    """Reduced echelon form of a row space, for repeated membership queries.

    In reduced form the coefficient of pivot row ``i`` in any member ``v`` is
    just ``v[pivot_i]``, so a query is one gather and one XOR-reduce.
    """

    def __init__(self, M: BitMatrix):
        self.cols = M.cols
        self.basis, self.pivots = echelon(M, full=True)

    @property
    def dim(self) -> int:
        return self.basis.rows

    def reduce(self, v) -> np.ndarray:
        """Residual of ``v`` after clearing every pivot column (0/1 vector)."""
        v = np.asarray(v, dtype=np.uint8)
        if v.shape != (self.cols,):
            raise ValueError(f"vector of length {v.shape} against width {self.cols}")
        w = pack_rows(v[None])[0]
        sel = v[self.pivots].astype(bool)
        if sel.any():
            w ^= np.bitwise_xor.reduce(self.basis.data[sel], axis=0)
        return unpack_rows(w[None], self.cols)[0]

    def __contains__(self, v) -> bool:
        return not self.reduce(v).any()

    def contains(self, v) -> bool:
        return v in self


def in_row_space(M: BitMatrix | RowSpace, v) -> bool:
    space = M if isinstance(M, RowSpace) else RowSpace(M)
    return v in space


# ---------------------------------------------------------------------------
# file formats


def write_parity_check(M: BitMatrix, dest) -> None:
    """``n m`` header, then one line of sorted column indices per check."""
    S = M.to_sparse()
    S.sort_indices()
    lines = [f"{M.cols} {M.rows}"]
    for r in range(M.rows):
        lines.append(" ".join(map(str, S.indices[S.indptr[r] : S.indptr[r + 1]])))
    _write_text(dest, "\n".join(lines) + "\n")


def read_parity_check(src) -> BitMatrix:
    lines = _read_text(src).splitlines()
    return parse_parity_check(lines)


def parse_parity_check(lines: list[str]) -> BitMatrix:
    if not lines:
        raise ParseError("empty parity-check data")
    try:
        n, m = map(int, lines[0].split())
    except ValueError as exc:
        raise ParseError(f"bad parity-check header {lines[0]!r}") from exc
    if len(lines) < m + 1:
        raise ParseError(f"expected {m} check lines, found {len(lines) - 1}")
    rows = []
    for k, line in enumerate(lines[1 : m + 1]):
        try:
            idx = [int(t) for t in line.split()]
        except ValueError as exc:
            raise ParseError(f"check {k}: non-integer entry") from exc
        if any(i < 0 or i >= n for i in idx) or idx != sorted(set(idx)):
            raise ParseError(f"check {k}: indices must be sorted, distinct and < {n}")
        rows.append(idx)
    return _from_lists(rows, m, n)


def _from_lists(rows: list[list[int]], m: int, n: int) -> BitMatrix:
    r = np.repeat(np.arange(m), [len(x) for x in rows])
    c = np.fromiter((i for x in rows for i in x), dtype=np.int64, count=len(r))
    S = sp.csr_matrix((np.ones(len(r), dtype=np.int64), (r, c)), shape=(m, n))
    return BitMatrix.from_sparse(S)


def write_alist(M: BitMatrix, dest) -> None:
    """MacKay's alist format (1-based, zero padded)."""
    S = M.to_sparse()
    S.sort_indices()
    C = S.tocsc()
    C.sort_indices()
    cw, rw = np.diff(C.indptr), np.diff(S.indptr)
    dc, dr = int(cw.max(initial=0)), int(rw.max(initial=0))
    out = [f"{M.cols} {M.rows}", f"{dc} {dr}", " ".join(map(str, cw)), " ".join(map(str, rw))]
    for j in range(M.cols):
        idx = list(C.indices[C.indptr[j] : C.indptr[j + 1]] + 1)
        out.append(" ".join(map(str, idx + [0] * (dc - len(idx)))))
    for i in range(M.rows):
        idx = list(S.indices[S.indptr[i] : S.indptr[i + 1]] + 1)
        out.append(" ".join(map(str, idx + [0] * (dr - len(idx)))))
    _write_text(dest, "\n".join(out) + "\n")


def read_alist(src) -> BitMatrix:
    tok = _read_text(src).split()
    try:
        vals = [int(t) for t in tok]
        n, m = vals[0], vals[1]
        pos = 4
        cw = vals[pos : pos + n]
        pos += n
        rw = vals[pos : pos + m]
        pos += m
        dc, dr = vals[2], vals[3]
        pos += n * dc  # column lists are redundant with the row lists
        rows = []
        for i in range(m):
            entries = vals[pos : pos + dr]
            pos += dr
            rows.append(sorted(e - 1 for e in entries if e))
            if len(rows[-1]) != rw[i]:
                raise ParseError(f"row {i}: weight {len(rows[-1])} != declared {rw[i]}")
    except (IndexError, ValueError) as exc:
        raise ParseError("truncated or malformed alist data") from exc
    M = _from_lists(rows, m, n)
    if list(M.col_weights()) != cw:
        raise ParseError("column weights disagree with the row lists")
    return M


def _write_text(dest, text: str) -> None:
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text)
    else:
        dest.write(text)


def _read_text(src) -> str:
    if isinstance(src, (str, Path)):
        return Path(src).read_text()
    if isinstance(src, io.IOBase) or hasattr(src, "read"):
        return src.read()
    raise TypeError("expected a path or a text stream")
