"""Cell complexes of quotient tessellations.

For a finite quotient ``G`` of a Coxeter group acting on itself from the right,
the ``i``-cells are the cosets ``g S_i`` with ``S_i = <a_j : j != i>``.  An
``(i-1)``-cell and an ``i``-cell meet in a union of cosets of
``K = <a_j : j not in {i-1, i}>``; the number of such ``K``-cosets is the
incidence multiplicity, and its parity is the boundary entry.
"""

from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .coxeter import CoxeterPresentation, presentation_from_symbol
from .errors import NLCViolation, ParseError, ResourceCapExceeded
from .gf2 import BitMatrix
from .groups import GroupAction, coxeter_group_order

FORMAT_VERSION = 1


def coset_labels(G: GroupAction, gens) -> tuple[np.ndarray, int]:
    """Label each element by its coset ``g <gens>``; labels ordered by least element."""
    N = G.order
    gens = list(gens)
    if not gens:
        return np.arange(N, dtype=np.int32), N
    src = np.tile(np.arange(N), len(gens))
    dst = np.concatenate([G.actions[g] for g in gens])
    A = sp.csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(N, N))
    count, raw = connected_components(A, directed=False)
    first = np.full(count, N, dtype=np.int64)
    np.minimum.at(first, raw, np.arange(N))
    rank = np.empty(count, dtype=np.int32)
    rank[np.argsort(first, kind="stable")] = np.arange(count, dtype=np.int32)
    return rank[raw], int(count)


def _first_elements(labels: np.ndarray, count: int) -> np.ndarray:
    first = np.full(count, len(labels), dtype=np.int64)
    np.minimum.at(first, labels, np.arange(len(labels)))
    return first


@dataclass
class CellComplex:
    """Cells per dimension, GF(2) boundaries, and incidence multiplicities.

    ``boundaries[i]`` (``i >= 1``) has rows indexed by ``(i-1)``-cells and
    columns by ``i``-cells.  ``multiplicity[i]`` is the same pattern with the
    integer intersection counts before reduction mod 2.
    """

    symbol: str
    order: int
    counts: list[int]
    labels: list[np.ndarray] = field(repr=False)
    boundaries: list[BitMatrix | None] = field(repr=False)
    multiplicity: list[sp.csr_matrix | None] = field(repr=False)
    parabolic_orders: list[int]
    construction: str = ""

    @property
    def dim(self) -> int:
        return len(self.counts) - 1

    def boundary(self, i: int) -> BitMatrix:
        if not 1 <= i <= self.dim:
            raise IndexError(f"no boundary map in degree {i}")
        return self.boundaries[i]

    def representatives(self, i: int) -> np.ndarray:
        return _first_elements(self.labels[i], self.counts[i])

    def stabilizer_sizes(self) -> list[int]:
        return [self.order // c for c in self.counts]

    def check_chain(self) -> bool:
        """``d_i d_{i+1} = 0`` for every i."""
        for i in range(1, self.dim):
            if not (self.boundaries[i] @ self.boundaries[i + 1]).is_zero():
                return False
        return True


def _incidences(G: GroupAction, lower: np.ndarray, upper: np.ndarray, kgens,
                shape: tuple[int, int]) -> sp.csr_matrix:
    klab, kcount = coset_labels(G, kgens)
    rep = _first_elements(klab, kcount)
    rows, cols = lower[rep], upper[rep]
    M = sp.csr_matrix((np.ones(kcount, dtype=np.int64), (rows, cols)), shape=shape)
    M.sum_duplicates()
    return M


def _mod2(M: sp.csr_matrix) -> BitMatrix:
    return BitMatrix.from_sparse(M)


def build_complex(G: GroupAction, pres: CoxeterPresentation | str, construction: str = "") -> CellComplex:
    if isinstance(pres, str):
        pres = presentation_from_symbol(pres)
    if G.ngens != pres.rank:
        raise ValueError(f"group has {G.ngens} generators, presentation rank {pres.rank}")
    if not getattr(G, "complete", True) or G.order == 0:
        raise ResourceCapExceeded("coset enumeration did not complete; no complex to build")
    if not G.involutive():
        raise ValueError("generators must act as involutions")
    r = pres.rank
    labels, counts = [], []
    for i in range(r):
        lab, c = coset_labels(G, [j for j in range(r) if j != i])
        labels.append(lab)
        counts.append(c)
    bnd: list[BitMatrix | None] = [None]
    mult: list[sp.csr_matrix | None] = [None]
    for i in range(1, r):
        M = _incidences(G, labels[i - 1], labels[i], [j for j in range(r) if j not in (i - 1, i)],
                        (counts[i - 1], counts[i]))
        mult.append(M)
        bnd.append(_mod2(M))
    return CellComplex(
        symbol=",".join(map(str, pres.symbol.entries)) if pres.symbol else "",
        order=G.order,
        counts=counts,
        labels=labels,
        boundaries=bnd,
        multiplicity=mult,
        parabolic_orders=[G.order // c for c in counts],
        construction=construction,
    )


def euler_characteristic(c: CellComplex) -> int:
    return sum((-1) ** i * n for i, n in enumerate(c.counts))


def proper_euler_characteristic(order: int) -> int | None:
    """13 |G| / 7200, the value for a proper {5,3,3,5} quotient (None if not integral)."""
    q, rem = divmod(13 * order, 7200)
    return None if rem else q


# ---------------------------------------------------------------------------
# properness


@dataclass
class IncidenceStats:
    degree: int
    expected_faces: int | None  # lower cells per upper cell, proper case
    expected_cofaces: int | None  # upper cells per lower cell, proper case
    faces: dict  # histogram of distinct lower neighbours per upper cell
    cofaces: dict
    multiplicities: dict  # histogram of nonzero intersection counts
    col_weights: dict  # mod-2 weights, i.e. what a code sees
    row_weights: dict

    @property
    def proper(self) -> bool:
        return (
            set(self.multiplicities) <= {1}
            and (self.expected_faces is None or set(self.faces) == {self.expected_faces})
            and (self.expected_cofaces is None or set(self.cofaces) == {self.expected_cofaces})
        )


def properness_report(c: CellComplex, pres: CoxeterPresentation | None = None) -> list[IncidenceStats]:
    pres = pres or presentation_from_symbol(c.symbol)
    r = pres.rank
    out = []
    for i in range(1, r):
        S_lo = tuple(j for j in range(r) if j != i - 1)
        S_hi = tuple(j for j in range(r) if j != i)
        K = tuple(j for j in range(r) if j not in (i - 1, i))
        o_lo, o_hi, o_k = (coxeter_group_order(pres, s) for s in (S_lo, S_hi, K))
        exp_faces = o_hi // o_k if o_hi and o_k else None
        exp_cofaces = o_lo // o_k if o_lo and o_k else None
        M = c.multiplicity[i]
        B = c.boundaries[i]
        out.append(IncidenceStats(
            degree=i,
            expected_faces=exp_faces,
            expected_cofaces=exp_cofaces,
            faces=_hist(np.diff(M.tocsc().indptr)),
            cofaces=_hist(np.diff(M.indptr)),
            multiplicities=_hist(M.data),
            col_weights=_hist(B.col_weights()),
            row_weights=_hist(B.row_weights()),
        ))
    return out


def _hist(a) -> dict:
    return dict(sorted(Counter(int(x) for x in np.asarray(a)).items()))


# ---------------------------------------------------------------------------
# left multiplication, subgroups, non-local subgroup condition


def _bfs_layers(G: GroupAction) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    # spanning tree of the Cayley graph: (nodes, parents, generator) per layer
    N = G.order
    seen = np.zeros(N, dtype=bool)
    seen[0] = True
    frontier = np.array([0], dtype=np.int64)
    layers = []
    while len(frontier):
        nodes, parents, gens = [], [], []
        for x in range(G.ngens):
            img = G.actions[x][frontier].astype(np.int64)
            new = ~seen[img]
            img, par = img[new], frontier[new]
            img, first = np.unique(img, return_index=True)
            seen[img] = True
            nodes.append(img)
            parents.append(par[first])
            gens.append(np.full(len(img), x))
        nodes = np.concatenate(nodes)
        if not len(nodes):
            break
        layers.append((nodes, np.concatenate(parents), np.concatenate(gens)))
        frontier = nodes
    if seen.sum() != N:
        raise ValueError("the generators do not act transitively")
    return layers


def left_multiplication(G: GroupAction, h: int, layers=None) -> np.ndarray:
    """Permutation ``g -> h g`` of the regular action."""
    layers = layers if layers is not None else _bfs_layers(G)
    L = np.empty(G.order, dtype=np.int64)
    L[0] = h
    for nodes, parents, gens in layers:
        L[nodes] = G.actions[gens, L[parents]]
    return L


@dataclass
class SubgroupSpec:
    """A subgroup given by generating words, or by explicit element indices."""

    words: list = field(default_factory=list)
    elements: list[int] | None = None

    def generator_elements(self, G: GroupAction, pres: CoxeterPresentation) -> list[int]:
        if self.elements is not None:
            return [int(e) for e in self.elements]
        return [G.act_word(pres.parse_word(w), 0) for w in self.words]


def subgroup_elements(G: GroupAction, gens: list[int], cap: int = 1_000_000,
                      layers=None) -> np.ndarray:
    """Sorted element indices of ``<gens>``."""
    if not gens:
        return np.array([0], dtype=np.int64)
    layers = layers if layers is not None else _bfs_layers(G)
    # right multiplication by h is left multiplication's mirror: x h = L_x(h),
    # so grow the set with the permutations R_h(x) = x h computed as words
    R = [_right_multiplication(G, h, layers) for h in gens]
    mask = np.zeros(G.order, dtype=bool)
    mask[0] = True
    frontier = np.array([0], dtype=np.int64)
    while len(frontier):
        new = np.unique(np.concatenate([Rh[frontier] for Rh in R]))
        new = new[~mask[new]]
        mask[new] = True
        if mask.sum() > cap:
            raise ResourceCapExceeded(f"subgroup exceeds {cap} elements")
        frontier = new
    return np.flatnonzero(mask)


def _right_multiplication(G: GroupAction, h: int, layers) -> np.ndarray:
    # x -> x h; with h reached by a word w from the identity, x h = x . w
    word = _word_of(h, layers)
    cur = np.arange(G.order, dtype=np.int64)
    for x in word:
        cur = G.actions[x][cur].astype(np.int64)
    return cur


def _word_of(e: int, layers) -> list[int]:
    parent, gen = {}, {}
    for nodes, parents, gens in layers:
        pos = np.flatnonzero(nodes == e)
        if len(pos):
            k = int(pos[0])
            parent[e], gen[e] = int(parents[k]), int(gens[k])
            break
    if e == 0:
        return []
    if e not in parent:
        raise ValueError(f"element {e} not reached")
    return _word_of(parent[e], layers) + [gen[e]]


def _parabolic_products(G: GroupAction, labels: list[np.ndarray]) -> np.ndarray:
    """Mask of the union of ``S_i S_j`` over all ``i != j``."""
    bad = np.zeros(G.order, dtype=bool)
    r = len(labels)
    for i in range(r):
        in_Si = labels[i] == labels[i][0]
        for j in range(r):
            if i != j:
                cells = np.unique(labels[j][in_Si])
                bad |= np.isin(labels[j], cells)
    return bad


def nlc_check(G: GroupAction, H: SubgroupSpec, pres: CoxeterPresentation,
              labels: list[np.ndarray] | None = None, cap: int = 1_000_000) -> bool:
    """Non-local subgroup condition: no conjugate of a nontrivial element of
    ``H`` lies in any ``S_i S_j``.

    The union of conjugacy classes is closed under ``e -> a e a`` for each
    generator ``a``, so one breadth-first closure replaces the sweep over ``g``.
    """
    layers = _bfs_layers(G)
    h_elems = subgroup_elements(G, H.generator_elements(G, pres), cap=cap, layers=layers)
    if labels is None:
        r = pres.rank
        labels = [coset_labels(G, [j for j in range(r) if j != i])[0] for i in range(r)]
    bad = _parabolic_products(G, labels)
    conj = []
    for x in range(G.ngens):
        Lx = left_multiplication(G, int(G.actions[x][0]), layers)
        conj.append(Lx[G.actions[x].astype(np.int64)])
    mask = np.zeros(G.order, dtype=bool)
    frontier = h_elems[h_elems != 0]
    mask[frontier] = True
    while len(frontier):
        if bad[frontier].any():
            return False
        new = np.unique(np.concatenate([C[frontier] for C in conj]))
        new = new[~mask[new]]
        mask[new] = True
        frontier = new
    return True


def quotient_complex(c: CellComplex, G: GroupAction, H: SubgroupSpec,
                     pres: CoxeterPresentation | None = None, check: bool = True) -> CellComplex:
    """Complex of double cosets ``H g S_i``; requires the non-local condition."""
    pres = pres or presentation_from_symbol(c.symbol)
    layers = _bfs_layers(G)
    gens = H.generator_elements(G, pres)
    if check and not nlc_check(G, H, pres, labels=c.labels):
        raise NLCViolation("subgroup violates the non-local subgroup condition")
    h_order = len(subgroup_elements(G, gens, layers=layers))
    lefts = [left_multiplication(G, h, layers) for h in gens]
    r = pres.rank

    def orbit_labels(lab: np.ndarray, count: int) -> tuple[np.ndarray, int]:
        # H acting on the cells of one dimension; orbits ordered by least element
        rep = _first_elements(lab, count)
        if not lefts:
            return np.arange(count, dtype=np.int32), count
        src = np.tile(np.arange(count), len(lefts))
        dst = np.concatenate([lab[L[rep]] for L in lefts])
        A = sp.csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(count, count))
        k, raw = connected_components(A, directed=False)
        first = np.full(k, count, dtype=np.int64)
        np.minimum.at(first, raw, np.arange(count))
        rank = np.empty(k, dtype=np.int32)
        rank[np.argsort(first, kind="stable")] = np.arange(k, dtype=np.int32)
        return rank[raw], int(k)

    cell_orbit, counts, labels = [], [], []
    for i in range(r):
        o, k = orbit_labels(c.labels[i], c.counts[i])
        cell_orbit.append(o)
        counts.append(k)
        labels.append(o[c.labels[i]])
    bnd, mult = [None], [None]
    for i in range(1, r):
        M = _incidences(G, labels[i - 1], labels[i], [j for j in range(r) if j not in (i - 1, i)],
                        (counts[i - 1], counts[i]))
        if np.any(M.data % h_order):
            raise NLCViolation("subgroup does not act freely on incidences")
        M.data //= h_order
        mult.append(M)
        bnd.append(_mod2(M))
        if check:
            _check_lifts(c.multiplicity[i], cell_orbit[i - 1])
    return CellComplex(
        symbol=c.symbol,
        order=G.order // h_order,
        counts=counts,
        labels=labels,
        boundaries=bnd,
        multiplicity=mult,
        parabolic_orders=[(G.order // h_order) // k for k in counts],
        construction=c.construction,
    )


def _check_lifts(M: sp.csr_matrix, lower_orbit: np.ndarray) -> None:
    # each face of a lifted cell must map to a different quotient face
    C = M.tocsc()
    cols = np.repeat(np.arange(C.shape[1]), np.diff(C.indptr))
    key = cols.astype(np.int64) * (int(lower_orbit.max()) + 1) + lower_orbit[C.indices]
    if len(np.unique(key)) != len(key):
        raise NLCViolation("two faces of one cell collapse in the quotient")


# ---------------------------------------------------------------------------
# text export


def export_text(c: CellComplex, dest=None) -> str:
    lines = [
        f"# hypqec complex v{FORMAT_VERSION}",
        f"symbol {c.symbol}",
        f"construction {c.construction}",
        f"order {c.order}",
        "counts " + " ".join(map(str, c.counts)),
    ]
    for i in range(c.dim + 1):
        lines.append(f"[dim {i}]")
        if i == 0:
            lines.extend(f"{k}:" for k in range(c.counts[0]))
            continue
        C = c.boundaries[i].to_sparse().tocsc()
        C.sort_indices()
        for k in range(c.counts[i]):
            idx = C.indices[C.indptr[k] : C.indptr[k + 1]]
            lines.append(f"{k}: " + " ".join(map(str, idx)) if len(idx) else f"{k}:")
    text = "\n".join(lines) + "\n"
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text)
    elif dest is not None:
        dest.write(text)
    return text


def parse_text(src) -> dict:
    """Read an exported complex back as ``{"header": ..., "boundaries": [...]}``."""
    text = Path(src).read_text() if isinstance(src, (str, Path)) else (
        src.read() if isinstance(src, io.IOBase) or hasattr(src, "read") else str(src))
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# hypqec complex v"):
        raise ParseError("missing complex header")
    header = {}
    k = 1
    while k < len(lines) and not lines[k].startswith("[dim"):
        key, _, val = lines[k].partition(" ")
        header[key] = val
        k += 1
    try:
        counts = [int(x) for x in header["counts"].split()]
    except (KeyError, ValueError) as exc:
        raise ParseError("bad counts line") from exc
    bnds = [None]
    for i in range(len(counts)):
        if k >= len(lines) or lines[k] != f"[dim {i}]":
            raise ParseError(f"missing section for dimension {i}")
        k += 1
        cols = []
        for cell in range(counts[i]):
            if k >= len(lines):
                raise ParseError("truncated complex file")
            head, _, rest = lines[k].partition(":")
            if int(head) != cell:
                raise ParseError(f"cell {cell} out of order")
            cols.append([int(t) for t in rest.split()])
            k += 1
        if i:
            B = BitMatrix.from_indices(cols, counts[i - 1]).transpose()
            bnds.append(B)
    return {"header": header, "counts": counts, "boundaries": bnds}
