"""Finite quotients of Coxeter groups as permutation actions.

Two routes produce the same kind of object, a regular right action of a finite
group on ``0..N-1`` (element 0 is the identity) with one permutation per
generator:

* :func:`bfs_matrix_group` closes finite-field generator matrices under right
  multiplication;
* :func:`todd_coxeter` enumerates cosets of the trivial subgroup in a finitely
  presented quotient ``<a_i | Coxeter relations, extra relators>``.
"""

from __future__ import annotations

import hashlib
import logging
import struct
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import kernels
from .algebra import FiniteField
from .coxeter import CoxeterPresentation
from .errors import ParseError, ResourceCapExceeded

log = logging.getLogger(__name__)


@dataclass
class GroupAction:
    """Right action ``element -> element * generator`` for each generator."""

    actions: np.ndarray  # (ngens, N) int32

    @property
    def order(self) -> int:
        return int(self.actions.shape[1])

    @property
    def ngens(self) -> int:
        return int(self.actions.shape[0])

    def act(self, gen: int, element: int) -> int:
        return int(self.actions[gen, element])

    def act_word(self, word, element: int = 0) -> int:
        for x in word:
            element = int(self.actions[x, element])
        return element

    def is_permutation(self) -> bool:
        N = self.order
        return all(np.array_equal(np.sort(a), np.arange(N)) for a in self.actions)

    def involutive(self) -> bool:
        idx = np.arange(self.order)
        return all(np.array_equal(a[a], idx) for a in self.actions)

    def orbit(self, gens, start: int = 0) -> np.ndarray:
        """Sorted orbit of ``start`` under the generators ``gens``."""
        seen = {start}
        frontier = [start]
        acts = [self.actions[g] for g in gens]
        while frontier:
            nxt = []
            for e in frontier:
                for a in acts:
                    f = int(a[e])
                    if f not in seen:
                        seen.add(f)
                        nxt.append(f)
            frontier = nxt
        return np.array(sorted(seen), dtype=np.int64)


@dataclass
class MatGroup(GroupAction):
    """Group generated by matrices over a finite field, with its Cayley action."""

    field: FiniteField | None = None
    dim: int = 0
    elements: np.ndarray | None = dc_field(default=None, repr=False)  # (N, dim*dim) uint8
    parity: np.ndarray | None = dc_field(default=None, repr=False)  # (N,) uint8 or None

    def matrix(self, index: int) -> np.ndarray:
        return self.elements[index].astype(np.int64).reshape(self.dim, self.dim)


@dataclass
class CosetTable(GroupAction):
    """Coset table of the trivial subgroup; ``complete`` is False when capped."""

    complete: bool = True
    max_live: int = 0
    defined: int = 0

    @property
    def index(self) -> int:
        return self.order


# ---------------------------------------------------------------------------
# matrix groups


def _key_powers(q: int, entries: int, parity: bool) -> np.ndarray:
    limit = 2**62 if parity else 2**63
    if q**entries >= limit:
        raise ResourceCapExceeded(
            f"F_{q} matrices of {entries} entries do not pack into a 64-bit hash key"
        )
    return np.array([q ** (entries - 1 - k) for k in range(entries)], dtype=np.int64)


def _encode(mats: np.ndarray, powers: np.ndarray, parity: np.ndarray | None) -> np.ndarray:
    keys = mats.reshape(len(mats), -1).astype(np.int64) @ powers
    if parity is not None:
        keys = 2 * keys + parity
    return keys


def bfs_matrix_group(field: FiniteField, gens: list[np.ndarray], cap: int = 2_500_000,
                     parity: list[int] | None = None, chunk: int = 200_000) -> MatGroup:
    """Closure of ``gens`` under right multiplication, breadth first.

    With ``parity`` each generator also carries a bit and elements are pairs
    ``(matrix, xor of bits)``; for reflections this tracks orientation, which
    the matrix alone forgets in characteristic 2.
    """
    gens = [np.asarray(g, dtype=np.int64) for g in gens]
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].shape[0]
    G = np.stack(gens)
    gbits = None if parity is None else np.asarray(parity, dtype=np.int64)
    powers = _key_powers(field.q, n * n, parity is not None)

    ident = field.identity(n)[None]
    elems = [ident.reshape(1, -1).astype(np.uint8)]
    bits = [np.zeros(1, dtype=np.int64)] if gbits is not None else None
    known = _encode(ident, powers, bits[0] if bits else None)
    frontier, fbits = ident, (bits[0] if bits else None)
    total = 1
    while len(frontier):
        prods, pbits = [], []
        for s in range(0, len(frontier), chunk):
            block = frontier[s : s + chunk]
            P = field.matmul(block[:, None], G[None]).reshape(-1, n, n)
            prods.append(P)
            if gbits is not None:
                pbits.append((fbits[s : s + chunk, None] ^ gbits[None]).reshape(-1))
        P = np.concatenate(prods)
        pb = np.concatenate(pbits) if gbits is not None else None
        keys = _encode(P, powers, pb)
        _, first = np.unique(keys, return_index=True)
        first.sort()
        keys = keys[first]
        pos = np.searchsorted(known, keys)
        pos[pos == len(known)] = 0
        fresh = first[known[pos] != keys]
        if len(fresh) == 0:
            break
        total += len(fresh)
        if total > cap:
            raise ResourceCapExceeded(f"matrix group order exceeds cap {cap}")
        frontier = P[fresh]
        elems.append(frontier.reshape(len(fresh), -1).astype(np.uint8))
        if gbits is not None:
            fbits = pb[fresh]
            bits.append(fbits)
        known = np.sort(np.concatenate([known, keys[known[pos] != keys]]))
        log.debug("bfs layer: %d new, %d total", len(fresh), total)

    E = np.concatenate(elems)
    B = np.concatenate(bits) if gbits is not None else None
    all_keys = _encode(E.astype(np.int64).reshape(-1, n, n), powers, B)
    order = np.argsort(all_keys)
    sorted_keys = all_keys[order]
    actions = np.empty((len(gens), len(E)), dtype=np.int32)
    for k, g in enumerate(gens):
        for s in range(0, len(E), chunk):
            block = E[s : s + chunk].astype(np.int64).reshape(-1, n, n)
            P = field.matmul(block, g)
            bb = None if B is None else B[s : s + chunk] ^ gbits[k]
            kk = _encode(P, powers, bb)
            pos = np.searchsorted(sorted_keys, kk)
            if np.any(pos >= len(sorted_keys)) or np.any(sorted_keys[np.minimum(pos, len(sorted_keys) - 1)] != kk):
                raise RuntimeError("group is not closed under a generator")
            actions[k, s : s + chunk] = order[pos]
    return MatGroup(actions, field=field, dim=n, elements=E,
                    parity=None if B is None else B.astype(np.uint8))


# ---------------------------------------------------------------------------
# Todd-Coxeter


def relator_closure(words: list[list[int]]) -> list[list[int]]:
    """All cyclic conjugates of the words and of their reversals, deduplicated.

    For involutive generators the reversal of a word is its inverse.
    """
    out = set()
    for w in words:
        for v in (list(w), list(reversed(w))):
            for i in range(len(v)):
                out.add(tuple(v[i:] + v[:i]))
    return [list(w) for w in sorted(out)]


def free_reduce(word: list[int]) -> list[int]:
    """Cancel adjacent repeated letters (each generator is an involution)."""
    out: list[int] = []
    for x in word:
        if out and out[-1] == x:
            out.pop()
        else:
            out.append(x)
    return out


def todd_coxeter(pres: CoxeterPresentation, extra_relators=(), cap: int = 4_000_000,
                 subgroup=(), shuffle_seed: int | None = None) -> CosetTable:
    """Coset enumeration over the Coxeter presentation plus ``extra_relators``.

    ``extra_relators`` and ``subgroup`` are words (strings over the generator
    letters or integer lists).  With an empty subgroup the table is the regular
    representation of the quotient group.  ``shuffle_seed`` permutes the
    relator processing order (the result is canonical regardless).
    """
    rels = pres.relators()
    for w in extra_relators:
        w = free_reduce(pres.parse_word(w))
        if w:
            rels.append(w)
    sub = [pres.parse_word(w) for w in subgroup]
    words = relator_closure(rels)
    if shuffle_seed is not None:
        rng = np.random.default_rng(shuffle_seed)
        words = [words[i] for i in rng.permutation(len(words))]
    table, complete, max_live, defined = kernels.coset_enumerate(pres.rank, words, sub, cap)
    if not complete:
        return CosetTable(np.zeros((pres.rank, 0), dtype=np.int32), complete=False,
                          max_live=max_live, defined=defined)
    table = kernels.standardize_table(table)
    return CosetTable(np.ascontiguousarray(table.T), complete=True, max_live=max_live,
                      defined=defined)


def relators_hold(action: GroupAction, words) -> bool:
    """Every word acts trivially on every point (vectorised check)."""
    idx = np.arange(action.order)
    for w in words:
        cur = idx.copy()
        for x in w:
            cur = action.actions[x][cur]
        if not np.array_equal(cur, idx):
            return False
    return True


# ---------------------------------------------------------------------------
# parabolic subgroups


def parabolic_orders(G: GroupAction) -> dict[tuple[int, ...], int]:
    """Order of the image of every subgroup generated by a proper subset of generators."""
    from itertools import combinations

    out = {(): 1}
    for size in range(1, G.ngens):
        for gens in combinations(range(G.ngens), size):
            out[gens] = len(G.orbit(gens))
    return out


# finite Coxeter groups that appear as parabolics of the string symbols used here
def coxeter_group_order(pres: CoxeterPresentation, gens: tuple[int, ...]) -> int | None:
    """Order of the finite Coxeter group on ``gens`` (None if infinite/unknown)."""
    comps = []
    cur: list[int] = []
    for g in gens:
        if cur and pres.exponents[cur[-1]][g] == 2:
            comps.append(cur)
            cur = []
        cur.append(g)
    if cur:
        comps.append(cur)
    total = 1
    for comp in comps:
        if any(pres.exponents[a][b] != 2 for k, a in enumerate(comp) for b in comp[k + 2:]):
            return None
        labels = [pres.exponents[comp[k]][comp[k + 1]] for k in range(len(comp) - 1)]
        o = _string_coxeter_order(labels)
        if o is None:
            return None
        total *= o
    return total


_KNOWN = {
    (): 2,
    (3,): 6, (4,): 8, (5,): 10, (6,): 12,
    (3, 3): 24, (3, 4): 48, (4, 3): 48, (3, 5): 120, (5, 3): 120,
    (3, 3, 3): 120, (3, 3, 4): 384, (4, 3, 3): 384, (3, 4, 3): 1152,
    (3, 3, 5): 14400, (5, 3, 3): 14400,
}


def _string_coxeter_order(labels: list[int]) -> int | None:
    labels = tuple(labels)
    if labels in _KNOWN:
        return _KNOWN[labels]
    if len(labels) == 1:
        return 2 * labels[0]
    if all(m == 3 for m in labels):  # A_n
        import math

        return math.factorial(len(labels) + 2)
    return None


@dataclass
class ParabolicReport:
    rows: list[dict]

    @property
    def all_proper(self) -> bool:
        return all(r["expected"] is None or r["order"] == r["expected"] for r in self.rows)

    def order(self, gens) -> int:
        for r in self.rows:
            if tuple(r["gens"]) == tuple(gens):
                return r["order"]
        raise KeyError(gens)


def parabolic_order_report(G: GroupAction, pres: CoxeterPresentation) -> ParabolicReport:
    """Image orders of the maximal parabolics S_i = <a_j : j != i> and of the
    rank-(D-1) parabolics used for incidences, against the Coxeter orders."""
    rows = []
    r = pres.rank
    subsets = [tuple(j for j in range(r) if j != i) for i in range(r)]
    subsets += [tuple(j for j in range(r) if j not in (i, i + 1)) for i in range(r - 1)]
    for gens in subsets:
        order = len(G.orbit(gens))
        rows.append({
            "gens": list(gens),
            "letters": "".join(pres.letters[g] for g in gens),
            "order": order,
            "expected": coxeter_group_order(pres, gens),
        })
    return ParabolicReport(rows)


# ---------------------------------------------------------------------------
# binary cache

_MAGIC = b"HYPQGRP1"


def save_group(path, G: GroupAction, descriptor: str = "") -> None:
    """Versioned header, element count, generator permutations as int32."""
    desc = descriptor.encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IQI", G.ngens, G.order, len(desc)))
        fh.write(desc)
        fh.write(np.ascontiguousarray(G.actions, dtype="<i4").tobytes())


def load_group(path) -> tuple[GroupAction, str]:
    data = Path(path).read_bytes()
    if data[:8] != _MAGIC:
        raise ParseError(f"{path}: not a group cache file")
    try:
        ngens, order, dlen = struct.unpack_from("<IQI", data, 8)
        off = 8 + struct.calcsize("<IQI")
        desc = data[off : off + dlen].decode()
        off += dlen
        need = ngens * order * 4
        if len(data) - off != need:
            raise ParseError(f"{path}: truncated group table")
        actions = np.frombuffer(data, dtype="<i4", count=ngens * order, offset=off)
    except struct.error as exc:
        raise ParseError(f"{path}: corrupt header") from exc
    return GroupAction(actions.reshape(ngens, order).astype(np.int32)), desc


def descriptor_hash(descriptor: str) -> str:
    return hashlib.sha256(descriptor.encode()).hexdigest()[:16]
