"""Syndrome decoders: majority-vote cellular automaton and belief propagation.

Both work on the Tanner graph of one parity-check matrix and return an
estimate of the error given its syndrome.  ``brute_force_marginals`` is the
exact posterior by enumeration, used as the test oracle for BP.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import kernels
from .gf2 import BitMatrix


class TannerGraph:
    """Checks and qubits of a parity-check matrix, with both adjacency lists.

    Edges are numbered check-major (row order of the CSR matrix); ``qubit_edge``
    lists the edges of each qubit in increasing order.
    """

    def __init__(self, H):
        if isinstance(H, BitMatrix):
            S = H.to_sparse()
        else:
            S = sp.csr_matrix(H)
        S = sp.csr_matrix(S, dtype=np.uint8, copy=True)
        S.sum_duplicates()
        S.data &= 1
        S.eliminate_zeros()
        S.sort_indices()
        self.H = S
        self.m, self.n = S.shape
        self.check_ptr = S.indptr.astype(np.int64)
        self.edge_qubit = S.indices.astype(np.int64)
        order = np.argsort(self.edge_qubit, kind="stable")
        self.qubit_edge = order.astype(np.int64)
        self.qubit_ptr = np.concatenate([[0], np.cumsum(np.bincount(self.edge_qubit, minlength=self.n))]).astype(np.int64)
        self.check_degree = np.diff(self.check_ptr)
        self.qubit_degree = np.diff(self.qubit_ptr)
        self._Hi = S.astype(np.int32)
        self._HTi = S.T.tocsr().astype(np.int32)

    @property
    def num_edges(self) -> int:
        return len(self.edge_qubit)

    def checks_of(self, j: int) -> np.ndarray:
        e = self.qubit_edge[self.qubit_ptr[j] : self.qubit_ptr[j + 1]]
        return np.searchsorted(self.check_ptr, e, side="right") - 1

    def qubits_of(self, c: int) -> np.ndarray:
        return self.edge_qubit[self.check_ptr[c] : self.check_ptr[c + 1]]

    def syndrome(self, e) -> np.ndarray:
        return (self._Hi @ np.asarray(e, dtype=np.int32)).astype(np.uint8) & 1

    def unsatisfied_counts(self, s) -> np.ndarray:
        return self._HTi @ np.asarray(s, dtype=np.int32)


@dataclass
class DecodeOutcome:
    correction: np.ndarray  # uint8, the inferred error
    converged: bool  # the correction reproduces the syndrome exactly
    rounds: int
    weights: list[int] = field(default_factory=list)  # residual syndrome weight per round
    llr: np.ndarray | None = None


# ---------------------------------------------------------------------------
# cellular automaton


def ca_sweep(t: TannerGraph, s: np.ndarray) -> np.ndarray:
    """Qubits with strictly more than half of their checks unsatisfied."""
    return (2 * t.unsatisfied_counts(s) > t.qubit_degree).astype(np.uint8)


def ca_decode(t: TannerGraph, syndrome, max_sweeps: int = 100) -> DecodeOutcome:
    """Synchronous majority-vote decoding.

    Every sweep flips all majority-unsatisfied qubits at once.  Decoding stops
    at a zero syndrome or at the first sweep that fails to lower the syndrome
    weight; that last sweep is then undone, so the returned correction is the
    one with the lowest weight seen.
    """
    s = np.asarray(syndrome, dtype=np.uint8).copy()
    if s.shape != (t.m,):
        raise ValueError(f"syndrome has shape {s.shape}, expected ({t.m},)")
    e = np.zeros(t.n, dtype=np.uint8)
    w = int(s.sum())
    weights = []
    sweeps = 0
    while w and sweeps < max_sweeps:
        flip = ca_sweep(t, s)
        sweeps += 1
        s_new = s ^ t.syndrome(flip)
        w_new = int(s_new.sum())
        weights.append(w_new)
        if w_new >= w:
            break
        e ^= flip
        s, w = s_new, w_new
    return DecodeOutcome(e, w == 0, sweeps, weights)


# ---------------------------------------------------------------------------
# belief propagation


def prior_llr(p: float) -> float:
    if not 0.0 < p < 0.5:
        raise ValueError(f"BP prior needs 0 < p < 1/2, got {p}")
    return float(np.log((1.0 - p) / p))


def bp_decode(t: TannerGraph, syndrome, p: float, max_rounds: int = 100) -> DecodeOutcome:
    """Flooding BP in log-likelihood form, with the syndrome-weight stop rule.

    Check-to-qubit messages carry the sign ``(-1)^{s_c}`` and magnitude
    ``2 artanh(prod tanh(m/2))`` over the other incoming messages.  After each
    round the hard decision (posterior LLR < 0) is scored by the weight
    ``w_r`` of ``s + H e``; the run stops when ``w_r = 0`` or
    ``w_r >= w_{r-1}`` (``w_0`` is the weight of ``s``) and returns the decision
    of the round with the smallest ``w_r``.
    """
    s = np.ascontiguousarray(syndrome, dtype=np.uint8)
    if s.shape != (t.m,):
        raise ValueError(f"syndrome has shape {s.shape}, expected ({t.m},)")
    best, llr, rounds, best_w, weights = kernels.bp_kernel(
        t.check_ptr, t.edge_qubit, t.qubit_ptr, t.qubit_edge, s, prior_llr(p),
        int(max_rounds), True)
    return DecodeOutcome(np.asarray(best, dtype=np.uint8), best_w == 0, int(rounds),
                         [int(w) for w in weights], np.asarray(llr))


def bp_posteriors(t: TannerGraph, syndrome, p: float, rounds: int) -> np.ndarray:
    """Posterior error probabilities after exactly ``rounds`` flooding rounds."""
    s = np.ascontiguousarray(syndrome, dtype=np.uint8)
    _, llr, _, _, _ = kernels.bp_kernel(
        t.check_ptr, t.edge_qubit, t.qubit_ptr, t.qubit_edge, s, prior_llr(p),
        int(rounds), False)
    return 1.0 / (1.0 + np.exp(np.asarray(llr)))


# ---------------------------------------------------------------------------
# oracle


def brute_force_marginals(t: TannerGraph, syndrome, p: float, max_qubits: int = 22) -> np.ndarray:
    """Exact ``P(e_j = 1 | H e = s)`` by enumerating all ``2^n`` patterns."""
    n = t.n
    if n > max_qubits:
        raise ValueError(f"{n} qubits is too many to enumerate (limit {max_qubits})")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    s = np.asarray(syndrome, dtype=np.uint8)
    if t.m > 62:
        raise ValueError("syndromes are packed into 64-bit keys; too many checks")
    target = int(sum(int(b) << c for c, b in enumerate(s)))
    col = np.zeros(n, dtype=np.int64)
    for j in range(n):
        for c in t.checks_of(j):
            col[j] ^= 1 << int(c)
    # pattern x has bit j set for qubit j; build syndromes and weights by doubling
    syn = np.zeros(1, dtype=np.int64)
    wt = np.zeros(1, dtype=np.int64)
    for j in range(n):
        syn = np.concatenate([syn, syn ^ col[j]])
        wt = np.concatenate([wt, wt + 1])
    by_weight = np.array([p**w * (1 - p) ** (n - w) for w in range(n + 1)])
    prob = np.where(syn == target, by_weight[wt], 0.0)
    total = prob.sum()
    if total == 0.0:
        raise ValueError("syndrome is not reachable by any error")
    out = np.empty(n)
    for j in range(n):
        out[j] = prob.reshape(-1, 2, 1 << j)[:, 1, :].sum() / total
    return out
