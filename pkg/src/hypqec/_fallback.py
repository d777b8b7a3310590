"""Pure-Python twins of the compiled kernels in ``_core.pyx``.

Same algorithms, same outputs; orders of magnitude slower on the large
enumerations, fine for the small complexes used in tests.
"""

from __future__ import annotations

import math

import numpy as np


class _Enum:
    def __init__(self, ngens):
        self.ng = ngens
        self.tab = []  # flat list, -1 = undefined
        self.fwd = []
        self.n_live = 0
        self.stack = []

    def new(self):
        c = len(self.fwd)
        self.fwd.append(c)
        self.tab.extend([-1] * self.ng)
        self.n_live += 1
        return c

    def rep(self, c):
        fwd = self.fwd
        r = c
        while fwd[r] != r:
            r = fwd[r]
        while fwd[c] != r:
            fwd[c], c = r, fwd[c]
        return r

    def merge(self, k, l, queue):
        a, b = self.rep(k), self.rep(l)
        if a == b:
            return
        if b < a:
            a, b = b, a
        self.fwd[b] = a
        self.n_live -= 1
        queue.append(b)

    def coincidence(self, a, b):
        tab, ng = self.tab, self.ng
        queue = []
        self.merge(a, b, queue)
        qi = 0
        while qi < len(queue):
            g = queue[qi]
            qi += 1
            for x in range(ng):
                d = tab[g * ng + x]
                if d < 0:
                    continue
                tab[g * ng + x] = -1
                if tab[d * ng + x] == g:
                    tab[d * ng + x] = -1
                mu, nu = self.rep(g), self.rep(d)
                e = tab[mu * ng + x]
                if e >= 0:
                    self.merge(nu, e, queue)
                    continue
                e = tab[nu * ng + x]
                if e >= 0:
                    self.merge(mu, e, queue)
                    continue
                tab[mu * ng + x] = nu
                tab[nu * ng + x] = mu
                self.stack.append((mu, x))
                if nu != mu:
                    self.stack.append((nu, x))

    def scan(self, a, w):
        tab, ng = self.tab, self.ng
        n = len(w)
        f, i = a, 0
        while i < n:
            nx = tab[f * ng + w[i]]
            if nx < 0:
                break
            f = nx
            i += 1
        if i == n:
            if f != a:
                self.coincidence(f, a)
            return
        b, j = a, n - 1
        while j >= i:
            nx = tab[b * ng + w[j]]
            if nx < 0:
                break
            b = nx
            j -= 1
        if j < i:
            self.coincidence(f, b)
        elif j == i:
            tab[f * ng + w[i]] = b
            tab[b * ng + w[i]] = f
            self.stack.append((f, w[i]))
            if b != f:
                self.stack.append((b, w[i]))

    def process(self, buckets):
        fwd = self.fwd
        while self.stack:
            c, x = self.stack.pop()
            for w in buckets[x]:
                if fwd[c] != c:
                    break
                self.scan(c, w)

    def live_table(self):
        live = [c for c in range(len(self.fwd)) if self.fwd[c] == c]
        m = {c: k for k, c in enumerate(live)}
        ng = self.ng
        out = np.empty((len(live), ng), dtype=np.int32)
        for c in live:
            for x in range(ng):
                out[m[c], x] = m[self.rep(self.tab[c * ng + x])]
        return out


def coset_enumerate(ngens, words, subgroup_words, max_cosets, max_rows=0):
    E = _Enum(ngens)
    buckets = [[] for _ in range(ngens)]
    for w in words:
        if w:
            buckets[w[0]].append(list(w))
    E.new()
    defined = 1
    max_live = 1
    for word in subgroup_words:
        word = list(word)
        if not word:
            continue
        f = 0
        for x in word[:-1]:
            nx = E.tab[f * ngens + x]
            if nx < 0:
                nx = E.new()
                defined += 1
                E.tab[f * ngens + x] = nx
                E.tab[nx * ngens + x] = f
                E.stack += [(f, x), (nx, x)]
                E.process(buckets)
            f = E.rep(nx)
        E.scan(0, word)
        E.process(buckets)
    ptr = 0
    while True:
        x = -1
        while ptr < len(E.fwd):
            if E.fwd[ptr] == ptr:
                row = E.tab[ptr * ngens : (ptr + 1) * ngens]
                if -1 in row:
                    x = row.index(-1)
                    break
            ptr += 1
        if x < 0:
            break
        c = E.new()
        defined += 1
        E.tab[ptr * ngens + x] = c
        E.tab[c * ngens + x] = ptr
        E.stack += [(ptr, x), (c, x)]
        E.process(buckets)
        max_live = max(max_live, E.n_live)
        if E.n_live > max_cosets:
            return None, False, max_live, defined
    return E.live_table(), True, max_live, defined


def standardize_table(table):
    table = np.asarray(table)
    N, ng = table.shape
    newlab = np.full(N, -1, dtype=np.int64)
    if N == 0:
        return table.astype(np.int32)
    order = [0]
    newlab[0] = 0
    head = 0
    while head < len(order):
        c = order[head]
        head += 1
        for x in range(ng):
            d = int(table[c, x])
            if newlab[d] < 0:
                newlab[d] = len(order)
                order.append(d)
    if len(order) != N:
        raise ValueError("coset table is not connected")
    out = np.empty_like(table, dtype=np.int32)
    out[newlab] = newlab[table]
    return out


def gf2_echelon(M, ncols, full):
    nrows = M.shape[0]
    rank = 0
    piv = []
    for col in range(ncols):
        if rank == nrows:
            break
        w = col >> 6
        bit = np.uint64(1 << (col & 63))
        hits = np.flatnonzero(M[rank:, w] & bit)
        if len(hits) == 0:
            continue
        r = rank + int(hits[0])
        if r != rank:
            M[[rank, r]] = M[[r, rank]]
        if full:
            rows = np.flatnonzero(M[:, w] & bit)
            rows = rows[rows != rank]
        else:
            rows = rank + 1 + np.flatnonzero(M[rank + 1 :, w] & bit)
        if len(rows):
            M[rows, w:] ^= M[rank, w:]
        piv.append(col)
        rank += 1
    return rank, np.array(piv, dtype=np.int64)


_LLR_CLAMP = 500.0


def _phi1(x):
    # log(coth(x/2)), its own inverse; phi(0) = inf
    if x == 0.0:
        return math.inf
    return math.log1p(2.0 / math.expm1(x))


def _phi(x):
    # libm element by element: numpy's vectorised expm1/log1p differ from the
    # C library in the last bit, and the compiled core uses the C library
    x = np.asarray(x, dtype=np.float64)
    return np.fromiter(map(_phi1, x.ravel().tolist()), dtype=np.float64, count=x.size).reshape(x.shape)


def _degree_groups(ptr, order):
    # (nodes, edge ids) for every nonzero degree; rows keep edge order
    deg = np.diff(ptr)
    out = []
    for d in np.unique(deg):
        if d == 0:
            continue
        nodes = np.flatnonzero(deg == d)
        pos = ptr[nodes][:, None] + np.arange(d)
        out.append((nodes, pos if order is None else order[pos]))
    return out


def bp_kernel(check_ptr, edge_qubit, qubit_ptr, qubit_edge, syndrome, prior,
              max_rounds, stop_rule):
    check_ptr = np.asarray(check_ptr, dtype=np.int64)
    edge_qubit = np.asarray(edge_qubit, dtype=np.int64)
    qubit_ptr = np.asarray(qubit_ptr, dtype=np.int64)
    qubit_edge = np.asarray(qubit_edge, dtype=np.int64)
    syndrome = np.asarray(syndrome, dtype=np.uint8)
    m, n, E = len(check_ptr) - 1, len(qubit_ptr) - 1, len(edge_qubit)
    cgroups = _degree_groups(check_ptr, None)
    qgroups = _degree_groups(qubit_ptr, qubit_edge)
    edge_check = np.repeat(np.arange(m), np.diff(check_ptr))
    c2q = np.zeros(E)
    q2c = np.empty(E)
    best = np.zeros(n, dtype=np.uint8)
    llr = np.full(n, float(prior))
    prev = int(syndrome.sum())
    best_w = -1
    weights = []
    rnd = 0
    while rnd < max_rounds:
        rnd += 1
        for nodes, Eq in qgroups:
            C = c2q[Eq]
            d = Eq.shape[1]
            for k in range(d):
                acc = np.full(len(nodes), float(prior))
                for l in range(d):
                    if l != k:
                        acc = acc + C[:, l]
                q2c[Eq[:, k]] = np.clip(acc, -_LLR_CLAMP, _LLR_CLAMP)
        neg = (q2c < 0.0).astype(np.uint8)
        tq = _phi(np.abs(q2c))
        for nodes, Ec in cgroups:
            Pm = tq[Ec]
            Nm = neg[Ec]
            d = Ec.shape[1]
            for k in range(d):
                acc = np.zeros(len(nodes))
                sgn = syndrome[nodes].copy()
                for l in range(d):
                    if l != k:
                        acc = acc + Pm[:, l]
                        sgn ^= Nm[:, l]
                v = np.minimum(_phi(acc), _LLR_CLAMP)
                c2q[Ec[:, k]] = np.where(sgn != 0, -v, v)
        llr = np.full(n, float(prior))
        for nodes, Eq in qgroups:
            acc = np.full(len(nodes), float(prior))
            for l in range(Eq.shape[1]):
                acc = acc + c2q[Eq[:, l]]
            llr[nodes] = acc
        hard = (llr < 0.0).astype(np.uint8)
        par = np.bincount(edge_check, weights=hard[edge_qubit], minlength=m).astype(np.int64)
        w = int(((par + syndrome) & 1).sum())
        weights.append(w)
        if best_w < 0 or w < best_w:
            best_w = w
            best = hard
        if stop_rule and (w == 0 or w >= prev):
            break
        prev = w
    return best, llr, rnd, best_w, weights
