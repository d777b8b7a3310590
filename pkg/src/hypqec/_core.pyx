# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels.

Every function here has a pure-Python twin in :mod:`hypqec._fallback` with the
same signature and the same results; :mod:`hypqec.kernels` picks one at
import time.  BP outputs can differ in the last bit where libm and numpy
round ``tanh`` differently.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, realloc, free
from libc.string cimport memset
from libc.math cimport log, log1p, expm1, fabs
from libc.stdint cimport int32_t, int64_t, uint64_t

cnp.import_array()


# ---------------------------------------------------------------------------
# Todd-Coxeter (Felsch strategy) for presentations whose generators are all
# involutions.  Row c of the table holds c*x for each generator x; because
# x == x^-1 an entry c*x = d always comes paired with d*x = c.


cdef struct TCState:
    int ngens
    int64_t cap_rows      # allocated rows
    int64_t n_rows        # rows handed out so far (live + dead)
    int64_t n_live
    int32_t *tab
    int32_t *fwd          # union-find parent; fwd[c] == c for live cosets
    int32_t *stack        # deduction stack of (coset, gen) pairs
    int64_t stack_len
    int64_t stack_cap
    int32_t *queue        # coincidence queue
    int64_t queue_cap
    int overflow


cdef inline int32_t _rep(TCState *E, int32_t c) nogil:
    cdef int32_t r = c, t
    while E.fwd[r] != r:
        r = E.fwd[r]
    while E.fwd[c] != r:
        t = E.fwd[c]
        E.fwd[c] = r
        c = t
    return r


cdef int _push(TCState *E, int32_t c, int32_t x) nogil:
    cdef int32_t *tmp
    if E.stack_len + 2 > E.stack_cap:
        tmp = <int32_t *> realloc(E.stack, 2 * E.stack_cap * 2 * sizeof(int32_t))
        if tmp == NULL:
            E.overflow = 2
            return -1
        E.stack = tmp
        E.stack_cap *= 2
    E.stack[E.stack_len] = c
    E.stack[E.stack_len + 1] = x
    E.stack_len += 2
    return 0


cdef int _grow(TCState *E, int64_t hard_rows) nogil:
    cdef int64_t new_cap = E.cap_rows * 2
    cdef int32_t *t1
    cdef int32_t *t2
    cdef int32_t *t3
    if new_cap > hard_rows:
        new_cap = hard_rows
    if new_cap <= E.cap_rows:
        return -1
    t1 = <int32_t *> realloc(E.tab, new_cap * E.ngens * sizeof(int32_t))
    if t1 == NULL:
        return -1
    E.tab = t1
    t2 = <int32_t *> realloc(E.fwd, new_cap * sizeof(int32_t))
    if t2 == NULL:
        return -1
    E.fwd = t2
    t3 = <int32_t *> realloc(E.queue, new_cap * sizeof(int32_t))
    if t3 == NULL:
        return -1
    E.queue = t3
    E.queue_cap = new_cap
    memset(E.tab + E.cap_rows * E.ngens, 0xFF,
           (new_cap - E.cap_rows) * E.ngens * sizeof(int32_t))
    E.cap_rows = new_cap
    return 0


cdef int32_t _new_coset(TCState *E) nogil:
    cdef int32_t c = <int32_t> E.n_rows
    E.fwd[c] = c
    E.n_rows += 1
    E.n_live += 1
    return c


cdef void _merge(TCState *E, int32_t k, int32_t l, int64_t *qlen) nogil:
    cdef int32_t a = _rep(E, k), b = _rep(E, l), t
    if a == b:
        return
    if b < a:
        t = a
        a = b
        b = t
    E.fwd[b] = a
    E.n_live -= 1
    E.queue[qlen[0]] = b
    qlen[0] += 1


cdef void _coincidence(TCState *E, int32_t a, int32_t b) nogil:
    cdef int64_t qlen = 0, qi = 0
    cdef int32_t g, d, mu, nu, x, ng = E.ngens, e
    _merge(E, a, b, &qlen)
    while qi < qlen:
        g = E.queue[qi]
        qi += 1
        for x in range(ng):
            d = E.tab[<int64_t> g * ng + x]
            if d < 0:
                continue
            E.tab[<int64_t> g * ng + x] = -1
            if E.tab[<int64_t> d * ng + x] == g:
                E.tab[<int64_t> d * ng + x] = -1
            mu = _rep(E, g)
            nu = _rep(E, d)
            e = E.tab[<int64_t> mu * ng + x]
            if e >= 0:
                _merge(E, nu, e, &qlen)
            else:
                e = E.tab[<int64_t> nu * ng + x]
                if e >= 0:
                    _merge(E, mu, e, &qlen)
                else:
                    E.tab[<int64_t> mu * ng + x] = nu
                    E.tab[<int64_t> nu * ng + x] = mu
                    _push(E, mu, x)
                    if nu != mu:
                        _push(E, nu, x)


cdef void _scan(TCState *E, int32_t a, const int32_t *w, int n) nogil:
    """Scan relator ``w`` at coset ``a``: close, deduce, or find a coincidence."""
    cdef int ng = E.ngens
    cdef int32_t f = a, b = a, nx
    cdef int i = 0, j = n - 1
    while i < n:
        nx = E.tab[<int64_t> f * ng + w[i]]
        if nx < 0:
            break
        f = nx
        i += 1
    if i == n:
        if f != a:
            _coincidence(E, f, a)
        return
    while j >= i:
        nx = E.tab[<int64_t> b * ng + w[j]]
        if nx < 0:
            break
        b = nx
        j -= 1
    if j < i:
        _coincidence(E, f, b)
    elif j == i:
        E.tab[<int64_t> f * ng + w[i]] = b
        E.tab[<int64_t> b * ng + w[i]] = f
        _push(E, f, w[i])
        if b != f:
            _push(E, b, w[i])


cdef void _process(TCState *E, const int32_t *words, const int32_t *wstart,
                   const int32_t *wlen, const int32_t *gen_ptr,
                   const int32_t *gen_words) nogil:
    cdef int32_t c, x, k, wi
    while E.stack_len > 0:
        E.stack_len -= 2
        c = E.stack[E.stack_len]
        x = E.stack[E.stack_len + 1]
        for k in range(gen_ptr[x], gen_ptr[x + 1]):
            if E.fwd[c] != c:
                break
            wi = gen_words[k]
            _scan(E, c, words + wstart[wi], wlen[wi])


cdef int _compact(TCState *E, int32_t *ptr) nogil:
    """Renumber live cosets densely, keeping their relative order."""
    cdef int64_t c, new = 0, x, ng = E.ngens
    cdef int32_t *m = E.queue   # scratch; queue is empty between definitions
    cdef int32_t p_new = -1, v
    for c in range(E.n_rows):
        if E.fwd[c] == c:
            m[c] = <int32_t> new
            if p_new < 0 and c >= ptr[0]:
                p_new = <int32_t> new
            new += 1
        else:
            m[c] = -1
    for c in range(E.n_rows):
        if E.fwd[c] == c:
            for x in range(ng):
                v = E.tab[c * ng + x]
                E.tab[m[c] * ng + x] = m[_rep(E, v)] if v >= 0 else -1
    for c in range(new):
        E.fwd[c] = <int32_t> c
    memset(E.tab + new * ng, 0xFF, (E.n_rows - new) * ng * sizeof(int32_t))
    E.n_rows = new
    E.n_live = new
    ptr[0] = p_new if p_new >= 0 else <int32_t> new
    return 0


def coset_enumerate(int ngens, list words, list subgroup_words,
                    long max_cosets, long max_rows=0):
    """Felsch coset enumeration for involutive generators.

    ``words`` must already contain every cyclic conjugate (and reversal) of
    every relator; they are bucketed here by their first letter.  Returns
    ``(table, complete, max_live, defined)``; ``table`` is ``None`` unless the
    enumeration completed within ``max_cosets`` live cosets.
    """
    cdef TCState E
    cdef int64_t hard_rows = max_rows if max_rows > 0 else 4 * max_cosets + 16
    cdef int64_t init = 1 << 16
    cdef int64_t nwords = len(words), total = 0, i, k
    cdef int32_t ptr = 0, x, c, n, f, nx
    cdef int64_t max_live = 1, defined = 1
    cdef int complete = 0
    if init > hard_rows:
        init = hard_rows
    for w in words:
        total += len(w)
    cdef cnp.ndarray[cnp.int32_t] wdata = np.zeros(max(total, 1), dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t] wstart = np.zeros(max(nwords, 1), dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t] wlen = np.zeros(max(nwords, 1), dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t] gen_ptr = np.zeros(ngens + 1, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t] gen_words = np.zeros(max(nwords, 1), dtype=np.int32)
    pos = 0
    buckets = [[] for _ in range(ngens)]
    for i, w in enumerate(words):
        wstart[i] = pos
        wlen[i] = len(w)
        for k, letter in enumerate(w):
            wdata[pos + k] = letter
        pos += len(w)
        if len(w):
            buckets[w[0]].append(i)
    pos = 0
    for x in range(ngens):
        gen_ptr[x] = pos
        for i in buckets[x]:
            gen_words[pos] = i
            pos += 1
    gen_ptr[ngens] = pos

    E.ngens = ngens
    E.cap_rows = init
    E.n_rows = 0
    E.n_live = 0
    E.tab = <int32_t *> malloc(init * ngens * sizeof(int32_t))
    E.fwd = <int32_t *> malloc(init * sizeof(int32_t))
    E.queue = <int32_t *> malloc(init * sizeof(int32_t))
    E.queue_cap = init
    E.stack_cap = 1 << 16
    E.stack = <int32_t *> malloc(E.stack_cap * 2 * sizeof(int32_t))
    E.stack_len = 0
    E.overflow = 0
    if E.tab == NULL or E.fwd == NULL or E.queue == NULL or E.stack == NULL:
        free(E.tab); free(E.fwd); free(E.queue); free(E.stack)
        raise MemoryError("coset enumeration workspace")
    memset(E.tab, 0xFF, init * ngens * sizeof(int32_t))
    _new_coset(&E)

    cdef const int32_t *wd = &wdata[0]
    cdef const int32_t *ws = &wstart[0]
    cdef const int32_t *wl = &wlen[0]
    cdef const int32_t *gp = &gen_ptr[0]
    cdef const int32_t *gw = &gen_words[0]
    cdef cnp.ndarray[cnp.int32_t] sw

    try:
        # subgroup generators: trace each word at coset 0, defining as needed
        for word in subgroup_words:
            sw = np.asarray(word, dtype=np.int32)
            n = len(word)
            if n == 0:
                continue
            f = 0
            for i in range(n - 1):
                nx = E.tab[<int64_t> f * ngens + sw[i]]
                if nx < 0:
                    if E.n_rows >= E.cap_rows and _grow(&E, hard_rows) != 0:
                        return None, False, max_live, defined
                    nx = _new_coset(&E)
                    defined += 1
                    E.tab[<int64_t> f * ngens + sw[i]] = nx
                    E.tab[<int64_t> nx * ngens + sw[i]] = f
                    _push(&E, f, sw[i])
                    _push(&E, nx, sw[i])
                    _process(&E, wd, ws, wl, gp, gw)
                f = _rep(&E, nx)
            _scan(&E, 0, &sw[0], n)
            _process(&E, wd, ws, wl, gp, gw)

        with nogil:
            while True:
                # next live coset with an undefined entry
                while ptr < E.n_rows:
                    if E.fwd[ptr] == ptr:
                        x = 0
                        while x < ngens and E.tab[<int64_t> ptr * ngens + x] >= 0:
                            x += 1
                        if x < ngens:
                            break
                    ptr += 1
                if ptr >= E.n_rows:
                    complete = 1
                    break
                if E.n_rows >= E.cap_rows:
                    if E.n_live < E.n_rows // 2 or _grow(&E, hard_rows) != 0:
                        _compact(&E, &ptr)
                        if E.n_rows >= E.cap_rows and _grow(&E, hard_rows) != 0:
                            break
                        continue
                c = _new_coset(&E)
                defined += 1
                E.tab[<int64_t> ptr * ngens + x] = c
                E.tab[<int64_t> c * ngens + x] = ptr
                _push(&E, ptr, x)
                _push(&E, c, x)
                _process(&E, wd, ws, wl, gp, gw)
                if E.n_live > max_live:
                    max_live = E.n_live
                if E.n_live > max_cosets or E.overflow:
                    break
        if not complete:
            return None, False, max_live, defined
        _compact(&E, &ptr)
        out = np.empty((E.n_rows, ngens), dtype=np.int32)
        _copy_table(&E, out)
        return out, True, max_live, defined
    finally:
        free(E.tab)
        free(E.fwd)
        free(E.queue)
        free(E.stack)


cdef void _copy_table(TCState *E, cnp.ndarray[cnp.int32_t, ndim=2] out):
    cdef int64_t c, x
    for c in range(E.n_rows):
        for x in range(E.ngens):
            out[c, x] = E.tab[c * E.ngens + x]


def standardize_table(cnp.int32_t[:, ::1] table):
    """Relabel cosets in breadth-first order from coset 0 (generator order)."""
    cdef Py_ssize_t N = table.shape[0], ng = table.shape[1]
    cdef cnp.ndarray[cnp.int32_t] newlab = np.full(N, -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t] order = np.empty(N, dtype=np.int32)
    cdef Py_ssize_t head = 0, tail = 1, x
    cdef int32_t c, d
    cdef cnp.ndarray[cnp.int32_t, ndim=2] out = np.empty((N, ng), dtype=np.int32)
    if N == 0:
        return out
    newlab[0] = 0
    order[0] = 0
    while head < tail:
        c = order[head]
        head += 1
        for x in range(ng):
            d = table[c, x]
            if newlab[d] < 0:
                newlab[d] = <int32_t> tail
                order[tail] = d
                tail += 1
    if tail != N:
        raise ValueError("coset table is not connected")
    for c in range(N):
        for x in range(ng):
            out[newlab[c], x] = newlab[table[c, x]]
    return out


# ---------------------------------------------------------------------------
# GF(2) elimination on bit-packed rows (bit j of a row lives in word j >> 6).


def gf2_echelon(cnp.uint64_t[:, ::1] M, Py_ssize_t ncols, bint full):
    """Row-reduce ``M`` in place; returns ``(rank, pivot columns)``.

    The first ``rank`` rows end up in echelon form with pivots increasing.
    With ``full`` the pivot columns are also cleared above each pivot (RREF).
    """
    cdef Py_ssize_t nrows = M.shape[0], nw = M.shape[1]
    cdef Py_ssize_t rank = 0, col, r, w, k, start
    cdef uint64_t bit, tmp
    cdef cnp.ndarray[cnp.int64_t] piv = np.empty(min(nrows, ncols), dtype=np.int64)
    with nogil:
        for col in range(ncols):
            if rank == nrows:
                break
            w = col >> 6
            bit = (<uint64_t> 1) << (col & 63)
            r = rank
            while r < nrows and not (M[r, w] & bit):
                r += 1
            if r == nrows:
                continue
            if r != rank:
                for k in range(w, nw):
                    tmp = M[r, k]
                    M[r, k] = M[rank, k]
                    M[rank, k] = tmp
            start = 0 if full else rank + 1
            for r in range(start, nrows):
                if r != rank and (M[r, w] & bit):
                    for k in range(w, nw):
                        M[r, k] ^= M[rank, k]
            piv[rank] = col
            rank += 1
    return rank, piv[:rank].copy()


# ---------------------------------------------------------------------------
# Belief propagation, flooding schedule, syndrome form.
#
# Edges are numbered check-major: the edges of check c are
# check_ptr[c] .. check_ptr[c+1]-1 and edge_qubit[e] is the qubit of edge e.
# qubit_edge lists, for each qubit j, its edges qubit_ptr[j] .. in increasing
# order.  Sums skip the excluded edge and run in edge order, which the numpy
# twin reproduces operation for operation.
#
# The check update 2 artanh(prod tanh(m/2)) is evaluated as sign times
# phi(sum phi(|m|)) with phi(x) = log1p(2 / expm1(x)), which is its own inverse
# and keeps full relative precision for very small and very large messages.
# The clamp only keeps messages finite.

DEF LLR_CLAMP = 500.0


cdef inline double _phi(double x) nogil:
    return log1p(2.0 / expm1(x))


def bp_kernel(const int64_t[::1] check_ptr, const int64_t[::1] edge_qubit,
              const int64_t[::1] qubit_ptr, const int64_t[::1] qubit_edge,
              const cnp.uint8_t[::1] syndrome, double prior, int max_rounds,
              bint stop_rule):
    """Run BP; returns ``(best_hard, last_llr, rounds, best_weight, weights)``.

    ``weights[r]`` is the syndrome mismatch of the hard decision after round
    ``r + 1``.  With ``stop_rule`` the run halts when the mismatch is zero or
    fails to drop below the previous round (the syndrome weight itself counts
    as round 0); otherwise exactly ``max_rounds`` rounds run.
    """
    cdef Py_ssize_t m = check_ptr.shape[0] - 1, n = qubit_ptr.shape[0] - 1
    cdef Py_ssize_t E = edge_qubit.shape[0]
    cdef cnp.ndarray[cnp.float64_t] c2q_a = np.zeros(E)
    cdef cnp.ndarray[cnp.float64_t] q2c_a = np.empty(E)
    cdef cnp.ndarray[cnp.float64_t] tq_a = np.empty(E)
    cdef cnp.ndarray[cnp.uint8_t] neg_a = np.empty(E, dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t] llr_a = np.empty(n)
    cdef cnp.ndarray[cnp.uint8_t] hard_a = np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t] best_a = np.zeros(n, dtype=np.uint8)
    cdef double[::1] c2q = c2q_a, q2c = q2c_a, tq = tq_a, llr = llr_a
    cdef cnp.uint8_t[::1] neg = neg_a
    cdef cnp.uint8_t[::1] hard = hard_a, best = best_a
    cdef Py_ssize_t c, j, k, l, a, b, e
    cdef double acc, v
    cdef int par, sgn, rnd = 0
    cdef int64_t w, prev = 0, best_w = -1
    weights = []
    for c in range(m):
        prev += syndrome[c]
    while rnd < max_rounds:
        rnd += 1
        with nogil:
            for j in range(n):
                a = qubit_ptr[j]
                b = qubit_ptr[j + 1]
                for k in range(a, b):
                    acc = prior
                    for l in range(a, b):
                        if l != k:
                            acc += c2q[qubit_edge[l]]
                    if acc > LLR_CLAMP:
                        acc = LLR_CLAMP
                    elif acc < -LLR_CLAMP:
                        acc = -LLR_CLAMP
                    q2c[qubit_edge[k]] = acc
            for e in range(E):
                neg[e] = 1 if q2c[e] < 0.0 else 0
                tq[e] = _phi(fabs(q2c[e]))
            for c in range(m):
                a = check_ptr[c]
                b = check_ptr[c + 1]
                for k in range(a, b):
                    acc = 0.0
                    sgn = syndrome[c]
                    for l in range(a, b):
                        if l != k:
                            acc += tq[l]
                            sgn ^= neg[l]
                    v = _phi(acc)
                    if v > LLR_CLAMP:
                        v = LLR_CLAMP
                    c2q[k] = -v if sgn else v
            for j in range(n):
                acc = prior
                for l in range(qubit_ptr[j], qubit_ptr[j + 1]):
                    acc += c2q[qubit_edge[l]]
                llr[j] = acc
                hard[j] = 1 if acc < 0.0 else 0
            w = 0
            for c in range(m):
                par = syndrome[c]
                for e in range(check_ptr[c], check_ptr[c + 1]):
                    par ^= hard[edge_qubit[e]]
                w += par
        weights.append(w)
        if best_w < 0 or w < best_w:
            best_w = w
            best_a[:] = hard_a
        if stop_rule and (w == 0 or w >= prev):
            break
        prev = w
    return best_a, llr_a, rnd, best_w, weights
