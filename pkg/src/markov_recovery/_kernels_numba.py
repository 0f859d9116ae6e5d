"""Hot numeric kernels, numba-compiled.

Cyclic Jacobi eigensolver for dense complex Hermitian matrices (target scale
d <= 64) and the batched conditional-entropy evaluation that dominates the
POVM optimizers. The pure-numpy twins live in _kernels_numpy; the active set
is picked in backend.py via the MARKOV_RECOVERY_BACKEND env flag.
"""

import math

import numpy as np
from numba import njit

# Sweep cap is a safety net only; cyclic Jacobi converges in ~6-10 sweeps
# at these sizes.
_MAX_SWEEPS = 100


@njit(cache=True, nogil=True)
def _rotate(a, v, n, p, q, with_vectors):
    apq = a[p, q]
    r = abs(apq)
    if r < 1e-300:
        return
    phase = apq / r
    diff = a[p, p].real - a[q, q].real
    tau = diff / (2.0 * r)
    if tau >= 0.0:
        t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
    else:
        t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
    c = 1.0 / math.sqrt(1.0 + t * t)
    s = t * c
    sp = s * phase
    spc = s * phase.conjugate()
    for k in range(n):
        akp = a[k, p]
        akq = a[k, q]
        a[k, p] = c * akp + spc * akq
        a[k, q] = -sp * akp + c * akq
    for k in range(n):
        apk = a[p, k]
        aqk = a[q, k]
        a[p, k] = c * apk + sp * aqk
        a[q, k] = -spc * apk + c * aqk
    a[p, q] = 0.0 + 0.0j
    a[q, p] = 0.0 + 0.0j
    if with_vectors:
        for k in range(n):
            vkp = v[k, p]
            vkq = v[k, q]
            v[k, p] = c * vkp + spc * vkq
            v[k, q] = -sp * vkp + c * vkq


@njit(cache=True, nogil=True)
def _offdiag_norm(a, n):
    s = 0.0
    for p in range(n - 1):
        for q in range(p + 1, n):
            x = a[p, q]
            s += x.real * x.real + x.imag * x.imag
    return math.sqrt(2.0 * s)


@njit(cache=True, nogil=True)
def _jacobi(a, v, n, with_vectors):
    scale = 0.0
    for i in range(n):
        for j in range(n):
            x = a[i, j]
            scale += x.real * x.real + x.imag * x.imag
    scale = math.sqrt(scale)
    if scale == 0.0:
        return
    tol = 1e-14 * scale
    for _ in range(_MAX_SWEEPS):
        if _offdiag_norm(a, n) <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(a, v, n, p, q, with_vectors)


@njit(cache=True, nogil=True)
def hermitian_eigh(h):
    """Eigenvalues (ascending) and orthonormal eigenvector columns of Hermitian h."""
    n = h.shape[0]
    a = h.copy()
    v = np.eye(n, dtype=np.complex128)
    _jacobi(a, v, n, True)
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i].real
    order = np.argsort(w)
    w_sorted = np.empty(n)
    v_sorted = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        j = order[i]
        w_sorted[i] = w[j]
        for k in range(n):
            v_sorted[k, i] = v[k, j]
    return w_sorted, v_sorted


@njit(cache=True, nogil=True)
def hermitian_eigvals(h):
    """Eigenvalues (ascending) of Hermitian h."""
    n = h.shape[0]
    a = h.copy()
    v = np.empty((1, 1), dtype=np.complex128)
    _jacobi(a, v, n, False)
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i].real
    return np.sort(w)


@njit(cache=True, nogil=True)
def _entropy_of_scaled(w, k, p):
    # entropy in bits of the distribution w/p, ignoring round-off negatives
    s = 0.0
    for i in range(k):
        lam = w[i] / p
        if lam > 0.0:
            s -= lam * math.log2(lam)
    return s


@njit(cache=True, nogil=True)
def conditional_entropy_batch(psi, alphas, p_floor):
    """Average post-measurement entropy per rank-1 POVM candidate.

    psi: (m, a, b) amplitude tensor of a pure state, measured factor first,
    entropy target second. alphas: (n_cand, n_out, m) POVM vectors, element
    i of candidate c being |alphas[c,i]><alphas[c,i]|. Returns, per candidate,
    sum_i p_i * S(rho_i) where rho_i is the target-factor conditional state;
    outcomes with p_i <= p_floor are dropped.
    """
    n_cand, n_out, m = alphas.shape
    a = psi.shape[1]
    b = psi.shape[2]
    k = a if a <= b else b
    out = np.empty(n_cand)
    w_mat = np.empty((a, b), dtype=np.complex128)
    gram = np.empty((k, k), dtype=np.complex128)
    for cidx in range(n_cand):
        total = 0.0
        for i in range(n_out):
            for x in range(a):
                for y in range(b):
                    acc = 0.0 + 0.0j
                    for mm in range(m):
                        acc += alphas[cidx, i, mm].conjugate() * psi[mm, x, y]
                    w_mat[x, y] = acc
            p = 0.0
            for x in range(a):
                for y in range(b):
                    z = w_mat[x, y]
                    p += z.real * z.real + z.imag * z.imag
            if p <= p_floor:
                continue
            if a <= b:
                for x in range(a):
                    for z in range(x, a):
                        acc = 0.0 + 0.0j
                        for y in range(b):
                            acc += w_mat[x, y] * w_mat[z, y].conjugate()
                        gram[x, z] = acc
                        gram[z, x] = acc.conjugate()
            else:
                for y in range(b):
                    for z in range(y, b):
                        acc = 0.0 + 0.0j
                        for x in range(a):
                            acc += w_mat[x, y].conjugate() * w_mat[x, z]
                        gram[y, z] = acc
                        gram[z, y] = acc.conjugate()
            if k == 1:
                continue
            if k == 2:
                tr = gram[0, 0].real + gram[1, 1].real
                g01 = gram[0, 1]
                det = gram[0, 0].real * gram[1, 1].real - (g01.real * g01.real + g01.imag * g01.imag)
                disc = tr * tr - 4.0 * det
                if disc < 0.0:
                    disc = 0.0
                root = math.sqrt(disc)
                lam = np.empty(2)
                lam[0] = 0.5 * (tr + root)
                lam[1] = 0.5 * (tr - root)
                total += p * _entropy_of_scaled(lam, 2, p)
            else:
                lam = hermitian_eigvals(gram)
                total += p * _entropy_of_scaled(lam, k, p)
        out[cidx] = total
    return out
