"""Pure-numpy twins of the hot kernels in _kernels_numba.

Same call signatures and semantics; used when MARKOV_RECOVERY_BACKEND=numpy
or when numba is unavailable. Eigenproblems go through LAPACK here, the
batch kernel is fully vectorized.
"""

import numpy as np


def hermitian_eigh(h):
    """Eigenvalues (ascending) and orthonormal eigenvector columns of Hermitian h."""
    return np.linalg.eigh(h)


def hermitian_eigvals(h):
    """Eigenvalues (ascending) of Hermitian h."""
    return np.linalg.eigvalsh(h)


def conditional_entropy_batch(psi, alphas, p_floor):
    """Average post-measurement entropy per rank-1 POVM candidate.

    Same contract as the numba kernel: psi (m, a, b), alphas (n_cand, n_out, m),
    returns sum_i p_i * S(conditional state on the second factor) per candidate,
    dropping outcomes with p_i <= p_floor.
    """
    a, b = psi.shape[1], psi.shape[2]
    w = np.einsum("cim,mxy->cixy", alphas.conj(), psi)
    p = np.einsum("cixy,cixy->ci", w, w.conj()).real
    if a <= b:
        gram = np.einsum("cixy,cizy->cixz", w, w.conj())
    else:
        gram = np.einsum("cixy,cixz->ciyz", w.conj(), w)
    k = min(a, b)
    lam = np.linalg.eigvalsh(gram.reshape(-1, k, k)).reshape(p.shape + (k,))
    valid = p > p_floor
    safe_p = np.where(valid, p, 1.0)
    scaled = np.clip(lam / safe_p[:, :, None], 0.0, None)
    terms = np.where(scaled > 0.0, -scaled * np.log2(np.where(scaled > 0.0, scaled, 1.0)), 0.0)
    per_outcome = terms.sum(axis=2)
    return np.where(valid, p * per_outcome, 0.0).sum(axis=1)
