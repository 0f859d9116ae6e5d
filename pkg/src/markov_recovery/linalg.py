"""Dense complex linear algebra: Hermitian eigendecomposition, matrix
functions on the support, tensor products, partial traces, trace-norm
distance.

All functions are pure; matrices are plain complex ndarrays. Eigenvector
conventions are fixed so that identical input bits always produce identical
output bits: eigenvalues sorted descending, the first non-negligible
component of every eigenvector made real positive, exact eigenvalue ties
ordered lexicographically by vector components.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from math import prod
from typing import Callable, Iterable, Sequence

import numpy as np

from . import backend
from .errors import (
    DimensionMismatchError,
    EmptyKeepSetError,
    NegativeEigenvalueError,
    NotHermitianError,
    NotSquareError,
)

DEFAULT_HERMITICITY_TOL = 1e-9
DEFAULT_RANK_TOL = 1e-10

_PHASE_FLOOR = 1e-12


def as_complex_matrix(m: np.ndarray | Sequence) -> np.ndarray:
    """Coerce to a C-ordered complex128 2-d array and reject non-finite entries."""
    arr = np.ascontiguousarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatchError(f"expected a 2-d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise DimensionMismatchError("matrix contains non-finite entries")
    return arr


def hermiticity_violation(m: np.ndarray) -> float:
    """Largest entrywise deviation of m from its own adjoint."""
    return float(np.abs(m - m.conj().T).max())


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral data of a Hermitian matrix: eigenvalues sorted descending,
    eigenvectors as orthonormal columns in matching order."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _fix_phases(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    for col in range(v.shape[1]):
        column = v[:, col]
        idx = np.flatnonzero(np.abs(column) > _PHASE_FLOOR)
        if idx.size == 0:
            continue
        pivot = column[idx[0]]
        column *= pivot.conjugate() / abs(pivot)
        column[idx[0]] = abs(column[idx[0]])
    return v


def _order_ties(w: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # exact-equality runs only; round-off distinct eigenvalues keep sort order
    n = w.size
    start = 0
    order = np.arange(n)
    while start < n:
        stop = start + 1
        while stop < n and w[stop] == w[start]:
            stop += 1
        if stop - start > 1:
            block = list(range(start, stop))
            block.sort(key=lambda c: tuple((v[i, c].real, v[i, c].imag) for i in range(v.shape[0])))
            order[start:stop] = block
        start = stop
    return w[order], v[:, order]


def hermitian_eig(m: np.ndarray, hermiticity_tol: float = DEFAULT_HERMITICITY_TOL) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    The input is checked against hermiticity_tol (entrywise max deviation from
    the adjoint) and symmetrized to (m + m†)/2 before decomposition.
    """
    m = as_complex_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise NotSquareError(f"matrix is {m.shape[0]}x{m.shape[1]}")
    violation = hermiticity_violation(m)
    if violation > hermiticity_tol:
        raise NotHermitianError(f"hermiticity violation {violation:.3e} exceeds tol {hermiticity_tol:.3e}")
    h = np.ascontiguousarray((m + m.conj().T) / 2.0)
    w, v = backend.hermitian_eigh(h)
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    v = _fix_phases(v)
    w, v = _order_ties(w, v)
    return EigenDecomposition(eigenvalues=w, eigenvectors=v)


def hermitian_eigenvalues(m: np.ndarray, hermiticity_tol: float = DEFAULT_HERMITICITY_TOL) -> np.ndarray:
    """Eigenvalues only, sorted descending."""
    m = as_complex_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise NotSquareError(f"matrix is {m.shape[0]}x{m.shape[1]}")
    violation = hermiticity_violation(m)
    if violation > hermiticity_tol:
        raise NotHermitianError(f"hermiticity violation {violation:.3e} exceeds tol {hermiticity_tol:.3e}")
    h = np.ascontiguousarray((m + m.conj().T) / 2.0)
    return backend.hermitian_eigvals(h)[::-1].copy()


def matrix_func_on_support(
    m: np.ndarray,
    f: Callable[[float], float],
    rank_tol: float = DEFAULT_RANK_TOL,
    hermiticity_tol: float = DEFAULT_HERMITICITY_TOL,
) -> np.ndarray:
    """Apply the scalar function f to a PSD matrix on its support.

    Eigenvalues above rank_tol * lambda_max are mapped through f, everything at
    or below the cutoff is mapped to zero; eigenvalues below
    -rank_tol * lambda_max raise NegativeEigenvalueError.
    """
    eig = hermitian_eig(m, hermiticity_tol=hermiticity_tol)
    w, v = eig.eigenvalues, eig.eigenvectors
    lam_max = max(float(w[0]), 0.0)
    cutoff = rank_tol * lam_max
    if float(w[-1]) < -cutoff:
        raise NegativeEigenvalueError(
            f"eigenvalue {w[-1]:.3e} below -{cutoff:.3e}; matrix is not PSD at rank_tol {rank_tol:.1e}"
        )
    fw = np.array([float(f(float(x))) if x > cutoff else 0.0 for x in w])
    return (v * fw) @ v.conj().T


def support_rank(m: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of eigenvalues above rank_tol * lambda_max."""
    w = hermitian_eigenvalues(m)
    lam_max = max(float(w[0]), 0.0)
    return int(np.count_nonzero(w > rank_tol * lam_max))


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, row-major convention (left index major)."""
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every tensor factor not listed in keep.

    dims gives the factor dimensions in tensor order; kept factors stay in
    their original relative order.
    """
    m = as_complex_matrix(m)
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise DimensionMismatchError(f"factor dimensions must be positive, got {dims}")
    total = prod(dims)
    if m.shape != (total, total):
        raise DimensionMismatchError(f"matrix shape {m.shape} does not match dims {dims}")
    keep_list = sorted(set(int(k) for k in keep))
    if len(keep_list) == 0:
        raise EmptyKeepSetError("keep set is empty")
    if keep_list[0] < 0 or keep_list[-1] >= len(dims):
        raise DimensionMismatchError(f"keep indices {keep_list} out of range for {len(dims)} factors")
    n = len(dims)
    letters = string.ascii_lowercase
    row = list(letters[:n])
    col = [letters[n + i] if i in keep_list else letters[i] for i in range(n)]
    out = [letters[i] for i in keep_list] + [letters[n + i] for i in keep_list]
    subscripts = "".join(row) + "".join(col) + "->" + "".join(out)
    reshaped = m.reshape(dims + dims)
    dk = prod(dims[i] for i in keep_list)
    return np.ascontiguousarray(np.einsum(subscripts, reshaped).reshape(dk, dk))


def trace_norm_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of a - b for Hermitian operands."""
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shapes {a.shape} and {b.shape} differ")
    if a.shape[0] != a.shape[1]:
        raise NotSquareError(f"matrix is {a.shape[0]}x{a.shape[1]}")
    d = a - b
    d = np.ascontiguousarray((d + d.conj().T) / 2.0)
    w = backend.hermitian_eigvals(d)
    return float(0.5 * np.abs(w).sum())
