"""Reduced-dynamics channel of an open system whose joint state with the
environment is the marginal of a pure Markov state.

The channel is the composition trace-out-E ∘ conjugate-by-U ∘ recovery-map.
Kraus operators come in two algebraically equivalent forms (one through the
anchor square roots, one through the orthonormal QE vectors of the spec);
both are built and their agreement recorded. CPTP holds on the support of
rho_Q, which is where the Choi matrix is assembled.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np

from . import linalg, qstate
from .errors import DimensionMismatchError, NotUnitaryError, SpecInvalidError
from .recovery import PetzMap

UNITARITY_TOL = 1e-10
CP_EIG_TOL = 1e-9
TP_RESIDUAL_TOL = 1e-9


def _check_unitary(u: np.ndarray, dim: int) -> np.ndarray:
    u = linalg.as_complex_matrix(u)
    if u.shape != (dim, dim):
        raise DimensionMismatchError(f"unitary shape {u.shape}, expected {(dim, dim)}")
    dev = float(np.abs(u.conj().T @ u - np.eye(dim)).max())
    if dev > UNITARITY_TOL:
        raise NotUnitaryError(f"unitarity violation {dev:.3e}")
    return u


def evolve_tripartite(state: qstate.PureState, u: np.ndarray) -> qstate.PureState:
    """Apply I_R ⊗ U to a pure (R, Q, E) state."""
    if state.layout.labels != ("R", "Q", "E"):
        raise DimensionMismatchError(f"need layout (R, Q, E), got {state.layout.labels}")
    d_r, d_q, d_e = state.layout.dims
    u = _check_unitary(u, d_q * d_e)
    flat = state.amplitudes.reshape(d_r, d_q * d_e)
    return qstate.PureState(state.layout, (flat @ u.T).reshape(state.layout.dims))


def reduced_channel_apply(petz: PetzMap, u: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Tr_E[ U R(X) U† ]: the reduced channel as a map composition."""
    u = _check_unitary(u, petz.d_q * petz.d_e)
    recovered = petz.apply(x, check_support=False)
    evolved = u @ recovered @ u.conj().T
    return linalg.partial_trace(evolved, (petz.d_q, petz.d_e), {0})


def complete_environment_basis(
    e_basis: np.ndarray,
    d_e: int,
    extra: np.ndarray | None = None,
    tol: float = 1e-7,
) -> np.ndarray:
    """Extend orthonormal columns to a full basis of the environment.

    Default completion: Gram-Schmidt of the standard basis vectors against the
    given columns, in index order. A custom block of completing columns can be
    injected (it must be orthonormal and orthogonal to the initial set)."""
    cols = [e_basis[:, i] for i in range(e_basis.shape[1])]
    if extra is not None:
        extra = linalg.as_complex_matrix(extra)
        if extra.shape[0] != d_e or extra.shape[1] != d_e - len(cols):
            raise DimensionMismatchError(
                f"completion block shape {extra.shape}, expected {(d_e, d_e - len(cols))}"
            )
        candidate = np.column_stack(cols + [extra[:, i] for i in range(extra.shape[1])])
        dev = float(np.abs(candidate.conj().T @ candidate - np.eye(d_e)).max())
        if dev > tol:
            raise SpecInvalidError(f"injected completion not orthonormal, violation {dev:.3e}")
        return candidate
    for i in range(d_e):
        if len(cols) == d_e:
            break
        v = np.zeros(d_e, dtype=np.complex128)
        v[i] = 1.0
        for c in cols:
            v = v - c * np.vdot(c, v)
        nrm = np.linalg.norm(v)
        if nrm > 0.5:
            cols.append(v / nrm)
    if len(cols) != d_e:
        # unreachable for orthonormal input; re-run with a finer sweep
        for i in range(d_e):
            if len(cols) == d_e:
                break
            v = np.zeros(d_e, dtype=np.complex128)
            v[i] = 1.0
            for c in cols:
                v = v - c * np.vdot(c, v)
            nrm = np.linalg.norm(v)
            if nrm > 1e-7:
                cols.append(v / nrm)
    return np.column_stack(cols)


@dataclass(frozen=True)
class QuantumChannel:
    """Kraus set on Q with its support projector and support basis.

    kraus[k, l] pairs are flattened row-major: the first index runs over the
    full completed environment basis, the second over the initial environment
    eigenvectors only."""

    kraus: tuple[np.ndarray, ...]
    support_projector: np.ndarray
    support_basis: np.ndarray
    kraus_form_residual: float | None = None

    @property
    def d_q(self) -> int:
        return self.support_projector.shape[0]

    @property
    def support_dim(self) -> int:
        return self.support_basis.shape[1]

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = linalg.as_complex_matrix(x)
        out = np.zeros((self.d_q, self.d_q), dtype=np.complex128)
        for e in self.kraus:
            out += e @ x @ e.conj().T
        return out

    def completeness_residual(self) -> float:
        acc = np.zeros((self.d_q, self.d_q), dtype=np.complex128)
        for e in self.kraus:
            acc += e.conj().T @ e
        return float(np.abs(acc - self.support_projector).max())

    @cached_property
    def choi(self) -> np.ndarray:
        return choi_matrix(self.apply, self.support_basis)


def choi_matrix(apply_fn: Callable[[np.ndarray], np.ndarray], basis: np.ndarray) -> np.ndarray:
    """Choi matrix of a linear map over the given orthonormal input basis.

    Block (a, b) is the image of |basis_a><basis_b|; PSD iff the map is
    completely positive on the spanned subspace."""
    basis = linalg.as_complex_matrix(basis)
    d_in = basis.shape[1]
    probe = apply_fn(np.outer(basis[:, 0], basis[:, 0].conj()))
    d_out = probe.shape[0]
    out = np.empty((d_in, d_out, d_in, d_out), dtype=np.complex128)
    for a in range(d_in):
        for b in range(d_in):
            if a == 0 and b == 0:
                block = probe
            else:
                block = apply_fn(np.outer(basis[:, a], basis[:, b].conj()))
            out[a, :, b, :] = block
    return out.reshape(d_in * d_out, d_in * d_out)


def kraus_operators(
    spec: qstate.PureMarkovSpec,
    u: np.ndarray,
    e_completion: np.ndarray | None = None,
) -> QuantumChannel:
    """Kraus representation of the reduced channel for a pure Markov spec.

    Operators are <e_k| U sqrt(rho_QE) |e_l> invsqrt(rho_Q), k over the
    completed environment basis, l over the initial eigenvectors. The
    equivalent form through the orthonormal QE vectors is computed
    independently; the largest entrywise deviation between the two is stored
    as kraus_form_residual."""
    d_q, d_e = spec.d_q, spec.d_e
    u = _check_unitary(u, d_q * d_e)
    rho_qe = spec.rho_qe_matrix()
    rho_q = spec.rho_q_matrix()
    sqrt_qe = linalg.matrix_func_on_support(rho_qe, np.sqrt)
    invsqrt_q = linalg.matrix_func_on_support(rho_q, lambda x: x ** -0.5)
    projector = linalg.matrix_func_on_support(rho_q, lambda x: 1.0)

    e_full = complete_environment_basis(spec.e_basis, d_e, extra=e_completion)
    m = (u @ sqrt_qe).reshape(d_q, d_e, d_q, d_e)
    blocks = np.einsum("aebf,ek,fl->klab", m, e_full.conj(), spec.e_basis)
    kraus = tuple(
        np.ascontiguousarray(blocks[k, l] @ invsqrt_q)
        for k in range(d_e)
        for l in range(spec.n_e)
    )

    # independent form: sum_j (I ⊗ <e_k|) U psi_j <q_jl|
    psi = spec.psi_qe_matrix()
    upsi = (u @ psi).reshape(d_q, d_e, spec.n_r)
    u_kj = np.einsum("aej,ek->kja", upsi, e_full.conj())
    qb = spec.q_basis.reshape(d_q, spec.n_r, spec.n_e)
    alt = np.einsum("kja,qjl->klaq", u_kj, qb.conj())
    residual = 0.0
    idx = 0
    for k in range(d_e):
        for l in range(spec.n_e):
            residual = max(residual, float(np.abs(kraus[idx] - alt[k, l]).max()))
            idx += 1

    return QuantumChannel(
        kraus=kraus,
        support_projector=projector,
        support_basis=np.ascontiguousarray(spec.q_basis),
        kraus_form_residual=residual,
    )


class ChannelVerification(NamedTuple):
    choi: np.ndarray
    cp_flag: bool
    tp_flag: bool
    min_eigenvalue: float
    completeness_residual: float


def choi_and_verify(
    channel: QuantumChannel,
    cp_tol: float = CP_EIG_TOL,
    tp_tol: float = TP_RESIDUAL_TOL,
) -> ChannelVerification:
    """Choi matrix on the support basis plus CP/TP verdicts."""
    choi = channel.choi
    w = linalg.hermitian_eigenvalues((choi + choi.conj().T) / 2.0, hermiticity_tol=np.inf)
    min_eig = float(w[-1])
    completeness = channel.completeness_residual()
    return ChannelVerification(
        choi=choi,
        cp_flag=bool(min_eig >= -cp_tol),
        tp_flag=bool(completeness <= tp_tol),
        min_eigenvalue=min_eig,
        completeness_residual=completeness,
    )


@dataclass(frozen=True)
class HolevoDecomposition:
    """Pieces of the measure-and-prepare split of the channel."""

    holevo_states: tuple[qstate.DensityMatrix, ...]
    cross_terms: dict
    pi_operators: dict


def holevo_decompose(
    spec: qstate.PureMarkovSpec,
    u: np.ndarray,
    x: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, HolevoDecomposition]:
    """Split the channel action on x into the Holevo part and the traceless
    cross part.

    Holevo part: sum_i Tr(x Pi_i) sigma_i with sigma_i the evolved, E-traced
    projectors onto the orthonormal QE vectors; cross part: the same sum over
    i != j pairs, each term traceless. The two add up to the full channel
    action."""
    d_q, d_e = spec.d_q, spec.d_e
    u = _check_unitary(u, d_q * d_e)
    x = linalg.as_complex_matrix(x)
    if x.shape != (d_q, d_q):
        raise DimensionMismatchError(f"operator shape {x.shape}, expected {(d_q, d_q)}")
    n_r, n_e = spec.n_r, spec.n_e
    psi = spec.psi_qe_matrix()
    w = (u @ psi).reshape(d_q, d_e, n_r)
    qb = spec.q_basis.reshape(d_q, n_r, n_e)

    q_layout = qstate.SystemLayout((d_q,), ("Q",))
    holevo_states = []
    cross_terms: dict[tuple[int, int], np.ndarray] = {}
    pi_operators: dict[tuple[int, int], np.ndarray] = {}
    e_h = np.zeros((d_q, d_q), dtype=np.complex128)
    t = np.zeros((d_q, d_q), dtype=np.complex128)
    for i in range(n_r):
        for j in range(n_r):
            pi_ij = np.einsum("ql,pl->qp", qb[:, i, :], qb[:, j, :].conj())
            pi_operators[(i, j)] = pi_ij
            sigma_ij = np.einsum("ae,be->ab", w[:, :, j], w[:, :, i].conj())
            p_ij = complex(np.trace(x @ pi_ij))
            if i == j:
                holevo_states.append(qstate.DensityMatrix(q_layout, sigma_ij))
                e_h += p_ij * sigma_ij
            else:
                cross_terms[(i, j)] = sigma_ij
                t += p_ij * sigma_ij
    decomposition = HolevoDecomposition(
        holevo_states=tuple(holevo_states),
        cross_terms=cross_terms,
        pi_operators=pi_operators,
    )
    return e_h, t, decomposition


def hermitian_operator_basis(vectors: np.ndarray) -> list[np.ndarray]:
    """Orthogonal Hermitian basis of the operator space spanned by the given
    orthonormal columns: diagonal units plus symmetric/antisymmetric pairs."""
    vectors = linalg.as_complex_matrix(vectors)
    n = vectors.shape[1]
    ops = []
    for a in range(n):
        va = vectors[:, a]
        ops.append(np.outer(va, va.conj()))
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for a in range(n):
        for b in range(a + 1, n):
            va, vb = vectors[:, a], vectors[:, b]
            ab = np.outer(va, vb.conj())
            ba = np.outer(vb, va.conj())
            ops.append((ab + ba) * inv_sqrt2)
            ops.append((ab - ba) * (1j * inv_sqrt2))
    return ops


def matrix_unit_basis(vectors: np.ndarray) -> list[np.ndarray]:
    """Matrix units |v_a><v_b| over the given orthonormal columns."""
    vectors = linalg.as_complex_matrix(vectors)
    n = vectors.shape[1]
    return [
        np.outer(vectors[:, a], vectors[:, b].conj())
        for a in range(n)
        for b in range(n)
    ]
