"""Quantum states with subsystem layout: density matrices, pure states,
purifications, and the canonical pure Markov construction.

A pure Markov state is assembled from two strictly positive spectra
(kappa for the reference R, mu for the environment E) and three orthonormal
basis families; its amplitudes are sqrt(kappa_j mu_k) on |r_j> ⊗ |q_jk> ⊗ |e_k>,
which makes the RE-marginal an exact product and the Q-marginal diagonal in
the q_jk family with eigenvalues kappa_j mu_k.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .errors import (
    BadLayoutError,
    InvalidStateError,
    ReferenceTooSmallError,
    SpecInvalidError,
    UnknownLabelError,
)

ALLOWED_LABELS = ("R", "Q", "E", "X")

DENSITY_HERMITICITY_TOL = 1e-9
DENSITY_EIGENVALUE_TOL = 1e-9
DENSITY_TRACE_TOL = 1e-9
PURE_NORM_TOL = 1e-10
SPEC_PROBABILITY_TOL = 1e-12
SPEC_ORTHONORMALITY_TOL = 1e-12


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SystemLayout:
    """Ordered subsystem dimensions with unique labels from {R, Q, E, X}."""

    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        labels = tuple(str(x) for x in self.labels)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)
        if len(dims) != len(labels):
            raise BadLayoutError(f"{len(dims)} dims vs {len(labels)} labels")
        if any(d < 1 for d in dims):
            raise BadLayoutError(f"dims must be positive, got {dims}")
        if len(set(labels)) != len(labels):
            raise BadLayoutError(f"labels must be unique, got {labels}")
        for lab in labels:
            if lab not in ALLOWED_LABELS:
                raise BadLayoutError(f"label {lab!r} not in {ALLOWED_LABELS}")

    @property
    def total_dim(self) -> int:
        return prod(self.dims)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabelError(f"label {label!r} not in layout {self.labels}") from None

    def dim_of(self, label: str) -> int:
        return self.dims[self.index_of(label)]

    def sublayout(self, keep_positions: Sequence[int]) -> "SystemLayout":
        return SystemLayout(
            dims=tuple(self.dims[i] for i in keep_positions),
            labels=tuple(self.labels[i] for i in keep_positions),
        )


@dataclass(frozen=True)
class DensityMatrix:
    """Labeled multipartite density operator. Construction validates
    hermiticity, positivity and unit trace."""

    layout: SystemLayout
    matrix: np.ndarray

    def __post_init__(self):
        m = linalg.as_complex_matrix(self.matrix)
        d = self.layout.total_dim
        if m.shape != (d, d):
            raise InvalidStateError(f"matrix shape {m.shape} does not match layout dim {d}")
        violation = linalg.hermiticity_violation(m)
        if violation > DENSITY_HERMITICITY_TOL:
            raise InvalidStateError(f"hermiticity violation {violation:.3e}")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > DENSITY_TRACE_TOL:
            raise InvalidStateError(f"trace {tr} is not 1")
        w = linalg.hermitian_eigenvalues((m + m.conj().T) / 2.0, hermiticity_tol=np.inf)
        if float(w[-1]) < -DENSITY_EIGENVALUE_TOL:
            raise InvalidStateError(f"negative eigenvalue {w[-1]:.3e}")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def eigenvalues(self) -> np.ndarray:
        return linalg.hermitian_eigenvalues(self.matrix)

    def rank(self, rank_tol: float = linalg.DEFAULT_RANK_TOL) -> int:
        return linalg.support_rank(self.matrix, rank_tol)


@dataclass(frozen=True)
class PureState:
    """Pure multipartite state; amplitudes stored as a tensor with one axis
    per subsystem."""

    layout: SystemLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != self.layout.dims:
            raise InvalidStateError(f"amplitude shape {amps.shape} does not match dims {self.layout.dims}")
        if not np.all(np.isfinite(amps.view(np.float64))):
            raise InvalidStateError("non-finite amplitudes")
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > PURE_NORM_TOL:
            raise InvalidStateError(f"squared norm {norm_sq} is not 1")
        object.__setattr__(self, "amplitudes", _freeze(amps))

    @property
    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def to_density(self) -> DensityMatrix:
        v = self.vector
        return DensityMatrix(self.layout, np.outer(v, v.conj()))


@dataclass(frozen=True)
class PureMarkovSpec:
    """Spectra and bases defining a canonical pure Markov state.

    kappa, mu: strictly positive probability vectors for R and E.
    r_basis (d_R x n_r), e_basis (d_E x n_e): orthonormal columns.
    q_basis (d_Q x n_r*n_e): orthonormal columns indexed by the pair (j, k)
    at column j*n_e + k; d_Q may exceed n_r*n_e (padded dimensions stay
    unpopulated).
    """

    kappa: np.ndarray
    mu: np.ndarray
    r_basis: np.ndarray
    q_basis: np.ndarray
    e_basis: np.ndarray

    def __post_init__(self):
        kappa = np.asarray(self.kappa, dtype=float).reshape(-1)
        mu = np.asarray(self.mu, dtype=float).reshape(-1)
        for name, p in (("kappa", kappa), ("mu", mu)):
            if p.size == 0:
                raise SpecInvalidError(f"{name} is empty")
            if np.any(p <= 0.0):
                raise SpecInvalidError(f"{name} entries must be strictly positive, got {p.tolist()}")
            if abs(p.sum() - 1.0) > SPEC_PROBABILITY_TOL:
                raise SpecInvalidError(f"{name} sums to {p.sum()!r}, not 1")
        r = linalg.as_complex_matrix(self.r_basis)
        q = linalg.as_complex_matrix(self.q_basis)
        e = linalg.as_complex_matrix(self.e_basis)
        n_r, n_e = kappa.size, mu.size
        if r.shape[1] != n_r:
            raise SpecInvalidError(f"r_basis has {r.shape[1]} columns, kappa has {n_r} entries")
        if e.shape[1] != n_e:
            raise SpecInvalidError(f"e_basis has {e.shape[1]} columns, mu has {n_e} entries")
        if q.shape[1] != n_r * n_e:
            raise SpecInvalidError(f"q_basis has {q.shape[1]} columns, need {n_r * n_e}")
        if q.shape[0] < n_r * n_e:
            raise SpecInvalidError(f"d_Q = {q.shape[0]} smaller than {n_r}*{n_e}")
        for name, b in (("r_basis", r), ("q_basis", q), ("e_basis", e)):
            gram = b.conj().T @ b
            dev = float(np.abs(gram - np.eye(b.shape[1])).max())
            if dev > SPEC_ORTHONORMALITY_TOL:
                raise SpecInvalidError(f"{name} orthonormality violation {dev:.3e}")
        object.__setattr__(self, "kappa", _freeze(kappa))
        object.__setattr__(self, "mu", _freeze(mu))
        object.__setattr__(self, "r_basis", _freeze(r))
        object.__setattr__(self, "q_basis", _freeze(q))
        object.__setattr__(self, "e_basis", _freeze(e))

    @property
    def n_r(self) -> int:
        return self.kappa.size

    @property
    def n_e(self) -> int:
        return self.mu.size

    @property
    def d_r(self) -> int:
        return self.r_basis.shape[0]

    @property
    def d_q(self) -> int:
        return self.q_basis.shape[0]

    @property
    def d_e(self) -> int:
        return self.e_basis.shape[0]

    def q_column(self, j: int, k: int) -> np.ndarray:
        return self.q_basis[:, j * self.n_e + k]

    def psi_qe_matrix(self) -> np.ndarray:
        """Columns are the orthonormal QE vectors sum_k sqrt(mu_k) |q_jk> ⊗ |e_k>."""
        qb = self.q_basis.reshape(self.d_q, self.n_r, self.n_e)
        out = np.einsum("k,qjk,ek->qej", np.sqrt(self.mu), qb, self.e_basis)
        return out.reshape(self.d_q * self.d_e, self.n_r)

    def rho_q_matrix(self) -> np.ndarray:
        weights = np.kron(self.kappa, self.mu)
        return (self.q_basis * weights) @ self.q_basis.conj().T

    def rho_qe_matrix(self) -> np.ndarray:
        psi = self.psi_qe_matrix()
        return (psi * self.kappa) @ psi.conj().T

    def rho_r_matrix(self) -> np.ndarray:
        return (self.r_basis * self.kappa) @ self.r_basis.conj().T

    def rho_e_matrix(self) -> np.ndarray:
        return (self.e_basis * self.mu) @ self.e_basis.conj().T

    @classmethod
    def standard(
        cls,
        kappa: Sequence[float],
        mu: Sequence[float],
        d_r: int | None = None,
        d_q: int | None = None,
        d_e: int | None = None,
    ) -> "PureMarkovSpec":
        """Spec with computational bases; dims default to the minimal ones."""
        kappa = np.asarray(kappa, dtype=float).reshape(-1)
        mu = np.asarray(mu, dtype=float).reshape(-1)
        n_r, n_e = kappa.size, mu.size
        d_r = n_r if d_r is None else int(d_r)
        d_e = n_e if d_e is None else int(d_e)
        d_q = n_r * n_e if d_q is None else int(d_q)
        eye = np.eye(max(d_r, d_q, d_e, 1), dtype=np.complex128)
        return cls(
            kappa=kappa,
            mu=mu,
            r_basis=eye[:d_r, :n_r],
            q_basis=eye[:d_q, : n_r * n_e],
            e_basis=eye[:d_e, :n_e],
        )


def make_pure_markov(spec: PureMarkovSpec) -> PureState:
    """Canonical pure Markov state on (R, Q, E) from the given spec."""
    qb = spec.q_basis.reshape(spec.d_q, spec.n_r, spec.n_e)
    amps = np.einsum(
        "j,k,rj,qjk,ek->rqe",
        np.sqrt(spec.kappa),
        np.sqrt(spec.mu),
        spec.r_basis,
        qb,
        spec.e_basis,
    )
    layout = SystemLayout(dims=(spec.d_r, spec.d_q, spec.d_e), labels=("R", "Q", "E"))
    return PureState(layout, amps)


def marginal(state: PureState | DensityMatrix, keep: Iterable[str] | str) -> DensityMatrix:
    """Reduced density matrix on the kept labels (original factor order)."""
    keep_labels = [keep] if isinstance(keep, str) else list(keep)
    if len(keep_labels) == 0:
        raise UnknownLabelError("keep set is empty")
    layout = state.layout
    positions = sorted(layout.index_of(lab) for lab in keep_labels)
    if len(set(positions)) != len(positions):
        raise UnknownLabelError(f"duplicate labels in {keep_labels}")
    sub = layout.sublayout(positions)
    if isinstance(state, PureState):
        rest = [i for i in range(len(layout.dims)) if i not in positions]
        perm = positions + rest
        dk = prod(layout.dims[i] for i in positions)
        w = state.amplitudes.transpose(perm).reshape(dk, -1)
        return DensityMatrix(sub, w @ w.conj().T)
    mat = linalg.partial_trace(state.matrix, layout.dims, positions)
    return DensityMatrix(sub, mat)


@dataclass(frozen=True)
class RankReport:
    rank_r: int
    rank_q: int
    rank_e: int
    product_holds: bool


def rank_report(state: PureState, rank_tol: float = linalg.DEFAULT_RANK_TOL) -> RankReport:
    """Ranks of the one-party marginals and the rank-product flag."""
    if set(state.layout.labels) != {"R", "Q", "E"}:
        raise BadLayoutError(f"need labels R, Q, E, got {state.layout.labels}")
    ranks = {lab: marginal(state, lab).rank(rank_tol) for lab in ("R", "Q", "E")}
    return RankReport(
        rank_r=ranks["R"],
        rank_q=ranks["Q"],
        rank_e=ranks["E"],
        product_holds=(ranks["Q"] == ranks["R"] * ranks["E"]),
    )


def purify(
    rho: DensityMatrix,
    reference_label: str,
    reference_dim: int | None = None,
    rank_tol: float = linalg.DEFAULT_RANK_TOL,
) -> PureState:
    """Purification of rho with the reference factor appended last.

    The reference basis is the computational one ordered by descending
    eigenvalue; amplitudes are all real nonnegative. reference_dim defaults
    to rank(rho) and must not be smaller.
    """
    if reference_label in rho.layout.labels:
        raise BadLayoutError(f"reference label {reference_label!r} already in layout")
    eig = linalg.hermitian_eig(rho.matrix)
    w, v = eig.eigenvalues, eig.eigenvectors
    cutoff = rank_tol * max(float(w[0]), 0.0)
    rank = int(np.count_nonzero(w > cutoff))
    if reference_dim is None:
        reference_dim = rank
    reference_dim = int(reference_dim)
    if reference_dim < rank:
        raise ReferenceTooSmallError(f"reference dim {reference_dim} < rank {rank}")
    mat = np.zeros((rho.dim, reference_dim), dtype=np.complex128)
    mat[:, :rank] = v[:, :rank] * np.sqrt(np.clip(w[:rank], 0.0, None))
    layout = SystemLayout(
        dims=rho.layout.dims + (reference_dim,),
        labels=rho.layout.labels + (reference_label,),
    )
    return PureState(layout, mat.reshape(layout.dims))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_unitary(dim: int, seed) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix with the
    R-diagonal phase fix. Deterministic per seed."""
    rng = _as_rng(seed)
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return np.ascontiguousarray(q * (d / np.abs(d)))


def random_state(layout: SystemLayout, seed) -> PureState:
    """Haar-random pure state on the given layout. Deterministic per seed."""
    rng = _as_rng(seed)
    dim = layout.total_dim
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    v /= np.linalg.norm(v)
    return PureState(layout, v.reshape(layout.dims))


def random_markov_spec(
    seed,
    n_r: int = 2,
    n_e: int = 2,
    d_r: int | None = None,
    d_q: int | None = None,
    d_e: int | None = None,
) -> PureMarkovSpec:
    """Random spec: Dirichlet-like strictly positive spectra, Haar bases."""
    rng = _as_rng(seed)
    d_r = n_r if d_r is None else int(d_r)
    d_e = n_e if d_e is None else int(d_e)
    d_q = n_r * n_e if d_q is None else int(d_q)
    kappa = rng.uniform(0.2, 1.0, size=n_r)
    kappa /= kappa.sum()
    mu = rng.uniform(0.2, 1.0, size=n_e)
    mu /= mu.sum()
    return PureMarkovSpec(
        kappa=kappa,
        mu=mu,
        r_basis=random_unitary(d_r, rng)[:, :n_r],
        q_basis=random_unitary(d_q, rng)[:, : n_r * n_e],
        e_basis=random_unitary(d_e, rng)[:, :n_e],
    )


def markov_spec_from_state(
    state: PureState,
    tol: float = 1e-7,
    rank_tol: float = linalg.DEFAULT_RANK_TOL,
) -> PureMarkovSpec:
    """Recover the canonical spec of a pure Markov state.

    Raises SpecInvalidError when the RE-marginal is not a product within tol
    (the state is then not Markov and no spec exists).
    """
    if state.layout.labels != ("R", "Q", "E"):
        raise BadLayoutError(f"need layout (R, Q, E), got {state.layout.labels}")
    rho_r = marginal(state, "R")
    rho_e = marginal(state, "E")
    rho_re = marginal(state, ("R", "E"))
    residual = linalg.trace_norm_distance(rho_re.matrix, linalg.tensor(rho_r.matrix, rho_e.matrix))
    if residual > tol:
        raise SpecInvalidError(f"RE-marginal product residual {residual:.3e} exceeds tol {tol:.1e}")
    eig_r = linalg.hermitian_eig(rho_r.matrix)
    eig_e = linalg.hermitian_eig(rho_e.matrix)
    n_r = int(np.count_nonzero(eig_r.eigenvalues > rank_tol * eig_r.eigenvalues[0]))
    n_e = int(np.count_nonzero(eig_e.eigenvalues > rank_tol * eig_e.eigenvalues[0]))
    kappa = eig_r.eigenvalues[:n_r]
    mu = eig_e.eigenvalues[:n_e]
    r_basis = eig_r.eigenvectors[:, :n_r]
    e_basis = eig_e.eigenvectors[:, :n_e]
    d_q = state.layout.dim_of("Q")
    q_cols = np.empty((d_q, n_r * n_e), dtype=np.complex128)
    for j in range(n_r):
        for k in range(n_e):
            vec = np.einsum("rqe,r,e->q", state.amplitudes, r_basis[:, j].conj(), e_basis[:, k].conj())
            vec = vec / np.sqrt(kappa[j] * mu[k])
            nrm = np.linalg.norm(vec)
            if abs(nrm - 1.0) > 1e-6:
                raise SpecInvalidError(f"q vector ({j},{k}) has norm {nrm}; state is not canonical Markov")
            q_cols[:, j * n_e + k] = vec / nrm
    return PureMarkovSpec(
        kappa=kappa / kappa.sum(),
        mu=mu / mu.sum(),
        r_basis=r_basis,
        q_basis=q_cols,
        e_basis=e_basis,
    )
