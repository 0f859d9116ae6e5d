"""Recovery map anchored at a bipartite QE state.

R(X) = rho_QE^{1/2} (rho_Q^{-1/2} X rho_Q^{-1/2} ⊗ I_E) rho_QE^{1/2}
with the inverse square root taken on the support of rho_Q. Trace preserving
for operators on that support, trace-non-increasing elsewhere. Tripartite
reconstruction applies the map blockwise over the R index of an RQ state.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import linalg, qstate
from .errors import (
    BadLayoutError,
    DimensionMismatchError,
    MarginalMismatchError,
    OffSupportWarning,
)

MARGINAL_MATCH_TOL = 1e-8
_OFF_SUPPORT_REL_TOL = 1e-12


@dataclass(frozen=True)
class PetzMap:
    """Recovery map data: anchor state, its Q-marginal, precomputed square
    roots, and the support projector on Q."""

    rho_qe: qstate.DensityMatrix
    rho_q: qstate.DensityMatrix
    sqrt_rho_qe: np.ndarray
    invsqrt_rho_q: np.ndarray
    support_projector_q: np.ndarray
    rank_tol: float

    @classmethod
    def from_state(
        cls,
        rho_qe: qstate.DensityMatrix,
        rank_tol: float = linalg.DEFAULT_RANK_TOL,
    ) -> "PetzMap":
        if rho_qe.layout.labels != ("Q", "E"):
            raise BadLayoutError(f"anchor must have layout (Q, E), got {rho_qe.layout.labels}")
        rho_q = qstate.marginal(rho_qe, "Q")
        sqrt_qe = linalg.matrix_func_on_support(rho_qe.matrix, np.sqrt, rank_tol)
        invsqrt_q = linalg.matrix_func_on_support(rho_q.matrix, lambda x: x ** -0.5, rank_tol)
        projector = linalg.matrix_func_on_support(rho_q.matrix, lambda x: 1.0, rank_tol)
        return cls(
            rho_qe=rho_qe,
            rho_q=rho_q,
            sqrt_rho_qe=sqrt_qe,
            invsqrt_rho_q=invsqrt_q,
            support_projector_q=projector,
            rank_tol=rank_tol,
        )

    @property
    def d_q(self) -> int:
        return self.rho_q.dim

    @property
    def d_e(self) -> int:
        return self.rho_qe.layout.dim_of("E")

    def off_support_weight(self, x: np.ndarray) -> float:
        """Entrywise magnitude of the part of x outside supp(rho_Q)."""
        p = self.support_projector_q
        return float(np.abs(x - p @ x @ p).max())

    def apply(self, x: np.ndarray, check_support: bool = True) -> np.ndarray:
        """Recovered operator on QE. Components of x outside supp(rho_Q) are
        projected out; with check_support a warning flags that loss."""
        x = linalg.as_complex_matrix(x)
        if x.shape != (self.d_q, self.d_q):
            raise DimensionMismatchError(f"operator shape {x.shape}, expected {(self.d_q, self.d_q)}")
        if check_support:
            scale = max(float(np.abs(x).max()), 1.0)
            if self.off_support_weight(x) > _OFF_SUPPORT_REL_TOL * scale:
                warnings.warn(
                    "operator has weight outside the anchor support; it is projected out",
                    OffSupportWarning,
                    stacklevel=2,
                )
        core = self.invsqrt_rho_q @ x @ self.invsqrt_rho_q
        lifted = linalg.tensor(core, np.eye(self.d_e, dtype=np.complex128))
        return self.sqrt_rho_qe @ lifted @ self.sqrt_rho_qe


def petz_apply(petz: PetzMap, x: np.ndarray, check_support: bool = True) -> np.ndarray:
    """Functional form of PetzMap.apply."""
    return petz.apply(x, check_support=check_support)


def reconstruct_tripartite(rho_rq: qstate.DensityMatrix, petz: PetzMap) -> qstate.DensityMatrix:
    """Extend an RQ state to RQE by recovering the E factor blockwise.

    The Q-marginal of rho_rq must match the anchor's within 1e-8 trace
    distance; above that the map would silently mix mismatched states, so the
    call is rejected instead.
    """
    if rho_rq.layout.labels != ("R", "Q"):
        raise BadLayoutError(f"input must have layout (R, Q), got {rho_rq.layout.labels}")
    d_r = rho_rq.layout.dim_of("R")
    d_q = rho_rq.layout.dim_of("Q")
    if d_q != petz.d_q:
        raise DimensionMismatchError(f"Q dims differ: {d_q} vs {petz.d_q}")
    rho_q_in = qstate.marginal(rho_rq, "Q")
    mismatch = linalg.trace_norm_distance(rho_q_in.matrix, petz.rho_q.matrix)
    if mismatch > MARGINAL_MATCH_TOL:
        raise MarginalMismatchError(
            f"Q-marginal differs from anchor by {mismatch:.3e} (> {MARGINAL_MATCH_TOL:.0e})"
        )
    d_qe = petz.d_q * petz.d_e
    blocks = rho_rq.matrix.reshape(d_r, d_q, d_r, d_q)
    out = np.empty((d_r, d_qe, d_r, d_qe), dtype=np.complex128)
    for i in range(d_r):
        for j in range(d_r):
            out[i, :, j, :] = petz.apply(blocks[i, :, j, :], check_support=False)
    layout = qstate.SystemLayout(
        dims=(d_r, petz.d_q, petz.d_e),
        labels=("R", "Q", "E"),
    )
    return qstate.DensityMatrix(layout, out.reshape(d_r * d_qe, d_r * d_qe))


def recovery_residual(rho_qe: qstate.DensityMatrix, rank_tol: float = linalg.DEFAULT_RANK_TOL) -> float:
    """Trace distance between rho_QE and the recovery of its own Q-marginal.

    Zero by construction for any anchor; the discriminating Markov test is
    reconstruct_tripartite, which this residual accompanies in reports.
    """
    petz = PetzMap.from_state(rho_qe, rank_tol)
    recovered = petz.apply(petz.rho_q.matrix, check_support=False)
    return linalg.trace_norm_distance(recovered, rho_qe.matrix)
