"""Hamiltonian-generated trajectory scan: does the evolution preserve the
pure-Markov structure, and do the reduced channels compose?

A time is flagged when the evolved RE-marginal stays a product (the
sufficient condition for a reduced channel to exist downstream of it; an
unflagged time means "not certified", not "proven non-Markovian").
Divisibility residuals are evaluated on consecutive grid triples whose two
left endpoints are flagged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg, qstate
from .channel import hermitian_operator_basis, reduced_channel_apply
from .errors import NotHermitianError, NotMarkovAtIntermediateTimeError
from .recovery import PetzMap

HAMILTONIAN_HERMITICITY_TOL = 1e-10
SCAN_TOL = 1e-7


@dataclass(frozen=True)
class Hamiltonian:
    """Hermitian generator on the QE factor (units of inverse time)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = linalg.as_complex_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise NotHermitianError(f"generator must be square, got {m.shape}")
        violation = linalg.hermiticity_violation(m)
        if violation > HAMILTONIAN_HERMITICITY_TOL:
            raise NotHermitianError(f"hermiticity violation {violation:.3e}")
        object.__setattr__(self, "matrix", np.ascontiguousarray((m + m.conj().T) / 2.0))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


class _Propagator:
    """Spectral exponentials exp(-iHt): unitary for every t by construction."""

    def __init__(self, h: Hamiltonian):
        eig = linalg.hermitian_eig(h.matrix, hermiticity_tol=HAMILTONIAN_HERMITICITY_TOL)
        self._w = eig.eigenvalues
        self._v = eig.eigenvectors

    def at(self, t: float) -> np.ndarray:
        phases = np.exp(-1j * self._w * t)
        return (self._v * phases) @ self._v.conj().T


def _as_state(state0: qstate.PureState | qstate.PureMarkovSpec) -> qstate.PureState:
    if isinstance(state0, qstate.PureMarkovSpec):
        return qstate.make_pure_markov(state0)
    return state0


def _check_grid(times: Sequence[float]) -> np.ndarray:
    grid = np.asarray(times, dtype=float).reshape(-1)
    if grid.size and (np.any(np.diff(grid) < 0) or grid[0] < 0):
        raise ValueError("time grid must be sorted and nonnegative")
    return grid


def _evolve(state: qstate.PureState, u: np.ndarray) -> qstate.PureState:
    d_r = state.layout.dims[0]
    flat = state.amplitudes.reshape(d_r, -1)
    return qstate.PureState(state.layout, (flat @ u.T).reshape(state.layout.dims))


def trajectory(
    state0: qstate.PureState | qstate.PureMarkovSpec,
    h: Hamiltonian | np.ndarray,
    times: Sequence[float],
) -> list[qstate.PureState]:
    """Pure states (I_R ⊗ exp(-iHt)) |psi(0)> along the grid."""
    if not isinstance(h, Hamiltonian):
        h = Hamiltonian(h)
    state = _as_state(state0)
    grid = _check_grid(times)
    prop = _Propagator(h)
    return [_evolve(state, prop.at(t)) for t in grid]


def product_residual(state_t: qstate.PureState) -> float:
    """Trace distance of the RE-marginal from the product of its parts."""
    rho_re = qstate.marginal(state_t, ("R", "E"))
    rho_r = qstate.marginal(state_t, "R")
    rho_e = qstate.marginal(state_t, "E")
    return linalg.trace_norm_distance(rho_re.matrix, linalg.tensor(rho_r.matrix, rho_e.matrix))


def _channel_pair(state_tau: qstate.PureState, u_step: np.ndarray):
    anchor = qstate.marginal(state_tau, ("Q", "E"))
    petz = PetzMap.from_state(anchor)
    return petz, u_step


def divisibility_check(
    state0: qstate.PureState | qstate.PureMarkovSpec,
    h: Hamiltonian | np.ndarray,
    tau: float,
    tau_prime: float,
    tau_double_prime: float,
    tol: float = SCAN_TOL,
) -> float:
    """Largest trace-distance violation of the composition law over a
    Hermitian basis of the channel's input support.

    Requires the Markov product condition at both tau and tau_prime; raises
    NotMarkovAtIntermediateTime otherwise (no CP extension is attempted)."""
    if not isinstance(h, Hamiltonian):
        h = Hamiltonian(h)
    if not (tau <= tau_prime <= tau_double_prime):
        raise ValueError("need tau <= tau_prime <= tau_double_prime")
    state = _as_state(state0)
    prop = _Propagator(h)
    state_tau = _evolve(state, prop.at(tau))
    state_tau_p = _evolve(state, prop.at(tau_prime))
    for label, st in (("tau", state_tau), ("tau_prime", state_tau_p)):
        res = product_residual(st)
        if res > tol:
            raise NotMarkovAtIntermediateTimeError(
                f"product residual {res:.3e} at {label} exceeds tol {tol:.1e}"
            )
    petz_tau, u_1 = _channel_pair(state_tau, prop.at(tau_prime - tau))
    petz_tau_p, u_2 = _channel_pair(state_tau_p, prop.at(tau_double_prime - tau_prime))
    u_13 = prop.at(tau_double_prime - tau)
    support_basis = linalg.hermitian_eig(petz_tau.support_projector_q).eigenvectors[
        :, : petz_tau.rho_q.rank()
    ]
    worst = 0.0
    for op in hermitian_operator_basis(support_basis):
        direct = reduced_channel_apply(petz_tau, u_13, op)
        step1 = reduced_channel_apply(petz_tau, u_1, op)
        composed = reduced_channel_apply(petz_tau_p, u_2, step1)
        worst = max(worst, linalg.trace_norm_distance(direct, composed))
    return worst


@dataclass(frozen=True)
class DivisibilityRecord:
    tau: float
    tau_prime: float
    tau_double_prime: float
    residual: float


@dataclass(frozen=True)
class ScanReport:
    times: np.ndarray
    product_residuals: np.ndarray
    markov_flags: np.ndarray
    divisibility: tuple[DivisibilityRecord, ...]
    tol: float

    def to_json_dict(self) -> dict:
        return {
            "tol": self.tol,
            "times": [float(t) for t in self.times],
            "product_residuals": [float(r) for r in self.product_residuals],
            "markov_flags": [bool(f) for f in self.markov_flags],
            "divisibility": [
                {
                    "tau": rec.tau,
                    "tau_prime": rec.tau_prime,
                    "tau_double_prime": rec.tau_double_prime,
                    "residual": rec.residual,
                }
                for rec in self.divisibility
            ],
        }

    def csv_rows(self) -> list[tuple]:
        return [
            (float(t), float(r), bool(f))
            for t, r, f in zip(self.times, self.product_residuals, self.markov_flags)
        ]


def scan(
    state0: qstate.PureState | qstate.PureMarkovSpec,
    h: Hamiltonian | np.ndarray,
    times: Sequence[float],
    tol: float = SCAN_TOL,
) -> ScanReport:
    """Per-time product residuals and flags, plus divisibility residuals for
    every consecutive triple whose first two times are flagged."""
    if not isinstance(h, Hamiltonian):
        h = Hamiltonian(h)
    grid = _check_grid(times)
    state = _as_state(state0)
    states = trajectory(state, h, grid)
    residuals = np.array([product_residual(st) for st in states])
    flags = residuals <= tol
    records = []
    for i in range(len(grid) - 2):
        if flags[i] and flags[i + 1]:
            res = divisibility_check(state, h, grid[i], grid[i + 1], grid[i + 2], tol)
            records.append(
                DivisibilityRecord(
                    tau=float(grid[i]),
                    tau_prime=float(grid[i + 1]),
                    tau_double_prime=float(grid[i + 2]),
                    residual=res,
                )
            )
    return ScanReport(
        times=grid,
        product_residuals=residuals,
        markov_flags=flags,
        divisibility=tuple(records),
        tol=tol,
    )
