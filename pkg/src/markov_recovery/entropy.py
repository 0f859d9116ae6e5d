"""Von Neumann entropy and derived information measures, in bits.

Includes mutual information, the tripartite conditional mutual information
S(R;E|Q) = S(RQ) + S(QE) - S(RQE) - S(Q), the Markov-state test, and a full
entropy report. Eigenvalues in [-1e-9, 0] are treated as round-off zeros;
anything below that window is a genuinely invalid state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg, qstate
from .errors import BadLayoutError, BadPartitionError, InvalidStateError

EIGENVALUE_CLAMP = 1e-9
MARKOV_TOL = 1e-7
_PURITY_TOL = 1e-9


def _entropy_from_eigenvalues(w: np.ndarray) -> float:
    if float(w.min()) < -EIGENVALUE_CLAMP:
        raise InvalidStateError(f"eigenvalue {w.min():.3e} below -{EIGENVALUE_CLAMP:.0e}")
    w = np.clip(w, 0.0, None)
    nz = w[w > 0.0]
    return float(-(nz * np.log2(nz)).sum())


def von_neumann_entropy(rho: qstate.DensityMatrix | np.ndarray) -> float:
    """S(rho) = -Tr rho log2 rho in bits, with 0*log 0 := 0."""
    mat = rho.matrix if isinstance(rho, qstate.DensityMatrix) else linalg.as_complex_matrix(rho)
    sym = (mat + mat.conj().T) / 2.0
    w = linalg.hermitian_eigenvalues(sym, hermiticity_tol=np.inf)
    return _entropy_from_eigenvalues(w)


def _is_pure(state: qstate.PureState | qstate.DensityMatrix) -> bool:
    if isinstance(state, qstate.PureState):
        return True
    return state.purity() >= 1.0 - _PURITY_TOL


def _marginal_entropy(state, labels) -> float:
    return von_neumann_entropy(qstate.marginal(state, labels))


def mutual_information(
    rho: qstate.DensityMatrix | qstate.PureState,
    partition: tuple[str, str] | None = None,
) -> float:
    """S(X) + S(Y) - S(XY) for a bipartite state."""
    labels = rho.layout.labels
    if len(labels) != 2:
        raise BadPartitionError(f"need a bipartite layout, got {labels}")
    if partition is None:
        x, y = labels
    else:
        x, y = partition
        if {x, y} != set(labels):
            raise BadPartitionError(f"partition {partition} does not match layout {labels}")
    joint = rho.to_density() if isinstance(rho, qstate.PureState) else rho
    return _marginal_entropy(rho, x) + _marginal_entropy(rho, y) - von_neumann_entropy(joint)


def _require_tripartite(state) -> None:
    if set(state.layout.labels) != {"R", "Q", "E"}:
        raise BadLayoutError(f"need labels R, Q, E, got {state.layout.labels}")


def conditional_mutual_information(state: qstate.DensityMatrix | qstate.PureState) -> float:
    """S(R;E|Q) in bits; nonnegative for every physical state."""
    _require_tripartite(state)
    joint = state.to_density() if isinstance(state, qstate.PureState) else state
    s_rq = _marginal_entropy(state, ("R", "Q"))
    s_qe = _marginal_entropy(state, ("Q", "E"))
    s_q = _marginal_entropy(state, "Q")
    s_rqe = von_neumann_entropy(joint)
    return s_rq + s_qe - s_rqe - s_q


@dataclass(frozen=True)
class MarkovCheck:
    is_markov: bool
    cmi: float
    tol: float
    product_residual: float | None

    def to_json_dict(self) -> dict:
        return {
            "is_markov": self.is_markov,
            "cmi": self.cmi,
            "tol": self.tol,
            "product_residual": self.product_residual,
        }


def is_markov_state(
    state: qstate.DensityMatrix | qstate.PureState,
    tol: float = MARKOV_TOL,
) -> MarkovCheck:
    """Markov test: CMI against tol; for pure inputs the RE product
    criterion is cross-checked and both residuals reported."""
    _require_tripartite(state)
    cmi = conditional_mutual_information(state)
    product_residual = None
    if _is_pure(state):
        rho_re = qstate.marginal(state, ("R", "E"))
        rho_r = qstate.marginal(state, "R")
        rho_e = qstate.marginal(state, "E")
        product_residual = linalg.trace_norm_distance(
            rho_re.matrix, linalg.tensor(rho_r.matrix, rho_e.matrix)
        )
    return MarkovCheck(is_markov=bool(cmi <= tol), cmi=cmi, tol=tol, product_residual=product_residual)


@dataclass(frozen=True)
class EntropyReport:
    S_R: float
    S_Q: float
    S_E: float
    S_RQ: float
    S_QE: float
    S_RE: float
    S_RQE: float
    mutual_RQ: float
    mutual_QE: float
    mutual_RE: float
    cmi_RE_given_Q: float
    identity_residuals: dict | None = field(default=None)

    def to_json_dict(self) -> dict:
        out = {
            "S_R": self.S_R,
            "S_Q": self.S_Q,
            "S_E": self.S_E,
            "S_RQ": self.S_RQ,
            "S_QE": self.S_QE,
            "S_RE": self.S_RE,
            "S_RQE": self.S_RQE,
            "mutual_RQ": self.mutual_RQ,
            "mutual_QE": self.mutual_QE,
            "mutual_RE": self.mutual_RE,
            "cmi_RE_given_Q": self.cmi_RE_given_Q,
        }
        if self.identity_residuals is not None:
            out["identity_residuals"] = dict(self.identity_residuals)
        return out


def entropy_report(state: qstate.DensityMatrix | qstate.PureState) -> EntropyReport:
    """All single-, two- and three-party entropies plus mutual informations.

    For pure inputs the report also carries the residuals of the bipartite
    split identities (S(R)=S(QE) etc.) and of the arithmetic-mean identities
    S(X) = [S(X;Y) + S(X;Z)] / 2.
    """
    _require_tripartite(state)
    joint = state.to_density() if isinstance(state, qstate.PureState) else state
    s = {lab: _marginal_entropy(state, lab) for lab in ("R", "Q", "E")}
    s2 = {pair: _marginal_entropy(state, pair) for pair in (("R", "Q"), ("Q", "E"), ("R", "E"))}
    s_rqe = von_neumann_entropy(joint)
    mutual_rq = s["R"] + s["Q"] - s2[("R", "Q")]
    mutual_qe = s["Q"] + s["E"] - s2[("Q", "E")]
    mutual_re = s["R"] + s["E"] - s2[("R", "E")]
    cmi = s2[("R", "Q")] + s2[("Q", "E")] - s_rqe - s["Q"]
    residuals = None
    if _is_pure(state):
        residuals = {
            "split_R_vs_QE": s["R"] - s2[("Q", "E")],
            "split_E_vs_RQ": s["E"] - s2[("R", "Q")],
            "split_Q_vs_RE": s["Q"] - s2[("R", "E")],
            "mean_R": s["R"] - 0.5 * (mutual_rq + mutual_re),
            "mean_Q": s["Q"] - 0.5 * (mutual_rq + mutual_qe),
            "mean_E": s["E"] - 0.5 * (mutual_re + mutual_qe),
        }
    return EntropyReport(
        S_R=s["R"],
        S_Q=s["Q"],
        S_E=s["E"],
        S_RQ=s2[("R", "Q")],
        S_QE=s2[("Q", "E")],
        S_RE=s2[("R", "E")],
        S_RQE=s_rqe,
        mutual_RQ=mutual_rq,
        mutual_QE=mutual_qe,
        mutual_RE=mutual_re,
        cmi_RE_given_Q=cmi,
        identity_residuals=residuals,
    )
