"""POVM steering, entanglement of formation, classical correlations and
discord, plus the identity suite tying them to the environment entropy.

The optimizers search rank-1 POVMs only. For a qubit measured factor the
search space is the projective Bloch grid followed by local pattern search;
for larger factors it is Haar-random rank-1 frames (d and 2d elements) plus
stochastic refinement. Canonical candidates (computational basis and the
eigenbasis of the measured marginal) are always evaluated first, so exactly
attainable optima are hit exactly. Infimum problems return upper bounds,
supremum problems lower bounds; results say which.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import backend, entropy, linalg, qstate
from .errors import (
    BadLayoutError,
    InvalidStateError,
    OptimizerBudgetExceededError,
    POVMInvalidError,
)

PROBABILITY_FLOOR = 1e-12
POVM_PSD_TOL = 1e-10
POVM_COMPLETENESS_TOL = 1e-10
MEASURE_FLOOR = -1e-6

_THREADS_ENV = "MARKOV_RECOVERY_THREADS"
_REFINE_SHRINK = 0.5
_FRAME_REFINE_BATCH = 8
_FRAME_REFINE_STEP0 = 0.1


def _worker_count() -> int:
    raw = os.environ.get(_THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class POVM:
    """Positive elements summing to the identity on the measured factor."""

    elements: tuple[np.ndarray, ...]
    rank_one_flags: tuple[bool, ...] = field(default=())

    def __post_init__(self):
        if len(self.elements) == 0:
            raise POVMInvalidError("POVM has no elements")
        mats = tuple(linalg.as_complex_matrix(m) for m in self.elements)
        d = mats[0].shape[0]
        total = np.zeros((d, d), dtype=np.complex128)
        flags = []
        for m in mats:
            if m.shape != (d, d):
                raise POVMInvalidError(f"element shape {m.shape} differs from {(d, d)}")
            w = linalg.hermitian_eigenvalues((m + m.conj().T) / 2.0, hermiticity_tol=np.inf)
            if float(w[-1]) < -POVM_PSD_TOL:
                raise POVMInvalidError(f"element eigenvalue {w[-1]:.3e} below -{POVM_PSD_TOL:.0e}")
            lam_max = max(float(w[0]), 0.0)
            flags.append(bool(np.count_nonzero(w > POVM_PSD_TOL * max(lam_max, 1.0)) == 1))
            total += m
        dev = float(np.abs(total - np.eye(d)).max())
        if dev > POVM_COMPLETENESS_TOL:
            raise POVMInvalidError(f"elements sum off identity by {dev:.3e}")
        object.__setattr__(self, "elements", mats)
        object.__setattr__(self, "rank_one_flags", tuple(flags))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @classmethod
    def from_vectors(cls, vectors: np.ndarray) -> "POVM":
        """Rank-1 POVM |v_i><v_i| from rows of vectors (n_out, d)."""
        vectors = np.asarray(vectors, dtype=np.complex128)
        return cls(elements=tuple(np.outer(v, v.conj()) for v in vectors))


@dataclass(frozen=True)
class Ensemble:
    """Steering output: outcome probabilities and conditional states on the
    unmeasured factors; outcomes below the probability floor are dropped."""

    probs: np.ndarray
    states: tuple[qstate.DensityMatrix, ...]
    n_dropped: int

    def mixture(self) -> np.ndarray:
        out = np.zeros_like(self.states[0].matrix)
        for p, s in zip(self.probs, self.states):
            out = out + p * s.matrix
        return out


def steer(pure_state: qstate.PureState, povm: POVM, measured_label: str) -> Ensemble:
    """Measure the given factor of a pure state and collect the conditional
    states of everything else."""
    layout = pure_state.layout
    pos = layout.index_of(measured_label)
    d_m = layout.dims[pos]
    if povm.dim != d_m:
        raise POVMInvalidError(f"POVM dim {povm.dim} does not match factor dim {d_m}")
    rest = [i for i in range(len(layout.dims)) if i != pos]
    if not rest:
        raise BadLayoutError("state has no unmeasured factor")
    psi = pure_state.amplitudes.transpose([pos] + rest).reshape(d_m, -1)
    sub = layout.sublayout(rest)
    probs = []
    states = []
    dropped = 0
    for m in povm.elements:
        root = linalg.matrix_func_on_support((m + m.conj().T) / 2.0, np.sqrt)
        a = root @ psi
        p = float(np.vdot(a, a).real)
        if p <= PROBABILITY_FLOOR:
            dropped += 1
            continue
        rho = np.einsum("mr,ms->rs", a, a.conj()) / p
        probs.append(p)
        states.append(qstate.DensityMatrix(sub, rho))
    return Ensemble(probs=np.array(probs), states=tuple(states), n_dropped=dropped)


@dataclass(frozen=True)
class OptimizerConfig:
    """Search budget for the rank-1 POVM optimizers."""

    grid_theta: int = 60
    grid_phi: int = 120
    random_frames: int = 5000
    refine_iters: int = 200
    seed: int = 0
    tol: float = 1e-4
    max_evaluations: int | None = None

    def to_json_dict(self) -> dict:
        out = {
            "grid_theta": self.grid_theta,
            "grid_phi": self.grid_phi,
            "random_frames": self.random_frames,
            "refine_iters": self.refine_iters,
            "seed": self.seed,
            "tol": self.tol,
        }
        if self.max_evaluations is not None:
            out["max_evaluations"] = self.max_evaluations
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "OptimizerConfig":
        kwargs = {}
        for key in ("grid_theta", "grid_phi", "random_frames", "refine_iters", "seed", "max_evaluations"):
            if key in data:
                kwargs[key] = int(data[key])
        if "tol" in data:
            kwargs["tol"] = float(data["tol"])
        return cls(**kwargs)


@dataclass(frozen=True)
class CorrelationBound:
    """Optimizer output: the bound value in bits, its direction, and the best
    POVM found as certificate."""

    bits: float
    bound: str
    povm: POVM
    measured_dim: int
    evaluations: int
    refine_steps: int
    seed: int
    short_circuit: bool = False


class _RunningMin:
    def __init__(self):
        self.value = np.inf
        self.alphas: np.ndarray | None = None
        self.evaluations = 0

    def update(self, alphas: np.ndarray, values: np.ndarray) -> bool:
        self.evaluations += values.size
        idx = int(np.argmin(values))
        if values[idx] < self.value:
            self.value = float(values[idx])
            self.alphas = np.ascontiguousarray(alphas[idx])
            return True
        return False


def _evaluate(psi: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    workers = _worker_count()
    n = alphas.shape[0]
    if workers <= 1 or n < 4 * workers:
        return backend.conditional_entropy_batch(psi, alphas, PROBABILITY_FLOOR)
    out = np.empty(n)
    chunk = (n + workers - 1) // workers
    with ThreadPoolExecutor(max_workers=workers) as pool:
        jobs = []
        for start in range(0, n, chunk):
            stop = min(n, start + chunk)
            jobs.append(
                (start, stop, pool.submit(
                    backend.conditional_entropy_batch,
                    psi,
                    np.ascontiguousarray(alphas[start:stop]),
                    PROBABILITY_FLOOR,
                ))
            )
        for start, stop, job in jobs:
            out[start:stop] = job.result()
    return out


def _bloch_pair(theta: float, phi: float) -> np.ndarray:
    c = np.cos(theta / 2.0)
    s = np.sin(theta / 2.0)
    ph = np.exp(1j * phi)
    return np.array([[c, ph * s], [s, -ph * c]], dtype=np.complex128)


def _bloch_grid(grid_theta: int, grid_phi: int) -> np.ndarray:
    thetas = np.linspace(0.0, np.pi, max(grid_theta, 1))
    phis = np.linspace(0.0, 2.0 * np.pi, max(grid_phi, 1), endpoint=False)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    tt = tt.reshape(-1)
    pp = pp.reshape(-1)
    c = np.cos(tt / 2.0)
    s = np.sin(tt / 2.0)
    ph = np.exp(1j * pp)
    alphas = np.empty((tt.size, 2, 2), dtype=np.complex128)
    alphas[:, 0, 0] = c
    alphas[:, 0, 1] = ph * s
    alphas[:, 1, 0] = s
    alphas[:, 1, 1] = -ph * c
    return alphas, tt, pp


def _canonical_candidates(d: int, rho_measured: np.ndarray) -> np.ndarray:
    eig = linalg.hermitian_eig((rho_measured + rho_measured.conj().T) / 2.0, hermiticity_tol=np.inf)
    out = np.empty((2, d, d), dtype=np.complex128)
    out[0] = np.eye(d)
    out[1] = eig.eigenvectors.T
    return out


def _random_projective_frames(d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    out = np.empty((count, d, d), dtype=np.complex128)
    for i in range(count):
        out[i] = qstate.random_unitary(d, rng).T
    return out


def _normalize_frame(vectors: np.ndarray) -> np.ndarray:
    """Map arbitrary spanning vectors (n_out, d) to a rank-1 POVM frame via
    the inverse square root of their frame operator."""
    s = np.einsum("id,ie->de", vectors, vectors.conj())
    w, v = np.linalg.eigh(s)
    w = np.clip(w, 1e-12, None)
    inv_root = (v * (w ** -0.5)) @ v.conj().T
    return vectors @ inv_root.T


def _random_overcomplete_frames(d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    n_out = 2 * d
    raw = rng.normal(size=(count, n_out, d)) + 1j * rng.normal(size=(count, n_out, d))
    out = np.empty_like(raw)
    for i in range(count):
        out[i] = _normalize_frame(raw[i])
    return out


def _planned_evaluations(d: int, config: OptimizerConfig) -> int:
    if d == 2:
        return 2 + config.grid_theta * config.grid_phi + 4 * config.refine_iters
    return 2 + config.random_frames + _FRAME_REFINE_BATCH * config.refine_iters


def _refine_bloch(psi, best: _RunningMin, theta: float, phi: float, config: OptimizerConfig) -> int:
    step = max(np.pi / max(config.grid_theta - 1, 1), 2.0 * np.pi / max(config.grid_phi, 1))
    steps = 0
    value = best.value
    for _ in range(config.refine_iters):
        if step < config.tol:
            break
        props = np.array(
            [(theta + step, phi), (theta - step, phi), (theta, phi + step), (theta, phi - step)]
        )
        alphas = np.stack([_bloch_pair(t, p) for t, p in props])
        values = _evaluate(psi, alphas)
        best.evaluations += values.size
        idx = int(np.argmin(values))
        steps += 1
        if values[idx] < value:
            value = float(values[idx])
            theta, phi = props[idx]
            best.value = value
            best.alphas = np.ascontiguousarray(alphas[idx])
        else:
            step *= _REFINE_SHRINK
    return steps


def _refine_frame(psi, best: _RunningMin, config: OptimizerConfig, rng: np.random.Generator) -> int:
    step = _FRAME_REFINE_STEP0
    steps = 0
    base = best.alphas
    for _ in range(config.refine_iters):
        if step < config.tol:
            break
        noise = rng.normal(size=(_FRAME_REFINE_BATCH,) + base.shape) + 1j * rng.normal(
            size=(_FRAME_REFINE_BATCH,) + base.shape
        )
        proposals = np.empty_like(noise)
        for i in range(_FRAME_REFINE_BATCH):
            proposals[i] = _normalize_frame(base + step * noise[i])
        values = _evaluate(psi, proposals)
        best.evaluations += values.size
        idx = int(np.argmin(values))
        steps += 1
        if values[idx] < best.value:
            best.value = float(values[idx])
            best.alphas = np.ascontiguousarray(proposals[idx])
            base = best.alphas
        else:
            step *= _REFINE_SHRINK
    return steps


def _minimize_conditional_entropy(
    psi: np.ndarray,
    rho_measured: np.ndarray,
    config: OptimizerConfig,
) -> tuple[_RunningMin, int]:
    """Minimize sum_i p_i S(conditional) over rank-1 POVMs on the first axis
    of psi (m, keep, other). Returns the running minimum and refine steps."""
    d = psi.shape[0]
    planned = _planned_evaluations(d, config)
    if config.max_evaluations is not None and planned > config.max_evaluations:
        raise OptimizerBudgetExceededError(
            f"planned {planned} evaluations exceed max_evaluations={config.max_evaluations}"
        )
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    best = _RunningMin()
    canon = _canonical_candidates(d, rho_measured)
    best.update(canon, _evaluate(psi, canon))
    refine_steps = 0
    if d == 2:
        alphas, tt, pp = _bloch_grid(config.grid_theta, config.grid_phi)
        values = _evaluate(psi, alphas)
        idx = int(np.argmin(values))
        best.evaluations += values.size
        theta, phi = float(tt[idx]), float(pp[idx])
        if values[idx] < best.value:
            best.value = float(values[idx])
            best.alphas = np.ascontiguousarray(alphas[idx])
        if config.refine_iters > 0:
            refine_steps = _refine_bloch(psi, best, theta, phi, config)
    else:
        rng = np.random.default_rng(config.seed)
        n_proj = config.random_frames // 2
        n_over = config.random_frames - n_proj
        if n_proj > 0:
            frames = _random_projective_frames(d, n_proj, rng)
            best.update(frames, _evaluate(psi, frames))
        if n_over > 0:
            frames = _random_overcomplete_frames(d, n_over, rng)
            best.update(frames, _evaluate(psi, frames))
        if config.refine_iters > 0:
            refine_steps = _refine_frame(psi, best, config, rng)
    return best, refine_steps


def _pick_reference_label(used: Iterable[str]) -> str:
    for lab in ("X", "R", "Q", "E"):
        if lab not in used:
            return lab
    raise BadLayoutError("no free label for the purifying reference")


def eof(
    rho_ab: qstate.DensityMatrix,
    optimizer: OptimizerConfig | None = None,
) -> CorrelationBound:
    """Entanglement of formation: infimum of the measured conditional entropy
    over rank-1 POVMs on a purifying reference. Returned value is an upper
    bound on the true infimum; pure inputs short-circuit to the exact
    marginal entropy."""
    if len(rho_ab.layout.labels) != 2:
        raise BadLayoutError(f"need a bipartite state, got {rho_ab.layout.labels}")
    config = optimizer or OptimizerConfig()
    if rho_ab.purity() >= 1.0 - 1e-9:
        bits = entropy.von_neumann_entropy(qstate.marginal(rho_ab, rho_ab.layout.labels[0]))
        ref_dim = 1
        povm = POVM(elements=(np.eye(1, dtype=np.complex128),))
        return CorrelationBound(
            bits=bits,
            bound="upper",
            povm=povm,
            measured_dim=ref_dim,
            evaluations=0,
            refine_steps=0,
            seed=config.seed,
            short_circuit=True,
        )
    ref_label = _pick_reference_label(rho_ab.layout.labels)
    pur = qstate.purify(rho_ab, ref_label)
    d_a, d_b = rho_ab.layout.dims
    ref_dim = pur.layout.dims[-1]
    psi = pur.amplitudes.reshape(d_a, d_b, ref_dim).transpose(2, 0, 1)
    rho_ref = qstate.marginal(pur, ref_label).matrix
    best, refine_steps = _minimize_conditional_entropy(psi, rho_ref, config)
    return CorrelationBound(
        bits=max(best.value, 0.0),
        bound="upper",
        povm=POVM.from_vectors(best.alphas),
        measured_dim=ref_dim,
        evaluations=best.evaluations,
        refine_steps=refine_steps,
        seed=config.seed,
    )


def classical_correlation(
    state: qstate.PureState,
    from_label: str,
    to_label: str,
    optimizer: OptimizerConfig | None = None,
) -> CorrelationBound:
    """Classical correlation: the Holevo quantity of the steered ensemble,
    maximized over rank-1 POVMs on the measured factor. Lower bound on the
    true supremum."""
    config = optimizer or OptimizerConfig()
    layout = state.layout
    if len(layout.labels) != 3:
        raise BadLayoutError(f"need a tripartite pure state, got {layout.labels}")
    if from_label == to_label:
        raise BadLayoutError("from_label and to_label must differ")
    pos_from = layout.index_of(from_label)
    pos_to = layout.index_of(to_label)
    pos_other = next(i for i in range(3) if i not in (pos_from, pos_to))
    psi = np.ascontiguousarray(state.amplitudes.transpose(pos_from, pos_to, pos_other))
    s_to = entropy.von_neumann_entropy(qstate.marginal(state, to_label))
    rho_from = qstate.marginal(state, from_label).matrix
    best, refine_steps = _minimize_conditional_entropy(psi, rho_from, config)
    return CorrelationBound(
        bits=s_to - best.value,
        bound="lower",
        povm=POVM.from_vectors(best.alphas),
        measured_dim=psi.shape[0],
        evaluations=best.evaluations,
        refine_steps=refine_steps,
        seed=config.seed,
    )


def discord(
    state: qstate.PureState,
    from_label: str,
    to_label: str,
    optimizer: OptimizerConfig | None = None,
) -> float:
    """Discord: mutual information minus classical correlation. Upper bound,
    since the classical term is a lower bound."""
    cc = classical_correlation(state, from_label, to_label, optimizer)
    mi = entropy.mutual_information(qstate.marginal(state, (from_label, to_label)))
    return mi - cc.bits


@dataclass(frozen=True)
class CorrelationReport:
    """Correlation measures of a tripartite pure state plus the residuals of
    the monogamy identities, all in bits."""

    S_E: float
    eof_QE: float
    classical_Q_to_E: float
    discord_Q_to_E: float
    classical_R_to_E: float
    eof_RE: float
    kw_residual: float
    kw_swapped_residual: float
    discord_balance_residual: float
    optimizer_metadata: dict
    markov_residuals: dict | None = None

    def __post_init__(self):
        measures = {
            "S_E": self.S_E,
            "eof_QE": self.eof_QE,
            "classical_Q_to_E": self.classical_Q_to_E,
            "discord_Q_to_E": self.discord_Q_to_E,
            "classical_R_to_E": self.classical_R_to_E,
            "eof_RE": self.eof_RE,
        }
        for name, value in measures.items():
            if value < MEASURE_FLOOR:
                raise InvalidStateError(f"{name} = {value} below the optimization noise floor")

    def to_json_dict(self) -> dict:
        out = {
            "S_E": self.S_E,
            "eof_QE": self.eof_QE,
            "classical_Q_to_E": self.classical_Q_to_E,
            "discord_Q_to_E": self.discord_Q_to_E,
            "classical_R_to_E": self.classical_R_to_E,
            "eof_RE": self.eof_RE,
            "kw_residual": self.kw_residual,
            "kw_swapped_residual": self.kw_swapped_residual,
            "discord_balance_residual": self.discord_balance_residual,
            "optimizer_metadata": dict(self.optimizer_metadata),
        }
        if self.markov_residuals is not None:
            out["markov_residuals"] = dict(self.markov_residuals)
        return out


def identity_suite(
    state: qstate.PureState,
    optimizer: OptimizerConfig | None = None,
) -> CorrelationReport:
    """Full correlation report for a tripartite pure state.

    Evaluates the three monogamy identities (signed residuals); for
    Markov inputs additionally records how far the degenerate R-E measures
    are from zero and the chain of Q-E measures from S(E)."""
    config = optimizer or OptimizerConfig()
    if set(state.layout.labels) != {"R", "Q", "E"}:
        raise BadLayoutError(f"need labels R, Q, E, got {state.layout.labels}")
    s_e = entropy.von_neumann_entropy(qstate.marginal(state, "E"))
    mutual_qe = entropy.mutual_information(qstate.marginal(state, ("Q", "E")))
    mutual_re = entropy.mutual_information(qstate.marginal(state, ("R", "E")))

    eof_qe = eof(qstate.marginal(state, ("Q", "E")), config)
    eof_re = eof(qstate.marginal(state, ("R", "E")), config)
    c_qe = classical_correlation(state, "Q", "E", config)
    c_re = classical_correlation(state, "R", "E", config)
    d_qe = mutual_qe - c_qe.bits

    metadata = {
        "grid_theta": config.grid_theta,
        "grid_phi": config.grid_phi,
        "random_frames": config.random_frames,
        "refine_iters": config.refine_iters,
        "seed": config.seed,
        "evaluations": {
            "eof_QE": eof_qe.evaluations,
            "eof_RE": eof_re.evaluations,
            "classical_Q_to_E": c_qe.evaluations,
            "classical_R_to_E": c_re.evaluations,
        },
    }

    markov_residuals = None
    if entropy.is_markov_state(state).is_markov:
        markov_residuals = {
            "mutual_RE": mutual_re,
            "eof_RE": eof_re.bits,
            "classical_R_to_E": c_re.bits,
            "eof_QE_minus_S_E": eof_qe.bits - s_e,
            "classical_Q_to_E_minus_S_E": c_qe.bits - s_e,
            "discord_Q_to_E_minus_S_E": d_qe - s_e,
        }

    return CorrelationReport(
        S_E=s_e,
        eof_QE=eof_qe.bits,
        classical_Q_to_E=c_qe.bits,
        discord_Q_to_E=d_qe,
        classical_R_to_E=c_re.bits,
        eof_RE=eof_re.bits,
        kw_residual=c_re.bits + eof_qe.bits - s_e,
        kw_swapped_residual=c_qe.bits + eof_re.bits - s_e,
        discord_balance_residual=mutual_re - eof_re.bits + d_qe - s_e,
        optimizer_metadata=metadata,
        markov_residuals=markov_residuals,
    )
