"""Command-line front end.

Verbs: gen-state, check-markov, petz-recover, extract-channel, correlations,
markov-scan. Thin adapters only: every computation lives in the library.

Exit codes: 0 success; 1 validation/usage failure (machine-readable JSON on
stderr); 2 the computation ran but a physics check failed (report still
written). MARKOV_RECOVERY_THREADS caps optimizer worker threads,
MARKOV_RECOVERY_BACKEND picks the kernel backend.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import channel as channel_mod
from . import correlations as corr
from . import entropy, jsonio, linalg, markovscan, qstate, recovery
from .errors import MarkovRecoveryError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CHECK_FAILED = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _emit_error(kind: str, message: str) -> None:
    sys.stderr.write(jsonio.dumps({"error": kind, "message": message}) + "\n")


def _parse_probs(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",") if x.strip() != ""])
    except ValueError as exc:
        raise MarkovRecoveryError(f"bad probability list {text!r}: {exc}") from exc


def _build_parser() -> _Parser:
    parser = _Parser(prog="markov-recovery", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen-state", help="construct a canonical pure Markov state")
    p.add_argument("--kappa", required=True, help="comma-separated reference spectrum, sums to 1")
    p.add_argument("--mu", required=True, help="comma-separated environment spectrum, sums to 1")
    p.add_argument("--d-q", type=int, default=None, help="system dimension (>= len(kappa)*len(mu))")
    p.add_argument("--random-bases", action="store_true", help="rotate all three bases by Haar unitaries")
    p.add_argument("--seed", type=int, default=0, help="seed for --random-bases (default 0)")
    p.add_argument("--out", required=True, help="pure-state JSON output path")
    p.add_argument("--spec-out", default=None, help="also write the spec JSON here")

    p = sub.add_parser("check-markov", help="conditional mutual information test")
    p.add_argument("--state", required=True, help="pure-state or density-matrix JSON")
    p.add_argument("--tol", type=float, default=entropy.MARKOV_TOL,
                   help=f"Markov threshold in bits (default {entropy.MARKOV_TOL:g})")
    p.add_argument("--out", required=True, help="report JSON")

    p = sub.add_parser("petz-recover", help="reconstruct a tripartite state from its RQ and QE marginals")
    p.add_argument("--state", required=True, help="tripartite state JSON (pure or density)")
    p.add_argument("--tol", type=float, default=1e-9,
                   help="pass threshold on the trace distance (default 1e-09)")
    p.add_argument("--out", required=True, help="report JSON")
    p.add_argument("--recovered-out", default=None, help="optionally write the reconstructed density matrix")

    p = sub.add_parser("extract-channel", help="reduced-dynamics Kraus set for a pure Markov state and unitary")
    p.add_argument("--state", required=True, help="pure Markov tripartite state JSON")
    p.add_argument("--unitary", required=True, help="QE unitary JSON {rows, cols, entries}")
    p.add_argument("--cp-tol", type=float, default=channel_mod.CP_EIG_TOL,
                   help=f"Choi eigenvalue tolerance (default {channel_mod.CP_EIG_TOL:g})")
    p.add_argument("--tp-tol", type=float, default=channel_mod.TP_RESIDUAL_TOL,
                   help=f"completeness tolerance (default {channel_mod.TP_RESIDUAL_TOL:g})")
    p.add_argument("--out", required=True, help="channel JSON")

    p = sub.add_parser("correlations", help="EOF, classical correlation, discord and identity residuals")
    p.add_argument("--state", required=True, help="tripartite pure-state JSON")
    p.add_argument("--config", default=None,
                   help="optimizer config JSON (defaults: grid 60x120, 5000 frames, 200 refinements)")
    p.add_argument("--seed", type=int, default=None, help="override the optimizer seed")
    p.add_argument("--format", choices=("json", "csv"), default="json", help="report format (default json)")
    p.add_argument("--out", required=True, help="report path")

    p = sub.add_parser("markov-scan", help="trajectory scan for Markov-structure preservation")
    p.add_argument("--input", required=True, help="JSON {spec, hamiltonian, times, tol}")
    p.add_argument("--tol", type=float, default=None,
                   help=f"override the tol from the input file (module default {markovscan.SCAN_TOL:g})")
    p.add_argument("--out", required=True, help="scan report JSON")
    p.add_argument("--csv", default=None, help="optional CSV (time, product_residual, flag)")

    return parser


def _cmd_gen_state(args) -> int:
    kappa = _parse_probs(args.kappa)
    mu = _parse_probs(args.mu)
    if args.random_bases:
        rng = np.random.default_rng(args.seed)
        n_r, n_e = kappa.size, mu.size
        d_q = args.d_q if args.d_q is not None else n_r * n_e
        spec = qstate.PureMarkovSpec(
            kappa=kappa,
            mu=mu,
            r_basis=qstate.random_unitary(n_r, rng)[:, :n_r],
            q_basis=qstate.random_unitary(d_q, rng)[:, : n_r * n_e],
            e_basis=qstate.random_unitary(n_e, rng)[:, :n_e],
        )
    else:
        spec = qstate.PureMarkovSpec.standard(kappa, mu, d_q=args.d_q)
    state = qstate.make_pure_markov(spec)
    jsonio.write_json(args.out, jsonio.pure_state_to_dict(state))
    if args.spec_out:
        jsonio.write_json(args.spec_out, jsonio.markov_spec_to_dict(spec))
    return EXIT_OK


def _cmd_check_markov(args) -> int:
    state = jsonio.state_from_dict(jsonio.load_json(args.state))
    check = entropy.is_markov_state(state, tol=args.tol)
    jsonio.write_json(args.out, check.to_json_dict())
    return EXIT_OK if check.is_markov else EXIT_CHECK_FAILED


def _cmd_petz_recover(args) -> int:
    state = jsonio.state_from_dict(jsonio.load_json(args.state))
    target = state.to_density() if isinstance(state, qstate.PureState) else state
    petz = recovery.PetzMap.from_state(qstate.marginal(state, ("Q", "E")))
    recovered = recovery.reconstruct_tripartite(qstate.marginal(state, ("R", "Q")), petz)
    distance = linalg.trace_norm_distance(recovered.matrix, target.matrix)
    ok = distance <= args.tol
    report = {
        "trace_distance": distance,
        "tol": args.tol,
        "recovered_matches": ok,
        "recovery_residual": recovery.recovery_residual(qstate.marginal(state, ("Q", "E"))),
    }
    jsonio.write_json(args.out, report)
    if args.recovered_out:
        jsonio.write_json(args.recovered_out, jsonio.density_matrix_to_dict(recovered))
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _cmd_extract_channel(args) -> int:
    state = jsonio.state_from_dict(jsonio.load_json(args.state))
    if not isinstance(state, qstate.PureState):
        raise MarkovRecoveryError("extract-channel needs a pure tripartite state")
    u = jsonio.square_matrix_from_dict(jsonio.load_json(args.unitary))
    spec = qstate.markov_spec_from_state(state)
    chan = channel_mod.kraus_operators(spec, u)
    ver = channel_mod.choi_and_verify(chan, cp_tol=args.cp_tol, tp_tol=args.tp_tol)
    report = {
        "kraus": [jsonio.square_matrix_to_dict(k) for k in chan.kraus],
        "support_projector": jsonio.square_matrix_to_dict(chan.support_projector),
        "report": {
            "cp_flag": ver.cp_flag,
            "tp_flag": ver.tp_flag,
            "min_choi_eigenvalue": ver.min_eigenvalue,
            "completeness_residual": ver.completeness_residual,
            "kraus_form_residual": chan.kraus_form_residual,
        },
    }
    jsonio.write_json(args.out, report)
    return EXIT_OK if (ver.cp_flag and ver.tp_flag) else EXIT_CHECK_FAILED


def _cmd_correlations(args) -> int:
    state = jsonio.state_from_dict(jsonio.load_json(args.state))
    if not isinstance(state, qstate.PureState):
        raise MarkovRecoveryError("correlations needs a tripartite pure state")
    if args.config:
        config = corr.OptimizerConfig.from_json_dict(jsonio.load_json(args.config))
    else:
        config = corr.OptimizerConfig()
    if args.seed is not None:
        config = corr.OptimizerConfig(**{**config.to_json_dict(), "seed": args.seed})
    report = corr.identity_suite(state, config)
    if args.format == "json":
        jsonio.write_json(args.out, report.to_json_dict())
    else:
        data = report.to_json_dict()
        fields = [k for k, v in data.items() if isinstance(v, (int, float))]
        jsonio.write_csv(args.out, fields, [[data[k] for k in fields]])
    return EXIT_OK


def _cmd_markov_scan(args) -> int:
    data = jsonio.load_json(args.input)
    spec = jsonio.markov_spec_from_dict(data["spec"])
    h = markovscan.Hamiltonian(jsonio.square_matrix_from_dict(data["hamiltonian"]))
    times = [float(t) for t in data["times"]]
    tol = args.tol if args.tol is not None else float(data.get("tol", markovscan.SCAN_TOL))
    report = markovscan.scan(spec, h, times, tol)
    jsonio.write_json(args.out, report.to_json_dict())
    if args.csv:
        jsonio.write_csv(args.csv, ("time", "product_residual", "flag"), report.csv_rows())
    return EXIT_OK


_COMMANDS = {
    "gen-state": _cmd_gen_state,
    "check-markov": _cmd_check_markov,
    "petz-recover": _cmd_petz_recover,
    "extract-channel": _cmd_extract_channel,
    "correlations": _cmd_correlations,
    "markov-scan": _cmd_markov_scan,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        _emit_error("UsageError", str(exc))
        return EXIT_VALIDATION
    try:
        return _COMMANDS[args.verb](args)
    except MarkovRecoveryError as exc:
        _emit_error(type(exc).__name__, str(exc))
        return EXIT_VALIDATION
    except (OSError, KeyError, ValueError) as exc:
        _emit_error(type(exc).__name__, str(exc))
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
