#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy twins.

Times the two hot paths (Hermitian eigendecomposition, batched POVM
conditional-entropy evaluation) on representative workloads and checks that
the backends agree numerically. Run from the repo root:

    python3 benchmarks/bench_backends.py
"""

import argparse
import time

import numpy as np


def _load_backends():
    from markov_recovery import _kernels_numpy as knp

    backends = {"numpy": knp}
    try:
        from markov_recovery import _kernels_numba as knb

        backends["numba"] = knb
    except ImportError:
        print("numba unavailable; benchmarking numpy only")
    return backends


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_eigh(backends, repeats):
    rng = np.random.default_rng(0)
    print(f"{'hermitian eig':<28}" + "".join(f"{name:>12}" for name in backends) + f"{'ratio':>9}")
    for n, batch in ((4, 512), (8, 256), (16, 64), (32, 16), (64, 4)):
        mats = []
        for _ in range(batch):
            z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            mats.append(np.ascontiguousarray((z + z.conj().T) / 2))
        times = {}
        results = {}
        for name, mod in backends.items():
            def run(mod=mod):
                acc = 0.0
                for m in mats:
                    w, _ = mod.hermitian_eigh(m)
                    acc += w[0]
                return acc

            run()  # warmup / jit
            times[name] = _time(run, repeats)
            results[name] = np.concatenate([np.sort(mod.hermitian_eigh(m)[0]) for m in mats])
        if len(backends) == 2:
            dev = np.abs(results["numpy"] - results["numba"]).max()
            assert dev < 1e-9, f"backend disagreement {dev:.2e}"
            ratio = times["numpy"] / times["numba"]
        else:
            ratio = float("nan")
        row = f"d={n:<3} x{batch:<5} per batch    "
        row += "".join(f"{times[name] * 1e3:>10.2f}ms" for name in backends)
        row += f"{ratio:>8.2f}x"
        print(row)


def bench_conditional_entropy(backends, repeats):
    rng = np.random.default_rng(1)
    print()
    print(f"{'POVM batch entropy':<28}" + "".join(f"{name:>12}" for name in backends) + f"{'ratio':>9}")
    cases = [
        ("qubit grid 7200x2 (2,4,2)", (2, 4, 2), 7200, 2),
        ("frames 5000x4  (4,2,2)", (4, 2, 2), 5000, 4),
        ("frames 5000x8  (4,2,2)", (4, 2, 2), 5000, 8),
        ("qutrit grid 2000x3 (3,3,3)", (3, 3, 3), 2000, 3),
    ]
    for label, shape, n_cand, n_out in cases:
        m = shape[0]
        psi = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        psi = np.ascontiguousarray(psi / np.linalg.norm(psi))
        raw = rng.normal(size=(n_cand, n_out, m)) + 1j * rng.normal(size=(n_cand, n_out, m))
        alphas = np.empty_like(raw)
        for c in range(n_cand):
            s = np.einsum("id,ie->de", raw[c], raw[c].conj())
            w, v = np.linalg.eigh(s)
            inv_root = (v * np.clip(w, 1e-12, None) ** -0.5) @ v.conj().T
            alphas[c] = raw[c] @ inv_root.T
        alphas = np.ascontiguousarray(alphas)
        times = {}
        results = {}
        for name, mod in backends.items():
            mod.conditional_entropy_batch(psi, alphas, 1e-12)  # warmup / jit
            times[name] = _time(lambda mod=mod: mod.conditional_entropy_batch(psi, alphas, 1e-12), repeats)
            results[name] = mod.conditional_entropy_batch(psi, alphas, 1e-12)
        if len(backends) == 2:
            dev = np.abs(results["numpy"] - results["numba"]).max()
            assert dev < 1e-10, f"backend disagreement {dev:.2e}"
            ratio = times["numpy"] / times["numba"]
        else:
            ratio = float("nan")
        row = f"{label:<28}"
        row += "".join(f"{times[name] * 1e3:>10.2f}ms" for name in backends)
        row += f"{ratio:>8.2f}x"
        print(row)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats, best-of")
    args = parser.parse_args()
    backends = _load_backends()
    bench_eigh(backends, args.repeats)
    bench_conditional_entropy(backends, args.repeats)
    print("\nbackends agree within tolerance on all workloads")


if __name__ == "__main__":
    main()
