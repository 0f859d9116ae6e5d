import numpy as np
import pytest

from markov_recovery import channel, linalg, markovscan as ms, qstate
from markov_recovery.errors import NotHermitianError, NotMarkovAtIntermediateTimeError

SZ = np.diag([1.0, -1.0]).astype(complex)
PLUS = np.array([[1.0], [1.0]], dtype=complex) / np.sqrt(2.0)


def correlated_rq_spec():
    # R-Q correlated, environment pure and not a sigma_z eigenstate
    return qstate.PureMarkovSpec(
        kappa=[0.7, 0.3],
        mu=[1.0],
        r_basis=np.eye(2, dtype=complex),
        q_basis=np.eye(2, dtype=complex),
        e_basis=PLUS,
    )


def noninteracting_hamiltonian(seed, d_q=4, d_e=2):
    rng = np.random.default_rng(seed)
    hq = rng.normal(size=(d_q, d_q)) + 1j * rng.normal(size=(d_q, d_q))
    hq = (hq + hq.conj().T) / 2
    he = rng.normal(size=(d_e, d_e)) + 1j * rng.normal(size=(d_e, d_e))
    he = (he + he.conj().T) / 2
    return linalg.tensor(hq, np.eye(d_e, dtype=complex)) + linalg.tensor(np.eye(d_q, dtype=complex), he)


class TestTrajectory:
    def test_zero_hamiltonian_constant(self):
        spec = qstate.random_markov_spec(1, n_r=2, n_e=2)
        states = ms.trajectory(spec, np.zeros((8, 8), dtype=complex), [0.0, 0.5, 2.0])
        base = states[0].amplitudes
        for st in states[1:]:
            assert np.abs(st.amplitudes - base).max() <= 1e-12

    def test_group_inverse(self, rng):
        h = ms.Hamiltonian(noninteracting_hamiltonian(2))
        prop = ms._Propagator(h)
        u = prop.at(0.7) @ prop.at(-0.7)
        assert np.abs(u - np.eye(8)).max() <= 1e-10

    def test_semigroup(self, rng):
        z = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        h = ms.Hamiltonian((z + z.conj().T) / 2)
        prop = ms._Propagator(h)
        lhs = prop.at(0.3) @ prop.at(0.9)
        rhs = prop.at(1.2)
        assert np.abs(lhs - rhs).max() <= 1e-10

    def test_exact_unitarity(self):
        h = ms.Hamiltonian(noninteracting_hamiltonian(3))
        prop = ms._Propagator(h)
        u = prop.at(17.3)
        assert np.abs(u.conj().T @ u - np.eye(8)).max() <= 1e-10

    def test_not_hermitian(self):
        with pytest.raises(NotHermitianError):
            ms.Hamiltonian(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))


class TestProductResidual:
    def test_initial_time_markov(self):
        spec = qstate.random_markov_spec(4, n_r=2, n_e=2)
        assert ms.product_residual(qstate.make_pure_markov(spec)) <= 1e-10

    def test_noninteracting_stays_product(self):
        spec = qstate.random_markov_spec(5, n_r=2, n_e=2)
        h = noninteracting_hamiltonian(6)
        for st in ms.trajectory(spec, h, np.linspace(0.0, 3.0, 10)):
            assert ms.product_residual(st) <= 1e-9

    def test_zz_coupling_breaks_product(self):
        h = linalg.tensor(SZ, SZ)
        states = ms.trajectory(correlated_rq_spec(), h, np.linspace(0.05, np.pi / 4, 8))
        residuals = [ms.product_residual(st) for st in states]
        assert all(r > 1e-3 for r in residuals)


class TestDivisibility:
    def test_zero_hamiltonian(self):
        spec = qstate.random_markov_spec(7, n_r=2, n_e=2)
        res = ms.divisibility_check(spec, np.zeros((8, 8), dtype=complex), 0.0, 0.4, 1.0)
        assert res <= 1e-9

    def test_noninteracting(self):
        spec = qstate.random_markov_spec(8, n_r=2, n_e=2)
        h = noninteracting_hamiltonian(9)
        res = ms.divisibility_check(spec, h, 0.1, 0.6, 1.3)
        assert res <= 1e-8

    def test_not_markov_at_intermediate_time(self):
        h = linalg.tensor(SZ, SZ)
        with pytest.raises(NotMarkovAtIntermediateTimeError):
            ms.divisibility_check(correlated_rq_spec(), h, 0.0, 0.3, 0.6)


class TestScan:
    def test_noninteracting_all_flagged(self):
        spec = qstate.random_markov_spec(10, n_r=2, n_e=2)
        h = noninteracting_hamiltonian(11)
        report = ms.scan(spec, h, np.linspace(0.0, 2.0, 12))
        assert report.markov_flags.all()
        assert report.product_residuals.max() <= 1e-9
        assert len(report.divisibility) == 10
        assert max(rec.residual for rec in report.divisibility) <= 1e-8

    def test_zz_flags_only_origin(self):
        h = linalg.tensor(SZ, SZ)
        report = ms.scan(correlated_rq_spec(), h, np.linspace(0.0, np.pi / 4, 9))
        assert report.markov_flags[0]
        assert not report.markov_flags[1:].any()
        assert len(report.divisibility) == 0

    def test_empty_grid(self):
        spec = qstate.random_markov_spec(12, n_r=2, n_e=2)
        report = ms.scan(spec, np.zeros((8, 8), dtype=complex), [])
        assert report.times.size == 0
        assert len(report.divisibility) == 0

    def test_grid_refinement_invariance(self):
        spec = qstate.random_markov_spec(13, n_r=2, n_e=2)
        h = noninteracting_hamiltonian(14)
        coarse = ms.scan(spec, h, [0.0, 1.0, 2.0])
        fine = ms.scan(spec, h, [0.0, 0.5, 1.0, 1.5, 2.0])
        for t, r in zip(coarse.times, coarse.product_residuals):
            i = list(fine.times).index(t)
            assert abs(fine.product_residuals[i] - r) <= 1e-14

    def test_flagged_times_yield_cptp_channels(self):
        spec = qstate.random_markov_spec(15, n_r=2, n_e=2)
        h = noninteracting_hamiltonian(16)
        grid = np.linspace(0.0, 1.0, 4)
        states = ms.trajectory(spec, h, grid)
        u = qstate.random_unitary(8, 17)
        for st in states:
            assert ms.product_residual(st) <= 1e-9
            downstream_spec = qstate.markov_spec_from_state(st)
            ver = channel.choi_and_verify(channel.kraus_operators(downstream_spec, u))
            assert ver.cp_flag and ver.tp_flag

    def test_residual_continuity(self):
        h = linalg.tensor(SZ, SZ)  # norm well below the stated bound
        t0 = 0.37
        states = ms.trajectory(correlated_rq_spec(), h, [t0, t0 + 1e-4])
        r0, r1 = (ms.product_residual(st) for st in states)
        assert abs(r1 - r0) <= 1e-2
