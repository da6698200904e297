import numpy as np
import pytest
import scipy.linalg

from qstab import (
    ChainDimensionError,
    CollisionConfig,
    InvalidCandidateError,
    LyapunovCandidate,
    QsdeModel,
    QuantumState,
    Trajectory,
    UnsupportedScatteringError,
    adjoint,
    collision_step_unitary,
    envelope_check,
    exit_time_estimate,
    finite_difference_drift_check,
    ito_table_check,
    liouvillian_matrix,
    master_evolve,
    master_flow_expectation,
    simulate_flow_expectation,
    spectral_norm,
    transit_time_check,
)

from conftest import EYE2, KET_E, NUMBER, SIGMA_MINUS, SIGMA_X, SIGMA_Z, random_hermitian

GAMMA = 1.0


@pytest.fixture
def excited():
    return QuantumState.from_vector(KET_E)


@pytest.fixture
def v_linear():
    """V(X) = X via the Hermitian-closed pair of linear terms, halved."""
    return LyapunovCandidate(terms=((1, 0, 0.5 * EYE2), (0, 1, 0.5 * EYE2)))


class TestCollisionStepUnitary:
    def test_decoupled_system(self):
        h = 0.3 * SIGMA_Z
        model = QsdeModel(hamiltonian=h, coupling=np.zeros((2, 2)))
        u = collision_step_unitary(model, dt=0.05)
        expected = np.kron(scipy.linalg.expm(-1j * h * 0.05), np.eye(2))
        assert np.allclose(u, expected, atol=1e-12)

    def test_unitarity(self, damping_model):
        u = collision_step_unitary(damping_model, dt=0.01, ancilla_levels=2)
        assert spectral_norm(adjoint(u) @ u - np.eye(u.shape[0])) <= 1e-12

    def test_rotation_block(self, damping_model):
        dt = 0.04
        theta = np.sqrt(GAMMA * dt)
        u = collision_step_unitary(damping_model, dt=dt)
        # basis (|e,0>, |e,1>, |g,0>, |g,1>): the coupling rotates the
        # span of |e,0> and |g,1> by theta and fixes |g,0>.
        assert u[0, 0] == pytest.approx(np.cos(theta), abs=1e-12)
        assert u[3, 0] == pytest.approx(np.sin(theta), abs=1e-12)
        assert u[0, 3] == pytest.approx(-np.sin(theta), abs=1e-12)
        assert u[2, 2] == pytest.approx(1.0, abs=1e-12)

    def test_vacuum_contraction_matches_drift(self, damping_model):
        # <0|U|0> = I - iH dt - 1/2 L'L dt + O(dt^2): check second-order
        # convergence of the residual.
        def residual(dt):
            u = collision_step_unitary(damping_model, dt=dt)
            block = u.reshape(2, 2, 2, 2)[:, 0, :, 0]  # ancilla vacuum matrix element
            target = (
                np.eye(2)
                - 1j * damping_model.hamiltonian * dt
                - 0.5 * adjoint(damping_model.coupling) @ damping_model.coupling * dt
            )
            return spectral_norm(block - target)

        r1, r2 = residual(1e-2), residual(5e-3)
        assert r1 <= 1e-3
        assert r1 / r2 == pytest.approx(4.0, rel=0.2)

    def test_scattering_rejected(self):
        model = QsdeModel(hamiltonian=np.zeros((2, 2)), coupling=SIGMA_MINUS, scattering=SIGMA_X)
        with pytest.raises(UnsupportedScatteringError):
            collision_step_unitary(model, dt=0.01)


class TestSimulateFlowExpectation:
    def test_trivial_dynamics_is_constant(self, v_linear):
        model = QsdeModel(hamiltonian=np.zeros((2, 2)), coupling=np.zeros((2, 2)))
        psi = QuantumState.from_vector(np.array([0.6, 0.8]))
        traj = simulate_flow_expectation(model, v_linear, SIGMA_Z, psi, CollisionConfig(dt=0.1, steps=8))
        assert np.all(np.abs(traj.v_expect - traj.v_expect[0]) <= 1e-12)

    def test_initial_value_exact(self, damping_model, damping_candidate, excited):
        traj = simulate_flow_expectation(
            damping_model, damping_candidate, SIGMA_Z, excited, CollisionConfig(dt=0.01, steps=1)
        )
        assert traj.v_expect[0] == pytest.approx(4.0, abs=1e-14)

    def test_damping_tracks_exponential(self, damping_model, v_linear, excited):
        dt, steps = 1e-2, 10
        traj = simulate_flow_expectation(
            damping_model, v_linear, NUMBER, excited, CollisionConfig(dt=dt, steps=steps)
        )
        exact = np.exp(-GAMMA * traj.times)
        assert np.max(np.abs(traj.v_expect - exact)) <= 0.05

    def test_homomorphism_square_vs_linear_at_square(self, damping_model, excited):
        # trajectory of V = X.I.X at X0 equals trajectory of V = X at X0^2
        x0 = SIGMA_Z + 0.3 * SIGMA_X
        cand_sq = LyapunovCandidate(terms=((1, 1, EYE2),))
        cand_lin = LyapunovCandidate(terms=((1, 0, 0.5 * EYE2), (0, 1, 0.5 * EYE2)))
        cfg = CollisionConfig(dt=0.02, steps=6)
        t1 = simulate_flow_expectation(damping_model, cand_sq, x0, excited, cfg)
        t2 = simulate_flow_expectation(damping_model, cand_lin, x0 @ x0, excited, cfg)
        assert np.max(np.abs(t1.v_expect - t2.v_expect)) <= 1e-10

    def test_observables_recorded(self, damping_model, v_linear, excited):
        traj = simulate_flow_expectation(
            damping_model, v_linear, NUMBER, excited, CollisionConfig(dt=0.05, steps=3),
            observables={"number": NUMBER},
        )
        assert np.allclose(traj.obs_expect["number"], traj.v_expect, atol=1e-12)

    def test_dim_guard(self, damping_model, v_linear, excited):
        with pytest.raises(ChainDimensionError):
            simulate_flow_expectation(
                damping_model, v_linear, NUMBER, excited,
                CollisionConfig(dt=0.01, steps=14, dim_guard=8192),
            )

    def test_supermartingale_on_certified_run(self, damping_model, damping_candidate, excited):
        cfg = CollisionConfig(dt=0.01, steps=10)
        traj = simulate_flow_expectation(damping_model, damping_candidate, SIGMA_Z, excited, cfg)
        # certified nonpositive drift: E[V] non-increasing up to tolerance
        assert np.all(np.diff(traj.v_expect) <= 1e-9)

    def test_ancilla_truncation_insensitivity(self, damping_model, damping_candidate, excited):
        dt = 0.01
        cfg1 = CollisionConfig(dt=dt, steps=8, ancilla_levels=1)
        cfg2 = CollisionConfig(dt=dt, steps=8, ancilla_levels=2, dim_guard=1 << 15)
        t1 = simulate_flow_expectation(damping_model, damping_candidate, SIGMA_Z, excited, cfg1)
        t2 = simulate_flow_expectation(damping_model, damping_candidate, SIGMA_Z, excited, cfg2)
        per_step = np.max(np.abs(t1.v_expect - t2.v_expect)) / cfg1.steps
        assert per_step <= 10.0 * dt**2


class TestMasterEvolve:
    def test_unitary_channel(self):
        h = 0.7 * SIGMA_X
        model = QsdeModel(hamiltonian=h, coupling=np.zeros((2, 2)))
        rho0 = QuantumState.from_vector(KET_E)
        t_grid = np.linspace(0.0, 1.0, 6)
        states = master_evolve(model, rho0, t_grid)
        for t, s in zip(t_grid, states):
            u = scipy.linalg.expm(-1j * h * t)
            assert np.allclose(s.rho, u @ rho0.rho @ adjoint(u), atol=1e-12)

    def test_amplitude_damping_closed_form(self, damping_model):
        rho0 = QuantumState.from_vector(KET_E)
        t_grid = np.linspace(0.0, 2.0, 9)
        states = master_evolve(damping_model, rho0, t_grid)
        for t, s in zip(t_grid, states):
            assert s.rho[0, 0].real == pytest.approx(np.exp(-GAMMA * t), abs=1e-12)
            assert abs(s.rho[0, 1]) <= 1e-13

    def test_trace_and_positivity_preserved(self):
        rng = np.random.default_rng(60)
        model = QsdeModel(hamiltonian=random_hermitian(rng, 3), coupling=rng.normal(size=(3, 3)))
        rho0 = QuantumState.maximally_mixed(3)
        states = master_evolve(model, rho0, np.linspace(0.0, 1.0, 5))
        for s in states:  # QuantumState construction enforces the invariants
            assert abs(np.trace(s.rho) - 1.0) <= 1e-12

    def test_liouvillian_is_trace_dual_of_flow_generator(self, damping_model):
        from qstab import flow_generator

        rng = np.random.default_rng(61)
        lv = liouvillian_matrix(damping_model)
        for _ in range(20):
            rho = random_hermitian(rng, 2)
            x = random_hermitian(rng, 2)
            drho = (lv @ rho.reshape(-1)).reshape(2, 2)
            lhs = np.trace(drho @ x)
            rhs = np.trace(rho @ flow_generator(damping_model, x))
            assert abs(lhs - rhs) <= 1e-12

    def test_collision_agrees_with_master_at_first_order(self, damping_model, v_linear, excited):
        dt, steps = 1e-2, 10
        coll = simulate_flow_expectation(
            damping_model, v_linear, NUMBER, excited, CollisionConfig(dt=dt, steps=steps)
        )
        oracle = master_flow_expectation(damping_model, v_linear, NUMBER, excited, coll.times)
        gap1 = np.max(np.abs(coll.v_expect - oracle.v_expect))
        coll2 = simulate_flow_expectation(
            damping_model, v_linear, NUMBER, excited,
            CollisionConfig(dt=dt / 2, steps=2 * steps, dim_guard=1 << 22),
        )
        oracle2 = master_flow_expectation(damping_model, v_linear, NUMBER, excited, coll2.times)
        gap2 = np.max(np.abs(coll2.v_expect - oracle2.v_expect))
        assert gap1 <= 0.05
        assert 1.5 <= gap1 / gap2 <= 2.5

    def test_master_rejects_nonscalar_theta(self, damping_model, excited):
        cand = LyapunovCandidate(terms=((1, 1, NUMBER),))
        with pytest.raises(InvalidCandidateError):
            master_flow_expectation(damping_model, cand, SIGMA_Z, excited, np.linspace(0, 1, 3))


class TestFiniteDifferenceDriftCheck:
    def test_trivial_model_zero(self, v_linear):
        model = QsdeModel(hamiltonian=np.zeros((2, 2)), coupling=np.zeros((2, 2)))
        psi = QuantumState.from_vector(np.array([0.6, 0.8]))
        report = finite_difference_drift_check(model, v_linear, SIGMA_Z, psi, CollisionConfig(dt=0.01, steps=1))
        assert report.analytic == pytest.approx(0.0, abs=1e-14)
        assert report.empirical == pytest.approx(0.0, abs=1e-12)
        assert report.order_ok

    def test_damping_number_drift(self, damping_model, v_linear, excited):
        report = finite_difference_drift_check(
            damping_model, v_linear, NUMBER, excited, CollisionConfig(dt=1e-3, steps=1)
        )
        assert report.analytic == pytest.approx(-GAMMA)
        assert report.empirical == pytest.approx(-GAMMA, abs=5e-3)
        assert report.order_ok

    def test_worked_square_candidate(self, damping_model, damping_candidate, excited):
        report = finite_difference_drift_check(
            damping_model, damping_candidate, SIGMA_Z, excited, CollisionConfig(dt=1e-2, steps=1)
        )
        assert report.analytic == pytest.approx(-4.0 * GAMMA)
        assert 1.5 <= report.ratio <= 2.5


class TestItoTableCheck:
    @pytest.mark.parametrize("levels", [1, 2])
    def test_all_entries_exact(self, levels):
        report = ito_table_check(ancilla_levels=levels, dt=1e-3)
        assert len(report.entries) == 16
        assert report.max_deviation <= 1e-14

    def test_nonzero_entry_is_da_dadag(self):
        report = ito_table_check(ancilla_levels=1, dt=1e-3)
        nonzero = {(e.left, e.right): e for e in report.entries if e.moment != 0.0}
        assert set(nonzero) == {("dA", "dA_dag"), ("dt", "dt")}
        assert nonzero[("dA", "dA_dag")].moment == pytest.approx(1e-3, abs=1e-18)

    def test_vacuum_moments(self):
        report = ito_table_check(ancilla_levels=2, dt=1e-2)
        by_pair = {(e.left, e.right): e for e in report.entries}
        assert by_pair[("dA_dag", "dA")].moment == 0.0
        assert by_pair[("dLambda", "dLambda")].moment == 0.0


class TestTrajectoryChecks:
    def make_traj(self, values, dt=0.1):
        values = np.asarray(values, dtype=float)
        return Trajectory(times=dt * np.arange(len(values)), v_expect=values, method="master")

    def test_exit_time_none_for_decreasing(self):
        traj = self.make_traj([1.0, 0.8, 0.5])
        assert exit_time_estimate(traj, epsilon=1.0) is None

    def test_exit_time_first_crossing(self):
        traj = self.make_traj([1.0, 2.0, 3.0])
        assert exit_time_estimate(traj, epsilon=1.5) == pytest.approx(traj.times[1])

    def test_transit_time_exponential(self):
        t = np.linspace(0.0, 3.0, 3001)
        traj = Trajectory(times=t, v_expect=np.exp(-GAMMA * t), method="master")
        report = transit_time_check(traj, level_hi=1.0, level_lo=0.5, b=GAMMA / 2)
        assert report.applicable
        assert report.measured == pytest.approx(np.log(2.0) / GAMMA, abs=2e-3)
        assert report.bound == pytest.approx(2.0 / GAMMA)
        assert report.ok

    def test_transit_time_bad_bound_fails(self):
        t = np.linspace(0.0, 3.0, 3001)
        traj = Trajectory(times=t, v_expect=np.exp(-GAMMA * t), method="master")
        report = transit_time_check(traj, level_hi=1.0, level_lo=0.5, b=10.0 * GAMMA)
        assert report.applicable and not report.ok

    def test_transit_not_applicable_for_flat(self):
        traj = self.make_traj([2.0, 2.0, 2.0])
        assert not transit_time_check(traj, level_hi=1.0, level_lo=0.5, b=1.0).applicable

    def test_envelope_exact_rate(self):
        t = np.linspace(0.0, 1.0, 101)
        traj = Trajectory(times=t, v_expect=np.exp(-GAMMA * t), method="master")
        report = envelope_check(traj, a=GAMMA, v0=1.0)
        assert report.ok
        assert report.max_ratio == pytest.approx(1.0)

    def test_envelope_overclaimed_rate_fails(self):
        t = np.linspace(0.0, 1.0, 101)
        traj = Trajectory(times=t, v_expect=np.exp(-GAMMA * t), method="master")
        assert not envelope_check(traj, a=2 * GAMMA, v0=1.0).ok

    def test_envelope_on_collision_run(self, damping_model, damping_candidate, excited):
        traj = simulate_flow_expectation(
            damping_model, damping_candidate, SIGMA_Z, excited, CollisionConfig(dt=1e-2, steps=10)
        )
        assert envelope_check(traj, a=GAMMA / 2, v0=traj.v_expect[0]).ok

    def test_trajectory_validation(self):
        with pytest.raises(ValueError):
            Trajectory(times=np.array([0.0, 0.0]), v_expect=np.array([1.0, 1.0]), method="master")
        with pytest.raises(ValueError):
            Trajectory(times=np.array([0.1, 0.2]), v_expect=np.array([1.0, 1.0]), method="master")

    def test_parameter_validation(self):
        traj = self.make_traj([1.0, 0.5])
        with pytest.raises(ValueError):
            transit_time_check(traj, level_hi=0.5, level_lo=1.0, b=1.0)
        with pytest.raises(ValueError):
            transit_time_check(traj, level_hi=1.0, level_lo=0.5, b=0.0)
        with pytest.raises(ValueError):
            envelope_check(traj, a=0.0, v0=1.0)
        with pytest.raises(ValueError):
            envelope_check(traj, a=1.0, v0=-1.0)


def test_vacuum_noise_cancellation(damping_model, damping_candidate, excited):
    # One step must agree with the drift to second order: the noise
    # contributions vanish in vacuum expectation.
    dt = 1e-3
    traj = simulate_flow_expectation(
        damping_model, damping_candidate, SIGMA_Z, excited, CollisionConfig(dt=dt, steps=1)
    )
    from qstab import flow_ito_coefficients

    drift = flow_ito_coefficients(damping_model, damping_candidate, SIGMA_Z).drift
    psi = excited.pure_vector()
    analytic = np.vdot(psi, drift @ psi).real
    assert abs(traj.v_expect[1] - traj.v_expect[0] - dt * analytic) <= 10.0 * dt**2
