import numpy as np
import pytest

from twochan import (
    DivergedError,
    InadmissibleError,
    InvalidParamsError,
    NotConvergedError,
    ResolventSingularError,
    SolverConfig,
    TwoChannelHamiltonian,
    admissibility_bound,
    check_admissibility,
    conjugate_solution,
    fixed_point_map,
    hilbert_schmidt_norm,
    operator_norm,
    riccati_residual,
    solution_from_q,
    solve,
)

Q_SCALAR = 2.0 - np.sqrt(5.0)


def scalar_solution_q(a1, a2, b):
    # for 1x1 blocks the equation reads b q^2 + (a1 - a2) q - b = 0; the root
    # inside the unit disk is ((a2 - a1) - sqrt((a2 - a1)^2 + 4 b^2)) / (2 b)
    d = a2 - a1
    return (d - np.sqrt(d * d + 4.0 * b * b)) / (2.0 * b)


class TestAdmissibility:
    def test_scalar_unit_ball(self, scalar_h):
        admissible, bound = check_admissibility(scalar_h, 1.0)
        assert bound == pytest.approx(1.0)
        assert admissible

    def test_bound_formula(self):
        # min(1/(1+delta), delta/(1+delta^2)) switches branches at delta = 1
        assert admissibility_bound(2.0, 1.0) == pytest.approx(1.0)
        assert admissibility_bound(2.0, 2.0) == pytest.approx(2.0 * min(1 / 3, 2 / 5))
        assert admissibility_bound(2.0, 0.5) == pytest.approx(2.0 * min(2 / 3, 0.4))

    def test_uncoupled_always_admissible(self, uncoupled_h):
        for delta in (0.25, 1.0, 4.0):
            admissible, _ = check_admissibility(uncoupled_h, delta)
            assert admissible

    def test_inadmissible_when_bound_exceeded(self):
        h = TwoChannelHamiltonian(a1=[[0.0]], a2=[[2.0]], b12=[[0.7]])
        admissible, bound = check_admissibility(h, 2.0)
        assert bound == pytest.approx(2.0 / 3.0)
        assert not admissible

    def test_zero_gap_never_admissible(self):
        h = TwoChannelHamiltonian(a1=[[1.0]], a2=[[1.0]], b12=[[1e-8]])
        admissible, bound = check_admissibility(h, 1.0)
        assert bound == 0.0
        assert not admissible

    def test_delta_validation(self):
        with pytest.raises(InvalidParamsError):
            admissibility_bound(1.0, 0.0)


class TestFixedPointMap:
    def test_zero_coupling_maps_to_zero(self, uncoupled_h):
        q = fixed_point_map(uncoupled_h, 1, np.zeros((2, 2)))
        np.testing.assert_allclose(q, np.zeros((2, 2)))

    def test_scalar_first_step(self, scalar_h):
        # phi(0) = b / (a1 - a2) = -1/4
        q = fixed_point_map(scalar_h, 1, np.zeros((1, 1)))
        np.testing.assert_allclose(q, [[-0.25]], atol=1e-15)

    def test_scalar_fixed_point(self, scalar_h):
        q = np.array([[Q_SCALAR]], dtype=complex)
        np.testing.assert_allclose(fixed_point_map(scalar_h, 1, q), q, atol=1e-14)

    def test_shape_validation(self, random_h):
        with pytest.raises(InvalidParamsError):
            fixed_point_map(random_h, 1, np.zeros((3, 3)))

    def test_singular_shift_raises(self, scalar_h):
        # q = 4 puts the shifted channel matrix exactly on the spectral point 2
        with pytest.raises(ResolventSingularError) as excinfo:
            fixed_point_map(scalar_h, 1, np.array([[4.0]]))
        assert excinfo.value.mu == pytest.approx(2.0)


class TestSolve:
    def test_zero_coupling_single_iteration(self, uncoupled_h):
        sol = solve(uncoupled_h, 1)
        np.testing.assert_allclose(sol.q, np.zeros((2, 2)))
        assert sol.iterations_used == 1
        assert sol.fixed_point_residual == 0.0
        assert sol.riccati_residual == 0.0
        assert sol.admissible

    def test_scalar_closed_form(self, scalar_h):
        sol = solve(scalar_h, 1)
        assert abs(sol.q[0, 0] - Q_SCALAR) <= 1e-12
        assert sol.q_operator_norm == pytest.approx(abs(Q_SCALAR), abs=1e-12)
        assert sol.riccati_residual <= 1e-12

    def test_scalar_family_closed_form(self):
        for a1, a2, b in [(0.0, 2.0, 0.5), (-1.0, 1.5, 0.3), (0.5, 3.5, 0.9)]:
            h = TwoChannelHamiltonian(a1=[[a1]], a2=[[a2]], b12=[[b]])
            sol = solve(h, 1)
            assert abs(sol.q[0, 0] - scalar_solution_q(a1, a2, b)) <= 1e-12

    def test_channel_two_direct(self, scalar_h):
        sol = solve(scalar_h, 2)
        # the channel-2 block is the negative adjoint of the channel-1 one
        assert abs(sol.q[0, 0] + Q_SCALAR) <= 1e-12

    def test_random_instance_within_tolerances(self, random_h):
        sol = solve(random_h, 1)
        b_scale = max(1.0, hilbert_schmidt_norm(random_h.b12))
        assert sol.iterations_used <= 500
        assert sol.fixed_point_residual <= 1e-12 * b_scale
        assert sol.riccati_residual <= 1e-10 * b_scale
        assert sol.q_operator_norm <= 1.0 + 1e-12
        assert np.all(sol.iterate_norms <= 1.0 + 1e-12)

    def test_riccati_residual_is_independent_oracle(self, random_h):
        sol = solve(random_h, 1)
        direct = hilbert_schmidt_norm(
            sol.q @ random_h.a1
            - random_h.a2 @ sol.q
            + sol.q @ random_h.b12 @ sol.q
            - random_h.b12.conj().T
        )
        assert direct == pytest.approx(sol.riccati_residual, abs=1e-15)

    def test_step_norms_monotone_while_contracting(self, small_ensemble):
        for h in small_ensemble:
            sol = solve(h, 1)
            steps = sol.step_norms
            # contraction makes successive steps shrink until roundoff floor
            meaningful = steps[steps > 1e-13]
            assert np.all(np.diff(meaningful) < 0.0)

    def test_restart_reaches_same_fixed_point(self, random_h):
        base = solve(random_h, 1)
        rng = np.random.default_rng(9)
        q0 = rng.standard_normal((random_h.n2, random_h.n1)) + 1j * rng.standard_normal(
            (random_h.n2, random_h.n1)
        )
        q0 *= 0.8 / operator_norm(q0)
        restarted = solve(random_h, 1, initial=q0)
        assert hilbert_schmidt_norm(restarted.q - base.q) <= 1e-8

    def test_inadmissible_refused(self):
        h = TwoChannelHamiltonian(a1=[[0.0]], a2=[[2.0]], b12=[[1.5]])
        with pytest.raises(InadmissibleError):
            solve(h, 1)

    def test_inadmissible_override_marks_solution(self):
        h = TwoChannelHamiltonian(a1=[[0.0]], a2=[[2.0]], b12=[[1.5]])
        sol = solve(h, 1, allow_inadmissible=True)
        assert not sol.admissible
        assert sol.riccati_residual <= 1e-10

    def test_not_converged(self, scalar_h):
        with pytest.raises(NotConvergedError) as excinfo:
            solve(scalar_h, 1, SolverConfig(max_iterations=1))
        assert excinfo.value.iterations == 1

    def test_diverged(self):
        h = TwoChannelHamiltonian(a1=[[0.0]], a2=[[1.0]], b12=[[5.0]])
        with pytest.raises(DivergedError):
            solve(h, 1, SolverConfig(divergence_guard=2.0), allow_inadmissible=True)

    def test_config_validation(self):
        with pytest.raises(InvalidParamsError):
            SolverConfig(delta=0.0)
        with pytest.raises(InvalidParamsError):
            SolverConfig(max_iterations=0)
        with pytest.raises(InvalidParamsError):
            SolverConfig(residual_tol=-1.0)
        with pytest.raises(InvalidParamsError):
            SolverConfig(divergence_guard=0.0)


class TestConjugateSolution:
    def test_scalar_values(self, scalar_h):
        sol = solve(scalar_h, 1)
        conj = conjugate_solution(scalar_h, sol)
        assert conj.alpha == 2
        assert abs(conj.q[0, 0] - (np.sqrt(5.0) - 2.0)) <= 1e-12
        assert conj.iterations_used == sol.iterations_used

    def test_negative_adjoint_relation(self, random_h):
        sol = solve(random_h, 1)
        conj = conjugate_solution(random_h, sol)
        np.testing.assert_array_equal(conj.q, -sol.q.conj().T)

    def test_residuals_recomputed_and_small(self, random_h):
        sol = solve(random_h, 1)
        conj = conjugate_solution(random_h, sol)
        # the swapped-role residual is the adjoint of the original one
        assert conj.riccati_residual <= 10.0 * sol.riccati_residual + 1e-15
        assert conj.fixed_point_residual <= 100.0 * sol.fixed_point_residual + 1e-14

    def test_involution(self, random_h):
        sol = solve(random_h, 1)
        back = conjugate_solution(random_h, conjugate_solution(random_h, sol))
        np.testing.assert_array_equal(back.q, sol.q)
        assert back.alpha == 1

    def test_matches_independent_solve(self, random_h):
        conj = conjugate_solution(random_h, solve(random_h, 1))
        direct = solve(random_h, 2)
        assert hilbert_schmidt_norm(conj.q - direct.q) <= 1e-9


class TestSolutionFromQ:
    def test_matches_solver_diagnostics(self, random_h):
        sol = solve(random_h, 1)
        audited = solution_from_q(random_h, 1, sol.q)
        assert audited.iterations_used == 0
        assert audited.fixed_point_residual == pytest.approx(sol.fixed_point_residual, abs=1e-13)
        assert audited.riccati_residual == pytest.approx(sol.riccati_residual, abs=1e-13)

    def test_flags_corrupted_block(self, random_h):
        sol = solve(random_h, 1)
        corrupted = np.array(sol.q) + 1e-3
        audited = solution_from_q(random_h, 1, corrupted)
        assert audited.riccati_residual > 1e-4

    def test_riccati_residual_helper(self, scalar_h):
        assert riccati_residual(scalar_h, 1, [[Q_SCALAR]]) <= 1e-14
        assert riccati_residual(scalar_h, 1, [[0.0]]) == pytest.approx(0.5)
