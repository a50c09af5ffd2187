import numpy as np
import pytest

from psitruss import (LinearLaw, Metric, ModelingError, PhasePoint,
                      PowerLaw, TrussProblem, BoundaryConditions,
                      assemble_internal_force, assemble_k, generate_truss,
                      project_e, ps_distance, solve_eta, solve_u,
                      update_stress, single_bar_problem)
from kkt_oracle import kkt_project_e


def random_point(rng, n, eps_scale=1e-3, sig_scale=1e7):
    return PhasePoint(eps_scale * rng.standard_normal(n),
                      sig_scale * rng.standard_normal(n))


class TestAssembleK:
    def test_single_bar_pattern(self):
        nodes = [(0.0, 0.0), (2.0, 0.0)]
        bcs = BoundaryConditions([0, 1, 3], [0.0, 0.0, 0.0], np.zeros(4))
        problem = TrussProblem(nodes, [(0, 1)], [3.0], LinearLaw(y=1.0), bcs)
        c = 5.0
        fact = assemble_k(problem, c)
        k = fact.k.toarray()
        # w * B^T C B with w = A*L and B = [-1/L, 0, 1/L, 0] -> A*C/L blocks
        coef = 3.0 * c / 2.0
        expected = coef * np.array([[1, 0, -1, 0], [0, 0, 0, 0],
                                    [-1, 0, 1, 0], [0, 0, 0, 0]], dtype=float)
        np.testing.assert_allclose(k, expected, rtol=1e-15)

    def test_symmetry_random_truss(self):
        problem = generate_truss(2, 5, law=LinearLaw(y=1e9), load=-100.0)
        k = assemble_k(problem, 1e9).k
        asym = abs(k - k.T).max()
        assert asym <= 1e-9 * abs(k).max()

    def test_positive_semidefinite_with_rigid_kernel(self, rng):
        problem = generate_truss(2, 3, law=LinearLaw(y=1.0), load=-1.0)
        k = assemble_k(problem, 1.0).k.toarray()
        for _ in range(100):
            x = rng.standard_normal(problem.n_dofs)
            assert x @ k @ x >= -1e-12 * (x @ x)
        translation = np.tile([1.0, -2.0], problem.n_nodes)
        assert translation @ k @ translation == pytest.approx(0.0, abs=1e-12)

    def test_rigid_modes_raise_modeling_error(self):
        nodes = [(0.0, 0.0), (1.0, 0.0)]
        bcs = BoundaryConditions([0], [0.0], np.zeros(4))
        problem = TrussProblem(nodes, [(0, 1)], [1.0], LinearLaw(y=1.0), bcs)
        with pytest.raises(ModelingError):
            assemble_k(problem, 1.0)

    def test_rejects_nonpositive_constant(self, one_bar_problem):
        with pytest.raises(ValueError):
            assemble_k(one_bar_problem, 0.0)


class TestEtaAndStress:
    def test_equilibrated_stress_gives_zero_eta(self, braced_quad_problem, rng):
        fact = assemble_k(braced_quad_problem, 1e8)
        # build an equilibrated sigma by projecting something first
        z = random_point(rng, braced_quad_problem.n_elements)
        z_e, _, _ = project_e(z, fact)
        eta = solve_eta(fact, z_e.stress)
        assert np.linalg.norm(eta) <= 1e-10 * (1 + np.linalg.norm(z_e.stress))

    def test_one_element_closed_form(self, one_bar_problem):
        c = 2.0
        fact = assemble_k(one_bar_problem, c)
        sig = np.array([0.25])
        eta = solve_eta(fact, sig)
        length = one_bar_problem.lengths[0]
        # eta at the loaded end equals (L/C) (F/A - sigma')
        assert eta[2] == pytest.approx(length / c * (1.0 - 0.25), rel=1e-12)
        assert np.all(eta[fact.prescribed] == 0.0)
        sigma = update_stress(fact, sig, eta)
        assert sigma[0] == pytest.approx(1.0, rel=1e-12)

    def test_eta_linear_in_imbalance(self, triangle_problem, rng):
        fact = assemble_k(triangle_problem, 1e9)
        s = 1e6 * rng.standard_normal(3)
        base = solve_eta(fact, np.zeros(3))
        eta = solve_eta(fact, s)
        # eta(s) = eta(0) - K^-1 F_int(s): affine; check scaling of the force
        forces3 = triangle_problem.bcs.forces * 3.0
        scaled_problem = TrussProblem(
            triangle_problem.nodes, triangle_problem.connectivity,
            triangle_problem.areas, triangle_problem.law,
            BoundaryConditions(triangle_problem.bcs.prescribed_dofs,
                               triangle_problem.bcs.prescribed_values,
                               forces3))
        fact3 = assemble_k(scaled_problem, 1e9)
        eta3 = solve_eta(fact3, np.zeros(3))
        np.testing.assert_allclose(eta3, 3.0 * base, rtol=1e-12, atol=1e-18)
        assert eta.shape == base.shape

    def test_update_with_zero_eta_is_identity(self, triangle_problem, rng):
        fact = assemble_k(triangle_problem, 1e9)
        s = rng.standard_normal(3)
        np.testing.assert_array_equal(update_stress(fact, s, np.zeros(6)), s)

    def test_post_update_equilibrium(self, rng):
        problem = generate_truss(2, 4, law=PowerLaw(y0=2e11, p=1e-4),
                                 load=-1200.0)
        fact = assemble_k(problem, 0.3 * 2e11)
        free = fact.free
        f_ext = problem.bcs.forces
        for _ in range(20):
            sig = 1e7 * rng.standard_normal(problem.n_elements)
            eta = solve_eta(fact, sig)
            sigma = update_stress(fact, sig, eta)
            resid = assemble_internal_force(problem, sigma)[free] - f_ext[free]
            assert np.linalg.norm(resid) <= 1e-10 * (1 + np.linalg.norm(f_ext))


class TestSolveU:
    def test_recovers_compatible_field(self, braced_quad_problem, rng):
        fact = assemble_k(braced_quad_problem, 1e8)
        u_field = np.zeros(braced_quad_problem.n_dofs)
        u_field[fact.free] = 1e-3 * rng.standard_normal(fact.free.size)
        eps = fact.b_matrix @ u_field
        u = solve_u(fact, eps)
        np.testing.assert_allclose(u, u_field, rtol=1e-9, atol=1e-15)

    def test_one_element_free_end(self, one_bar_problem):
        fact = assemble_k(one_bar_problem, 3.0)
        u = solve_u(fact, np.array([0.07]))
        length = one_bar_problem.lengths[0]
        assert u[2] == pytest.approx(length * 0.07, rel=1e-13)
        eps = fact.b_matrix @ u
        assert eps[0] == pytest.approx(0.07, rel=1e-13)

    def test_zero_everything(self, triangle_problem):
        fact = assemble_k(triangle_problem, 1e9)
        np.testing.assert_array_equal(solve_u(fact, np.zeros(3)),
                                      np.zeros(6))

    def test_prescribed_values_enforced(self):
        problem = generate_truss(2, 3, law=LinearLaw(y=1e9), settle=0.05)
        fact = assemble_k(problem, 1e9)
        u = solve_u(fact, np.zeros(problem.n_elements))
        np.testing.assert_array_equal(u[fact.prescribed],
                                      fact.prescribed_values)


class TestProjectE:
    def test_fixed_point(self, braced_quad_problem, rng):
        fact = assemble_k(braced_quad_problem, 1e8)
        z = random_point(rng, 6)
        z_e, _, _ = project_e(z, fact)
        z_again, _, _ = project_e(z_e, fact)
        m = Metric(c=1e8, volumes=braced_quad_problem.volumes)
        scale = max(ps_distance(z, z_e, m), 1e-30)
        assert ps_distance(z_e, z_again, m) <= 1e-12 * scale

    def test_one_element_hand_values(self, one_bar_problem):
        fact = assemble_k(one_bar_problem, 1.0)
        z = PhasePoint([0.2], [0.7])
        z_e, u, eta = project_e(z, fact)
        assert z_e.strain[0] == pytest.approx(0.2, rel=1e-14)
        assert z_e.stress[0] == pytest.approx(1.0, rel=1e-14)

    def test_matches_kkt_oracle(self, one_bar_problem, triangle_problem,
                                braced_quad_problem, rng):
        for problem, c in ((one_bar_problem, 1.0), (triangle_problem, 1e9),
                           (braced_quad_problem, 7e7)):
            fact = assemble_k(problem, c)
            m = Metric(c=c, volumes=problem.volumes)
            for _ in range(25):
                z = random_point(rng, problem.n_elements,
                                 sig_scale=c * 1e-3)
                z_e, _, _ = project_e(z, fact)
                z_kkt, _ = kkt_project_e(problem, c, z)
                ref = max(ps_distance(z, z_kkt, m), 1e-30)
                assert ps_distance(z_e, z_kkt, m) <= 1e-8 * ref

    def test_nonexpansive(self, braced_quad_problem, rng):
        c = 7e7
        fact = assemble_k(braced_quad_problem, c)
        m = Metric(c=c, volumes=braced_quad_problem.volumes)
        for _ in range(1000):
            z1 = random_point(rng, 6, sig_scale=c * 1e-3)
            z2 = random_point(rng, 6, sig_scale=c * 1e-3)
            p1, _, _ = project_e(z1, fact)
            p2, _, _ = project_e(z2, fact)
            assert ps_distance(p1, p2, m) <= \
                ps_distance(z1, z2, m) * (1.0 + 1e-10)
