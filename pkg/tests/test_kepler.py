"""Kepler system tests: projection identities, bracket relations, level
surfaces, and conservation along integrated orbits."""

import numpy as np
import pytest

from degint.errors import SingularChartPoint
from degint.kepler import (
    LENZ_LENZ_SIGN,
    QUADRATIC_RELATION_SIGN,
    EnergyRegime,
    KeplerState,
    classify_level_surface,
    kepler_chart,
    kepler_observables,
    orbit_conservation_report,
    project_to_p5,
    radial_period,
)
from degint.poisson import bracket

RNG = np.random.default_rng(4)

EPS = np.zeros((3, 3, 3))
EPS[0, 1, 2] = EPS[1, 2, 0] = EPS[2, 0, 1] = 1
EPS[0, 2, 1] = EPS[2, 1, 0] = EPS[1, 0, 2] = -1


def random_state(gamma=1.0, bound=None):
    """Sample a generic non-collision state; bound=True forces E < 0."""
    while True:
        p = RNG.normal(size=3)
        q = RNG.normal(size=3)
        if np.linalg.norm(q) < 0.3:
            continue
        s = KeplerState(p=p, q=q, gamma=gamma)
        E = project_to_p5(s).H
        if bound is None or (E < -0.05 if bound else E > 0.05):
            return s


class TestProjection:
    def test_circular_orbit(self):
        s = KeplerState(p=[0.0, 1.0, 0.0], q=[1.0, 0.0, 0.0], gamma=1.0)
        pt = project_to_p5(s)
        assert np.allclose(pt.M, [0.0, 0.0, -1.0])
        assert np.abs(pt.A).max() < 1e-15
        assert pt.H == pytest.approx(-0.5)

    def test_radial_rest_state(self):
        s = KeplerState(p=[0.0, 0.0, 0.0], q=[1.0, 0.0, 0.0], gamma=1.0)
        pt = project_to_p5(s)
        assert np.abs(pt.M).max() == 0.0
        assert np.allclose(pt.A, [1.0, 0.0, 0.0])
        assert pt.H == pytest.approx(-1.0)

    def test_orthogonality_identity(self):
        """(M, A) = 0 as an algebraic identity."""
        for _ in range(50):
            pt = project_to_p5(random_state(gamma=RNG.uniform(0.5, 2.0)))
            assert abs(pt.M @ pt.A) < 1e-12

    def test_quadratic_relation_with_frozen_sign(self):
        """(A, A) = gamma^2 + s 2 (M, M) H with the bootstrap sign s."""
        for _ in range(50):
            gamma = RNG.uniform(0.5, 2.0)
            pt = project_to_p5(random_state(gamma=gamma))
            lhs = pt.A @ pt.A
            rhs = gamma ** 2 + QUADRATIC_RELATION_SIGN * 2.0 * (pt.M @ pt.M) * pt.H
            assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(lhs))

    def test_bootstrap_recovers_frozen_signs(self):
        """Recompute both sign constants by direct expansion at one point."""
        gamma = 1.3
        s = random_state(gamma=gamma)
        pt = project_to_p5(s)
        lhs = pt.A @ pt.A - gamma ** 2
        rhs = 2.0 * (pt.M @ pt.M) * pt.H
        assert np.sign(lhs / rhs) == QUADRATIC_RELATION_SIGN

        chart = kepler_chart()
        obs = kepler_observables(gamma)
        z = s.as_point()
        a1a2 = bracket(chart, obs[3], obs[4], z)
        sigma = np.real(a1a2) / (2.0 * pt.H * pt.M[2])
        assert np.sign(sigma) == LENZ_LENZ_SIGN

    def test_collision_rejected(self):
        with pytest.raises(SingularChartPoint):
            KeplerState(p=[1.0, 0.0, 0.0], q=[0.0, 0.0, 0.0], gamma=1.0)


class TestBracketRelations:
    def test_momentum_algebra(self):
        """{M_i, M_j} = eps_ijk M_k at random states."""
        gamma = 1.0
        chart = kepler_chart()
        obs = kepler_observables(gamma)
        for _ in range(10):
            s = random_state(gamma=gamma)
            z = s.as_point()
            pt = project_to_p5(s)
            for i in range(3):
                for j in range(3):
                    want = sum(EPS[i, j, k] * pt.M[k] for k in range(3))
                    got = bracket(chart, obs[i], obs[j], z)
                    assert abs(got - want) < 1e-6

    def test_momentum_lenz_algebra(self):
        """{M_i, A_j} = eps_ijk A_k."""
        gamma = 1.2
        chart = kepler_chart()
        obs = kepler_observables(gamma)
        for _ in range(10):
            s = random_state(gamma=gamma)
            z = s.as_point()
            pt = project_to_p5(s)
            for i in range(3):
                for j in range(3):
                    want = sum(EPS[i, j, k] * pt.A[k] for k in range(3))
                    got = bracket(chart, obs[i], obs[1 * 3 + j], z)
                    assert abs(got - want) < 1e-6

    def test_lenz_lenz_algebra_with_frozen_sign(self):
        """{A_i, A_j} = sigma 2 H eps_ijk M_k with the bootstrap sign."""
        gamma = 0.8
        chart = kepler_chart()
        obs = kepler_observables(gamma)
        for _ in range(10):
            s = random_state(gamma=gamma)
            z = s.as_point()
            pt = project_to_p5(s)
            for i in range(3):
                for j in range(3):
                    want = (LENZ_LENZ_SIGN * 2.0 * pt.H
                            * sum(EPS[i, j, k] * pt.M[k] for k in range(3)))
                    got = bracket(chart, obs[3 + i], obs[3 + j], z)
                    assert abs(got - want) < 1e-6

    def test_hamiltonian_commutes_with_conserved_set(self):
        """{H, M_i} = {H, A_i} = 0 at 100 random states."""
        gamma = 1.0
        chart = kepler_chart()
        obs = kepler_observables(gamma)
        H = obs[-1]
        for _ in range(100):
            z = random_state(gamma=gamma).as_point()
            for o in obs[:6]:
                assert abs(bracket(chart, H, o, z)) < 1e-6


class TestLevelSurfaces:
    def test_negative_energy_sphere_radius(self):
        leaf = classify_level_surface(-0.5, gamma=1.0)
        assert leaf.regime is EnergyRegime.NEGATIVE_ENERGY
        assert leaf.sphere_radius == pytest.approx(1.0)

    def test_zero_energy_radius_is_gamma(self):
        leaf = classify_level_surface(0.0, gamma=2.0)
        assert leaf.regime is EnergyRegime.ZERO_ENERGY
        assert leaf.sphere_radius == pytest.approx(2.0)
        # on the zero leaf (A, A) = gamma^2 for circular-degenerate data:
        # directly from the quadratic relation at H = 0
        s = random_state(gamma=2.0)
        pt = project_to_p5(s)
        assert (pt.A @ pt.A - 4.0) == pytest.approx(
            QUADRATIC_RELATION_SIGN * 2 * (pt.M @ pt.M) * pt.H, rel=1e-9)

    def test_positive_energy(self):
        leaf = classify_level_surface(1.0)
        assert leaf.regime is EnergyRegime.POSITIVE_ENERGY
        assert leaf.sphere_radius is None

    def test_hyperboloid_casimir_constant(self):
        """Scattering leaf: (A, A) - 2E (M, M) = gamma^2 for every state."""
        gamma = 1.4
        for _ in range(20):
            s = random_state(gamma=gamma, bound=False)
            pt = project_to_p5(s)
            assert (pt.A @ pt.A - 2 * pt.H * (pt.M @ pt.M)
                    ) == pytest.approx(gamma ** 2, rel=1e-9)

    def test_sphere_factor_radii_constant_on_leaf(self):
        """L = M - A/sqrt(2|E|) and R = M + A/sqrt(2|E|) have squared norms
        gamma^2/(2|E|) for every state at energy E < 0."""
        gamma = 1.0
        for _ in range(20):
            s = random_state(gamma=gamma, bound=True)
            pt = project_to_p5(s)
            scale = np.sqrt(2.0 * abs(pt.H))
            for sign in (-1.0, 1.0):
                v = pt.M + sign * pt.A / scale
                assert v @ v == pytest.approx(gamma ** 2 / (2 * abs(pt.H)), rel=1e-9)


class TestOrbits:
    def test_circular_orbit_conservation(self):
        s = KeplerState(p=[0.0, 1.0, 0.0], q=[1.0, 0.0, 0.0], gamma=1.0)
        rep = orbit_conservation_report(s, t_max=2 * np.pi, tol=1e-10)
        assert rep.max_abs_drift.max() < 1e-8
        assert not any(f == "collision" for f in rep.flags)

    def test_elliptical_radial_period(self):
        """Detected radial period vs 2 pi gamma / (2|E|)^{3/2}; the formula
        itself was verified against an independent leapfrog simulation."""
        s = KeplerState(p=[0.0, 0.8, 0.0], q=[1.0, 0.0, 0.0], gamma=1.0)
        E = project_to_p5(s).H
        T_formula = 2 * np.pi * s.gamma / (2 * abs(E)) ** 1.5
        T = radial_period(s, t_max=3 * T_formula)
        assert T == pytest.approx(T_formula, rel=1e-6)

    def test_circular_orbit_closes_after_one_period(self):
        """Unit circular orbit has period 2 pi; the adaptive trajectory must
        return to its start within 1e-8."""
        from degint.kepler import integrate_orbit
        s = KeplerState(p=[0.0, 1.0, 0.0], q=[1.0, 0.0, 0.0], gamma=1.0)
        traj = integrate_orbit(s, t_max=2 * np.pi, tol=1e-10)
        assert np.abs(traj.final - traj.states[0]).max() < 1e-8

    def test_scattering_state_conservation(self):
        s = KeplerState(p=[0.0, 1.6, 0.0], q=[1.0, 0.2, 0.0], gamma=1.0)
        assert project_to_p5(s).H > 0
        rep = orbit_conservation_report(s, t_max=10.0, tol=1e-10)
        assert rep.max_abs_drift.max() < 1e-8

    def test_sign_constants_recorded(self):
        s = KeplerState(p=[0.0, 1.0, 0.0], q=[1.0, 0.0, 0.0], gamma=1.0)
        rep = orbit_conservation_report(s, t_max=0.5, tol=1e-9)
        assert "quadratic-relation-sign:+1" in rep.flags
        assert "lenz-lenz-sign:-1" in rep.flags
