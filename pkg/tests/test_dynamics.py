import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from core.dynamics import (
    ForceProfile, TimeDependentHamiltonian, Trajectory, affine_flow, evolve_kernel, force_integrals,
    forced_flow, hamiltonian_forced, ho_flow, integrate_bracket_ode, interaction_evolve,
    max_coefficient_error, periodic_force_integrals, resonance_amplitude, resonance_bound,
)
from core.parser import parse_symbol
from core.states import GaussianKernel, coherent_kernel, eval_state
from core.symbols import Symbol, hamiltonian_ho, pbracket, pmechanise
from utils.exception import DegreeCapExceeded, DimensionMismatchError, PreconditionError

from .conftest import small_symbols


class TestForceProfile:
    def test_values(self):
        assert ForceProfile.zero()(3.0) == 0.0
        assert ForceProfile.constant(2.0)(5.0) == 2.0
        assert ForceProfile.periodic(2.0, 1.0)(math.pi) == pytest.approx(-2.0)

    def test_tabulated_interpolates_and_holds(self):
        z = ForceProfile.tabulated([0.0, 1.0, 2.0], [0.0, 2.0, 0.0])
        assert z(0.5) == 1.0
        assert z(-1.0) == 0.0
        assert z(3.0) == 0.0
        assert z.breakpoints(0.0, 2.0) == [1.0]

    def test_is_zero(self):
        assert ForceProfile.zero().is_zero
        assert ForceProfile.periodic(0.0, 2.0).is_zero
        assert ForceProfile.tabulated([0, 1], [0, 0]).is_zero
        assert not ForceProfile.constant(1.0).is_zero

    @pytest.mark.parametrize("build", [
        lambda: ForceProfile.periodic(1.0, 0.0),
        lambda: ForceProfile.tabulated([0.0], [1.0]),
        lambda: ForceProfile.tabulated([0.0, 0.0], [1.0, 2.0]),
        lambda: ForceProfile.constant(math.inf),
    ])
    def test_invalid(self, build):
        with pytest.raises(PreconditionError):
            build()


class TestTrajectory:
    def test_iteration(self, q, p):
        traj = Trajectory((0, 1), (q, p))
        assert list(traj) == [(0.0, q), (1.0, p)]
        assert traj.final == p
        assert len(traj) == 2

    def test_times_must_increase(self, q):
        with pytest.raises(PreconditionError):
            Trajectory((0, 0), (q, q))

    def test_lengths_must_match(self, q):
        with pytest.raises(DimensionMismatchError):
            Trajectory((0, 1), (q,))

    def test_hamiltonian_needs_terms(self):
        with pytest.raises(PreconditionError):
            TimeDependentHamiltonian(())


class TestHoFlow:
    def test_quarter_period_cycle(self, q, p):
        quarter = math.pi / 2
        assert ho_flow(q, quarter) == p
        assert ho_flow(p, quarter) == -q
        assert ho_flow(q, 2 * quarter) == -q
        assert ho_flow(q, 4 * quarter) == q

    def test_mass_and_frequency(self, q, p):
        f = ho_flow(p, math.pi / 4, m=2.0, omega=2.0)
        assert f == -4 * q

    def test_zero_time_is_identity(self):
        f = parse_symbol("q^2*p - 3*hbar*p + 1")
        assert ho_flow(f, 0.0) == f

    def test_energy_is_conserved(self):
        H = hamiltonian_ho(2, 3)
        assert max_coefficient_error(ho_flow(H, 0.7, 2, 3), H) < 1e-14

    @given(small_symbols(2), small_symbols(2), st.floats(-3.0, 3.0))
    @settings(max_examples=25, deadline=None)
    def test_bracket_is_preserved(self, f, g, t):
        lhs = ho_flow(pbracket(f, g), t)
        rhs = pbracket(ho_flow(f, t), ho_flow(g, t))
        assert max_coefficient_error(lhs, rhs) < 1e-9

    def test_rejects_bad_frequency(self, q):
        with pytest.raises(PreconditionError):
            ho_flow(q, 1.0, omega=0)


class TestForceIntegrals:
    def test_full_period(self):
        alpha, beta = force_integrals(ForceProfile.periodic(3.0, 2.0), 2.0, 0.0, math.pi)
        assert alpha == pytest.approx(3.0 * math.pi / 2)
        assert beta == pytest.approx(0.0, abs=1e-12)

    def test_constant(self):
        alpha, beta = force_integrals(ForceProfile.constant(2.0), 1.0, 0.0, 1.0)
        assert alpha == pytest.approx(2 * math.sin(1.0))
        assert beta == pytest.approx(2 * (1 - math.cos(1.0)))

    def test_tabulated_holds_end_value(self):
        z = ForceProfile.tabulated([0.0, 1.0], [1.0, 1.0])
        alpha, beta = force_integrals(z, 1.0, 0.0, 2.0)
        assert alpha == pytest.approx(math.sin(2.0))
        assert beta == pytest.approx(1 - math.cos(2.0))

    def test_densely_tabulated_force(self):
        times = np.linspace(0.0, 2 * math.pi, 1001)
        z = ForceProfile.tabulated(times, np.cos(times))
        alpha, beta = force_integrals(z, 1.0, 0.0, 2 * math.pi)
        # linear interpolation of cos on 1000 segments
        assert alpha == pytest.approx(math.pi, abs=1e-4)
        assert beta == pytest.approx(0.0, abs=1e-4)

    def test_empty_interval(self):
        assert force_integrals(ForceProfile.constant(1.0), 1.0, 2.0, 2.0) == (0.0, 0.0)

    def test_reversed_interval(self):
        with pytest.raises(PreconditionError):
            force_integrals(ForceProfile.constant(1.0), 1.0, 2.0, 1.0)

    @given(st.floats(0.2, 3.0), st.floats(0.2, 3.0), st.floats(0.0, 5.0), st.floats(0.0, 20.0))
    @settings(max_examples=30, deadline=None)
    def test_matches_closed_form(self, Omega, omega, t1, length):
        assume(Omega == omega or abs(Omega - omega) > 1e-3)
        z = ForceProfile.periodic(1.5, Omega)
        numeric = force_integrals(z, omega, t1, t1 + length)
        exact = periodic_force_integrals(1.5, Omega, omega, t1, t1 + length)
        assert numeric == pytest.approx(exact, abs=1e-8)

    def test_resonant_closed_form(self):
        t = 7.0
        alpha, _ = periodic_force_integrals(2.0, 1.5, 1.5, 0.0, t)
        assert alpha == pytest.approx(2.0 * (t / 2 + math.sin(3.0 * t) / 6.0))


class TestForcedFlow:
    def test_zero_force_is_free_flow(self):
        f = parse_symbol("q^2 + q*p")
        for t in (0.3, math.pi / 2, 4.0):
            assert forced_flow(f, t, z=ForceProfile.zero()) == ho_flow(f, t)

    def test_constant_force_shift(self, q, p):
        # q(t) = q cos t + p sin t + Z0(1 − cos t) for m = ω = 1
        t = 1.3
        f = forced_flow(q, t, z=ForceProfile.constant(2.0))
        coeffs = f.coefficients()
        assert coeffs[(0, 0, 0)].real == pytest.approx(2.0 * (1 - math.cos(t)))
        assert coeffs[(0, 1, 0)].real == pytest.approx(math.cos(t))

    @pytest.mark.parametrize("z, t_span", [
        (ForceProfile.constant(0.7), (0.0, 2.0)),
        (ForceProfile.periodic(1.0, 1.3), (0.0, 3.0)),
        (ForceProfile.periodic(0.5, 1.0), (0.5, 2.5)),
        (ForceProfile.tabulated([0.0, 1.0, 2.0], [0.0, 1.0, -1.0]), (0.0, 2.0)),
    ])
    def test_solves_bracket_equation(self, q, p, z, t_span):
        H = hamiltonian_forced(1, 1, z)
        for f0 in (q, p, parse_symbol("q*p")):
            numeric = integrate_bracket_ode(f0, H, t_span, 1e-3, 2).final
            exact = forced_flow(f0, t_span[1], 1, 1, z, t0=t_span[0])
            assert max_coefficient_error(numeric, exact) < 1e-7

    def test_backward_in_time(self, q):
        z = ForceProfile.constant(1.0)
        forward = forced_flow(q, 1.0, z=z)
        there_and_back = forced_flow(forward, 0.0, z=z, t0=1.0)
        assert max_coefficient_error(there_and_back, q) < 1e-12


class TestAffineFlow:
    def test_rotation(self):
        M, d = affine_flow(hamiltonian_ho(1, 1), 0.4)
        c, s = math.cos(0.4), math.sin(0.4)
        assert np.allclose(M, [[c, s], [-s, c]], atol=1e-14)
        assert np.allclose(d, 0.0)

    def test_linear_hamiltonian_translates(self, q):
        M, d = affine_flow(q, 2.0)
        assert np.allclose(M, np.eye(2))
        assert np.allclose(d, [0.0, -2.0])

    def test_rejects_cubic(self):
        with pytest.raises(PreconditionError):
            affine_flow(parse_symbol("q^3"), 1.0)


class TestEvolveKernel:
    def test_quarter_period(self, planck):
        k = evolve_kernel(coherent_kernel(planck, 1, 0), hamiltonian_ho(1, 1), math.pi / 2)
        assert float(k.q0) == pytest.approx(0.0, abs=1e-15)
        assert float(k.p0) == pytest.approx(-1.0)
        assert k.is_coherent

    def test_dual_to_observable_flow(self, planck):
        H = hamiltonian_ho(1, 1)
        B = pmechanise(parse_symbol("q^2 + q*p + 3*p"))
        k = coherent_kernel(planck, Fraction(1, 2), -1)
        for t in (0.3, 1.1, 2.5):
            assert eval_state(evolve_kernel(k, H, t), B) == pytest.approx(eval_state(k, ho_flow(B, t)), abs=1e-12)

    def test_free_particle_shears(self, planck):
        H = pmechanise(parse_symbol("1/2*p^2"))
        k = evolve_kernel(coherent_kernel(planck, 0, 1), H, 2.0)
        assert float(k.q0) == pytest.approx(2.0)
        assert not k.is_coherent
        D = k.quadratic_form
        assert float(D[0][0]) == pytest.approx(5.0)
        assert float(D[0][1]) == pytest.approx(2.0)

    def test_squeezed_kernel(self, planck):
        k = GaussianKernel(planck, 0, 0, shape=((2, 0), (0, Fraction(1, 2))))
        out = evolve_kernel(k, hamiltonian_ho(1, 1), math.pi)
        assert float(out.quadratic_form[0][0]) == pytest.approx(2.0)

    def test_rejects_cubic(self, planck):
        with pytest.raises(PreconditionError):
            evolve_kernel(coherent_kernel(planck, 0, 0), parse_symbol("q^3"), 1.0)


class TestInteractionEvolve:
    def test_full_period_shift(self, planck):
        z = ForceProfile.periodic(2.0, 1.0)
        k = interaction_evolve(coherent_kernel(planck, 0, 0), 1, 1, z, 0.0, 2 * math.pi)
        assert float(k.q0) == pytest.approx(0.0, abs=1e-10)
        assert float(k.p0) == pytest.approx(2 * math.pi)

    def test_steps_compose(self, planck):
        z = ForceProfile.periodic(1.0, 0.7)
        k0 = coherent_kernel(planck, 1, 0)
        whole = interaction_evolve(k0, 1, 1, z, 0.0, 3.0)
        halves = interaction_evolve(interaction_evolve(k0, 1, 1, z, 0.0, 1.2), 1, 1, z, 1.2, 3.0)
        assert float(whole.q0) == pytest.approx(float(halves.q0), abs=1e-9)
        assert float(whole.p0) == pytest.approx(float(halves.p0), abs=1e-9)

    def test_zero_force_is_identity(self, planck):
        k = coherent_kernel(planck, 1, 2)
        assert interaction_evolve(k, 1, 1, ForceProfile.zero(), 0.0, 5.0) is k

    def test_requires_matching_coherent_kernel(self, planck):
        z = ForceProfile.constant(1.0)
        with pytest.raises(PreconditionError):
            interaction_evolve(coherent_kernel(planck, 0, 0, 2, 1), 1, 1, z, 0.0, 1.0)
        squeezed = GaussianKernel(planck, 0, 0, shape=((2, 0), (0, Fraction(1, 2))))
        with pytest.raises(PreconditionError):
            interaction_evolve(squeezed, 1, 1, z, 0.0, 1.0)


class TestBracketOde:
    def test_matches_free_flow(self, q):
        traj = integrate_bracket_ode(q, hamiltonian_ho(1, 1), (0.0, 1.0), 1e-3, 1)
        assert max_coefficient_error(traj.final, ho_flow(q, 1.0)) < 1e-8
        assert traj.times[0] == 0.0
        assert traj.times[-1] == pytest.approx(1.0)

    def test_record_every(self, q):
        traj = integrate_bracket_ode(q, hamiltonian_ho(1, 1), (0.0, 1.0), 0.01, 1, record_every=10)
        assert len(traj) == 11

    def test_cubic_hamiltonian_closes(self, p):
        traj = integrate_bracket_ode(p, parse_symbol("q^3"), (0.0, 1.0), 0.1, 3)
        coeffs = traj.final.coefficients()
        assert coeffs[(0, 0, 1)] == pytest.approx(1.0)
        assert coeffs[(0, 2, 0)] == pytest.approx(-3.0)
        assert traj.final.hbar_degree == 0

    def test_degree_cap(self):
        with pytest.raises(DegreeCapExceeded):
            integrate_bracket_ode(parse_symbol("p^3"), parse_symbol("q^3"), (0.0, 1.0), 0.1, 4)

    def test_cap_below_initial_degree(self):
        with pytest.raises(PreconditionError):
            integrate_bracket_ode(parse_symbol("q^3"), hamiltonian_ho(1, 1), (0.0, 1.0), 0.1, 2)

    @pytest.mark.parametrize("dt, t_span", [(0.0, (0.0, 1.0)), (-0.1, (0.0, 1.0)), (0.1, (1.0, 1.0))])
    def test_invalid_steps(self, q, dt, t_span):
        with pytest.raises(PreconditionError):
            integrate_bracket_ode(q, hamiltonian_ho(1, 1), t_span, dt, 2)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            integrate_bracket_ode(Symbol.q(1, 2), hamiltonian_ho(1, 1), (0.0, 1.0), 0.1, 2)


class TestResonance:
    def test_starts_at_rest(self):
        rows = resonance_amplitude(1.0, 1.0, 1.0, 10.0, 50)
        assert rows[0] == (0.0, 0.0)
        assert len(rows) == 50
        assert rows[-1][0] == pytest.approx(10.0)

    def test_linear_growth_at_resonance(self):
        rows = resonance_amplitude(2.0, 2.0, 0.5, 100.0, 400)
        t, envelope = rows[-1]
        assert envelope / t == pytest.approx(0.25, rel=1e-2)

    @pytest.mark.parametrize("Omega", [0.5, 1.5, 3.0])
    def test_bounded_off_resonance(self, Omega):
        rows = resonance_amplitude(Omega, 1.0, 2.0, 60.0, 300)
        assert max(e for _, e in rows) <= resonance_bound(Omega, 1.0, 2.0)

    def test_zero_amplitude(self):
        assert all(e == 0 for _, e in resonance_amplitude(1.0, 1.0, 0.0, 5.0, 10))

    def test_bound_at_resonance(self):
        assert resonance_bound(1.0, 1.0, 1.0) == math.inf

    @pytest.mark.parametrize("args", [(1.0, 1.0, -1.0, 5.0, 10), (1.0, 1.0, 1.0, 5.0, 1), (0.0, 1.0, 1.0, 5.0, 10)])
    def test_invalid(self, args):
        with pytest.raises(PreconditionError):
            resonance_amplitude(*args)
