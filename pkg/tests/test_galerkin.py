"""Tests for the truncated quintic flow and the modified-energy flow identity."""

import math

import numpy as np
import pytest

from nlslab.errors import IntegrationError
from nlslab.fourier import FourierState, evolve_linear
from nlslab.galerkin import (
    FtcReport,
    Trajectory,
    _FrozenLambda,
    _simpson,
    energy_drift,
    ftc_residual,
    hamiltonian_energy,
    integrate_galerkin,
)
from nlslab.rng import stream
from nlslab.symbols import (
    MultiplierParams,
    _gamma_sum,
    lambda_n_evaluate,
    symbol_fn,
)

P4 = MultiplierParams(4, 0.5)
P2 = MultiplierParams(2, 0.5)


def seeded_state(key, lam, support):
    rng = stream(9, key)
    amps = rng.normal(size=len(support)) + 1j * rng.normal(size=len(support))
    return FourierState.from_uhat(float(lam), dict(zip(support, amps)))


ACCEPT = seeded_state(0, 4.0, (0, 4, 8, 20))
ACTIVE = seeded_state(5, 1.0, (-4, -3, 3, 4))


class TestIntegrator:
    def test_free_flow_matches_linear_propagator(self):
        u0 = seeded_state(1, 2.0, (-6, -1, 0, 4))
        traj = integrate_galerkin(u0, 0.8, dt=0.05, sign=0, n_samples=9)
        for i in range(traj.n_samples):
            want = evolve_linear(u0, float(traj.times[i]))
            np.testing.assert_allclose(
                traj.state(i).amps, want.amps, rtol=0, atol=1e-12
            )

    def test_mass_and_energy_conserved(self):
        traj = integrate_galerkin(ACCEPT, 1.0, dt=1.0 / 100, sign=+1, n_samples=11)
        assert traj.mass_drift <= 1e-8
        assert energy_drift(traj) <= 1e-6
        # focusing run conserves its own Hamiltonian too
        traj2 = integrate_galerkin(ACTIVE, 0.5, dt=0.5 / 200, sign=-1, n_samples=11)
        assert energy_drift(traj2) <= 1e-6

    def test_trajectory_layout(self):
        traj = integrate_galerkin(ACCEPT, 0.2, dt=0.01, sign=+1, n_samples=4)
        assert traj.n_samples == 5  # even counts are bumped to odd
        assert traj.times[0] == 0.0 and traj.times[-1] == pytest.approx(0.2)
        assert traj.uhats.shape == (5, 4)
        assert traj.order == 4
        np.testing.assert_array_equal(traj.state(0).indices, ACCEPT.indices)

    def test_t_zero_single_sample(self):
        traj = integrate_galerkin(ACTIVE, 0.0, sign=+1)
        assert traj.n_samples == 1 and traj.dt == 0.0 and traj.mass_drift == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            integrate_galerkin(FourierState(1.0, [], []), 1.0)
        with pytest.raises(ValueError):
            integrate_galerkin(ACTIVE, -1.0)
        with pytest.raises(ValueError):
            integrate_galerkin(ACTIVE, 1.0, sign=2)
        with pytest.raises(ValueError):
            integrate_galerkin(ACTIVE, 1.0, dt=0.0)
        with pytest.raises(ValueError):
            integrate_galerkin(ACTIVE, 1.0, n_samples=2)

    def test_step_halving_recovers_coarse_start(self):
        # dt=0.005 is too coarse for this state's nonlinearity; the integrator
        # must halve its way down until the mass tolerance holds
        traj = integrate_galerkin(ACTIVE, 0.2, dt=0.005, sign=+1, n_samples=5)
        assert traj.mass_drift <= 1e-8
        assert traj.dt < 0.005

    def test_integration_error_when_halving_exhausted(self):
        with pytest.raises(IntegrationError) as ei:
            integrate_galerkin(
                ACTIVE, 0.2, dt=0.005, sign=+1, n_samples=5, max_halvings=0
            )
        assert ei.value.drift > 1e-8
        assert ei.value.dt > 0

    def test_hamiltonian_sign_split(self):
        u = seeded_state(2, 1.0, (-2, 0, 1))
        kinetic = hamiltonian_energy(u, sign=0)
        assert hamiltonian_energy(u, +1) > kinetic > hamiltonian_energy(u, -1)


class TestFrozenLambda:
    def test_matches_generic_evaluation(self):
        # M6_1 flips sign under the conjugate pairing, so its form is purely
        # imaginary; compare against the raw complex sum rather than the
        # real-checking evaluator
        u = seeded_state(3, 2.0, (-4, -1, 0, 2, 6))
        for sym, arity in (("sigma2", 2), ("sigma6", 6), ("M6_1", 6)):
            frozen = _FrozenLambda(symbol_fn(sym, P4), u.indices, u.lam, arity)
            got = frozen(u.uhat_array())
            want = _gamma_sum(symbol_fn(sym, P4), [u] * arity, None)
            assert got == pytest.approx(want, rel=1e-12, abs=1e-12)
        real = lambda_n_evaluate(symbol_fn("sigma2", P4), [u, u])
        frozen2 = _FrozenLambda(symbol_fn("sigma2", P4), u.indices, u.lam, 2)
        assert frozen2(u.uhat_array()).real == pytest.approx(real, rel=1e-12)

    def test_single_mode_diagonal_pair(self):
        # only the diagonal (5, -5) survives: sigma2 = 12.5 * m(5)^2 = 10 at
        # N=4, s=1/2, so the form is 2*pi*10 exactly
        u = FourierState.from_uhat(1.0, {5: 1.0})
        frozen = _FrozenLambda(symbol_fn("sigma2", P4), u.indices, u.lam, 2)
        got = frozen(u.uhat_array())
        assert got.real == pytest.approx(20.0 * math.pi, rel=1e-14)
        assert got.imag == 0.0

    def test_simpson_weights(self):
        xs = np.linspace(0.0, 1.0, 9)
        assert _simpson(xs**3, float(xs[1])) == pytest.approx(0.25, rel=1e-14)
        assert _simpson(np.array([7.0]), 0.1) == 0.0
        with pytest.raises(ValueError):
            _simpson(np.ones(4), 0.1)


class TestFlowIdentity:
    def test_kinetic_flux_matches_derivative(self):
        # d/dt Lambda_2(sigma2) along the flow equals Re[i*mu*Lambda_6(M6_1)],
        # checked by centered differences at second order
        u0 = ACTIVE
        lam2 = _FrozenLambda(symbol_fn("sigma2", P2), u0.indices, u0.lam, 2)
        m61 = _FrozenLambda(symbol_fn("M6_1", P2), u0.indices, u0.lam, 6)
        errs = []
        for n in (33, 65):
            traj = integrate_galerkin(u0, 0.02, dt=0.02 / (n - 1), sign=+1, n_samples=n)
            h = float(traj.times[1] - traj.times[0])
            vals = np.array([lam2(traj.uhats[i]).real for i in range(n)])
            mid = (vals[2:] - vals[:-2]) / (2 * h)
            flux = np.array(
                [(1j * m61(traj.uhats[i])).real for i in range(1, n - 1)]
            )
            errs.append(np.max(np.abs(mid - flux)))
        assert errs[1] < errs[0] / 3  # second-order shrink

    def test_t_zero_residual_exactly_zero(self):
        traj = integrate_galerkin(ACTIVE, 0.0, sign=+1)
        rep = ftc_residual(traj, P2)
        assert rep.residual == 0.0 and rep.n_samples == 1

    def test_single_mode_exact(self):
        u = FourierState.from_uhat(4.0, {8: 1.25 - 0.5j})
        traj = integrate_galerkin(u, 1.0, dt=0.01, sign=+1, n_samples=5)
        rep = ftc_residual(traj, P4)
        assert rep.relative <= 1e-12

    def test_acceptance_geometry_converges_fourth_order(self):
        rels = []
        for div in (4, 8, 16):
            traj = integrate_galerkin(
                ACCEPT, 0.1, dt=0.1 / div, sign=+1, n_samples=div + 1
            )
            rep = ftc_residual(traj, P4)
            rels.append(rep.relative)
            assert rep.mass_drift <= 1e-8
        assert rels[0] <= 1e-6
        order = np.polyfit(np.log([4, 8, 16]), np.log(rels), 1)[0]
        assert -order >= 2.0

    def test_active_resonant_support(self):
        traj = integrate_galerkin(ACTIVE, 0.1, dt=0.1 / 64, sign=+1, n_samples=65)
        rep = ftc_residual(traj, P2)
        assert rep.relative <= 1e-4
        assert rep.resonant_integral == pytest.approx(3.6228, rel=1e-3)
        assert rep.correction_initial != 0.0

    def test_focusing_sign(self):
        traj = integrate_galerkin(ACTIVE, 0.05, dt=0.05 / 32, sign=-1, n_samples=33)
        rep = ftc_residual(traj, P2)
        assert rep.relative <= 1e-3

    def test_free_flow_rejected(self):
        traj = integrate_galerkin(ACTIVE, 0.1, dt=0.01, sign=0, n_samples=5)
        with pytest.raises(ValueError):
            ftc_residual(traj, P2)
