import numpy as np
import pytest

from geoquad.errors import GimbalNear
from geoquad.manifold import E3
from geoquad.model import CableParams, QuadParams, hanging_chain_state, ChainSystem
from geoquad.oracle import (PendulumParams, audit_suite, bearing_to_angles, chain_chart_dynamics,
                            energy_audit, finite_difference_jacobian, pendulum_period,
                            spherical_pendulum_reference)
from geoquad.sim import FixedInput, SimConfig, simulate


def test_small_swing_period():
    l = 0.1
    q0 = np.array([np.sin(0.01), 0.0, np.cos(0.01)])
    t, _, _, qs, _ = spherical_pendulum_reference((np.zeros(3), np.zeros(3), q0, np.zeros(3)),
                                                  PendulumParams(1.0, 0.1, l), 3.0, 1e-3, "pinned")
    assert np.isclose(pendulum_period(t, qs[:, 0]), 2 * np.pi * np.sqrt(l / 9.81), rtol=1e-3)


def test_hanging_bob_stays_put():
    _, xs, _, qs, ws = spherical_pendulum_reference((np.zeros(3), np.zeros(3), E3, np.zeros(3)),
                                                    PendulumParams(1.0, 0.1, 0.5), 0.5, 1e-3, "force",
                                                    -1.1 * 9.81 * E3)
    assert np.abs(qs - E3).max() < 1e-14 and np.abs(xs).max() < 1e-14 and np.abs(ws).max() < 1e-14


def test_angle_chart_pole_is_rejected():
    with pytest.raises(GimbalNear):
        bearing_to_angles(np.array([1.0, 0.0, 0.0]), np.zeros(3))


def test_finite_difference_jacobian_is_second_order():
    f = lambda z: np.array([np.sin(z[0]) * z[1], z[1] ** 3])
    z0 = np.array([0.4, 1.3])
    exact = np.array([[np.cos(0.4) * 1.3, np.sin(0.4)], [0.0, 3 * 1.3 ** 2]])
    e1 = np.abs(finite_difference_jacobian(f, z0, 1e-2) - exact).max()
    e2 = np.abs(finite_difference_jacobian(f, z0, 5e-3) - exact).max()
    assert 3.5 < e1 / e2 < 4.5


def test_chart_dynamics_vanish_at_equilibrium():
    sys_ = ChainSystem(QuadParams(0.5, np.eye(3) * 1e-2), CableParams.uniform(3, 0.1, 0.2))
    F = chain_chart_dynamics(sys_)
    assert np.abs(F(np.zeros(18))).max() < 1e-13


def test_energy_audit_at_rest():
    sys_ = ChainSystem(QuadParams(0.5, np.eye(3) * 1e-2), CableParams.uniform(3, 0.1, 0.2))
    tr = simulate(sys_, FixedInput(sys_.M00 * 9.81), hanging_chain_state(3).to_vector(), config=SimConfig(1e-3, 0.05))
    assert energy_audit(tr, sys_) < 1e-15


def test_audit_suite_passes():
    results = audit_suite(seed=1, n_random=50)
    assert len(results) >= 10
    failed = [r for r in results if not r.passed]
    assert not failed, failed
