import numpy as np
import pytest

from geoquad.errors import NotHurwitz, NotStabilizable, ValidationError
from geoquad.linearize import (GainSet, LinearModel, chain_gain_matrices, chain_reduced_state,
                               check_attitude_gain_condition, check_position_gain_condition, linearize_chain,
                               linearize_multi, lyapunov_residual, multi_reduced_state, open_loop, solve_lyapunov,
                               state_space, synthesize_gains_lqr)
from geoquad.manifold import exp_so3
from geoquad.model import (CableParams, ChainState, MultiSystem, PayloadParams, QuadParams, box_inertia,
                           hanging_multi_state)


def ch3_model():
    return linearize_chain(QuadParams(0.5, np.diag([0.557, 0.557, 1.05]) * 1e-2), CableParams.uniform(5, 0.1, 0.1))


def ch3_gains():
    kq = [11.01, 6.67, 1.97, 0.41, 0.069]
    kw = [0.93, 0.24, 0.032, 0.03, 0.025]
    return chain_gain_matrices(12.8, 4.22, kq, kw)


def test_chain_model_is_symmetric_with_positive_mass():
    lm = ch3_model()
    assert np.allclose(lm.Mmat, lm.Mmat.T)
    assert np.all(np.linalg.eigvalsh(lm.Mmat) > 0)
    assert lm.n_state == 13 and lm.n_input == 3


def test_open_loop_chain_is_marginal():
    A, B = open_loop(ch3_model())
    lam = np.linalg.eigvals(A)
    assert np.abs(lam.real).max() < 1e-8          # undamped pendulum modes and free translation
    assert B.shape == (26, 3)


def test_published_chain_gains_are_stabilizing():
    lm = ch3_model()
    K_x, K_xdot = ch3_gains()
    ss = state_space(lm, K_x, K_xdot)
    assert ss.is_hurwitz()
    assert np.max(ss.eigenvalues.real) < -0.1


def test_lyapunov_solution(rng):
    lm = ch3_model()
    A = state_space(lm, *ch3_gains()).A
    Q = np.eye(26)
    P = solve_lyapunov(A, Q)
    assert lyapunov_residual(A, P, Q) < 1e-10
    assert np.array_equal(P, P.T) and np.linalg.eigvalsh(P)[0] > 0
    with pytest.raises(NotHurwitz):
        solve_lyapunov(open_loop(lm)[0], Q)


def test_lyapunov_large_system_branch():
    rng = np.random.default_rng(7)
    n = 60
    A = -3 * np.eye(n) + 0.3 * rng.normal(size=(n, n)) / np.sqrt(n)
    P = solve_lyapunov(A, np.eye(n))
    assert lyapunov_residual(A, P, np.eye(n)) < 1e-10


def payload_model(rho):
    quads = [QuadParams(0.755, np.diag([0.557, 0.557, 1.05]) * 1e-2)] * len(rho)
    cables = [CableParams.uniform(2, 0.01, 0.15)] * len(rho)
    return linearize_multi(PayloadParams(0.5, box_inertia(0.5, 0.6, 0.8, 0.2), rho), quads, cables)


def test_symmetric_payload_decouples_translation_and_rotation():
    rho = np.array([[0.3, -0.4, 0.0], [0.3, 0.4, 0.0], [-0.3, -0.4, 0.0], [-0.3, 0.4, 0.0]])
    lm = payload_model(rho)
    assert np.allclose(lm.Mmat[0:3, 3:6], 0)
    assert np.allclose(lm.Mmat, lm.Mmat.T)


def test_lqr_stabilizes_payload():
    rho = np.array([[0.3, -0.4, -0.1], [0.3, 0.4, -0.1], [-0.3, -0.4, -0.1], [-0.3, 0.4, -0.1]])
    lm = payload_model(rho)
    D = lm.n_state
    K_x, K_xdot = synthesize_gains_lqr(lm, np.diag([10.0] * D + [1.0] * D), np.eye(12))
    assert K_x.shape == (12, D)
    assert state_space(lm, K_x, K_xdot).is_hurwitz()


def test_lqr_rejects_uncontrollable_model():
    lm = LinearModel(np.eye(2), np.zeros((2, 2)), np.array([[1.0], [0.0]]))
    with pytest.raises(NotStabilizable):
        synthesize_gains_lqr(lm, np.eye(4), np.eye(1))


def test_gain_shapes_are_checked():
    with pytest.raises(ValidationError):
        state_space(ch3_model(), np.zeros((3, 5)), np.zeros((3, 13)))
    with pytest.raises(ValidationError):
        GainSet(kR=0.0, kOmega=1.0)


def test_reduced_states():
    q = np.array([[0.0, 0.1, 1.0], [0.2, 0.0, 1.0]])
    q /= np.linalg.norm(q, axis=1)[:, None]
    w = np.array([[0.3, -0.2, 0.02], [0.1, 0.4, -0.04]])
    y = ChainState(np.array([1.0, 2.0, 3.0]), np.array([0.5, 0.0, 0.0]), np.eye(3), np.zeros(3), q, w).to_vector()
    x, xd = chain_reduced_state(y, 2, np.array([1.0, 2.0, 2.0]))
    assert np.allclose(x[0:3], [0, 0, 1])
    # C^T (e3 x q) = (-q2, q1)
    assert np.allclose(x[3:], [-q[0, 1], q[0, 0], -q[1, 1], q[1, 0]])
    assert np.allclose(xd, [0.5, 0, 0, 0.3, -0.2, 0.1, 0.4])
    quads = [QuadParams(1.0, np.eye(3))] * 2
    sys_ = MultiSystem(PayloadParams(1.0, np.eye(3), np.array([[0.5, 0, 0], [-0.5, 0, 0]])), quads,
                       [CableParams.uniform(1, 0.1, 1.0)] * 2)
    y = hanging_multi_state(sys_).to_vector()
    y[6:15] = exp_so3([0.0, 0.0, 1e-4]).ravel()
    x, xd = multi_reduced_state(y, 2, 2, np.zeros(3))
    assert np.allclose(x[3:6], [0, 0, np.sin(1e-4)])


def test_attitude_gain_condition():
    J = np.diag([0.0557, 0.0558, 0.105])
    ok = check_attitude_gain_condition(J, 0.7, 0.12, 0.1, 0.0)
    assert ok.passed and ok.margins["c2"] > 0
    assert not check_attitude_gain_condition(J, 0.7, 0.12, 0.1, 50.0).passed


def test_position_gain_condition_reports_margins():
    g = GainSet(kx=6.0, kv=3.0, kR=0.7, kOmega=0.12, c1=0.1, c2=0.1, B_theta=1.0)
    r = check_position_gain_condition(g, 0.755, np.diag([0.0557, 0.0558, 0.105]), 0.1, e_x_max=1.0)
    assert set(r.margins) == {"c1", "W"}
    assert r.margins["c1"] > 0
    assert r.passed == (r.margins["c1"] > 0 and r.margins["W"] > 0)
    with pytest.raises(ValidationError):
        check_position_gain_condition(g, 0.755, np.eye(3), 1.5)
