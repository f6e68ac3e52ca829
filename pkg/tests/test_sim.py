import numpy as np
import pytest

from conftest import hover_quad
from geoquad.errors import Diverged, NonFinite, ValidationError
from geoquad.manifold import E3, exp_so3
from geoquad.model import (ChainState, QuadParams, SingleQuadState, SingleQuadSystem,
                           hanging_chain_state)
from geoquad.sim import FixedInput, SimConfig, Trajectory, metrics, simulate


def test_config_validation():
    for kw in (dict(dt=0.0), dict(t_final=-1.0), dict(record_every=0), dict(reprojection_every=0)):
        with pytest.raises(ValidationError):
            SimConfig(**kw)
    assert SimConfig(1e-3, 2.0).n_steps == 2000


@pytest.mark.parametrize("n_steps, every, rows", [(100, 1, 101), (100, 10, 11), (100, 7, 15), (10, 20, 1)])
def test_recorded_row_count(n_steps, every, rows):
    s = SingleQuadSystem(hover_quad())
    y0 = SingleQuadState(np.zeros(3), np.zeros(3), np.eye(3), np.zeros(3)).to_vector()
    tr = simulate(s, FixedInput(0.0), y0, config=SimConfig(1e-3, n_steps * 1e-3, record_every=every))
    assert len(tr.t) == rows
    assert np.allclose(np.diff(tr.t), every * 1e-3) if rows > 1 else tr.t[0] == 0.0


def test_free_fall_is_exact():
    s = SingleQuadSystem(hover_quad())
    y0 = SingleQuadState(np.zeros(3), np.array([1.0, 0.0, -2.0]), np.eye(3), np.zeros(3)).to_vector()
    tr = simulate(s, FixedInput(0.0), y0, config=SimConfig(1e-2, 1.0))
    t = tr.t[:, None]
    assert np.allclose(tr.states[:, 0:3], t * [1.0, 0.0, -2.0] + 0.5 * 9.81 * t ** 2 * E3, rtol=0, atol=1e-12)


def test_runs_are_deterministic(chain5):
    q = np.array([[np.sin(0.5), 0, np.cos(0.5)]] * 5)
    y0 = ChainState(np.zeros(3), np.zeros(3), np.eye(3), np.zeros(3), q, np.zeros((5, 3))).to_vector()
    a = simulate(chain5, FixedInput(9.0), y0, config=SimConfig(1e-3, 0.2))
    b = simulate(chain5, FixedInput(9.0), y0, config=SimConfig(1e-3, 0.2))
    assert np.array_equal(a.states, b.states)


def test_constraint_drift_without_reprojection(chain5):
    q = np.array([[np.sin(a), 0, np.cos(a)] for a in np.linspace(0.3, 1.2, 5)])
    y0 = ChainState(np.zeros(3), np.zeros(3), exp_so3([0.1, 0.2, 0.3]), np.array([1.0, -2.0, 3.0]), q,
                    np.zeros((5, 3))).to_vector()
    tr = simulate(chain5, FixedInput(9.0), y0, config=SimConfig(1e-3, 0.5, reprojection_every=10 ** 9))
    Y = tr.states[-1]
    R = Y[6:15].reshape(3, 3)
    qn = np.linalg.norm(Y[18:33].reshape(5, 3), axis=1)
    assert np.linalg.norm(R.T @ R - np.eye(3)) < 1e-7
    assert np.abs(qn - 1).max() < 1e-7
    tr = simulate(chain5, FixedInput(9.0), y0, config=SimConfig(1e-3, 0.5))
    Y = tr.states[-1]
    assert np.abs(np.linalg.norm(Y[18:33].reshape(5, 3), axis=1) - 1).max() < 1e-14


def test_rotor_cap_is_applied():
    quad = QuadParams(0.755, np.diag([0.0557, 0.0558, 0.105]), f_rotor_max=1.0)
    s = SingleQuadSystem(quad)
    y0 = SingleQuadState(np.zeros(3), np.zeros(3), np.eye(3), np.zeros(3)).to_vector()
    tr = simulate(s, FixedInput(10.0, np.array([0.0, 0.0, 0.0])), y0, config=SimConfig(1e-3, 0.01))
    assert np.allclose(tr.rotor, 1.0) and np.allclose(tr.f, 4.0)


def test_divergence_and_non_finite_are_reported():
    s = SingleQuadSystem(hover_quad())
    y0 = SingleQuadState(np.zeros(3), np.zeros(3), np.eye(3), np.zeros(3)).to_vector()
    with pytest.raises(Diverged) as exc:
        simulate(s, FixedInput(1e9), y0, config=SimConfig(1e-3, 1.0))
    assert exc.value.t is not None and exc.value.t < 1.0
    with pytest.raises(NonFinite):
        simulate(s, FixedInput(np.nan), y0, config=SimConfig(1e-3, 1.0))


def test_hover_metrics_are_zero(chain5):
    y0 = hanging_chain_state(5).to_vector()
    tr = simulate(chain5, FixedInput(chain5.M00 * 9.81), y0, config=SimConfig(1e-3, 0.1))
    m = metrics(tr)
    assert m["e_q_final"] == 0.0 and m["e_omega_max"] == 0.0 and m["e_q_settle"] == 0.0


def test_settling_time():
    t = np.linspace(0, 1, 11)
    tr = Trajectory(t, np.zeros((11, 18)), np.zeros((11, 0)), np.zeros(11), np.zeros((11, 3)), None,
                    {"x_err": np.array([1, 1, 0.5, 0.2, 0.04, 0.06, 0.01, 0, 0, 0, 0], float)})
    m = metrics(tr, threshold=0.05)
    assert np.isclose(m["x_err_settle"], 0.6)
    assert m["x_err_final"] == 0.0 and m["x_err_max"] == 1.0
    tr.info["x_err"] = np.ones(11)
    assert np.isnan(metrics(tr)["x_err_settle"])


def test_negative_thrust_is_logged(caplog):
    s = SingleQuadSystem(hover_quad())
    y0 = SingleQuadState(np.zeros(3), np.zeros(3), np.eye(3), np.zeros(3)).to_vector()
    with caplog.at_level("WARNING"):
        tr = simulate(s, FixedInput(-1.0), y0, config=SimConfig(1e-3, 0.01))
    assert "negative" in caplog.text
    assert metrics(tr)["negative_thrust_samples"] == len(tr.t)
