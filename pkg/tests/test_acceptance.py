"""Acceptance criteria 1-10; each test prints one PASS/FAIL line."""
import time

import numpy as np
import pytest

from conftest import random_bearings, report
from geoquad.control import rotor_mix, rotor_unmix
from geoquad.linearize import (linearize_chain, linearize_multi, lyapunov_residual, open_loop, solve_lyapunov,
                               state_space)
from geoquad.manifold import (attitude_error_value, attitude_error_vector, exp_so3, hat, psi_bounds,
                              skew_vee, vee)
from geoquad.model import (CableParams, ChainState, ChainSystem, MultiQuadState, MultiSystem, PayloadParams,
                           QuadParams)
from geoquad.oracle import (PendulumParams, chain_chart_dynamics, finite_difference_jacobian,
                            multi_chart_dynamics, spherical_pendulum_reference)
from geoquad.scenarios import load_builtin
from geoquad.sim import FixedInput, SimConfig, metrics, simulate


def run_builtin(name, **overrides):
    sc = load_builtin(name, **overrides)
    start = time.perf_counter()
    traj = simulate(sc.system, sc.controller, sc.y0, sc.dist, sc.config)
    return sc, traj, time.perf_counter() - start


@pytest.fixture(scope="module")
def flips():
    return {name: run_builtin(name) for name in ("ch2_flip_adaptive", "ch2_flip_nonadaptive")}


@pytest.fixture(scope="module")
def ch3_runs():
    return {name: run_builtin(name) for name in ("ch3_5link_integral", "ch3_5link_nointegral")}


# ------------------------------------------------------------------ 1

def test_criterion_1_manifold_properties():
    rng = np.random.default_rng(1)
    n = 10_000
    G = np.diag([1.0, 2.0, 3.0])
    start = time.perf_counter()
    b = psi_bounds(G, 1.0)
    v = rng.normal(size=(n, 3)) * rng.uniform(0, 4, size=(n, 1))
    w = rng.normal(size=(n, 3)) * rng.uniform(0, 4, size=(n, 1))
    worst_vee = worst_rot = 0.0
    psi_neg = lower = upper = 0
    for a, c in zip(v, w):
        worst_vee = max(worst_vee, np.abs(vee(hat(a)) - a).max())
        R, Rd = exp_so3(a), exp_so3(c)
        worst_rot = max(worst_rot, np.linalg.norm(R.T @ R - np.eye(3)), abs(np.linalg.det(R) - 1.0))
        psi = attitude_error_value(R, Rd, G)
        e2 = np.sum(attitude_error_vector(R, Rd, G) ** 2)
        psi_neg += psi < -1e-12
        lower += b.b1 * e2 > psi + 1e-12
        upper += psi < 1.0 and psi > b.b2 * e2 + 1e-12
    elapsed = time.perf_counter() - start
    ok = (abs(b.b1 - 3 / 29) < 1e-15 and abs(b.b2 - 5 / 6) < 1e-15 and worst_vee <= 1e-12
          and worst_rot <= 1e-12 and psi_neg == lower == upper == 0 and elapsed < 5.0)
    report(1, ok, f"{n} samples, b1={b.b1:.6f} b2={b.b2:.6f}, vee err {worst_vee:.1e}, "
                  f"rotation err {worst_rot:.1e}, violations {psi_neg}/{lower}/{upper}, {elapsed:.2f} s")
    assert ok


# ------------------------------------------------------------------ 2

def derivative_identity_excess(traj):
    """Worst excess over the tolerances of both identities, by central differences of recorded data.

    The commanded angular velocity is recovered from the recorded commanded
    attitude (not from the controller), so the check does not reuse the
    controller's own rate computation.  Samples whose neighbours straddle a
    phase switch are skipped: the command is discontinuous there.
    """
    t = traj.t
    R = traj.states[:, 6:15].reshape(-1, 3, 3)
    Om = traj.states[:, 15:18]
    Rc, psi, eR, mode = traj.info["Rc"], traj.info["psi"], traj.info["e_R"], traj.info["mode"]
    worst_psi = worst_eR = -np.inf
    checked = 0
    for k in range(1, len(t) - 1):
        if mode[k - 1] != mode[k + 1]:
            continue
        h = t[k + 1] - t[k - 1]
        Omc = skew_vee(Rc[k].T @ (Rc[k + 1] - Rc[k - 1])) / h
        eO = Om[k] - R[k].T @ Rc[k] @ Omc
        psid = (psi[k + 1] - psi[k - 1]) / h
        eRd = (eR[k + 1] - eR[k - 1]) / h
        worst_psi = max(worst_psi, abs(psid - eR[k] @ eO) - 1e-3 * (1 + np.linalg.norm(eO)))
        worst_eR = max(worst_eR, np.linalg.norm(eRd) - np.linalg.norm(eO) - 1e-3)
        checked += 1
    return worst_psi, worst_eR, checked


def test_criterion_2_derivative_identities(flips):
    lines = []
    ok = True
    for name, (_, traj, _) in flips.items():
        wp, we, checked = derivative_identity_excess(traj)
        ok &= wp <= 0 and we <= 0 and checked >= len(traj.t) - 10
        lines.append(f"{name}: {checked} samples, worst excess {wp:.1e} / {we:.1e}")
    report(2, ok, "; ".join(lines))
    assert ok


# ------------------------------------------------------------------ 3

def ch3_chain():
    return ChainSystem(QuadParams(0.5, np.diag([0.557, 0.557, 1.05]) * 1e-2), CableParams.uniform(5, 0.1, 0.1))


def swinging_state(seed=3):
    rng = np.random.default_rng(seed)
    q = np.array([[np.sin(a), 0.0, np.cos(a)] for a in np.linspace(0.3, 1.2, 5)])
    w = np.cross(q, rng.normal(size=(5, 3)))
    return ChainState(np.array([0.0, 0.0, -1.0]), np.array([0.3, -0.2, 0.5]), exp_so3([0.1, -0.2, 0.3]),
                      np.array([0.5, -1.0, 2.0]), q, w).to_vector()


def test_criterion_3_energy_and_order():
    chain = ch3_chain()
    y0 = swinging_state()
    start = time.perf_counter()
    tr = simulate(chain, FixedInput(), y0, config=SimConfig(1e-4, 2.0, record_every=100))
    E = tr.info["T"] + tr.info["V"]
    drift = float(np.max(np.abs(E - E[0])) / abs(E[0]))

    T = 0.2
    ref = simulate(chain, FixedInput(), y0, config=SimConfig(1e-5, T, record_every=20000)).states[-1]
    errs = []
    for dt in (2e-3, 1e-3, 5e-4):
        yT = simulate(chain, FixedInput(), y0, config=SimConfig(dt, T, record_every=int(round(T / dt)))).states[-1]
        errs.append(np.linalg.norm(yT - ref))
    factors = [errs[0] / errs[1], errs[1] / errs[2]]
    elapsed = time.perf_counter() - start
    ok = drift <= 1e-6 and all(12 <= f <= 20 for f in factors) and elapsed < 60
    report(3, ok, f"energy drift {drift:.2e} (E0 {E[0]:.3f}), halving factors "
                  f"{factors[0]:.2f}, {factors[1]:.2f}, {elapsed:.1f} s")
    assert ok


# ------------------------------------------------------------------ 4

def pendulum_agreement():
    m, m1, l = 0.5, 0.1, 0.3
    chain = ChainSystem(QuadParams(m, np.diag([0.557, 0.557, 1.05]) * 1e-2), CableParams.uniform(1, m1, l))
    R0 = exp_so3([0.05, -0.08, 0.3])
    f = 0.97 * (m + m1) * 9.81
    q0 = np.array([np.sin(0.5), 0.2, np.cos(0.5)])
    q0 /= np.linalg.norm(q0)
    w0 = np.cross(q0, [0.4, 1.2, -0.3])
    y0 = ChainState(np.zeros(3), np.array([0.1, 0.0, -0.2]), R0, np.zeros(3), q0[None], w0[None]).to_vector()
    # with zero moment and zero angular velocity the attitude, hence the thrust force, stays fixed
    tr = simulate(chain, FixedInput(f, np.zeros(3)), y0, config=SimConfig(1e-3, 2.0))
    t, xs, vs, qs, ws = spherical_pendulum_reference((y0[0:3], y0[3:6], q0, w0), PendulumParams(m, m1, l), 2.0,
                                                     1e-3, "force", -f * R0[:, 2])
    assert np.allclose(tr.t, t)
    return max(np.abs(tr.states[:, 0:3] - xs).max(), np.abs(tr.states[:, 3:6] - vs).max(),
               np.abs(tr.states[:, 18:21] - qs).max(), np.abs(tr.states[:, 21:24] - ws).max())


def multi_chain_agreement(n_eval=200):
    """One vehicle carrying a point-like payload (rho = 0) is a chain whose last mass includes the payload."""
    rng = np.random.default_rng(4)
    quad = QuadParams(0.7, np.diag([0.6, 0.5, 1.1]) * 1e-2)
    masses = np.array([0.05, 0.08, 0.06])
    lengths = np.array([0.2, 0.15, 0.25])
    m0 = 0.4
    multi = MultiSystem(PayloadParams(m0, np.diag([0.01, 0.02, 0.03]), np.zeros((1, 3))), [quad],
                        [CableParams(masses, lengths)])
    chain_masses = masses.copy()
    chain_masses[-1] += m0
    chain = ChainSystem(quad, CableParams(chain_masses, lengths))
    worst = 0.0
    for _ in range(n_eval):
        q, w = random_bearings(rng, 3)
        x, v = rng.normal(size=3), rng.normal(size=3)
        R, Om = exp_so3(rng.normal(size=3)), rng.normal(size=3)
        f, M = rng.uniform(0, 20), rng.normal(size=3)
        qd = np.cross(w, q)
        x0 = x + lengths @ q
        v0 = v + lengths @ qd
        ym = MultiQuadState(x0, v0, np.eye(3), np.zeros(3), R[None], Om[None], (q,), (w,)).to_vector()
        yc = ChainState(x, v, R, Om, q, w).to_vector()
        x0dd, Om0d, qdd_m, Omd_m = multi.accelerations(ym, np.array([f]), M[None])
        xdd_c, wd_c, Omd_c = chain.accelerations(yc, f, M)
        qdd_c = np.cross(wd_c, q) + np.cross(w, np.cross(w, q))
        xdd_m = x0dd - lengths @ qdd_m
        worst = max(worst, np.abs(xdd_m - xdd_c).max(), np.abs(qdd_m - qdd_c).max(),
                    np.abs(Omd_m[0] - Omd_c).max(), np.abs(Om0d).max())
    return worst


def test_criterion_4_oracle_equivalence():
    dev = pendulum_agreement()
    acc = multi_chain_agreement()
    ok = dev <= 1e-5 and acc <= 1e-9
    report(4, ok, f"single link vs spherical pendulum max state deviation {dev:.2e} over 2 s; "
                  f"one-vehicle payload vs chain acceleration deviation {acc:.2e}")
    assert ok


# ------------------------------------------------------------------ 5

def test_criterion_5_linearization_and_lyapunov():
    ch3 = load_builtin("ch3_5link_integral")
    ch4 = load_builtin("ch4_box_case1")
    rel = {}
    for name, sc, lm_fun, chart in (
            ("chain", ch3, lambda s: linearize_chain(s.quad, s.cable, s.g), chain_chart_dynamics),
            ("multi", ch4, lambda s: linearize_multi(s.payload, s.quads, s.cables, s.g), multi_chart_dynamics)):
        lm = lm_fun(sc.system)
        A, B = open_loop(lm)
        F = chart(sc.system)
        z0 = np.zeros(A.shape[0])
        JA = finite_difference_jacobian(lambda z: F(z), z0)
        JB = finite_difference_jacobian(lambda u: F(z0, u), np.zeros(B.shape[1]))
        rel[name] = max(np.abs(JA - A).max() / np.abs(A).max(), np.abs(JB - B).max() / np.abs(B).max())
    res = {}
    for name, sc in (("chain", ch3), ("multi", ch4)):
        lm, K_x, K_xdot = sc.linear
        Acl = state_space(lm, K_x, K_xdot).A
        Q = np.eye(Acl.shape[0])
        P = solve_lyapunov(Acl, Q)
        spd = np.allclose(P, P.T, rtol=0, atol=0) and np.linalg.eigvalsh(P)[0] > 0
        res[name] = (lyapunov_residual(Acl, P, Q), spd)
    ok = all(v <= 1e-4 for v in rel.values()) and all(r <= 1e-8 and s for r, s in res.values())
    report(5, ok, ", ".join(f"{k} jacobian rel err {rel[k]:.1e}, lyapunov residual {res[k][0]:.1e} "
                            f"(P SPD {res[k][1]})" for k in rel))
    assert ok


# ------------------------------------------------------------------ 6

def test_criterion_6_flip_reproduction(flips):
    _, ad, t_ad = flips["ch2_flip_adaptive"]
    _, na, t_na = flips["ch2_flip_nonadaptive"]
    ex_ad, psi_ad = ad.info["x_err"][-1], ad.info["psi"][-1]
    ex_na = na.info["x_err"][-1]
    ok = ex_ad <= 0.05 and psi_ad <= 0.02 and ex_na > ex_ad and t_ad + t_na < 30
    report(6, ok, f"adaptive |e_x(2)| {ex_ad:.3f} m, Psi(2) {psi_ad:.4f}; non-adaptive |e_x(2)| {ex_na:.3f} m; "
                  f"{t_ad + t_na:.1f} s")
    assert ok


# ------------------------------------------------------------------ 7

def test_criterion_7_chain_reproduction(ch3_runs):
    _, it, t_it = ch3_runs["ch3_5link_integral"]
    _, ni, t_ni = ch3_runs["ch3_5link_nointegral"]
    mi, mn = metrics(it), metrics(ni)
    ok = (mi["x_err_final"] <= 0.05 and mi["e_q_final"] <= 0.05 and mi["e_omega_final"] <= 0.05
          and mn["x_err_steady"] > mi["x_err_steady"] and mn["psi_steady"] > mi["psi_steady"]
          and t_it + t_ni < 120)
    report(7, ok, f"integral: |x-xd| {mi['x_err_final']:.4f}, e_q {mi['e_q_final']:.4f}, "
                  f"e_w {mi['e_omega_final']:.4f}; steady |x-xd| {mi['x_err_steady']:.4f} vs "
                  f"{mn['x_err_steady']:.4f}, steady Psi {mi['psi_steady']:.1e} vs {mn['psi_steady']:.1e}; "
                  f"{t_it + t_ni:.1f} s")
    assert ok


# ------------------------------------------------------------------ 8

def test_criterion_8_payload_reproduction():
    _, c1, t1 = run_builtin("ch4_box_case1")
    sc2, c2, t2 = run_builtin("ch4_box_case2")
    m1, m2 = metrics(c1), metrics(c2)
    psi0 = float(np.max(c2.info["psi"][0]))
    tilt = np.degrees(np.arccos(np.clip(sc2.y0[14], -1, 1)))
    ok = (m1["x_err_final"] <= 0.05 and m1["e_q_final"] <= 0.1
          and m2["x_err_final"] <= 0.05 and m2["e_q_final"] <= 0.1 and t1 + t2 < 300)
    report(8, ok, f"case 1: |x0-x0d| {m1['x_err_final']:.4f}, e_q {m1['e_q_final']:.4f}; "
                  f"case 2 (payload tilt {tilt:.0f} deg, initial max Psi {psi0:.2f}): "
                  f"|x0-x0d| {m2['x_err_final']:.4f}, e_q {m2['e_q_final']:.4f}; {t1 + t2:.0f} s")
    assert ok


# ------------------------------------------------------------------ 9

def test_criterion_9_projection_bound(flips):
    lines = []
    ok = True
    for name, (sc, traj, _) in flips.items():
        B = max(c.gains.B_theta for _, c in sc.controller.schedule)
        worst = float(np.linalg.norm(traj.internal[:, 0:3], axis=1).max())
        ok &= worst <= B
        lines.append(f"{name}: max |theta_x| {worst!r} <= {B}")
    report(9, ok, "; ".join(lines))
    assert ok


# ------------------------------------------------------------------ 10

def test_criterion_10_mixer_and_cap(flips):
    rng = np.random.default_rng(10)
    d, c = 0.169, 0.1056
    worst = 0.0
    for _ in range(10_000):
        f, M = rng.uniform(0, 30), rng.normal(size=3) * 2
        f2, M2 = rotor_unmix(rotor_mix(f, M, d, c), d, c)
        worst = max(worst, abs(f2 - f) / max(1.0, f), np.abs(M2 - M).max())
        rot = rng.uniform(0, 5, size=4)
        worst = max(worst, np.abs(rotor_mix(*rotor_unmix(rot, d, c), d, c) - rot).max())
    lines = []
    capped = True
    for name, (sc, traj, _) in flips.items():
        cap = sc.system.quad.f_rotor_max
        hi, lo = float(traj.rotor.max()), float(traj.rotor.min())
        capped &= cap == 3.2 and hi <= cap and lo >= 0.0
        lines.append(f"{name} rotors in [{lo:.3f}, {hi:.3f}]")
    ok = worst <= 1e-12 and capped
    report(10, ok, f"mix/unmix round trip err {worst:.1e}; cap 3.2 N: " + ", ".join(lines))
    assert ok
