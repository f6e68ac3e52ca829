"""Independent reference computations used to audit the production models.

Nothing here reuses the assembled mass matrices of ``model``: the pendulum is
written in spherical angles, the multibody checks are solved as constrained
point-mass/rigid-body systems with Lagrange multipliers, and Jacobians are
taken by central differences.
"""
from dataclasses import dataclass

import numpy as np

from .errors import GimbalNear
from .manifold import E3, exp_so3, hat, skew_vee

# Chart for the spherical angles: the pole sits on +e1 so that a hanging link
# (q = e3) is far from the coordinate singularity.
_CHART = np.array([[0.0, 0.0, 1.0],
                   [1.0, 0.0, 0.0],
                   [0.0, 1.0, 0.0]])
GIMBAL_TOL = 1e-3


def _sph(th, ph):
    st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
    s = np.array([st * cp, st * sp, ct])
    s_t = np.array([ct * cp, ct * sp, -st])
    s_p = np.array([-st * sp, st * cp, 0.0])
    s_tp = np.array([-ct * sp, ct * cp, 0.0])
    s_pp = np.array([-st * cp, -st * sp, 0.0])
    P = _CHART
    return P @ s, P @ s_t, P @ s_p, P @ (-s), P @ s_tp, P @ s_pp


def bearing_to_angles(q, qdot):
    s = _CHART.T @ q
    sd = _CHART.T @ qdot
    th = np.arccos(np.clip(s[2], -1.0, 1.0))
    ph = np.arctan2(s[1], s[0])
    if np.sin(th) < np.sin(GIMBAL_TOL):
        raise GimbalNear("bearing is at the pole of the angle chart")
    _, q_t, q_p, *_ = _sph(th, ph)
    thd = (_CHART @ sd) @ q_t
    phd = (_CHART @ sd) @ q_p / np.sin(th) ** 2
    return th, ph, thd, phd


@dataclass
class PendulumParams:
    m: float            # base (vehicle) mass
    m1: float           # bob mass
    l: float            # link length
    g: float = 9.81


def _pendulum_rates(z, p, base, force):
    v = z[3:6]
    th, ph, thd, phd = z[6:10]
    st, ct = np.sin(th), np.cos(th)
    if abs(st) < np.sin(GIMBAL_TOL):
        raise GimbalNear("polar angle near the chart singularity")
    q, q_t, q_p, q_tt, q_tp, q_pp = _sph(th, ph)
    M01 = p.m1 * p.l
    M11 = p.m1 * p.l ** 2
    M00 = p.m + p.m1
    gvec = p.g * E3
    if base == "pinned":
        thdd = st * ct * phd ** 2 + (p.g / p.l) * (E3 @ q_t)
        phdd = -2.0 * ct / st * thd * phd + (p.g / p.l) * (E3 @ q_p) / st ** 2
        return np.concatenate([np.zeros(6), [thd, phd, thdd, phdd]])
    # generalized coordinates (x, th, ph): mass matrix and velocity-product terms
    A = np.zeros((5, 5))
    A[0:3, 0:3] = M00 * np.eye(3)
    A[0:3, 3] = A[3, 0:3] = M01 * q_t
    A[0:3, 4] = A[4, 0:3] = M01 * q_p
    A[3, 3] = M11
    A[4, 4] = M11 * st ** 2
    b = np.zeros(5)
    b[0:3] = force + M00 * gvec - M01 * (q_tt * thd ** 2 + 2.0 * q_tp * thd * phd + q_pp * phd ** 2)
    b[3] = M11 * st * ct * phd ** 2 + M01 * gvec @ q_t
    b[4] = -2.0 * M11 * st * ct * thd * phd + M01 * gvec @ q_p
    a = np.linalg.solve(A, b)
    return np.concatenate([v, a[0:3], [thd, phd, a[3], a[4]]])


def spherical_pendulum_reference(ic, params, t_final, dt, base="force", force=None):
    """Integrate one link hanging from a vehicle, in spherical angles.

    ic = (x, v, q, omega).  ``base`` is "force" (vehicle driven by the constant
    external force ``force`` plus gravity) or "pinned" (vehicle held fixed).
    Returns times and arrays x, v, q, omega reconstructed from the angles.
    """
    x, v, q, omega = (np.asarray(a, float) for a in ic)
    if base == "pinned":
        v = np.zeros(3)
    force = np.zeros(3) if force is None else np.asarray(force, float)
    qdot = np.cross(omega, q)
    th, ph, thd, phd = bearing_to_angles(q, qdot)
    z = np.concatenate([x, v, [th, ph, thd, phd]])
    nsteps = int(round(t_final / dt))
    out = np.empty((nsteps + 1, z.size))
    out[0] = z
    rhs = lambda s: _pendulum_rates(s, params, base, force)
    for k in range(nsteps):
        k1 = rhs(z)
        k2 = rhs(z + 0.5 * dt * k1)
        k3 = rhs(z + 0.5 * dt * k2)
        k4 = rhs(z + dt * k3)
        z = z + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = z
    t = dt * np.arange(nsteps + 1)
    qs = np.empty((nsteps + 1, 3))
    ws = np.empty((nsteps + 1, 3))
    for k, s in enumerate(out):
        qq, q_t, q_p, *_ = _sph(s[6], s[7])
        qs[k] = qq
        ws[k] = np.cross(qq, q_t * s[8] + q_p * s[9])
    return t, out[:, 0:3], out[:, 3:6], qs, ws


def pendulum_period(t, signal):
    """Mean period from upward zero crossings (linear interpolation)."""
    s = np.asarray(signal) - np.mean(signal)
    idx = np.where((s[:-1] < 0) & (s[1:] >= 0))[0]
    tc = t[idx] - s[idx] * (t[idx + 1] - t[idx]) / (s[idx + 1] - s[idx])
    return np.mean(np.diff(tc))


# ------------------------------------------------------------ finite differences

def finite_difference_jacobian(fun, z0, eps=1e-6):
    """Central-difference Jacobian of fun at z0."""
    z0 = np.asarray(z0, float)
    f0 = np.asarray(fun(z0))
    Jac = np.empty((f0.size, z0.size))
    for k in range(z0.size):
        dz = np.zeros_like(z0)
        dz[k] = eps
        Jac[:, k] = (np.asarray(fun(z0 + dz)) - np.asarray(fun(z0 - dz))) / (2 * eps)
    return Jac


_C = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])


def _bearing_from_chart(xi2):
    return exp_so3(_C @ xi2) @ E3


def chain_chart_dynamics(system, xd=np.zeros(3)):
    """Reduced chain dynamics about the hanging equilibrium on an exponential chart.

    Returns F(z, du) with z = [dx (3), xi (2n), dv (3), w (2n)] and du the
    thrust-force perturbation.  Bearings are q_i = exp(hat(C xi_i)) e3,
    link rates omega_i = C w_i (tangent-projected), vehicle attitude fixed at I.
    The output is the time derivative of [dx, C^T(e3 x q), v, C^T omega].
    """
    n = system.n
    u_eq = -system.M00 * system.g * E3

    def F(z, du=np.zeros(3)):
        dx = z[0:3]
        xi = z[3:3 + 2 * n].reshape(n, 2)
        dv = z[3 + 2 * n:6 + 2 * n]
        w2 = z[6 + 2 * n:].reshape(n, 2)
        q = np.array([_bearing_from_chart(a) for a in xi])
        w = w2 @ _C.T
        w = w - np.sum(w * q, axis=1)[:, None] * q
        y = np.concatenate([xd + dx, dv, np.eye(3).ravel(), np.zeros(3), q.ravel(), w.ravel()])
        yd = system.rates(y, 0.0, np.zeros(3), force=u_eq + du)
        qd = yd[18:18 + 3 * n].reshape(n, 3)
        wd = yd[18 + 3 * n:].reshape(n, 3)
        return np.concatenate([dv, (np.cross(E3, qd) @ _C).ravel(), yd[3:6], (wd @ _C).ravel()])
    return F


def multi_chart_dynamics(system, x0d=np.zeros(3)):
    """Reduced multi-vehicle dynamics about the hanging equilibrium.

    z = [dx0, eta0, xi (2L), v0, Omega0, w (2L)], du stacked per vehicle (3 nq);
    payload attitude R0 = exp(hat(eta0)); vehicle attitudes held at I with the
    thrust force u_i = u_i* + du_i applied directly.
    """
    L, nq = system.L, system.nq
    share = system.payload.m0 / nq
    u_eq = -np.outer(system.MiT + share, E3) * system.g

    def F(z, du=None):
        du = np.zeros(3 * nq) if du is None else du
        dx0, eta = z[0:3], z[3:6]
        xi = z[6:6 + 2 * L].reshape(L, 2)
        o = 6 + 2 * L
        v0, Om0 = z[o:o + 3], z[o + 3:o + 6]
        w2 = z[o + 6:].reshape(L, 2)
        R0 = exp_so3(eta)
        q = np.array([_bearing_from_chart(a) for a in xi])
        w = w2 @ _C.T
        w = w - np.sum(w * q, axis=1)[:, None] * q
        y = np.concatenate([x0d + dx0, v0, R0.ravel(), Om0, np.tile(np.eye(3), (nq, 1, 1)).ravel(),
                            np.zeros(3 * nq), q.ravel(), w.ravel()])
        N, P, _ = system.eom(y, np.zeros(nq), np.zeros((nq, 3)), force=u_eq + du.reshape(nq, 3))
        X = np.linalg.solve(N, P)
        qd = np.cross(w, q)
        qdd = X[6:].reshape(L, 3)
        wd = np.cross(q, qdd)
        etad = skew_vee(R0 @ hat(Om0))
        return np.concatenate([v0, etad, (np.cross(E3, qd) @ _C).ravel(), X[0:3], X[3:6], (wd @ _C).ravel()])
    return F


# --------------------------------------------------- constrained-body oracles

def _kkt_solve(Mg, Fg, A, b):
    n = Mg.shape[0]
    K = np.zeros((n + A.shape[0], n + A.shape[0]))
    K[:n, :n] = Mg
    K[:n, n:] = A.T
    K[n:, :n] = A
    sol = np.linalg.solve(K, np.concatenate([Fg, b]))
    return sol[:n]


def chain_constrained_accelerations(m, link_masses, link_lengths, x, v, q, omega, force, g=9.81):
    """Vehicle + point masses joined by rigid massless rods, via Lagrange multipliers.

    Returns (vehicle acceleration, qdd (n, 3)).
    """
    n = len(link_masses)
    l = np.asarray(link_lengths, float)
    qd = np.cross(omega, q)
    pos = np.vstack([x, x + np.cumsum(l[:, None] * q, axis=0)])
    vel = np.vstack([v, v + np.cumsum(l[:, None] * qd, axis=0)])
    masses = np.concatenate([[m], link_masses])
    Mg = np.kron(np.diag(masses), np.eye(3))
    Fg = (masses[:, None] * g * E3).ravel()
    Fg[0:3] += force
    A = np.zeros((n, 3 * (n + 1)))
    b = np.zeros(n)
    for k in range(n):
        d = pos[k + 1] - pos[k]
        A[k, 3 * (k + 1):3 * (k + 2)] = d
        A[k, 3 * k:3 * (k + 1)] = -d
        dv = vel[k + 1] - vel[k]
        b[k] = -dv @ dv
    a = _kkt_solve(Mg, Fg, A, b).reshape(n + 1, 3)
    qdd = (a[1:] - a[:-1]) / l[:, None]
    return a[0], qdd


def multi_constrained_accelerations(system, y, forces):
    """Payload + point masses + rigid rods via Lagrange multipliers.

    ``forces`` (nq, 3) are the external (thrust) forces on the vehicles.  The
    last link mass of each cable is welded to the payload at its attach point.
    Returns (x0dd, Omega0dot, qdd (L, 3)).
    """
    R0, Om0 = y[6:15].reshape(3, 3), y[15:18]
    pos, vel = system.point_kinematics(y)
    g = system.g
    pl = system.payload
    # generalized coordinates: payload (x0, Omega0 body), then free points
    free = []                         # (cable, index along cable, mass)
    for i, c in enumerate(system.cables):
        free.append((i, 0, system.quads[i].m))
        for j in range(1, c.n):
            free.append((i, j, c.link_masses[j - 1]))
    nfree = len(free)
    ng = 6 + 3 * nfree
    Mg = np.zeros((ng, ng))
    Fg = np.zeros(ng)
    Mg[0:3, 0:3] = pl.m0 * np.eye(3)
    Mg[3:6, 3:6] = pl.J0
    Fg[0:3] = pl.m0 * g * E3
    Fg[3:6] = -np.cross(Om0, pl.J0 @ Om0)
    att_jac, att_bias = [], []
    for i, c in enumerate(system.cables):
        rho = system.rho[i]
        m_att = c.link_masses[-1]
        Ja = np.hstack([np.eye(3), -R0 @ hat(rho)])
        ca = R0 @ np.cross(Om0, np.cross(Om0, rho))
        att_jac.append(Ja)
        att_bias.append(ca)
        Mg[0:6, 0:6] += m_att * Ja.T @ Ja
        Fg[0:6] += Ja.T @ (m_att * g * E3 - m_att * ca)
    index = {}
    for k, (i, j, mk) in enumerate(free):
        s = 6 + 3 * k
        Mg[s:s + 3, s:s + 3] = mk * np.eye(3)
        Fg[s:s + 3] = mk * g * E3 + (forces[i] if j == 0 else 0.0)
        index[(i, j)] = s

    def endpoint(i, j):
        """(Jacobian rows, bias acceleration) of point j on cable i."""
        if j == system.cables[i].n:
            Jp = np.zeros((3, ng))
            Jp[:, 0:6] = att_jac[i]
            return Jp, att_bias[i]
        Jp = np.zeros((3, ng))
        s = index[(i, j)]
        Jp[:, s:s + 3] = np.eye(3)
        return Jp, np.zeros(3)

    rows, rhs, links = [], [], []
    for i, c in enumerate(system.cables):
        for j in range(1, c.n + 1):
            Ju, cu = endpoint(i, j - 1)
            Jl, cl = endpoint(i, j)
            d = pos[i][j] - pos[i][j - 1]
            dv = vel[i][j] - vel[i][j - 1]
            rows.append(d @ (Jl - Ju))
            rhs.append(-dv @ dv - d @ (cl - cu))
            links.append((Ju, cu, Jl, cl, c.link_lengths[j - 1]))
    X = _kkt_solve(Mg, Fg, np.array(rows), np.array(rhs))
    qdd = np.array([((Jl @ X + cl) - (Ju @ X + cu)) / l for Ju, cu, Jl, cl, l in links])
    return X[0:3], X[3:6], qdd


# ---------------------------------------------------------------- audits

def energy_audit(traj, system):
    """max |E(t) - E(0)| / (|E(0)| + 1) over the recorded states."""
    E = np.array([sum(system.energy(y)) for y in traj.states])
    return float(np.max(np.abs(E - E[0])) / (abs(E[0]) + 1.0))


def rigid_body_invariants(J, Omega):
    """Rotational kinetic energy and body angular momentum magnitude."""
    return 0.5 * Omega @ J @ Omega, float(np.linalg.norm(J @ Omega))


# ------------------------------------------------------------ audit suite

@dataclass
class AuditResult:
    name: str
    passed: bool
    value: float
    tol: float


def _chain_sample(rng, n):
    q = rng.normal(size=(n, 3))
    q /= np.linalg.norm(q, axis=1)[:, None]
    w = np.cross(q, rng.normal(size=(n, 3)))
    return q, w


def audit_suite(seed=0, n_random=200):
    """Production models against the independent references; a list of AuditResult."""
    from .control import mixer_matrix, rotor_mix, rotor_unmix
    from .linearize import linearize_chain, linearize_multi, open_loop
    from .manifold import attitude_error_value, attitude_error_vector, is_rotation, psi_bounds, vee
    from .model import (CableParams, ChainState, ChainSystem, MultiSystem, PayloadParams, QuadParams,
                        box_inertia, hanging_multi_state)
    from .sim import FixedInput, SimConfig, simulate

    rng = np.random.default_rng(seed)
    out = []

    def add(name, value, tol):
        out.append(AuditResult(name, bool(value <= tol), float(value), tol))

    # manifold identities
    v = rng.normal(size=(n_random, 3)) * 3.0
    add("vee(hat(v)) = v", max(np.abs(vee(hat(a)) - a).max() for a in v), 1e-12)
    add("exp_so3 is a rotation", float(not all(is_rotation(exp_so3(a), 1e-9) for a in v)), 0.0)
    G = np.diag([1.0, 2.0, 3.0])
    b = psi_bounds(G, 1.0)
    worst = 0.0
    for a in v:
        R, Rd = exp_so3(a), exp_so3(rng.normal(size=3))
        psi = attitude_error_value(R, Rd, G)
        e2 = np.sum(attitude_error_vector(R, Rd, G) ** 2)
        worst = max(worst, b.b1 * e2 - psi)
        if psi < 1.0:
            worst = max(worst, psi - b.b2 * e2)
    add("b1 |e_R|^2 <= Psi <= b2 |e_R|^2", worst, 1e-12)

    # chain and multi-vehicle accelerations against constrained point masses
    quad = QuadParams(0.5, np.diag([0.557, 0.557, 1.05]) * 1e-2)
    cable = CableParams.uniform(5, 0.1, 0.1)
    chain = ChainSystem(quad, cable)
    err = 0.0
    for _ in range(20):
        q, w = _chain_sample(rng, 5)
        x, vv, force = rng.normal(size=3), rng.normal(size=3), rng.normal(size=3) * 5
        y = ChainState(x, vv, np.eye(3), np.zeros(3), q, w).to_vector()
        xdd, wd, _ = chain.accelerations(y, 0.0, np.zeros(3), force=force)
        a0, qdd = chain_constrained_accelerations(quad.m, cable.link_masses, cable.link_lengths, x, vv, q, w,
                                                  force, chain.g)
        qdd_model = np.cross(wd, q) + np.cross(w, np.cross(w, q))
        err = max(err, np.abs(a0 - xdd).max(), np.abs(qdd - qdd_model).max() / 100.0)
    add("chain accelerations vs constrained point masses", err, 1e-9)

    rho = np.array([[0.3, -0.4, -0.1], [0.3, 0.4, -0.1], [-0.3, -0.4, -0.1], [-0.3, 0.4, -0.1]])
    payload = PayloadParams(0.5, box_inertia(0.5, 0.6, 0.8, 0.2), rho)
    quads = [QuadParams(0.755, np.diag([0.557, 0.557, 1.05]) * 1e-2)] * 4
    cables = [CableParams.uniform(3, 0.01, 0.15)] * 4
    multi = MultiSystem(payload, quads, cables)
    err = 0.0
    for _ in range(10):
        y = hanging_multi_state(multi).to_vector()
        q, w = _chain_sample(rng, multi.L)
        o = 18 + 12 * multi.nq
        y[o:o + 3 * multi.L] = q.ravel()
        y[o + 3 * multi.L:] = w.ravel()
        y[0:3], y[3:6] = rng.normal(size=3), rng.normal(size=3)
        y[6:15] = exp_so3(rng.normal(size=3)).ravel()
        y[15:18] = rng.normal(size=3)
        forces = rng.normal(size=(4, 3)) * 5
        x0dd, Om0d, qdd, _ = multi.accelerations(y, np.zeros(4), np.zeros((4, 3)), force=forces)
        r0, r1, r2 = multi_constrained_accelerations(multi, y, forces)
        err = max(err, np.abs(r0 - x0dd).max(), np.abs(r1 - Om0d).max() / 10.0,
                  np.abs(r2 - qdd).max() / 100.0)
    add("multi-vehicle accelerations vs constrained bodies", err, 1e-9)

    # linearizations against finite differences of the nonlinear model
    lm = linearize_chain(quad, cable)
    A, B = open_loop(lm)
    F = chain_chart_dynamics(chain)
    Jz = finite_difference_jacobian(lambda z: F(z), np.zeros(A.shape[0]))
    add("chain linearization vs finite differences", np.abs(Jz - A).max() / np.abs(A).max(), 1e-4)
    lm = linearize_multi(payload, quads, cables)
    A, B = open_loop(lm)
    F = multi_chart_dynamics(multi)
    Jz = finite_difference_jacobian(lambda z: F(z), np.zeros(A.shape[0]))
    add("multi-vehicle linearization vs finite differences", np.abs(Jz - A).max() / np.abs(A).max(), 1e-4)

    # one link against the spherical pendulum
    single = ChainSystem(QuadParams(0.5, np.diag([0.557, 0.557, 1.05]) * 1e-2), CableParams.uniform(1, 0.1, 0.3))
    q0 = np.array([np.sin(0.4), 0.0, np.cos(0.4)])
    w0 = np.array([0.3, 1.0, -0.2])
    w0 -= (w0 @ q0) * q0
    force = np.array([0.2, -0.1, -0.6 * 9.81])
    t, xs, vs, qs, ws = spherical_pendulum_reference((np.zeros(3), np.zeros(3), q0, w0),
                                                     PendulumParams(0.5, 0.1, 0.3), 0.5, 1e-3, "force", force)

    class _Pushed(ChainSystem):
        """The vehicle is driven by a fixed external force instead of its thrust."""

        def rates(self, y, f, M, dist=None, force=None, t=None):
            return ChainSystem.rates(self, y, f, M, force=push)

    push = force
    pushed = _Pushed(single.quad, single.cable)
    y0 = ChainState(np.zeros(3), np.zeros(3), np.eye(3), np.zeros(3), q0[None], w0[None]).to_vector()
    tr = simulate(pushed, FixedInput(), y0, config=SimConfig(1e-3, 0.5))
    dev = max(np.abs(tr.states[-1, 0:3] - xs[-1]).max(), np.abs(tr.states[-1, 18:21] - qs[-1]).max())
    add("single link vs spherical pendulum", dev, 1e-5)

    # energy of the unforced chain
    q, w = _chain_sample(rng, 5)
    y0 = ChainState(np.zeros(3), rng.normal(size=3), np.eye(3), rng.normal(size=3), q, w).to_vector()
    tr = simulate(chain, FixedInput(), y0, config=SimConfig(1e-3, 0.5))
    add("unforced chain energy drift", energy_audit(tr, chain), 1e-6)

    # rotor mixing
    worst = 0.0
    for _ in range(n_random):
        f, M = rng.uniform(0, 20), rng.normal(size=3)
        f2, M2 = rotor_unmix(rotor_mix(f, M, 0.169, 0.1056), 0.169, 0.1056)
        worst = max(worst, abs(f2 - f), np.abs(M2 - M).max())
    add("rotor mix / unmix round trip", worst, 1e-12)
    add("mixer matrix invertible", float(abs(np.linalg.det(mixer_matrix(0.169, 0.1056))) < 1e-12), 0.0)
    return out
