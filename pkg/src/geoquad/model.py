"""Parameters, states and equations of motion.

Three systems are modelled, all with gravity along +e3 (e3 points down):

* a single quadrotor on SE(3),
* a quadrotor towing a chain of n rigid links (point masses at the link ends),
* several quadrotors carrying a rigid payload, each through its own chain.

Each system class packs its state into a flat vector so the integrator can
treat all three uniformly.  Link directions q point from the quadrotor
towards the load; link angular velocities satisfy q . omega = 0.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import SingularMass, ValidationError
from .manifold import E3, Bearing, cross, hat, hat_many, project_so3, sphere_project_many

_getrf, _getrs = sla.lapack.get_lapack_funcs(("getrf", "getrs"), dtype=np.float64)
GRAVITY = 9.81
PIVOT_TOL = 1e-12


def _spd(J, name):
    J = np.asarray(J, dtype=float)
    if J.shape != (3, 3) or not np.all(np.isfinite(J)):
        raise ValidationError(f"{name} must be a finite 3x3 matrix")
    if np.abs(J - J.T).max() > 1e-9 * max(1.0, np.abs(J).max()):
        raise ValidationError(f"{name} symmetric")
    if np.linalg.eigvalsh(0.5 * (J + J.T)).min() <= 0:
        raise ValidationError(f"{name} positive definite")
    return 0.5 * (J + J.T)


# ---------------------------------------------------------------- parameters

@dataclass
class QuadParams:
    m: float
    J: np.ndarray
    d: float = 0.169
    c_tau_f: float = 0.1056
    f_rotor_max: float | None = None

    def __post_init__(self):
        if not self.m > 0:
            raise ValidationError("m > 0")
        self.J = _spd(self.J, "J")
        if not self.d > 0:
            raise ValidationError("d > 0")
        if not self.c_tau_f > 0:
            raise ValidationError("c_tau_f > 0")
        if self.f_rotor_max is not None and not self.f_rotor_max > 0:
            raise ValidationError("f_rotor_max > 0")


@dataclass
class CableParams:
    link_masses: np.ndarray
    link_lengths: np.ndarray

    def __post_init__(self):
        self.link_masses = np.atleast_1d(np.asarray(self.link_masses, dtype=float))
        self.link_lengths = np.atleast_1d(np.asarray(self.link_lengths, dtype=float))
        if self.link_masses.shape != self.link_lengths.shape:
            raise ValidationError("link_masses and link_lengths have equal length")
        if self.link_masses.size < 1:
            raise ValidationError("cable has at least one link")
        if np.any(self.link_masses <= 0) or np.any(self.link_lengths <= 0):
            raise ValidationError("link masses and lengths > 0")

    @classmethod
    def uniform(cls, n, mass, length):
        return cls(np.full(n, float(mass)), np.full(n, float(length)))

    @property
    def n(self):
        return self.link_masses.size


@dataclass
class PayloadParams:
    m0: float
    J0: np.ndarray
    attach_points: np.ndarray

    def __post_init__(self):
        if not self.m0 > 0:
            raise ValidationError("m0 > 0")
        self.J0 = _spd(self.J0, "J0")
        self.attach_points = np.atleast_2d(np.asarray(self.attach_points, dtype=float))
        if self.attach_points.shape[1] != 3:
            raise ValidationError("attach points are 3-vectors")


def box_inertia(m, a, b, c):
    """Inertia of a solid box with side lengths a, b, c along the body axes."""
    return m / 12.0 * np.diag([b * b + c * c, a * a + c * c, a * a + b * b])


@dataclass
class DisturbanceSet:
    """Constant force/moment disturbances.

    The effective force is delta_x + W theta_x and the effective moment
    delta_R + W theta_R, with W the identity or zero.  For the multi-vehicle
    system delta_x and delta_R may be given per vehicle as (n, 3) arrays.
    """
    delta_x: np.ndarray = field(default_factory=lambda: np.zeros(3))
    delta_R: np.ndarray = field(default_factory=lambda: np.zeros(3))
    theta_x: np.ndarray = field(default_factory=lambda: np.zeros(3))
    theta_R: np.ndarray = field(default_factory=lambda: np.zeros(3))
    W_mode: str = "identity"

    def __post_init__(self):
        for name in ("delta_x", "delta_R", "theta_x", "theta_R"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.shape[-1:] != (3,) or not np.all(np.isfinite(a)):
                raise ValidationError(f"{name} finite with trailing dimension 3")
            setattr(self, name, a)
        if self.W_mode not in ("identity", "zero"):
            raise ValidationError("W_mode in {identity, zero}")

    @property
    def force(self):
        w = 1.0 if self.W_mode == "identity" else 0.0
        return self.delta_x + w * self.theta_x

    @property
    def moment(self):
        w = 1.0 if self.W_mode == "identity" else 0.0
        return self.delta_R + w * self.theta_R


NO_DISTURBANCE = DisturbanceSet()


# -------------------------------------------------------------------- states

@dataclass(frozen=True)
class SingleQuadState:
    x: np.ndarray
    v: np.ndarray
    R: np.ndarray
    Omega: np.ndarray

    def to_vector(self):
        return np.concatenate([self.x, self.v, np.ravel(self.R), self.Omega])

    @classmethod
    def from_vector(cls, y):
        return cls(y[0:3].copy(), y[3:6].copy(), y[6:15].reshape(3, 3).copy(), y[15:18].copy())


@dataclass(frozen=True)
class ChainState:
    """Quadrotor plus chain; q and omega are (n, 3) arrays, link 1 nearest the vehicle."""
    x: np.ndarray
    v: np.ndarray
    R: np.ndarray
    Omega: np.ndarray
    q: np.ndarray
    omega: np.ndarray

    @property
    def n(self):
        return len(self.q)

    @property
    def links(self):
        return [Bearing(q, w) for q, w in zip(self.q, self.omega)]

    def to_vector(self):
        return np.concatenate([self.x, self.v, np.ravel(self.R), self.Omega,
                               np.ravel(self.q), np.ravel(self.omega)])

    @classmethod
    def from_vector(cls, y, n):
        q = y[18:18 + 3 * n].reshape(n, 3).copy()
        w = y[18 + 3 * n:18 + 6 * n].reshape(n, 3).copy()
        return cls(y[0:3].copy(), y[3:6].copy(), y[6:15].reshape(3, 3).copy(), y[15:18].copy(), q, w)


@dataclass(frozen=True)
class MultiQuadState:
    """Payload pose/velocity, per-vehicle attitude, and per-cable link bearings.

    R is (nq, 3, 3), Omega (nq, 3); q and omega are tuples of (n_i, 3) arrays,
    link 1 nearest the vehicle and link n_i attached to the payload.
    """
    x0: np.ndarray
    v0: np.ndarray
    R0: np.ndarray
    Omega0: np.ndarray
    R: np.ndarray
    Omega: np.ndarray
    q: tuple
    omega: tuple

    def to_vector(self):
        return np.concatenate([self.x0, self.v0, np.ravel(self.R0), self.Omega0,
                               np.ravel(self.R), np.ravel(self.Omega),
                               np.ravel(np.concatenate(self.q)), np.ravel(np.concatenate(self.omega))])

    @classmethod
    def from_vector(cls, y, sizes):
        nq = len(sizes)
        L = int(sum(sizes))
        o = 18
        R = y[o:o + 9 * nq].reshape(nq, 3, 3).copy()
        o += 9 * nq
        Om = y[o:o + 3 * nq].reshape(nq, 3).copy()
        o += 3 * nq
        qa = y[o:o + 3 * L].reshape(L, 3)
        wa = y[o + 3 * L:o + 6 * L].reshape(L, 3)
        cuts = np.cumsum(sizes)[:-1]
        q = tuple(a.copy() for a in np.split(qa, cuts))
        w = tuple(a.copy() for a in np.split(wa, cuts))
        return cls(y[0:3].copy(), y[3:6].copy(), y[6:15].reshape(3, 3).copy(), y[15:18].copy(), R, Om, q, w)


# ------------------------------------------------------------ inertia sums

def chain_inertia_constants(quad, cable):
    """M00, M0i (n,), Mij (n, n) for the chain."""
    m = cable.link_masses
    l = cable.link_lengths
    tail = np.cumsum(m[::-1])[::-1]            # sum_{a>=i} m_a
    M00 = quad.m + m.sum()
    M0 = tail * l
    idx = np.arange(m.size)
    Mij = tail[np.maximum.outer(idx, idx)] * np.outer(l, l)
    return M00, M0, Mij


def multi_mass_constants(payload, quads, cables):
    """M_T, M_iT (nq,), and the list of M_0ij arrays (mass above each link)."""
    MiT = np.array([qp.m + c.link_masses.sum() for qp, c in zip(quads, cables)])
    M0ij = [qp.m + np.concatenate([[0.0], np.cumsum(c.link_masses)[:-1]]) for qp, c in zip(quads, cables)]
    return payload.m0 + MiT.sum(), MiT, M0ij


def _lu_solve(A, b, t=None):
    lu, piv, _ = _getrf(A)
    if np.min(np.abs(np.diag(lu))) < PIVOT_TOL:
        raise SingularMass("mass matrix is singular", t)
    return _getrs(lu, piv, b)[0]


def _rigid_rates(R, Omega, J, Jinv, M):
    Rdot = R @ hat(Omega)
    Omegadot = Jinv @ (M - cross(Omega, J @ Omega))
    return Rdot, Omegadot


# ------------------------------------------------------------ single quad

class SingleQuadSystem:
    kind = "single"

    def __init__(self, quad, g=GRAVITY):
        self.quad = quad
        self.g = g
        self.Jinv = np.linalg.inv(quad.J)
        self.dim = 18

    def unpack(self, y):
        return SingleQuadState.from_vector(y)

    def rates(self, y, f, M, dist=NO_DISTURBANCE, t=None):
        qp = self.quad
        R = y[6:15].reshape(3, 3)
        Om = y[15:18]
        vdot = self.g * E3 - (f / qp.m) * R[:, 2] + dist.force / qp.m
        Rdot, Omdot = _rigid_rates(R, Om, qp.J, self.Jinv, M + dist.moment)
        return np.concatenate([y[3:6], vdot, Rdot.ravel(), Omdot])

    def project(self, y):
        y = y.copy()
        y[6:15] = project_so3(y[6:15].reshape(3, 3)).ravel()
        return y

    def energy(self, y):
        s = self.unpack(y)
        qp = self.quad
        T = 0.5 * qp.m * s.v @ s.v + 0.5 * s.Omega @ qp.J @ s.Omega
        V = -qp.m * self.g * s.x[2]
        return T, V


def single_quad_derivative(state, f, M, dist=NO_DISTURBANCE, quad=None, g=GRAVITY):
    """Flat time derivative of a single-vehicle state (same packing as to_vector)."""
    return SingleQuadSystem(quad, g).rates(state.to_vector(), f, np.asarray(M, float), dist)


# ------------------------------------------------------------------ chain

class ChainSystem:
    """Quadrotor with an n-link chain, angular-velocity form of the dynamics."""
    kind = "chain"

    def __init__(self, quad, cable, g=GRAVITY):
        self.quad = quad
        self.cable = cable
        self.g = g
        self.n = 0 if cable is None else cable.n
        if self.n:
            self.M00, self.M0, self.Mij = chain_inertia_constants(quad, cable)
        else:
            self.M00, self.M0, self.Mij = quad.m, np.zeros(0), np.zeros((0, 0))
        self.Jinv = np.linalg.inv(quad.J)
        self.dim = 18 + 6 * self.n
        n = self.n
        self._lhs_template = np.zeros((3 + 3 * n, 3 + 3 * n))
        self._lhs_template[0:3, 0:3] = self.M00 * np.eye(3)
        for i in range(n):
            self._lhs_template[3 + 3 * i:6 + 3 * i, 3 + 3 * i:6 + 3 * i] = self.Mij[i, i] * np.eye(3)
        self._Mij_off = self.Mij - np.diag(np.diag(self.Mij))
        self._weight = self.M00 * g * E3
        self._i3 = np.arange(3)

    def unpack(self, y):
        return ChainState.from_vector(y, self.n)

    def _split(self, y):
        n = self.n
        return (y[0:3], y[3:6], y[6:15].reshape(3, 3), y[15:18],
                y[18:18 + 3 * n].reshape(n, 3), y[18 + 3 * n:].reshape(n, 3))

    def eom(self, y, f, M, dist=NO_DISTURBANCE, force=None):
        """Return (LHS, RHS, Omegadot) with unknowns [xdd, omegadot_1..n].

        ``force`` overrides the thrust force -f R e3 when given.
        """
        n = self.n
        x, v, R, Om, q, w = self._split(y)
        M0 = self.M0
        LHS = self._lhs_template.copy()
        thrust = -f * R[:, 2] if force is None else force
        rhs0 = thrust + self._weight + dist.force
        if n:
            Q = hat_many(q)
            # off-diagonal blocks -M_ij q^_i q^_j = -M_ij (q_j q_i^T - (q_i . q_j) I)
            blk = -self._Mij_off[:, :, None, None] * (q[None, :, :, None] * q[:, None, None, :])
            blk[..., self._i3, self._i3] += (self._Mij_off * (q @ q.T))[:, :, None]
            LHS[3:, 3:] += blk.transpose(0, 2, 1, 3).reshape(3 * n, 3 * n)
            MQ = M0[:, None, None] * Q
            LHS[0:3, 3:] = -MQ.transpose(1, 0, 2).reshape(3, 3 * n)
            LHS[3:, 0:3] = MQ.reshape(3 * n, 3)
            w2 = np.sum(w * w, axis=1)
            rhs0 = rhs0 + (M0 * w2) @ q
            # sum_{j != i} M_ij |w_j|^2 q_i x q_j, plus gravity on the outboard mass
            cross_sum = cross(q, (self._Mij_off * w2[None, :]) @ q)
            rhsq = cross_sum + (M0 * self.g)[:, None] * Q[:, :, 2]
            RHS = np.concatenate([rhs0, rhsq.ravel()])
        else:
            RHS = rhs0
        Omdot = self.Jinv @ (M + dist.moment - cross(Om, self.quad.J @ Om))
        return LHS, RHS, Omdot

    def accelerations(self, y, f, M, dist=NO_DISTURBANCE, force=None, t=None):
        """(xdd, omegadot (n, 3), Omegadot)."""
        LHS, RHS, Omdot = self.eom(y, f, M, dist, force)
        sol = _lu_solve(LHS, RHS, t)
        return sol[0:3], sol[3:].reshape(self.n, 3), Omdot

    def rates(self, y, f, M, dist=NO_DISTURBANCE, force=None, t=None):
        x, v, R, Om, q, w = self._split(y)
        xdd, wd, Omdot = self.accelerations(y, f, M, dist, force, t)
        return np.concatenate([v, xdd, (R @ hat(Om)).ravel(), Omdot,
                               cross(w, q).ravel(), wd.ravel()])

    def project(self, y):
        y = y.copy()
        n = self.n
        y[6:15] = project_so3(y[6:15].reshape(3, 3)).ravel()
        if n:
            q, w = sphere_project_many(y[18:18 + 3 * n].reshape(n, 3), y[18 + 3 * n:].reshape(n, 3))
            y[18:18 + 3 * n] = q.ravel()
            y[18 + 3 * n:] = w.ravel()
        return y

    def positions(self, y):
        """Vehicle position followed by the n link-end positions."""
        x, v, R, Om, q, w = self._split(y)
        l = self.cable.link_lengths if self.n else np.zeros(0)
        return np.vstack([x, x + np.cumsum(l[:, None] * q, axis=0)])

    def energy(self, y):
        x, v, R, Om, q, w = self._split(y)
        qd = cross(w, q)
        T = 0.5 * self.M00 * v @ v + 0.5 * Om @ self.quad.J @ Om
        V = -self.M00 * self.g * x[2]
        if self.n:
            T += v @ (self.M0 @ qd) + 0.5 * np.sum(self.Mij * (qd @ qd.T))
            V -= self.g * (self.M0 @ q[:, 2])
        return T, V


def chain_eom(state, quad, cable, f, M, dist=NO_DISTURBANCE, g=GRAVITY):
    """Assembled chain dynamics: (LHS, RHS, Omegadot); unknowns [xdd, omegadot_i]."""
    return ChainSystem(quad, cable, g).eom(state.to_vector(), f, np.asarray(M, float), dist)


# ---------------------------------------------------------------- multi

class MultiSystem:
    """Rigid payload carried by nq quadrotors through chains.

    Unknown ordering for the assembled system N X = P:
    X = [x0dd (3), Omega0dot (3), qdd of cable 1 links 1..n_1, cable 2, ...].
    """
    kind = "multi"

    def __init__(self, payload, quads, cables, g=GRAVITY):
        if not (len(quads) == len(cables) == len(payload.attach_points)):
            raise ValidationError("quadrotor count = cable count = attach point count")
        self.payload = payload
        self.quads = list(quads)
        self.cables = list(cables)
        self.g = g
        self.nq = len(quads)
        self.sizes = [c.n for c in cables]
        self.L = int(sum(self.sizes))
        self.MT, self.MiT, M0ij = multi_mass_constants(payload, quads, cables)
        self.rho = payload.attach_points
        self.rho_hat = hat_many(self.rho)
        self.J0bar = payload.J0 - np.einsum("i,iab,ibc->ac", self.MiT, self.rho_hat, self.rho_hat)
        self.J = np.array([qp.J for qp in quads])
        self.Jinv = np.array([np.linalg.inv(qp.J) for qp in quads])
        self.cable_of = np.concatenate([np.full(n, i) for i, n in enumerate(self.sizes)])
        self.l = np.concatenate([c.link_lengths for c in cables])
        self.m_link = np.concatenate([c.link_masses for c in cables])
        self.M0 = np.concatenate(M0ij)
        # coupling coefficient M_{0i,min(j,k)} l_ik within each cable
        C = np.zeros((self.L, self.L))
        o = 0
        for i, n in enumerate(self.sizes):
            idx = np.arange(n)
            mins = M0ij[i][np.minimum.outer(idx, idx)]
            C[o:o + n, o:o + n] = mins * self.l[o:o + n][None, :]
            o += n
        self.Ccoef = C
        self.Ml = self.M0 * self.l
        self.dim = 18 + 12 * self.nq + 6 * self.L
        self.DX = 6 + 3 * self.L
        self._N_template = np.zeros((self.DX, self.DX))
        self._N_template[0:3, 0:3] = self.MT * np.eye(3)
        self._N_template[3:6, 3:6] = self.J0bar
        self._N_template[0:3, 6:] = np.kron(-self.Ml[None, :], np.eye(3))
        self._diag = np.arange(self.L)
        self._diag_blocks = -self.Ml[:, None, None] * np.eye(3)

    def unpack(self, y):
        return MultiQuadState.from_vector(y, self.sizes)

    def _split(self, y):
        nq, L = self.nq, self.L
        o = 18
        R = y[o:o + 9 * nq].reshape(nq, 3, 3)
        o += 9 * nq
        Om = y[o:o + 3 * nq].reshape(nq, 3)
        o += 3 * nq
        q = y[o:o + 3 * L].reshape(L, 3)
        w = y[o + 3 * L:].reshape(L, 3)
        return y[0:3], y[3:6], y[6:15].reshape(3, 3), y[15:18], R, Om, q, w

    def eom(self, y, f, M, dist=NO_DISTURBANCE, force=None):
        """Return (N, P, Omegadot_i (nq, 3)).

        ``force`` (nq, 3) overrides the thrust forces -f_i R_i e3 when given.
        """
        x0, v0, R0, Om0, R, Om, q, w = self._split(y)
        f = np.asarray(f, float)
        M = np.asarray(M, float).reshape(self.nq, 3)
        g, L = self.g, self.L
        MiT, rho, rh = self.MiT, self.rho, self.rho_hat
        Fdist = dist.force
        Mdist = dist.moment
        # external force on each vehicle, and the centripetal acceleration of each attach point
        F = (-f[:, None] * R[:, :, 2] if force is None else np.asarray(force, float)) + Fdist
        Om0h = hat(Om0)
        cent = (R0 @ Om0h @ Om0h @ rho.T).T                 # R0 Om0^2 rho_i
        R0rh = np.einsum("ab,ibc->iac", R0, rh)              # R0 rho^_i
        N = self._N_template.copy()
        N[0:3, 3:6] = -np.einsum("i,iab->ab", MiT, R0rh)
        N[3:6, 0:3] = np.einsum("i,iab->ab", MiT, rh) @ R0.T
        Fg = MiT[:, None] * g * E3 + F
        P0 = self.MT * g * E3 + F.sum(0) - MiT @ cent
        P1 = np.einsum("iab,ib->a", rh, Fg @ R0) - Om0h @ self.J0bar @ Om0
        Ml = self.Ml
        c = self.cable_of
        N[3:6, 6:] = (-Ml[:, None, None] * (rh[c] @ R0.T)).transpose(1, 0, 2).reshape(3, 3 * L)
        Q = hat_many(q)
        Q2 = Q @ Q
        M0 = self.M0
        blk = self.Ccoef[:, :, None, None] * Q2[:, None, :, :]
        blk[self._diag, self._diag] = self._diag_blocks
        N[6:, 6:] = blk.transpose(0, 2, 1, 3).reshape(3 * L, 3 * L)
        N[6:, 0:3] = (-M0[:, None, None] * Q2).reshape(3 * L, 3)
        N[6:, 3:6] = (M0[:, None, None] * (Q2 @ R0rh[c])).reshape(3 * L, 3)
        qd = cross(w, q)
        Pq = np.einsum("iab,ib->ia", Q2, M0[:, None] * cent[c] - (M0[:, None] * g * E3 + F[c])) \
            + (Ml * np.sum(qd * qd, axis=1))[:, None] * q
        P = np.concatenate([P0, P1, Pq.ravel()])
        Mt = M + Mdist
        Omdot = np.einsum("iab,ib->ia", self.Jinv, Mt - cross(Om, np.einsum("iab,ib->ia", self.J, Om)))
        return N, P, Omdot

    def accelerations(self, y, f, M, dist=NO_DISTURBANCE, t=None, force=None):
        """(x0dd, Omega0dot, qdd (L, 3), Omegadot_i (nq, 3))."""
        N, P, Omdot = self.eom(y, f, M, dist, force)
        X = _lu_solve(N, P, t)
        return X[0:3], X[3:6], X[6:].reshape(self.L, 3), Omdot

    def rates(self, y, f, M, dist=NO_DISTURBANCE, t=None, force=None):
        x0, v0, R0, Om0, R, Om, q, w = self._split(y)
        x0dd, Om0dot, qdd, Omdot = self.accelerations(y, f, M, dist, t, force)
        Rdot = R @ hat_many(Om)
        return np.concatenate([v0, x0dd, (R0 @ hat(Om0)).ravel(), Om0dot,
                               Rdot.ravel(), Omdot.ravel(),
                               cross(w, q).ravel(), cross(q, qdd).ravel()])

    def project(self, y):
        y = y.copy()
        nq, L = self.nq, self.L
        y[6:15] = project_so3(y[6:15].reshape(3, 3)).ravel()
        o = 18
        for i in range(nq):
            y[o + 9 * i:o + 9 * i + 9] = project_so3(y[o + 9 * i:o + 9 * i + 9].reshape(3, 3)).ravel()
        o += 12 * nq
        q, w = sphere_project_many(y[o:o + 3 * L].reshape(L, 3), y[o + 3 * L:].reshape(L, 3))
        y[o:o + 3 * L] = q.ravel()
        y[o + 3 * L:] = w.ravel()
        return y

    def point_kinematics(self, y):
        """Positions and velocities of every point mass: per cable, vehicle then links 1..n_i.

        The last link mass of each cable sits at the payload attach point.
        """
        x0, v0, R0, Om0, R, Om, q, w = self._split(y)
        qd = cross(w, q)
        pos, vel = [], []
        o = 0
        for i, n in enumerate(self.sizes):
            l = self.l[o:o + n, None]
            a = x0 + R0 @ self.rho[i]
            av = v0 + R0 @ cross(Om0, self.rho[i])
            # x_ij = attach - sum_{a>j} l q_a ; vehicle is j = 0
            lq = l * q[o:o + n]
            lqd = l * qd[o:o + n]
            suffix = np.vstack([np.cumsum(lq[::-1], axis=0)[::-1], np.zeros(3)])
            suffixd = np.vstack([np.cumsum(lqd[::-1], axis=0)[::-1], np.zeros(3)])
            pos.append(a - suffix)
            vel.append(av - suffixd)
            o += n
        return pos, vel

    def energy(self, y):
        x0, v0, R0, Om0, R, Om, q, w = self._split(y)
        pl = self.payload
        T = 0.5 * pl.m0 * v0 @ v0 + 0.5 * Om0 @ pl.J0 @ Om0
        V = -pl.m0 * self.g * x0[2]
        pos, vel = self.point_kinematics(y)
        for i, (p, v) in enumerate(zip(pos, vel)):
            masses = np.concatenate([[self.quads[i].m], self.cables[i].link_masses])
            T += 0.5 * np.sum(masses * np.sum(v * v, axis=1)) + 0.5 * Om[i] @ self.J[i] @ Om[i]
            V -= self.g * masses @ p[:, 2]
        return T, V

    def vehicle_positions(self, y):
        pos, _ = self.point_kinematics(y)
        return np.array([p[0] for p in pos])


def multi_eom(state, system, f, M, dist=NO_DISTURBANCE):
    """Assembled multi-vehicle dynamics (N, P, Omegadot_i) for a MultiSystem."""
    return system.eom(state.to_vector(), f, M, dist)


def energy(state, system):
    """(T, V) for any of the three systems."""
    return system.energy(state.to_vector())


# ------------------------------------------------------------ constructors

def hanging_chain_state(n, x=(0, 0, 0), R=None):
    return ChainState(np.asarray(x, float), np.zeros(3), np.eye(3) if R is None else np.asarray(R, float),
                      np.zeros(3), np.tile(E3, (n, 1)), np.zeros((n, 3)))


def hanging_multi_state(system, x0=(0, 0, 0)):
    nq = system.nq
    return MultiQuadState(np.asarray(x0, float), np.zeros(3), np.eye(3), np.zeros(3),
                          np.tile(np.eye(3), (nq, 1, 1)), np.zeros((nq, 3)),
                          tuple(np.tile(E3, (n, 1)) for n in system.sizes),
                          tuple(np.zeros((n, 3)) for n in system.sizes))
