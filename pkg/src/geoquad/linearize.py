"""Linear models about the hanging equilibrium, Lyapunov solves and gain checks.

Reduced coordinates: a link bearing q near e3 is described by
x_q = C^T (e3 x q) in R^2 with C = [e1, e2], and its rate by C^T omega.
For the payload system the payload attitude enters through
eta0 = vee(R0 - R0^T) / 2.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import NotHurwitz, NotStabilizable, SingularMass, ValidationError
from .manifold import E3, hat, hat_many, skew_vee
from .model import GRAVITY, chain_inertia_constants, multi_mass_constants

C = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
E3_HAT = hat(E3)
E3C = E3_HAT @ C            # maps x_q to the horizontal link deflection (with a minus sign)

LYAP_KRON_MAX = 40


@dataclass
class LinearModel:
    """M xdd + G x = B du."""
    Mmat: np.ndarray
    Gmat: np.ndarray
    Bmat: np.ndarray

    def __post_init__(self):
        D = self.Mmat.shape[0]
        if self.Mmat.shape != (D, D) or self.Gmat.shape != (D, D) or self.Bmat.shape[0] != D:
            raise ValidationError("linear model dimensions consistent")

    @property
    def n_state(self):
        return self.Mmat.shape[0]

    @property
    def n_input(self):
        return self.Bmat.shape[1]


@dataclass
class StateSpace:
    A: np.ndarray
    B: np.ndarray

    @property
    def eigenvalues(self):
        return np.linalg.eigvals(self.A)

    def is_hurwitz(self, margin=1e-12):
        return bool(np.max(self.eigenvalues.real) < -margin)


# ------------------------------------------------------------------ models

def linearize_chain(quad, cable, g=GRAVITY):
    """State [dx (3), x_q1..x_qn (2 each)], input: thrust force perturbation."""
    n = cable.n
    M00, M0, Mij = chain_inertia_constants(quad, cable)
    D = 3 + 2 * n
    M = np.zeros((D, D))
    G = np.zeros((D, D))
    M[0:3, 0:3] = M00 * np.eye(3)
    for i in range(n):
        s = 3 + 2 * i
        M[0:3, s:s + 2] = -M0[i] * E3C
        M[s:s + 2, 0:3] = -M0[i] * E3C.T
        for j in range(n):
            M[s:s + 2, 3 + 2 * j:5 + 2 * j] = Mij[i, j] * np.eye(2)
        G[s:s + 2, s:s + 2] = M0[i] * g * np.eye(2)      # (sum_{a>=i} m_a) g l_i
    B = np.zeros((D, 3))
    B[0:3] = np.eye(3)
    return LinearModel(M, G, B)


def linearize_multi(payload, quads, cables, g=GRAVITY):
    """State [dx0, eta0, x_q of cable 1 links 1..n_1, cable 2, ...]; input [du_1, ..., du_nq].

    Link rows are scaled by the link length so that M is symmetric.
    """
    nq = len(quads)
    MT, MiT, M0ij = multi_mass_constants(payload, quads, cables)
    rho = payload.attach_points
    rh = hat_many(rho)
    share = payload.m0 / nq
    sizes = [c.n for c in cables]
    D = 6 + 2 * sum(sizes)
    M = np.zeros((D, D))
    G = np.zeros((D, D))
    B = np.zeros((D, 3 * nq))
    M[0:3, 0:3] = MT * np.eye(3)
    M[0:3, 3:6] = -np.einsum("i,iab->ab", MiT, rh)
    M[3:6, 0:3] = M[0:3, 3:6].T
    M[3:6, 3:6] = payload.J0 - np.einsum("i,iab,ibc->ac", MiT, rh, rh)
    G[3:6, 3:6] = share * g * np.einsum("iab,bc->ac", rh, E3_HAT)
    o = 6
    for i, c in enumerate(cables):
        l = c.link_lengths
        B[0:3, 3 * i:3 * i + 3] = np.eye(3)
        B[3:6, 3 * i:3 * i + 3] = rh[i]
        for j in range(c.n):
            s = o + 2 * j
            a = M0ij[i][j] * l[j]
            M[0:3, s:s + 2] = a * E3C
            M[s:s + 2, 0:3] = -a * C.T @ E3_HAT
            M[3:6, s:s + 2] = a * rh[i] @ E3C
            M[s:s + 2, 3:6] = a * C.T @ E3_HAT @ rh[i]
            for k in range(c.n):
                M[s:s + 2, o + 2 * k:o + 2 * k + 2] = M0ij[i][min(j, k)] * l[j] * l[k] * np.eye(2)
            G[s:s + 2, s:s + 2] = (MiT[i] + share - M0ij[i][j]) * g * l[j] * np.eye(2)
            B[s:s + 2, 3 * i:3 * i + 3] = -l[j] * C.T @ E3_HAT
        o += 2 * c.n
    return LinearModel(M, G, B)


def state_space(lm, K_x=None, K_xdot=None):
    """A = [[0, I], [-M^-1 (G + B Kx), -M^-1 B Kxd]],  B = [[0], [M^-1]]."""
    D, m = lm.n_state, lm.n_input
    K_x = np.zeros((m, D)) if K_x is None else np.asarray(K_x, float)
    K_xdot = np.zeros((m, D)) if K_xdot is None else np.asarray(K_xdot, float)
    if K_x.shape != (m, D) or K_xdot.shape != (m, D):
        raise ValidationError("gain matrices shaped (inputs, states)")
    try:
        Minv = np.linalg.inv(lm.Mmat)
    except np.linalg.LinAlgError as exc:
        raise SingularMass("linear mass matrix is singular") from exc
    A = np.zeros((2 * D, 2 * D))
    A[:D, D:] = np.eye(D)
    A[D:, :D] = -Minv @ (lm.Gmat + lm.Bmat @ K_x)
    A[D:, D:] = -Minv @ lm.Bmat @ K_xdot
    Bb = np.vstack([np.zeros((D, D)), Minv])
    return StateSpace(A, Bb)


def open_loop(lm):
    """First-order form of the uncontrolled model with the actual input matrix."""
    ss = state_space(lm)
    return ss.A, ss.B @ lm.Bmat


# ---------------------------------------------------------- Lyapunov / LQR

def _lyap_kron(A, Q):
    n = A.shape[0]
    I = np.eye(n)
    K = np.kron(I, A.T) + np.kron(A.T, I)
    p = np.linalg.solve(K, -Q.reshape(-1, order="F"))
    return p.reshape(n, n, order="F")


def solve_lyapunov(A, Q):
    """P solving A^T P + P A = -Q for Hurwitz A."""
    A = np.asarray(A, float)
    Q = np.asarray(Q, float)
    lam = np.linalg.eigvals(A)
    if np.max(lam.real) >= -1e-12:
        raise NotHurwitz(f"max real eigenvalue {np.max(lam.real):.3g}")
    if A.shape[0] <= LYAP_KRON_MAX:
        P = _lyap_kron(A, Q)
    else:
        P = sla.solve_continuous_lyapunov(A.T, -Q)
    return 0.5 * (P + P.T)


def lyapunov_residual(A, P, Q):
    return float(np.linalg.norm(A.T @ P + P @ A + Q) / np.linalg.norm(Q))


def synthesize_gains_lqr(lm, Qw, Rw):
    """LQR on the first-order model; returns (K_x, K_xdot) for du = -K_x x - K_xdot xdot."""
    A, B = open_loop(lm)
    D = lm.n_state
    Qw = np.atleast_2d(np.asarray(Qw, float))
    Rw = np.atleast_2d(np.asarray(Rw, float))
    try:
        P = sla.solve_continuous_are(A, B, Qw, Rw)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NotStabilizable(str(exc)) from exc
    K = np.linalg.solve(Rw, B.T @ P)
    K_x, K_xdot = K[:, :D], K[:, D:]
    if not state_space(lm, K_x, K_xdot).is_hurwitz():
        raise NotStabilizable("Riccati gain does not stabilize the model")
    return K_x, K_xdot


# ------------------------------------------------------------ reduced states

_FLIP = np.array([-1.0, 1.0])     # C^T (e3 x q) = (-q_2, q_1)


def chain_reduced_state(y, n, xd):
    """(x, xdot) of the chain linear model from a flat chain state vector."""
    q = y[18:18 + 3 * n].reshape(n, 3)
    w = y[18 + 3 * n:18 + 6 * n].reshape(n, 3)
    x = np.concatenate([y[0:3] - xd, (q[:, 1::-1] * _FLIP).ravel()])   # C^T (e3 x q)
    xd_ = np.concatenate([y[3:6], w[:, :2].ravel()])
    return x, xd_


def multi_reduced_state(y, nq, L, x0d):
    """(x, xdot) of the payload linear model from a flat multi-vehicle state vector."""
    R0 = y[6:15].reshape(3, 3)
    o = 18 + 12 * nq
    q = y[o:o + 3 * L].reshape(L, 3)
    w = y[o + 3 * L:o + 6 * L].reshape(L, 3)
    eta = skew_vee(R0)                          # vee(R0 - R0^T) / 2
    x = np.concatenate([y[0:3] - x0d, eta, (q[:, 1::-1] * _FLIP).ravel()])
    xd_ = np.concatenate([y[3:6], y[15:18], w[:, :2].ravel()])
    return x, xd_


def chain_gain_matrices(kx, kv, kq, kw):
    """Stack scalar gains into (K_x, K_xdot) for the chain model.

    Link blocks act through e3^ C, i.e. the thrust perturbation contains
    +kq_i times the horizontal deflection of link i, which moves the vehicle
    back over the swinging chain.
    """
    kq = np.atleast_1d(np.asarray(kq, float))
    kw = np.atleast_1d(np.asarray(kw, float))
    K_x = np.hstack([kx * np.eye(3)] + [k * E3C for k in kq])
    K_xdot = np.hstack([kv * np.eye(3)] + [k * E3C for k in kw])
    return K_x, K_xdot


# --------------------------------------------------------------- gain sets

@dataclass
class GainSet:
    """Controller gains.  Augmentation gains (gamma_*, kI, kz) may be zero to disable a term."""
    kx: float = 0.0
    kv: float = 0.0
    kR: float = 0.0
    kOmega: float = 0.0
    c1: float = 0.1
    c2: float = 0.1
    gamma_x: float = 0.0
    gamma_R: float = 0.0
    kI: float = 0.0
    kz: float = 0.0
    sigma: float = 1.0
    K_x: np.ndarray | None = None
    K_xdot: np.ndarray | None = None
    K_z: np.ndarray | None = None
    B_theta: float = np.inf
    B_Wx: float = 1.0
    B1: float = 0.0
    B2: float = 0.0

    def __post_init__(self):
        for name in ("kR", "kOmega", "c1", "c2", "sigma"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} > 0")
        for name in ("kx", "kv", "gamma_x", "gamma_R", "kI", "kz"):
            if not getattr(self, name) >= 0:
                raise ValidationError(f"{name} >= 0")
        if not self.B_theta > 0:
            raise ValidationError("B_theta > 0")
        for name in ("K_x", "K_xdot", "K_z"):
            v = getattr(self, name)
            if v is not None:
                v = np.atleast_2d(np.asarray(v, float))
                if not np.all(np.isfinite(v)):
                    raise ValidationError(f"{name} finite")
                setattr(self, name, v)


# ----------------------------------------------------------- gain checkers

@dataclass
class GainReport:
    passed: bool
    margins: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)


def check_attitude_gain_condition(J, kR, kOmega, c2, Omega_d_max):
    J = np.asarray(J, float)
    lam = np.linalg.eigvalsh(J)
    lm_, lM = lam[0], lam[-1]
    B2 = np.linalg.norm(2 * J - np.trace(J) * np.eye(3), 2) * Omega_d_max
    bound1 = np.sqrt(kR * lm_) / lM
    bound2 = 4 * kOmega / (8 * kR * lM + (kOmega + B2) ** 2)
    c2_max = min(bound1, bound2)
    return GainReport(bool(0 < c2 < c2_max),
                      {"c2": c2_max - c2},
                      {"B2": B2, "bound1": bound1, "bound2": bound2, "lambda_m": lm_, "lambda_M": lM})


def position_gain_matrices(kx, kv, kR, kOmega, c1, c2, m, J, psi1, e_x_max, B_Wx, B_theta, B1, B2):
    """(W1, W12, W2) of the coupled translational/rotational Lyapunov analysis."""
    lM = np.linalg.eigvalsh(np.asarray(J, float))[-1]
    alpha = np.sqrt(psi1 * (2 - psi1))
    W1 = np.array([[c1 * kx * (1 - alpha), -0.5 * c1 * kv * (1 + alpha)],
                   [-0.5 * c1 * kv * (1 + alpha), kv * (1 - alpha) - m * c1]])
    b = B_Wx * B_theta + B1
    W12 = np.array([[c1 * b, 0.0],
                    [b + kx * e_x_max, 0.0]])
    W2 = np.array([[c2 * kR, -0.5 * c2 * (kOmega + B2)],
                   [-0.5 * c2 * (kOmega + B2), kOmega - 2 * c2 * lM]])
    return W1, W12, W2


def check_position_gain_condition(gains, m, J, psi1, e_x_max=10.0, B_Wx=None, B_theta=None, B1=None, B2=None):
    """Evaluate the c1 bound and lambda_min(W2) > |W12|^2 / (4 lambda_min(W1))."""
    if not 0 < psi1 < 1:
        raise ValidationError("0 < psi1 < 1")
    B_Wx = gains.B_Wx if B_Wx is None else B_Wx
    B_theta = gains.B_theta if B_theta is None else B_theta
    B1 = gains.B1 if B1 is None else B1
    B2 = gains.B2 if B2 is None else B2
    kx, kv, c1 = gains.kx, gains.kv, gains.c1
    alpha = np.sqrt(psi1 * (2 - psi1))
    W1, W12, W2 = position_gain_matrices(kx, kv, gains.kR, gains.kOmega, c1, gains.c2, m, J, psi1,
                                         e_x_max, B_Wx, B_theta, B1, B2)
    c1_max = min(4 * kx * kv * (1 - alpha) ** 2 / (kv ** 2 * (1 + alpha) ** 2 + 4 * m * kx * (1 - alpha)),
                 np.sqrt(kx / m))
    l1 = np.linalg.eigvalsh(W1)[0]
    l2 = np.linalg.eigvalsh(W2)[0]
    rhs = np.linalg.norm(W12, 2) ** 2 / (4 * l1) if l1 > 0 else np.inf
    margins = {"c1": c1_max - c1, "W": l2 - rhs}
    return GainReport(bool(c1 < c1_max and l1 > 0 and l2 > rhs), margins,
                      {"alpha": alpha, "W1": W1, "W12": W12, "W2": W2, "lambda_W1": l1, "lambda_W2": l2})
