"""SO(3) and S^2 primitives: hat/vee, exponential map, projections, attitude errors."""
from dataclasses import dataclass

import numpy as np

from .errors import CapTooLarge, Degenerate, DegenerateBearing, SymmetricInput, ValidationError

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])
I3 = np.eye(3)


def hat(v):
    v = np.asarray(v, dtype=float)
    return np.array([[0.0, -v[2], v[1]],
                     [v[2], 0.0, -v[0]],
                     [-v[1], v[0], 0.0]])


def hat_many(v):
    """hat() applied row-wise to an (n, 3) array; returns (n, 3, 3)."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def cross(a, b):
    """Cross product over the last axis; much cheaper than np.cross for small arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape == b.shape == (3,):
        a0, a1, a2 = a
        b0, b1, b2 = b
        return np.array([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    out[..., 0] = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    out[..., 1] = a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2]
    out[..., 2] = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return out


def vee(m):
    """Inverse of hat. Rejects matrices with a significant symmetric part."""
    m = np.asarray(m, dtype=float)
    sym = np.linalg.norm(m + m.T)
    if sym > 1e-6 * np.linalg.norm(m):
        raise SymmetricInput(f"matrix is not skew-symmetric (|m + m^T| = {sym:.3g})")
    return 0.5 * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])


def skew_vee(m):
    """vee of the skew part of m (no symmetry check)."""
    m = np.asarray(m, dtype=float)
    return 0.5 * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])


def exp_so3(v):
    """Rodrigues formula; Taylor series near the origin."""
    v = np.asarray(v, dtype=float)
    th = np.linalg.norm(v)
    K = hat(v)
    if th < 1e-5:
        a = 1.0 - th**2 / 6.0
        b = 0.5 - th**2 / 24.0
    else:
        a = np.sin(th) / th
        b = (1.0 - np.cos(th)) / th**2
    return I3 + a * K + b * (K @ K)


def rot_x(a):
    return exp_so3(a * E1)


def rot_y(a):
    return exp_so3(a * E2)


def rot_z(a):
    return exp_so3(a * E3)


def project_so3(m):
    """Closest rotation in the Frobenius norm (polar factor with det +1)."""
    m = np.asarray(m, dtype=float)
    U, s, Vt = np.linalg.svd(m)
    if s[-1] <= 1e-12 * max(s[0], 1e-300):
        raise Degenerate("matrix is rank deficient; no unique polar factor")
    d = np.sign(np.linalg.det(U @ Vt))
    if d < 0:
        # reflection: the nearest rotation flips the weakest singular direction
        U = U.copy()
        U[:, -1] *= -1.0
    return U @ Vt


def is_rotation(R, tol=1e-9):
    R = np.asarray(R, dtype=float)
    return (R.shape == (3, 3)
            and np.linalg.norm(R.T @ R - I3) <= tol
            and abs(np.linalg.det(R) - 1.0) <= tol)


@dataclass(frozen=True)
class Bearing:
    """A unit vector on S^2 together with an angular velocity orthogonal to it."""
    q: np.ndarray
    omega: np.ndarray


def sphere_project(q, omega):
    q = np.asarray(q, dtype=float)
    omega = np.asarray(omega, dtype=float)
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise DegenerateBearing("bearing vector has zero length")
    q = q / n
    return Bearing(q, omega - (omega @ q) * q)


def sphere_project_many(q, omega):
    """Row-wise sphere_project on (n, 3) arrays."""
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(n < 1e-12):
        raise DegenerateBearing("bearing vector has zero length")
    q = q / n
    return q, omega - np.sum(omega * q, axis=-1, keepdims=True) * q


@dataclass(frozen=True)
class ErrorGainMatrix:
    """G = diag(g1, g2, g3) with distinct positive entries."""
    g1: float = 0.99
    g2: float = 1.0
    g3: float = 1.01

    def __post_init__(self):
        g = (self.g1, self.g2, self.g3)
        if min(g) <= 0:
            raise ValidationError("g1, g2, g3 > 0")
        if len(set(g)) < 3:
            raise ValidationError("g1, g2, g3 pairwise distinct")

    @property
    def matrix(self):
        return np.diag([self.g1, self.g2, self.g3])


def _gmat(G):
    if G is None:
        return I3
    if isinstance(G, ErrorGainMatrix):
        return G.matrix
    return np.asarray(G, dtype=float)


def attitude_error_value(R, Rd, G=None):
    """Psi = 1/2 tr(G (I - Rd^T R)).  G=None means the identity weighting."""
    Gm = _gmat(G)
    return 0.5 * np.trace(Gm @ (I3 - Rd.T @ R))


def attitude_error_vector(R, Rd, G=None):
    Gm = _gmat(G)
    Q = Rd.T @ R
    return 0.5 * skew_vee(Gm @ Q - Q.T @ Gm)


def angular_velocity_error(Omega, R, Rd, Omegad):
    return np.asarray(Omega, float) - R.T @ Rd @ np.asarray(Omegad, float)


@dataclass(frozen=True)
class PsiBounds:
    b1: float
    b2: float
    h1: float
    h2: float
    h3: float
    h4: float
    h5: float


def psi_bounds(G, psi_cap):
    """Quadratic bounds b1 |e_R|^2 <= Psi <= b2 |e_R|^2 (the upper one on Psi < psi_cap)."""
    if not isinstance(G, ErrorGainMatrix):
        G = ErrorGainMatrix(*np.diag(np.asarray(G, float)))
    g = (G.g1, G.g2, G.g3)
    pairs = [(0, 1), (1, 2), (2, 0)]
    sums = [g[i] + g[j] for i, j in pairs]
    diffs = [g[i] - g[j] for i, j in pairs]
    h1 = min(sums)
    h2 = max(d * d for d in diffs)
    h3 = max(s * s for s in sums)
    h4 = max(sums)
    h5 = min(s * s for s in sums)
    if not 0 < psi_cap < h1:
        raise CapTooLarge(f"psi_cap must lie in (0, {h1}); got {psi_cap}")
    b1 = h1 / (h2 + h3)
    b2 = h1 * h4 / (h5 * (h1 - psi_cap))
    return PsiBounds(b1, b2, h1, h2, h3, h4, h5)
