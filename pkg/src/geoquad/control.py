"""Geometric controllers, commanded-attitude construction and rotor mixing.

Conventions: A denotes a desired thrust *force* vector (hover: A = -m g e3),
the body axis b3 = R e3 points opposite to the thrust, f = -A . R e3.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateThrust, ParallelHeading, ValidationError
from .linearize import chain_reduced_state, multi_reduced_state
from .manifold import (E1, E3, angular_velocity_error, cross, attitude_error_value, attitude_error_vector,
                       exp_so3, hat, skew_vee)
from .model import GRAVITY

THRUST_TOL = 1e-9
HEADING_TOL = 1e-6


# ------------------------------------------------------------------ mixing

def mixer_matrix(d, c_tau_f):
    """Maps rotor thrusts (f1..f4) to (f, M1, M2, M3) for a plus configuration."""
    return np.array([[1.0, 1.0, 1.0, 1.0],
                     [0.0, d, 0.0, -d],
                     [-d, 0.0, d, 0.0],
                     [-c_tau_f, c_tau_f, -c_tau_f, c_tau_f]])


def rotor_mix(f, M, d, c_tau_f):
    return np.linalg.solve(mixer_matrix(d, c_tau_f), np.concatenate([[f], M]))


def rotor_unmix(thrusts, d, c_tau_f):
    w = mixer_matrix(d, c_tau_f) @ np.asarray(thrusts, float)
    return w[0], w[1:]


def saturate_rotors(thrusts, f_max):
    """Clamp each rotor to [0, f_max]; returns (thrusts, saturated?)."""
    thrusts = np.asarray(thrusts, float)
    out = np.clip(thrusts, 0.0, np.inf if f_max is None else f_max)
    return out, bool(np.any(out != thrusts))


# ------------------------------------------------------- commanded attitude

def computed_attitude(A, b1d):
    """Rotation whose third axis is -A/|A| and whose first axis follows b1d."""
    A = np.asarray(A, float)
    nA = np.linalg.norm(A)
    if nA <= THRUST_TOL:
        raise DegenerateThrust("desired thrust vector vanished")
    b3 = -A / nA
    b1d = np.asarray(b1d, float)
    b2 = cross(b3, b1d)
    nb2 = np.linalg.norm(b2)
    if nb2 <= np.sin(HEADING_TOL) * np.linalg.norm(b1d):
        raise ParallelHeading("desired heading is parallel to the thrust axis")
    b2 /= nb2
    b1 = cross(b2, b3)
    return np.column_stack([b1, b2, b3])


def computed_attitude_rates(Rm, R0, Rp, h):
    """Body rate and its derivative from three samples spaced by h."""
    Omega = skew_vee(R0.T @ (Rp - Rm)) / (2.0 * h)
    dOmega = skew_vee(R0.T @ (Rp - 2.0 * R0 + Rm)) / (h * h)
    return Omega, dOmega


def sat(x, sigma):
    return np.clip(x, -sigma, sigma)


def projection_update(theta, y, bound):
    """Adaptive update y, projected so that |theta| never grows past bound."""
    n2 = theta @ theta
    if n2 < bound * bound or theta @ y <= 0.0:
        return y
    return y - (theta @ y) / n2 * theta


# ---------------------------------------------------------------- commands

@dataclass
class AttitudeCommand:
    Rd: np.ndarray
    Omegad: np.ndarray
    dOmegad: np.ndarray


@dataclass
class PositionCommand:
    xd: np.ndarray
    dxd: np.ndarray
    ddxd: np.ndarray
    b1d: np.ndarray


@dataclass
class AdaptiveState:
    theta_x: np.ndarray
    theta_R: np.ndarray
    e_I: np.ndarray | None = None
    e_bx: np.ndarray | None = None


@dataclass
class ControlOutput:
    f: float
    M: np.ndarray
    rotor_thrusts: np.ndarray | None = None
    saturated: bool = False


def spin_command(axis, rate):
    """Constant-rate rotation about a fixed unit axis, as a function of time."""
    axis = np.asarray(axis, float) / np.linalg.norm(axis)

    def cmd(t):
        return AttitudeCommand(exp_so3(rate * t * axis), rate * axis, np.zeros(3))
    return cmd


def hold_position(xd, b1d=E1):
    xd = np.asarray(xd, float)
    b1d = np.asarray(b1d, float)

    def cmd(t):
        return PositionCommand(xd, np.zeros(3), np.zeros(3), b1d)
    return cmd


# ------------------------------------------------------- single-vehicle laws

def _W(W_mode):
    return np.eye(3) if W_mode == "identity" else np.zeros((3, 3))


def attitude_control(state, cmd, gains, adaptive, J, W_mode="identity", G=None):
    """Returns (M, dtheta_R, e_R, e_Omega)."""
    R, Om = state.R, state.Omega
    W = _W(W_mode)
    e_R = attitude_error_vector(R, cmd.Rd, G)
    e_Om = angular_velocity_error(Om, R, cmd.Rd, cmd.Omegad)
    a = R.T @ cmd.Rd @ cmd.Omegad
    M = (-gains.kR * e_R - gains.kOmega * e_Om - W @ adaptive.theta_R
         + hat(a) @ J @ a + J @ R.T @ cmd.Rd @ cmd.dOmegad)
    dtheta_R = gains.gamma_R * W.T @ (e_Om + gains.c2 * e_R)
    return M, dtheta_R, e_R, e_Om


def position_thrust_vector(x, v, theta_x, cmd, gains, m, W_mode="identity", g=GRAVITY):
    """Desired thrust force A = -kx e_x - kv e_v - W theta_x - m g e3 + m xdd_d."""
    e_x = x - cmd.xd
    e_v = v - cmd.dxd
    return -gains.kx * e_x - gains.kv * e_v - _W(W_mode) @ theta_x - m * g * E3 + m * cmd.ddxd


def position_control(state, cmd, gains, adaptive, quad, Rc, Omegac, dOmegac, W_mode="identity",
                     g=GRAVITY, G=None):
    """Returns (f, M, dtheta_x, dtheta_R, e_R, e_Omega)."""
    A = position_thrust_vector(state.x, state.v, adaptive.theta_x, cmd, gains, quad.m, W_mode, g)
    f = -A @ state.R[:, 2]
    M, dtheta_R, e_R, e_Om = attitude_control(state, AttitudeCommand(Rc, Omegac, dOmegac), gains,
                                              adaptive, quad.J, W_mode, G)
    e_x = state.x - cmd.xd
    e_v = state.v - cmd.dxd
    y = gains.gamma_x * _W(W_mode).T @ (e_v + gains.c1 * e_x)
    dtheta_x = projection_update(adaptive.theta_x, y, gains.B_theta)
    return f, M, dtheta_x, dtheta_R, e_R, e_Om


def tracking_moment(R, Om, Rc, Omc, dOmc, J, kR, kOmega, kI=0.0, e_I=None):
    """SO(3) tracking moment (identity-weighted errors).  Returns (M, e_R, e_Omega)."""
    e_R = attitude_error_vector(R, Rc)
    e_Om = angular_velocity_error(Om, R, Rc, Omc)
    a = R.T @ Rc @ Omc
    M = -kR * e_R - kOmega * e_Om + hat(a) @ J @ a + J @ R.T @ Rc @ dOmc
    if e_I is not None:
        M = M - kI * e_I
    return M, e_R, e_Om


def chain_moment(R, Om, Rc, Omc, dOmc, J, gains, e_I):
    """Moment of the chain controller; written with the Omega x J Omega cancellation."""
    e_R = attitude_error_vector(R, Rc)
    e_Om = angular_velocity_error(Om, R, Rc, Omc)
    M = (-gains.kR * e_R - gains.kOmega * e_Om - gains.kI * e_I + cross(Om, J @ Om)
         - J @ (hat(Om) @ R.T @ Rc @ Omc - R.T @ Rc @ dOmc))
    return M, e_R, e_Om


# ------------------------------------------------------ command prediction

def predict_states(s, F, h):
    """Second-order Taylor prediction of s(t - h), s(t + h) with sdd by central difference.

    Returns (s(t - h), s(t + h), F(s)).
    """
    sd = F(s)
    sdd = (F(s + h * sd) - F(s - h * sd)) / (2.0 * h)
    return s - h * sd + 0.5 * h * h * sdd, s + h * sd + 0.5 * h * h * sdd, sd


def observer_gains(bandwidth, mass):
    """Gains (l1, l2) of a velocity/force observer with a double pole at -bandwidth."""
    return 2.0 * bandwidth, bandwidth * bandwidth * mass


# ------------------------------------------------------------ controllers
#
# Controller objects are used by the simulator.  Each exposes
#   n_internal, initial_internal(), and
#   __call__(t, y, z) -> ((f, M), zdot, info), with per-vehicle arrays for the multi system
# where y is the flat plant state and z the controller's own integrator state.

class FlightController:
    """Shared pieces for the single-vehicle attitude and position modes.

    Internal state z = [theta_bar_x (3), theta_bar_R (3)] so that switching
    between modes carries the estimates over unchanged.
    """
    n_internal = 6

    def __init__(self, system, gains, W_mode="identity", G=None, h=1e-3):
        self.system = system
        self.quad = system.quad
        self.gains = gains
        self.W_mode = W_mode
        self.G = G
        self.h = h

    def initial_internal(self):
        return np.zeros(6)

    def _state(self, y):
        return self.system.unpack(y)

    def _adaptive(self, z):
        return AdaptiveState(z[0:3], z[3:6])


class AttitudeModeController(FlightController):
    """Attitude tracking of R_d(t).

    The thrust magnitude is free in this mode.  Without ``hold`` it is the
    hover value m g; with a position command ``hold`` it is the projection
    max(0, -A . R e3) of the position-mode thrust vector, which limits the
    altitude loss while the vehicle is tilted.
    """

    def __init__(self, system, gains, command, W_mode="identity", G=None, h=1e-3, hold=None):
        super().__init__(system, gains, W_mode, G, h)
        self.command = command
        self.hold = hold

    def __call__(self, t, y, z):
        st = self._state(y)
        cmd = self.command(t)
        ad = self._adaptive(z)
        M, dth_R, e_R, e_Om = attitude_control(st, cmd, self.gains, ad, self.quad.J, self.W_mode, self.G)
        if self.hold is None:
            f = self.quad.m * self.system.g
        else:
            A = position_thrust_vector(st.x, st.v, ad.theta_x, self.hold(t), self.gains, self.quad.m,
                                       self.W_mode, self.system.g)
            f = max(0.0, -A @ st.R[:, 2])
        zdot = np.concatenate([np.zeros(3), dth_R])
        info = {"Rc": cmd.Rd, "e_R": e_R, "e_Omega": e_Om,
                "psi": attitude_error_value(st.R, cmd.Rd, self.G),
                "e_x": np.zeros(3), "e_v": np.zeros(3)}
        return (f, M), zdot, info


class PositionModeController(FlightController):
    """Position tracking with computed attitude and projection-based adaptation."""

    def __init__(self, system, gains, command, W_mode="identity", G=None, h=1e-3):
        super().__init__(system, gains, W_mode, G, h)
        self.command = command

    def _A(self, s, t):
        cmd = self.command(t)
        return position_thrust_vector(s[0:3], s[3:6], s[15:18], cmd, self.gains, self.quad.m,
                                      self.W_mode, self.system.g), cmd.b1d

    def _prediction_rates(self, t, Om):
        """Nominal closed-loop rates of s = [x, v, R, theta_x] with the estimate as disturbance."""
        m, g = self.quad.m, self.system.g
        W = _W(self.W_mode)

        def F(s):
            A, _ = self._A(s, t)
            R = s[6:15].reshape(3, 3)
            f = -A @ R[:, 2]
            cmd = self.command(t)
            vdot = g * E3 - f / m * R[:, 2] + W @ s[15:18] / m
            y_ad = self.gains.gamma_x * W.T @ (s[3:6] - cmd.dxd + self.gains.c1 * (s[0:3] - cmd.xd))
            return np.concatenate([s[3:6], vdot, (R @ hat(Om)).ravel(),
                                   projection_update(s[15:18], y_ad, self.gains.B_theta)])
        return F

    def commanded(self, t, y, z):
        s = np.concatenate([y[0:15], z[0:3]])
        h = self.h
        sm, sp, _ = predict_states(s, self._prediction_rates(t, y[15:18]), h)
        A0, b1 = self._A(s, t)
        Rc = computed_attitude(A0, b1)
        Rm = computed_attitude(*self._A(sm, t - h))
        Rp = computed_attitude(*self._A(sp, t + h))
        Omc, dOmc = computed_attitude_rates(Rm, Rc, Rp, h)
        return Rc, Omc, dOmc

    def __call__(self, t, y, z):
        st = self._state(y)
        cmd = self.command(t)
        ad = self._adaptive(z)
        Rc, Omc, dOmc = self.commanded(t, y, z)
        f, M, dth_x, dth_R, e_R, e_Om = position_control(st, cmd, self.gains, ad, self.quad, Rc, Omc, dOmc,
                                                         self.W_mode, self.system.g, self.G)
        info = {"Rc": Rc, "e_R": e_R, "e_Omega": e_Om,
                "psi": attitude_error_value(st.R, Rc, self.G),
                "e_x": st.x - cmd.xd, "e_v": st.v - cmd.dxd}
        return (f, M), np.concatenate([dth_x, dth_R]), info

    def clamp_internal(self, z):
        """Discrete safeguard of the projection law: |theta_x| <= B_theta after every step."""
        B = self.gains.B_theta
        if np.linalg.norm(z[0:3]) > B:
            z = z.copy()
            # aim a few ulps inside the ball so that no rounding of the norm exceeds B
            z[0:3] *= B * (1.0 - 8.0 * np.finfo(float).eps) / np.linalg.norm(z[0:3])
        return z


class ScheduledController:
    """Switches between controllers sharing one internal-state layout.

    ``schedule`` is a list of (start time, controller); the entry with the
    latest start strictly before t is active (the first entry covers t = 0).
    """

    def __init__(self, schedule):
        self.schedule = sorted(schedule, key=lambda e: e[0])
        times = [e[0] for e in self.schedule]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValidationError("schedule times strictly increasing")
        sizes = {c.n_internal for _, c in self.schedule}
        if len(sizes) != 1:
            raise ValidationError("scheduled controllers share one internal state layout")
        self.n_internal = sizes.pop()

    def active(self, t):
        idx = 0
        for k, (ts, _) in enumerate(self.schedule):
            if k == 0 or t > ts + 1e-12 * max(1.0, abs(ts)):
                idx = k
        return idx, self.schedule[idx][1]

    def initial_internal(self):
        return self.schedule[0][1].initial_internal()

    def __call__(self, t, y, z):
        idx, ctrl = self.active(t)
        u, zdot, info = ctrl(t, y, z)
        info["mode"] = idx
        return u, zdot, info

    def clamp_internal(self, z):
        for _, c in self.schedule:
            if hasattr(c, "clamp_internal"):
                z = c.clamp_internal(z)
        return z


class ChainController:
    """Stabilizes the vehicle over x_d with the chain hanging straight down.

    The thrust vector is A = -K_x x - K_xdot xdot - K_z sat(e_bx) - M00 g e3,
    where e_bx integrates (P Bb)^T [x; xdot] and P solves the Lyapunov equation
    of the linear closed loop.  The rates of the computed attitude come from a
    short prediction with the model; a velocity/force observer (states v_hat,
    d_hat) supplies the constant force the model does not know about, so the
    prediction is unbiased at rest.

    Internal state z = [e_I (3), e_bx (3 + 2n), v_hat (3), d_hat (3)].
    """

    def __init__(self, system, gains, xd, P, Bb, b1d=E1, integral=True, h=1e-3, observer_bandwidth=5.0):
        self.system = system
        self.gains = gains
        self.xd = np.asarray(xd, float)
        self.b1d = np.asarray(b1d, float)
        self.integral = integral
        self.h = h
        self.n = system.n
        self.D = 3 + 2 * self.n
        self.PB = P @ Bb
        self.n_internal = 9 + self.D
        self.A_hover = -system.M00 * system.g * E3
        self.l1, self.l2 = observer_gains(observer_bandwidth, system.M00)

    def initial_internal(self):
        return np.zeros(self.n_internal)

    def split_internal(self, z):
        D = self.D
        return z[0:3], z[3:3 + D], z[3 + D:6 + D], z[6 + D:9 + D]

    def thrust_vector(self, y, e_bx):
        x, xd_ = chain_reduced_state(y, self.n, self.xd)
        g = self.gains
        A = -g.K_x @ x - g.K_xdot @ xd_ + self.A_hover
        if self.integral:
            A = A - g.K_z @ sat(e_bx, g.sigma)
        return A, x, xd_

    def _prediction_rates(self, Om, d_hat):
        """Closed-loop rates of s = [y, e_bx] with the body rate frozen."""
        sysm = self.system
        dim = sysm.dim

        def F(s):
            y = s[:dim].copy()
            y[15:18] = Om
            A, x, xd_ = self.thrust_vector(y, s[dim:])
            b3 = y[6:15].reshape(3, 3)[:, 2]
            yd = sysm.rates(y, 0.0, np.zeros(3), force=(A @ b3) * b3 + d_hat)
            yd[15:18] = 0.0
            return np.concatenate([yd, self.PB.T @ np.concatenate([x, xd_])])
        return F

    def commanded(self, t, y, e_bx, d_hat=np.zeros(3)):
        """(Rc, Omega_c, dOmega_c, predicted vehicle acceleration)."""
        h = self.h
        s = np.concatenate([y, e_bx])
        sm, sp, sd = predict_states(s, self._prediction_rates(y[15:18], d_hat), h)
        dim = self.system.dim
        Rc = computed_attitude(self.thrust_vector(y, e_bx)[0], self.b1d)
        Rm = computed_attitude(self.thrust_vector(sm[:dim], sm[dim:])[0], self.b1d)
        Rp = computed_attitude(self.thrust_vector(sp[:dim], sp[dim:])[0], self.b1d)
        Omc, dOmc = computed_attitude_rates(Rm, Rc, Rp, h)
        return Rc, Omc, dOmc, sd[3:6]

    def __call__(self, t, y, z):
        e_I, e_bx, v_hat, d_hat = self.split_internal(z)
        R, Om = y[6:15].reshape(3, 3), y[15:18]
        A, x, xd_ = self.thrust_vector(y, e_bx)
        f = -A @ R[:, 2]
        Rc, Omc, dOmc, acc = self.commanded(t, y, e_bx, d_hat)
        gains = self.gains
        M, e_R, e_Om = chain_moment(R, Om, Rc, Omc, dOmc, self.system.quad.J, gains,
                                    e_I if self.integral else np.zeros(3))
        dv = y[3:6] - v_hat
        zdot = np.zeros(self.n_internal)
        if self.integral:
            zdot[0:3] = e_Om + gains.c2 * e_R
            zdot[3:3 + self.D] = self.PB.T @ np.concatenate([x, xd_])
        zdot[3 + self.D:6 + self.D] = acc + self.l1 * dv
        zdot[6 + self.D:] = self.l2 * dv
        info = {"Rc": Rc, "e_R": e_R, "e_Omega": e_Om, "psi": attitude_error_value(R, Rc),
                "e_x": y[0:3] - self.xd, "e_v": y[3:6]}
        return (f, M), zdot, info


class MultiController:
    """Payload stabilization with nq vehicles.

    Each vehicle tracks A_i = -K_x,i x - K_xdot,i xdot + u_i* with an SO(3)
    moment law.  With ``integral`` on, an attitude integral per vehicle and a
    saturated, Lyapunov-weighted integral on the payload position are added.
    A velocity/force observer on the payload (states v_hat, d_hat) supplies the
    net unmodeled force to the short model prediction behind the commanded
    attitude rates.
    Internal state z = [e_I (3 nq), e_bx (D), v_hat (3), d_hat (3)].
    """

    def __init__(self, system, gains, x0d, b1d=None, integral=False, P=None, Bb=None, h=1e-3,
                 observer_bandwidth=5.0):
        self.system = system
        self.gains = gains
        self.x0d = np.asarray(x0d, float)
        nq = system.nq
        self.nq = nq
        self.b1d = np.tile(E1, (nq, 1)) if b1d is None else np.atleast_2d(np.asarray(b1d, float))
        self.integral = integral
        self.h = h
        self.D = 6 + 2 * system.L
        share = system.payload.m0 / nq
        self.u_star = -np.outer(system.MiT + share, E3) * system.g
        self.K_x = gains.K_x.reshape(nq, 3, self.D)
        self.K_xdot = gains.K_xdot.reshape(nq, 3, self.D)
        if integral:
            if P is None or Bb is None:
                raise ValidationError("integral augmentation needs the Lyapunov solution")
            self.PB = P @ Bb
            self.K_z = gains.K_z.reshape(nq, 3, self.D)
        self.n_internal = 3 * nq + self.D + 6
        self.l1, self.l2 = observer_gains(observer_bandwidth, system.MT)

    def initial_internal(self):
        return np.zeros(self.n_internal)

    def thrust_vectors(self, y, e_bx):
        x, xd_ = multi_reduced_state(y, self.nq, self.system.L, self.x0d)
        A = -self.K_x @ x - self.K_xdot @ xd_ + self.u_star
        if self.integral:
            A = A - self.K_z @ sat(e_bx, self.gains.sigma)
        return A, x, xd_

    def split_internal(self, z):
        nq, D = self.nq, self.D
        o = 3 * nq + D
        return z[0:3 * nq].reshape(nq, 3), z[3 * nq:o], z[o:o + 3], z[o + 3:o + 6]

    def _prediction_rates(self, y0, d_hat):
        sysm = self.system
        dim = sysm.dim
        o = 18 + 9 * self.nq
        Om = y0[o:o + 3 * self.nq].copy()

        def F(s):
            y = s[:dim].copy()
            y[o:o + 3 * self.nq] = Om
            A, x, xd_ = self.thrust_vectors(y, s[dim:])
            b3 = y[18:18 + 9 * self.nq].reshape(self.nq, 3, 3)[:, :, 2]
            thrust = np.einsum("ia,ia->i", A, b3)[:, None] * b3
            yd = sysm.rates(y, np.zeros(self.nq), np.zeros((self.nq, 3)),
                            force=thrust + d_hat / self.nq)
            yd[o:o + 3 * self.nq] = 0.0
            ebd = self.PB.T @ np.concatenate([x, xd_]) if self.integral else np.zeros(self.D)
            return np.concatenate([yd, ebd])
        return F

    def commanded(self, t, y, e_bx, d_hat=np.zeros(3)):
        """(A, [(Rc, Omega_c, dOmega_c) per vehicle], predicted payload acceleration)."""
        h = self.h
        dim = self.system.dim
        s = np.concatenate([y, e_bx])
        sm, sp, sd = predict_states(s, self._prediction_rates(y, d_hat), h)
        A0 = self.thrust_vectors(y, e_bx)[0]
        Am = self.thrust_vectors(sm[:dim], sm[dim:])[0]
        Ap = self.thrust_vectors(sp[:dim], sp[dim:])[0]
        out = []
        for i in range(self.nq):
            Rc = computed_attitude(A0[i], self.b1d[i])
            Omc, dOmc = computed_attitude_rates(computed_attitude(Am[i], self.b1d[i]), Rc,
                                                computed_attitude(Ap[i], self.b1d[i]), h)
            out.append((Rc, Omc, dOmc))
        return A0, out, sd[3:6]

    def __call__(self, t, y, z):
        nq = self.nq
        e_I, e_bx, v_hat, d_hat = self.split_internal(z)
        R = y[18:18 + 9 * nq].reshape(nq, 3, 3)
        Om = y[18 + 9 * nq:18 + 12 * nq].reshape(nq, 3)
        A, cmds, acc = self.commanded(t, y, e_bx, d_hat)
        g = self.gains
        f = -np.einsum("ia,ia->i", A, R[:, :, 2])
        M = np.zeros((nq, 3))
        dI = np.zeros((nq, 3))
        psi = np.zeros(nq)
        e_R_all = np.zeros((nq, 3))
        e_Om_all = np.zeros((nq, 3))
        for i, (Rc, Omc, dOmc) in enumerate(cmds):
            M[i], e_R, e_Om = tracking_moment(R[i], Om[i], Rc, Omc, dOmc, self.system.J[i], g.kR, g.kOmega,
                                              g.kI, e_I[i] if self.integral else None)
            dI[i] = e_Om + g.c2 * e_R
            psi[i] = attitude_error_value(R[i], Rc)
            e_R_all[i], e_Om_all[i] = e_R, e_Om
        zdot = np.zeros(self.n_internal)
        if self.integral:
            x, xd_ = multi_reduced_state(y, nq, self.system.L, self.x0d)
            zdot[0:3 * nq] = dI.ravel()
            zdot[3 * nq:3 * nq + self.D] = self.PB.T @ np.concatenate([x, xd_])
        dv = y[3:6] - v_hat
        zdot[-6:-3] = acc + self.l1 * dv
        zdot[-3:] = self.l2 * dv
        info = {"Rc": np.array([c[0] for c in cmds]), "e_R": e_R_all, "e_Omega": e_Om_all, "psi": psi,
                "e_x": y[0:3] - self.x0d, "e_v": y[3:6]}
        return (f, M), zdot, info


def chain_equilibrium_thrust(system):
    return system.M00 * system.g


def multi_equilibrium_thrusts(system):
    return (system.MiT + system.payload.m0 / system.nq) * system.g

