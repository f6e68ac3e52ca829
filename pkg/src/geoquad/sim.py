"""Fixed-step RK4 integration of closed-loop systems, with reprojection and metrics."""
import logging
from dataclasses import dataclass, field

import numpy as np

from .control import rotor_mix, rotor_unmix, saturate_rotors
from .errors import Diverged, NonFinite, ValidationError
from .manifold import E3
from .model import NO_DISTURBANCE

DIVERGENCE_BOUND = 1e6
log = logging.getLogger(__name__)


@dataclass
class SimConfig:
    dt: float = 1e-3
    t_final: float = 1.0
    record_every: int = 1
    reprojection_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError("dt > 0")
        if not self.t_final > 0:
            raise ValidationError("t_final > 0")
        if self.record_every < 1 or self.reprojection_every < 1:
            raise ValidationError("record_every, reprojection_every >= 1")

    @property
    def n_steps(self):
        return int(np.floor(self.t_final / self.dt + 1e-9))


class FixedInput:
    """Open-loop input held constant; no internal state."""
    n_internal = 0

    def __init__(self, f=0.0, M=None):
        self.f = f
        self.M = np.zeros(3) if M is None else M

    def initial_internal(self):
        return np.zeros(0)

    def __call__(self, t, y, z):
        return (self.f, self.M), np.zeros(0), {}


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray
    internal: np.ndarray
    f: np.ndarray
    M: np.ndarray
    rotor: np.ndarray | None
    info: dict = field(default_factory=dict)
    kind: str = ""
    sizes: tuple = ()


class Simulator:
    """Closed-loop rollouts of one system under one controller."""

    def __init__(self, system, controller, dist=NO_DISTURBANCE, config=None):
        self.system = system
        self.controller = controller
        self.dist = dist
        self.config = config or SimConfig()

    def _caps(self):
        if self.system.kind == "multi":
            return [q.f_rotor_max for q in self.system.quads]
        return [self.system.quad.f_rotor_max]

    def apply_actuators(self, u):
        """Rotor mixing + saturation (only when a rotor cap is configured)."""
        f, M = u
        caps = self._caps()
        if self.system.kind == "multi":
            f = np.array(f, float)
            M = np.array(M, float)
            if all(c is None for c in caps):
                return f, M, None
            rot = np.zeros((len(caps), 4))
            for i, (cap, qp) in enumerate(zip(caps, self.system.quads)):
                rot[i] = rotor_mix(f[i], M[i], qp.d, qp.c_tau_f)
                if cap is not None:
                    rot[i], _ = saturate_rotors(rot[i], cap)
                    f[i], M[i] = rotor_unmix(rot[i], qp.d, qp.c_tau_f)
            return f, M, rot
        qp = self.system.quad
        rot = rotor_mix(f, M, qp.d, qp.c_tau_f)
        if caps[0] is not None:
            rot, _ = saturate_rotors(rot, caps[0])
            f, M = rotor_unmix(rot, qp.d, qp.c_tau_f)
        return f, np.asarray(M, float), rot

    def rates(self, t, y, z):
        u, zdot, info = self.controller(t, y, z)
        f, M, rot = self.apply_actuators(u)
        ydot = self.system.rates(y, f, M, self.dist, t=t)
        return ydot, zdot, (f, M, rot, info)

    def step(self, t, y, z, dt):
        """One RK4 step of plant and controller states; returns (y, z, record of stage 1)."""
        k1y, k1z, rec = self.rates(t, y, z)
        k2y, k2z, _ = self.rates(t + 0.5 * dt, y + 0.5 * dt * k1y, z + 0.5 * dt * k1z)
        k3y, k3z, _ = self.rates(t + 0.5 * dt, y + 0.5 * dt * k2y, z + 0.5 * dt * k2z)
        k4y, k4z, _ = self.rates(t + dt, y + dt * k3y, z + dt * k3z)
        y = y + dt / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y)
        z = z + dt / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z)
        return y, z, rec

    def run(self, y0, z0=None):
        cfg = self.config
        dt = cfg.dt
        y = self.system.project(np.asarray(y0, float))
        z = self.controller.initial_internal() if z0 is None else np.asarray(z0, float)
        clamp = getattr(self.controller, "clamp_internal", None)
        n = cfg.n_steps
        rows = []

        def record(t, y, z, rec):
            f, M, rot, info = rec
            rows.append((t, y.copy(), z.copy(), f, M, rot, info))

        for k in range(n):
            t = k * dt
            y_new, z_new, rec = self.step(t, y, z, dt)
            if k % cfg.record_every == 0:
                record(t, y, z, rec)
            if (k + 1) % cfg.reprojection_every == 0:
                y_new = self.system.project(y_new)
            if clamp is not None:
                z_new = clamp(z_new)
            t_new = (k + 1) * dt
            if not (np.all(np.isfinite(y_new)) and np.all(np.isfinite(z_new))):
                raise NonFinite("state is not finite", t_new)
            if np.linalg.norm(y_new) > DIVERGENCE_BOUND:
                raise Diverged("state norm exceeded bound", t_new)
            y, z = y_new, z_new
        if n % cfg.record_every == 0:
            _, _, rec = self.rates(n * dt, y, z)
            record(n * dt, y, z, rec)
        return self._pack(rows)

    def _pack(self, rows):
        info_keys = rows[0][6].keys()
        info = {k: np.array([r[6][k] for r in rows]) for k in info_keys}
        rot = None if rows[0][5] is None else np.array([r[5] for r in rows])
        traj = Trajectory(np.array([r[0] for r in rows]), np.array([r[1] for r in rows]),
                          np.array([r[2] for r in rows]), np.array([r[3] for r in rows], dtype=float),
                          np.array([r[4] for r in rows], dtype=float), rot, info,
                          self.system.kind, tuple(getattr(self.system, "sizes", ())))
        add_derived_series(traj, self.system)
        n_neg = int(np.sum(traj.f < 0))
        if n_neg:
            log.warning("total thrust was negative at %d of %d recorded samples", n_neg, len(traj.t))
        return traj


def simulate(system, controller, y0, dist=NO_DISTURBANCE, config=None, z0=None):
    return Simulator(system, controller, dist, config).run(y0, z0)


# ------------------------------------------------------------------ metrics

def add_derived_series(traj, system):
    """Attach e_q = sum |q - e3|, e_omega = sum |omega|, x_err and energies to traj.info."""
    Y = traj.states
    info = traj.info
    if system.kind == "chain":
        n = system.n
        q = Y[:, 18:18 + 3 * n].reshape(len(Y), n, 3)
        w = Y[:, 18 + 3 * n:18 + 6 * n].reshape(len(Y), n, 3)
    elif system.kind == "multi":
        o = 18 + 12 * system.nq
        L = system.L
        q = Y[:, o:o + 3 * L].reshape(len(Y), L, 3)
        w = Y[:, o + 3 * L:o + 6 * L].reshape(len(Y), L, 3)
    else:
        q = w = np.zeros((len(Y), 0, 3))
    info["e_q"] = np.linalg.norm(q - E3, axis=2).sum(axis=1)
    info["e_omega"] = np.linalg.norm(w, axis=2).sum(axis=1)
    if "e_x" in info:
        info["x_err"] = np.linalg.norm(info["e_x"], axis=1)
    E = np.array([system.energy(y) for y in Y])
    info["T"] = E[:, 0]
    info["V"] = E[:, 1]


SERIES = ("x_err", "psi", "e_q", "e_omega")


def metrics(traj, threshold=0.05):
    """Terminal, maximum, steady-state (mean of last 10 %) and settling time per error series."""
    out = {}
    t = traj.t
    for name in SERIES:
        if name not in traj.info:
            continue
        s = np.asarray(traj.info[name], float)
        if s.ndim > 1:
            s = s.max(axis=1)
        tail = s[int(np.floor(0.9 * len(s))):]
        above = np.nonzero(s > threshold)[0]
        if above.size == 0:
            settle = float(t[0])
        elif above[-1] == len(s) - 1:
            settle = float("nan")
        else:
            settle = float(t[above[-1] + 1])
        out[f"{name}_final"] = float(s[-1])
        out[f"{name}_max"] = float(s.max())
        out[f"{name}_steady"] = float(tail.mean())
        out[f"{name}_settle"] = settle
    out["negative_thrust_samples"] = int(np.sum(np.asarray(traj.f) < 0))
    return out
