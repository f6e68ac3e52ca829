"""Scenario documents: JSON in, ready-to-run (system, controller, initial state, config) out.

A scenario has the top-level keys

    name, description          free text
    model                      kind ("single", "chain" or "multi") and physical parameters
    initial                    initial state
    controller                 control law and gains
    disturbance                constant disturbances (optional)
    sim                        dt, t_final, record_every, reprojection_every

Unknown keys are rejected at every level.  Rotations are given either as a
3x3 matrix or as {"axis": [..], "angle_deg": ..}.
"""
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .control import (AttitudeModeController, ChainController, MultiController, PositionModeController,
                      ScheduledController, hold_position, spin_command)
from .errors import ParseError, ValidationError
from .linearize import (GainSet, chain_gain_matrices, linearize_chain, linearize_multi, solve_lyapunov,
                        state_space, synthesize_gains_lqr)
from .manifold import E1, E3, ErrorGainMatrix, exp_so3, is_rotation
from .model import (ChainState, ChainSystem, CableParams, DisturbanceSet, MultiQuadState, MultiSystem,
                    PayloadParams, QuadParams, SingleQuadState, SingleQuadSystem, box_inertia)
from .sim import FixedInput, SimConfig

TOP_KEYS = {"name", "description", "model", "initial", "controller", "disturbance", "sim"}


@dataclass
class Scenario:
    name: str
    description: str
    kind: str
    system: object
    controller: object
    y0: np.ndarray
    dist: DisturbanceSet
    config: SimConfig
    doc: dict
    linear: object = None        # (LinearModel, K_x, K_xdot) for chain and multi scenarios


# ------------------------------------------------------------------ helpers

class _Section:
    """Dict wrapper that tracks the path for error messages and rejects unknown keys."""

    def __init__(self, data, path, allowed):
        if not isinstance(data, dict):
            raise ValidationError(f"{path}: expected an object")
        unknown = sorted(set(data) - set(allowed))
        if unknown:
            raise ValidationError(f"{path}: unknown key(s) {', '.join(unknown)}")
        self.data = data
        self.path = path

    def has(self, key):
        return key in self.data

    def raw(self, key, default=None, required=False):
        if key not in self.data:
            if required:
                raise ValidationError(f"{self.path}.{key} is required")
            return default
        return self.data[key]

    def num(self, key, default=None, required=False):
        v = self.raw(key, default, required)
        if v is None:
            return None
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
            raise ValidationError(f"{self.path}.{key} must be a finite number")
        return float(v)

    def arr(self, key, shape=None, default=None, required=False):
        v = self.raw(key, default, required)
        if v is None:
            return None
        try:
            a = np.asarray(v, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{self.path}.{key} must be numeric") from exc
        if shape is not None and a.shape != shape:
            raise ValidationError(f"{self.path}.{key} must have shape {shape}, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValidationError(f"{self.path}.{key} must be finite")
        return a

    def flag(self, key, default=False):
        v = self.raw(key, default)
        if not isinstance(v, bool):
            raise ValidationError(f"{self.path}.{key} must be true or false")
        return v

    def sub(self, key, allowed, required=False):
        v = self.raw(key, None, required)
        return _Section({} if v is None else v, f"{self.path}.{key}", allowed)


def _rotation(value, path):
    if value is None:
        return np.eye(3)
    if isinstance(value, dict):
        s = _Section(value, path, {"axis", "angle_deg"})
        axis = s.arr("axis", (3,), required=True)
        n = np.linalg.norm(axis)
        if n == 0:
            raise ValidationError(f"{path}.axis must be nonzero")
        return exp_so3(np.deg2rad(s.num("angle_deg", required=True)) * axis / n)
    R = np.asarray(value, dtype=float)
    if not is_rotation(R, 1e-9):
        raise ValidationError(f"{path} must be a rotation matrix")
    return R


def _bearings(value, n, path):
    if value is None:
        return np.tile(E3, (n, 1))
    q = np.asarray(value, dtype=float)
    if q.shape != (n, 3):
        raise ValidationError(f"{path} must have shape ({n}, 3)")
    nrm = np.linalg.norm(q, axis=1)
    if np.any(nrm < 1e-12):
        raise ValidationError(f"{path} has a zero vector")
    return q / nrm[:, None]


def _quad(data, path):
    s = _Section(data, path, {"m", "J", "d", "c_tau_f", "f_rotor_max"})
    return QuadParams(s.num("m", required=True), s.arr("J", (3, 3), required=True),
                      s.num("d", 0.169), s.num("c_tau_f", 0.1056), s.num("f_rotor_max"))


def _cable(data, path):
    s = _Section(data, path, {"link_masses", "link_lengths", "n", "mass", "length"})
    if s.has("n"):
        n = s.raw("n")
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ValidationError(f"{path}.n must be a positive integer")
        return CableParams.uniform(n, s.num("mass", required=True), s.num("length", required=True))
    return CableParams(s.arr("link_masses", required=True), s.arr("link_lengths", required=True))


def _payload(data, path):
    s = _Section(data, path, {"m0", "J0", "box", "attach_points"})
    m0 = s.num("m0", required=True)
    if s.has("J0") == s.has("box"):
        raise ValidationError(f"{path}: give exactly one of J0 or box")
    if s.has("box"):
        if not m0 > 0:
            raise ValidationError("m0 > 0")
        J0 = box_inertia(m0, *s.arr("box", (3,)))
    else:
        J0 = s.arr("J0", (3, 3))
    return PayloadParams(m0, J0, s.arr("attach_points", required=True))


def _per_vehicle(s, one, many, nq, build):
    if s.has(one) == s.has(many):
        raise ValidationError(f"{s.path}: give exactly one of {one} or {many}")
    if s.has(one):
        item = build(s.raw(one), f"{s.path}.{one}")
        return [item] * nq
    items = s.raw(many)
    if not isinstance(items, list) or len(items) != nq:
        raise ValidationError(f"{s.path}.{many} must list one entry per vehicle ({nq})")
    return [build(v, f"{s.path}.{many}[{i}]") for i, v in enumerate(items)]


# ------------------------------------------------------------------ sections

def build_system(data):
    s = _Section(data, "model", {"kind", "quad", "quads", "cable", "cables", "payload", "g"})
    kind = s.raw("kind", required=True)
    g = s.num("g", 9.81)
    if not g > 0:
        raise ValidationError("g > 0")
    if kind == "single":
        return SingleQuadSystem(_quad(s.raw("quad", required=True), "model.quad"), g)
    if kind == "chain":
        return ChainSystem(_quad(s.raw("quad", required=True), "model.quad"),
                           _cable(s.raw("cable", required=True), "model.cable"), g)
    if kind == "multi":
        payload = _payload(s.raw("payload", required=True), "model.payload")
        nq = len(payload.attach_points)
        quads = _per_vehicle(s, "quad", "quads", nq, _quad)
        cables = _per_vehicle(s, "cable", "cables", nq, _cable)
        return MultiSystem(payload, quads, cables, g)
    raise ValidationError("model.kind must be one of single, chain, multi")


def build_initial(data, system):
    path = "initial"
    if system.kind == "single":
        s = _Section(data, path, {"x", "v", "R", "Omega"})
        return SingleQuadState(s.arr("x", (3,), np.zeros(3)), s.arr("v", (3,), np.zeros(3)),
                               _rotation(s.raw("R"), "initial.R"), s.arr("Omega", (3,), np.zeros(3))).to_vector()
    if system.kind == "chain":
        s = _Section(data, path, {"x", "v", "R", "Omega", "q", "omega"})
        n = system.n
        q = _bearings(s.raw("q"), n, "initial.q")
        w = s.arr("omega", (n, 3), np.zeros((n, 3)))
        return ChainState(s.arr("x", (3,), np.zeros(3)), s.arr("v", (3,), np.zeros(3)),
                          _rotation(s.raw("R"), "initial.R"), s.arr("Omega", (3,), np.zeros(3)),
                          q, w).to_vector()
    s = _Section(data, path, {"x0", "v0", "R0", "Omega0", "R", "Omega", "q", "omega"})
    nq = system.nq
    Rs = s.raw("R")
    if Rs is None:
        Rs = [None] * nq
    if not isinstance(Rs, list) or len(Rs) != nq:
        raise ValidationError(f"initial.R must list one rotation per vehicle ({nq})")
    R = np.array([_rotation(r, f"initial.R[{i}]") for i, r in enumerate(Rs)])
    qs_raw = s.raw("q")
    if qs_raw is None:
        qs_raw = [None] * nq
    if not isinstance(qs_raw, list) or len(qs_raw) != nq:
        raise ValidationError(f"initial.q must list one bearing array per cable ({nq})")
    q = tuple(_bearings(v, n, f"initial.q[{i}]") for i, (v, n) in enumerate(zip(qs_raw, system.sizes)))
    w_raw = s.raw("omega")
    if w_raw is None:
        w = tuple(np.zeros((n, 3)) for n in system.sizes)
    else:
        if not isinstance(w_raw, list) or len(w_raw) != nq:
            raise ValidationError(f"initial.omega must list one array per cable ({nq})")
        w = tuple(_Section({"w": v}, f"initial.omega[{i}]", {"w"}).arr("w", (n, 3))
                  for i, (v, n) in enumerate(zip(w_raw, system.sizes)))
    return MultiQuadState(s.arr("x0", (3,), np.zeros(3)), s.arr("v0", (3,), np.zeros(3)),
                          _rotation(s.raw("R0"), "initial.R0"), s.arr("Omega0", (3,), np.zeros(3)),
                          R, s.arr("Omega", (nq, 3), np.zeros((nq, 3))), q, w).to_vector()


def build_disturbance(data, system):
    s = _Section(data or {}, "disturbance", {"delta_x", "delta_R", "theta_x", "theta_R", "W_mode"})
    kw = {}
    for key in ("delta_x", "delta_R", "theta_x", "theta_R"):
        if s.has(key):
            a = s.arr(key)
            ok = a.shape == (3,) or (system.kind == "multi" and a.shape == (system.nq, 3))
            if not ok:
                raise ValidationError(f"disturbance.{key} must have shape (3,)"
                                      + (f" or ({system.nq}, 3)" if system.kind == "multi" else ""))
            kw[key] = a
    return DisturbanceSet(W_mode=s.raw("W_mode", "identity"), **kw)


def build_config(data):
    s = _Section(data or {}, "sim", {"dt", "t_final", "record_every", "reprojection_every"})
    ints = {}
    for key in ("record_every", "reprojection_every"):
        v = s.raw(key, 1)
        if not isinstance(v, int) or isinstance(v, bool):
            raise ValidationError(f"sim.{key} must be an integer")
        ints[key] = v
    return SimConfig(s.num("dt", 1e-3), s.num("t_final", 1.0), **ints)


GAIN_KEYS = {"kx", "kv", "kR", "kOmega", "c1", "c2", "gamma_x", "gamma_R", "kI", "kz", "sigma", "B_theta",
             "kq", "kw", "K_x", "K_xdot", "lqr"}


def _gainset(s, **extra):
    kw = {k: s.num(k) for k in ("kx", "kv", "kR", "kOmega", "c1", "c2", "gamma_x", "gamma_R", "kI", "kz",
                                "sigma", "B_theta") if s.has(k)}
    kw.update(extra)
    return GainSet(**kw)


def _single_controller(s, system, dt):
    allowed = {"type", "gains", "phases", "W_mode", "G"}
    c = _Section(s, "controller", allowed)
    gains = _gainset(c.sub("gains", GAIN_KEYS))
    W_mode = c.raw("W_mode", "identity")
    G = c.arr("G", (3,))
    G = None if G is None else ErrorGainMatrix(*G)
    phases = c.raw("phases", required=True)
    if not isinstance(phases, list) or not phases:
        raise ValidationError("controller.phases must be a non-empty list")
    schedule = []
    for i, ph in enumerate(phases):
        p = _Section(ph, f"controller.phases[{i}]", {"start", "mode", "spin_axis", "spin_rate", "hold_thrust",
                                                     "xd", "b1d"})
        start = p.num("start", 0.0)
        mode = p.raw("mode", required=True)
        if mode == "attitude":
            hold = hold_position(p.arr("xd", (3,), np.zeros(3))) if p.flag("hold_thrust") else None
            ctrl = AttitudeModeController(system, gains,
                                          spin_command(p.arr("spin_axis", (3,), required=True),
                                                       p.num("spin_rate", required=True)),
                                          W_mode, G, dt, hold)
        elif mode == "position":
            ctrl = PositionModeController(system, gains,
                                          hold_position(p.arr("xd", (3,), np.zeros(3)), p.arr("b1d", (3,), E1)),
                                          W_mode, G, dt)
        else:
            raise ValidationError(f"controller.phases[{i}].mode must be attitude or position")
        schedule.append((start, ctrl))
    if schedule[0][0] != 0.0:
        raise ValidationError("controller.phases[0].start must be 0")
    return ScheduledController(schedule)


def _lqr_gains(lm, spec, path):
    s = _Section(spec, path, {"q_pos", "q_vel", "r"})
    D, m = lm.n_state, lm.n_input
    qp, qv, r = s.num("q_pos", 10.0), s.num("q_vel", 1.0), s.num("r", 1.0)
    if not (qp > 0 and qv > 0 and r > 0):
        raise ValidationError(f"{path}: q_pos, q_vel, r > 0")
    return synthesize_gains_lqr(lm, np.diag([qp] * D + [qv] * D), r * np.eye(m))


def _chain_controller(s, system, dt):
    c = _Section(s, "controller", {"type", "gains", "xd", "b1d", "integral", "lyapunov_q", "observer_bandwidth"})
    gs = c.sub("gains", GAIN_KEYS)
    lm = linearize_chain(system.quad, system.cable, system.g)
    n = system.n
    if gs.has("lqr"):
        K_x, K_xdot = _lqr_gains(lm, gs.raw("lqr"), "controller.gains.lqr")
    else:
        kq = gs.arr("kq", (n,), required=True)
        kw = gs.arr("kw", (n,), required=True)
        K_x, K_xdot = chain_gain_matrices(gs.num("kx", required=True), gs.num("kv", required=True), kq, kw)
    ss = state_space(lm, K_x, K_xdot)
    if not ss.is_hurwitz():
        raise ValidationError("chain gains do not give a Hurwitz linear closed loop")
    Qs = c.num("lyapunov_q", 1.0)
    P = solve_lyapunov(ss.A, Qs * np.eye(ss.A.shape[0]))
    kz = gs.num("kz", 0.0)
    gains = _gainset(gs, K_x=K_x, K_xdot=K_xdot, K_z=kz * np.eye(3, lm.n_state))
    ctrl = ChainController(system, gains, c.arr("xd", (3,), np.zeros(3)), P, ss.B, c.arr("b1d", (3,), E1),
                           c.flag("integral", False), dt, c.num("observer_bandwidth", 5.0))
    return ctrl, (lm, K_x, K_xdot)


def _multi_controller(s, system, dt):
    c = _Section(s, "controller", {"type", "gains", "x0d", "b1d", "integral", "lyapunov_q", "observer_bandwidth"})
    gs = c.sub("gains", GAIN_KEYS)
    lm = linearize_multi(system.payload, system.quads, system.cables, system.g)
    if gs.has("lqr"):
        K_x, K_xdot = _lqr_gains(lm, gs.raw("lqr"), "controller.gains.lqr")
    else:
        shape = (lm.n_input, lm.n_state)
        K_x, K_xdot = gs.arr("K_x", shape, required=True), gs.arr("K_xdot", shape, required=True)
    ss = state_space(lm, K_x, K_xdot)
    if not ss.is_hurwitz():
        raise ValidationError("multi-vehicle gains do not give a Hurwitz linear closed loop")
    integral = c.flag("integral", False)
    kz = gs.num("kz", 0.0)
    K_z = np.vstack([kz * np.eye(3, lm.n_state)] * system.nq)
    gains = _gainset(gs, K_x=K_x, K_xdot=K_xdot, K_z=K_z)
    P = solve_lyapunov(ss.A, c.num("lyapunov_q", 1.0) * np.eye(ss.A.shape[0])) if integral else None
    b1d = c.arr("b1d", (3,))
    ctrl = MultiController(system, gains, c.arr("x0d", (3,), np.zeros(3)),
                           None if b1d is None else np.tile(b1d, (system.nq, 1)),
                           integral, P, ss.B if integral else None, dt, c.num("observer_bandwidth", 5.0))
    return ctrl, (lm, K_x, K_xdot)


def build_controller(data, system, dt):
    if not isinstance(data, dict):
        raise ValidationError("controller: expected an object")
    kind = data.get("type")
    if kind == "open_loop":
        c = _Section(data, "controller", {"type", "f", "M"})
        if system.kind == "multi":
            return FixedInput(c.arr("f", (system.nq,), np.zeros(system.nq)),
                              c.arr("M", (system.nq, 3), np.zeros((system.nq, 3)))), None
        return FixedInput(c.num("f", 0.0), c.arr("M", (3,), np.zeros(3))), None
    expected = {"single": "flight", "chain": "chain", "multi": "multi"}[system.kind]
    if kind != expected:
        raise ValidationError(f"controller.type must be {expected} or open_loop for a {system.kind} model")
    if kind == "flight":
        return _single_controller(data, system, dt), None
    if kind == "chain":
        return _chain_controller(data, system, dt)
    return _multi_controller(data, system, dt)


# ------------------------------------------------------------------ entry points

def scenario_from_dict(doc, dt=None, t_final=None):
    """Build a scenario; dt / t_final override the document's sim section."""
    if not isinstance(doc, dict):
        raise ValidationError("scenario must be a JSON object")
    unknown = sorted(set(doc) - TOP_KEYS)
    if unknown:
        raise ValidationError(f"unknown top-level key(s) {', '.join(unknown)}")
    for key in ("model", "initial", "controller"):
        if key not in doc:
            raise ValidationError(f"{key} is required")
    sim = dict(doc.get("sim") or {})
    if dt is not None:
        sim["dt"] = dt
    if t_final is not None:
        sim["t_final"] = t_final
    config = build_config(sim)
    system = build_system(doc["model"])
    y0 = build_initial(doc["initial"], system)
    dist = build_disturbance(doc.get("disturbance"), system)
    ctrl, linear = build_controller(doc["controller"], system, config.dt)
    return Scenario(str(doc.get("name", "")), str(doc.get("description", "")), system.kind, system, ctrl,
                    y0, dist, config, doc, linear)


def load_document(path):
    """Read a JSON document; raises ParseError with the line of a syntax error."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from exc
    if not text.strip():
        raise ParseError(f"{path}: empty document")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def parse_scenario(path, dt=None, t_final=None):
    return scenario_from_dict(load_document(path), dt, t_final)


def builtin_names():
    files = resources.files("geoquad").joinpath("scenarios").iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".json"))


def builtin_path(name):
    return Path(str(resources.files("geoquad").joinpath("scenarios", f"{name}.json")))


def resolve(name_or_path):
    """A bundled scenario name or a path to a JSON file."""
    p = Path(name_or_path)
    if p.suffix == ".json" or p.exists():
        return p
    if name_or_path in builtin_names():
        return builtin_path(name_or_path)
    raise ParseError(f"no scenario file or bundled scenario named {name_or_path!r}")


def load_builtin(name, dt=None, t_final=None):
    return parse_scenario(builtin_path(name), dt, t_final)
