"""Command line interface: run scenarios and write time series, metrics and plots.

    geoquad simulate SCENARIO [--dt DT] [--t-final T] [--out DIR] [--no-plots]
    geoquad linearize SCENARIO [--out DIR]
    geoquad gains check SCENARIO
    geoquad gains synth SCENARIO [--q-pos Q] [--q-vel Q] [--r R]
    geoquad check
    geoquad list-scenarios

SCENARIO is a path to a JSON document or the name of a bundled scenario.
Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .errors import NumericalError, ParseError, ValidationError
from .linearize import (check_attitude_gain_condition, check_position_gain_condition, lyapunov_residual,
                        open_loop, solve_lyapunov, state_space, synthesize_gains_lqr)
from .oracle import audit_suite
from .scenarios import builtin_names, load_document, parse_scenario, resolve
from .sim import metrics, simulate

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3
CSV_FORMAT = "%.17g"
SCHEMA_VERSION = 1


# ------------------------------------------------------------------ columns

def _vec(prefix, n=3):
    return [f"{prefix}_{k + 1}" for k in range(n)]


def _mat(prefix):
    return [f"{prefix}_{a + 1}{b + 1}" for a in range(3) for b in range(3)]


def state_columns(system):
    """Column names of the flat state vector, in its storage order."""
    if system.kind == "multi":
        cols = _vec("x0") + _vec("v0") + _mat("R0") + _vec("Omega0")
        for i in range(system.nq):
            cols += _mat(f"R{i + 1}")
        for i in range(system.nq):
            cols += _vec(f"Omega{i + 1}")
        links = [(i + 1, j + 1) for i, n in enumerate(system.sizes) for j in range(n)]
        for i, j in links:
            cols += _vec(f"q{i}_{j}")
        for i, j in links:
            cols += _vec(f"omega{i}_{j}")
        return cols
    cols = _vec("x") + _vec("v") + _mat("R") + _vec("Omega")
    if system.kind == "chain":
        for i in range(system.n):
            cols += _vec(f"q{i + 1}")
        for i in range(system.n):
            cols += _vec(f"omega{i + 1}")
    return cols


def input_columns(system):
    if system.kind == "multi":
        return [f"f{i + 1}" for i in range(system.nq)] + sum((_vec(f"M{i + 1}") for i in range(system.nq)), [])
    return ["f"] + _vec("M")


METRIC_COLUMNS = ("x_err", "psi", "e_q", "e_omega")


def metric_columns(traj, system):
    cols, data = [], []
    for name in METRIC_COLUMNS:
        if name not in traj.info:
            continue
        s = np.asarray(traj.info[name], float)
        if s.ndim == 1:
            cols.append(name)
            data.append(s[:, None])
        else:
            cols += [f"{name}{i + 1}" for i in range(s.shape[1])]
            data.append(s)
    return cols, data


# ------------------------------------------------------------------ emit

def trajectory_table(traj, system):
    cols, mdata = metric_columns(traj, system)
    header = ["t"] + state_columns(system) + input_columns(system) + cols
    n = len(traj.t)
    table = np.hstack([traj.t[:, None], traj.states, traj.f.reshape(n, -1), traj.M.reshape(n, -1)] + mdata)
    return header, table


def write_csv(path, header, table):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in table:
            w.writerow([CSV_FORMAT % v for v in row])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def metrics_document(scenario, traj):
    doc = {"schema_version": SCHEMA_VERSION, "scenario": scenario.name, "kind": scenario.kind,
           "dt": scenario.config.dt, "t_final": scenario.config.t_final, "samples": len(traj.t)}
    # settling times that never occur are reported as null (JSON has no NaN)
    doc.update({k: (v if np.isfinite(v) else None) for k, v in metrics(traj).items()})
    if scenario.kind == "single":
        doc["theta_x_norm_max"] = float(np.linalg.norm(traj.internal[:, 0:3], axis=1).max())
    return doc


def svg_plot(path, t, series, title, ylabel, width=640, height=360):
    """Minimal line plot; series maps a label to a 1-D array sampled at t."""
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]
    ml, mr, mt, mb = 70, 130, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    vals = np.concatenate([np.asarray(v, float).ravel() for v in series.values()])
    vals = vals[np.isfinite(vals)]
    lo, hi = (float(vals.min()), float(vals.max())) if vals.size else (0.0, 1.0)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    t0, t1 = float(t[0]), float(t[-1]) if t[-1] > t[0] else float(t[0]) + 1.0

    def sx(v):
        return ml + (v - t0) / (t1 - t0) * pw

    def sy(v):
        return mt + (hi - v) / (hi - lo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for k in range(5):
        yv = lo + (hi - lo) * k / 4
        tv = t0 + (t1 - t0) * k / 4
        out.append(f'<text x="{ml - 6}" y="{sy(yv) + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
        out.append(f'<text x="{sx(tv):.1f}" y="{mt + ph + 18}" text-anchor="middle">{tv:.3g}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">t (s)</text>')
    out.append(f'<text x="16" y="{mt + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {mt + ph / 2})">{ylabel}</text>')
    step = max(1, len(t) // 2000)
    for k, (label, v) in enumerate(series.items()):
        v = np.asarray(v, float)
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(t[::step], v[::step]) if np.isfinite(b))
        c = colors[k % len(colors)]
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{ml + pw + 10}" y="{mt + 14 + 16 * k}" fill="{c}">{label}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")


def write_plots(out, traj, system):
    t = traj.t
    info = traj.info
    psi = np.asarray(info["psi"], float)
    series = {"psi": psi} if psi.ndim == 1 else {f"psi{i + 1}": psi[:, i] for i in range(psi.shape[1])}
    svg_plot(out / "psi.svg", t, series, "Attitude error", "psi")
    if system.kind != "single":
        svg_plot(out / "links.svg", t, {"e_q": info["e_q"], "e_omega": info["e_omega"]},
                 "Link direction and angular velocity errors", "error")
    pos = traj.states[:, 0:3]
    svg_plot(out / "position.svg", t, {f"x{k + 1}": pos[:, k] for k in range(3)}, "Position", "m")
    f = traj.f.reshape(len(t), -1)
    svg_plot(out / "thrust.svg", t, {("f" if f.shape[1] == 1 else f"f{i + 1}"): f[:, i] for i in range(f.shape[1])},
             "Total thrust", "N")
    if traj.rotor is not None:
        rot = traj.rotor.reshape(len(t), -1)
        svg_plot(out / "rotors.svg", t, {f"rotor{i + 1}": rot[:, i] for i in range(rot.shape[1])},
                 "Rotor thrusts", "N")


def emit(scenario, traj, out, plots=True):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    header, table = trajectory_table(traj, scenario.system)
    write_csv(out / "trajectory.csv", header, table)
    doc = metrics_document(scenario, traj)
    (out / "metrics.json").write_text(json.dumps(doc, indent=2, allow_nan=False) + "\n")
    if plots:
        write_plots(out, traj, scenario.system)
    return doc


# ------------------------------------------------------------------ commands

def _load(args):
    return parse_scenario(resolve(args.scenario), getattr(args, "dt", None), getattr(args, "t_final", None))


def cmd_simulate(args):
    sc = _load(args)
    traj = simulate(sc.system, sc.controller, sc.y0, sc.dist, sc.config)
    out = Path(args.out) if args.out else Path("out") / (sc.name or Path(args.scenario).stem)
    doc = emit(sc, traj, out, not args.no_plots)
    for k in ("x_err_final", "psi_final", "psi_max", "e_q_final", "e_omega_final"):
        if k in doc:
            print(f"{k:16s} {doc[k]:.6g}")
    print(f"wrote {out}")
    return EXIT_OK


def _linear_or_fail(sc):
    if sc.linear is None:
        raise ValidationError("this scenario has no linearized model (chain or multi controller required)")
    return sc.linear


def cmd_linearize(args):
    sc = _load(args)
    lm, K_x, K_xdot = _linear_or_fail(sc)
    A0, _ = open_loop(lm)
    ss = state_space(lm, K_x, K_xdot)
    ev = ss.eigenvalues
    doc = {"M": lm.Mmat.tolist(), "G": lm.Gmat.tolist(), "B": lm.Bmat.tolist(),
           "closed_loop_eigenvalues": {"real": ev.real.tolist(), "imag": ev.imag.tolist()},
           "max_real_part": float(ev.real.max()), "hurwitz": ss.is_hurwitz(),
           "open_loop_max_real_part": float(np.linalg.eigvals(A0).real.max())}
    print(f"states {lm.n_state}, inputs {lm.n_input}")
    print(f"closed-loop max Re(lambda) = {doc['max_real_part']:.6g}  hurwitz={doc['hurwitz']}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "linear.json").write_text(json.dumps(doc, indent=2) + "\n")
        print(f"wrote {out / 'linear.json'}")
    return EXIT_OK


def cmd_gains_check(args):
    sc = _load(args)
    ok = True
    if sc.kind == "single":
        ctrl = sc.controller.schedule[-1][1]
        g, quad = ctrl.gains, sc.system.quad
        rates = [np.linalg.norm(getattr(c.command(0.0), "Omegad", np.zeros(3))) for _, c in sc.controller.schedule]
        rep = check_attitude_gain_condition(quad.J, g.kR, g.kOmega, g.c2, max(rates))
        print(f"attitude condition: {'PASS' if rep.passed else 'FAIL'}  margin c2 {rep.margins['c2']:.4g}")
        rep2 = check_position_gain_condition(g, quad.m, quad.J, args.psi1, args.e_x_max,
                                             B_theta=min(g.B_theta, 1e6))
        print(f"position condition: {'PASS' if rep2.passed else 'FAIL'}  "
              + "  ".join(f"margin {k} {v:.4g}" for k, v in rep2.margins.items()))
        ok = rep.passed and rep2.passed
    else:
        lm, K_x, K_xdot = _linear_or_fail(sc)
        ss = state_space(lm, K_x, K_xdot)
        P = solve_lyapunov(ss.A, np.eye(ss.A.shape[0]))
        res = lyapunov_residual(ss.A, P, np.eye(ss.A.shape[0]))
        pd = bool(np.linalg.eigvalsh(0.5 * (P + P.T)).min() > 0)
        ok = ss.is_hurwitz() and pd
        print(f"closed-loop max Re(lambda) = {ss.eigenvalues.real.max():.6g}  hurwitz={ss.is_hurwitz()}")
        print(f"Lyapunov P positive definite={pd}  residual {res:.3g}")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_gains_synth(args):
    sc = _load(args)
    lm, _, _ = _linear_or_fail(sc)
    D, m = lm.n_state, lm.n_input
    K_x, K_xdot = synthesize_gains_lqr(lm, np.diag([args.q_pos] * D + [args.q_vel] * D), args.r * np.eye(m))
    ev = state_space(lm, K_x, K_xdot).eigenvalues
    doc = {"K_x": K_x.tolist(), "K_xdot": K_xdot.tolist(), "max_real_part": float(ev.real.max())}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "gains.json").write_text(json.dumps(doc, indent=2) + "\n")
        print(f"wrote {out / 'gains.json'}")
    else:
        print(json.dumps(doc))
    return EXIT_OK


def cmd_check(args):
    results = audit_suite()
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.value:.3g} (tol {r.tol:.3g})")
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


def cmd_list(args):
    for name in builtin_names():
        doc = load_document(resolve(name))
        print(f"{name:24s} {doc.get('description', '')}")
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser():
    p = argparse.ArgumentParser(prog="geoquad", description="Quadrotor, cable and payload simulations.")
    p.add_argument("--seed", type=int, default=None,
                   help="accepted for interface stability; the dynamics are deterministic")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a scenario and write CSV, metrics and plots")
    s.add_argument("scenario")
    s.add_argument("--dt", type=float)
    s.add_argument("--t-final", type=float, dest="t_final")
    s.add_argument("--out")
    s.add_argument("--no-plots", action="store_true")
    s.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("linearize", help="linear model and closed-loop eigenvalues of a scenario")
    s.add_argument("scenario")
    s.add_argument("--out")
    s.set_defaults(func=cmd_linearize)

    g = sub.add_parser("gains", help="check or synthesize controller gains")
    gsub = g.add_subparsers(dest="gains_command", required=True)
    s = gsub.add_parser("check", help="evaluate the gain conditions for a scenario")
    s.add_argument("scenario")
    s.add_argument("--psi1", type=float, default=0.1)
    s.add_argument("--e-x-max", type=float, default=1.0, dest="e_x_max")
    s.set_defaults(func=cmd_gains_check)
    s = gsub.add_parser("synth", help="LQR gains for the scenario's linear model")
    s.add_argument("scenario")
    s.add_argument("--q-pos", type=float, default=10.0, dest="q_pos")
    s.add_argument("--q-vel", type=float, default=1.0, dest="q_vel")
    s.add_argument("--r", type=float, default=1.0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_gains_synth)

    s = sub.add_parser("check", help="run the model audit suite")
    s.set_defaults(func=cmd_check)
    s = sub.add_parser("list-scenarios", help="list bundled scenarios")
    s.set_defaults(func=cmd_list)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
