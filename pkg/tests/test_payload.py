from geoquad.scenarios import load_builtin
from geoquad.sim import metrics, simulate


def run(name):
    sc = load_builtin(name)
    return sc, simulate(sc.system, sc.controller, sc.y0, sc.dist, sc.config)


def test_rod_integral_term_reduces_offset():
    _, with_i = run("ch4_rod_integral")
    _, without = run("ch4_rod_nointegral")
    mi, mn = metrics(with_i), metrics(without)
    assert mi["x_err_final"] < mn["x_err_final"]
    assert mn["x_err_final"] > 0.05            # the disturbances leave a visible offset without it
