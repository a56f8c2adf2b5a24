import csv
import io
import math

import numpy as np
import pytest

from nrdots.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, design_report, main
from nrdots.config import ConfigError, config_from_header, parse_config, to_ini
from nrdots.figures import FIGURE_IDS, build_figure

THREE = """
[model]
kind = three_dot
eps_d = 1
lambda = 1
kappa = 100
"""

FOUR = """
[model]
kind = four_dot
eps_d = 1
lambda = 1
kappa = 10
delta = 5
"""

VOLT = "\n[sweep]\nkind = voltage\nstart = -20\nstop = 20\npoints = 9\n"
OMEGA = "\n[sweep]\nkind = omega\nstart = -4\nstop = 6\npoints = 21\n"


def read_csv(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(body))
    return rows[0], rows[1:]


def column(text, name):
    head, rows = read_csv(text)
    i = head.index(name)
    return np.array([float(r[i]) for r in rows])


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# configuration


def test_three_dot_auto_resolution_rescales_to_unit_gamma():
    cfg = parse_config(THREE)
    m = cfg.model
    assert m.gamma == 1.0 and m.lam == pytest.approx(10.0)
    assert m.g == pytest.approx(1j)
    assert any("0.01j" in n and "matched gamma = 0.01" in n for n in cfg.notes)
    assert cfg.leads.temperature == 0.5 and cfg.leads.aux_mu == {"a": -50.0}


def test_four_dot_auto_resolution():
    cfg = parse_config(FOUR)
    m = cfg.model
    assert m.gamma == 1.0 and (m.delta1, m.delta2) == (5.0, -5.0)
    assert np.exp(1j * m.phi) == pytest.approx(np.exp(1j * (math.pi + 2 * math.atan(0.5))))
    assert cfg.leads.aux_mu == {"u": -60.0, "d": -60.0}


def test_sweep_start_not_below_stop_names_key_and_line():
    text = THREE + "\n[sweep]\nkind = voltage\nstart = 5\nstop = 5\npoints = 3\n"
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    line = text.splitlines().index("start = 5") + 1
    assert str(info.value).startswith(f"sweep.start (line {line}):")


@pytest.mark.parametrize(
    "text, fragment",
    [
        (THREE + "colour = red\n", "model.colour (line 7): unknown key"),
        (THREE.replace("kappa = 100", "kappa = lots"), "model.kappa (line 6): expected a number"),
        (THREE.replace("kappa = 100\n", ""), "model.kappa: missing required key"),
        (THREE + VOLT.replace("points = 9", "points = 2.5"), "sweep.points"),
        (THREE + "\n[extras]\nx = 1\n", "extras (line 8): unknown section"),
        (THREE + "\n[leads]\nmu_q = 1\n", "leads.mu_q"),
        (THREE.replace("three_dot", "five_dot"), "model.kind"),
        (FOUR.replace("lambda = 1", "lambda1 = 1\nlambda2 = 2"), "model.g_mode"),
        (FOUR + "\n[phonon]\nnu = 0.1\nomega_c = 10\n", "phonon"),
        (THREE + "\n[quadrature]\nrel_tol = 0\n", "quadrature"),
        ("[leads]\ntemperature = 1\n", "model: missing required section"),
    ],
)
def test_config_errors(text, fragment):
    with pytest.raises(ConfigError, match=fragment.replace("(", r"\(").replace(")", r"\)")):
        parse_config(text)


def test_four_dot_unequal_lambdas_have_no_directional_phase():
    with pytest.raises(ConfigError, match="no pure-phase solution"):
        parse_config(FOUR.replace("lambda = 1", "lambda1 = 1\nlambda2 = 2"))


@pytest.mark.parametrize("text", [THREE + VOLT, FOUR + OMEGA, THREE + VOLT + "\n[phonon]\nnu = 0.2\nomega_c = 10\n"])
def test_header_round_trip_is_exact(text):
    cfg = parse_config(text)
    out = io.StringIO()
    from nrdots.sweeps import CURRENT_COLUMNS, emit

    emit(out, cfg, [], CURRENT_COLUMNS)
    back = config_from_header(out.getvalue())
    assert to_ini(back) == to_ini(cfg)
    assert back.model == cfg.model


def test_custom_circuit_config():
    text = """
[model]
kind = custom

[dot:x]
role = primary
onsite = 0.5
damping = 1

[dot:y]
role = primary
damping = 1

[dot:m]
role = auxiliary
damping = 100

[couplings]
x,m = 10
y,m = 10
x,y = 0+1j

[leads]
mu_m = -40
"""
    cfg = parse_config(text)
    assert cfg.model.transport == "lb" and cfg.model.scatter == "generic"
    assert cfg.leads.aux_mu == {"m": -40.0}
    assert parse_config(to_ini(cfg)).model.circuit == cfg.model.circuit
    with pytest.raises(ConfigError, match="non-Hermitian"):
        parse_config(text.replace("x,y = 0+1j", "x,y = 0+1j\ny,x = 0+1j"))


# command line


def test_scatter_output_and_determinism(tmp_path):
    cfgp = write(tmp_path, THREE + OMEGA)
    outs = []
    for threads in (1, 1, 4):
        out = tmp_path / f"s{threads}_{len(outs)}.csv"
        assert main(["scatter", "--config", cfgp, "--out", str(out), "--threads", str(threads)]) == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    text = outs[0].decode()
    head, rows = read_csv(text)
    assert head == ["omega", "S11", "S12", "S21", "S22", "flag"]
    assert len(rows) == 21
    s21 = column(text, "S21")
    omega = column(text, "omega")
    assert s21[np.argmin(abs(omega - 1.0))] == pytest.approx(1.0, abs=1e-12)
    assert np.all(column(text, "S12") < 1e-12)


def test_current_output_and_exit_codes(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["current", "--config", write(tmp_path, THREE + VOLT), "--out", str(out)]) == EXIT_OK
    text = out.read_text()
    assert text.startswith("## auto:")
    assert column(text, "converged").min() == 1
    jl, jr, ja = column(text, "J_L"), column(text, "J_R"), column(text, "J_aux")
    np.testing.assert_allclose(jl + jr + ja, 0, atol=1e-9)

    starved = THREE + VOLT + "\n[quadrature]\nrel_tol = 1e-14\nabs_tol = 1e-300\nmax_subdivisions = 1\n"
    out3 = tmp_path / "c3.csv"
    assert main(["current", "--config", write(tmp_path, starved), "--out", str(out3)]) == EXIT_NUMERIC
    assert column(out3.read_text(), "converged").min() == 0

    bad = write(tmp_path, THREE + VOLT.replace("start = -20", "start = 30"), "bad.ini")
    assert main(["current", "--config", bad]) == EXIT_CONFIG
    assert main(["current", "--config", str(tmp_path / "missing.ini")]) == EXIT_CONFIG
    assert main(["scatter", "--config", write(tmp_path, THREE + VOLT)]) == EXIT_CONFIG
    assert main(["current", "--config", write(tmp_path, THREE + VOLT), "--threads", "0"]) == EXIT_CONFIG


def test_rel_tol_flag_reaches_header(tmp_path):
    out = tmp_path / "c.csv"
    main(["current", "--config", write(tmp_path, THREE + VOLT), "--out", str(out), "--rel-tol", "1e-6"])
    assert config_from_header(out.read_text()).quadrature.rel_tol == 1e-6


def test_reverse_flag_swaps_currents(tmp_path):
    fwd, rev = tmp_path / "f.csv", tmp_path / "r.csv"
    main(["current", "--config", write(tmp_path, THREE + VOLT), "--out", str(fwd)])
    main(["current", "--config", write(tmp_path, THREE + "reverse = true\n" + VOLT, "r.ini"), "--out", str(rev)])
    f, r = fwd.read_text(), rev.read_text()
    np.testing.assert_allclose(column(r, "J_L"), column(f, "J_R")[::-1], atol=1e-12)
    np.testing.assert_allclose(column(r, "J_R"), column(f, "J_L")[::-1], atol=1e-12)


def test_explicit_g_needs_lb_route(tmp_path):
    text = THREE + "g_mode = explicit\ng_abs = 0.5\n" + VOLT
    assert main(["current", "--config", write(tmp_path, text)]) == EXIT_CONFIG
    lb = write(tmp_path, text.replace("g_abs = 0.5", "g_abs = 0.5\ntransport = lb"), "lb.ini")
    assert main(["current", "--config", lb, "--out", str(tmp_path / "lb.csv")]) == EXIT_OK


def test_design_reports(tmp_path, capsys):
    assert main(["design", "--config", write(tmp_path, THREE)]) == EXIT_OK
    rep = capsys.readouterr().out
    assert "directional coupling g = 0+1j" in rep
    assert "|S21(eps_d)|^2 = 1\n" in rep and "|S12(eps_d)|^2 = 0\n" in rep
    rep4 = design_report(parse_config(FOUR))
    assert "|S21(Delta)|^2 = 0.2\n" in rep4
    phi = float(rep4.split("directional loop phase phi = ")[1].split()[0])
    want = float(rep4.split("pi + 2 arctan(delta/kappa) = ")[1].split()[0])
    assert phi == pytest.approx(want, abs=1e-11)
    assert "delta^2/(kappa^2+delta^2) = 0.2" in rep4


# figures


def test_figure_ids():
    assert FIGURE_IDS == ("fig3a", "fig3b", "fig5a", "fig5b", "fig6a", "fig6b", "fig7", "fig8",
                          "fig9a", "fig9b", "fig10", "fig11")
    assert main(["figure", "fig42", "--out", "."]) == EXIT_CONFIG


def test_fig3_and_fig5_datasets(tmp_path):
    (p3,), ok = build_figure("fig3b", str(tmp_path))
    assert ok
    t = open(p3).read()
    w, s21 = column(t, "omega"), column(t, "S21")
    assert s21[np.argmin(abs(w - 1))] == pytest.approx(1.0, abs=1e-12)
    (p3a,), _ = build_figure("fig3a", str(tmp_path))
    t = open(p3a).read()
    x, s21, s12 = column(t, "g_ratio"), column(t, "S21"), column(t, "S12")
    i = np.argmin(abs(x - 1))
    assert s21[i] == pytest.approx(1.0, abs=1e-12) and s12[i] < 1e-12
    assert s12[0] == pytest.approx(s21[0])
    (p5,), _ = build_figure("fig5b", str(tmp_path))
    t = open(p5).read()
    w, s21 = column(t, "omega"), column(t, "S21")
    assert s21[np.argmin(abs(w - 1))] == pytest.approx(0.2, abs=1e-12)
    (p5a,), _ = build_figure("fig5a", str(tmp_path))
    t = open(p5a).read()
    np.testing.assert_allclose(column(t, "S21"), column(t, "S12"), atol=1e-14)


def test_current_figures(tmp_path):
    (p6,), ok = build_figure("fig6a", str(tmp_path), threads=4)
    assert ok
    t = open(p6).read()
    assert column(t, "J_L").min() >= -1e-12
    (p8,), ok = build_figure("fig8", str(tmp_path))
    t = open(p8).read()
    jl, jr = column(t, "J_L"), column(t, "J_R")
    np.testing.assert_allclose(jl, jr[::-1], rtol=1e-6, atol=1e-10)
    (p7,), ok = build_figure("fig7", str(tmp_path))
    head, rows = read_csv(open(p7).read())
    assert head[0] == "V" and len(head) == 7
    V = np.array([float(r[0]) for r in rows])
    i = np.argmax(V)
    jr = [abs(float(rows[i][head.index(f"J_R[alpha={a}]")])) for a in ("1", "4", "8")]
    assert jr[0] > jr[1] > jr[2]


def test_long_mode_spellings():
    long = THREE + "g_mode = auto_directional\ngamma_mode = auto_matched\n"
    assert parse_config(long).model == parse_config(THREE).model
