import subprocess
import sys

import pytest

from optomagnonic.cli import EXIT_ERROR, EXIT_STABLE, EXIT_UNSTABLE, main
from optomagnonic.config import CONTROL_KEYS, KEY_HELP

from test_measures import FROZEN


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report_values(text):
    """``label value`` pairs from a point report (first token after the label)."""
    values = {}
    for line in text.splitlines():
        parts = line.split()
        if len(parts) >= 2 and line.startswith("  "):
            values[parts[0]] = parts[1]
    return values


class TestPoint:
    def test_scheme_i(self, capsys):
        code, out, _ = run(capsys, "point", "--preset", "scheme_i")
        assert code == EXIT_STABLE
        values = report_values(out)
        assert values["stable"] == "True"
        assert float(values["E_am"]) == pytest.approx(FROZEN["scheme_i"]["E_am"], rel=1e-9)
        for key in ("E_cm", "E_ac", "R_a|cm", "R_c|am", "R_m|ac", "R_min", "dC_am", "dC_cm",
                    "max_real_eig", "lyapunov_residual"):
            assert key in values
        assert float(values["lyapunov_residual"]) <= 1e-10
        assert "+25 MHz" in out

    def test_zero_couplings(self, capsys):
        code, out, _ = run(capsys, "point", "--preset", "scheme_i",
                           "--set", "G_a_hz=0", "--set", "G_c_hz=0", "--set", "G_m_hz=0")
        assert code == EXIT_STABLE
        values = report_values(out)
        for key in ("E_am", "E_cm", "E_ac", "R_min", "dC_am", "dC_cm"):
            assert float(values[key]) == pytest.approx(0.0, abs=1e-12)

    def test_unstable_exit_code(self, capsys):
        code, out, _ = run(capsys, "point", "--preset", "scheme_ii", "--set", "G_m_hz=2e7")
        assert code == EXIT_UNSTABLE
        values = report_values(out)
        assert values["stable"] == "False"
        assert float(values["max_real_eig"]) > 0
        assert "E_cm" not in values

    def test_config_file_and_override_order(self, tmp_path, capsys):
        cfg = tmp_path / "p.cfg"
        cfg.write_text("preset = scheme_ii\nG_m_hz = 1e6  # comment\nDelta_m_hz = -omega_b\n")
        code, out, _ = run(capsys, "point", "--config", str(cfg), "--set", "G_m_hz=1.5e6")
        assert code == EXIT_STABLE
        assert float(report_values(out)["E_cm"]) == pytest.approx(FROZEN["scheme_ii"]["E_cm"], rel=1e-9)

    def test_line_numbered_config_error(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("preset = scheme_i\n\nG_m_hz = lots\n")
        code, _, err = run(capsys, "point", "--config", str(cfg))
        assert code == EXIT_ERROR
        assert "bad.cfg:3:" in err

    def test_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("preset = scheme_i\nG_x_hz = 1\n")
        code, _, err = run(capsys, "point", "--config", str(cfg))
        assert code == EXIT_ERROR
        assert "bad.cfg:2:" in err and "G_x_hz" in err
        code, _, err = run(capsys, "point", "--preset", "scheme_i", "--set", "bogus=1")
        assert code == EXIT_ERROR and "bogus" in err

    def test_usage_errors_exit_one(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["point", "--preset", "scheme_iii"])
        assert info.value.code == EXIT_ERROR
        capsys.readouterr()

    def test_incomplete_config_without_preset(self, tmp_path, capsys):
        cfg = tmp_path / "p.cfg"
        cfg.write_text("omega_b_hz = 25e6\n")
        code, _, err = run(capsys, "point", "--config", str(cfg))
        assert code == EXIT_ERROR and "missing" in err

    def test_physical_mode(self, capsys):
        code, out, _ = run(capsys, "point", "--preset", "scheme_i", "--physical",
                           "--set", "P_a_W=1e-3", "--set", "g_a_hz=10", "--set", "P_c_W=1e-3",
                           "--set", "g_c_hz=10")
        values = report_values(out)
        assert code in (EXIT_STABLE, EXIT_UNSTABLE)
        assert values["converged"] == "True"
        for key in ("a_s", "c_s", "m_s", "q_s"):
            assert key in values
        if code == EXIT_STABLE:
            assert float(values["C_Q_a"]) > 0

    def test_symmetric_convention_same_measures(self, capsys):
        _, default, _ = run(capsys, "point", "--preset", "scheme_i")
        _, sym, _ = run(capsys, "point", "--preset", "scheme_i", "--set", "drift_convention=symmetric")
        a, b = report_values(default), report_values(sym)
        assert b["drift_convention"] == "symmetric"
        assert float(a["E_am"]) == pytest.approx(float(b["E_am"]), abs=1e-9)

    def test_deterministic(self, capsys):
        first = run(capsys, "point", "--preset", "scheme_ii")[1]
        assert run(capsys, "point", "--preset", "scheme_ii")[1] == first


@pytest.mark.parametrize("command", ["point", "sweep", "stability-map", "presets", "figures"])
def test_help_lists_every_key(command, capsys):
    with pytest.raises(SystemExit) as info:
        main([command, "--help"])
    assert info.value.code == 0
    text = capsys.readouterr().out
    for key in list(KEY_HELP) + list(CONTROL_KEYS):
        assert key in text, key
    assert "[sweep]" in text


def test_presets(capsys):
    code, out, _ = run(capsys, "presets")
    assert code == EXIT_STABLE
    assert "scheme_i:" in out and "scheme_ii:" in out
    delta_m = [float(l.split()[1]) for l in out.splitlines() if l.split()[0] == "Delta_m"]
    assert delta_m == [pytest.approx(25e6, rel=1e-15), pytest.approx(-25e6, rel=1e-15)]


class TestSweepCommands:
    def test_sweep(self, tmp_path, capsys):
        cfg = tmp_path / "dm.cfg"
        cfg.write_text("preset = scheme_i\n[sweep]\naxis = Delta_m_hz, -2, 2, 5, linear, omega_b\nmeasures = E_am, R_min\n")
        code, out, _ = run(capsys, "sweep", "--config", str(cfg), "--out", str(tmp_path / "o"), "--threads", "1")
        assert code == EXIT_STABLE
        lines = (tmp_path / "o" / "dm.csv").read_text().splitlines()
        assert lines[0] == "Delta_m_hz,stable,max_real_eig,E_am,R_min"
        assert len(lines) == 6
        assert (tmp_path / "o" / "dm.gp").exists()
        assert "5 points" in out

    def test_missing_sweep_section(self, tmp_path, capsys):
        cfg = tmp_path / "x.cfg"
        cfg.write_text("preset = scheme_i\n")
        code, _, err = run(capsys, "sweep", "--config", str(cfg), "--out", str(tmp_path))
        assert code == EXIT_ERROR and "[sweep]" in err

    def test_stability_map(self, tmp_path, capsys):
        cfg = tmp_path / "map.cfg"
        cfg.write_text(
            "preset = scheme_ii\n[sweep]\n"
            "axis = G_a_hz, 1, 10, 4, linear, G_a\naxis = G_m_hz, 1, 10, 4, linear, G_m\n"
        )
        code, _, _ = run(capsys, "stability-map", "--config", str(cfg), "--out", str(tmp_path))
        assert code == EXIT_STABLE
        lines = (tmp_path / "map.csv").read_text().splitlines()
        assert lines[0].startswith("# grid row-major over (G_a_hz, G_m_hz), 4 x 4")
        assert lines[1].startswith("G_a_hz,G_m_hz,stable,max_real_eig")
        stable = [l.split(",")[2] for l in lines[2:]]
        assert "0" in stable and "1" in stable
        assert "palette maxcolors 2" in (tmp_path / "map.gp").read_text()


class TestFigures:
    def test_fig3(self, tmp_path, capsys):
        code, _, _ = run(capsys, "figures", "fig3", str(tmp_path))
        assert code == EXIT_STABLE
        assert sorted(p.name for p in tmp_path.glob("*.csv")) == ["fig3a.csv", "fig3b.csv", "fig3c.csv"]
        assert len(list(tmp_path.glob("*.gp"))) == 3

    def test_fig9_maps(self, tmp_path, capsys):
        code, _, _ = run(capsys, "figures", "fig9", "--out", str(tmp_path))
        assert code == EXIT_STABLE
        csvs = sorted(tmp_path.glob("*.csv"))
        assert [p.name for p in csvs] == ["fig9a.csv", "fig9b.csv", "fig9c.csv", "fig9d.csv"]
        for p in csvs:
            text = p.read_text()
            assert text.startswith("# grid row-major")
            assert text.splitlines()[1].split(",")[2] == "stable"

    def test_identical_runs_are_byte_identical(self, tmp_path, capsys):
        run(capsys, "figures", "fig5", str(tmp_path / "one"))
        run(capsys, "figures", "fig5", str(tmp_path / "two"))
        for p in (tmp_path / "one").iterdir():
            assert p.read_bytes() == (tmp_path / "two" / p.name).read_bytes()

    def test_unknown_figure(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["figures", "fig11"])
        assert info.value.code == EXIT_ERROR
        capsys.readouterr()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "optomagnonic", "point", "--preset", "scheme_ii",
                           "--set", "G_m_hz=2e7"], capture_output=True, text=True)
    assert proc.returncode == EXIT_UNSTABLE
    assert "stable                 False" in proc.stdout
