import csv
import json
import math

import numpy as np
import pytest

from hybrid_teleport import cli
from hybrid_teleport.config import PRESETS, SweepConfig, expand_grid, parse_number, preset_config
from hybrid_teleport.errors import ConfigError


def read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    comments = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    return comments, list(csv.DictReader(body))


def run(*argv):
    return cli.main([str(a) for a in argv])


class TestGrids:
    def test_pi_expressions(self):
        assert parse_number("pi/64") == pytest.approx(math.pi / 64)
        assert parse_number("2*pi") == pytest.approx(2 * math.pi)
        assert parse_number("-0.5") == -0.5

    def test_rejects_code(self):
        with pytest.raises(ConfigError):
            parse_number("__import__('os')")

    def test_inclusive_stop(self):
        g = expand_grid({"start": 0, "stop": "pi", "step": "pi/64"}, "theta")
        assert len(g) == 65 and g[-1] == pytest.approx(math.pi)

    def test_fig2_alpha_grid(self):
        g = preset_config("fig2").grid("alpha")
        assert g[0] == 0.01 and 2.0 in g and g[-1] == 3.0

    def test_empty_range(self):
        assert expand_grid({"start": 1, "stop": 0, "step": 0.1}, "theta").size == 0


class TestValidation:
    @pytest.mark.parametrize(
        "patch,field",
        [
            ({"theta": {"start": 1, "stop": 0, "step": 0.1}}, "theta"),
            ({"alpha": 9.0}, "alpha"),
            ({"output_format": "xml"}, "output_format"),
            ({"measurement_model": "noisy"}, "measurement_model"),
            ({"fock_dim": 12, "alpha": 2.0}, "fock_dim"),
            ({"seed": -1}, "seed"),
            ({"bogus": 1}, "bogus"),
        ],
    )
    def test_field_named(self, patch, field):
        data = {"experiment": "teleport-fidelity", **patch}
        with pytest.raises(ConfigError) as err:
            SweepConfig.from_dict(data).validate()
        assert err.value.field == field
        assert field in str(err.value)

    def test_empty_theta_exit_and_no_file(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"experiment": "teleport-fidelity", "theta": []}))
        out = tmp_path / "out.csv"
        assert run("run", "--config", cfg, "--out", out) != 0
        assert not out.exists()

    def test_needs_source(self, capsys):
        assert run("run") == cli.EXIT_CONFIG
        assert "preset" in capsys.readouterr().err


class TestRun:
    def test_fig2_row(self, tmp_path):
        out = tmp_path / "fig2.csv"
        assert run("run", "fig2", "--out", out, "--jobs", 1) == 0
        comments, rows = read_csv(out)
        assert len(comments) == 1 and "config_sha256=" in comments[0]
        assert len(rows) == 65 * 61
        row = next(r for r in rows if math.isclose(float(r["theta"]), math.pi / 2, abs_tol=1e-8)
                   and float(r["alpha"]) == 2.0)
        assert f"{float(row['f_quantum']):.6f}" == "1.000000"
        assert float(row["f_classical"]) == pytest.approx(0.5, abs=2e-3)

    def test_fig2b_simulated_column(self, tmp_path):
        out = tmp_path / "b.csv"
        assert run("run", "fig2b", "--out", out, "--jobs", 1) == 0
        _, rows = read_csv(out)
        for r in rows:
            assert float(r["f_quantum_sim"]) == pytest.approx(float(r["f_quantum"]), abs=1e-8)

    def test_fig4_has_small_kerr(self, tmp_path):
        out = tmp_path / "fig4.csv"
        run("run", "fig4", "--out", out, "--jobs", 1)
        _, rows = read_csv(out)
        assert min(abs(float(r["K_kHz"])) for r in rows) < 10.0

    def test_flagged_rows(self, tmp_path):
        cfg = tmp_path / "k.json"
        cfg.write_text(json.dumps({"experiment": "kerr-sweep", "flux": [0.03, 0.141]}))
        out = tmp_path / "k.csv"
        assert run("run", "--config", cfg, "--out", out, "--jobs", 1) == cli.EXIT_FLAGGED
        text = out.read_text()
        assert "nan" not in text.lower()
        _, rows = read_csv(out)
        assert rows[0]["error"].startswith("AmbiguousBranch") and rows[1]["error"] == ""

    def test_json_mirrors_csv(self, tmp_path):
        c, j = tmp_path / "v.csv", tmp_path / "v.json"
        run("run", "verify", "--out", c, "--jobs", 1)
        run("run", "verify", "--out", j, "--format", "json", "--jobs", 1)
        _, rows = read_csv(c)
        doc = json.loads(j.read_text())
        assert [r["verdict"] for r in rows] == [r["verdict"] for r in doc["rows"]]
        assert [float(r["parity_correlation"]) for r in rows] == [r["parity_correlation"] for r in doc["rows"]]

    def test_flags_override_file(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"experiment": "bsm-stats", "alpha": 1.0, "theta": 1.0, "measurement_model": "ideal"}))
        out = tmp_path / "c.csv"
        run("run", "--config", cfg, "--model", "displaced", "--seed", 9, "--out", out, "--jobs", 1)
        comments, _ = read_csv(out)
        assert "seed=9" in comments[0]

    def test_env_outdir(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTDIR_ENV, str(tmp_path / "o"))
        assert run("run", "bsm", "--jobs", 1) == 0
        assert (tmp_path / "o" / "bsm.csv").exists()

    def test_timestamp_opt_in(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run("run", "bsm", "--out", a, "--jobs", 1)
        run("run", "bsm", "--out", b, "--jobs", 1, "--timestamp")
        assert "generated=" not in a.read_text() and "generated=" in b.read_text()

    def test_jobs_do_not_change_output(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run("run", "fig2b", "--out", a, "--jobs", 1)
        run("run", "fig2b", "--out", b, "--jobs", 3)
        assert a.read_bytes() == b.read_bytes()

    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_preset_round_trip(self, name, tmp_path):
        dumped = tmp_path / "cfg.json"
        assert run("config", "dump", name, "--out", dumped) == 0
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run("run", name, "--out", a, "--jobs", 2)
        run("run", "--config", dumped, "--out", b, "--jobs", 2)
        assert a.read_bytes() == b.read_bytes()

    def test_wigner_grid_experiment(self, tmp_path):
        cfg = tmp_path / "w.json"
        cfg.write_text(json.dumps({"experiment": "wigner-grid",
                                   "options": {"state": "scs-", "alpha": 1.5, "x": [0.0], "y": [0.0]}}))
        out = tmp_path / "w.csv"
        assert run("run", "--config", cfg, "--out", out) == 0
        _, rows = read_csv(out)
        assert float(rows[0]["W"]) == pytest.approx(-2 / math.pi, abs=1e-8)


class TestWignerCommand:
    def _center(self, path):
        lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
        table = list(csv.reader(lines))
        xs = [float(v) for v in table[0][1:]]
        grid = np.array([[float(v) for v in row[1:]] for row in table[1:]])
        return grid, grid[len(xs) // 2, len(xs) // 2]

    def test_even_cat(self, tmp_path):
        out = tmp_path / "s.csv"
        assert run("wigner", "scs+", "--alpha", 2, "--points", 41, "--out", out) == 0
        grid, center = self._center(out)
        assert grid.shape == (41, 41)
        assert center == pytest.approx(0.6366, abs=1e-4)

    def test_mixture(self, tmp_path):
        out = tmp_path / "m.csv"
        run("wigner", "mixture", "--alpha", 2, "--points", 5, "--out", out)
        assert self._center(out)[1] == pytest.approx(2.1e-4, rel=0.05)

    def test_vacuum_peak(self, tmp_path):
        out = tmp_path / "v.csv"
        run("wigner", "vacuum", "--points", 5, "--out", out)
        grid, center = self._center(out)
        assert center == pytest.approx(2 / math.pi, abs=1e-9) and center == grid.max()

    def test_teleport_output(self, tmp_path):
        out = tmp_path / "t.json"
        assert run("wigner", "teleport-output", "--alpha", 2, "--theta", "pi/2", "--points", 3,
                   "--format", "json", "--out", out) == 0
        doc = json.loads(out.read_text())
        assert doc["W"][1][1] == pytest.approx(2 / math.pi, abs=1e-8)

    def test_unknown_state(self, tmp_path):
        out = tmp_path / "x.csv"
        assert run("wigner", "squeezed", "--out", out) == cli.EXIT_CONFIG
        assert not out.exists()


def test_presets_list(capsys):
    assert run("presets", "list") == 0
    text = capsys.readouterr().out
    for name in ("fig2", "fig2b", "fig4"):
        assert name in text
