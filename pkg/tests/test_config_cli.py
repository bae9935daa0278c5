import json
import subprocess
import sys
from pathlib import Path

import pytest

from formstab.cli import main
from formstab.config import ConfigError, load_config, load_config_dict, set_by_path

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

MINIMAL_LINEAR = """
[material]
E = 1.0
L = 1.0

[law]
variant = "norton"
sigma_ref = 1.0
n = 1.0
t_ref = 10.0

[desired]
sigma_star = 1.0

[solver]
scheme = "linear-riemann"
n_cells = 64
cfl = 1.0
t_end = 2.0
record_every = 4
"""


def write_config(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestLoadConfig:
    @pytest.mark.parametrize("name", ["linear-certify.toml", "linear-decay.toml",
                                      "nonlinear-1150C.toml", "nonlinear-1200C.toml"])
    def test_shipped_configs_load(self, name):
        cfg = load_config(CONFIG_DIR / name)
        cfg.material_params()
        cfg.desired_state()
        cfg.grid()
        cfg.solver_config()

    def test_defaults_resolved(self, tmp_path):
        cfg = load_config(write_config(tmp_path, MINIMAL_LINEAR))
        assert cfg.material["A"] == 1.0
        assert cfg.control["law_variant"] == "riemann-gain"
        assert cfg.lyapunov["mu_hat_policy"] == "paper-default"
        assert cfg.output["csv"] == "series.csv"

    def test_negative_modulus_names_key_path(self, tmp_path):
        bad = MINIMAL_LINEAR.replace("E = 1.0", "E = -5.0")
        with pytest.raises(ConfigError, match=r"material\.E"):
            load_config(write_config(tmp_path, bad))

    def test_missing_required_key(self, tmp_path):
        bad = MINIMAL_LINEAR.replace("t_end = 2.0", "")
        with pytest.raises(ConfigError, match=r"solver\.t_end"):
            load_config(write_config(tmp_path, bad))

    def test_bad_scheme_names_key_path(self, tmp_path):
        bad = MINIMAL_LINEAR.replace('scheme = "linear-riemann"', 'scheme = "magic"')
        with pytest.raises(ConfigError, match=r"solver\.scheme"):
            load_config(write_config(tmp_path, bad))

    def test_bad_cfl(self, tmp_path):
        bad = MINIMAL_LINEAR.replace("cfl = 1.0", "cfl = 1.5")
        with pytest.raises(ConfigError, match=r"solver\.cfl"):
            load_config(write_config(tmp_path, bad))

    def test_invalid_toml(self, tmp_path):
        with pytest.raises(ConfigError, match="TOML"):
            load_config(write_config(tmp_path, "material = [unclosed"))

    def test_set_by_path(self):
        cfg = load_config(CONFIG_DIR / "nonlinear-1150C.toml")
        base = cfg.to_json_dict()
        changed = set_by_path(base, "material.E", 10000.0)
        assert changed["material"]["E"] == 10000.0
        assert base["material"]["E"] == 9200.0
        reloaded = load_config_dict(changed)
        assert reloaded.material["E"] == 10000.0
        with pytest.raises(ConfigError, match=r"sweep\.path"):
            set_by_path(base, "material.missing", 1.0)
        with pytest.raises(ConfigError, match=r"sweep\.path"):
            set_by_path(base, "law", 1.0)


class TestCliExitCodes:
    def test_config_error_is_2(self, tmp_path):
        bad = write_config(tmp_path, MINIMAL_LINEAR.replace("E = 1.0", "E = -1.0"))
        assert main(["certify", "--config", bad, "--quiet"]) == 2

    def test_certification_failure_is_3(self, tmp_path):
        # no law -> S* = 0 -> K = 1 -> condition 2 cannot hold
        text = MINIMAL_LINEAR.replace('variant = "norton"', 'variant = "none"') \
            .replace('sigma_ref = 1.0', '').replace('n = 1.0', '') \
            .replace('t_ref = 10.0', '')
        cfg = write_config(tmp_path, text)
        out = str(tmp_path / "out")
        assert main(["certify", "--config", cfg, "--out", out, "--quiet"]) == 3
        payload = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert payload["certificate"]["valid"] is False
        assert payload["s_star"] == 0.0

    def test_valid_certify_is_0(self, tmp_path):
        cfg = write_config(tmp_path, MINIMAL_LINEAR)
        out = str(tmp_path / "out")
        assert main(["certify", "--config", cfg, "--out", out, "--quiet"]) == 0
        payload = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert payload["certificate"]["valid"] is True
        assert payload["certificate"]["mu"] > 0.0
        assert payload["config"]["material"]["E"] == 1.0

    def test_simulate_writes_csv_and_summary(self, tmp_path):
        cfg = write_config(tmp_path, MINIMAL_LINEAR)
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out), "--quiet"]) == 0
        csv_text = (out / "series.csv").read_text()
        header = csv_text.splitlines()[0]
        assert header == ("t,lyapunov,l2_norm_U,v_left,v_right,"
                          "sigma_left,sigma_right,displacement,force")
        payload = json.loads((out / "summary.json").read_text())
        assert payload["status"] == "ok"
        assert payload["fitted_rate"] > 0.0
        assert payload["variant_adjudication"]["riemann-gain"] is True

    def test_zero_perturbation_run_all_zero_lyapunov(self, tmp_path):
        text = MINIMAL_LINEAR + "\n[initial]\nbump_amplitude = 0.0\n"
        cfg = write_config(tmp_path, text)
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out), "--quiet"]) == 0
        rows = (out / "series.csv").read_text().strip().splitlines()[1:]
        assert all(float(r.split(",")[1]) == 0.0 for r in rows)

    def test_refine_requires_cfl_below_one(self, tmp_path):
        cfg = write_config(tmp_path, MINIMAL_LINEAR)  # cfl = 1.0
        assert main(["refine", "--config", cfg, "--quiet"]) == 2

    def test_refine_reports_first_order(self, tmp_path):
        cfg = write_config(tmp_path, MINIMAL_LINEAR.replace("cfl = 1.0", "cfl = 0.9"))
        out = tmp_path / "out"
        assert main(["refine", "--config", cfg, "--out", str(out), "--quiet"]) == 0
        report = json.loads((out / "refine.json").read_text())
        assert report["levels"] == [64, 128, 256]
        for order in report["observed_orders"]:
            assert 0.8 <= order <= 1.2

    def test_sweep_requires_spec(self, tmp_path):
        cfg = write_config(tmp_path, MINIMAL_LINEAR)
        assert main(["sweep", "--config", cfg, "--quiet"]) == 2

    def test_sweep_single_value_matches_simulate(self, tmp_path):
        text = MINIMAL_LINEAR + '\n[sweep]\npath = "material.E"\nvalues = [1.0]\n'
        cfg = write_config(tmp_path, text)
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out), "--quiet"]) == 0
        sim = json.loads((out / "summary.json").read_text())
        assert main(["sweep", "--config", cfg, "--out", str(out), "--quiet"]) == 0
        rows = (out / "sweep.csv").read_text().strip().splitlines()
        assert len(rows) == 2
        cells = dict(zip(rows[0].split(","), rows[1].split(",")))
        assert cells["status"] == "ok"
        assert float(cells["fitted_rate"]) == pytest.approx(sim["fitted_rate"], rel=1e-12)

    def test_sweep_continues_past_variant_failure(self, tmp_path):
        text = MINIMAL_LINEAR + '\n[sweep]\npath = "material.E"\nvalues = [-1.0, 1.0]\n'
        cfg = write_config(tmp_path, text)
        out = tmp_path / "out"
        assert main(["sweep", "--config", cfg, "--out", str(out), "--quiet"]) == 0
        rows = (out / "sweep.csv").read_text().strip().splitlines()
        assert rows[1].split(",")[1] == "failed"
        assert rows[2].split(",")[1] == "ok"

    def test_console_entry_point(self, tmp_path):
        cfg = write_config(tmp_path, MINIMAL_LINEAR)
        proc = subprocess.run(
            [sys.executable, "-m", "formstab.cli", "certify",
             "--config", cfg, "--out", str(tmp_path / "out")],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert "certificate valid" in proc.stdout


class TestProvenance:
    def test_summary_embeds_resolved_config(self, tmp_path):
        cfg_path = write_config(tmp_path, MINIMAL_LINEAR)
        out = tmp_path / "out"
        main(["simulate", "--config", cfg_path, "--out", str(out), "--quiet"])
        payload = json.loads((out / "summary.json").read_text())
        embedded = payload["config"]
        # defaults are present, not just the keys the file spelled out
        assert embedded["solver"]["record_every"] == 4
        assert embedded["control"]["left"] == "feedback"
        assert embedded["lyapunov"]["n_scan"] == 256
        assert embedded["output"]["summary"] == "summary.json"
