"""Exit codes and output shapes of the command line front end."""

import csv
import json

import pytest

from redsim import cli
from redsim.auxiliary import CoupledResult
from redsim.simulate import SimMetrics

SCENARIO = (
    "[scenario]\n"
    "num_servers = 4\nreplicas = 2\nscale = 10.0\narrival_rate = 5.0\n"
    "horizon = 60.0\nseeds = [1, 2]\n"
)


@pytest.fixture
def scenario_file(tmp_path):
    p = tmp_path / "scenario.toml"
    p.write_text(SCENARIO)
    return str(p)


class TestSimulate:
    def test_json_to_stdout(self, scenario_file, capsys):
        assert cli.main(["simulate", scenario_file]) == 0
        payload = json.loads(capsys.readouterr().out)
        for key in ("n_events", "mean_waiting", "sync_fraction", "final_max_workload"):
            assert key in payload

    def test_flags_override(self, scenario_file, capsys):
        assert cli.main(["simulate", scenario_file, "--seed", "9",
                         "--horizon", "30", "--warmup", "0"]) == 0
        a = json.loads(capsys.readouterr().out)
        assert cli.main(["simulate", scenario_file, "--seed", "10",
                         "--horizon", "30", "--warmup", "0"]) == 0
        b = json.loads(capsys.readouterr().out)
        assert a["mean_waiting"] != b["mean_waiting"]

    def test_out_file(self, scenario_file, tmp_path, capsys):
        out = tmp_path / "m.json"
        assert cli.main(["simulate", scenario_file, "--out", str(out)]) == 0
        json.loads(out.read_text())

    def test_unwritable_out_is_io_error(self, scenario_file):
        assert cli.main(["simulate", scenario_file,
                         "--out", "/nonexistent/dir/m.json"]) == 3


class TestErrors:
    def test_missing_config_file(self):
        assert cli.main(["simulate", "/no/such/file.toml"]) == 3

    def test_invalid_scenario_values(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("[scenario]\nnum_servers = 2\nreplicas = 5\n"
                     "scale = 10.0\narrival_rate = 1.0\n")
        assert cli.main(["simulate", str(p)]) == 1

    def test_broken_toml(self, tmp_path):
        p = tmp_path / "broken.toml"
        p.write_text("[scenario\n???")
        assert cli.main(["simulate", str(p)]) == 1

    def test_unknown_subcommand(self):
        assert cli.main(["transmogrify"]) == 1

    def test_bad_flag_value(self, scenario_file):
        assert cli.main(["simulate", scenario_file, "--horizon", "soon"]) == 1


class TestGrid:
    def test_writes_csv(self, tmp_path, capsys):
        p = tmp_path / "g.toml"
        p.write_text(SCENARIO + "[grid]\nnum_servers = [2, 4]\n")
        out = tmp_path / "g.csv"
        assert cli.main(["grid", str(p), "--out", str(out), "--deterministic"]) == 0
        rows = list(csv.reader(open(out)))
        assert rows[0][0] == "cell_index"
        assert len(rows) == 1 + 2 * 3

    def test_needs_output_somewhere(self, tmp_path):
        p = tmp_path / "g.toml"
        p.write_text(SCENARIO + "[grid]\nnum_servers = [2]\n")
        assert cli.main(["grid", str(p)]) == 1


class TestCoupled:
    def test_pass_summary(self, scenario_file, capsys):
        assert cli.main(["coupled", scenario_file, "--horizon", "40"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["passed"] is True
        assert payload["max_violations"] == 0

    def test_trace_file(self, scenario_file, tmp_path, capsys):
        out = tmp_path / "trace.csv"
        assert cli.main(["coupled", scenario_file, "--horizon", "40",
                         "--out", str(out), "--deterministic"]) == 0
        rows = list(csv.reader(open(out)))
        assert rows[0][0] == "time"
        assert len(rows) > 1

    def test_violation_exit_code(self, scenario_file, capsys, monkeypatch):
        # a genuine violation would be a simulator bug, so fake the result
        # to pin the exit-code contract
        fail = CoupledResult(
            passed=False, n_events=10, max_violations=1, gap_violations=0,
            first_violation={"event_index": 3, "time": 1.0},
            original=SimMetrics(), auxiliary=SimMetrics(), mg1_final=0.0,
        )
        monkeypatch.setattr(cli, "run_coupled", lambda *a, **kw: fail)
        assert cli.main(["coupled", scenario_file]) == 2
        payload = json.loads(capsys.readouterr().out)
        assert payload["passed"] is False


class TestBounds:
    def test_stable_payload(self, scenario_file, capsys):
        assert cli.main(["bounds", scenario_file]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["sufficient_stable"] is True
        assert payload["rho"] == 0.5
        assert payload["mg1"]["expected_workload"] > 0
        assert "sync" in payload

    def test_unstable_payload_has_null_bounds(self, tmp_path, capsys):
        p = tmp_path / "u.toml"
        p.write_text("[scenario]\nnum_servers = 4\nreplicas = 2\n"
                     "scale = 10.0\narrival_rate = 30.0\n")
        assert cli.main(["bounds", str(p)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["sufficient_stable"] is False
        assert payload["waiting_time_upper_bound"] is None


class TestScan:
    def test_lambdas_csv(self, tmp_path, capsys):
        p = tmp_path / "s.toml"
        p.write_text("[scenario]\nnum_servers = 1\nreplicas = 1\n"
                     "scale = 10.0\narrival_rate = 1.0\n"
                     "horizon = 30000.0\nseeds = [3]\n")
        out = tmp_path / "scan.csv"
        assert cli.main(["scan", str(p), "--lambdas", "0.5,1.6",
                         "--out", str(out)]) == 0
        rows = list(csv.reader(open(out)))
        assert rows[0][0] == "lambda_tested"
        assert len(rows) == 3
        text = capsys.readouterr().out
        assert "capacity_estimate" in text

    def test_needs_mode(self, scenario_file):
        assert cli.main(["scan", scenario_file]) == 1

    def test_bad_lambdas_string(self, scenario_file):
        assert cli.main(["scan", scenario_file, "--lambdas", "1.0,zap"]) == 1


class TestRenewal:
    def test_closed_form(self, capsys):
        assert cli.main(["renewal", "det1", "2.7"]) == 0
        assert "2.0" in capsys.readouterr().out

    def test_with_monte_carlo(self, capsys):
        assert cli.main(["renewal", "unif02", "2.0", "--mc", "5000", "--seed", "1"]) == 0
        out = capsys.readouterr().out
        assert "mc(" in out and "+-" in out

    def test_bad_kind(self, capsys):
        assert cli.main(["renewal", "gamma", "1.0"]) == 1
