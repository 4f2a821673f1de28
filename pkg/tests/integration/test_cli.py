"""
Integration tests for the dsr-consensus command line.
Every command runs in-process through main() against temporary output directories.
"""

import os
import sys

import numpy as np
import pandas as pd
import pytest

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from src.cli.main import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main
from src.models.graph import graph_spec, save_graph
from src.services.formation import init_circle

GRAPHS_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), '../../01_data/graphs'))


def parse(out):
    """``key: value`` lines to a dict of strings."""
    return dict(line.split(": ", 1) for line in out.strip().splitlines())


@pytest.fixture
def run(capsys, tmp_path):
    def invoke(*argv):
        code = main([*argv, "--out", str(tmp_path)] if argv and argv[0] != "reproduce" else list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return invoke


# =============================================================================
# Analyze
# =============================================================================
class TestAnalyze:

    def test_ring_defaults(self, run):
        code, out, _ = run("analyze")
        doc = parse(out)
        assert code == EXIT_OK
        assert int(doc["agents"]) == 31
        assert float(doc["lambda_min"]) == pytest.approx(0.0081, abs=5e-4)
        assert float(doc["lambda_max"]) == pytest.approx(4.2361, abs=1e-3)
        assert doc["real_spectrum"] == "yes"
        assert float(doc["gamma_bar_real"]) == pytest.approx(0.47214, abs=2e-4)
        assert float(doc["gamma"]) == 0.471
        assert doc["stable_first_order"] == "yes"
        assert doc["stable_dsr"] == "yes"
        assert doc["jury_dsr"] == "yes"
        assert float(doc["beta_critical"]) == pytest.approx(0.8840, abs=1e-3)
        lower, upper = (float(v) for v in doc["beta_range"].strip("()").split(", "))
        assert lower == pytest.approx(-0.0024, abs=5e-4)
        assert upper == 1.0

    def test_unstable_gain_is_reported(self, run):
        code, out, _ = run("analyze", "--gamma", "0.48")
        doc = parse(out)
        assert code == EXIT_OK
        assert doc["stable_first_order"] == "no"
        assert "beta_range" not in doc

    def test_pair_graph(self, run):
        code, out, _ = run("analyze", "--graph", os.path.join(GRAPHS_DIR, "pair.json"))
        doc = parse(out)
        assert code == EXIT_OK
        assert float(doc["gamma_bar_general"]) == pytest.approx(2.0)
        assert float(doc["gamma"]) == pytest.approx(1.0, abs=1e-3)
        assert "radius_dsr" not in doc

    def test_complex_spectrum(self, run, tmp_path):
        # directed cycle 1 -> 2 -> 3 -> 1 with agent 1 pinned
        path = save_graph(graph_spec(4, 4, [(4, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 1, 1.0)]),
                          tmp_path / "cycle.json")
        code, out, _ = run("analyze", "--graph", str(path), "--gamma", "0.3", "--beta", "0.5")
        doc = parse(out)
        assert code == EXIT_OK
        assert doc["real_spectrum"] == "no"
        assert "gamma_bar_real" not in doc
        assert doc["stable_dsr"] == doc["jury_dsr"]

    def test_output_is_deterministic(self, run):
        assert run("analyze")[1] == run("analyze")[1]


# =============================================================================
# Sweep
# =============================================================================
class TestSweep:

    def test_gamma_grid(self, run, tmp_path):
        code, out, _ = run("sweep", "gamma", "--grid", "0.4:0.472:0.0001")
        doc = parse(out)
        assert code == EXIT_OK
        assert int(doc["points"]) == 721
        assert float(doc["argmin"]) == pytest.approx(0.47119, abs=5e-4)
        df = pd.read_csv(tmp_path / "sweep.csv")
        assert list(df.columns) == ["gain", "radius"]
        assert len(df) == 721

    def test_beta_grid(self, run):
        code, out, _ = run("sweep", "beta", "--grid", "0.88:0.895:0.0005")
        doc = parse(out)
        assert code == EXIT_OK
        assert float(doc["gamma"]) == 0.471
        assert float(doc["argmin"]) == pytest.approx(0.8805, abs=5e-4)

    def test_single_point(self, run):
        code, out, _ = run("sweep", "gamma", "--grid", "0.3:0.3:0.1")
        doc = parse(out)
        assert code == EXIT_OK
        assert int(doc["points"]) == 1
        assert float(doc["argmin"]) == 0.3

    def test_bad_grid(self, run):
        code, _, err = run("sweep", "gamma", "--grid", "0.3:0.1")
        assert code == EXIT_USAGE
        assert "LO:HI:STEP" in err


# =============================================================================
# Simulate
# =============================================================================
class TestSimulate:

    def test_first_order(self, run, tmp_path):
        code, out, _ = run("simulate", "--mode", "first-order")
        doc = parse(out)
        assert code == EXIT_OK
        assert doc["converged"] == "yes"
        assert float(doc["settling_time"]) == pytest.approx(12.04, abs=0.05)
        df = pd.read_csv(tmp_path / "trajectory_first-order.csv")
        assert df.columns[0] == "t" and df.columns[-1] == "source"
        assert len(df.columns) == 33

    def test_relative_band_from_config(self, run, tmp_path):
        path = tmp_path / "relative.yaml"
        path.write_text("numerics: {settling_band: 0.02, settling_reference: amplitude}\n")
        code, out, _ = run("simulate", "--mode", "first-order", "--config", str(path))
        assert code == EXIT_OK
        assert float(parse(out)["settling_time"]) == pytest.approx(10.88, abs=0.015)

    def test_dsr(self, run):
        code, out, _ = run("simulate", "--mode", "dsr")
        doc = parse(out)
        assert code == EXIT_OK
        assert float(doc["beta"]) == 0.8876
        assert float(doc["settling_time"]) == pytest.approx(0.90, abs=0.05)

    def test_second_order_matched(self, run):
        code, out, _ = run("simulate", "--mode", "second-order", "--horizon", "3")
        doc = parse(out)
        assert code == EXIT_OK
        assert float(doc["delta_t"]) == pytest.approx(8.876e-5)
        assert float(doc["settling_time"]) == pytest.approx(0.9399, abs=0.02)

    def test_second_order_coarse_needs_force(self, run, tmp_path):
        code, _, err = run("simulate", "--mode", "second-order", "--tilde-dt", "0.01",
                           "--horizon", "3")
        assert code == EXIT_NUMERICAL
        assert "--force" in err
        assert not (tmp_path / "trajectory_second-order.csv").exists()

    def test_second_order_coarse_forced(self, run, tmp_path):
        code, out, _ = run("simulate", "--mode", "second-order", "--tilde-dt", "0.01",
                           "--horizon", "3", "--force")
        doc = parse(out)
        assert code == EXIT_NUMERICAL
        assert doc["divergent"] == "yes"
        assert float(doc["spectral_radius"]) == pytest.approx(1.7667, abs=1e-3)
        assert (tmp_path / "trajectory_second-order.csv").exists()

    def test_continuous(self, run):
        code, out, _ = run("simulate", "--mode", "continuous", "--horizon", "20")
        doc = parse(out)
        assert code == EXIT_OK
        assert float(doc["delta_t"]) == pytest.approx(0.001)
        assert float(doc["settling_time"]) == pytest.approx(12.07, abs=0.05)

    def test_zero_horizon_rejected(self, run):
        code, _, _ = run("simulate", "--horizon", "0")
        assert code == EXIT_USAGE

    def test_unstable_gain_refused(self, run):
        code, _, _ = run("simulate", "--gamma", "0.48")
        assert code == EXIT_NUMERICAL


# =============================================================================
# Formation
# =============================================================================
class TestFormation:

    def test_dsr_keeps_shape(self, run, tmp_path):
        code, out, _ = run("formation")
        doc = parse(out)
        assert code == EXIT_OK
        steps = int(doc["steps"])
        # horizon defaults to the measured no-DSR settling time
        assert abs(steps - 1204) <= 5
        assert int(doc["leader"]) == 16
        assert float(doc["distortion_no_dsr"]) > float(doc["distortion_dsr"])
        for name in ("formation_no_dsr.csv", "formation_dsr.csv"):
            df = pd.read_csv(tmp_path / name)
            assert len(df) == steps + 1
            assert len(df.columns) == 63

    def test_zero_step(self, run):
        code, out, _ = run("formation", "--step", "0")
        doc = parse(out)
        assert code == EXIT_OK
        assert float(doc["distortion_no_dsr"]) <= 1e-12
        assert float(doc["distortion_dsr"]) <= 1e-12

    def test_zero_horizon(self, run, tmp_path):
        code, out, _ = run("formation", "--horizon", "0")
        assert code == EXIT_OK
        assert int(parse(out)["steps"]) == 0
        df = pd.read_csv(tmp_path / "formation_dsr.csv")
        assert len(df) == 1
        circle = init_circle(31)
        np.testing.assert_allclose(df[["x_1", "y_1"]].to_numpy()[0], circle[0], atol=1e-14)
        np.testing.assert_allclose(df[["x_9", "y_9"]].to_numpy()[0], circle[8], atol=1e-14)


# =============================================================================
# Exit codes
# =============================================================================
class TestExitCodes:

    def test_help(self, capsys):
        assert main(["--help"]) == EXIT_OK
        assert "analyze" in capsys.readouterr().out

    def test_unknown_command(self, capsys):
        assert main(["plot"]) == EXIT_USAGE

    def test_missing_command(self, capsys):
        assert main([]) == EXIT_USAGE

    def test_missing_graph_file(self, run, tmp_path):
        code, _, _ = run("analyze", "--graph", str(tmp_path / "absent.json"))
        assert code == EXIT_USAGE

    def test_invalid_graph(self, run, tmp_path):
        path = tmp_path / "zero.json"
        path.write_text('{"nodes": 2, "source": 2, "edges": [[2, 1, 0]]}')
        code, _, err = run("analyze", "--graph", str(path))
        assert code == EXIT_USAGE
        assert "nonpositive weight" in err

    def test_disconnected_graph(self, run, tmp_path):
        path = save_graph(graph_spec(3, 3, [(3, 1, 1.0)]), tmp_path / "split.json")
        code, _, err = run("analyze", "--graph", str(path))
        assert code == EXIT_NUMERICAL
        assert "[2]" in err

    def test_negative_gain(self, run):
        code, _, _ = run("analyze", "--gamma", "-1")
        assert code == EXIT_USAGE

    def test_bad_config(self, run, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("scenario: {delta_t: -1}\n")
        code, _, _ = run("analyze", "--config", str(path))
        assert code == EXIT_USAGE
