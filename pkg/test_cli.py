"""
Command-line tests
Exit codes, report round-trips and byte-stable CSV output
"""

import io
import json
from pathlib import Path

import pandas as pd
import pytest

from separable_salpeter import cli
from separable_salpeter.config import load_report

CONFIGS = Path(__file__).parent / "configs"


def write_config(tmp_path, data, name="problem.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def exponential_config(v=1.0, mass=1.0, **extra):
    data = {
        "dimension": "1d",
        "kinetic": {"form": "salpeter", "mass": mass},
        "terms": [{"v": v, "f": {"type": "exponential", "a": 1.0}}],
    }
    data.update(extra)
    return data


# ============= UNIT TESTS =============

class TestSolveCommand:
    """Test the solve command"""

    def test_report_round_trip(self, tmp_path):
        """The JSON report re-parses with every solve field"""
        out = tmp_path / "solve.json"
        code = cli.main(["solve", "--config", str(CONFIGS / "exponential_1d.json"), "--out", str(out)])
        assert code == 0
        report = load_report(out.read_text(encoding="utf-8"))
        assert report["command"] == "solve"
        assert -1.0 < report["binding"] < 0.0
        assert report["consistency_residual"] <= 1e-6
        assert len(report["coefficients"]) == 1

    def test_no_bound_state(self, capsys):
        """Weak 3D Gauss exits 2 and names v_c"""
        code = cli.main(["solve", "--config", str(CONFIGS / "gauss_3d_weak.json")])
        assert code == 2
        assert "v_c" in capsys.readouterr().err

    def test_negative_coupling(self, tmp_path):
        """v = -1 is an invalid config"""
        assert cli.main(["solve", "--config", write_config(tmp_path, exponential_config(v=-1.0))]) == 3

    def test_missing_config(self, tmp_path):
        """Unreadable files are invalid configs"""
        assert cli.main(["solve", "--config", str(tmp_path / "absent.json")]) == 3

    def test_malformed_json(self, tmp_path):
        """Broken JSON is an invalid config"""
        path = tmp_path / "broken.json"
        path.write_text("{\"dimension\": ", encoding="utf-8")
        assert cli.main(["solve", "--config", str(path)]) == 3

    def test_unknown_command(self):
        """Usage errors map to exit 3"""
        assert cli.main(["diagonalize"]) == 3

    def test_wavefunction_table(self, tmp_path):
        """--psi-out writes position and momentum columns"""
        psi = tmp_path / "psi.csv"
        code = cli.main(["solve", "--config", str(CONFIGS / "gauss_3d.json"),
                         "--out", str(tmp_path / "r.json"), "--psi-out", str(psi)])
        assert code == 0
        table = pd.read_csv(psi)
        assert list(table.columns) == ["r", "psi_position", "k", "psi_momentum"]
        assert len(table) == 81

    def test_published_energy_adjudication(self, tmp_path):
        """At m = 1 only the halved couplings reproduce the printed energy"""
        log = tmp_path / "DISCREPANCIES.md"
        out = tmp_path / "two_term.json"
        code = cli.main(["solve", "--config", str(CONFIGS / "two_term_1d.json"),
                         "--out", str(out), "--discrepancy-log", str(log)])
        assert code == 0
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["published_energy"] == -0.36131
        assert not report["matches_published"]
        assert report["halved_matches_published"]
        assert "matching variant: halved" in log.read_text(encoding="utf-8")


class TestSweepCommands:
    """Test sweep-mass and coupling-curve"""

    def test_two_step_sweep(self, tmp_path, capsys):
        """steps = 2 gives exactly two rows per coupling scale"""
        config = write_config(tmp_path, exponential_config())
        assert cli.main(["sweep-mass", "--config", config, "--m-min", "0", "--m-max", "2", "--steps", "2"]) == 0
        table = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert list(table.columns) == ["coupling_scale", "m", "E", "e"]
        assert len(table) == 2
        assert table["m"].tolist() == [0.0, 2.0]

    def test_coupling_family(self, tmp_path):
        """E - m is lower for stronger couplings at every mass"""
        out = tmp_path / "sweep.csv"
        code = cli.main(["sweep-mass", "--config", str(CONFIGS / "exponential_1d.json"),
                         "--m-min", "0.5", "--m-max", "2", "--steps", "3", "--out", str(out)])
        assert code == 0
        table = pd.read_csv(out).pivot(index="m", columns="coupling_scale", values="e")
        assert (table[1.0] > table[2.0]).all()
        assert (table[2.0] > table[3.0]).all()

    def test_byte_identical_output(self, tmp_path):
        """Two identical runs give identical bytes"""
        config = write_config(tmp_path, exponential_config())
        outputs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            cli.main(["sweep-mass", "--config", config, "--m-min", "1", "--m-max", "3", "--steps", "3", "--out", str(out)])
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]
        assert b"\r\n" not in outputs[0]

    def test_bad_range(self, tmp_path):
        """m_min >= m_max is invalid"""
        config = write_config(tmp_path, exponential_config())
        assert cli.main(["sweep-mass", "--config", config, "--m-min", "2", "--m-max", "1"]) == 3

    def test_failed_points_leave_empty_cells(self, tmp_path, capsys):
        """A nonrelativistic problem cannot run at m = 0; that cell stays empty"""
        data = exponential_config()
        data["kinetic"]["form"] = "nonrelativistic"
        config = write_config(tmp_path, data)
        code = cli.main(["sweep-mass", "--config", config, "--m-min", "0", "--m-max", "1", "--steps", "2"])
        assert code != 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[1].endswith(",,")

    def test_coupling_curve(self, tmp_path, capsys):
        """One row per energy, 1/v increasing towards threshold"""
        config = write_config(tmp_path, exponential_config())
        assert cli.main(["coupling-curve", "--config", config, "--e-min", "-3", "--e-max", "0.5", "--steps", "5"]) == 0
        table = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert len(table) == 5
        assert table["reciprocal_coupling"].is_monotonic_increasing

    def test_coupling_curve_above_threshold(self, tmp_path):
        """Energies at or above m are rejected"""
        config = write_config(tmp_path, exponential_config())
        assert cli.main(["coupling-curve", "--config", config, "--e-min", "-1", "--e-max", "1.0"]) == 3


class TestBoundsCommands:
    """Test nboson and critical"""

    def test_nboson_table(self, tmp_path):
        """Every row is ordered; the u = 1 row carries the reference values"""
        out = tmp_path / "bounds.csv"
        code = cli.main(["nboson", "--u-min", "1", "--u-max", "2", "--steps", "3",
                         "--lambda", "0.5", "--lambda", "1", "--out", str(out)])
        assert code == 0
        table = pd.read_csv(out)
        assert (table["lower_pp"] <= table["upper_pp_0.5"]).all()
        assert (table["lower_pp"] <= table["upper_pp_1"]).all()
        row = table[table["u"] == 1.0].iloc[0]
        assert row["lower_pp"] == pytest.approx(-1.28422, abs=2e-4)
        assert row["upper_pp_0.5"] == pytest.approx(-1.28255, abs=2e-4)

    def test_particles_flag(self, tmp_path, capsys):
        """--particles adds lambda = (N-1)/N"""
        assert cli.main(["nboson", "--u-min", "1", "--u-max", "2", "--steps", "2", "--particles", "4"]) == 0
        header = capsys.readouterr().out.splitlines()[0]
        assert "upper_pp_0.75" in header

    def test_pair_coupling_sweep(self, tmp_path):
        """--v-min/--v-max with --particles sweeps u = (N - 1) v"""
        out = tmp_path / "pairs.csv"
        code = cli.main(["nboson", "--v-min", "0.5", "--v-max", "1", "--steps", "2",
                         "--particles", "3", "--out", str(out)])
        assert code == 0
        table = pd.read_csv(out)
        assert list(table.columns[:2]) == ["v", "u"]
        assert table["u"].tolist() == [1.0, 2.0]
        assert table.loc[0, "lower_pp"] == pytest.approx(-1.28422, abs=2e-4)

    def test_pair_coupling_needs_particles(self):
        """A v sweep without N is an invalid config"""
        assert cli.main(["nboson", "--v-min", "0.5", "--v-max", "1"]) == 3

    def test_critical(self, tmp_path):
        """critical reports u_c and, for a single-term config, v_c"""
        out = tmp_path / "critical.json"
        code = cli.main(["critical", "--config", str(CONFIGS / "gauss_3d.json"), "--out", str(out)])
        assert code == 0
        report = load_report(out.read_text(encoding="utf-8"))
        assert report["u_c"] == pytest.approx(0.527485, abs=5e-5)
        assert report["v_c"] == pytest.approx(0.0408, abs=1e-4)
        assert report["threshold_diverges"] is False


class TestOracleCommand:
    """Test the discretization cross-check"""

    def test_report_fields(self, tmp_path):
        """The oracle report re-parses and agrees with the solver"""
        out = tmp_path / "oracle.json"
        code = cli.main(["oracle", "--config", str(CONFIGS / "gauss_3d.json"), "--out", str(out)])
        assert code == 0
        report = load_report(out.read_text(encoding="utf-8"))
        assert report["hermitian"] is True
        assert report["deviation"] <= 1e-4 * max(1.0, abs(report["solver_energy"]))

    def test_free_problem(self, tmp_path):
        """v = 0 gives the threshold and no solver energy"""
        out = tmp_path / "free.json"
        config = write_config(tmp_path, exponential_config(v=0.0))
        assert cli.main(["oracle", "--config", config, "--grid", "200", "--out", str(out)]) == 0
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["extrapolated"] == pytest.approx(1.0, abs=1e-3)
        assert report["solver_energy"] is None

    def test_adjudication(self, tmp_path):
        """The oracle follows the couplings as written; the printed value needs them halved"""
        out = tmp_path / "two_term_oracle.json"
        code = cli.main(["oracle", "--config", str(CONFIGS / "two_term_1d.json"), "--out", str(out)])
        assert code == 0
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["oracle_agrees_with_solver"]
        assert report["matching_variant"] == "halved"


if __name__ == "__main__":
    pytest.main([__file__, "-v", "--tb=short"])
