import math

import pytest

from relangle.cli import OUTPUT_DIR_ENV, RunConfig, main
from relangle.su2 import half
from relangle.states import GenericState, state_to_text


def read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


class TestRunConfig:
    def test_validates_grid_step(self):
        with pytest.raises(ValueError):
            RunConfig(command="fidelity-sweep", j2=half("1/2"), a_grid_step=0.6)

    def test_validates_mu_grid(self):
        with pytest.raises(ValueError):
            RunConfig(command="certify", j2=half("1/2"), mu_grid=50)

    def test_validates_samples(self):
        with pytest.raises(ValueError):
            RunConfig(command="montecarlo", j2=half("1/2"), samples=0)


class TestFidelitySweep:
    def test_row_count_and_peak(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(["fidelity-sweep", "--j2", "1/2", "--a-grid-step", "0.01",
                     "--output", str(out)])
        assert code == 0
        header, rows = read_csv(out)
        assert header == ["a", "F", "nu", "certificate_min_eig"]
        assert len(rows) == 101
        best = max(rows, key=lambda r: float(r[1]))
        assert abs(float(best[0]) - 0.609) < 0.01
        assert all(float(r[3]) >= -1e-9 for r in rows)

    def test_deterministic_output(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        for out in (a, b):
            assert main(["fidelity-sweep", "--j2", "1/2", "--a-grid-step", "0.05",
                         "--output", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestOptimize:
    def test_summary(self, capsys):
        assert main(["optimize", "--j2", "1/2"]) == 0
        out = capsys.readouterr().out
        assert "a_star=0.609" in out
        assert "F=0.9109" in out


class TestClassicalLimit:
    def test_schema(self, tmp_path):
        out = tmp_path / "cl.csv"
        assert main(["classical-limit", "--state", "parallel",
                     "--output", str(out)]) == 0
        header, rows = read_csv(out)
        assert header == ["j2", "deviation_max", "F_quantum", "F_classical"]
        devs = [float(r[1]) for r in rows]
        assert devs == sorted(devs, reverse=True)
        last = rows[-1]
        assert last[0] == "100"
        assert float(last[1]) <= 1e-2
        assert abs(float(last[2]) - float(last[3])) <= 1e-3


class TestCertify:
    def test_pass(self, capsys):
        assert main(["certify", "--j2", "1/2", "--state", "parallel",
                     "--mu-grid", "1001"]) == 0
        assert "[pass]" in capsys.readouterr().out

    def test_state_file(self, tmp_path, capsys):
        f = tmp_path / "state.txt"
        f.write_text(state_to_text(GenericState.two_term(0.7)), encoding="utf-8")
        assert main(["certify", "--j2", "3/2", "--state", str(f)]) == 0
        assert "[pass]" in capsys.readouterr().out


class TestMonteCarlo:
    def test_consistent_with_exact(self, capsys):
        assert main(["montecarlo", "--j2", "1/2", "--state", "antiparallel",
                     "--samples", "50000", "--seed", "5"]) == 0
        out = capsys.readouterr().out
        z = float(out.split("z=")[1])
        assert abs(z) < 4.0

    def test_deterministic(self, capsys):
        args = ["montecarlo", "--j2", "1/2", "--state", "parallel",
                "--samples", "2000", "--seed", "3"]
        assert main(args) == 0
        first = capsys.readouterr().out
        assert main(args) == 0
        assert capsys.readouterr().out == first


class TestErrorHandling:
    def test_invalid_j2_exits_one(self, capsys):
        assert main(["optimize", "--j2", "0"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_malformed_rational_exits_one(self, capsys):
        assert main(["optimize", "--j2", "x/2"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_bad_grid_step_exits_one(self, capsys):
        assert main(["fidelity-sweep", "--a-grid-step", "0.9"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_unsupported_block_dimension_exits_two(self, tmp_path, capsys):
        # three j1 values coupling into a 3-dim J=1 block with j2=1
        state = GenericState.from_dict(0, {0: 0.5, 1: 0.5, 2: math.sqrt(0.5)})
        f = tmp_path / "wide.txt"
        f.write_text(state_to_text(state), encoding="utf-8")
        assert main(["certify", "--j2", "1", "--state", str(f)]) == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_state_file_exits_one(self, capsys):
        assert main(["certify", "--j2", "1/2", "--state",
                     "/nonexistent/state.txt"]) == 1
        assert "error:" in capsys.readouterr().err


class TestOutputDirEnv:
    def test_env_var_sets_default_directory(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
        assert main(["fidelity-sweep", "--j2", "1/2", "--a-grid-step", "0.25"]) == 0
        produced = list(tmp_path.glob("*.csv"))
        assert len(produced) == 1
        header, rows = read_csv(produced[0])
        assert len(rows) == 5
