import json
import math

import numpy as np
import pytest

from bectension import analytic, cli


FAST_GRID = ["--half-width", "10", "--spacing", "0.05", "--grad-tol", "1e-7"]


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBounds:
    def test_csv(self, capsys):
        code, out, err = run_cli(capsys, "bounds", "--beta", "1")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "beta,lower,upper"
        beta, lower, upper = (float(tok) for tok in lines[1].split(","))
        br = analytic.sigma_bracket(1.0)
        assert (beta, lower, upper) == (1.0, br.lower, br.upper)
        assert "bracket" in err

    def test_json_roundtrip_bit_exact(self, capsys):
        code, out, _ = run_cli(capsys, "bounds", "--beta", "3.7", "--format", "json")
        assert code == 0
        doc = json.loads(out)
        br = analytic.sigma_bracket(3.7)
        assert doc["lower"] == br.lower
        assert doc["upper"] == br.upper

    def test_csv_roundtrip_bit_exact(self, capsys):
        _, out, _ = run_cli(capsys, "bounds", "--beta", "3.7")
        row = out.strip().splitlines()[1].split(",")
        br = analytic.sigma_bracket(3.7)
        assert float(row[1]) == br.lower and float(row[2]) == br.upper


class TestValidation:
    def test_zero_beta_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["sigma", "--beta", "0"])
        assert exc.value.code == 2
        assert "positive" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["bounds", "--beta", "1", "--bogus"])
        assert exc.value.code == 2

    def test_bad_beta_list(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["sweep", "--betas", "nonsense"])
        assert exc.value.code == 2

    def test_unwritable_output(self, capsys):
        code, _, err = run_cli(capsys, "bounds", "--beta", "1",
                               "--output", "/nonexistent-dir/x.csv")
        assert code == 1
        assert "i/o failure" in err


class TestBetaList:
    def test_log_expansion(self):
        vals = cli.parse_beta_list("1:100:3-log")
        assert vals == pytest.approx([1.0, 10.0, 100.0], rel=1e-12)

    def test_single_point(self):
        assert cli.parse_beta_list("2:8:1-log") == [2.0]

    def test_rejects_bad_specs(self):
        for bad in ["1:100:3", "1:100:3-lin", "0:1:3-log", "a:b:c-log"]:
            with pytest.raises(ValueError):
                cli.parse_beta_list(bad)


class TestSigmaAndProfile:
    def test_sigma_emits_schema(self, capsys):
        code, out, err = run_cli(capsys, "sigma", "--beta", "1", *FAST_GRID)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "beta,sigma,inf_v,argmin_v,lower,upper,el_res_v,el_res_phi,equip_l2,iters"
        assert len(lines) == 2
        assert "sigma(beta=1)" in err

    def test_profile_dump_format(self, capsys, tmp_path):
        dump = tmp_path / "profile.txt"
        code, _, _ = run_cli(capsys, "profile", "--beta", "1", "--dump", str(dump), *FAST_GRID)
        assert code == 0
        lines = dump.read_text().splitlines()
        assert lines[0] == "# t v phi"
        body = [line.split() for line in lines[1:]]
        assert len(body) == 401  # 2*10/0.05 + 1 nodes
        t, v, phi = np.array(body, dtype=float).T
        assert t[0] == -10.0 and t[-1] == 10.0
        assert v[0] == 1.0 and phi[0] == 0.0
        assert phi[-1] == pytest.approx(math.pi, abs=1e-15)

    def test_deterministic_output(self, capsys):
        _, out1, _ = run_cli(capsys, "sigma", "--beta", "0.5", *FAST_GRID)
        _, out2, _ = run_cli(capsys, "sigma", "--beta", "0.5", *FAST_GRID)
        assert out1 == out2


class TestSweep:
    def test_row_count_and_reports(self, capsys, monkeypatch):
        monkeypatch.setenv("BEC_THREADS", "2")
        code, out, err = run_cli(capsys, "sweep", "--betas", "0.5:2:3-log", *FAST_GRID)
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) == 4  # header + 3 rows
        assert lines[0].startswith("beta,sigma,inf_v,")
        assert "sweep: 3 rows" in err

    def test_empty_table_header_only(self):
        import io
        from contextlib import redirect_stdout
        from bectension import asymptotics

        buf = io.StringIO()
        with redirect_stdout(buf):
            cli.emit([], "csv", None, columns=asymptotics.SWEEP_COLUMNS)
        assert buf.getvalue() == ",".join(asymptotics.SWEEP_COLUMNS) + "\n"


class TestTf:
    def test_dimension_three_report(self, capsys):
        code, out, _ = run_cli(capsys, "tf", "--dim", "3", "--format", "json")
        assert code == 0
        doc = json.loads(out)
        assert doc["broken"] is True
        assert doc["ratio"] == pytest.approx(1.86, abs=0.02)
        assert doc["concavity_pass"] is True

    def test_alpha_validation(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["tf", "--dim", "1", "--alpha", "1.5"])
        assert exc.value.code == 2


class TestGamma:
    def test_table(self, capsys):
        code, out, err = run_cli(capsys, "gamma", "--beta", "1",
                                 "--eps-list", "0.08,0.05")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "eps,beta,scaled_energy,limit_energy,gap,mass_res_1,mass_res_2"
        assert len(lines) == 3
        gaps = [abs(float(line.split(",")[4])) for line in lines[1:]]
        assert gaps[1] < gaps[0]


class TestConfigFile:
    def test_file_provides_defaults(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("beta = 2.0\nformat = json\n")
        code, out, _ = run_cli(capsys, "--config", str(cfg), "bounds")
        assert code == 0
        doc = json.loads(out)
        assert doc["beta"] == 2.0

    def test_flags_override_file(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("beta = 2.0\n")
        code, out, _ = run_cli(capsys, "--config", str(cfg), "bounds", "--beta", "5")
        assert code == 0
        assert out.splitlines()[1].startswith("5,")

    def test_missing_file(self, capsys):
        code, _, err = run_cli(capsys, "--config", "/no/such/file", "bounds", "--beta", "1")
        assert code == 2
        assert "error" in err
