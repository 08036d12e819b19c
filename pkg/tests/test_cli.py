import json

from entflow.cli import main
from entflow.specfile import parse


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestValidate:
    def test_bundled_file_ok(self, capsys, teleport_file):
        code, out, _ = run_cli(capsys, "validate", str(teleport_file))
        assert code == 0
        assert "ok" in out

    def test_missing_file_is_usage_error(self, capsys):
        code, _, err = run_cli(capsys, "validate", "/nope/missing.espec")
        assert code == 2
        assert "error" in err

    def test_malformed_record_reports_line(self, capsys, tmp_path):
        bad = tmp_path / "bad.espec"
        bad.write_text("espec 1\ntrack 1 dim=2\nproj name=p time=1\n")
        code, out, _ = run_cli(capsys, "validate", str(bad))
        assert code == 1
        assert ":3:" in out

    def test_semantic_problem_reports_line(self, capsys, tmp_path):
        bad = tmp_path / "bad.espec"
        bad.write_text(
            "espec 1\ntrack 1 dim=2\ntrack 2 dim=2\n"
            "proj name=p time=1 dom=1 cod=2 matrix=[[1,0],[0,1]]\n"
            "input tracks=1 state=[1,0]\n"
            "path name=main start=input:1 steps=p:cod end=2\n"
        )
        code, out, _ = run_cli(capsys, "validate", str(bad))
        assert code == 1
        assert "main" in out


class TestPredict:
    def test_teleport_composite_is_identity(self, capsys, teleport_file):
        code, out, _ = run_cli(capsys, "predict", str(teleport_file),
                               "--path", "main")
        assert code == 0
        assert "linearity: linear" in out
        assert out.count("1") >= 2

    def test_swap_composite_is_identity_function(self, capsys, swap_file):
        code, out, _ = run_cli(capsys, "predict", str(swap_file),
                               "--path", "main")
        assert code == 0
        assert "linearity: antilinear" in out

    def test_dropped_event_path_fails(self, capsys, tmp_path, teleport_file):
        text = teleport_file.read_text().replace("steps=m,pair", "steps=pair")
        broken = tmp_path / "broken.espec"
        broken.write_text(text)
        code, _, err = run_cli(capsys, "predict", str(broken), "--path", "main")
        assert code == 1
        assert err

    def test_unknown_path_is_usage_error(self, capsys, teleport_file):
        code, _, err = run_cli(capsys, "predict", str(teleport_file),
                               "--path", "nope")
        assert code == 2


class TestVerify:
    def test_bundled_example_network(self, capsys, example_network_file):
        code, out, _ = run_cli(capsys, "verify", str(example_network_file),
                               "--path", "main", "--trials", "50",
                               "--seed", "7")
        assert code == 0
        assert "summary: passed=50 failed=0 zero=0" in out

    def test_zero_tolerance_fails(self, capsys, teleport_file):
        code, out, _ = run_cli(capsys, "verify", str(teleport_file),
                               "--path", "main", "--trials", "5",
                               "--seed", "1", "--tol", "0")
        assert code == 1
        assert "FAIL" in out

    def test_fixed_seed_reproduces_bytes(self, capsys, example_network_file):
        args = ("verify", str(example_network_file), "--path", "main",
                "--trials", "10", "--seed", "3")
        _, first, _ = run_cli(capsys, *args)
        _, second, _ = run_cli(capsys, *args)
        assert first == second

    def test_json_report(self, capsys, teleport_file):
        code, out, _ = run_cli(capsys, "verify", str(teleport_file),
                               "--path", "main", "--trials", "3",
                               "--seed", "2", "--json")
        assert code == 0
        payload = json.loads(out)
        assert payload["result"] == "PASS"
        assert payload["seed"] == 2
        assert len(payload["trials"]) == 3

    def test_report_dir_writes_csv_and_figures(self, capsys, tmp_path,
                                               teleport_file):
        report = tmp_path / "report"
        code, _, err = run_cli(capsys, "verify", str(teleport_file),
                               "--path", "main", "--trials", "4",
                               "--seed", "2", "--report-dir", str(report))
        assert code == 0
        assert (report / "report.txt").exists()
        csv_text = (report / "trials.csv").read_text().strip().splitlines()
        assert csv_text[0].startswith("trial,")
        assert len(csv_text) == 5
        assert (report / "deviations.png").stat().st_size > 0
        assert (report / "outcomes.png").stat().st_size > 0

    def test_seed_env_default(self, capsys, teleport_file, monkeypatch):
        monkeypatch.setenv("ESPEC_SEED", "123")
        code, out, _ = run_cli(capsys, "verify", str(teleport_file),
                               "--path", "main", "--trials", "2")
        assert code == 0
        assert "seed: 123" in out


class TestCompile:
    def test_teleport_compiles_with_corrections(self, capsys, teleport_file):
        code, out, _ = run_cli(capsys, "compile", str(teleport_file),
                               "--path", "main", "--seed", "5",
                               "--trials", "4")
        assert code == 0
        assert "branches: 4" in out
        assert out.count("correction") == 4
        assert "result: PASS" in out

    def test_named_target_accepted(self, capsys, teleport_file):
        code, out, _ = run_cli(capsys, "compile", str(teleport_file),
                               "--path", "main", "--target", "id",
                               "--trials", "2", "--seed", "5")
        assert code == 0

    def test_wrong_target_rejected(self, capsys, teleport_file):
        code, _, err = run_cli(capsys, "compile", str(teleport_file),
                               "--path", "main", "--target", "pi",
                               "--trials", "2", "--seed", "5")
        assert code == 1
        assert "target" in err

    def test_output_file_round_trips(self, capsys, tmp_path, teleport_file):
        out_file = tmp_path / "compiled.espec"
        code, _, err = run_cli(capsys, "compile", str(teleport_file),
                               "--path", "main", "--trials", "2",
                               "--seed", "5", "-o", str(out_file))
        assert code == 0
        result = parse(out_file.read_text())
        assert result.ok, result.diagnostics
        assert len(result.document.corrections) == 4
        assert result.document.protocol is not None


class TestDemo:
    def test_teleport(self, capsys):
        code, out, _ = run_cli(capsys, "demo", "teleport", "--trials", "5",
                               "--seed", "0")
        assert code == 0
        assert "branches: 4" in out
        assert "result: PASS" in out

    def test_teleport_two_stage(self, capsys):
        code, out, _ = run_cli(capsys, "demo", "teleport", "--two-stage",
                               "--trials", "4", "--seed", "0")
        assert code == 0
        assert "branches: 4" in out

    def test_gateteleport_cnot(self, capsys):
        code, out, _ = run_cli(capsys, "demo", "gateteleport", "--gate", "cnot",
                               "--trials", "2", "--seed", "0")
        assert code == 0
        assert "branches: 16" in out
        assert "result: PASS" in out

    def test_swap(self, capsys):
        code, out, _ = run_cli(capsys, "demo", "swap", "--trials", "5",
                               "--seed", "0")
        assert code == 0
        assert "result: PASS" in out

    def test_parallel(self, capsys):
        code, out, _ = run_cli(capsys, "demo", "parallel", "-m", "3",
                               "--trials", "1", "--seed", "4")
        assert code == 0
        assert "branches: 64" in out
        assert "result: PASS" in out

    def test_demo_output_file(self, capsys, tmp_path):
        out_file = tmp_path / "tele.espec"
        code, _, _ = run_cli(capsys, "demo", "teleport", "--trials", "1",
                             "--seed", "0", "-o", str(out_file))
        assert code == 0
        result = parse(out_file.read_text())
        assert result.ok
        assert len(result.document.corrections) == 4


def test_usage_error_exit_code(capsys):
    assert main(["predict"]) == 2


def test_version_flag(capsys):
    assert main(["--version"]) == 0
