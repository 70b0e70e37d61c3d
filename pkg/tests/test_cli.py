"""Tests for the command line and the CCL run log."""

import json

import pytest

from lozvol import config
from lozvol.ccl_log import close_logger, get_logger, init_logger, suppressed
from lozvol.main import EXIT_ERROR, EXIT_FAIL, EXIT_PASS, build_parser, main


def run_cli(argv) -> int:
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    return excinfo.value.code


@pytest.fixture
def instance_file(write_json, l1_instance):
    return write_json("instance.json", l1_instance)


@pytest.fixture
def quotient_instance(write_json, l1_instance):
    l1_instance["quotient"] = [[1, 0, 0], [0, 1, 1]]
    return write_json("quotient.json", l1_instance)


class TestCommands:
    """Subcommands and their exit codes."""

    def test_lozanovskii(self, write_json, tmp_path):
        norm = write_json("norm.json", {"kind": "lp", "p": 1, "weights": [1, 1, 1]})
        out = tmp_path / "weights.json"
        assert run_cli(["lozanovskii", "--norm", str(norm), "--tol", "1e-9", "--out", str(out)]) == EXIT_PASS
        assert json.loads(out.read_text(encoding="utf-8"))["weights"] == pytest.approx([1 / 3] * 3)

    def test_lozanovskii_ascent_method(self, write_json, tmp_path):
        norm = write_json("norm.json", {"kind": "lp", "p": 1, "weights": [1, 2, 4]})
        out = tmp_path / "weights.json"
        argv = ["lozanovskii", "--norm", str(norm), "--method", "ascent", "--tol", "1e-6", "--out", str(out)]
        assert run_cli(argv) == EXIT_PASS
        cert = json.loads(out.read_text(encoding="utf-8"))
        assert cert["stop_reason"] == "kkt"
        assert cert["weights"] == pytest.approx([1 / 3, 1 / 6, 1 / 12], rel=1e-4)

    def test_enclose(self, write_json, tmp_path):
        norm = write_json("norm.json", {"kind": "lp", "p": "inf", "weights": [1, 2, 1, 1]})
        subspace = write_json("sub.json", {"subspace": [[1, 1, 0, 0], [0, 0, 1, -1]]})
        out = tmp_path / "enclosing.json"
        assert run_cli(["enclose", "--norm", str(norm), "--subspace", str(subspace), "--out", str(out)]) == EXIT_PASS
        result = json.loads(out.read_text(encoding="utf-8"))
        assert len(result["vertices"]) == 2
        assert result["ratio"] <= result["bound"]

    def test_enclose_rejects_wrong_row_length(self, write_json):
        norm = write_json("norm.json", {"kind": "lp", "p": 1, "weights": [1, 1, 1]})
        subspace = write_json("sub.json", {"subspace": [[1, 0]]})
        assert run_cli(["enclose", "--norm", str(norm), "--subspace", str(subspace)]) == EXIT_ERROR

    def test_volume(self, write_json, tmp_path):
        body = write_json("body.json", {"vrep": [[1, 1], [1, -1], [-1, 1], [-1, -1]]})
        out = tmp_path / "volume.json"
        assert run_cli(["volume", "--body", str(body), "--out", str(out)]) == EXIT_PASS
        assert json.loads(out.read_text(encoding="utf-8"))["value"] == pytest.approx(4.0)

    def test_isotropy(self, write_json, tmp_path):
        body = write_json("body.json", {"norm": {"kind": "lp", "p": "inf", "weights": [1, 1, 1]}})
        out = tmp_path / "iso.json"
        assert run_cli(["isotropy", "--body", str(body), "--out", str(out)]) == EXIT_PASS
        assert json.loads(out.read_text(encoding="utf-8"))["L_K"] == pytest.approx(12 ** -0.5)

    @pytest.mark.parametrize("theorem", ["2", "3", "lemma3"])
    def test_verify(self, instance_file, theorem):
        assert run_cli(["verify", "--theorem", theorem, "--instance", str(instance_file)]) == EXIT_PASS

    def test_verify_theorem4_with_tiny_constant_fails(self, quotient_instance):
        argv = ["verify", "--theorem", "4", "--instance", str(quotient_instance), "--constant", "1e-6"]
        assert run_cli(argv) == EXIT_FAIL

    def test_verify_theorem4_needs_quotient(self, instance_file):
        assert run_cli(["verify", "--theorem", "4", "--instance", str(instance_file)]) == EXIT_ERROR

    def test_invalid_instance(self, write_json, l1_instance):
        l1_instance["dim"] = 5
        path = write_json("bad.json", l1_instance)
        assert run_cli(["run", "--instance", str(path)]) == EXIT_ERROR

    def test_run_with_stages(self, instance_file, tmp_path):
        out = tmp_path / "report.json"
        argv = ["run", "--instance", str(instance_file), "--stages", "lozanovskii,enclose", "--out", str(out)]
        assert run_cli(argv) == EXIT_PASS
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["stages"] == ["lozanovskii", "enclose"]

    def test_unknown_stage(self, instance_file):
        with pytest.raises(SystemExit) as excinfo:
            build_parser().parse_args(["run", "--instance", str(instance_file), "--stages", "theorem9"])
        assert excinfo.value.code == 2

    def test_suite(self, tmp_path, monkeypatch):
        monkeypatch.setenv("LOZVOL_THREADS", "2")
        csv_path = tmp_path / "suite.csv"
        argv = ["suite", "--n-min", "2", "--n-max", "3", "--k-min", "1", "--k-max", "2", "--count", "2",
                "--stages", "lozanovskii,enclose", "--no-quotients", "--csv", str(csv_path)]
        assert run_cli(argv) in (EXIT_PASS, EXIT_FAIL)
        assert config.get_threads() == 2
        assert len(csv_path.read_text(encoding="utf-8").splitlines()) == 3

    def test_bad_thread_count(self, instance_file, monkeypatch):
        monkeypatch.setenv("LOZVOL_THREADS", "many")
        with pytest.raises(ValueError):
            main(["run", "--instance", str(instance_file)])


class TestRunLog:
    """The structured CCL log."""

    def test_log_file(self, instance_file, tmp_path, mocker):
        mocker.patch("lozvol.main.setup_safe_logging")
        log_file = tmp_path / "run.ccl"
        try:
            code = run_cli(["run", "--instance", str(instance_file), "--stages", "lozanovskii",
                            "--log-file", str(log_file)])
        finally:
            close_logger()
        assert code == EXIT_PASS
        text = log_file.read_text(encoding="utf-8")
        assert "command = run" in text
        assert "run =" in text
        assert "lemma1" in text

    def test_suppressed_in_thread(self, tmp_path):
        init_logger(tmp_path / "x.ccl")
        try:
            with suppressed():
                get_logger().write_kv("hidden", "1")
            get_logger().write_kv("shown", "1")
        finally:
            close_logger()
        text = (tmp_path / "x.ccl").read_text(encoding="utf-8")
        assert "shown = 1" in text
        assert "hidden" not in text

    def test_sections_lists_and_repeated_values(self, tmp_path):
        ccl = init_logger(tmp_path / "y.ccl")
        try:
            with ccl.section("suite"):
                ccl.write_kv("ratio", 1.5)
                with ccl.items() as next_item:
                    ccl.write_kv("trace", "a\nb")
                    next_item()
                    ccl.write_kv("trace", "a\nb")
        finally:
            close_logger()
        lines = (tmp_path / "y.ccl").read_text(encoding="utf-8").splitlines()
        assert lines[1:] == [
            "suite =",
            "  ratio = 1.5",
            "  = 0 =",
            "    trace = ",
            "      a",
            "      b",
            "  = 1 =",
            "    trace = @suite/0/trace",
        ]

    def test_disabled_without_file(self):
        assert not get_logger().enabled
        with get_logger().section("run", timed=True) as ccl:
            ccl.write_kv("n", 3)
