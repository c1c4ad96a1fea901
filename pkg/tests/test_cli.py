import json
import subprocess
import sys

import pytest

from emdtest.cli import EXIT_IO, EXIT_PARAM, EXIT_PARSE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestSubcommands:
    def test_test(self, capsys):
        code, out, _ = run(capsys, "test", "--gen", "hard-pair", "--eps", "0.1", "--param", "gap=0.2",
                           "--trials", "2", "--c-mult", "16")
        assert code == 0
        rep = json.loads(out)
        assert rep["aggregate"]["trials"] == 2 and rep["config"]["c"] == 16

    def test_estimate_csv(self, capsys):
        code, out, _ = run(capsys, "estimate", "--gen", "hard-pair", "--eps", "0.3", "--trials", "3",
                           "--format", "csv")
        assert code == 0 and out.splitlines()[0].startswith("trial,seed")

    def test_test_known(self, capsys):
        code, out, _ = run(capsys, "test-known", "--gen", "point-mass", "--dim", "2", "--eps", "0.5")
        assert code == 0 and json.loads(out)["budget"]["q"] == 0

    def test_cluster_unknown(self, capsys):
        code, out, _ = run(capsys, "test-cluster", "--gen", "clustered", "--dim", "2", "--eps", "0.25",
                           "--unknown-centers", "--k", "4")
        assert code == 0 and json.loads(out)["config"]["cluster"] == "unknown"

    def test_cluster_centers_file(self, capsys, tmp_path):
        (tmp_path / "c.json").write_text(json.dumps([[0.0, 0.0], [1.0, 1.0]]))
        code, out, _ = run(capsys, "test-cluster", "--gen", "random", "--dim", "2", "--eps", "0.5",
                           "--centers", str(tmp_path / "c.json"))
        assert code == 0 and json.loads(out)["instance"]["centers"] == [[0.0, 0.0], [1.0, 1.0]]

    def test_tree(self, capsys):
        code, out, _ = run(capsys, "tree-emd", "--gen", "hard-line", "--eps", "0.2", "--param", "n=4")
        assert code == 0 and json.loads(out)["oracle"]["emd_exact"] == pytest.approx(0.2)

    def test_gen_then_in(self, capsys, tmp_path):
        path = tmp_path / "inst.json"
        assert run(capsys, "gen", "--gen", "hard-pair", "--eps", "0.2", "--out", str(path))[0] == 0
        assert json.loads(path.read_text())["oracle"]["emd_exact"] == pytest.approx(0.2)
        code, out, _ = run(capsys, "test", "--in", str(path), "--eps", "0.1")
        assert code == 0 and json.loads(out)["oracle"]["emd_exact"] == pytest.approx(0.2)

    def test_bench(self, capsys):
        code, out, _ = run(capsys, "bench", "--gen", "point-mass", "--trials", "2", "--format", "csv")
        lines = out.splitlines()
        assert code == 0 and len(lines) == 4 and lines[0].startswith("c,")

    def test_config_file_with_override(self, capsys, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"generator": "point-mass", "trials": 5, "eps": 0.5}))
        code, out, _ = run(capsys, "test", "--config", str(path), "--trials", "2")
        rep = json.loads(out)
        assert code == 0 and rep["config"]["trials"] == 2 and rep["config"]["eps"] == 0.5

    def test_out_file_matches_stdout(self, capsys, tmp_path):
        path = tmp_path / "r.json"
        _, out, _ = run(capsys, "test", "--gen", "point-mass", "--trials", "3")
        run(capsys, "test", "--gen", "point-mass", "--trials", "3", "--out", str(path))
        assert path.read_text() == out


class TestExitCodes:
    def test_param_error(self, capsys):
        code, _, err = run(capsys, "test", "--gen", "point-mass", "--eps", "-1")
        assert code == EXIT_PARAM == 2 and "parameter" in err

    def test_io_error(self, capsys):
        assert run(capsys, "test", "--in", "/nonexistent.json")[0] == EXIT_IO == 3

    def test_parse_error(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{")
        assert run(capsys, "test", "--in", str(path))[0] == EXIT_PARSE == 4

    def test_bad_distribution_data(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"p": {"d": 1, "delta": 1, "points": [{"coords": [2], "w": 1}]},
                                    "q": {"d": 1, "delta": 1, "points": [{"coords": [0], "w": 1}]}}))
        assert run(capsys, "test", "--in", str(path))[0] == EXIT_PARSE

    def test_argparse_usage(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "emdtest", "test", "--gen", "point-mass"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and json.loads(res.stdout)["aggregate"]["accepts"] == 1
