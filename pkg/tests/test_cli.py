import json
import subprocess
import sys

import pytest

from qwb.cli import main
from qwb.sudoku import FIG1_BOARD, format_board, parse_board, restrict_board

SOLVED_TEXT = "1234\n3412\n2143\n4321\n"
UNSOLVABLE_TEXT = ".214\n34.2\n2143\n4321\n"


@pytest.fixture()
def k2_board(tmp_path):
    board = restrict_board(parse_board(FIG1_BOARD), 2)
    p = tmp_path / "k2.board"
    p.write_text(format_board(board))
    return str(p)


def run_main(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    text, _, js = out.partition("{")
    report = json.loads("{" + js) if js else None
    return code, text, report


def test_solve_k2(capsys, k2_board):
    code, text, report = run_main(
        capsys, ["solve", k2_board, "--precision", "3", "--shots", "10000",
                 "--seed", "7", "--subspace-opt"])
    assert code == 0
    assert text.startswith(SOLVED_TEXT)
    assert report["outcome"]["assignments"] == {"0,1": 2, "0,3": 4}
    for v in report["metrics"].values():
        assert v > 0


def test_solve_already_solved(capsys, tmp_path):
    p = tmp_path / "solved.board"
    p.write_text(SOLVED_TEXT)
    code, text, report = run_main(capsys, ["solve", str(p)])
    assert code == 0
    assert text.startswith(SOLVED_TEXT)
    assert report["outcome"]["quantum_steps"] == 0


def test_solve_parse_error_exit_1(capsys, tmp_path):
    p = tmp_path / "bad.board"
    p.write_text("11..\n....\n....\n....\n")
    assert main(["solve", str(p)]) == 1


def test_solve_resource_error_exit_3(capsys, k2_board):
    assert main(["solve", k2_board, "--max-support", "4", "--seed", "0"]) == 3


def test_detect_solvable_and_unsolvable(capsys, tmp_path, k2_board):
    code, text, report = run_main(capsys, ["detect", k2_board, "--seed", "1"])
    assert code == 0 and text.startswith("marked node exists")

    p = tmp_path / "unsat.board"
    p.write_text(UNSOLVABLE_TEXT)
    code, text, report = run_main(capsys, ["detect", str(p), "--seed", "1"])
    assert code == 2 and text.startswith("no marked node")
    assert report["outcome"]["marked"] is False


def test_solve_unsolvable_exit_2(capsys, tmp_path):
    p = tmp_path / "unsat.board"
    p.write_text(UNSOLVABLE_TEXT)
    code, _, report = run_main(capsys, ["solve", str(p), "--seed", "0",
                                        "--shots", "2000", "--subspace-opt"])
    assert code == 2
    assert report["outcome"]["solution"] is None


def test_detect_k_arithmetic(capsys, k2_board):
    code, _, report = run_main(
        capsys, ["detect", k2_board, "--delta", "0.5", "--gamma", "1", "--seed", "0"])
    assert report["outcome"]["repetitions"] == 1


def test_bench_row_and_reference(capsys, tmp_path):
    p = tmp_path / "fig1.board"
    p.write_text(FIG1_BOARD)
    code, text, report = run_main(capsys, ["bench", str(p), "--missing", "1"])
    assert code == 0
    assert report["outcome"]["paper_reference_k1"]["qubit_count"] == 15
    assert report["outcome"]["row"]["qubit_count"] >= 8


def test_bench_k0_usage_error(tmp_path):
    p = tmp_path / "fig1.board"
    p.write_text(FIG1_BOARD)
    assert main(["bench", str(p), "--missing", "0"]) == 1


def test_viz_demo_tree(capsys, tmp_path):
    out = str(tmp_path / "demo")
    code, text, report = run_main(
        capsys, ["viz", "--demo-tree", "3", "--steps", "2", "--out", out])
    assert code == 0
    step0 = open(out + "_step0.dot").read()
    assert step0.count("palegreen") == 1 and "plum" not in step0
    step2 = open(out + "_step2.dot").read()
    assert '"[0]"' in step2
    assert '"[0,0]"' not in step2      # rejected subtree unexplored
    assert '"[1,0]"' in step2


def test_report_reproducible_excluding_timings(capsys, k2_board):
    def run():
        code, _, report = run_main(
            capsys, ["solve", k2_board, "--seed", "9", "--subspace-opt"])
        report.pop("timings")
        return json.dumps(report, sort_keys=True)

    assert run() == run()


def test_env_seed_fallback(capsys, k2_board, monkeypatch):
    monkeypatch.setenv("QWB_SEED", "13")
    _, _, report = run_main(capsys, ["detect", k2_board])
    assert report["config"]["seed"] == 13


def test_console_entry_point(tmp_path):
    p = tmp_path / "solved.board"
    p.write_text(SOLVED_TEXT)
    proc = subprocess.run([sys.executable, "-m", "qwb.cli", "solve", str(p)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith(SOLVED_TEXT)
