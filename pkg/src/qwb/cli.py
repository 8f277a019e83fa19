"""Command-line surface: solve boards end to end, run detection, benchmark
circuit resources, and emit tree visualizations.

Every command prints a single JSON run report to stdout (the solved grid is
also printed as plain text).  Exit codes: 0 solution found / marked, 2 no
solution / not marked, 1 usage or parse error, 3 simulator capacity.
Reports are byte-identical for identical seeds and flags apart from the
"timings" object.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .circuit import UsageError
from .sim import ResourceLimitError, SparseState, apply
from .sudoku import (ParseError, board_with_path, format_board, parse_board,
                     restrict_board, tree_for_board)
from .transpile import metrics, transpile
from .walk import (SearchStats, WalkConfig, decode_tree_state, demo_tree,
                   detect_marked, find_solution, to_dot)

PAPER_REFERENCE_K1 = {"qubit_count": 15, "u3_count": 1434, "cx_count": 1157,
                      "depth": 1396}


def _seed_from(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("QWB_SEED", "0"))


def _report(command: str, config: dict, outcome: dict, timings: dict,
            circuit_metrics=None) -> dict:
    report = {
        "command": command,
        "config": config,
        "outcome": outcome,
        "timings": {k: round(v, 6) for k, v in timings.items()},
    }
    if circuit_metrics is not None:
        report["metrics"] = circuit_metrics.as_dict()
    return report


def _emit(report: dict) -> None:
    print(json.dumps(report, indent=2, sort_keys=True))


def cmd_solve(args) -> int:
    seed = _seed_from(args)
    board = parse_board(open(args.board).read())
    config = WalkConfig(precision_bits=args.precision, shots=args.shots)
    timings = {}

    if board.is_complete():
        print(format_board(board), end="")
        _emit(_report("solve", {"precision": args.precision, "shots": args.shots,
                                "seed": seed, "subspace_opt": args.subspace_opt},
                      {"solution": format_board(board), "assignments": {},
                       "quantum_steps": 0}, timings))
        return 0

    t0 = time.perf_counter()
    tree, plan = tree_for_board(board, subspace_optimization=args.subspace_opt)
    timings["build"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    stats = SearchStats()
    path = find_solution(tree, config, seed=seed,
                         max_support=args.max_support, stats=stats)
    timings["search"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    bench = tree.new_circuit()
    tree.init_node(bench, ())
    tree.estimate_phase(bench, args.precision)
    m = metrics(transpile(bench))
    timings["metrics"] = time.perf_counter() - t0

    config_echo = {"precision": args.precision, "shots": args.shots,
                   "seed": seed, "subspace_opt": args.subspace_opt}
    if path is None:
        _emit(_report("solve", config_echo,
                      {"solution": None, "qpe_runs": stats.qpe_runs,
                       "max_support": stats.max_support}, timings, m))
        return 2
    solved = board_with_path(board, path)
    assignments = {f"{r},{c}": v + 1
                   for (r, c), v in zip(board.empty_cells(), path)}
    print(format_board(solved), end="")
    _emit(_report("solve", config_echo,
                  {"solution": format_board(solved), "assignments": assignments,
                   "path": list(path), "qpe_runs": stats.qpe_runs,
                   "max_support": stats.max_support}, timings, m))
    return 0


def cmd_detect(args) -> int:
    seed = _seed_from(args)
    board = parse_board(open(args.board).read())
    config = WalkConfig(delta=args.delta, beta_const=args.beta,
                        gamma_const=args.gamma)
    t0 = time.perf_counter()
    tree, _ = tree_for_board(board, subspace_optimization=args.subspace_opt)
    result = detect_marked(tree, config, seed=seed, max_support=args.max_support)
    timings = {"detect": time.perf_counter() - t0}
    print("marked node exists" if result.marked else "no marked node")
    _emit(_report("detect",
                  {"delta": args.delta, "beta": args.beta, "gamma": args.gamma,
                   "seed": seed, "subspace_opt": args.subspace_opt},
                  {"marked": result.marked,
                   "accept_number": result.accept_number,
                   "repetitions": result.repetitions,
                   "precision_bits": result.precision_bits}, timings))
    return 0 if result.marked else 2


def bench_row(board, k: int, precision: int, subspace_opt: bool = False):
    """Metrics of the phase-estimation circuit for the instance restricted to
    its first k empty cells (circuit construction only, no simulation)."""
    if k < 1:
        raise UsageError("--missing must be >= 1")
    empties = board.empty_cells()
    if k > len(empties):
        raise UsageError(f"board has only {len(empties)} empty cells")
    restricted = restrict_board(board, k)
    tree, _ = tree_for_board(restricted, subspace_optimization=subspace_opt)
    circ = tree.new_circuit()
    tree.init_node(circ, ())
    tree.estimate_phase(circ, precision)
    return metrics(transpile(circ))


def cmd_bench(args) -> int:
    board = parse_board(open(args.board).read())
    t0 = time.perf_counter()
    m = bench_row(board, args.missing, args.precision, args.subspace_opt)
    timings = {"bench": time.perf_counter() - t0}
    row = m.as_dict()
    print(f"missing={args.missing} qubits={m.qubit_count} u3={m.u3_count} "
          f"cx={m.cx_count} depth={m.depth}")
    outcome = {"missing": args.missing, "row": row}
    if args.missing == 1:
        outcome["paper_reference_k1"] = PAPER_REFERENCE_K1
    _emit(_report("bench", {"missing": args.missing, "precision": args.precision,
                            "subspace_opt": args.subspace_opt}, outcome, timings))
    return 0


def cmd_viz(args) -> int:
    t0 = time.perf_counter()
    if args.demo_tree is not None:
        tree = demo_tree(args.demo_tree)
    else:
        if args.board is None:
            raise UsageError("viz needs a board path or --demo-tree")
        board = parse_board(open(args.board).read())
        tree, _ = tree_for_board(board)

    n = tree.effective_depth
    parities = [(n % 2 == 0) if s % 2 == 0 else (n % 2 == 1)
                for s in range(args.steps)]
    paths = []
    for upto in range(args.steps + 1):
        circ = tree.new_circuit()
        tree.init_node(circ, ())
        for even in parities[:upto]:
            tree.qstep_diffuser(circ, even=even)
        state = apply(SparseState.zero(circ.num_qubits), circ)
        decoded = decode_tree_state(tree, state)
        out_path = f"{args.out}_step{upto}.dot"
        with open(out_path, "w") as fh:
            fh.write(to_dot(decoded))
        paths.append(out_path)
    timings = {"viz": time.perf_counter() - t0}
    for p in paths:
        print(p)
    _emit(_report("viz", {"demo_tree": args.demo_tree, "steps": args.steps},
                  {"files": paths}, timings))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwb", description="Quantum walk backtracking for Sudoku instances")
    sub = parser.add_subparsers(dest="cmd", required=True)

    solve = sub.add_parser("solve", help="find a solution end to end")
    solve.add_argument("board")
    solve.add_argument("--precision", type=int, default=3)
    solve.add_argument("--shots", type=int, default=10000)
    solve.add_argument("--seed", type=int, default=None)
    solve.add_argument("--subspace-opt", action="store_true", dest="subspace_opt")
    solve.add_argument("--max-support", type=int, default=2_000_000)
    solve.set_defaults(fn=cmd_solve)

    detect = sub.add_parser("detect", help="detect whether a solution exists")
    detect.add_argument("board")
    detect.add_argument("--delta", type=float, default=0.25)
    detect.add_argument("--beta", type=float, default=1.0)
    detect.add_argument("--gamma", type=float, default=4.0)
    detect.add_argument("--seed", type=int, default=None)
    detect.add_argument("--subspace-opt", action="store_true", dest="subspace_opt")
    detect.add_argument("--max-support", type=int, default=2_000_000)
    detect.set_defaults(fn=cmd_detect)

    bench = sub.add_parser("bench", help="report circuit resources (no simulation)")
    bench.add_argument("board")
    bench.add_argument("--missing", type=int, required=True)
    bench.add_argument("--precision", type=int, default=3)
    bench.add_argument("--subspace-opt", action="store_true", dest="subspace_opt")
    bench.set_defaults(fn=cmd_bench)

    viz = sub.add_parser("viz", help="emit DOT files of the walked tree")
    viz.add_argument("board", nargs="?", default=None)
    viz.add_argument("--demo-tree", type=int, default=None, dest="demo_tree")
    viz.add_argument("--steps", type=int, default=0)
    viz.add_argument("--out", default="walk")
    viz.set_defaults(fn=cmd_viz)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except (ParseError, UsageError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ResourceLimitError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
