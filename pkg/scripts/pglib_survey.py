"""Certify a directory of PGLib-OPF cases and print a survey table: size, reactive share, verdict.

    python3 scripts/pglib_survey.py [DIR] [--oracle] [--csv OUT]

DIR defaults to the case data shipped with the ``pypglib`` package if it is
installed, otherwise to ``tests/data``.  Cases larger than the dense size cap
are reported without an oracle rank.  With ``--file-rows`` the |L| and
reactive columns count every branch row of the file, out-of-service rows
included, as in the published survey of these cases.
"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

from admitcert.certify import DEFAULT_TOL, Verdict, certify
from admitcert.cli import reactive_branch_pct
from admitcert.matpower_io import (BR_R, ConversionError, ParseError, case_name, read_case,
                                   to_network)
from admitcert.netmodel import build_admittance
from admitcert.oracle import DEFAULT_SIZE_CAP, dense_rank

HERE = Path(__file__).resolve().parent


def default_dir() -> Path:
    try:
        import pypglib  # optional, only used to locate case files
    except ImportError:
        return HERE.parent / "tests" / "data"
    return Path(pypglib.__file__).parent / "opf"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("dir", nargs="?", type=Path, default=None)
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL)
    parser.add_argument("--oracle", action="store_true", help="dense rank check where feasible")
    parser.add_argument("--max-nodes", type=int, default=None, help="skip cases with more nodes")
    parser.add_argument("--csv", type=Path, default=None)
    parser.add_argument("--file-rows", action="store_true",
                        help="count |L| and reactive %% over all branch rows, in service or not")
    args = parser.parse_args()
    directory = args.dir or default_dir()

    rows = []
    print(f"{'case':<30} {'|N|':>7} {'|L|':>7} {'reac%':>6} {'verdict':<13} {'ms':>9} {'oracle':>8}")
    for path in sorted(directory.glob("*.m"), key=case_name):
        try:
            raw = read_case(path)
            net = to_network(raw)
        except (ParseError, ConversionError) as exc:
            print(f"{case_name(path):<30} ERROR {exc}")
            continue
        if args.max_nodes and net.n_nodes > args.max_nodes:
            continue
        start = time.perf_counter()
        cert = certify(net, args.tol)
        ms = 1000 * (time.perf_counter() - start)
        oracle = ""
        if args.oracle and net.n_nodes <= DEFAULT_SIZE_CAP:
            rank = dense_rank(build_admittance(net), args.tol).rank
            oracle = "ok" if cert.rank_claim in (None, rank) else f"rank {rank}"
        n_branches, pct = net.n_branches, reactive_branch_pct(net, args.tol)
        if args.file_rows and len(raw.branches):
            n_branches = len(raw.branches)
            pct = round(100.0 * float((raw.branches[:, BR_R] == 0).sum()) / n_branches, 1)
        yes = "Yes" if cert.verdict is not Verdict.INCONCLUSIVE else "No"
        rows.append((case_name(path), net.n_nodes, n_branches, pct, cert.verdict.value, yes, ms))
        print(f"{case_name(path):<30} {net.n_nodes:>7} {n_branches:>7} {pct:>6.1f} "
              f"{cert.verdict.value:<13} {ms:>9.2f} {oracle:>8}")

    counts = {v.value: sum(r[4] == v.value for r in rows) for v in Verdict}
    print(" ".join(f"{k}={v}" for k, v in counts.items()))
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("case,n,l,reactive_pct,verdict,satisfies,runtime_ms\n")
            for r in rows:
                fh.write(f"{r[0]},{r[1]},{r[2]},{r[3]:.1f},{r[4]},{r[5]},{r[6]:.3f}\n")


if __name__ == "__main__":
    main()
