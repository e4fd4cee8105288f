"""Command-line front end.

    admitcert certify CASE [--format text|json|csv] [--tol T] [--oracle] ...
    admitcert batch DIR [--format text|json|csv] [--csv OUT] ...

Exit codes for ``certify``: 0 invertible, 1 singular, 2 inconclusive,
3 unreadable or invalid input.  ``batch`` exits 0 unless the directory itself
is missing.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .certify import DEFAULT_TOL, Certificate, Verdict, certify
from .graph import is_reactive
from .matpower_io import ConversionError, ParseError, case_name, read_case, to_network
from .netmodel import Network, NetworkError, build_admittance
from .oracle import DEFAULT_SIZE_CAP, dense_rank

EXIT_CODES = {Verdict.INVERTIBLE: 0, Verdict.SINGULAR: 1, Verdict.INCONCLUSIVE: 2}
EXIT_INPUT_ERROR = 3
CASE_SUFFIXES = (".m", ".json")
CSV_FIELDS = ("case", "n", "l", "reactive_pct", "verdict", "rank", "runtime_ms", "tol", "error")


@dataclass
class Report:
    case_name: str
    n_nodes: int
    n_branches: int
    reactive_branch_pct: float
    verdict: str
    rank_claim: int | None
    runtime_ms: float
    tolerance: float
    components: list[dict] = field(default_factory=list)
    witness: list[list[float]] | None = None
    oracle: dict | None = None

    def to_json_dict(self) -> dict:
        # runtime is left out so repeated runs produce identical bytes
        doc = {
            "case": self.case_name,
            "verdict": self.verdict,
            "rank": self.rank_claim,
            "n": self.n_nodes,
            "l": self.n_branches,
            "reactive_pct": self.reactive_branch_pct,
            "components": self.components,
            "witness": self.witness,
            "tol": self.tolerance,
        }
        if self.oracle is not None:
            doc["oracle"] = self.oracle
        return doc

    def csv_row(self) -> dict:
        return {"case": self.case_name, "n": self.n_nodes, "l": self.n_branches,
                "reactive_pct": f"{self.reactive_branch_pct:.1f}", "verdict": self.verdict,
                "rank": "" if self.rank_claim is None else self.rank_claim,
                "runtime_ms": f"{self.runtime_ms:.3f}", "tol": repr(self.tolerance), "error": ""}


def reactive_branch_pct(net: Network, tol: float) -> float:
    """Share of in-service branches with zero conductance, counted before reduction."""
    if not net.n_branches:
        return 0.0
    n = sum(1 for b in net.branches if is_reactive(b.y, tol))
    return round(100.0 * n / net.n_branches, 1)


def _oracle_check(net: Network, cert: Certificate, tol: float) -> dict:
    if net.n_nodes > DEFAULT_SIZE_CAP:
        return {"rank": None, "agree": None, "skipped": f"n > {DEFAULT_SIZE_CAP}"}
    rank = dense_rank(build_admittance(net), tol).rank
    agree = None if cert.rank_claim is None else rank == cert.rank_claim
    return {"rank": rank, "agree": agree}


def build_report(net: Network, name: str, args: argparse.Namespace) -> Report:
    start = time.perf_counter()
    cert = certify(net, args.tol, strict_connectivity=args.strict_connectivity,
                   max_root_trials=args.max_root_trials)
    runtime_ms = 1000.0 * (time.perf_counter() - start)
    components = [{"id": ev.component_id, "condition": ev.condition.value,
                   "root": None if ev.root is None else net.label(ev.root)}
                  for ev in cert.evidence]
    witness = None
    if cert.null_witness is not None:
        witness = [[float(z.real), float(z.imag)] for z in np.asarray(cert.null_witness)]
    report = Report(name, net.n_nodes, net.n_branches, reactive_branch_pct(net, args.tol),
                    cert.verdict.value, cert.rank_claim, runtime_ms, args.tol,
                    components, witness)
    if args.oracle:
        report.oracle = _oracle_check(net, cert, args.tol)
    return report


def _load(path: Path) -> tuple[Network, str]:
    raw = read_case(path)
    net = to_network(raw)
    return net, raw.name or case_name(path)


def _text_header() -> str:
    return f"{'case':<28} {'|N|':>7} {'|L|':>7} {'reac%':>6} {'verdict':<13} {'rank':>7} {'ms':>9}"


def _text_row(r: Report) -> str:
    rank = "-" if r.rank_claim is None else str(r.rank_claim)
    line = (f"{r.case_name:<28} {r.n_nodes:>7} {r.n_branches:>7} {r.reactive_branch_pct:>6.1f} "
            f"{r.verdict:<13} {rank:>7} {r.runtime_ms:>9.2f}")
    if r.oracle is not None:
        line += f"  oracle rank {r.oracle['rank']} agree={r.oracle['agree']}"
    return line


def _write_csv(rows: list[dict], out) -> None:
    writer = csv.DictWriter(out, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def cmd_certify(args: argparse.Namespace) -> int:
    path = Path(args.path)
    try:
        net, name = _load(path)
        report = build_report(net, name, args)
    except (OSError, UnicodeDecodeError, ParseError, ConversionError, NetworkError) as exc:
        print(f"admitcert: {path}: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    if args.format == "json":
        print(json.dumps(report.to_json_dict()))
    elif args.format == "csv":
        buf = io.StringIO()
        _write_csv([report.csv_row()], buf)
        sys.stdout.write(buf.getvalue())
    else:
        print(_text_header())
        print(_text_row(report))
        for c in report.components:
            root = "" if c["root"] is None else f" root {c['root']}"
            print(f"  component {c['id']}: {c['condition']}{root}")
        if report.witness is not None:
            print("  null witness: " + " ".join(f"{complex(*w):.6g}" for w in report.witness))
    return EXIT_CODES[Verdict(report.verdict)]


def _case_files(directory: Path) -> list[Path]:
    files = [p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in CASE_SUFFIXES]
    return sorted(files, key=lambda p: (case_name(p), p.name))


def run_batch(directory: Path, args: argparse.Namespace) -> tuple[list[Report], list[tuple[str, str]]]:
    reports: list[Report] = []
    errors: list[tuple[str, str]] = []
    for path in _case_files(directory):
        try:
            net, name = _load(path)
            reports.append(build_report(net, name, args))
        except (OSError, UnicodeDecodeError, ParseError, ConversionError, NetworkError) as exc:
            errors.append((case_name(path), str(exc)))
    return reports, errors


def cmd_batch(args: argparse.Namespace) -> int:
    directory = Path(args.dir)
    if not directory.is_dir():
        print(f"admitcert: {directory}: not a directory", file=sys.stderr)
        return EXIT_INPUT_ERROR
    reports, errors = run_batch(directory, args)

    # merge valid rows and error rows into one name-ordered listing
    entries: list[tuple[str, Report | str]] = [(r.case_name, r) for r in reports]
    entries += errors
    entries.sort(key=lambda e: e[0])
    counts = Counter(r.verdict for r in reports)
    summary = " ".join(f"{v.value}={counts.get(v.value, 0)}" for v in Verdict) + f" ERROR={len(errors)}"

    csv_rows = []
    for name, item in entries:
        if isinstance(item, Report):
            csv_rows.append(item.csv_row())
        else:
            csv_rows.append({k: "" for k in CSV_FIELDS} | {"case": name, "verdict": "ERROR", "error": item})

    if args.format == "json":
        docs = [item.to_json_dict() if isinstance(item, Report) else {"case": name, "error": item}
                for name, item in entries]
        print(json.dumps({"cases": docs, "summary": dict(counts) | {"ERROR": len(errors)}}))
    elif args.format == "csv":
        buf = io.StringIO()
        _write_csv(csv_rows, buf)
        sys.stdout.write(buf.getvalue())
    else:
        print(_text_header())
        for name, item in entries:
            print(_text_row(item) if isinstance(item, Report) else f"{name:<28} ERROR: {item}")
        print(summary)

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            _write_csv(csv_rows, fh)
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                   help="zero threshold for conductances, resonance and tap products (default 1e-12)")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--strict-connectivity", action="store_true",
                   help="report INCONCLUSIVE for disconnected networks instead of certifying each island")
    p.add_argument("--max-root-trials", type=int, default=None, metavar="K",
                   help="roots tried per radial reactive component (default: all)")
    p.add_argument("--oracle", action="store_true",
                   help="also compute the dense rank and report whether it agrees")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="admitcert",
                                     description="Certify invertibility of bus admittance matrices.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("certify", help="certify a single case file")
    p.add_argument("path")
    _add_common(p)
    p.set_defaults(func=cmd_certify)
    p = sub.add_parser("batch", help="certify every .m/.json case in a directory")
    p.add_argument("dir")
    p.add_argument("--csv", default=None, metavar="OUT", help="also write the table as CSV")
    _add_common(p)
    p.set_defaults(func=cmd_batch)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.max_root_trials is not None and args.max_root_trials < 1:
        print("admitcert: --max-root-trials must be positive", file=sys.stderr)
        return EXIT_INPUT_ERROR
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
