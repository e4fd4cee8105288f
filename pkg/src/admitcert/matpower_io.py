"""Readers for MATPOWER-style case files and the canonical JSON network schema.

Only the ``baseMVA``, ``bus`` and ``branch`` sections of a case file are read;
everything else (generators, costs, name cell arrays) is skipped.  Matrix
entries must be plain numeric literals.

JSON schema::

    {"n_nodes": int,
     "branches": [{"from": int, "to": int, "y": [re, im], "tap": [re, im]}],
     "shunts": [{"node": int, "y": [re, im]}]}

Indices are 0-based.  An optional ``"bus_ids"`` list maps nodes back to the
source bus numbers and an optional ``"name"`` labels the case.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .netmodel import Branch, Network, NetworkError, Shunt

# MATPOWER column indices (0-based)
BUS_I, BUS_TYPE, GS, BS = 0, 1, 4, 5
F_BUS, T_BUS, BR_R, BR_X, BR_B, TAP, SHIFT, BR_STATUS = 0, 1, 2, 3, 4, 8, 9, 10

ISOLATED_BUS = 4

_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eEdD][+-]?\d+)?|[+-]?(?:Inf|inf|NaN|nan)")


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class ConversionError(ValueError):
    pass


@dataclass(frozen=True)
class RawCase:
    """Case data as found in the file, before conversion to the branch/tap model.

    For JSON input the network is already in canonical form and is carried in
    ``network``; ``buses``/``branches`` are then empty.
    """

    base_mva: float
    buses: np.ndarray
    branches: np.ndarray
    name: str = ""
    network: Network | None = None


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _strip_comments(text: str) -> str:
    # blank out comments but keep offsets so diagnostics stay accurate
    return re.sub(r"%[^\n]*", lambda m: " " * len(m.group(0)), text)


def _find_assignment(text: str, name: str) -> re.Match | None:
    return re.search(r"(?m)^\s*(?:mpc\.)?" + name + r"\s*=\s*", text)


def _parse_matrix(text: str, name: str, min_cols: int) -> np.ndarray:
    m = _find_assignment(text, name)
    if m is None:
        raise ParseError(f"missing section '{name}'")
    start = m.end()
    if start >= len(text) or text[start] != "[":
        line, col = _line_col(text, start)
        raise ParseError(f"section '{name}' is not a bracketed matrix", line, col)
    end = text.find("]", start)
    if end < 0:
        line, col = _line_col(text, start)
        raise ParseError(f"unterminated matrix for section '{name}'", line, col)

    rows: list[list[float]] = []
    current: list[float] = []
    pos = start + 1
    token_re = re.compile(r"[^\s,;]+|;|\n")
    for tok in token_re.finditer(text, pos, end):
        s = tok.group(0)
        if s in (";", "\n"):
            if current:
                rows.append(current)
                current = []
            continue
        if not _NUMBER.fullmatch(s):
            line, col = _line_col(text, tok.start())
            raise ParseError(f"non-numeric token {s!r} in section '{name}'", line, col)
        current.append(float(s.replace("d", "e").replace("D", "e")))
    if current:
        rows.append(current)

    if not rows:
        return np.zeros((0, min_cols))
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            line, _ = _line_col(text, start)
            raise ParseError(f"row {i + 1} of '{name}' has {len(r)} columns, expected {width}", line)
    if width < min_cols:
        line, _ = _line_col(text, start)
        raise ParseError(f"section '{name}' needs at least {min_cols} columns, got {width}", line)
    return np.array(rows, dtype=float)


def _parse_scalar(text: str, name: str) -> float:
    m = _find_assignment(text, name)
    if m is None:
        raise ParseError(f"missing section '{name}'")
    tok = re.match(r"[^\s;]+", text[m.end():])
    if tok is None or not _NUMBER.fullmatch(tok.group(0)):
        line, col = _line_col(text, m.end())
        raise ParseError(f"section '{name}' must be a numeric scalar", line, col)
    return float(tok.group(0))


def parse_mcase(text: str, name: str = "") -> RawCase:
    clean = _strip_comments(text)
    base_mva = _parse_scalar(clean, "baseMVA")
    buses = _parse_matrix(clean, "bus", min_cols=6)
    branches = _parse_matrix(clean, "branch", min_cols=11)
    return RawCase(base_mva=base_mva, buses=buses, branches=branches, name=name)


def _pair(value, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if (isinstance(value, (list, tuple)) and len(value) == 2
            and all(isinstance(v, (int, float)) for v in value)):
        return complex(value[0], value[1])
    raise ParseError(f"{where}: expected [re, im], got {value!r}")


def parse_json(text: str, name: str = "") -> RawCase:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(doc, dict) or "n_nodes" not in doc:
        raise ParseError("missing section 'n_nodes'")
    try:
        branches = tuple(
            Branch(int(b["from"]), int(b["to"]), _pair(b["y"], f"branch {i} y"),
                   _pair(b.get("tap", [1.0, 0.0]), f"branch {i} tap"))
            for i, b in enumerate(doc.get("branches", []))
        )
        shunts = tuple(Shunt(int(s["node"]), _pair(s["y"], f"shunt {i} y"))
                       for i, s in enumerate(doc.get("shunts", [])))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed element: {exc}") from exc
    try:
        net = Network(int(doc["n_nodes"]), branches, shunts,
                      bus_ids=doc.get("bus_ids"), name=doc.get("name", name))
    except NetworkError as exc:
        raise ConversionError(str(exc)) from exc
    return RawCase(base_mva=1.0, buses=np.zeros((0, 6)), branches=np.zeros((0, 11)),
                   name=net.name or name, network=net)


def parse_case(text: str | bytes, fmt: str = "mcase", name: str = "") -> RawCase:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if fmt == "mcase":
        return parse_mcase(text, name)
    if fmt == "json":
        return parse_json(text, name)
    raise ValueError(f"unknown format {fmt!r}")


def to_network(raw: RawCase) -> Network:
    """Convert a raw case to the generalized branch/tap representation.

    Each in-service branch with series impedance ``r + jx``, ratio ``tau`` and
    shift ``theta`` becomes a branch with admittance ``1/(r+jx)/tau^2`` and tap
    ``tau e^{j theta}``; its charging ``b`` is split as ``jb/(2 tau^2)`` at the
    from bus and ``jb/2`` at the to bus.  Bus shunts are ``(Gs + jBs)/baseMVA``.
    """
    if raw.network is not None:
        return raw.network

    bus_ids = [int(b) for b in raw.buses[:, BUS_I]]
    index: dict[int, int] = {}
    for i, bid in enumerate(bus_ids):
        if bid in index:
            raise ConversionError(f"duplicate bus id {bid}")
        index[bid] = i

    branches: list[Branch] = []
    shunts: list[Shunt] = []
    for row_no, row in enumerate(raw.branches, start=1):
        if row[BR_STATUS] == 0:
            continue
        f_id, t_id = int(row[F_BUS]), int(row[T_BUS])
        if f_id not in index or t_id not in index:
            raise ConversionError(f"branch row {row_no}: unknown bus {f_id if f_id not in index else t_id}")
        r, x, b = row[BR_R], row[BR_X], row[BR_B]
        if r == 0 and x == 0:
            raise ConversionError(f"branch row {row_no} ({f_id}-{t_id}): zero series impedance")
        tau = row[TAP] if row[TAP] != 0 else 1.0
        theta = math.radians(row[SHIFT])
        ys = 1.0 / complex(r, x)
        f, t = index[f_id], index[t_id]
        branches.append(Branch(f, t, ys / tau**2, complex(tau * math.cos(theta), tau * math.sin(theta))))
        if b != 0:
            shunts.append(Shunt(f, 1j * b / (2 * tau**2)))
            shunts.append(Shunt(t, 1j * b / 2))

    for i, row in enumerate(raw.buses):
        gs, bs = row[GS], row[BS]
        if gs != 0 or bs != 0:
            shunts.append(Shunt(i, complex(gs, bs) / raw.base_mva))

    try:
        return Network(len(bus_ids), tuple(branches), tuple(shunts),
                       bus_ids=tuple(bus_ids), name=raw.name)
    except NetworkError as exc:
        raise ConversionError(str(exc)) from exc


def case_name(path: str | Path) -> str:
    stem = Path(path).stem
    return stem[len("pglib_opf_"):] if stem.startswith("pglib_opf_") else stem


def detect_format(path: str | Path) -> str:
    return "json" if Path(path).suffix.lower() == ".json" else "mcase"


def read_case(path: str | Path) -> RawCase:
    path = Path(path)
    return parse_case(path.read_bytes(), detect_format(path), case_name(path))


def load_network(path: str | Path) -> Network:
    return to_network(read_case(path))


def _c(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def network_to_dict(net: Network) -> dict:
    doc = {
        "n_nodes": net.n_nodes,
        "branches": [{"from": b.from_node, "to": b.to_node, "y": _c(b.y), "tap": _c(b.tap)}
                     for b in net.branches],
        "shunts": [{"node": s.node, "y": _c(s.y)} for s in net.shunts],
    }
    if net.bus_ids is not None:
        doc["bus_ids"] = list(net.bus_ids)
    if net.name:
        doc["name"] = net.name
    return doc


def network_to_json(net: Network, indent: int | None = None) -> str:
    return json.dumps(network_to_dict(net), indent=indent)
