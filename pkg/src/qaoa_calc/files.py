"""Instance file formats and deterministic text output.

Formats (all indices 1-based on disk):
  * DIMACS CNF for Max-k-SAT: "p cnf n m" then 0-terminated clause lines;
  * edge list for graphs: "n m" header then "u v [w]" lines;
  * QUBO as JSON with fields {n, a0, linear: [{j, a}], quadratic: [{i, j, a}]}.

CSV output is comma-separated with '.' decimals, '#'-prefixed metadata lines,
then one header row; floats are rendered with 17 significant digits so files
are bit-stable across runs.
"""
from __future__ import annotations

import json
from typing import Iterable, Sequence

import numpy as np

from .bits import int_to_bitstring
from .cost import (BalancedMax2SatCost, CostFunction, Graph, MaxCutCost,
                   MaxKSatCost, QuboCost)
from .errors import InstanceFormatError


def fmt_float(x: float) -> str:
    return f"{float(x):.17g}"


# -- DIMACS CNF -------------------------------------------------------------------

def parse_dimacs_cnf(text: str) -> MaxKSatCost:
    n = m = None
    clauses = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise InstanceFormatError(f"bad problem line: {line!r}")
            n, m = int(parts[2]), int(parts[3])
            continue
        if n is None:
            raise InstanceFormatError("clause line before the problem line")
        try:
            lits = [int(tok) for tok in line.split()]
        except ValueError as exc:
            raise InstanceFormatError(f"bad clause line: {line!r}") from exc
        if not lits or lits[-1] != 0:
            raise InstanceFormatError(f"clause line not 0-terminated: {line!r}")
        lits = lits[:-1]
        if not lits:
            raise InstanceFormatError("empty clause")
        for lit in lits:
            if lit == 0 or abs(lit) > n:
                raise InstanceFormatError(f"literal {lit} outside 1..{n}")
        clauses.append(tuple((abs(l) - 1, l < 0) for l in lits))
    if n is None:
        raise InstanceFormatError("missing problem line")
    if len(clauses) != m:
        raise InstanceFormatError(f"header says {m} clauses, file has {len(clauses)}")
    return MaxKSatCost(n, clauses)


def write_dimacs_cnf(cost: MaxKSatCost) -> str:
    lines = [f"p cnf {cost.n} {len(cost.clause_literals)}"]
    for lits in cost.clause_literals:
        lines.append(" ".join(str(-(v + 1) if neg else v + 1) for v, neg in lits) + " 0")
    return "\n".join(lines) + "\n"


# -- edge list ---------------------------------------------------------------------

def parse_edgelist(text: str) -> Graph:
    lines = [l.strip() for l in text.splitlines() if l.strip() and not l.strip().startswith("#")]
    if not lines:
        raise InstanceFormatError("empty edge list")
    header = lines[0].split()
    if len(header) != 2:
        raise InstanceFormatError(f"edge list header must be 'n m', got {lines[0]!r}")
    n, m = int(header[0]), int(header[1])
    if len(lines) - 1 != m:
        raise InstanceFormatError(f"header says {m} edges, file has {len(lines) - 1}")
    edges = []
    weights = []
    for line in lines[1:]:
        parts = line.split()
        if len(parts) not in (2, 3):
            raise InstanceFormatError(f"bad edge line: {line!r}")
        u, v = int(parts[0]) - 1, int(parts[1]) - 1
        if u == v:
            raise InstanceFormatError(f"self-loop on vertex {u + 1}")
        edges.append((min(u, v), max(u, v)))
        weights.append(float(parts[2]) if len(parts) == 3 else 1.0)
    w = None if all(x == 1.0 for x in weights) else tuple(weights)
    order = sorted(range(len(edges)), key=lambda i: edges[i])
    edges = tuple(edges[i] for i in order)
    if w is not None:
        w = tuple(w[i] for i in order)
    return Graph(n, edges, w)


def write_edgelist(graph: Graph) -> str:
    lines = [f"{graph.n} {graph.m}"]
    for i, (u, v) in enumerate(graph.edges):
        if graph.weights is None:
            lines.append(f"{u + 1} {v + 1}")
        else:
            lines.append(f"{u + 1} {v + 1} {fmt_float(graph.weights[i])}")
    return "\n".join(lines) + "\n"


# -- QUBO JSON ----------------------------------------------------------------------

def parse_qubo(text: str) -> QuboCost:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"bad QUBO file: {exc}") from exc
    try:
        n = int(doc["n"])
        a0 = float(doc.get("a0", 0.0))
        linear = {int(e["j"]) - 1: float(e["a"]) for e in doc.get("linear", [])}
        quadratic = {(int(e["i"]) - 1, int(e["j"]) - 1): float(e["a"])
                     for e in doc.get("quadratic", [])}
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"bad QUBO file structure: {exc}") from exc
    for j in linear:
        if not 0 <= j < n:
            raise InstanceFormatError(f"linear index {j + 1} outside 1..{n}")
    for (i, j) in quadratic:
        if not (0 <= i < n and 0 <= j < n):
            raise InstanceFormatError(f"quadratic pair ({i + 1},{j + 1}) outside 1..{n}")
    return QuboCost(n, a0, linear, quadratic)


def write_qubo(cost: QuboCost) -> str:
    doc = {
        "n": cost.n,
        "a0": cost.a0,
        "linear": [{"j": j + 1, "a": a} for j, a in sorted(cost.linear.items())],
        "quadratic": [{"i": i + 1, "j": j + 1, "a": a}
                      for (i, j), a in sorted(cost.quadratic.items())],
    }
    return json.dumps(doc, indent=2) + "\n"


def load_instance(path: str, fmt: str) -> CostFunction:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if fmt == "cnf":
        return parse_dimacs_cnf(text)
    if fmt == "edgelist":
        return MaxCutCost(parse_edgelist(text))
    if fmt == "qubo":
        return parse_qubo(text)
    if fmt == "cnf2sat":
        sat = parse_dimacs_cnf(text)
        edges = []
        for lits in sat.clause_literals:
            if len(lits) != 2:
                raise InstanceFormatError("balanced Max-2-SAT file must have width-2 clauses")
            (i, ni), (j, nj) = lits
            edges.append((i, -1 if ni else 1, j, -1 if nj else 1))
        return BalancedMax2SatCost(sat.n, edges)
    raise InstanceFormatError(f"unknown instance format {fmt!r}")


def save_instance(cost: CostFunction, path: str) -> None:
    if isinstance(cost, MaxKSatCost):
        text = write_dimacs_cnf(cost)
    elif isinstance(cost, MaxCutCost):
        text = write_edgelist(cost.graph)
    elif isinstance(cost, QuboCost):
        text = write_qubo(cost)
    else:
        raise InstanceFormatError(f"no file format for cost kind {cost.kind!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


# -- CSV and sample output ------------------------------------------------------------

def csv_lines(metadata: dict, header: Sequence[str],
              rows: Iterable[Sequence]) -> list[str]:
    lines = [f"# {k} = {v}" for k, v in metadata.items()]
    lines.append(",".join(header))
    for row in rows:
        cells = [fmt_float(c) if isinstance(c, (float, np.floating)) else str(c)
                 for c in row]
        lines.append(",".join(cells))
    return lines


def write_samples(path: str, samples: np.ndarray, cost: CostFunction,
                  as_csv: bool = False) -> None:
    """One bitstring per line (variable 1 leftmost), or CSV (index, bitstring, cost)."""
    with open(path, "w", encoding="utf-8") as fh:
        if as_csv:
            fh.write("index,bitstring,cost\n")
            for i, x in enumerate(samples):
                fh.write(f"{i},{int_to_bitstring(int(x), cost.n)},{fmt_float(cost.value(int(x)))}\n")
        else:
            for x in samples:
                fh.write(int_to_bitstring(int(x), cost.n) + "\n")
