"""CNF formulas with a fixed clause width, and DIMACS interchange.

Literals are signed integers in DIMACS convention: ``v`` is the positive
literal of variable ``v`` (1-based), ``-v`` its negation.  Negation is unary
minus and ``abs`` recovers the variable.  Internally (graphs, solvers) a
literal maps to node ``2*(v-1)`` when positive and ``2*(v-1)+1`` when
negative, see :func:`literal_node`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DimacsError, FormulaError


def negate(lit: int) -> int:
    return -lit


def var_of(lit: int) -> int:
    return abs(lit)


def literal_node(lit):
    """Signed literal(s) -> implication-graph node index (works on arrays)."""
    if isinstance(lit, np.ndarray):
        return 2 * (np.abs(lit) - 1) + (lit < 0)
    return 2 * (abs(lit) - 1) + (lit < 0)


def node_literal(node: int) -> int:
    v = node // 2 + 1
    return -v if node & 1 else v


@dataclass(frozen=True, eq=False)
class Formula:
    """``m`` clauses of exactly ``k`` literals over variables ``1..n``.

    ``clauses`` is a read-only ``(m, k)`` int64 array.  Duplicate clauses are
    kept: ``m`` counts draws, not distinct clauses.
    """

    n: int
    k: int
    clauses: np.ndarray

    def __init__(self, n: int, k: int, clauses=(), *, strict: bool = True):
        arr = np.array(clauses, dtype=np.int64)
        if arr.size == 0:
            arr = np.zeros((0, k), dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != k:
            raise FormulaError(f"expected clauses of width {k}, got array of shape {arr.shape}")
        if n < 0:
            raise FormulaError(f"negative variable count {n}")
        if arr.size:
            mag = np.abs(arr)
            if mag.min() < 1 or mag.max() > n:
                row = int(np.flatnonzero((mag < 1).any(1) | (mag > n).any(1))[0])
                raise FormulaError(f"clause {row}: literal outside [1, {n}]: {arr[row].tolist()}")
            if strict and k > 1:
                s = np.sort(mag, axis=1)
                dup = (s[:, 1:] == s[:, :-1]).any(1)
                if dup.any():
                    row = int(np.flatnonzero(dup)[0])
                    raise FormulaError(f"clause {row}: repeated variable in {arr[row].tolist()}")
        arr.setflags(write=False)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "clauses", arr)

    @property
    def m(self) -> int:
        return int(self.clauses.shape[0])

    def __len__(self) -> int:
        return self.m

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        for row in self.clauses.tolist():
            yield tuple(row)

    def __getitem__(self, i) -> tuple[int, ...]:
        return tuple(self.clauses[i].tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Formula):
            return NotImplemented
        return (
            self.n == other.n
            and self.k == other.k
            and np.array_equal(self.clauses, other.clauses)
        )

    def __hash__(self):
        return hash((self.n, self.k, self.clauses.tobytes()))

    def __repr__(self) -> str:
        return f"Formula(n={self.n}, k={self.k}, m={self.m})"

    def prefix(self, m: int) -> "Formula":
        return Formula(self.n, self.k, self.clauses[:m], strict=False)

    def relabel(self, labels: Sequence[int]) -> "Formula":
        """Map variable ``v`` to ``labels[v - 1]`` keeping signs."""
        labels = np.asarray(labels, dtype=np.int64)
        if labels.size < self.n:
            raise FormulaError(f"need {self.n} labels, got {labels.size}")
        mapped = np.sign(self.clauses) * labels[np.abs(self.clauses) - 1]
        return Formula(max(self.n, int(labels.max(initial=0))), self.k, mapped, strict=False)

    def is_satisfied_by(self, assignment) -> bool:
        """``assignment[v - 1]`` is the truth value of variable ``v``."""
        a = np.asarray(assignment, dtype=bool)
        if a.size < self.n:
            raise FormulaError(f"assignment covers {a.size} of {self.n} variables")
        if self.m == 0:
            return True
        val = a[np.abs(self.clauses) - 1] == (self.clauses > 0)
        return bool(val.any(1).all())


def to_dimacs(f: Formula) -> str:
    lines = [f"p cnf {f.n} {f.m}"]
    lines.extend(" ".join(map(str, row)) + " 0" for row in f.clauses.tolist())
    return "\n".join(lines) + "\n"


def from_dimacs(text: str, k: int | None = None, *, strict: bool = True) -> Formula:
    """Parse DIMACS CNF.

    Every clause must have the same width (``k`` if given, else the width of
    the first clause).  ``strict`` additionally requires distinct variables
    within each clause; permissive mode accepts e.g. ``1 1 0``.
    """
    header = None
    body: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if header is not None:
                raise DimacsError("duplicate problem line", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"malformed header {line!r}", lineno)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsError(f"malformed header {line!r}", lineno) from None
            if header[0] < 0 or header[1] < 0:
                raise DimacsError(f"negative counts in header {line!r}", lineno)
            continue
        if header is None:
            raise DimacsError("clause data before the 'p cnf' header", lineno)
        body.append(line)
    if header is None:
        raise DimacsError("missing 'p cnf' header")
    n, m = header
    try:
        tokens = np.array(" ".join(body).split(), dtype=np.int64)
    except (ValueError, OverflowError):
        raise DimacsError("non-integer token in clause data") from None
    if tokens.size and tokens[-1] != 0:
        raise DimacsError("last clause is not terminated by 0")
    ends = np.flatnonzero(tokens == 0)
    starts = np.concatenate(([0], ends[:-1] + 1)) if ends.size else ends
    widths = ends - starts
    if widths.size and widths.min() == 0:
        raise DimacsError(f"zero-length clause (clause {int(np.argmin(widths))})")
    if ends.size != m:
        raise DimacsError(f"header declares {m} clauses, found {ends.size}")
    if k is None:
        k = int(widths[0]) if widths.size else 2
    if widths.size and (widths != k).any():
        bad = int(np.flatnonzero(widths != k)[0])
        raise DimacsError(f"clause {bad} has {int(widths[bad])} literals, expected {k}")
    lits = tokens[tokens != 0].reshape(-1, k)
    if lits.size and np.abs(lits).max() > n:
        bad = int(np.flatnonzero((np.abs(lits) > n).any(1))[0])
        raise DimacsError(f"clause {bad}: literal out of range 1..{n}")
    try:
        return Formula(n, k, lits, strict=strict)
    except FormulaError as exc:
        raise DimacsError(str(exc)) from None


def read_dimacs(path, k: int | None = None, *, strict: bool = True) -> Formula:
    import sys

    if str(path) == "-":
        return from_dimacs(sys.stdin.read(), k, strict=strict)
    with open(path) as fh:
        return from_dimacs(fh.read(), k, strict=strict)


def formula_from_clauses(clauses: Iterable[Sequence[int]], n: int | None = None) -> Formula:
    """Convenience constructor inferring ``n`` and ``k`` from the literals."""
    rows = [tuple(c) for c in clauses]
    if not rows:
        return Formula(n or 0, 2, [])
    k = len(rows[0])
    if n is None:
        n = max(abs(l) for row in rows for l in row)
    return Formula(n, k, rows)
