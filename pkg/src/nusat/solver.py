"""2-SAT decision with certificates, a brute-force oracle and a fast status path.

:func:`solve2` builds the implication graph (clause ``a or b`` gives edges
``-a -> b`` and ``-b -> a``), labels strongly connected components with an
iterative Tarjan (compiled, see :mod:`nusat._kernels`) and reads an
assignment off the component order.
:func:`is_satisfiable` answers the same question without a certificate using
SciPy's compiled SCC routine; the experiment harness uses it for throughput.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from . import _kernels
from .errors import ArityError, NusatError, SizeError
from .formula import Formula, literal_node

BRUTE_MAX_N = 25


class Status(str, enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SolveResult:
    status: Status
    assignment: np.ndarray | None = None
    witness_var: int | None = None

    @property
    def satisfiable(self) -> bool:
        return self.status is Status.SAT

    def to_json(self) -> dict:
        out = {"status": self.status.value}
        if self.assignment is not None:
            out["assignment"] = [
                v if val else -v for v, val in enumerate(self.assignment.tolist(), 1)
            ]
        if self.witness_var is not None:
            out["witness_var"] = self.witness_var
        return out


def implication_csr(clauses: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """CSR ``(indptr, indices)`` of the implication graph on ``2n`` nodes."""
    a = literal_node(clauses[:, 0])
    b = literal_node(clauses[:, 1])
    src = np.concatenate((a ^ 1, b ^ 1))
    dst = np.concatenate((b, a))
    order = np.argsort(src, kind="stable")
    indptr = np.zeros(2 * n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=2 * n), out=indptr[1:])
    return indptr, dst[order]


def _require_2cnf(f: Formula):
    if f.k != 2:
        raise ArityError(f"2-SAT solver needs k=2, got k={f.k}")


def solve2(f: Formula) -> SolveResult:
    """Decide a 2-CNF in O(n + m).

    SAT results carry an assignment that has been checked against every
    clause; UNSAT results name a variable whose two literals share a
    component.
    """
    _require_2cnf(f)
    n = f.n
    if f.m == 0:
        return SolveResult(Status.SAT, assignment=np.zeros(n, dtype=bool))
    comp = _kernels.scc_components(np.ascontiguousarray(f.clauses), n)
    clash = _kernels.first_clash(comp)
    if clash >= 0:
        return SolveResult(Status.UNSAT, witness_var=clash + 1)
    # Tarjan numbers sinks first, so the literal in the lower component comes
    # later in topological order and can safely be made true.  Variables
    # without edges get -1 on both sides and default to false.
    pos, neg = comp[0::2], comp[1::2]
    assignment = pos < neg
    assignment.setflags(write=False)
    if not f.is_satisfied_by(assignment):
        raise NusatError("internal error: extracted assignment does not satisfy the formula")
    return SolveResult(Status.SAT, assignment=assignment)


def solve_brute(f: Formula, chunk_bits: int = 16) -> SolveResult:
    """Exhaustive search over all ``2**n`` assignments (any clause width)."""
    n = f.n
    if n > BRUTE_MAX_N:
        raise SizeError(f"brute force limited to n <= {BRUTE_MAX_N}, got n={n}")
    if f.m == 0:
        return SolveResult(Status.SAT, assignment=np.zeros(n, dtype=bool))
    var = np.abs(f.clauses) - 1
    want = f.clauses > 0
    total = 1 << n
    step = 1 << min(chunk_bits, n)
    shifts = np.arange(n, dtype=np.int64)
    for lo in range(0, total, step):
        a = np.arange(lo, min(lo + step, total), dtype=np.int64)
        bits = ((a[:, None] >> shifts[None, :]) & 1).astype(bool)
        alive = np.ones(a.size, dtype=bool)
        for c in range(f.m):
            sat = np.zeros(a.size, dtype=bool)
            for j in range(f.k):
                sat |= bits[:, var[c, j]] == want[c, j]
            alive &= sat
            if not alive.any():
                break
        hit = np.flatnonzero(alive)
        if hit.size:
            return SolveResult(Status.SAT, assignment=bits[hit[0]].copy())
    return SolveResult(Status.UNSAT)


def _compressed_graph(clauses: np.ndarray) -> tuple[int, np.ndarray, np.ndarray]:
    used, inv = np.unique(np.abs(clauses), return_inverse=True)
    inv = inv.reshape(clauses.shape)
    nodes = 2 * inv + (clauses < 0)
    src = np.concatenate((nodes[:, 0] ^ 1, nodes[:, 1] ^ 1))
    dst = np.concatenate((nodes[:, 1], nodes[:, 0]))
    return 2 * used.size, src, dst


def scc_labels(clauses: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """SciPy SCC labels on the implication graph restricted to variables that
    occur.  Returns ``(variables, labels)`` with labels of ``+v`` at
    ``2*i`` and ``-v`` at ``2*i + 1`` for ``v = variables[i]``."""
    used = np.unique(np.abs(clauses))
    size, src, dst = _compressed_graph(clauses)
    g = sparse.csr_matrix((np.ones(src.size, dtype=np.int32), (src, dst)), shape=(size, size))
    _, labels = csgraph.connected_components(g, directed=True, connection="strong")
    return used, labels


def is_satisfiable(clauses: np.ndarray) -> bool:
    """Status-only 2-SAT check on a raw ``(m, 2)`` literal array."""
    if clauses.shape[0] == 0:
        return True
    _, labels = scc_labels(clauses)
    return not bool((labels[0::2] == labels[1::2]).any())


def verify_assignment(f: Formula, assignment) -> bool:
    return f.is_satisfied_by(assignment)


def verify_unsat_witness(f: Formula, v: int) -> bool:
    """Recheck an UNSAT certificate without Tarjan: ``v`` and ``-v`` must
    reach each other in the implication graph (SciPy breadth-first search)."""
    _require_2cnf(f)
    if not 1 <= v <= f.n or f.m == 0:
        return False
    indptr, indices = implication_csr(f.clauses, f.n)
    g = sparse.csr_matrix(
        (np.ones(indices.size, dtype=np.int32), indices, indptr), shape=(2 * f.n, 2 * f.n)
    )
    # repeated clauses give duplicate entries; csgraph expects canonical CSR
    g.sum_duplicates()
    pos, neg = 2 * (v - 1), 2 * (v - 1) + 1
    reach_pos = csgraph.breadth_first_order(g, pos, directed=True, return_predecessors=False)
    reach_neg = csgraph.breadth_first_order(g, neg, directed=True, return_predecessors=False)
    return bool(np.isin(neg, reach_pos) and np.isin(pos, reach_neg))
