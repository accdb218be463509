"""Structural sub-formulas of 2-CNFs: bicycles, snakes, full-sign cores, VIGs.

A *bicycle* of length ``t`` is a chain of ``t + 1`` clauses
``(u, w1), (-w1, w2), ..., (-w_{t-1}, w_t), (-w_t, v)`` over distinct
variables ``w``, with ``u`` and ``v`` literals of those same variables.
Every unsatisfiable 2-CNF contains one.

A *snake* is a literal sequence ``w_1 .. w_{2t-1}`` over distinct variables;
its clause set is ``(-w_i, w_{i+1})`` for ``0 <= i < 2t`` with
``w_0 = w_{2t} = -w_t``, which is always unsatisfiable.  Eight sequences
(reversing/negating either half around the centre, and negating the whole
reversed sequence) give the same clause set; classes are keyed by the
lexicographically least member.
"""

from __future__ import annotations

import random
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ArityError, BudgetError, FormulaError
from .formula import Formula
from .solver import solve2

Clause = tuple[int, int]


def clause_key(clause: Iterable[int]) -> tuple[int, ...]:
    """Order-free identity of a clause."""
    return tuple(sorted(clause))


def _require_2cnf(f: Formula):
    if f.k != 2:
        raise ArityError(f"expected a 2-CNF, got k={f.k}")


# -- bicycles ---------------------------------------------------------------


@dataclass(frozen=True)
class Bicycle:
    w: tuple[int, ...]
    u: int
    v: int
    clause_indices: tuple[int, ...]

    @property
    def t(self) -> int:
        return len(self.w)

    def clauses(self) -> list[Clause]:
        chain = [(self.u, self.w[0])]
        chain += [(-a, b) for a, b in zip(self.w, self.w[1:])]
        chain.append((-self.w[-1], self.v))
        return chain

    def to_json(self) -> dict:
        return {
            "type": "bicycle",
            "t": self.t,
            "w": list(self.w),
            "u": self.u,
            "v": self.v,
            "clause_indices": list(self.clause_indices),
        }


def check_bicycle(f: Formula, b: Bicycle) -> bool:
    """True iff ``b`` is well formed and realised at its clause positions."""
    wvars = [abs(x) for x in b.w]
    if b.t < 1 or len(set(wvars)) != b.t:
        return False
    if abs(b.u) not in wvars or abs(b.v) not in wvars:
        return False
    if len(b.clause_indices) != b.t + 1 or len(set(b.clause_indices)) != b.t + 1:
        return False
    for idx, want in zip(b.clause_indices, b.clauses()):
        if not 0 <= idx < f.m or abs(want[0]) == abs(want[1]):
            return False
        if clause_key(f[idx]) != clause_key(want):
            return False
    return True


def _implications(f: Formula) -> dict[int, list[tuple[int, int]]]:
    """literal -> [(implied literal, clause index)] over proper clauses."""
    out: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for ci, (a, b) in enumerate(f):
        if abs(a) == abs(b):
            continue
        out[-a].append((b, ci))
        out[-b].append((a, ci))
    return out


def _bfs_path(adj, start: int, goal: int):
    parent = {start: None}
    frontier = [start]
    while frontier and goal not in parent:
        nxt = []
        for lit in frontier:
            for y, ci in adj.get(lit, ()):
                if y not in parent:
                    parent[y] = (lit, ci)
                    nxt.append(y)
        frontier = nxt
    if goal not in parent:
        return None
    lits, cls = [goal], []
    while parent[lits[-1]] is not None:
        prev, ci = parent[lits[-1]]
        lits.append(prev)
        cls.append(ci)
    return lits[::-1], cls[::-1]


def _bicycle_from_contradiction(adj, x: int) -> Bicycle:
    # P: shortest x ~> -x; its first repeated variable closes the right end.
    # Q: shortest -x ~> x; walking it backwards from x closes the left end.
    p_lits, p_cls = _bfs_path(adj, x, -x)
    q_lits, q_cls = _bfs_path(adj, -x, x)
    seen = set()
    b = 0
    while abs(p_lits[b]) not in seen:
        seen.add(abs(p_lits[b]))
        b += 1
    w = p_lits[:b]
    v = p_lits[b]
    last = p_cls[b - 1]
    j = len(q_lits) - 2
    first = q_cls[j]
    while abs(q_lits[j]) not in seen:
        seen.add(abs(q_lits[j]))
        w.insert(0, q_lits[j])
        j -= 1
        first = q_cls[j]
    u = -q_lits[j]
    middle = q_cls[j + 1:] + p_cls[: b - 1]
    return Bicycle(tuple(w), u, v, tuple([first] + middle + [last]))


def find_bicycle(f: Formula, t_max: int = 20, *, budget: int = 10**6) -> Bicycle | None:
    """Find a bicycle with at most ``t_max`` chain literals, or ``None``.

    Unsatisfiable inputs are handled by a linear construction from shortest
    implication paths; otherwise a depth-first search over chains of distinct
    variables runs, raising :class:`BudgetError` after ``budget`` expansions.
    """
    _require_2cnf(f)
    if f.m == 0:
        return None
    adj = _implications(f)
    proper = Formula(f.n, 2, [c for c in f if abs(c[0]) != abs(c[1])], strict=False)
    res = solve2(proper)
    if not res.satisfiable:
        bike = _bicycle_from_contradiction(adj, res.witness_var)
        if bike.t <= t_max:
            return bike
    return _search_bicycle(f, adj, t_max, budget)


def _search_bicycle(f: Formula, adj, t_max: int, budget: int) -> Bicycle | None:
    steps = 0
    for c0, (a, b) in enumerate(f):
        if abs(a) == abs(b):
            continue
        for u, w1 in ((a, b), (b, a)):
            path = [w1]
            used = {abs(w1)}
            cls = [c0]
            stack = [iter(adj.get(w1, ()))]
            while stack:
                steps += 1
                if steps > budget:
                    raise BudgetError(f"bicycle search exceeded {budget} expansions")
                for y, ci in stack[-1]:
                    if abs(y) in used:
                        if abs(u) in used and ci != c0:
                            return Bicycle(tuple(path), u, y, tuple(cls + [ci]))
                        continue
                    if len(path) < t_max:
                        path.append(y)
                        used.add(abs(y))
                        cls.append(ci)
                        stack.append(iter(adj.get(y, ())))
                        break
                else:
                    stack.pop()
                    if len(path) > 1:
                        used.discard(abs(path.pop()))
                        cls.pop()
    return None


# -- snakes -----------------------------------------------------------------


@dataclass(frozen=True)
class Snake:
    w: tuple[int, ...]

    def __post_init__(self):
        if len(self.w) < 3 or len(self.w) % 2 == 0:
            raise FormulaError(f"snake needs an odd length >= 3, got {len(self.w)}")
        if 0 in self.w or len({abs(x) for x in self.w}) != len(self.w):
            raise FormulaError(f"snake literals must use distinct variables: {self.w}")

    @property
    def t(self) -> int:
        return (len(self.w) + 1) // 2

    @property
    def central(self) -> int:
        """The central variable ``|w_t|``."""
        return abs(self.w[self.t - 1])

    def to_json(self) -> dict:
        return {"type": "snake", "t": self.t, "w": list(self.w), "central": self.central}


def snake_clauses(s: Snake | Sequence[int]) -> list[Clause]:
    """The ``2t`` clauses ``(-w_i, w_{i+1})``, ``i = 0 .. 2t-1``."""
    if not isinstance(s, Snake):
        s = Snake(tuple(s))
    t = s.t
    ext = (-s.w[t - 1],) + s.w + (-s.w[t - 1],)
    return [(-ext[i], ext[i + 1]) for i in range(2 * t)]


def snake_formula(s: Snake, n: int | None = None) -> Formula:
    if n is None:
        n = max(abs(x) for x in s.w)
    return Formula(n, 2, snake_clauses(s))


def snake_orbit(s: Snake) -> list[Snake]:
    """All eight literal sequences sharing ``s``'s clause set."""
    t = s.t

    def flip(xs):
        return tuple(-x for x in reversed(xs))

    out = []
    for seq in (s.w, flip(s.w)):
        lft, c, rgt = seq[: t - 1], seq[t - 1], seq[t:]
        for lw in (lft, flip(lft)):
            for rw in (rgt, flip(rgt)):
                out.append(Snake(lw + (c,) + rw))
    return out


def canonical_snake(s: Snake) -> Snake:
    return min(snake_orbit(s), key=lambda x: x.w)


ORBIT_SIZE = 8


def random_snake(t: int, n: int, rnd: random.Random | None = None) -> Snake:
    if t < 2:
        raise FormulaError(f"snake size must be >= 2, got {t}")
    if n < 2 * t - 1:
        raise FormulaError(f"need n >= {2 * t - 1} variables for size {t}")
    rnd = rnd or random.Random()
    vs = rnd.sample(range(1, n + 1), 2 * t - 1)
    return Snake(tuple(v if rnd.random() < 0.5 else -v for v in vs))


@dataclass(frozen=True)
class SnakeCount:
    multiplicity: int
    exactly_once: bool


def _paths(adj, start: int, goal: int, length: int, banned: int, budget: list[int]):
    """Literal paths start -> ... -> goal with ``length`` edges whose interior
    literals use distinct variables other than ``banned``."""
    out = []
    path: list[int] = []
    used = {banned}

    def walk(lit, left):
        budget[0] -= 1
        if budget[0] < 0:
            raise BudgetError("snake enumeration budget exhausted")
        if left == 1:
            if goal in adj.get(lit, ()):
                out.append(tuple(path))
            return
        for y in adj.get(lit, ()):
            if abs(y) in used:
                continue
            used.add(abs(y))
            path.append(y)
            walk(y, left - 1)
            path.pop()
            used.discard(abs(y))

    walk(start, length)
    return out


def count_snake_occurrences(f: Formula, t: int, *, budget: int = 10**6) -> dict[Snake, SnakeCount]:
    """Snake classes of size ``t`` whose whole clause set occurs in ``f``.

    ``multiplicity`` is the number of complete copies (the smallest count
    among the ``2t`` clauses); ``exactly_once`` says every clause of the set
    occurs exactly once.
    """
    _require_2cnf(f)
    if t < 2:
        raise FormulaError(f"snake size must be >= 2, got {t}")
    counts = Counter(clause_key(c) for c in f if abs(c[0]) != abs(c[1]))
    adj: dict[int, set[int]] = defaultdict(set)
    for a, b in counts:
        adj[-a].add(b)
        adj[-b].add(a)
    left_budget = [budget]
    found: dict[frozenset, Snake] = {}
    variables = sorted({abs(l) for key in counts for l in key})
    for x in variables:
        lefts = _paths(adj, -x, x, t, x, left_budget)
        if not lefts:
            continue
        rights = _paths(adj, x, -x, t, x, left_budget)
        for lw in lefts:
            lv = {abs(l) for l in lw}
            for rw in rights:
                if lv.isdisjoint(abs(l) for l in rw):
                    s = Snake(lw + (x,) + rw)
                    key = frozenset(clause_key(c) for c in snake_clauses(s))
                    if key not in found:
                        found[key] = canonical_snake(s)
    out = {}
    for key, s in found.items():
        cs = [counts[c] for c in key]
        out[s] = SnakeCount(min(cs), all(c == 1 for c in cs))
    return out


def exactly_once_snake_count(f: Formula, t: int) -> int:
    """Number of snake *sequences* whose clause set occurs exactly once."""
    occ = count_snake_occurrences(f, t)
    return ORBIT_SIZE * sum(1 for c in occ.values() if c.exactly_once)


# -- full-sign cores --------------------------------------------------------


def full_sign_core(f: Formula, k: int | None = None) -> tuple[int, ...] | None:
    """A variable set carrying all ``2**k`` sign patterns, or ``None``.

    Such a set is an unsatisfiable sub-formula on its own.
    """
    k = f.k if k is None else k
    if k != f.k:
        raise ArityError(f"formula has k={f.k}, asked for k={k}")
    if f.m < 2**k:
        return None
    lits = f.clauses
    mag = np.abs(lits)
    order = np.argsort(mag, axis=1, kind="stable")
    mag = np.take_along_axis(mag, order, axis=1)
    neg = np.take_along_axis(lits < 0, order, axis=1)
    proper = (mag[:, 1:] != mag[:, :-1]).all(1)
    if not proper.any():
        return None
    mag, neg = mag[proper], neg[proper]
    _, key = np.unique(mag, axis=0, return_inverse=True)
    key = key.ravel()
    pattern = (neg * (1 << np.arange(k))).sum(1)
    pairs = np.unique(key * (1 << k) + pattern)
    groups, counts = np.unique(pairs >> k, return_counts=True)
    full = groups[counts == 1 << k]
    if full.size == 0:
        return None
    row = int(np.flatnonzero(key == full[0])[0])
    return tuple(int(v) for v in mag[row])


# -- variable incidence graph ------------------------------------------------


@dataclass(frozen=True)
class VIG:
    nodes: frozenset[int]
    edges: frozenset[tuple[int, int]]

    def neighbors(self, v: int) -> set[int]:
        return {b if a == v else a for a, b in self.edges if v in (a, b)}

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def to_json(self) -> dict:
        return {"nodes": sorted(self.nodes), "edges": sorted(list(e) for e in self.edges)}


def build_vig(f: Formula) -> VIG:
    nodes = set(int(v) for v in np.unique(np.abs(f.clauses)))
    edges = set()
    for clause in f:
        vs = sorted({abs(l) for l in clause})
        for i, a in enumerate(vs):
            for b in vs[i + 1:]:
                edges.add((a, b))
    return VIG(frozenset(nodes), frozenset(edges))
