"""Clause-drawing random k-SAT generator.

Each clause draws ``k`` variables i.i.d. from the distribution through a Vose
alias table; if two coincide the whole tuple is thrown away and redrawn, then
every variable is negated by an independent fair coin.

Randomness is counter-based (see :mod:`nusat.rng`).  Clause ``i`` uses stream
``i``; attempt ``a`` of that clause reads words ``a*(k+1) + j`` for the
``j``-th variable draw (``j < k``) and word ``a*(k+1) + k`` for the sign bits,
bit ``63 - j`` negating slot ``j``.  A variable draw turns the word into
``u = top53(word) * n``; column ``floor(u)`` is kept when ``frac(u)`` is below
its alias probability, otherwise its alias is taken.
"""

from __future__ import annotations

import weakref
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng
from .dist import Distribution
from .errors import DistributionError, RetryCapError
from .formula import Formula

DEFAULT_RETRY_CAP = 10**6


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    retry_cap: int = DEFAULT_RETRY_CAP

    def __post_init__(self):
        if self.retry_cap < 1:
            raise ValueError(f"retry_cap must be >= 1, got {self.retry_cap}")


class AliasTable:
    """Vose's alias method over variables ``1..n`` (stored 0-based)."""

    def __init__(self, p):
        p = np.asarray(p, dtype=float)
        n = p.size
        scaled = (p * n / p.sum()).tolist()
        prob = [1.0] * n
        alias = list(range(n))
        small = [i for i, x in enumerate(scaled) if x < 1.0]
        large = [i for i, x in enumerate(scaled) if x >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] = (scaled[g] + scaled[s]) - 1.0
            if scaled[g] < 1.0:
                small.append(g)
            else:
                large.append(g)
        # leftovers are 1 up to rounding
        self.n = n
        self.prob = np.array(prob)
        self.alias = np.array(alias, dtype=np.int64)

    def lookup(self, w: np.ndarray) -> np.ndarray:
        """Map random words to 0-based variable indices."""
        u = rng.to_unit(w) * self.n
        col = np.minimum(u.astype(np.int64), self.n - 1)
        keep = (u - col) < self.prob[col]
        return np.where(keep, col, self.alias[col])

    def probabilities(self) -> np.ndarray:
        """The pmf this table actually samples (for checking construction)."""
        out = self.prob / self.n
        np.add.at(out, self.alias, (1.0 - self.prob) / self.n)
        return out


_tables: "weakref.WeakKeyDictionary[Distribution, AliasTable]" = weakref.WeakKeyDictionary()


def alias_table(d: Distribution) -> AliasTable:
    table = _tables.get(d)
    if table is None:
        table = _tables[d] = AliasTable(d.p)
    return table


def _draw_range(table: AliasTable, k: int, start: int, stop: int, seed: int, retry_cap: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    bases = rng.stream_bases(seed, idx)
    out = np.empty((idx.size, k), dtype=np.int64)
    pending = np.arange(idx.size)
    attempt = 0
    draws = rejected = 0
    stride = k + 1
    while pending.size:
        if attempt >= retry_cap:
            first = int(idx[pending[0]])
            raise RetryCapError(first, attempt, rejected / max(draws, 1))
        b = bases[pending]
        cols = [table.lookup(rng.words(b, attempt * stride + j)) for j in range(k)]
        tup = np.stack(cols, axis=1)
        s = np.sort(tup, axis=1)
        ok = ~(s[:, 1:] == s[:, :-1]).any(1)
        draws += pending.size
        rejected += int((~ok).sum())
        acc = pending[ok]
        if acc.size:
            sign_word = rng.words(b[ok], attempt * stride + k)
            shifts = (63 - np.arange(k)).astype(np.uint64)
            neg = ((sign_word[:, None] >> shifts[None, :]) & np.uint64(1)).astype(bool)
            lits = tup[ok] + 1
            out[acc] = np.where(neg, -lits, lits)
        pending = pending[~ok]
        attempt += 1
    return out


def sample_clauses(
    d: Distribution,
    k: int,
    m: int,
    seed: int,
    *,
    retry_cap: int = DEFAULT_RETRY_CAP,
    start: int = 0,
    workers: int = 1,
) -> np.ndarray:
    """Raw ``(m, k)`` literal array for clause indices ``start .. start+m-1``."""
    if k < 1 or k > d.n:
        raise DistributionError("k", f"need 1 <= k <= n={d.n}, got {k}")
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")
    table = alias_table(d)
    if workers <= 1 or m < 2 * workers:
        return _draw_range(table, k, start, start + m, seed, retry_cap)
    cuts = np.linspace(start, start + m, workers + 1).astype(np.int64)
    with ThreadPoolExecutor(workers) as pool:
        parts = pool.map(
            lambda ab: _draw_range(table, k, int(ab[0]), int(ab[1]), seed, retry_cap),
            zip(cuts[:-1], cuts[1:]),
        )
        return np.concatenate(list(parts), axis=0)


def sample_formula(
    d: Distribution,
    k: int,
    m: int,
    cfg: GeneratorConfig | int = 0,
    *,
    workers: int = 1,
) -> Formula:
    """Draw a formula with ``m`` independent clauses from ``d``.

    ``cfg`` may be a bare seed.  Output depends only on ``(d, k, m, seed)``;
    ``workers`` only changes how clause indices are split across threads.
    """
    if isinstance(cfg, int):
        cfg = GeneratorConfig(seed=cfg)
    lits = sample_clauses(d, k, m, cfg.seed, retry_cap=cfg.retry_cap, workers=workers)
    return Formula(d.n, k, lits, strict=False)
