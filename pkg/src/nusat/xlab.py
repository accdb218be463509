"""Monte Carlo harness: satisfiability curves, crossing points, transition widths.

Trial ``j`` at clause count ``m`` uses the generator seed
``derive_seed(seed, m, j)``, so every trial is a pure function of
``(spec, n, m, seed, j)`` and results do not depend on how trials are spread
over worker processes.  A trial whose formula hits the generator's retry cap
is re-drawn with seed ``derive_seed(trial_seed, bump)`` for ``bump = 1, 2, ...``
and the number of such re-draws is reported.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels, rng
from .analysis import predict_threshold
from .dist import Distribution, EnsembleSpec, instantiate
from .errors import BracketError, RetryCapError
from .generator import DEFAULT_RETRY_CAP, alias_table
from .stats import logistic_crossing, wilson_interval, z_value

log = logging.getLogger(__name__)

WORKERS_ENV = "NUSAT_WORKERS"
MAX_BUMPS = 16
CSV_HEADER = ("n", "m", "trials", "sat_count", "p_hat", "ci_low", "ci_high", "seed")
SCHEMA_VERSION = 1


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", WORKERS_ENV, raw)
    return 1


def trial_seeds(seed: int, m: int, start: int, stop: int) -> np.ndarray:
    """``derive_seed(seed, m, j)`` for ``j`` in ``start .. stop-1``."""
    base = np.uint64(rng.derive_seed(seed, m))
    j = np.arange(start, stop, dtype=np.uint64)
    return rng.mix64_array(base + (j + np.uint64(1)) * np.uint64(rng.GAMMA))


# -- trial execution ------------------------------------------------------------

_worker_state: dict = {}


def _init_worker(prob, alias, retry_cap):
    _worker_state.update(prob=prob, alias=alias, retry_cap=retry_cap)


def _worker_batch(m, seeds):
    s = _worker_state
    return _kernels.batch_status(s["prob"], s["alias"], m, seeds, s["retry_cap"])


class TrialRunner:
    """Runs k=2 satisfiability trials for one distribution."""

    def __init__(self, d: Distribution, *, retry_cap: int = DEFAULT_RETRY_CAP, workers: int | None = None):
        self.d = d
        table = alias_table(d)
        self.prob = np.ascontiguousarray(table.prob)
        self.alias = np.ascontiguousarray(table.alias)
        self.retry_cap = retry_cap
        self.workers = default_workers() if workers is None else max(1, int(workers))
        self._pool = None

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _status(self, m: int, seeds: np.ndarray) -> np.ndarray:
        if self.workers == 1 or seeds.size < 2 * self.workers:
            return _kernels.batch_status(self.prob, self.alias, m, seeds, self.retry_cap)
        if self._pool is None:
            self._pool = ProcessPoolExecutor(
                self.workers, initializer=_init_worker, initargs=(self.prob, self.alias, self.retry_cap)
            )
        chunks = np.array_split(seeds, self.workers)
        parts = self._pool.map(_worker_batch, [m] * len(chunks), chunks)
        return np.concatenate(list(parts))

    def run(self, m: int, seed: int, start: int, stop: int) -> tuple[int, int]:
        """SAT count and re-draw count for trials ``start .. stop-1`` at ``m``."""
        if stop <= start:
            return 0, 0
        if m == 0:
            return stop - start, 0
        seeds = trial_seeds(seed, m, start, stop)
        status = self._status(m, seeds)
        redraws = 0
        for j in np.flatnonzero(status < 0):
            trial_seed = int(seeds[j])
            for bump in range(1, MAX_BUMPS + 1):
                redraws += 1
                s = np.array([rng.derive_seed(trial_seed, bump)], dtype=np.uint64)
                status[j] = _kernels.batch_status(self.prob, self.alias, m, s, self.retry_cap)[0]
                if status[j] >= 0:
                    break
            else:
                raise RetryCapError(-1, self.retry_cap, float("nan"))
        if redraws:
            log.warning("m=%d: %d trial(s) re-drawn after hitting the retry cap", m, redraws)
        return int((status == 1).sum()), redraws


# -- sweeps ---------------------------------------------------------------------


@dataclass(frozen=True)
class RelativeGrid:
    """Clause counts given as multiples of the predicted threshold."""

    multiples: tuple[float, ...]

    def resolve(self, m_star: float) -> list[int]:
        return [max(1, int(round(c * m_star))) for c in self.multiples]


@dataclass(frozen=True)
class SweepConfig:
    spec: EnsembleSpec
    n: int
    m_grid: tuple[int, ...] | RelativeGrid
    trials: int
    seed: int = 0
    confidence: float = 0.95
    retry_cap: int = DEFAULT_RETRY_CAP

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        grid = self.m_grid.multiples if isinstance(self.m_grid, RelativeGrid) else self.m_grid
        if len(grid) == 0:
            raise ValueError("m_grid must not be empty")
        if any(not x > 0 for x in grid):
            raise ValueError(f"m_grid entries must be positive, got {list(grid)}")

    def resolved_grid(self, d: Distribution | None = None) -> list[int]:
        if isinstance(self.m_grid, RelativeGrid):
            d = d or instantiate(self.spec, self.n)
            return self.m_grid.resolve(predict_threshold(d).m_star)
        return [int(m) for m in self.m_grid]


@dataclass(frozen=True)
class SweepRecord:
    n: int
    m: int
    trials: int
    sat_count: int
    p_hat: float
    ci_low: float
    ci_high: float
    seed: int
    redraws: int = field(default=0, compare=False)

    @classmethod
    def from_counts(cls, n, m, trials, sat, seed, confidence=0.95, redraws=0):
        lo, hi = wilson_interval(sat, trials, confidence)
        return cls(n, m, trials, sat, sat / trials, lo, hi, seed, redraws)

    def row(self) -> list:
        return [self.n, self.m, self.trials, self.sat_count, self.p_hat, self.ci_low, self.ci_high, self.seed]


def run_sweep(cfg: SweepConfig, *, workers: int | None = None) -> list[SweepRecord]:
    d = instantiate(cfg.spec, cfg.n)
    out = []
    with TrialRunner(d, retry_cap=cfg.retry_cap, workers=workers) as runner:
        for m in cfg.resolved_grid(d):
            sat, redraws = runner.run(m, cfg.seed, 0, cfg.trials)
            out.append(SweepRecord.from_counts(cfg.n, m, cfg.trials, sat, cfg.seed, cfg.confidence, redraws))
    return out


def records_to_csv(records: Sequence[SweepRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


# -- crossing search ------------------------------------------------------------


class Evaluator:
    """Cached satisfiability estimates at one ``(d, seed)``.

    Asking for more trials at an ``m`` seen before extends the existing
    prefix of trial indices, so repeated queries share randomness.
    """

    def __init__(self, runner: TrialRunner, seed: int, confidence: float = 0.95):
        self.runner = runner
        self.seed = seed
        self.confidence = confidence
        self.counts: dict[int, list[int]] = {}
        self.trials_run = 0
        self.redraws = 0

    def __call__(self, m: int, trials: int) -> float:
        have = self.counts.setdefault(m, [0, 0])
        if trials > have[1]:
            sat, redraws = self.runner.run(m, self.seed, have[1], trials)
            self.trials_run += trials - have[1]
            self.redraws += redraws
            have[0] += sat
            have[1] = trials
        return have[0] / have[1]

    def interval(self, m: int) -> tuple[float, float]:
        sat, t = self.counts[m]
        return wilson_interval(sat, t, self.confidence)

    def record(self, m: int) -> SweepRecord:
        sat, t = self.counts[m]
        return SweepRecord.from_counts(self.runner.d.n, m, t, sat, self.seed, self.confidence)


@dataclass(frozen=True)
class Located:
    level: float
    m: float
    ci: tuple[float, float]
    trials_used: int


BISECTION_STEPS = 10


FLANK_STEPS = tuple(1 + 0.04 * 2**j for j in range(6))


def _flank(ev: Evaluator, near: int, level: float, above: bool, lo: int, hi: int, budget: int) -> int | None:
    """Closest point to ``near`` on the ``above`` side (smaller m) or below
    side (larger m) whose Wilson interval excludes ``level``.

    ``near`` itself is topped up first, then new points are probed at
    geometrically growing distances, each with ``budget/8`` trials, until one
    is decisive or ``budget`` is spent.  Returns ``None`` if none was found.
    """
    # fewest trials for which an all-or-nothing outcome is decisive at ``level``
    z2 = z_value(ev.confidence) ** 2
    floor_ = 2 * math.ceil(z2 * max((1 - level) / level, level / (1 - level)))
    per_point = max(floor_, budget // 8)
    budget = max(budget, 4 * per_point)
    spent = 0

    def decisive(m):
        lo_, hi_ = ev.interval(m)
        return lo_ > level if above else hi_ < level

    probes = [near] + [int(round(near / f)) if above else int(round(near * f)) for f in FLANK_STEPS]
    for m in probes:
        m = min(max(m, lo), hi)
        have = ev.counts.get(m, (0, 0))[1]
        if have < per_point:
            if spent + per_point - have > budget:
                break
            ev(m, per_point)
            spent += per_point - have
        if decisive(m):
            return m
    return None


def locate(ev: Evaluator, level: float, lo: int, hi: int, budget: int) -> Located:
    """Clause count where Pr(sat) equals ``level`` inside ``[lo, hi]``.

    Fixed schedule: both endpoints get ``budget/20`` trials, then
    ``BISECTION_STEPS`` geometric bisection steps with trial counts growing
    linearly so the points nearest the target are measured best.  A quarter
    of the budget is held back to confirm the decisive flanks: the closest
    points on either side whose Wilson interval excludes ``level``.  They
    bound the returned interval, and a logistic fit over the points between
    them gives the estimate.
    """
    start_trials = ev.trials_run
    end_trials = max(20, budget // 20)
    reserve = budget // 4
    p_lo, p_hi = ev(lo, end_trials), ev(hi, end_trials)
    if not (p_lo > level > p_hi):
        raise BracketError(
            f"Pr(sat) does not cross {level} inside m in [{lo}, {hi}]: "
            f"p_hat({lo})={p_lo:.4f}, p_hat({hi})={p_hi:.4f}",
            {"m_low": lo, "p_low": p_lo, "m_high": hi, "p_high": p_hi},
        )
    remaining = max(0, budget - 2 * end_trials - reserve)
    weights = np.arange(1, BISECTION_STEPS + 1)
    schedule = np.maximum(10, remaining * weights // weights.sum())
    a, b = lo, hi
    for t in schedule:
        if b - a <= 1:
            break
        mid = int(round(math.sqrt(a * b)))
        mid = min(max(mid, a + 1), b - 1)
        if ev(mid, int(t)) > level:
            a = mid
        else:
            b = mid

    ci_lo = _flank(ev, a, level, True, lo, hi, reserve // 2)
    ci_hi = _flank(ev, b, level, False, lo, hi, reserve // 2)
    ms = sorted(m for m in ev.counts if lo <= m <= hi)
    # fall back to the nearest decisive point seen anywhere (possibly an endpoint)
    if ci_lo is None:
        ci_lo = max((m for m in ms if m <= a and ev.interval(m)[0] > level), default=lo)
    if ci_hi is None:
        ci_hi = min((m for m in ms if m >= b and ev.interval(m)[1] < level), default=hi)
    window = [m for m in ms if ci_lo <= m <= ci_hi]
    est = logistic_crossing(
        np.array(window),
        np.array([ev.counts[m][0] for m in window]),
        np.array([ev.counts[m][1] for m in window]),
        level,
    )
    if est is None:
        est = math.sqrt(a * b)
    est = min(max(est, ci_lo), ci_hi)
    return Located(level, est, (float(ci_lo), float(ci_hi)), ev.trials_run - start_trials)


@dataclass(frozen=True)
class CrossingEstimate:
    n: int
    m_hat: float
    ci: tuple[float, float]
    trials_used: int
    m_star: float
    bracket: tuple[int, int]
    points: tuple[SweepRecord, ...] = ()
    redraws: int = 0

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "m_hat": self.m_hat,
            "ci": list(self.ci),
            "trials_used": self.trials_used,
            "m_star": self.m_star,
            "ratio": self.m_hat / self.m_star,
            "bracket": list(self.bracket),
            "redraws": self.redraws,
            "points": [asdict(p) for p in self.points],
        }


def bracket_for(m_star: float) -> tuple[int, int]:
    return max(1, int(math.floor(m_star / 8))), max(2, int(math.ceil(8 * m_star)))


MIN_BUDGET = 1000


def estimate_crossing(
    spec: EnsembleSpec,
    n: int,
    seed: int = 0,
    budget: int = 10_000,
    *,
    confidence: float = 0.95,
    workers: int | None = None,
    retry_cap: int = DEFAULT_RETRY_CAP,
) -> CrossingEstimate:
    """Clause count where Pr(sat) = 1/2, searched in ``[m*/8, 8 m*]``."""
    if budget < MIN_BUDGET:
        raise ValueError(f"budget must be >= {MIN_BUDGET} trials, got {budget}")
    d = instantiate(spec, n)
    m_star = float(predict_threshold(d).m_star)
    lo, hi = bracket_for(m_star)
    with TrialRunner(d, retry_cap=retry_cap, workers=workers) as runner:
        ev = Evaluator(runner, seed, confidence)
        res = locate(ev, 0.5, lo, hi, budget)
    points = tuple(ev.record(m) for m in sorted(ev.counts))
    return CrossingEstimate(n, res.m, res.ci, ev.trials_run, m_star, (lo, hi), points, ev.redraws)


# -- sharpness ------------------------------------------------------------------


@dataclass(frozen=True)
class WidthPoint:
    n: int
    m_star: float
    m_hat: float
    m_low_p: float  # where Pr(sat) = delta
    m_high_p: float  # where Pr(sat) = 1 - delta
    width: float
    width_ci: tuple[float, float]
    trials_used: int


@dataclass(frozen=True)
class SharpnessReport:
    delta: float
    points: tuple[WidthPoint, ...]
    verdict: str
    note: str = "empirical evidence from finite n, not a proof of (non-)sharpness"

    @property
    def widths(self) -> list[float]:
        return [p.width for p in self.points]

    def cis_overlap(self) -> bool:
        lows = [p.width_ci[0] for p in self.points]
        highs = [p.width_ci[1] for p in self.points]
        return max(lows) <= min(highs)

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "delta": self.delta,
            "verdict": self.verdict,
            "note": self.note,
            "points": [asdict(p) for p in self.points],
        }


def _verdict(points: Sequence[WidthPoint]) -> str:
    if len(points) < 2:
        return "inconclusive"
    first, last = points[0], points[-1]
    lows = [p.width_ci[0] for p in points]
    highs = [p.width_ci[1] for p in points]
    if last.width_ci[1] < first.width_ci[0]:
        return "shrinking: consistent with a sharp threshold"
    if max(lows) <= min(highs):
        return "stable: consistent with a coarse threshold"
    return "inconclusive"


def sharpness_probe(
    spec: EnsembleSpec,
    n_grid: Sequence[int],
    delta: float = 0.1,
    budget: int = 6_000,
    *,
    seed: int = 0,
    confidence: float = 0.95,
    workers: int | None = None,
    retry_cap: int = DEFAULT_RETRY_CAP,
) -> SharpnessReport:
    """Relative transition width ``W(n) = (m[p=delta] - m[p=1-delta]) / m_hat``.

    ``budget`` trials per ``n`` are split evenly between the three searches
    (levels 1/2, ``delta`` and ``1 - delta``); they share cached points.
    """
    if not 0 < delta <= 0.5:
        raise ValueError(f"delta must lie in (0, 1/2], got {delta}")
    ns = [int(n) for n in n_grid]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError(f"n_grid must be increasing, got {ns}")
    each = max(MIN_BUDGET // 3, budget // 3)
    out = []
    for n in ns:
        d = instantiate(spec, n)
        m_star = float(predict_threshold(d).m_star)
        lo, hi = bracket_for(m_star)
        with TrialRunner(d, retry_cap=retry_cap, workers=workers) as runner:
            ev = Evaluator(runner, seed, confidence)
            half = locate(ev, 0.5, lo, hi, each)
            low_p = locate(ev, delta, lo, hi, each)
            high_p = locate(ev, 1 - delta, lo, hi, each)
        width = (low_p.m - high_p.m) / half.m
        ci = (
            (low_p.ci[0] - high_p.ci[1]) / half.m,
            (low_p.ci[1] - high_p.ci[0]) / half.m,
        )
        out.append(WidthPoint(n, m_star, half.m, low_p.m, high_p.m, width, ci, ev.trials_run))
    return SharpnessReport(delta, tuple(out), _verdict(out))
