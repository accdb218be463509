"""Closed-form threshold predictions, regime classification and probability bounds.

For a 2-CNF drawn from ``p`` the three regimes are

* Case1: ``p1^2 = Theta(sum p^2)`` and ``p2^2 = Theta(sum_{i>=2} p^2)``; coarse,
* Case2: ``p1^2 = Theta(sum p^2)`` and ``p2^2 = o(sum_{i>=2} p^2)``; coarse,
* Case3: ``p1^2 = o(sum p^2)``; sharp at ``m* = 1 / sum p^2``.

The coarse cases are located (up to a constant) at
``m* = (1 - sum p^2) / (p1 * sqrt(sum_{i>=2} p^2))``; that exact value is
reported so sweeps have a concrete centre.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dist import GEOMETRIC, POWERLAW, UNIFORM, Distribution, EnsembleSpec, instantiate
from .errors import DomainError, GridError

DEFAULT_SLOPE_TOL = 0.05
# Used only when a single fixed pmf has no ensemble to fit a trend over.
SINGLE_PMF_CUTOFF = 0.05

COARSE_CAVEAT = (
    "coarse regime: the threshold is only determined up to a constant factor; "
    "m_star is the order-defining expression evaluated exactly"
)


class Regime(str, enum.Enum):
    CASE1 = "Case1"
    CASE2 = "Case2"
    CASE3 = "Case3"

    @property
    def sharp(self) -> bool:
        return self is Regime.CASE3

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class RegimeVerdict:
    regime: Regime
    basis: str
    slopes: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ThresholdReport:
    regime: Regime
    m_star: float
    sharp: bool
    formula_tag: str
    diagnostics: dict
    basis: str
    note: str | None = None

    def to_json(self) -> dict:
        m = self.m_star
        return {
            "regime": self.regime.value,
            "m_star": int(m) if float(m).is_integer() else float(m),
            "sharp": self.sharp,
            "formula_tag": self.formula_tag,
            "basis": self.basis,
            "note": self.note,
            "diagnostics": {k: float(v) for k, v in self.diagnostics.items()},
        }


def ratios(d: Distribution) -> tuple[float, float]:
    """``r1 = p1^2 / sum p^2`` and ``r2 = p2^2 / sum_{i>=2} p^2``."""
    return d.p1**2 / d.sum_sq, d.p2**2 / d.sum_sq_tail


def sharp_m_star(d: Distribution) -> float:
    return 1.0 / d.sum_sq


def coarse_m_star(d: Distribution) -> float:
    return (1.0 - d.sum_sq) / (d.p1 * math.sqrt(d.sum_sq_tail))


def _fit_slope(ns: Sequence[int], values: Sequence[float]) -> float:
    slope, _ = np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(values, float)), 1)
    return float(slope)


def _check_grid(n_grid) -> list[int]:
    ns = sorted(int(n) for n in n_grid or ())
    if len(ns) < 3 or ns[0] < 2 or ns[-1] < 100 * ns[0]:
        raise GridError(
            f"trend fit needs >= 3 sizes spanning >= 2 decades, got {list(n_grid or ())}"
        )
    return ns


def classify_regime(
    spec: EnsembleSpec,
    n_grid: Sequence[int] | None = None,
    *,
    slope_tol: float = DEFAULT_SLOPE_TOL,
) -> RegimeVerdict:
    """Regime of an ensemble.

    Built-in families are classified in closed form.  Any other family is
    instantiated on ``n_grid`` and the log-log slopes of ``r1(n)`` and
    ``r2(n)`` decide whether each ratio vanishes (slope below ``-slope_tol``)
    or stays bounded away from zero.
    """
    if spec.family == UNIFORM:
        return RegimeVerdict(Regime.CASE3, "closed form: uniform has p1^2 = o(sum p^2)")
    if spec.family == POWERLAW:
        if spec.param >= 3:
            return RegimeVerdict(Regime.CASE3, "closed form: power law with beta >= 3 is sharp")
        return RegimeVerdict(Regime.CASE1, "closed form: power law with beta < 3 is coarse (Case1)")
    if spec.family == GEOMETRIC:
        return RegimeVerdict(Regime.CASE3, "closed form: geometric has p1^2 = o(sum p^2)")
    ns = _check_grid(n_grid)
    rs = [ratios(instantiate(spec, n)) for n in ns]
    s1 = _fit_slope(ns, [r[0] for r in rs])
    s2 = _fit_slope(ns, [r[1] for r in rs])
    slopes = {"r1": s1, "r2": s2}
    grid = f"n in {ns}, slope_tol={slope_tol}"
    if s1 < -slope_tol:
        return RegimeVerdict(Regime.CASE3, f"heuristic: log r1 slope {s1:.3f} ({grid})", slopes)
    if s2 < -slope_tol:
        return RegimeVerdict(
            Regime.CASE2, f"heuristic: r1 flat (slope {s1:.3f}), log r2 slope {s2:.3f} ({grid})", slopes
        )
    return RegimeVerdict(
        Regime.CASE1, f"heuristic: r1, r2 flat (slopes {s1:.3f}, {s2:.3f}; {grid})", slopes
    )


def _single_pmf_verdict(d: Distribution) -> RegimeVerdict:
    r1, r2 = ratios(d)
    basis = f"single-pmf heuristic: r1={r1:.4g}, r2={r2:.4g}, cutoff {SINGLE_PMF_CUTOFF}"
    if r1 <= SINGLE_PMF_CUTOFF:
        return RegimeVerdict(Regime.CASE3, basis)
    if r2 <= SINGLE_PMF_CUTOFF:
        return RegimeVerdict(Regime.CASE2, basis)
    return RegimeVerdict(Regime.CASE1, basis)


def _verdict_for(d: Distribution) -> RegimeVerdict:
    spec = d.spec
    if spec is None:
        return _single_pmf_verdict(d)
    if spec.is_builtin or callable(spec.weights):
        grid = None
        if not spec.is_builtin:
            grid = [max(2, d.n // 100), max(2, d.n // 10), d.n]
        try:
            return classify_regime(spec, grid)
        except GridError:
            return _single_pmf_verdict(d)
    return _single_pmf_verdict(d)


def predict_threshold(d: Distribution) -> ThresholdReport:
    r1, r2 = ratios(d)
    sharp_value = sharp_m_star(d)
    coarse_value = coarse_m_star(d)
    verdict = _verdict_for(d)
    diagnostics = {
        "r1": r1,
        "r2": r2,
        "f_ratio": d.f_ratio,
        "q_max": d.q_max,
        "m_star_sharp": sharp_value,
        "m_star_coarse": coarse_value,
    }
    if verdict.regime.sharp:
        if d.spec is not None and d.spec.family == UNIFORM:
            # exact: 1 / (n * (1/n)^2) = n
            m_star = Fraction(1) / (d.n * Fraction(1, d.n) ** 2)
            m_star = int(m_star) if m_star.denominator == 1 else float(m_star)
        else:
            m_star = sharp_value
        return ThresholdReport(
            verdict.regime, m_star, True, "inverse_sum_sq", diagnostics, verdict.basis
        )
    return ThresholdReport(
        verdict.regime,
        coarse_value,
        False,
        "coarse_p1_tail",
        diagnostics,
        verdict.basis,
        COARSE_CAVEAT,
    )


def default_snake_size(d: Distribution) -> int:
    """``ceil(ln(f(n))^2)``, at least 2."""
    if d.f_ratio <= 1:
        return 2
    return max(2, math.ceil(math.log(d.f_ratio) ** 2))


# -- bounds -----------------------------------------------------------------


def clamp_probability(x: float) -> float:
    if math.isnan(x):
        return x
    return min(1.0, max(0.0, x))


def _check_q(q_max: float, m: float, *, allow_one: bool):
    if not (0 < q_max < 1 or (allow_one and q_max == 1)):
        raise DomainError(f"q_max must lie in (0, 1{']' if allow_one else ')'}, got {q_max}")
    if m < 0:
        raise DomainError(f"m must be non-negative, got {m}")


def unsat_bound_inclusion_exclusion(q_max: float, m: float, k: int = 2) -> float:
    """Raw lower bound on Pr(unsat) from a full-sign core on the top ``k``
    variables; may be negative when ``q_max^2 * m`` is not small."""
    _check_q(q_max, m, allow_one=False)
    e = math.exp(-q_max * m)
    s = 2**k
    return (1.0 - e) ** s - q_max**2 * 2 ** (2 * k) * m * (1.0 + e) ** s


def unsat_bound_constant_q(q_max: float, m: float, k: int = 2) -> float:
    """Raw lower bound ``2 - (1 + exp(-q_max m))^(2^k)``."""
    _check_q(q_max, m, allow_one=True)
    return 2.0 - (1.0 + math.exp(-q_max * m)) ** (2**k)


def expected_snakes_lower_bound(d: Distribution, m: float, t: int) -> float:
    """Lower bound on the expected number of size-``t`` snake sequences whose
    clause set appears exactly once in ``m`` clauses drawn from ``d``."""
    if t < 2:
        raise DomainError(f"snake size t must be >= 2, got {t}")
    if not m > 2 * t:
        raise DomainError(f"need m > 2t, got m={m}, t={t}")
    if not 2 * t * d.q_max < 1:
        raise DomainError(f"need 2t*q_max < 1, got {2 * t * d.q_max}")
    tail = d.sum_sq_tail - (2 * t - 2) * d.p2**2
    if tail <= 0:
        return 0.0
    free = m - 2 * t
    q = d.q_max
    log_value = (
        2 * t * math.log(free)
        + 2 * t * math.log(d.c_const)
        - free * 2 * t * q / (1 - 2 * t * q)
        + math.log(d.sum_p4)
        + (2 * t - 2) * math.log(tail)
    )
    return 0.5 * math.exp(log_value)


@dataclass(frozen=True)
class BicycleBound:
    value: float
    divergent: bool
    ratio: float

    def to_json(self) -> dict:
        return {
            "value": None if math.isinf(self.value) else self.value,
            "divergent": self.divergent,
            "ratio": self.ratio,
        }


def bicycle_expectation_upper_bound(d: Distribution, m: float, t_max: int) -> BicycleBound:
    """Truncated first-moment sum bounding the expected bicycle count, hence
    Pr(unsat) by Markov.  Divergent (``C m sum p^2 >= 1``) inputs give inf."""
    if m < 0:
        raise DomainError(f"m must be non-negative, got {m}")
    cm = d.c_const * m
    ratio = cm * d.sum_sq
    if ratio >= 1:
        return BicycleBound(math.inf, True, ratio)
    terms = [cm * ratio**t * t * t * d.p1**2 for t in range(2, t_max + 1)]
    return BicycleBound(2.0 * math.fsum(terms), False, ratio)


def all_bounds(d: Distribution, m: float, *, t: int | None = None, t_max: int | None = None) -> dict:
    """Every bound at one ``(d, m)``, raw and clamped, for reporting."""
    q = d.q_max
    t = default_snake_size(d) if t is None else t
    t_max = d.n if t_max is None else t_max
    out = {}
    for name, fn in (
        ("inclusion_exclusion", lambda: unsat_bound_inclusion_exclusion(q, m, 2)),
        ("constant_q", lambda: unsat_bound_constant_q(q, m, 2)),
    ):
        raw = fn()
        out[name] = {"raw": raw, "clamped": clamp_probability(raw)}
    try:
        snakes = expected_snakes_lower_bound(d, m, t)
        out["expected_snakes"] = {"t": t, "value": snakes}
    except DomainError as exc:
        out["expected_snakes"] = {"t": t, "value": None, "error": str(exc)}
    bike = bicycle_expectation_upper_bound(d, m, t_max)
    out["bicycle"] = {"t_max": t_max, **bike.to_json(), "clamped": clamp_probability(bike.value)}
    return out
