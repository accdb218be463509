"""Variable-probability ensembles and the scalar quantities derived from them.

A :class:`Distribution` is one member of an ensemble: ``n`` positive
probabilities sorted non-increasing, plus the moment sums every threshold
formula needs.  An :class:`EnsembleSpec` names a family (uniform, power law,
geometric, explicit weights) that can be instantiated at any ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import DistributionError

UNIFORM = "uniform"
POWERLAW = "powerlaw"
GEOMETRIC = "geometric"
EXPLICIT = "explicit"

BUILTIN_FAMILIES = (UNIFORM, POWERLAW, GEOMETRIC)


def _fsum_ascending(values: np.ndarray) -> float:
    # math.fsum is exactly rounded; feeding smallest terms first keeps the
    # partials list short for long power-law tails.
    return math.fsum(np.sort(values).tolist())


@dataclass(frozen=True)
class EnsembleSpec:
    """A family of distributions indexed by the number of variables.

    Use the ``uniform``/``power_law``/``geometric``/``explicit`` constructors
    rather than building instances directly.  ``weights`` for an explicit
    ensemble is either a fixed sequence (usable at exactly one ``n``) or a
    callable ``n -> weights`` describing an arbitrary family.
    """

    family: str
    param: float | None = None
    weights: tuple[float, ...] | Callable[[int], Sequence[float]] | None = field(
        default=None, compare=False
    )

    def __post_init__(self):
        if self.family == POWERLAW:
            if self.param is None or not self.param > 2:
                raise DistributionError("beta", f"power law requires beta > 2, got {self.param}")
        elif self.family == GEOMETRIC:
            if self.param is None or not self.param > 1:
                raise DistributionError("b", f"geometric requires b > 1, got {self.param}")
        elif self.family == EXPLICIT:
            if self.weights is None:
                raise DistributionError("weights", "explicit ensemble needs weights")
            if not callable(self.weights):
                w = np.asarray(self.weights, dtype=float)
                if w.ndim != 1 or w.size == 0:
                    raise DistributionError("weights", "expected a non-empty 1-d sequence")
                if not np.all(np.isfinite(w)) or np.any(w <= 0):
                    bad = int(np.flatnonzero(~(np.isfinite(w) & (w > 0)))[0])
                    raise DistributionError("weights", f"weight #{bad + 1} is not a positive real")
        elif self.family != UNIFORM:
            raise DistributionError("family", f"unknown family {self.family!r}")

    @classmethod
    def uniform(cls) -> "EnsembleSpec":
        return cls(UNIFORM)

    @classmethod
    def power_law(cls, beta: float) -> "EnsembleSpec":
        return cls(POWERLAW, float(beta))

    @classmethod
    def geometric(cls, b: float) -> "EnsembleSpec":
        return cls(GEOMETRIC, float(b))

    @classmethod
    def explicit(cls, weights) -> "EnsembleSpec":
        if not callable(weights):
            weights = tuple(float(w) for w in weights)
        return cls(EXPLICIT, None, weights)

    @property
    def is_builtin(self) -> bool:
        return self.family in BUILTIN_FAMILIES

    @property
    def fixed_size(self) -> int | None:
        """Length of a fixed explicit weight vector, else ``None``."""
        if self.family == EXPLICIT and not callable(self.weights):
            return len(self.weights)
        return None

    def __str__(self) -> str:
        if self.family == UNIFORM:
            return "uniform"
        if self.family == POWERLAW:
            return f"powerlaw:{self.param:g}"
        if self.family == GEOMETRIC:
            return f"geometric:{self.param:g}"
        return "explicit"


def parse_dist(text: str) -> EnsembleSpec:
    """Parse the ``--dist`` syntax: ``uniform``, ``powerlaw:BETA``,
    ``geometric:B`` or ``file:PATH``."""
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    try:
        if name == UNIFORM and not arg:
            return EnsembleSpec.uniform()
        if name == POWERLAW:
            return EnsembleSpec.power_law(float(arg))
        if name == GEOMETRIC:
            return EnsembleSpec.geometric(float(arg))
    except ValueError as exc:
        if isinstance(exc, DistributionError):
            raise
        raise DistributionError("dist", f"cannot parse parameter in {text!r}") from None
    if name == "file" and arg:
        return EnsembleSpec.explicit(load_weights(arg))
    raise DistributionError("dist", f"unrecognised distribution {text!r}")


def load_weights(path: str | Path) -> list[float]:
    """Read one positive weight per line; ``#`` starts a comment."""
    weights = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            w = float(line)
        except ValueError:
            raise DistributionError("weights", f"{path}:{lineno}: not a number: {line!r}") from None
        if not (math.isfinite(w) and w > 0):
            raise DistributionError("weights", f"{path}:{lineno}: weight must be positive, got {line}")
        weights.append(w)
    if not weights:
        raise DistributionError("weights", f"{path}: no weights found")
    return weights


@dataclass(frozen=True, eq=False)
class Distribution:
    """One sorted probability vector with its precomputed moment sums.

    ``labels[i]`` is the caller's original 1-based index of sorted position
    ``i + 1``; for built-in families it is the identity.
    """

    p: np.ndarray
    labels: np.ndarray
    spec: EnsembleSpec | None
    sum_sq: float
    sum_sq_tail: float
    sum_p4: float
    c_const: float
    f_ratio: float
    q_max: float

    @property
    def n(self) -> int:
        return int(self.p.size)

    @property
    def p1(self) -> float:
        return float(self.p[0])

    @property
    def p2(self) -> float:
        return float(self.p[1])

    @classmethod
    def from_probabilities(cls, p, *, spec: EnsembleSpec | None = None, labels=None) -> "Distribution":
        """Build from a probability vector that already sums to one.

        Deviations from one up to ``1e-12 * n`` are renormalised away;
        anything larger is rejected.  The vector is sorted non-increasing.
        """
        p = np.array(p, dtype=float)
        if p.ndim != 1:
            raise DistributionError("p", "expected a 1-d probability vector")
        n = p.size
        if n < 2:
            raise DistributionError("n", f"need at least 2 variables, got {n}")
        if not np.all(np.isfinite(p)) or np.any(p <= 0):
            raise DistributionError("p", "probabilities must be positive and finite")
        total = math.fsum(p.tolist())
        if abs(total - 1.0) > 1e-12 * n:
            raise DistributionError("p", f"probabilities sum to {total!r}, not 1")
        p = p / total
        order = np.argsort(-p, kind="stable")
        p = p[order]
        if labels is None:
            labels = order + 1
        else:
            labels = np.asarray(labels, dtype=np.int64)[order]
        p.setflags(write=False)
        labels = np.asarray(labels, dtype=np.int64)
        labels.setflags(write=False)

        p1, p2 = float(p[0]), float(p[1])
        sum_sq = _fsum_ascending(p * p)
        sum_sq_tail = sum_sq - p1 * p1
        sum_p4 = _fsum_ascending(p**4)
        # 1 - sum p^2 = sum p_i (1 - p_i); use the tail sum for 1 - p_1 so a
        # dominant p_1 near 1 does not cancel.
        one_minus = np.concatenate(([math.fsum(p[1:].tolist())], 1.0 - p[1:]))
        c_const = 1.0 / _fsum_ascending(p * one_minus)
        return cls(
            p=p,
            labels=labels,
            spec=spec,
            sum_sq=sum_sq,
            sum_sq_tail=sum_sq_tail,
            sum_p4=sum_p4,
            c_const=c_const,
            f_ratio=sum_sq / (p1 * p1),
            q_max=c_const * 0.5 * p1 * p2,
        )

    def moment_sum(self, exponent: int, from_index: int = 1) -> float:
        return moment_sum(self, exponent, from_index)

    def normalizer(self, k: int = 2) -> float:
        """The constant C making clause probabilities sum to one for width k."""
        return normalizer(self, k)

    def max_clause_probability(self, k: int = 2) -> float:
        if k == 2:
            return self.q_max
        return clause_probability(self, range(1, k + 1))

    def __repr__(self) -> str:
        src = str(self.spec) if self.spec is not None else "custom"
        return f"Distribution({src}, n={self.n}, sum_sq={self.sum_sq:.6g})"


def _powerlaw_pmf(beta: float, n: int) -> np.ndarray:
    i = np.arange(1, n + 1, dtype=float)
    w = (n / i) ** (1.0 / (beta - 1.0))
    return w / _fsum_ascending(w)


def _geometric_pmf(b: float, n: int) -> np.ndarray:
    # b(1 - b^{-1/n})/(b - 1) * b^{-(i-1)/n}, with expm1 for small 1/n.
    lnb = math.log(b)
    head = b * -math.expm1(-lnb / n) / (b - 1.0)
    p = head * np.exp(-lnb * np.arange(n, dtype=float) / n)
    return p / _fsum_ascending(p)


def instantiate(spec: EnsembleSpec, n: int) -> Distribution:
    """The ``n``-th member of the ensemble."""
    if isinstance(n, bool) or int(n) != n:
        raise DistributionError("n", f"expected an integer, got {n!r}")
    n = int(n)
    if n < 2:
        raise DistributionError("n", f"need at least 2 variables, got {n}")
    if spec.family == UNIFORM:
        p = np.full(n, 1.0 / n)
    elif spec.family == POWERLAW:
        p = _powerlaw_pmf(spec.param, n)
    elif spec.family == GEOMETRIC:
        p = _geometric_pmf(spec.param, n)
    else:
        weights = spec.weights(n) if callable(spec.weights) else spec.weights
        w = np.asarray(weights, dtype=float)
        if w.size != n:
            raise DistributionError("n", f"explicit ensemble has {w.size} weights, asked for n={n}")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise DistributionError("weights", "weights must be positive reals")
        p = w / _fsum_ascending(w)
    return Distribution.from_probabilities(p, spec=spec)


def moment_sum(d: Distribution, exponent: int, from_index: int = 1) -> float:
    """``sum_{i >= from_index} p_i ** exponent``, exactly rounded."""
    if exponent not in range(1, 8):
        raise DistributionError("exponent", f"expected 1..7, got {exponent}")
    if from_index not in (1, 2):
        raise DistributionError("from_index", f"expected 1 or 2, got {from_index}")
    tail = d.p[from_index - 1:]
    return _fsum_ascending(tail**exponent)


def elementary_symmetric(d: Distribution, k: int) -> float:
    """e_k(p_1..p_n) via Newton's identities on the power sums."""
    power = [0.0] + [moment_sum(d, j) for j in range(1, k + 1)]
    e = [1.0]
    for j in range(1, k + 1):
        acc = math.fsum((-1) ** (i - 1) * e[j - i] * power[i] for i in range(1, j + 1))
        e.append(acc / j)
    return e[k]


def normalizer(d: Distribution, k: int = 2) -> float:
    if k < 2 or k > 7:
        raise DistributionError("k", f"arity must be in 2..7, got {k}")
    if k > d.n:
        raise DistributionError("k", f"arity {k} exceeds n={d.n}")
    if k == 2:
        return d.c_const
    return 1.0 / (math.factorial(k) * elementary_symmetric(d, k))


def clause_probability(d: Distribution, variables, k: int | None = None) -> float:
    """Probability that one drawn clause has exactly this variable set and a
    fixed sign pattern: ``C * k!/2^k * prod p_i``."""
    vs = [int(v) for v in variables]
    if k is None:
        k = len(vs)
    if len(vs) != k:
        raise DistributionError("variables", f"expected {k} indices, got {len(vs)}")
    if len(set(vs)) != k:
        raise DistributionError("variables", f"repeated variable index in {vs}")
    for v in vs:
        if not 1 <= v <= d.n:
            raise DistributionError("variables", f"index {v} outside [1, {d.n}]")
    prod = math.prod(float(d.p[v - 1]) for v in vs)
    return normalizer(d, k) * math.factorial(k) / 2**k * prod
