"""Binomial interval estimates and a small logistic fit for crossing points."""

from __future__ import annotations

import math
from statistics import NormalDist

import numpy as np
from scipy import optimize, special


def z_value(confidence: float) -> float:
    if not 0 < confidence < 1:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    return NormalDist().inv_cdf(0.5 + confidence / 2)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return 0.0, 1.0
    if not 0 <= successes <= trials:
        raise ValueError(f"need 0 <= successes <= trials, got {successes}/{trials}")
    z = z_value(confidence)
    p = successes / trials
    z2n = z * z / trials
    centre = (p + z2n / 2) / (1 + z2n)
    half = z / (1 + z2n) * math.sqrt(p * (1 - p) / trials + z2n / (4 * trials))
    lo, hi = max(0.0, centre - half), min(1.0, centre + half)
    # keep p inside despite rounding at the 0/1 edges
    return min(lo, p), max(hi, p)


def logistic_crossing(
    m: np.ndarray, successes: np.ndarray, trials: np.ndarray, level: float = 0.5, ridge: float = 1e-6
) -> float | None:
    """Binomial MLE of ``p(m) = expit(a + b log m)``; returns ``m`` where the
    fit equals ``level``, or ``None`` if the fit is not decreasing."""
    x = np.log(np.asarray(m, float))
    s = np.asarray(successes, float)
    t = np.asarray(trials, float)
    if x.size < 2 or np.ptp(x) == 0:
        return None
    x0, scale = x.mean(), max(np.ptp(x), 1e-12)
    u = (x - x0) / scale

    def nll(theta):
        eta = theta[0] + theta[1] * u
        # -sum s*log(sig) + (t-s)*log(1-sig) = sum t*log1p(e^eta) - s*eta
        return float(np.sum(t * np.logaddexp(0, eta) - s * eta)) + ridge * theta[1] ** 2

    def grad(theta):
        eta = theta[0] + theta[1] * u
        r = t * special.expit(eta) - s
        return np.array([r.sum(), (r * u).sum() + 2 * ridge * theta[1]])

    res = optimize.minimize(nll, np.array([0.0, -1.0]), jac=grad, method="BFGS")
    a, b = res.x
    if not np.all(np.isfinite(res.x)) or b >= 0:
        return None
    u_star = (special.logit(level) - a) / b
    return float(math.exp(x0 + u_star * scale))
