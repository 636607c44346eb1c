"""
Truncated power-law tail model.

Above the threshold x_min the density is

    p(x) = W (alpha - 1) / x_min * (x / x_min) ** -alpha

and the survival function is S(x) = W (x / x_min) ** -(alpha - 1), where
W = S(x_min) is the tail's share of all observations. Below x_min the model
is undefined; callers fall back to the empirical CCDF there.

All estimation is for the continuous case.
"""

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import (
    BelowTail,
    DegenerateTail,
    InsufficientTail,
    InvalidAlpha,
    InvalidParameter,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PowerLawFit:
    x_min: float
    alpha: float
    w: float
    n_tail: int = None
    ks_distance: float = None
    n_total: int = None

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and self.x_min > 0):
            raise InvalidParameter(f"x_min must be positive, got {self.x_min!r}.")
        if not (math.isfinite(self.alpha) and self.alpha > 1):
            raise InvalidAlpha(f"alpha must be > 1, got {self.alpha!r}.")
        if not 0 < self.w <= 1:
            raise InvalidParameter(f"W must lie in (0, 1], got {self.w!r}.")
        if self.ks_distance is not None and not 0 <= self.ks_distance <= 1:
            raise InvalidParameter(f"KS distance must lie in [0, 1], got {self.ks_distance!r}.")
        if self.n_tail is not None and self.n_total is not None:
            if not 0 < self.n_tail <= self.n_total:
                raise InvalidParameter("Tail size must lie in [1, N].")
            if not math.isclose(self.w, self.n_tail / self.n_total, rel_tol=1e-12):
                raise InvalidParameter("W must equal n_tail / n_total.")

    @property
    def alpha_stderr(self):
        if not self.n_tail:
            return None
        return alpha_standard_error(self.alpha, self.n_tail)

    def to_dict(self):
        data = asdict(self)
        data["alpha_stderr"] = self.alpha_stderr
        return data

    @classmethod
    def from_dict(cls, data):
        return cls(
            x_min=float(data["x_min"]),
            alpha=float(data["alpha"]),
            w=float(data["w"]),
            n_tail=None if data.get("n_tail") is None else int(data["n_tail"]),
            ks_distance=None if data.get("ks_distance") is None else float(data["ks_distance"]),
            n_total=None if data.get("n_total") is None else int(data["n_total"]),
        )


# =========================================================
# Estimation
# =========================================================
def mle_alpha(tail_values, x_min):
    """
    Closed-form continuous MLE: alpha = 1 + n / sum(ln(x_i / x_min)).

    This is the unique maximizer of log_likelihood() at fixed x_min.
    """
    tail = np.asarray(tail_values, dtype=float)
    n = tail.size

    if n < 2:
        raise InsufficientTail(f"Need at least 2 tail values, got {n}.")
    if np.any(tail < x_min):
        raise InvalidParameter("Every tail value must be >= x_min.")

    log_sum = float(np.log(tail / x_min).sum())
    if log_sum <= 0:
        raise DegenerateTail(f"All {n} tail values equal x_min={x_min!r}.")

    return 1.0 + n / log_sum


def log_likelihood(tail_values, x_min, alpha):
    tail = np.asarray(tail_values, dtype=float)
    n = tail.size
    return float(
        n * math.log(alpha - 1)
        - n * math.log(x_min)
        - alpha * np.log(tail / x_min).sum()
    )


def alpha_standard_error(alpha, n):
    return (alpha - 1) / math.sqrt(n)


# =========================================================
# Evaluation
# =========================================================
def _check_in_tail(fit, x):
    x = float(x)
    if not math.isfinite(x):
        raise InvalidParameter(f"Load value must be finite, got {x!r}.")
    if x < fit.x_min:
        raise BelowTail(
            f"x={x:g} is below x_min={fit.x_min:g}; the power-law model is undefined there. "
            "Use the empirical CCDF (survival_at / the ccdf command) for sub-threshold loads.",
            x=x,
            x_min=fit.x_min,
        )
    return x


def tail_ccdf(fit, x):
    x = _check_in_tail(fit, x)
    return fit.w * (x / fit.x_min) ** -(fit.alpha - 1)


def tail_pdf(fit, x):
    x = _check_in_tail(fit, x)
    return fit.w * (fit.alpha - 1) / fit.x_min * (x / fit.x_min) ** -fit.alpha


def exceedance_query(fit, x, ci=None):
    """
    P(peak >= x) from the fitted tail, plus the pointwise band at x when a
    bootstrap report is supplied (None when the band is unavailable there).
    """
    probability = tail_ccdf(fit, x)

    interval = None
    if ci is not None:
        interval = ci.band_at(float(x))
        if interval is None:
            logger.warning("No confidence band available at x=%g.", float(x))

    return probability, interval


# =========================================================
# Sampling
# =========================================================
def tail_quantile(u, x_min, alpha):
    """Inverse transform: x = x_min * (1 - u) ** (-1 / (alpha - 1))."""
    u = np.asarray(u, dtype=float)
    return x_min * (1.0 - u) ** (-1.0 / (alpha - 1.0))


def sample_tail(x_min, alpha, count, rng):
    if not alpha > 1:
        raise InvalidAlpha(f"alpha must be > 1, got {alpha!r}.")
    if count < 1:
        raise InvalidParameter(f"count must be >= 1, got {count!r}.")

    rng = np.random.default_rng(rng)
    u = rng.random(int(count))
    return tail_quantile(u, x_min, alpha)
