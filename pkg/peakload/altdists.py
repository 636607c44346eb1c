"""
Competing tail families: exponential, lognormal and gamma, each truncated
at the power-law's x_min and put through the same KS / Monte-Carlo test.

The truncated model survival is S(x) = W * S_family(x) / S_family(x_min)
for x >= x_min. Parameters are maximum-likelihood estimates of the
truncated family, fitted on values rescaled by x_min.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from .exceptions import (
    DegenerateTail,
    FitDiverged,
    FitMismatch,
    InsufficientTail,
    InvalidParameter,
    PeakLoadError,
)
from .gof import (
    DEFAULT_REPLICATES,
    DEFAULT_SIGNIFICANCE,
    MODEL_POWER_LAW,
    check_replicates,
    check_significance,
    summarize_replicates,
)
from .replicates import STREAM_ALT, replicate_rng, run_replicates, semiparametric_sample
from .tailscan import ks_distance_sorted

logger = logging.getLogger(__name__)


FAMILY_EXPONENTIAL = "exponential"
FAMILY_LOGNORMAL = "lognormal"
FAMILY_GAMMA = "gamma"

FAMILY_CHOICES = [
    (FAMILY_EXPONENTIAL, "Exponential (rate)"),
    (FAMILY_LOGNORMAL, "Lognormal (log-mean, log-sd)"),
    (FAMILY_GAMMA, "Gamma (shape, scale)"),
]

MIN_ALT_TAIL = 10
GRADIENT_TOL = 1e-8

# Objective value used where the truncated likelihood is not finite.
_PENALTY = 1e10


@dataclass(frozen=True)
class AltFit:
    family: str
    params: dict
    x_min: float
    w: float
    ks_distance: float
    n_tail: int = None
    n_total: int = None
    log_likelihood: float = None

    def __post_init__(self):
        if any(not (math.isfinite(v) and v > 0) for k, v in self.params.items() if k != "log_mean"):
            raise InvalidParameter(f"{self.family} parameters must be positive: {self.params}.")

    def distribution(self):
        return family_distribution(self.family, self.params)

    def survival(self, x):
        return self.w * conditional_survival(self.distribution(), self.x_min, x)

    def to_dict(self):
        return {
            "family": self.family,
            "params": dict(self.params),
            "x_min": self.x_min,
            "w": self.w,
            "ks_distance": self.ks_distance,
            "n_tail": self.n_tail,
            "n_total": self.n_total,
            "log_likelihood": self.log_likelihood,
        }


# =========================================================
# Family helpers
# =========================================================
def family_distribution(family, params):
    if family == FAMILY_EXPONENTIAL:
        return stats.expon(scale=1.0 / params["rate"])
    if family == FAMILY_LOGNORMAL:
        return stats.lognorm(s=params["log_sd"], scale=math.exp(params["log_mean"]))
    if family == FAMILY_GAMMA:
        return stats.gamma(a=params["shape"], scale=params["scale"])
    raise InvalidParameter(f"Unknown family {family!r}.")


def conditional_survival(dist, x_min, x):
    """S_family(x) / S_family(x_min), computed on the log scale."""
    x = np.asarray(x, dtype=float)
    return np.exp(dist.logsf(x) - dist.logsf(x_min))


def truncated_log_likelihood(family, params, tail_values, x_min):
    dist = family_distribution(family, params)
    tail = np.asarray(tail_values, dtype=float)
    return float(dist.logpdf(tail).sum() - tail.size * dist.logsf(x_min))


def _lognormal_objective(theta, y):
    mu, log_sd = theta
    dist = stats.lognorm(s=math.exp(log_sd), scale=math.exp(mu))
    value = -(dist.logpdf(y).mean() - dist.logsf(1.0))
    return value if math.isfinite(value) else _PENALTY


def _gamma_objective(theta, y):
    log_shape, log_scale = theta
    dist = stats.gamma(a=math.exp(log_shape), scale=math.exp(log_scale))
    value = -(dist.logpdf(y).mean() - dist.logsf(1.0))
    return value if math.isfinite(value) else _PENALTY


def _lognormal_starts(y):
    logs = np.log(y)
    sd = max(float(logs.std()), 1e-3)
    mean = float(logs.mean())
    return [
        (mean, math.log(sd)),
        (mean - sd, math.log(2 * sd)),
        (0.0, 0.0),
    ]


def _gamma_starts(y):
    mean = float(y.mean())
    var = max(float(y.var()), 1e-12)
    shifted = max(mean - 1.0, 1e-6)
    return [
        (math.log(mean * mean / var), math.log(var / mean)),
        (0.0, math.log(shifted)),
        (math.log(2.0), math.log(mean / 2.0)),
    ]


_LOG_BOUNDS = {
    FAMILY_LOGNORMAL: [(-50.0, 50.0), (math.log(1e-4), math.log(1e2))],
    FAMILY_GAMMA: [(math.log(1e-4), math.log(1e4)), (math.log(1e-6), math.log(1e6))],
}


def _maximize(family, objective, starts, y):
    """
    Bounded quasi-Newton from every start, Nelder-Mead polish when the
    line search stalls; the best converged optimum wins.
    """
    bounds = _LOG_BOUNDS[family]
    best = None
    diagnostics = []

    for start in starts:
        x0 = np.clip(start, [b[0] for b in bounds], [b[1] for b in bounds])
        result = optimize.minimize(
            objective,
            x0,
            args=(y,),
            method="L-BFGS-B",
            bounds=bounds,
            options={"gtol": GRADIENT_TOL, "maxiter": 2000},
        )
        if not result.success:
            result = optimize.minimize(
                objective,
                result.x,
                args=(y,),
                method="Nelder-Mead",
                bounds=bounds,
                options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
            )

        diagnostics.append(
            {"start": list(map(float, start)), "fun": float(result.fun), "message": str(result.message)}
        )
        if result.success and result.fun < _PENALTY and (best is None or result.fun < best.fun):
            best = result

    if best is None:
        raise FitDiverged(
            f"Truncated {family} fit did not converge from any start.",
            family=family,
            diagnostics={"starts": diagnostics},
        )
    return best.x


# =========================================================
# Fitting
# =========================================================
def fit_alt(tail_values, x_min, family, w=1.0, n_total=None):
    tail = np.sort(np.asarray(tail_values, dtype=float))
    if tail.size < MIN_ALT_TAIL:
        raise InsufficientTail(f"Need at least {MIN_ALT_TAIL} tail values, got {tail.size}.")
    if tail[0] < x_min:
        raise InvalidParameter("Every tail value must be >= x_min.")

    y = tail / x_min

    if family == FAMILY_EXPONENTIAL:
        # memoryless: the truncated MLE is the rate of the excesses
        excess = float(y.mean()) - 1.0
        if excess <= 0:
            raise DegenerateTail(f"All {tail.size} tail values equal x_min.")
        params = {"rate": 1.0 / excess / x_min}
    elif family == FAMILY_LOGNORMAL:
        mu, log_sd = _maximize(family, _lognormal_objective, _lognormal_starts(y), y)
        params = {"log_mean": float(mu + math.log(x_min)), "log_sd": float(math.exp(log_sd))}
    elif family == FAMILY_GAMMA:
        log_shape, log_scale = _maximize(family, _gamma_objective, _gamma_starts(y), y)
        params = {"shape": float(math.exp(log_shape)), "scale": float(math.exp(log_scale) * x_min)}
    else:
        raise InvalidParameter(f"Unknown family {family!r}.")

    dist = family_distribution(family, params)
    if not np.isfinite(dist.logsf(x_min)):
        raise FitDiverged(
            f"Fitted {family} has no mass above x_min={x_min:g}.",
            family=family,
            diagnostics={"params": params},
        )

    d = ks_distance_sorted(tail, lambda v: conditional_survival(dist, x_min, v))

    return AltFit(
        family=family,
        params=params,
        x_min=float(x_min),
        w=float(w),
        ks_distance=d,
        n_tail=int(tail.size),
        n_total=None if n_total is None else int(n_total),
        log_likelihood=truncated_log_likelihood(family, params, tail, x_min),
    )


# =========================================================
# Sampling
# =========================================================
def sample_truncated(family, params, x_min, count, rng):
    """Inverse-transform variates of the family conditioned on X >= x_min."""
    rng = np.random.default_rng(rng)
    count = int(count)

    if family == FAMILY_EXPONENTIAL:
        return x_min + rng.exponential(1.0 / params["rate"], size=count)

    dist = family_distribution(family, params)
    mass = float(dist.sf(x_min))
    if mass <= 0:
        raise FitDiverged(
            f"Fitted {family} has no mass above x_min={x_min:g}.",
            family=family,
            diagnostics={"params": params},
        )
    u = rng.random(count)
    return np.maximum(dist.isf((1.0 - u) * mass), x_min)


# =========================================================
# Monte-Carlo GOF
# =========================================================
def _alt_replicate(payload, seed_seq):
    body, size, tail_probability, family, params, x_min = payload
    rng = replicate_rng(seed_seq)

    sample = semiparametric_sample(
        body,
        size,
        tail_probability,
        lambda k, r: sample_truncated(family, params, x_min, k, r),
        rng,
    )
    try:
        return fit_alt(sample[sample >= x_min], x_min, family).ks_distance
    except PeakLoadError:
        return None


def gof_alt(
    series,
    fit,
    replicates=DEFAULT_REPLICATES,
    seed=0,
    significance=DEFAULT_SIGNIFICANCE,
    workers=1,
):
    check_replicates(replicates)
    check_significance(significance)

    n = len(series)
    if fit.n_total is not None and fit.n_total != n:
        raise FitMismatch(f"Fit was produced from N={fit.n_total}, series has N={n}.")

    values = series.values
    body = np.sort(values[values < fit.x_min])
    tail_probability = np.count_nonzero(values >= fit.x_min) / n
    payload = (body, n, tail_probability, fit.family, dict(fit.params), fit.x_min)

    stream = STREAM_ALT * 10 + [f for f, _ in FAMILY_CHOICES].index(fit.family)
    distances = run_replicates(
        _alt_replicate,
        payload,
        seed=seed,
        count=replicates,
        stream=stream,
        workers=workers,
    )

    result = summarize_replicates(
        fit.ks_distance, distances, replicates, significance, seed, fit.family
    )
    logger.info(
        "%s GOF: D=%.5f p=%.4f over %d replicates (reject=%s).",
        fit.family, result.observed_d, result.p_value, replicates, result.reject,
    )
    return result


def compare_models(
    series,
    fit,
    families,
    replicates=DEFAULT_REPLICATES,
    seed=0,
    significance=DEFAULT_SIGNIFICANCE,
    power_law_gof=None,
    workers=1,
):
    """
    Comparative rows (model, params, ks_distance, p_value, reject), power
    law first, every family fitted on the power law's tail.
    """
    if not families:
        raise InvalidParameter("At least one alternative family is required.")

    rows = []
    if power_law_gof is not None:
        rows.append({
            "model": MODEL_POWER_LAW,
            "params": {"x_min": fit.x_min, "alpha": fit.alpha, "w": fit.w},
            "ks_distance": fit.ks_distance,
            "p_value": power_law_gof.p_value,
            "reject": power_law_gof.reject,
        })

    tail = series.values[series.values >= fit.x_min]
    for family in families:
        alt = fit_alt(tail, fit.x_min, family, w=fit.w, n_total=len(series))
        result = gof_alt(
            series, alt, replicates=replicates, seed=seed,
            significance=significance, workers=workers,
        )
        rows.append({
            "model": family,
            "params": dict(alt.params),
            "ks_distance": alt.ks_distance,
            "p_value": result.p_value,
            "reject": result.reject,
        })

    return rows
