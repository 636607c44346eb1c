"""
Monte-Carlo goodness-of-fit test for the power-law tail.

Synthetic samples of the original size are drawn from the fitted model
(observed body resampled below x_min, power-law variates above it), each
one is refitted from scratch, and the p-value is the share of synthetic KS
distances at least as large as the observed one. Large observed distances
are evidence against the model.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .ccdf import PeakSeries
from .exceptions import FitMismatch, InvalidParameter, PeakLoadError, TooFewReplicates
from .powerlaw import sample_tail
from .replicates import STREAM_GOF, replicate_rng, run_replicates, semiparametric_sample
from .tailscan import (
    CANDIDATES_ALL_UNIQUE,
    DEFAULT_MIN_TAIL,
    DEFAULT_QUANTILE_CANDIDATES,
    scan_xmin,
)

logger = logging.getLogger(__name__)


DEFAULT_SIGNIFICANCE = 0.10
DEFAULT_REPLICATES = 2500
MIN_REPLICATES = 100

MODEL_POWER_LAW = "power_law"

# Distance recorded for a synthetic sample that could not be refitted.
FAILED_REPLICATE_D = 1.0


@dataclass(frozen=True)
class GofResult:
    p_value: float
    replicates: int
    observed_d: float
    replicate_ds: tuple
    significance: float
    reject: bool
    seed: int
    model: str = MODEL_POWER_LAW
    failed: int = 0

    def to_dict(self, include_replicates=False):
        data = {
            "model": self.model,
            "p_value": self.p_value,
            "replicates": self.replicates,
            "observed_d": self.observed_d,
            "significance": self.significance,
            "reject": self.reject,
            "seed": self.seed,
            "failed": self.failed,
        }
        if include_replicates:
            data["replicate_ds"] = list(self.replicate_ds)
        return data


def p_value_from(observed_d, replicate_ds):
    replicate_ds = np.asarray(replicate_ds, dtype=float)
    return int(np.count_nonzero(replicate_ds >= observed_d)) / replicate_ds.size


def check_replicates(replicates):
    if replicates < MIN_REPLICATES:
        raise TooFewReplicates(
            f"At least {MIN_REPLICATES} replicates are required, got {replicates}."
        )


def check_significance(significance):
    if not 0 < significance < 1:
        raise InvalidParameter(f"Significance must lie in (0, 1), got {significance!r}.")


def summarize_replicates(observed_d, distances, replicates, significance, seed, model):
    """Score failed refits, sort, and build the GofResult."""
    failed = sum(1 for d in distances if d is None)
    if failed:
        logger.warning(
            "%d of %d synthetic samples could not be refitted (%s); scored as D=%g.",
            failed, replicates, model, FAILED_REPLICATE_D,
        )

    replicate_ds = tuple(sorted(FAILED_REPLICATE_D if d is None else float(d) for d in distances))
    p_value = p_value_from(observed_d, replicate_ds)

    return GofResult(
        p_value=p_value,
        replicates=int(replicates),
        observed_d=float(observed_d),
        replicate_ds=replicate_ds,
        significance=float(significance),
        reject=p_value < significance,
        seed=int(seed),
        model=model,
        failed=failed,
    )


def _power_law_replicate(payload, seed_seq):
    body, size, tail_probability, x_min, alpha, min_tail, candidate_rule, quantile_candidates = payload
    rng = replicate_rng(seed_seq)

    sample = semiparametric_sample(
        body,
        size,
        tail_probability,
        lambda k, r: sample_tail(x_min, alpha, k, r),
        rng,
    )

    try:
        scan = scan_xmin(
            PeakSeries.from_values(sample),
            min_tail=min_tail,
            candidate_rule=candidate_rule,
            quantile_candidates=quantile_candidates,
        )
    except PeakLoadError:
        return None

    return scan.best.ks_distance


def gof_pvalue(
    series,
    fit,
    replicates=DEFAULT_REPLICATES,
    seed=0,
    significance=DEFAULT_SIGNIFICANCE,
    min_tail=DEFAULT_MIN_TAIL,
    candidate_rule=CANDIDATES_ALL_UNIQUE,
    quantile_candidates=DEFAULT_QUANTILE_CANDIDATES,
    workers=1,
):
    check_replicates(replicates)
    check_significance(significance)

    n = len(series)
    if fit.n_total != n or fit.n_tail is None or fit.ks_distance is None:
        raise FitMismatch(
            f"Fit was produced from N={fit.n_total}, series has N={n}.",
        )

    values = series.values
    body = np.sort(values[values < fit.x_min])
    payload = (
        body,
        n,
        fit.n_tail / n,
        fit.x_min,
        fit.alpha,
        min_tail,
        candidate_rule,
        quantile_candidates,
    )

    distances = run_replicates(
        _power_law_replicate,
        payload,
        seed=seed,
        count=replicates,
        stream=STREAM_GOF,
        workers=workers,
    )

    result = summarize_replicates(
        fit.ks_distance, distances, replicates, significance, seed, MODEL_POWER_LAW
    )
    logger.info(
        "Power-law GOF: D=%.5f p=%.4f over %d replicates (reject=%s).",
        result.observed_d, result.p_value, replicates, result.reject,
    )
    return result
