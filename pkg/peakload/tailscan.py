"""
Threshold selection for the power-law tail.

Every admissible observed value is tried as x_min: the data below it is
truncated, alpha is estimated by maximum likelihood on the rest, and the
KS distance between the tail's empirical CCDF and the fitted model (W = 1)
is computed. The candidate with the smallest distance wins; ties go to the
smallest x_min.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DegenerateTail,
    InsufficientData,
    InsufficientTail,
    InvalidAlpha,
    InvalidParameter,
    NoValidCandidate,
)
from .powerlaw import PowerLawFit, mle_alpha

logger = logging.getLogger(__name__)


CANDIDATES_ALL_UNIQUE = "all_unique"
CANDIDATES_QUANTILE_GRID = "quantile_grid"

CANDIDATE_RULE_CHOICES = [
    (CANDIDATES_ALL_UNIQUE, "Every distinct observed value"),
    (CANDIDATES_QUANTILE_GRID, "Quantile-spaced observed values"),
]

DEFAULT_MIN_TAIL = 10
DEFAULT_QUANTILE_CANDIDATES = 512


@dataclass(frozen=True)
class ScanResult:
    best: PowerLawFit
    profile: tuple
    min_tail: int
    candidate_rule: str = CANDIDATES_ALL_UNIQUE

    def profile_rows(self):
        """(xmin_candidate, alpha, ks_distance) rows, x_min ascending."""
        return list(self.profile)


# =========================================================
# KS distance
# =========================================================
def _step_edges(sorted_values):
    """
    For ascending values return the distinct values with the counts of
    observations >= and > each of them.
    """
    n = sorted_values.size
    distinct, first = np.unique(sorted_values, return_index=True)
    after_last = np.append(first[1:], n)
    return distinct, n - first, n - after_last


def ks_from_edges(distinct, at_least, above, n, model_sf):
    """
    Exact sup |S_model - S_emp| for a step CCDF: both sides of every step
    are compared with the (decreasing) model curve.
    """
    model = model_sf(distinct)
    upper = np.abs(model - at_least / n)
    lower = np.abs(model - above / n)
    return float(max(upper.max(), lower.max()))


def ks_distance_sorted(tail_sorted, model_sf):
    """KS distance of an ascending tail against a conditional survival function."""
    tail_sorted = np.asarray(tail_sorted, dtype=float)
    if tail_sorted.size == 0:
        raise InsufficientTail("KS distance of an empty tail is undefined.")
    distinct, at_least, above = _step_edges(tail_sorted)
    return ks_from_edges(distinct, at_least, above, tail_sorted.size, model_sf)


def ks_distance(tail_values, x_min, alpha):
    tail = np.sort(np.asarray(tail_values, dtype=float))
    if tail.size == 0:
        raise InsufficientTail("KS distance of an empty tail is undefined.")
    if not alpha > 1:
        raise InvalidAlpha(f"alpha must be > 1, got {alpha!r}.")
    if tail[0] < x_min:
        raise InvalidParameter("Every tail value must be >= x_min.")

    exponent = -(alpha - 1.0)
    return ks_distance_sorted(tail, lambda v: (v / x_min) ** exponent)


# =========================================================
# Scan
# =========================================================
def _candidate_indices(sorted_values, distinct, admissible, candidate_rule, quantile_candidates):
    indices = np.flatnonzero(admissible)

    if candidate_rule == CANDIDATES_ALL_UNIQUE:
        return indices

    if candidate_rule == CANDIDATES_QUANTILE_GRID:
        levels = np.linspace(0.0, 1.0, int(quantile_candidates))
        picked = np.unique(np.quantile(sorted_values, levels, method="inverted_cdf"))
        positions = np.searchsorted(distinct, picked)
        return np.intersect1d(indices, positions)

    raise InvalidParameter(f"Unknown candidate rule {candidate_rule!r}.")


def scan_xmin(
    series,
    min_tail=DEFAULT_MIN_TAIL,
    candidate_rule=CANDIDATES_ALL_UNIQUE,
    quantile_candidates=DEFAULT_QUANTILE_CANDIDATES,
):
    if min_tail < DEFAULT_MIN_TAIL:
        raise InvalidParameter(f"min_tail must be >= {DEFAULT_MIN_TAIL}, got {min_tail}.")

    values = series.sorted_values
    n = int(values.size)
    if n < min_tail:
        raise InsufficientData(f"Series has {n} observations, fewer than min_tail={min_tail}.")

    distinct, at_least, above = _step_edges(values)
    admissible = at_least >= min_tail
    indices = _candidate_indices(values, distinct, admissible, candidate_rule, quantile_candidates)

    profile = []
    for j in indices:
        x_min = float(distinct[j])
        n_tail = int(at_least[j])
        tail = values[n - n_tail:]

        try:
            alpha = mle_alpha(tail, x_min)
        except (DegenerateTail, InsufficientTail):
            logger.debug("Candidate x_min=%g skipped: degenerate tail.", x_min)
            profile.append((x_min, float("nan"), float("nan")))
            continue

        exponent = -(alpha - 1.0)
        d = ks_from_edges(
            distinct[j:],
            at_least[j:],
            above[j:],
            n_tail,
            lambda v: (v / x_min) ** exponent,
        )
        profile.append((x_min, alpha, d))

    distances = np.array([d for _, _, d in profile], dtype=float)
    if distances.size == 0 or np.all(np.isnan(distances)):
        raise NoValidCandidate(
            f"No usable x_min candidate among {len(profile)} with tail >= {min_tail}."
        )

    # nanargmin returns the first minimum, i.e. the smallest x_min on ties
    best_index = int(np.nanargmin(distances))
    x_min, alpha, d = profile[best_index]
    n_tail = int(np.count_nonzero(values >= x_min))

    best = PowerLawFit(
        x_min=x_min,
        alpha=alpha,
        w=n_tail / n,
        n_tail=n_tail,
        ks_distance=d,
        n_total=n,
    )
    logger.debug(
        "Scan over %d candidates selected x_min=%g alpha=%.4f D=%.5f.",
        len(profile), x_min, alpha, d,
    )

    return ScanResult(
        best=best,
        profile=tuple(profile),
        min_tail=int(min_tail),
        candidate_rule=candidate_rule,
    )
