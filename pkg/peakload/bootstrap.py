"""
Nonparametric bootstrap for the power-law tail fit.

Each replicate resamples the N peaks with replacement and reruns the
x_min scan. Percentile intervals use the nearest-rank rule (no
interpolation). The CCDF band at x takes the same percentiles over the
replicate curves W_b (x / x_min_b) ** -(alpha_b - 1); a replicate whose
x_min_b lies above x contributes its resample's empirical survival at x.
"""

import logging
import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .ccdf import PeakSeries, empirical_survival
from .exceptions import InvalidParameter, PeakLoadError, UnstableBootstrap
from .gof import DEFAULT_REPLICATES, check_replicates
from .replicates import STREAM_BOOTSTRAP, replicate_rng, run_replicates
from .tailscan import (
    CANDIDATES_ALL_UNIQUE,
    DEFAULT_MIN_TAIL,
    DEFAULT_QUANTILE_CANDIDATES,
    scan_xmin,
)

logger = logging.getLogger(__name__)


DEFAULT_LEVEL = 0.95
DEFAULT_BAND_POINTS = 200
MAX_FAILED_SHARE = 0.20

ReplicateFit = namedtuple("ReplicateFit", ["x_min", "alpha", "w"])
BandPoint = namedtuple("BandPoint", ["x", "low", "high", "point"])


# =========================================================
# Percentiles
# =========================================================
def nearest_rank(sorted_samples, p):
    """The ceil(p * R)-th smallest sample (1-based), clamped to [1, R]."""
    r = len(sorted_samples)
    rank = math.ceil(round(p * r, 9))
    rank = min(max(rank, 1), r)
    return float(sorted_samples[rank - 1])


def percentile_interval(samples, level):
    ordered = np.sort(np.asarray(samples, dtype=float))
    return (
        nearest_rank(ordered, (1.0 - level) / 2.0),
        nearest_rank(ordered, (1.0 + level) / 2.0),
    )


def _bracket(low, high, point):
    # the band always contains the point estimate where it is defined
    if point is None:
        return low, high
    return min(low, point), max(high, point)


# =========================================================
# CiReport
# =========================================================
@dataclass(frozen=True)
class CiReport:
    level: float
    xmin_interval: tuple
    alpha_interval: tuple
    band: tuple
    replicates: int
    seed: int
    replicate_fits: tuple
    w_interval: tuple = None
    point_fit: object = None
    failed: int = 0

    def band_at(self, x):
        """
        (low, high) at load x, or None when no band is available there.
        """
        x = float(x)
        point = self._point_at(x)

        if self.replicate_fits and x >= max(f.x_min for f in self.replicate_fits):
            curves = [f.w * (x / f.x_min) ** -(f.alpha - 1) for f in self.replicate_fits]
            return _bracket(*percentile_interval(curves, self.level), point)

        if not self.band:
            return None

        xs = np.array([b.x for b in self.band], dtype=float)
        hit = np.flatnonzero(xs == x)
        if hit.size:
            b = self.band[int(hit[0])]
            return b.low, b.high

        if x < xs.min() or x > xs.max():
            return None

        # piecewise log-linear in x between neighbouring grid points
        order = np.argsort(xs)
        log_x = np.log(xs[order])
        lows = np.array([self.band[i].low for i in order])
        highs = np.array([self.band[i].high for i in order])
        low = float(np.interp(math.log(x), log_x, lows))
        high = float(np.interp(math.log(x), log_x, highs))
        return _bracket(low, high, point)

    def _point_at(self, x):
        fit = self.point_fit
        if fit is None or x < fit.x_min:
            return None
        return fit.w * (x / fit.x_min) ** -(fit.alpha - 1)

    def band_rows(self):
        """(x, low, point, high) rows for plotting."""
        return [(b.x, b.low, b.point, b.high) for b in self.band]

    def to_dict(self, include_replicates=False):
        data = {
            "level": self.level,
            "xmin_interval": list(self.xmin_interval),
            "alpha_interval": list(self.alpha_interval),
            "w_interval": list(self.w_interval) if self.w_interval else None,
            "replicates": self.replicates,
            "failed": self.failed,
            "seed": self.seed,
            "band": [
                {"x": b.x, "low": b.low, "point": b.point, "high": b.high}
                for b in self.band
            ],
        }
        if include_replicates:
            data["replicate_fits"] = [list(f) for f in self.replicate_fits]
        return data

    @classmethod
    def from_dict(cls, data, point_fit=None):
        return cls(
            level=float(data["level"]),
            xmin_interval=tuple(data["xmin_interval"]),
            alpha_interval=tuple(data["alpha_interval"]),
            w_interval=tuple(data["w_interval"]) if data.get("w_interval") else None,
            band=tuple(
                BandPoint(b["x"], b["low"], b["high"], b.get("point"))
                for b in data.get("band", [])
            ),
            replicates=int(data["replicates"]),
            seed=int(data["seed"]),
            replicate_fits=tuple(ReplicateFit(*f) for f in data.get("replicate_fits", [])),
            point_fit=point_fit,
            failed=int(data.get("failed", 0)),
        )


# =========================================================
# Bootstrap
# =========================================================
def default_band_grid(series, fit, points=DEFAULT_BAND_POINTS):
    """
    Quantile-spaced distinct observed values (at most ``points``) plus the
    fitted x_min.
    """
    values = series.sorted_values
    levels = np.linspace(0.0, 1.0, int(points))
    grid = np.quantile(values, levels, method="inverted_cdf")
    if fit is not None:
        grid = np.append(grid, fit.x_min)
    return np.unique(grid)


def _bootstrap_replicate(payload, seed_seq):
    values, grid, min_tail, candidate_rule, quantile_candidates = payload
    rng = replicate_rng(seed_seq)

    resample = rng.choice(values, size=values.size, replace=True)
    try:
        fit = scan_xmin(
            PeakSeries.from_values(resample),
            min_tail=min_tail,
            candidate_rule=candidate_rule,
            quantile_candidates=quantile_candidates,
        ).best
    except PeakLoadError:
        return None

    curve = empirical_survival(np.sort(resample), grid)
    defined = grid >= fit.x_min
    curve[defined] = fit.w * (grid[defined] / fit.x_min) ** -(fit.alpha - 1)

    return fit.x_min, fit.alpha, fit.w, curve


def _build_report(level, grid, results, replicates, seed, point_fit, failed):
    fits = tuple(ReplicateFit(r[0], r[1], r[2]) for r in results)
    curves = np.array([r[3] for r in results], dtype=float).reshape(len(results), grid.size)

    band = []
    for k, x in enumerate(grid):
        x = float(x)
        point = None
        if point_fit is not None and x >= point_fit.x_min:
            point = point_fit.w * (x / point_fit.x_min) ** -(point_fit.alpha - 1)
        low, high = percentile_interval(curves[:, k], level)
        low, high = _bracket(low, high, point)
        band.append(BandPoint(x, max(low, 0.0), min(high, 1.0), point))

    return CiReport(
        level=float(level),
        xmin_interval=percentile_interval([f.x_min for f in fits], level),
        alpha_interval=percentile_interval([f.alpha for f in fits], level),
        w_interval=percentile_interval([f.w for f in fits], level),
        band=tuple(band),
        replicates=int(replicates),
        seed=int(seed),
        replicate_fits=fits,
        point_fit=point_fit,
        failed=int(failed),
    )


def bootstrap_ci(
    series,
    replicates=DEFAULT_REPLICATES,
    level=DEFAULT_LEVEL,
    band_grid=None,
    seed=0,
    min_tail=DEFAULT_MIN_TAIL,
    candidate_rule=CANDIDATES_ALL_UNIQUE,
    quantile_candidates=DEFAULT_QUANTILE_CANDIDATES,
    workers=1,
    point_fit=None,
):
    check_replicates(replicates)
    if not 0.5 < level < 1:
        raise InvalidParameter(f"Confidence level must lie in (0.5, 1), got {level!r}.")

    if point_fit is None:
        point_fit = scan_xmin(
            series,
            min_tail=min_tail,
            candidate_rule=candidate_rule,
            quantile_candidates=quantile_candidates,
        ).best

    if band_grid is None:
        grid = default_band_grid(series, point_fit)
    else:
        grid = np.unique(np.asarray(band_grid, dtype=float))
        if grid.size and (not np.all(np.isfinite(grid)) or grid.min() <= 0):
            raise InvalidParameter("Band grid values must be positive and finite.")

    payload = (
        np.asarray(series.values, dtype=float),
        grid,
        min_tail,
        candidate_rule,
        quantile_candidates,
    )
    outcomes = run_replicates(
        _bootstrap_replicate,
        payload,
        seed=seed,
        count=replicates,
        stream=STREAM_BOOTSTRAP,
        workers=workers,
    )

    results = [r for r in outcomes if r is not None]
    failed = replicates - len(results)

    if failed > MAX_FAILED_SHARE * replicates:
        partial = None
        if results:
            partial = _build_report(level, grid, results, replicates, seed, point_fit, failed)
        raise UnstableBootstrap(
            f"{failed} of {replicates} resamples could not be fitted.",
            partial=partial,
            failed=failed,
        )
    if failed:
        logger.warning("%d of %d resamples could not be fitted.", failed, replicates)

    report = _build_report(level, grid, results, replicates, seed, point_fit, failed)
    logger.info(
        "Bootstrap %.0f%% CI: x_min [%g, %g], alpha [%.4g, %.4g] over %d replicates.",
        level * 100, *report.xmin_interval, *report.alpha_interval, replicates,
    )
    return report
