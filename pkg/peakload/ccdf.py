"""
Peak series containers and the empirical CCDF.

The empirical survival at x is the number of observed peaks greater than
or equal to x over the sample size N. Tied peaks collapse into one point
carrying their summed frequency.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import EmptyInput, InvalidParameter, InvalidValue


FRAME_HOURLY = "hourly"
FRAME_DAILY = "daily"
FRAME_WEEKLY = "weekly"
FRAME_MONTHLY = "monthly"
FRAME_YEARLY = "yearly"
FRAME_RAW = "raw"

FRAME_CHOICES = [
    (FRAME_HOURLY, "Hourly peaks"),
    (FRAME_DAILY, "Daily peaks"),
    (FRAME_WEEKLY, "Weekly peaks (Monday start)"),
    (FRAME_MONTHLY, "Monthly peaks"),
    (FRAME_YEARLY, "Yearly peaks"),
    (FRAME_RAW, "Raw values"),
]


# =========================================================
# PeakSeries
# =========================================================
@dataclass(frozen=True, eq=False)
class PeakSeries:
    """
    Ordered peak observations for one feeder and one aggregation frame.

    values      strictly positive, finite load values
    timestamps  optional bucket starts, strictly increasing, one per value
    frame       one of FRAME_CHOICES
    """

    values: np.ndarray
    timestamps: tuple = None
    frame: str = FRAME_RAW

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True).reshape(-1)

        if values.size == 0:
            raise EmptyInput("Peak series is empty.")

        bad = np.flatnonzero(~np.isfinite(values) | (values <= 0))
        if bad.size:
            index = int(bad[0])
            raise InvalidValue(
                f"Value at index {index} must be positive and finite, got {values[index]!r}.",
                index=index,
            )

        if self.frame not in dict(FRAME_CHOICES):
            raise InvalidParameter(f"Unknown frame {self.frame!r}.")

        timestamps = None
        if self.timestamps is not None:
            timestamps = tuple(self.timestamps)
            if len(timestamps) != values.size:
                raise InvalidParameter(
                    f"{len(timestamps)} timestamps for {values.size} values."
                )
            for i in range(1, len(timestamps)):
                if not timestamps[i] > timestamps[i - 1]:
                    raise InvalidValue(
                        f"Timestamps must be strictly increasing (index {i}).",
                        index=i,
                    )

        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "timestamps", timestamps)

    @classmethod
    def from_values(cls, values, frame=FRAME_RAW):
        return cls(values=values, frame=frame)

    def __len__(self):
        return int(self.values.size)

    @property
    def has_timestamps(self):
        return self.timestamps is not None

    @cached_property
    def sorted_values(self):
        ordered = np.sort(self.values)
        ordered.setflags(write=False)
        return ordered


# =========================================================
# EmpiricalCcdf
# =========================================================
@dataclass(frozen=True)
class EmpiricalCcdf:
    """
    Empirical survival function in the ranked-table shape: one point per
    distinct value, largest value first.
    """

    points: tuple
    total: int
    frequencies: tuple

    @cached_property
    def _ascending(self):
        values = np.array([v for v, _ in reversed(self.points)], dtype=float)
        survival = np.array([s for _, s in reversed(self.points)], dtype=float)
        return values, survival

    def as_rows(self):
        """(value, frequency, survival) rows, largest value first."""
        for (value, survival), frequency in zip(self.points, self.frequencies):
            yield value, frequency, survival


def build_empirical_ccdf(series):
    values = np.asarray(series.values, dtype=float)
    if values.size == 0:
        raise EmptyInput("Cannot build a CCDF from an empty series.")

    bad = np.flatnonzero(~np.isfinite(values) | (values <= 0))
    if bad.size:
        raise InvalidValue(f"Invalid value at index {int(bad[0])}.", index=int(bad[0]))

    n = int(values.size)
    distinct, counts = np.unique(values, return_counts=True)

    # at_least[j] = #{x_i >= distinct[j]}
    at_least = np.cumsum(counts[::-1])[::-1]
    survival = at_least / n

    points = tuple(
        (float(v), float(s)) for v, s in zip(distinct[::-1], survival[::-1])
    )
    frequencies = tuple(int(c) for c in counts[::-1])

    return EmpiricalCcdf(points=points, total=n, frequencies=frequencies)


def survival_at(ccdf, x):
    """
    Step evaluation of the empirical CCDF: the survival of the smallest
    stored value >= x, 0 above the maximum, 1 at or below the minimum.
    """
    x = float(x)
    if not math.isfinite(x):
        raise InvalidValue(f"Query point must be finite, got {x!r}.")

    values, survival = ccdf._ascending
    idx = int(np.searchsorted(values, x, side="left"))
    if idx >= values.size:
        return 0.0
    return float(survival[idx])


def empirical_survival(sorted_values, xs):
    """
    #{x_i >= x} / N for every x in xs, given ascending sorted values.
    """
    sorted_values = np.asarray(sorted_values, dtype=float)
    n = sorted_values.size
    at_least = n - np.searchsorted(sorted_values, np.asarray(xs, dtype=float), side="left")
    return at_least / n
