"""
Interval-meter readings in, peak series out.

CSV (or .xlsx) readings are validated row by row; bad rows are collected
into a rejects report instead of being dropped silently. Readings are then
bucketed in local civil time (settings.TIME_ZONE) and each bucket's peak is
taken, after summing meters per timestamp when coincident peaks are wanted.
"""

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone as dt_timezone

import pandas as pd
from django.conf import settings
from django.utils import timezone
from django.utils.dateparse import parse_datetime

from .ccdf import (
    FRAME_DAILY,
    FRAME_HOURLY,
    FRAME_MONTHLY,
    FRAME_RAW,
    FRAME_WEEKLY,
    FRAME_YEARLY,
    PeakSeries,
)
from .exceptions import (
    InvalidParameter,
    NoCompleteBuckets,
    NoTimestamps,
    QualityError,
    SchemaError,
)

logger = logging.getLogger(__name__)


TIMESTAMP_ISO = "iso"
TIMESTAMP_EPOCH = "epoch"

TIMESTAMP_FORMAT_CHOICES = [
    (TIMESTAMP_ISO, "ISO-8601 / common date-time text"),
    (TIMESTAMP_EPOCH, "Seconds since the Unix epoch"),
]

REJECT_MISSING_TIMESTAMP = "MissingTimestamp"
REJECT_BAD_TIMESTAMP = "BadTimestamp"
REJECT_MISSING_VALUE = "MissingValue"
REJECT_BAD_VALUE = "BadValue"
REJECT_NON_FINITE = "NonFinite"
REJECT_NEGATIVE = "Negative"
REJECT_DUPLICATE = "Duplicate"

MAX_REJECTED_SHARE = 0.10
DEFAULT_MIN_COVERAGE = 0.9
DEFAULT_WINDOW_DAYS = 730

AGGREGATION_FRAMES = [FRAME_HOURLY, FRAME_DAILY, FRAME_WEEKLY, FRAME_MONTHLY, FRAME_YEARLY]

_ENCODINGS = ["utf-8-sig", "utf-8", "cp1252", "latin-1"]

_FALLBACK_FORMATS = [
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d %H:%M",
    "%m/%d/%Y %H:%M:%S",
    "%m/%d/%Y %H:%M",
    "%Y/%m/%d %H:%M:%S",
    "%Y/%m/%d %H:%M",
]


# =========================================================
# Types
# =========================================================
@dataclass(frozen=True)
class IntervalRecord:
    timestamp: datetime
    value: float
    meter_id: str = None


@dataclass(frozen=True)
class ColumnMapping:
    timestamp: str = "timestamp"
    value: str = "value"
    meter: str = None
    timestamp_format: str = TIMESTAMP_ISO


@dataclass(frozen=True)
class RejectedRow:
    row_number: int
    reason: str
    raw: tuple = ()


@dataclass(frozen=True)
class ParseResult:
    records: list
    rejects: list
    total_rows: int


@dataclass(frozen=True)
class OmittedBucket:
    bucket_start: datetime
    readings: int
    expected: float
    reason: str = "LowCoverage"


@dataclass(frozen=True)
class PeakAggregation:
    series: PeakSeries
    omitted: list = field(default_factory=list)


@dataclass(frozen=True)
class WindowSpec:
    length: timedelta = timedelta(days=DEFAULT_WINDOW_DAYS)
    anchor: datetime = None

    def __post_init__(self):
        if self.length <= timedelta(0):
            raise InvalidParameter(f"Window length must be positive, got {self.length}.")


# =========================================================
# Parsing helpers
# =========================================================
def _decode(raw):
    if isinstance(raw, str):
        return raw
    for enc in _ENCODINGS:
        try:
            return raw.decode(enc)
        except UnicodeDecodeError:
            continue
    raise SchemaError("Could not decode the readings file. Try saving as UTF-8.")


def _ensure_aware(dt):
    if timezone.is_aware(dt):
        return dt
    return timezone.make_aware(dt, timezone.get_current_timezone())


def parse_timestamp(value, timestamp_format=TIMESTAMP_ISO):
    """
    Timezone-aware datetime, or None when the text cannot be parsed.
    Naive text is read as local civil time.
    """
    if isinstance(value, datetime):
        return _ensure_aware(value)

    s = str(value or "").strip()
    if not s:
        return None

    if timestamp_format == TIMESTAMP_EPOCH:
        try:
            seconds = float(s)
        except ValueError:
            return None
        if not math.isfinite(seconds):
            return None
        return datetime.fromtimestamp(seconds, tz=dt_timezone.utc)

    try:
        dt = parse_datetime(s)
    except ValueError:
        dt = None
    if dt:
        return _ensure_aware(dt)

    for fmt in _FALLBACK_FORMATS:
        try:
            return _ensure_aware(datetime.strptime(s, fmt))
        except ValueError:
            continue

    return None


def _column_index(header, name, required=True):
    if name is None:
        return None
    wanted = name.strip().lower()
    for i, h in enumerate(header):
        if (h or "").strip().lower() == wanted:
            return i
    if required:
        raise SchemaError(f"Column {name!r} not found in header {header!r}.")
    return None


def _records_from_rows(header, rows, schema):
    """
    Validate data rows (row numbers start at 2, after the header) into
    records and rejects.
    """
    if not header or not any(str(h or "").strip() for h in header):
        raise SchemaError("Readings file has no header row.")

    header = [str(h or "").strip() for h in header]
    ts_col = _column_index(header, schema.timestamp)
    value_col = _column_index(header, schema.value)
    meter_col = _column_index(header, schema.meter)

    records = []
    rejects = []
    seen = set()
    total = 0

    for row_number, row in enumerate(rows, start=2):
        cells = ["" if c is None else c for c in row]
        if not any(str(c).strip() for c in cells):
            continue
        total += 1

        def cell(i):
            if i is None or i >= len(cells):
                return ""
            c = cells[i]
            return c if isinstance(c, datetime) else str(c).strip()

        ts_raw = cell(ts_col)
        value_raw = cell(value_col)
        meter = cell(meter_col) or None

        if ts_raw == "":
            rejects.append(RejectedRow(row_number, REJECT_MISSING_TIMESTAMP, tuple(cells)))
            continue
        ts = parse_timestamp(ts_raw, schema.timestamp_format)
        if ts is None:
            rejects.append(RejectedRow(row_number, REJECT_BAD_TIMESTAMP, tuple(cells)))
            continue

        if value_raw == "":
            rejects.append(RejectedRow(row_number, REJECT_MISSING_VALUE, tuple(cells)))
            continue
        try:
            value = float(value_raw)
        except (TypeError, ValueError):
            rejects.append(RejectedRow(row_number, REJECT_BAD_VALUE, tuple(cells)))
            continue
        if not math.isfinite(value):
            rejects.append(RejectedRow(row_number, REJECT_NON_FINITE, tuple(cells)))
            continue
        if value < 0:
            rejects.append(RejectedRow(row_number, REJECT_NEGATIVE, tuple(cells)))
            continue

        key = (meter, ts)
        if key in seen:
            rejects.append(RejectedRow(row_number, REJECT_DUPLICATE, tuple(cells)))
            continue
        seen.add(key)

        records.append(IntervalRecord(timestamp=ts, value=value, meter_id=meter))

    if total and len(rejects) > MAX_REJECTED_SHARE * total:
        raise QualityError(
            f"{len(rejects)} of {total} rows rejected (more than {MAX_REJECTED_SHARE:.0%}).",
            total=total,
            rejected=len(rejects),
        )

    if rejects:
        logger.warning("Rejected %d of %d reading rows.", len(rejects), total)
    logger.info("Parsed %d interval readings.", len(records))

    records.sort(key=lambda r: (r.timestamp, r.meter_id or ""))
    return ParseResult(records=records, rejects=rejects, total_rows=total)


# =========================================================
# Readers
# =========================================================
def parse_csv(source, schema=None):
    """
    Parse interval readings from a byte (or text) stream.
    """
    schema = schema or ColumnMapping()
    text = _decode(source.read())

    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    return _records_from_rows(header, reader, schema)


def read_excel_readings(source, schema=None):
    """
    Parse interval readings from the first sheet of an .xlsx workbook.
    """
    schema = schema or ColumnMapping()
    raw = source.read() if hasattr(source, "read") else source

    try:
        df = pd.read_excel(io.BytesIO(raw), sheet_name=0, engine="openpyxl", header=None, dtype=object)
    except Exception as e:
        raise SchemaError(f"Error reading Excel file: {e}") from e

    df = df.astype(object).where(pd.notna(df), "")
    rows = [
        [c.to_pydatetime() if isinstance(c, pd.Timestamp) else c for c in row]
        for row in df.itertuples(index=False, name=None)
    ]
    if not rows:
        raise SchemaError("Workbook is empty.")
    return _records_from_rows(rows[0], rows[1:], schema)


def read_readings(path, schema=None):
    name = str(path).lower()
    with open(path, "rb") as fh:
        if name.endswith(".xlsx"):
            return read_excel_readings(fh, schema)
        return parse_csv(fh, schema)


# =========================================================
# Aggregation
# =========================================================
def _bucket_starts(local, frame):
    if frame == FRAME_HOURLY:
        return local.dt.floor("h")
    if frame == FRAME_DAILY:
        return local.dt.normalize()
    if frame == FRAME_WEEKLY:
        # W-SUN periods run Monday..Sunday
        return local.dt.to_period("W-SUN").dt.start_time
    if frame == FRAME_MONTHLY:
        return local.dt.to_period("M").dt.start_time
    if frame == FRAME_YEARLY:
        return local.dt.to_period("Y").dt.start_time
    raise InvalidParameter(f"Cannot aggregate to frame {frame!r}.")


def frame_period_end(start, frame):
    start = pd.Timestamp(start)
    if frame == FRAME_HOURLY:
        return start + pd.Timedelta(hours=1)
    if frame == FRAME_DAILY:
        return start + pd.DateOffset(days=1)
    if frame == FRAME_WEEKLY:
        return start + pd.DateOffset(days=7)
    if frame == FRAME_MONTHLY:
        return start + pd.offsets.MonthBegin(1)
    if frame == FRAME_YEARLY:
        return start + pd.offsets.YearBegin(1)
    raise InvalidParameter(f"Frame {frame!r} has no period.")


def _reading_interval(df):
    """Median spacing between consecutive readings of the same meter."""
    diffs = (
        df.sort_values(["meter", "instant"])
        .groupby("meter")["instant"]
        .diff()
        .dropna()
    )
    diffs = diffs[diffs > pd.Timedelta(0)]
    if diffs.empty:
        return None
    return diffs.median()


def aggregate_peaks(records, frame=FRAME_DAILY, sum_meters=True, min_coverage=DEFAULT_MIN_COVERAGE):
    if not records:
        raise NoCompleteBuckets("No readings to aggregate.")
    if frame not in AGGREGATION_FRAMES:
        raise InvalidParameter(f"Cannot aggregate to frame {frame!r}.")
    if not 0 <= min_coverage <= 1:
        raise InvalidParameter(f"min_coverage must lie in [0, 1], got {min_coverage!r}.")

    df = pd.DataFrame({
        "instant": pd.to_datetime([r.timestamp for r in records], utc=True),
        "value": [float(r.value) for r in records],
        "meter": [r.meter_id or "" for r in records],
    })
    # fixed row order so float sums do not depend on input order
    df = df.sort_values(["instant", "meter"], kind="mergesort").reset_index(drop=True)

    tz_name = settings.TIME_ZONE
    df["local"] = df["instant"].dt.tz_convert(tz_name).dt.tz_localize(None)
    df["bucket"] = _bucket_starts(df["local"], frame)

    interval = _reading_interval(df)

    if sum_meters:
        per_instant = df.groupby(["bucket", "instant"], sort=True)["value"].sum()
        peaks = per_instant.groupby(level="bucket").max()
    else:
        per_meter = df.groupby(["bucket", "meter"], sort=True)["value"].max()
        peaks = per_meter.groupby(level="bucket").sum()

    counts = df.groupby("bucket")["instant"].nunique()

    kept_starts = []
    kept_peaks = []
    omitted = []

    for bucket_start, peak in peaks.items():
        readings = int(counts.loc[bucket_start])
        if interval is None:
            expected = 1.0
        else:
            span = frame_period_end(bucket_start, frame) - bucket_start
            expected = span / interval

        start = (
            pd.Timestamp(bucket_start)
            .tz_localize(tz_name, ambiguous=True, nonexistent="shift_forward")
            .to_pydatetime()
        )
        if readings < min_coverage * expected:
            omitted.append(OmittedBucket(start, readings, float(expected)))
            continue
        if not peak > 0:
            omitted.append(OmittedBucket(start, readings, float(expected), reason="NonPositivePeak"))
            continue

        kept_starts.append(start)
        kept_peaks.append(float(peak))

    if omitted:
        logger.warning(
            "Omitted %d of %d %s buckets below coverage %.2f.",
            len(omitted), len(peaks), frame, min_coverage,
        )

    if not kept_peaks:
        raise NoCompleteBuckets(
            f"All {len(peaks)} {frame} buckets are below coverage {min_coverage:.2f}."
        )

    logger.info("Aggregated %d %s peaks.", len(kept_peaks), frame)
    series = PeakSeries(values=kept_peaks, timestamps=tuple(kept_starts), frame=frame)
    return PeakAggregation(series=series, omitted=omitted)


# =========================================================
# Window
# =========================================================
def default_anchor(series):
    """
    End of the latest bucket for framed series; the latest timestamp for
    raw series.
    """
    last = series.timestamps[-1]
    if series.frame in AGGREGATION_FRAMES:
        return frame_period_end(last, series.frame).to_pydatetime()
    return last


def apply_window(series, window=None):
    window = window or WindowSpec()
    if not series.has_timestamps:
        raise NoTimestamps("Windowing needs a timestamped series.")

    anchor = window.anchor if window.anchor is not None else default_anchor(series)
    start = anchor - window.length

    kept = [
        (ts, v)
        for ts, v in zip(series.timestamps, series.values)
        if start <= ts <= anchor
    ]
    if len(kept) == len(series):
        return series

    logger.info(
        "Window [%s, %s] keeps %d of %d peaks.", start, anchor, len(kept), len(series)
    )
    return PeakSeries(
        values=[v for _, v in kept],
        timestamps=tuple(ts for ts, _ in kept),
        frame=series.frame,
    )


# =========================================================
# Peak-series files
# =========================================================
def write_peak_series_csv(series, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["bucket_start", "peak"])
    timestamps = series.timestamps or [""] * len(series)
    for ts, value in zip(timestamps, series.values):
        writer.writerow([ts.isoformat() if ts else "", repr(float(value))])


def write_rejects_csv(rejects, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["row_number", "reason"])
    for r in rejects:
        writer.writerow([r.row_number, r.reason])


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def _series_from_rows(rows, frame):
    header = [c.strip().lower() for c in rows[0]]

    if _is_number(header[0]):
        return PeakSeries.from_values([float(r[0]) for r in rows], frame=frame)

    body = rows[1:]

    if "peak" in header:
        peak_col = header.index("peak")
        values = [float(r[peak_col]) for r in body]
        timestamps = None
        if "bucket_start" in header:
            ts_col = header.index("bucket_start")
            stamps = [parse_datetime(r[ts_col].strip()) if r[ts_col].strip() else None for r in body]
            if stamps and all(stamps):
                timestamps = tuple(stamps)
        return PeakSeries(values=values, timestamps=timestamps, frame=frame)

    if "value" in header:
        value_col = header.index("value")
        if "frequency" in header:
            freq_col = header.index("frequency")
            values = []
            for r in body:
                values.extend([float(r[value_col])] * int(r[freq_col]))
        else:
            values = [float(r[value_col]) for r in body]
        return PeakSeries.from_values(values, frame=frame)

    raise SchemaError(f"No 'peak' or 'value' column in header {rows[0]!r}.")


def load_value_series(source, frame=FRAME_RAW):
    """
    Read a peak list: the peak-series CSV (bucket_start, peak), the CCDF
    CSV (value, survival, frequency; expanded by frequency), a CSV with a
    ``value`` column, or a headerless single column of numbers.
    """
    raw = source.read() if hasattr(source, "read") else source
    rows = [r for r in csv.reader(io.StringIO(_decode(raw))) if any(c.strip() for c in r)]
    if not rows:
        raise SchemaError("Value file is empty.")

    try:
        return _series_from_rows(rows, frame)
    except (ValueError, IndexError) as e:
        raise SchemaError(f"Malformed value file: {e}") from e
