import io
import logging

from ...ccdf import FRAME_DAILY
from ...exceptions import UsageError
from ...ingest import AGGREGATION_FRAMES, aggregate_peaks, write_peak_series_csv, write_rejects_csv
from ...reports import write_text
from ..base import PeakloadCommand

logger = logging.getLogger(__name__)


class Command(PeakloadCommand):
    help = "Aggregate interval readings into a peak series CSV (bucket_start, peak)."

    config_flags = ("min_coverage", "window_days")

    def add_arguments(self, parser):
        self.add_input_arguments(parser, default_frame=FRAME_DAILY)
        self.add_config_arguments(parser)
        parser.add_argument("--rejects-output", default=None, help="CSV of rejected rows.")

    def handle(self, *args, **options):
        frame = options["frame"]
        if frame not in AGGREGATION_FRAMES:
            raise UsageError(f"--frame must be one of {', '.join(AGGREGATION_FRAMES)} for readings.")

        config = self.resolve(options)
        try:
            parsed = self.read_readings(options)
        except OSError as e:
            raise UsageError(f"Cannot read {options['input']}: {e}") from e

        if options["rejects_output"]:
            buffer = io.StringIO()
            write_rejects_csv(parsed.rejects, buffer)
            write_text(options["rejects_output"], buffer.getvalue())

        aggregation = aggregate_peaks(
            parsed.records,
            frame=frame,
            sum_meters=not options["per_meter"],
            min_coverage=config["min_coverage"],
        )
        series = self.window(aggregation.series, options, config)

        logger.info(
            "%d rows, %d rejected, %d %s peaks, %d buckets omitted.",
            parsed.total_rows, len(parsed.rejects), len(series), frame, len(aggregation.omitted),
        )

        buffer = io.StringIO()
        write_peak_series_csv(series, buffer)
        self.emit(buffer.getvalue(), options["output"])
