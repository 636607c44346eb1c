"""
Shared plumbing for the peakload management commands.

Exit codes: 0 ok, 1 upstream error, 2 null hypothesis rejected,
3 domain error (load below the fitted tail), 64 usage error.
"""

import sys
from datetime import timedelta
from functools import partial

from django.core.management.base import BaseCommand, CommandError

from ..ccdf import FRAME_CHOICES, FRAME_RAW
from ..conf import resolve_config
from ..exceptions import BelowTail, PeakLoadError, UsageError
from ..forms import FORMAT_CHOICES
from ..ingest import (
    TIMESTAMP_FORMAT_CHOICES,
    TIMESTAMP_ISO,
    ColumnMapping,
    WindowSpec,
    aggregate_peaks,
    apply_window,
    load_value_series,
    read_readings,
)
from ..reports import input_sha256, write_text
from ..tailscan import CANDIDATE_RULE_CHOICES

EXIT_ERROR = 1
EXIT_REJECTED = 2
EXIT_DOMAIN = 3
EXIT_USAGE = 64


def _usage_error(parser, message):
    if parser.called_from_command_line:
        parser.print_usage(sys.stderr)
        parser.exit(EXIT_USAGE, f"{parser.prog}: error: {message}\n")
    raise CommandError(f"Error: {message}", returncode=EXIT_USAGE)


class PeakloadCommand(BaseCommand):
    # run-config keys a command accepts as flags
    config_flags = ()

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.error = partial(_usage_error, parser)
        return parser

    def execute(self, *args, **options):
        try:
            return super().execute(*args, **options)
        except UsageError as e:
            raise CommandError(str(e), returncode=EXIT_USAGE) from e
        except BelowTail as e:
            raise CommandError(str(e), returncode=EXIT_DOMAIN) from e
        except PeakLoadError as e:
            raise CommandError(str(e), returncode=EXIT_ERROR) from e

    # =========================================================
    # Arguments
    # =========================================================
    def add_config_arguments(self, parser):
        flags = {
            "seed": dict(type=int, help="Master seed for every stochastic step."),
            "replicates": dict(type=int, help="Monte-Carlo / bootstrap replicates."),
            "significance": dict(type=float, help="GOF significance level (default 0.10)."),
            "ci_level": dict(type=float, help="Confidence level (default 0.95)."),
            "min_tail": dict(type=int, help="Smallest tail size a threshold may leave."),
            "candidate_rule": dict(choices=[c for c, _ in CANDIDATE_RULE_CHOICES]),
            "quantile_candidates": dict(type=int, help="Candidates for the quantile_grid rule."),
            "workers": dict(type=int, help="Worker processes for replicates."),
            "min_coverage": dict(type=float, help="Minimum bucket reading coverage."),
            "window_days": dict(type=int, help="Rolling window length in days."),
            "format": dict(choices=[c for c, _ in FORMAT_CHOICES]),
        }
        for key in self.config_flags:
            parser.add_argument("--" + key.replace("_", "-"), dest=key, default=None, **flags[key])

        parser.add_argument("--config", help="key=value config file (lowest precedence).")
        parser.add_argument("--output", help="Write the report here instead of stdout.")

    def add_input_arguments(self, parser, default_frame=FRAME_RAW):
        parser.add_argument("--input", required=True, help="Readings or peak-value file.")
        parser.add_argument(
            "--frame",
            default=default_frame,
            choices=[c for c, _ in FRAME_CHOICES],
            help="Aggregate interval readings to this frame; 'raw' reads a peak list.",
        )
        parser.add_argument("--timestamp-column", default="timestamp")
        parser.add_argument("--value-column", default="value")
        parser.add_argument("--meter-column", default=None)
        parser.add_argument(
            "--timestamp-format",
            default=TIMESTAMP_ISO,
            choices=[c for c, _ in TIMESTAMP_FORMAT_CHOICES],
        )
        parser.add_argument(
            "--per-meter",
            action="store_true",
            help="Sum per-meter bucket peaks instead of taking the coincident peak.",
        )
        parser.add_argument("--no-window", action="store_true", help="Keep the full history.")

    # =========================================================
    # Helpers
    # =========================================================
    def resolve(self, options):
        overrides = {key: options.get(key) for key in self.config_flags}
        return resolve_config(overrides, config_path=options.get("config"))

    def load_series(self, options, config):
        """Peak series from --input; returns (series, aggregation or None)."""
        path = options["input"]
        frame = options["frame"]

        try:
            if frame == FRAME_RAW:
                with open(path, "rb") as fh:
                    series = load_value_series(fh)
            else:
                parsed = self.read_readings(options)
        except OSError as e:
            raise UsageError(f"Cannot read {path}: {e}") from e

        if frame == FRAME_RAW:
            # plain peak lists carry no timestamps and are used whole
            if series.has_timestamps:
                series = self.window(series, options, config)
            return series, None

        aggregation = aggregate_peaks(
            parsed.records,
            frame=frame,
            sum_meters=not options["per_meter"],
            min_coverage=config["min_coverage"],
        )
        return self.window(aggregation.series, options, config), aggregation

    def read_readings(self, options):
        schema = ColumnMapping(
            timestamp=options["timestamp_column"],
            value=options["value_column"],
            meter=options["meter_column"],
            timestamp_format=options["timestamp_format"],
        )
        return read_readings(options["input"], schema)

    def window(self, series, options, config):
        if options["no_window"]:
            return series
        return apply_window(series, WindowSpec(length=timedelta(days=config["window_days"])))

    def input_hash(self, path):
        try:
            return input_sha256(path)
        except OSError as e:
            raise UsageError(f"Cannot read {path}: {e}") from e

    def emit(self, text, output=None):
        if output:
            write_text(output, text)
        else:
            self.stdout.write(text, ending="")
