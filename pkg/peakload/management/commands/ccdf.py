from ...ccdf import build_empirical_ccdf
from ...forms import FORMAT_JSON
from ...reports import CCDF_HEADER, build_report, csv_text, dump_json
from ..base import PeakloadCommand


class Command(PeakloadCommand):
    help = "Empirical CCDF of the peak series, largest value first (value, survival, frequency)."

    config_flags = ("min_coverage", "window_days", "format")

    def add_arguments(self, parser):
        self.add_input_arguments(parser)
        self.add_config_arguments(parser)

    def handle(self, *args, **options):
        # CSV unless --format says otherwise
        if options.get("format") is None:
            options["format"] = "csv"
        config = self.resolve(options)
        series, _ = self.load_series(options, config)
        ccdf = build_empirical_ccdf(series)

        rows = [(value, survival, frequency) for value, frequency, survival in ccdf.as_rows()]

        if config["format"] == FORMAT_JSON:
            report = build_report(
                "ccdf",
                config,
                input_hash=self.input_hash(options["input"]),
                total=ccdf.total,
                points=[
                    {"value": v, "survival": s, "frequency": f} for v, s, f in rows
                ],
            )
            text = dump_json(report)
        else:
            text = csv_text(CCDF_HEADER, rows)

        self.emit(text, options["output"])
