from django.core.management.base import CommandError

from ...bootstrap import bootstrap_ci
from ...exceptions import UsageError
from ...forms import FORMAT_CSV
from ...gof import gof_pvalue
from ...reports import (
    BAND_HEADER,
    FIT_TABLE_HEADER,
    PROFILE_HEADER,
    REPLICATE_HEADER,
    build_report,
    csv_text,
    dump_json,
    fit_table_rows,
    write_text,
)
from ...tailscan import scan_xmin
from ..base import EXIT_REJECTED, PeakloadCommand


def _parse_grid(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise UsageError(f"--band-grid must be comma-separated numbers: {e}") from e


class Command(PeakloadCommand):
    help = "Fit the power-law tail (x_min scan + MLE), optionally with GOF p-value and bootstrap CIs."

    config_flags = (
        "seed",
        "replicates",
        "significance",
        "ci_level",
        "min_tail",
        "candidate_rule",
        "quantile_candidates",
        "workers",
        "min_coverage",
        "window_days",
        "format",
    )

    def add_arguments(self, parser):
        self.add_input_arguments(parser)
        self.add_config_arguments(parser)
        parser.add_argument("--gof", action="store_true", help="Run the Monte-Carlo GOF test.")
        parser.add_argument("--ci", action="store_true", help="Run the bootstrap confidence intervals.")
        parser.add_argument("--band-grid", default=None, help="Comma-separated loads for the CCDF band.")
        parser.add_argument("--profile-output", default=None, help="CSV of the x_min scan profile.")
        parser.add_argument("--band-output", default=None, help="CSV of the CCDF confidence band.")
        parser.add_argument("--replicates-output", default=None, help="CSV of the GOF replicate distances.")

    def handle(self, *args, **options):
        config = self.resolve(options)
        series, aggregation = self.load_series(options, config)

        scan = scan_xmin(
            series,
            min_tail=config["min_tail"],
            candidate_rule=config["candidate_rule"],
            quantile_candidates=config["quantile_candidates"],
        )
        fit = scan.best

        profile_path = options["profile_output"]
        if profile_path:
            write_text(profile_path, csv_text(PROFILE_HEADER, scan.profile_rows()))

        gof = None
        if options["gof"]:
            gof = gof_pvalue(
                series,
                fit,
                replicates=config["replicates"],
                seed=config["seed"],
                significance=config["significance"],
                min_tail=config["min_tail"],
                candidate_rule=config["candidate_rule"],
                quantile_candidates=config["quantile_candidates"],
                workers=config["workers"],
            )
            if options["replicates_output"]:
                write_text(
                    options["replicates_output"],
                    csv_text(REPLICATE_HEADER, [(d,) for d in gof.replicate_ds]),
                )

        ci = None
        if options["ci"]:
            grid = _parse_grid(options["band_grid"]) if options["band_grid"] else None
            ci = bootstrap_ci(
                series,
                replicates=config["replicates"],
                level=config["ci_level"],
                band_grid=grid,
                seed=config["seed"],
                min_tail=config["min_tail"],
                candidate_rule=config["candidate_rule"],
                quantile_candidates=config["quantile_candidates"],
                workers=config["workers"],
                point_fit=fit,
            )
            if options["band_output"]:
                write_text(options["band_output"], csv_text(BAND_HEADER, ci.band_rows()))

        if config["format"] == FORMAT_CSV:
            text = csv_text(FIT_TABLE_HEADER, fit_table_rows(fit, gof, ci))
        else:
            report = build_report(
                "fit",
                config,
                input_hash=self.input_hash(options["input"]),
                series={
                    "n": len(series),
                    "frame": series.frame,
                    "omitted_buckets": len(aggregation.omitted) if aggregation else 0,
                },
                fit=fit.to_dict(),
                scan={
                    "candidates": len(scan.profile),
                    "candidate_rule": scan.candidate_rule,
                    "min_tail": scan.min_tail,
                    "profile_path": profile_path,
                },
                gof=gof.to_dict() if gof else None,
                ci=ci.to_dict(include_replicates=True) if ci else None,
            )
            text = dump_json(report)

        self.emit(text, options["output"])

        if gof is not None and gof.reject:
            raise CommandError(
                f"Power law rejected: p={gof.p_value:.4f} < significance {gof.significance:g}.",
                returncode=EXIT_REJECTED,
            )
