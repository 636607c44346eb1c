from ...altdists import FAMILY_CHOICES, compare_models
from ...exceptions import UsageError
from ...forms import FORMAT_CSV
from ...gof import gof_pvalue
from ...reports import COMPARE_HEADER, build_report, compare_table_rows, csv_text, dump_json
from ...tailscan import scan_xmin
from ..base import PeakloadCommand

FAMILY_NAMES = [f for f, _ in FAMILY_CHOICES]


def _parse_families(text):
    families = [f.strip() for f in text.split(",") if f.strip()]
    if not families:
        raise UsageError("--families needs at least one family.")
    unknown = [f for f in families if f not in FAMILY_NAMES]
    if unknown:
        raise UsageError(
            f"Unknown families: {', '.join(unknown)} (choose from {', '.join(FAMILY_NAMES)})."
        )
    return families


class Command(PeakloadCommand):
    help = "Fit exponential, lognormal and gamma tails above x_min and test each against the data."

    config_flags = (
        "seed",
        "replicates",
        "significance",
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
        parser.add_argument(
            "--families",
            default=",".join(FAMILY_NAMES),
            help="Comma-separated alternative families.",
        )

    def handle(self, *args, **options):
        families = _parse_families(options["families"])
        config = self.resolve(options)
        series, _ = self.load_series(options, config)

        fit = scan_xmin(
            series,
            min_tail=config["min_tail"],
            candidate_rule=config["candidate_rule"],
            quantile_candidates=config["quantile_candidates"],
        ).best

        power_law_gof = gof_pvalue(
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
        rows = compare_models(
            series,
            fit,
            families,
            replicates=config["replicates"],
            seed=config["seed"],
            significance=config["significance"],
            power_law_gof=power_law_gof,
            workers=config["workers"],
        )

        if config["format"] == FORMAT_CSV:
            text = csv_text(COMPARE_HEADER, compare_table_rows(rows))
        else:
            report = build_report(
                "compare",
                config,
                input_hash=self.input_hash(options["input"]),
                fit=fit.to_dict(),
                models=rows,
            )
            text = dump_json(report)

        self.emit(text, options["output"])
