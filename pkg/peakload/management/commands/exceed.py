import json

from ...bootstrap import CiReport
from ...exceptions import UsageError
from ...forms import FORMAT_CSV
from ...powerlaw import PowerLawFit, exceedance_query
from ...reports import build_report, csv_text, dump_json
from ..base import PeakloadCommand


class Command(PeakloadCommand):
    help = "Exceedance probability P(peak >= x) from a fitted tail, with its CI band when available."

    config_flags = ("format",)

    def add_arguments(self, parser):
        parser.add_argument("--fit", dest="fit_path", default=None, help="JSON report written by 'fit'.")
        parser.add_argument("--x", dest="x", type=float, required=True, help="Load value to query.")
        parser.add_argument("--x-min", dest="x_min", type=float, default=None)
        parser.add_argument("--alpha", type=float, default=None)
        parser.add_argument("--w", type=float, default=None, help="Tail share W = S(x_min).")
        self.add_config_arguments(parser)

    def _load_fit(self, options):
        path = options["fit_path"]
        if path is None:
            if None in (options["x_min"], options["alpha"], options["w"]):
                raise UsageError("Give --fit, or all of --x-min, --alpha and --w.")
            fit = PowerLawFit(x_min=options["x_min"], alpha=options["alpha"], w=options["w"])
            return fit, None, None

        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, ValueError) as e:
            raise UsageError(f"Cannot read fit file {path}: {e}") from e

        try:
            fit = PowerLawFit.from_dict(data.get("fit", data))
        except (KeyError, TypeError, ValueError) as e:
            raise UsageError(f"{path} does not hold a power-law fit: {e}") from e

        ci = None
        if data.get("ci"):
            ci = CiReport.from_dict(data["ci"], point_fit=fit)
        return fit, ci, self.input_hash(path)

    def handle(self, *args, **options):
        config = self.resolve(options)
        fit, ci, fit_hash = self._load_fit(options)

        probability, interval = exceedance_query(fit, options["x"], ci)

        if config["format"] == FORMAT_CSV:
            low, high = interval if interval else (None, None)
            text = csv_text(["x", "probability", "low", "high"], [(options["x"], probability, low, high)])
        else:
            report = build_report(
                "exceed",
                config,
                input_hash=fit_hash,
                fit=fit.to_dict(),
                x=options["x"],
                probability=probability,
                interval=list(interval) if interval else None,
                ci_level=ci.level if ci else None,
            )
            text = dump_json(report)

        self.emit(text, options["output"])
