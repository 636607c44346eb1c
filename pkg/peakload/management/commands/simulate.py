import logging

import numpy as np

from ...exceptions import UsageError
from ...forms import FORMAT_JSON
from ...powerlaw import sample_tail, tail_quantile
from ...reports import build_report, csv_text, dump_json
from ..base import PeakloadCommand

logger = logging.getLogger(__name__)


class Command(PeakloadCommand):
    help = "Draw a synthetic peak series: power-law tail above x_min, optional uniform body below it."

    config_flags = ("seed", "format")

    def add_arguments(self, parser):
        parser.add_argument("--x-min", dest="x_min", type=float, required=True)
        parser.add_argument("--alpha", type=float, required=True)
        parser.add_argument("--n", type=int, default=None, help="Number of values to draw.")
        parser.add_argument(
            "--body-fraction",
            type=float,
            default=0.0,
            help="Share of values drawn uniformly below x_min.",
        )
        parser.add_argument(
            "--body-low",
            type=float,
            default=None,
            help="Lower edge of the body (default x_min / 10).",
        )
        parser.add_argument(
            "--quantile",
            type=float,
            default=None,
            help="Print the tail quantile at U in [0, 1) instead of sampling.",
        )
        self.add_config_arguments(parser)

    def handle(self, *args, **options):
        # CSV unless --format says otherwise
        if options.get("format") is None:
            options["format"] = "csv"
        config = self.resolve(options)
        x_min = options["x_min"]
        alpha = options["alpha"]

        if not x_min > 0:
            raise UsageError(f"--x-min must be > 0, got {x_min!r}.")
        if not alpha > 1:
            raise UsageError(f"--alpha must be > 1, got {alpha!r}.")

        if options["quantile"] is not None:
            u = options["quantile"]
            if not 0 <= u < 1:
                raise UsageError(f"--quantile must be in [0, 1), got {u!r}.")
            self.emit(f"{float(tail_quantile(u, x_min, alpha))!r}\n", options["output"])
            return

        n = options["n"]
        if n is None or n < 1:
            raise UsageError("--n must be a positive integer.")

        fraction = options["body_fraction"]
        if not 0 <= fraction < 1:
            raise UsageError(f"--body-fraction must be in [0, 1), got {fraction!r}.")
        body_low = options["body_low"] if options["body_low"] is not None else x_min / 10
        if not 0 < body_low < x_min:
            raise UsageError(f"--body-low must be in (0, x_min), got {body_low!r}.")

        rng = np.random.default_rng(np.random.SeedSequence(config["seed"]))
        n_body = int(round(n * fraction))
        n_tail = n - n_body
        if n_tail < 1:
            raise UsageError("--body-fraction leaves no tail values.")

        tail = sample_tail(x_min, alpha, n_tail, rng)
        body = rng.uniform(body_low, x_min, size=n_body)
        values = np.concatenate([tail, body])
        rng.shuffle(values)

        logger.info(
            "Drew %d values (%d tail, %d body) with seed %d.",
            n, n_tail, n_body, config["seed"],
        )

        if config["format"] == FORMAT_JSON:
            report = build_report(
                "simulate",
                config,
                x_min=x_min,
                alpha=alpha,
                n_tail=n_tail,
                n_body=n_body,
                body_low=body_low,
                values=[float(v) for v in values],
            )
            text = dump_json(report)
        else:
            text = csv_text(["value"], [(float(v),) for v in values])

        self.emit(text, options["output"])
