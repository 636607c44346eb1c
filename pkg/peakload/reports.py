"""
Report and plot-data emission.

JSON reports are self-describing: tool version, resolved configuration,
seed and the SHA-256 of the input file. They carry no wall-clock times, so
the same command with the same seed produces byte-identical output.
"""

import csv
import hashlib
import io
import json

import numpy as np
from django.core.serializers.json import DjangoJSONEncoder

from . import __version__

TOOL_NAME = "peakload"


def input_sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_report(command, config, input_hash=None, **sections):
    report = {
        "tool": TOOL_NAME,
        "version": __version__,
        "command": command,
        "config": dict(config),
        "seed": config.get("seed"),
        "input_sha256": input_hash,
    }
    report.update(sections)
    return report


class ReportEncoder(DjangoJSONEncoder):
    def default(self, o):
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        return super().default(o)


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, np.generic):
        return value.item()
    return value


def dump_json(report):
    return json.dumps(report, cls=ReportEncoder, indent=2, sort_keys=True) + "\n"


def csv_text(header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# =========================================================
# Tables
# =========================================================
def fit_table_rows(fit, gof=None, ci=None):
    """
    Parameter table: (parameter, value, ci_low, ci_high, p_value). The
    p-value is reported on the x_min row only.
    """
    p_value = gof.p_value if gof is not None else None
    xmin_ci = ci.xmin_interval if ci is not None else (None, None)
    alpha_ci = ci.alpha_interval if ci is not None else (None, None)
    w_ci = ci.w_interval if ci is not None and ci.w_interval else (None, None)

    return [
        ("x_min", fit.x_min, xmin_ci[0], xmin_ci[1], p_value),
        ("alpha", fit.alpha, alpha_ci[0], alpha_ci[1], None),
        ("w", fit.w, w_ci[0], w_ci[1], None),
    ]


FIT_TABLE_HEADER = ["parameter", "value", "ci_low", "ci_high", "p_value"]
PROFILE_HEADER = ["xmin_candidate", "alpha", "ks_distance"]
BAND_HEADER = ["x", "low", "point", "high"]
REPLICATE_HEADER = ["replicate_d"]
CCDF_HEADER = ["value", "survival", "frequency"]
COMPARE_HEADER = ["model", "params", "ks_distance", "p_value", "reject"]


def compare_table_rows(rows):
    return [
        (
            r["model"],
            ";".join(f"{k}={float(v)!r}" for k, v in sorted(r["params"].items())),
            r["ks_distance"],
            r["p_value"],
            r["reject"],
        )
        for r in rows
    ]
