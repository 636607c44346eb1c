import io
import json
import os
import tempfile
from datetime import datetime, timedelta, timezone as dt_timezone

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from peakload.ccdf import FRAME_DAILY, PeakSeries
from peakload.ingest import load_value_series, write_peak_series_csv
from peakload.powerlaw import sample_tail


def run(*args):
    out = io.StringIO()
    call_command(*args, stdout=out, stderr=io.StringIO())
    return out.getvalue()


def run_allowing_rejection(*args):
    out = io.StringIO()
    try:
        call_command(*args, stdout=out, stderr=io.StringIO())
    except CommandError as e:
        if e.returncode != 2:
            raise
    return out.getvalue()


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def write(self, name, text):
        path = self.path(name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        return path

    def power_law_file(self, n=150, seed=8):
        values = sample_tail(1.0, 2.5, n, np.random.default_rng(seed))
        return self.write("peaks.csv", "\n".join(repr(float(v)) for v in values) + "\n")

    def assertExitCode(self, code, *args):
        with self.assertRaises(CommandError) as ctx:
            run(*args)
        self.assertEqual(ctx.exception.returncode, code)
        return ctx.exception


class FitCommandTests(CommandTestCase):
    def test_fit_report(self):
        report = json.loads(run("fit", "--input", self.power_law_file(n=2000)))
        self.assertEqual(report["command"], "fit")
        self.assertEqual(report["seed"], 12345)
        self.assertEqual(len(report["input_sha256"]), 64)
        self.assertGreaterEqual(report["fit"]["alpha"], 2.3)
        self.assertLessEqual(report["fit"]["alpha"], 2.7)
        self.assertIsNone(report["gof"])

    def test_zero_replicates_is_a_usage_error(self):
        self.assertExitCode(64, "fit", "--input", self.power_law_file(), "--replicates", "0")

    def test_missing_input_flag(self):
        self.assertExitCode(64, "fit")

    def test_unreadable_input(self):
        self.assertExitCode(64, "fit", "--input", self.path("absent.csv"))

    def test_same_seed_same_bytes(self):
        path = self.power_law_file()
        args = ("fit", "--input", path, "--gof", "--ci", "--replicates", "100", "--seed", "7")
        self.assertEqual(run_allowing_rejection(*args), run_allowing_rejection(*args))

    def test_timestamped_peak_list_is_windowed(self):
        start = datetime(2021, 1, 1, tzinfo=dt_timezone.utc)
        series = PeakSeries(
            values=sample_tail(1.0, 2.5, 900, np.random.default_rng(19)),
            timestamps=tuple(start + timedelta(days=i) for i in range(900)),
            frame=FRAME_DAILY,
        )
        buffer = io.StringIO()
        write_peak_series_csv(series, buffer)
        path = self.write("peaks.csv", buffer.getvalue())

        windowed = json.loads(run("fit", "--input", path))
        full = json.loads(run("fit", "--input", path, "--no-window"))

        # closed 730-day interval ending at the latest peak
        self.assertEqual(windowed["fit"]["n_total"], 731)
        self.assertEqual(full["fit"]["n_total"], 900)

    def test_side_outputs_and_table(self):
        path = self.power_law_file()
        profile = self.path("profile.csv")
        band = self.path("band.csv")
        text = run(
            "fit", "--input", path, "--ci", "--replicates", "100", "--format", "csv",
            "--profile-output", profile, "--band-output", band,
        )
        lines = text.splitlines()
        self.assertEqual(lines[0], "parameter,value,ci_low,ci_high,p_value")
        self.assertEqual([line.split(",")[0] for line in lines[1:]], ["x_min", "alpha", "w"])
        with open(profile, encoding="utf-8") as fh:
            self.assertEqual(fh.readline().strip(), "xmin_candidate,alpha,ks_distance")
        with open(band, encoding="utf-8") as fh:
            self.assertEqual(fh.readline().strip(), "x,low,point,high")


class ExceedCommandTests(CommandTestCase):
    def test_worked_example(self):
        report = json.loads(
            run("exceed", "--x-min", "3085", "--alpha", "22.28", "--w", "0.1356", "--x", "3400")
        )
        self.assertAlmostEqual(report["probability"], 0.0172, delta=0.0005)
        self.assertIsNone(report["interval"])

    def test_below_threshold_exits_3(self):
        error = self.assertExitCode(
            3, "exceed", "--x-min", "3085", "--alpha", "22.28", "--w", "0.1356", "--x", "3000"
        )
        self.assertIn("empirical CCDF", str(error))

    def test_partial_parameters(self):
        self.assertExitCode(64, "exceed", "--x-min", "3085", "--x", "3400")

    def test_query_a_saved_fit_at_threshold(self):
        fit_path = self.path("fit.json")
        run("fit", "--input", self.power_law_file(), "--ci", "--replicates", "100", "--output", fit_path)
        with open(fit_path, encoding="utf-8") as fh:
            fit = json.load(fh)["fit"]

        report = json.loads(run("exceed", "--fit", fit_path, "--x", repr(fit["x_min"])))
        self.assertEqual(report["probability"], fit["w"])
        low, high = report["interval"]
        self.assertLessEqual(low, fit["w"])
        self.assertGreaterEqual(high, fit["w"])


class CcdfCommandTests(CommandTestCase):
    def test_ranked_table(self):
        text = run("ccdf", "--input", self.write("values.csv", "1\n2\n3\n4\n"))
        self.assertEqual(
            text.splitlines(),
            ["value,survival,frequency", "4.0,0.25,1", "3.0,0.5,1", "2.0,0.75,1", "1.0,1.0,1"],
        )

    def test_table_reads_back_as_the_same_sample(self):
        values = [2.0, 2.0, 1.0, 7.5, 3.25]
        text = run("ccdf", "--input", self.write("values.csv", "\n".join(map(str, values))))
        loaded = load_value_series(text.encode("utf-8"))
        self.assertEqual(sorted(loaded.values.tolist()), sorted(values))

    def test_json_points(self):
        report = json.loads(run("ccdf", "--input", self.write("values.csv", "2\n2\n1\n"), "--format", "json"))
        self.assertEqual(report["total"], 3)
        self.assertEqual(report["points"][0]["frequency"], 2)


class SimulateCommandTests(CommandTestCase):
    def test_deterministic_sample(self):
        args = ("simulate", "--x-min", "1", "--alpha", "2.5", "--n", "5", "--seed", "3")
        text = run(*args)
        lines = text.splitlines()
        self.assertEqual(lines[0], "value")
        self.assertEqual(len(lines), 6)
        self.assertTrue(all(float(v) >= 1.0 for v in lines[1:]))
        self.assertEqual(text, run(*args))

    def test_body_stays_below_threshold(self):
        text = run(
            "simulate", "--x-min", "10", "--alpha", "2.5", "--n", "200",
            "--body-fraction", "0.5", "--body-low", "1",
        )
        values = [float(v) for v in text.splitlines()[1:]]
        self.assertEqual(sum(v < 10 for v in values), 100)
        self.assertTrue(all(v >= 1 for v in values))

    def test_json_report_records_seed(self):
        args = ("simulate", "--x-min", "1", "--alpha", "2.5", "--n", "5", "--seed", "3")
        with self.assertLogs("peakload", level="INFO") as logs:
            report = json.loads(run(*args, "--format", "json"))
        self.assertEqual(report["command"], "simulate")
        self.assertEqual(report["seed"], 3)
        self.assertEqual(report["n_tail"], 5)
        csv_values = [float(v) for v in run(*args).splitlines()[1:]]
        self.assertEqual(report["values"], csv_values)
        self.assertTrue(any("seed 3" in line for line in logs.output))

    def test_quantile_spot_value(self):
        self.assertEqual(run("simulate", "--x-min", "1", "--alpha", "2", "--quantile", "0.75").strip(), "4.0")


class CompareCommandTests(CommandTestCase):
    def test_empty_family_list(self):
        self.assertExitCode(64, "compare", "--input", self.power_law_file(), "--families=")

    def test_unknown_family(self):
        self.assertExitCode(64, "compare", "--input", self.power_law_file(), "--families", "weibull")

    def test_rows_and_reproducibility(self):
        args = (
            "compare", "--input", self.power_law_file(), "--families", "exponential",
            "--replicates", "100", "--format", "csv",
        )
        text = run(*args)
        lines = text.splitlines()
        self.assertEqual(lines[0], "model,params,ks_distance,p_value,reject")
        self.assertEqual([line.split(",")[0] for line in lines[1:]], ["power_law", "exponential"])
        self.assertEqual(text, run(*args))


@override_settings(TIME_ZONE="UTC")
class PeaksCommandTests(CommandTestCase):
    def test_daily_peaks_and_rejects(self):
        start = datetime(2024, 1, 1)
        lines = ["timestamp,value"]
        for h in range(48):
            lines.append(f"{(start + timedelta(hours=h)).isoformat()},{h % 24 + 1}")
        lines.append("garbage,3")
        readings = self.write("readings.csv", "\n".join(lines) + "\n")
        rejects = self.path("rejects.csv")

        text = run("peaks", "--input", readings, "--rejects-output", rejects)

        self.assertEqual(
            text.splitlines(),
            [
                "bucket_start,peak",
                "2024-01-01T00:00:00+00:00,24.0",
                "2024-01-02T00:00:00+00:00,24.0",
            ],
        )
        with open(rejects, encoding="utf-8") as fh:
            self.assertEqual(fh.read().splitlines(), ["row_number,reason", "50,BadTimestamp"])

    def test_raw_frame_is_refused(self):
        readings = self.write("readings.csv", "timestamp,value\n2024-01-01T00:00,1\n")
        self.assertExitCode(64, "peaks", "--input", readings, "--frame", "raw")
