import numpy as np
from django.test import SimpleTestCase

from peakload.ccdf import (
    FRAME_DAILY,
    PeakSeries,
    build_empirical_ccdf,
    empirical_survival,
    survival_at,
)
from peakload.exceptions import EmptyInput, InvalidParameter, InvalidValue


class PeakSeriesTests(SimpleTestCase):
    def test_values_are_read_only_copies(self):
        source = [3.0, 1.0, 2.0]
        series = PeakSeries(source)
        source[0] = 99.0

        self.assertEqual(series.values.tolist(), [3.0, 1.0, 2.0])
        with self.assertRaises(ValueError):
            series.values[0] = 5.0

    def test_rejects_empty_and_non_positive(self):
        with self.assertRaises(EmptyInput):
            PeakSeries([])
        with self.assertRaises(InvalidValue) as ctx:
            PeakSeries([1.0, 0.0, 2.0])
        self.assertEqual(ctx.exception.index, 1)
        with self.assertRaises(InvalidValue):
            PeakSeries([1.0, float("inf")])

    def test_from_values(self):
        series = PeakSeries.from_values(np.array([2.5, 1.0]), frame=FRAME_DAILY)
        self.assertEqual(series.values.tolist(), [2.5, 1.0])
        self.assertEqual(series.frame, FRAME_DAILY)
        self.assertFalse(series.has_timestamps)
        with self.assertRaises(InvalidValue):
            PeakSeries.from_values([1.0, -2.0])

    def test_timestamps_must_match_and_increase(self):
        with self.assertRaises(InvalidParameter):
            PeakSeries([1.0, 2.0], timestamps=(1,), frame=FRAME_DAILY)
        with self.assertRaises(InvalidValue):
            PeakSeries([1.0, 2.0], timestamps=(2, 1), frame=FRAME_DAILY)

    def test_unknown_frame(self):
        with self.assertRaises(InvalidParameter):
            PeakSeries([1.0], frame="fortnightly")


class EmpiricalCcdfTests(SimpleTestCase):
    def test_single_value(self):
        ccdf = build_empirical_ccdf(PeakSeries([5.0]))
        self.assertEqual(ccdf.points, ((5.0, 1.0),))

    def test_four_distinct_values(self):
        ccdf = build_empirical_ccdf(PeakSeries([1.0, 2.0, 3.0, 4.0]))
        self.assertEqual(
            ccdf.points,
            ((4.0, 0.25), (3.0, 0.5), (2.0, 0.75), (1.0, 1.0)),
        )

    def test_ties_collapse_with_frequency(self):
        ccdf = build_empirical_ccdf(PeakSeries([2.0, 2.0, 1.0]))
        self.assertEqual(len(ccdf.points), 2)
        self.assertEqual(ccdf.points[0][0], 2.0)
        self.assertAlmostEqual(ccdf.points[0][1], 2 / 3)
        self.assertEqual(ccdf.points[1], (1.0, 1.0))
        self.assertEqual(ccdf.frequencies, (2, 1))
        self.assertEqual(ccdf.total, 3)

    def test_matches_brute_force_count(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            values = np.round(rng.lognormal(0.0, 1.0, size=int(rng.integers(1, 60))), 2) + 0.01
            ccdf = build_empirical_ccdf(PeakSeries(values))
            for value, survival in ccdf.points:
                expected = sum(1 for v in values if v >= value) / values.size
                self.assertAlmostEqual(survival, expected, places=12)
            self.assertEqual(sum(ccdf.frequencies), values.size)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(11)
        values = rng.pareto(1.5, size=200) + 1.0
        first = build_empirical_ccdf(PeakSeries(values))
        second = build_empirical_ccdf(PeakSeries(rng.permutation(values)))
        self.assertEqual(first.points, second.points)
        self.assertEqual(first.frequencies, second.frequencies)

    def test_survival_is_monotone_and_reaches_one(self):
        rng = np.random.default_rng(3)
        ccdf = build_empirical_ccdf(PeakSeries(rng.exponential(size=300) + 0.1))
        survivals = [s for _, s in ccdf.points]
        values = [v for v, _ in ccdf.points]
        self.assertTrue(all(a > b for a, b in zip(values, values[1:])))
        self.assertTrue(all(a < b for a, b in zip(survivals, survivals[1:])))
        self.assertEqual(survivals[-1], 1.0)

    def test_rows_in_ranked_table_order(self):
        ccdf = build_empirical_ccdf(PeakSeries([2.0, 2.0, 1.0]))
        rows = list(ccdf.as_rows())
        self.assertEqual(rows[0][:2], (2.0, 2))
        self.assertEqual(rows[1], (1.0, 1, 1.0))


class SurvivalAtTests(SimpleTestCase):
    def setUp(self):
        self.ccdf = build_empirical_ccdf(PeakSeries([1.0, 2.0, 3.0, 4.0]))

    def test_step_lookup(self):
        self.assertEqual(survival_at(self.ccdf, 3), 0.5)
        self.assertEqual(survival_at(self.ccdf, 2.5), 0.5)

    def test_outside_observed_range(self):
        self.assertEqual(survival_at(self.ccdf, 5), 0.0)
        self.assertEqual(survival_at(self.ccdf, 0.5), 1.0)

    def test_non_finite_query(self):
        with self.assertRaises(InvalidValue):
            survival_at(self.ccdf, float("nan"))

    def test_vector_helper_agrees(self):
        xs = [0.5, 1.0, 2.5, 3.0, 4.0, 4.5]
        expected = [survival_at(self.ccdf, x) for x in xs]
        got = empirical_survival(np.array([1.0, 2.0, 3.0, 4.0]), xs)
        self.assertEqual(got.tolist(), expected)
