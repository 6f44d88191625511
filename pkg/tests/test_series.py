import unittest
import io
import math
import os
import sys
import tempfile

import numpy as np

# Add the parent directory to the path so we can import tschains
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from tschains.series import (
    RAW,
    ZNORM,
    SeriesParseError,
    SeriesTooShortError,
    TimeSeries,
    WindowSpec,
    load_series,
    pair_distance,
    pearson_from_distance,
    rolling_stats,
    window_vector,
    znormalize,
)


class TestLoadSeries(unittest.TestCase):

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        import shutil
        shutil.rmtree(self.temp_dir)

    def test_plain_values(self):
        """One value per line, in file order"""
        T = load_series(b"1\n2.5\n-3\n")
        self.assertEqual(T.values.tolist(), [1.0, 2.5, -3.0])

    def test_plain_header_skipped(self):
        """An optional 'value' header line is ignored"""
        T = load_series(io.StringIO("value\n4\n5\n"))
        self.assertEqual(T.values.tolist(), [4.0, 5.0])

    def test_plain_from_path(self):
        path = os.path.join(self.temp_dir, "series.txt")
        with open(path, "w") as fh:
            fh.write("0.1\n0.2\n0.3\n")
        T = load_series(path)
        self.assertEqual(T.n, 3)

    def test_invalid_token_names_line(self):
        """The error message carries the offending line number"""
        with self.assertRaises(SeriesParseError) as ctx:
            load_series(b"1\nabc\n3\n")
        self.assertIn("line 2", str(ctx.exception))

        with self.assertRaises(SeriesParseError) as ctx:
            load_series(b"value\n1\n2\nx\n")
        self.assertIn("line 4", str(ctx.exception))

    def test_non_finite_rejected(self):
        with self.assertRaises(SeriesParseError):
            load_series(b"1\nnan\n3\n")
        with self.assertRaises(SeriesParseError):
            load_series(b"1\ninf\n3\n")

    def test_multiple_values_per_line(self):
        with self.assertRaises(SeriesParseError):
            load_series(b"1 2\n3\n")

    def test_empty_input(self):
        with self.assertRaises(SeriesParseError):
            load_series(b"")
        with self.assertRaises(SeriesParseError):
            load_series(b"value\n")

    def test_csv_column_by_name_and_position(self):
        data = b"a,b\n1,2\n3,4\n"
        self.assertEqual(load_series(data, "csv", "b").values.tolist(), [2.0, 4.0])
        self.assertEqual(load_series(data, "csv", 1).values.tolist(), [2.0, 4.0])
        self.assertEqual(load_series(data, "csv").values.tolist(), [1.0, 3.0])

    def test_csv_missing_column(self):
        with self.assertRaises(SeriesParseError):
            load_series(b"a,b\n1,2\n", "csv", "c")
        with self.assertRaises(SeriesParseError):
            load_series(b"a,b\n1,2\n", "csv", 5)

    def test_csv_bad_value_line(self):
        with self.assertRaises(SeriesParseError) as ctx:
            load_series(b"a\n1\nfoo\n", "csv", "a")
        self.assertIn("line 3", str(ctx.exception))

    def test_invalid_utf8_names_line(self):
        with self.assertRaises(SeriesParseError) as ctx:
            load_series(b"1\n2\n\xff\n4\n")
        self.assertIn("line 3", str(ctx.exception))

        path = os.path.join(self.temp_dir, "latin1.txt")
        with open(path, "wb") as fh:
            fh.write(b"value\n1.5\n\xe92\n")
        with self.assertRaises(SeriesParseError) as ctx:
            load_series(path)
        self.assertIn("line 3", str(ctx.exception))

    def test_unknown_format(self):
        with self.assertRaises(ValueError):
            load_series(b"1\n2\n", "xml")


class TestTimeSeries(unittest.TestCase):

    def test_rejects_non_finite(self):
        with self.assertRaises(ValueError):
            TimeSeries(np.array([1.0, np.nan]))

    def test_rejects_empty(self):
        with self.assertRaises(ValueError):
            TimeSeries(np.array([]))

    def test_values_read_only(self):
        T = TimeSeries([1, 2, 3])
        with self.assertRaises(ValueError):
            T.values[0] = 5.0


class TestWindowSpec(unittest.TestCase):

    def test_default_exclusion(self):
        """Exclusion radius defaults to ceil(l/2)"""
        self.assertEqual(WindowSpec(4).exclusion, 2)
        self.assertEqual(WindowSpec(5).exclusion, 3)
        self.assertEqual(WindowSpec(1, RAW).exclusion, 1)
        self.assertEqual(WindowSpec(8, ZNORM, 1).exclusion, 1)

    def test_invalid_specs(self):
        with self.assertRaises(ValueError):
            WindowSpec(2, ZNORM)
        with self.assertRaises(ValueError):
            WindowSpec(0, RAW)
        with self.assertRaises(ValueError):
            WindowSpec(4, "cosine")
        with self.assertRaises(ValueError):
            WindowSpec(4, ZNORM, 0)

    def test_check_needs_two_windows(self):
        spec = WindowSpec(3)
        self.assertEqual(spec.check(TimeSeries([1, 2, 3, 4])), 2)
        with self.assertRaises(SeriesTooShortError):
            spec.check(TimeSeries([1, 2, 3]))


class TestDistances(unittest.TestCase):

    def test_rolling_stats(self):
        stats = rolling_stats(TimeSeries([1, 2, 3, 4]), 2)
        np.testing.assert_allclose(stats.mu, [1.5, 2.5, 3.5])
        np.testing.assert_allclose(stats.sigma, [0.5, 0.5, 0.5])
        self.assertFalse(stats.degenerate.any())

    def test_flat_window_flagged(self):
        stats = rolling_stats(TimeSeries([1, 1, 1, 2]), 3)
        self.assertEqual(stats.degenerate.tolist(), [True, False])

    def test_raw_distance(self):
        T = TimeSeries([1, 2, 4, 8])
        self.assertEqual(pair_distance(T, 0, 3, WindowSpec(1, RAW)), 7.0)
        self.assertAlmostEqual(pair_distance(T, 0, 2, WindowSpec(2, RAW)), math.sqrt(9 + 36))

    def test_znorm_distance_extremes(self):
        """Same shape gives 0; mirrored shape gives sqrt(4l)"""
        T = TimeSeries([0, 1, 2, 10, 20, 30, 2, 1, 0])
        spec = WindowSpec(3)
        self.assertAlmostEqual(pair_distance(T, 0, 3, spec), 0.0, places=6)
        self.assertAlmostEqual(pair_distance(T, 0, 6, spec), math.sqrt(12.0), places=9)

    def test_flat_window_is_infinitely_far(self):
        T = TimeSeries([5, 5, 5, 1, 2, 3])
        self.assertEqual(pair_distance(T, 0, 3, WindowSpec(3)), math.inf)

    def test_out_of_range(self):
        with self.assertRaises(IndexError):
            pair_distance(TimeSeries([1, 2, 3]), 0, 3, WindowSpec(1, RAW))

    def test_pearson_from_distance(self):
        self.assertEqual(pearson_from_distance(0.0, 10), 1.0)
        self.assertAlmostEqual(pearson_from_distance(math.sqrt(40.0), 10), -1.0)

    def test_znormalize(self):
        z = znormalize(np.array([1.0, 2.0, 3.0]))
        self.assertAlmostEqual(z.mean(), 0.0)
        self.assertAlmostEqual(z.std(), 1.0)
        self.assertTrue(np.all(znormalize(np.array([3.0, 3.0])) == 0.0))

    def test_window_vector_modes(self):
        T = TimeSeries([1, 2, 3, 4])
        np.testing.assert_array_equal(window_vector(T, 1, WindowSpec(2, RAW)), [2.0, 3.0])
        self.assertAlmostEqual(float(window_vector(T, 1, WindowSpec(3)).std()), 1.0)

    def test_pair_distance_symmetric(self):
        rng = np.random.default_rng(21)
        T = TimeSeries(rng.standard_normal(200))
        spec = WindowSpec(12)
        stats = rolling_stats(T, 12)
        for i, j in rng.integers(0, spec.windows(T), size=(200, 2)):
            self.assertEqual(pair_distance(T, i, j, spec, stats), pair_distance(T, j, i, spec, stats))

    def test_distance_gives_pearson(self):
        """r = 1 - d^2 / (2l) against a direct correlation"""
        rng = np.random.default_rng(4)
        T = TimeSeries(np.cumsum(rng.standard_normal(500)))
        l = 20
        spec = WindowSpec(l)
        stats = rolling_stats(T, l)
        for i, j in rng.integers(0, spec.windows(T), size=(1000, 2)):
            r = pearson_from_distance(pair_distance(T, i, j, spec, stats), l)
            expected = np.corrcoef(T.window(i, l), T.window(j, l))[0, 1]
            self.assertAlmostEqual(r, expected, delta=1e-9)

    def test_rescaling_one_window(self):
        """Scaling and shifting a single window leaves its z-normalized distances unchanged"""
        rng = np.random.default_rng(8)
        values = rng.standard_normal(120)
        spec = WindowSpec(10)
        moved = values.copy()
        moved[40:50] = 3.0 * moved[40:50] + 250.0
        a, b = TimeSeries(values), TimeSeries(moved)
        for j in (0, 10, 25, 30, 60, 95, 110):
            self.assertAlmostEqual(pair_distance(a, 40, j, spec), pair_distance(b, 40, j, spec), delta=1e-9)

    def test_large_offset_keeps_precision(self):
        rng = np.random.default_rng(2)
        values = rng.standard_normal(64)
        spec = WindowSpec(8)
        base = TimeSeries(values)
        shifted = TimeSeries(values + 1e8)
        for j in (10, 20, 33, 50):
            self.assertAlmostEqual(pair_distance(base, 0, j, spec), pair_distance(shifted, 0, j, spec), delta=1e-6)

    def test_stats_centre(self):
        T = TimeSeries([1e6 + 1, 1e6 + 2, 1e6 + 3, 1e6 + 4])
        stats = rolling_stats(T, 2)
        self.assertEqual(stats.centre, 1e6 + 2.5)
        np.testing.assert_allclose(stats.centred_mu, [-1.0, 0.0, 1.0])
        np.testing.assert_allclose(stats.mu, T.values[:3] + 0.5)


if __name__ == '__main__':
    unittest.main()
