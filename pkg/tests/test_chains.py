import unittest
import os
import sys

import numpy as np

# Add the parent directory to the path so we can import tschains
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from tschains.chains import (
    TSC17,
    TSC20,
    TSC22,
    Chain,
    backward_chain,
    critical_nodes,
    direction_angle,
    discover,
    discover_tsc17,
    discover_tsc20,
    discover_tsc22,
    forward_chain,
    grow_forced,
    window_vectors,
)
from tschains.profiles import compute_profiles
from tschains.series import RAW, TimeSeries, WindowSpec

STAIRS = [40, 20, 1, 23, 2, 58, 3, 36, 3.3, 34, 4, 43, 5]
STAIRS_SWAPPED = [40, 20, 1, 23, 2, 58, 3.3, 36, 3, 34, 4, 43, 5]


def _profiles(values):
    T = TimeSeries(values)
    return T, compute_profiles(T, WindowSpec(1, RAW))


def _keys(chains):
    return {c.nodes for c in chains}


class TestChain(unittest.TestCase):

    def test_nodes_must_increase(self):
        with self.assertRaises(ValueError):
            Chain(TSC22, (3, 1))
        with self.assertRaises(ValueError):
            Chain(TSC22, (1, 1))

    def test_accessors(self):
        c = Chain(TSC22, (1, 4, 9), window=2)
        self.assertEqual(len(c), 3)
        self.assertEqual(c.latest, 9)
        self.assertEqual(c.earliest, 1)
        self.assertEqual(c.backward(), (9, 4, 1))


class TestPlainChains(unittest.TestCase):

    def test_backward_chain(self):
        _, ps = _profiles(STAIRS)
        self.assertEqual(backward_chain(ps, 12).nodes, (0, 1, 2, 4, 6, 8, 10, 12))
        self.assertEqual(backward_chain(ps, 0).nodes, (0,))

    def test_backward_chain_monotone(self):
        _, ps = _profiles([1, 2, 4, 8])
        self.assertEqual(backward_chain(ps, 3).nodes, (0, 1, 2, 3))

    def test_forward_chain(self):
        _, ps = _profiles(STAIRS)
        self.assertEqual(forward_chain(ps, 0).nodes, (0, 11, 12))

    def test_critical_nodes(self):
        _, ps = _profiles(STAIRS_SWAPPED)
        crit = critical_nodes(ps)
        self.assertEqual(set(crit.indices.tolist()), {3, 4, 8, 9, 10, 11, 12})
        self.assertIn(10, crit)
        self.assertNotIn(6, crit)
        self.assertNotIn(99, crit)
        self.assertEqual(len(crit), 7)


class TestTsc17(unittest.TestCase):

    def test_maximal_paths(self):
        _, ps = _profiles(STAIRS)
        cs = discover_tsc17(ps)
        self.assertEqual(
            _keys(cs.maximal),
            {(2, 4, 6, 8, 10, 12), (1, 3), (7, 9), (0, 11)},
        )
        # 15 runs of the long path plus the three pairs
        self.assertEqual(len(cs.candidates), 18)
        self.assertIn((6, 8, 10), _keys(cs.candidates))

    def test_full_chain_on_monotone_series(self):
        _, ps = _profiles([1, 2, 4, 8])
        self.assertEqual(_keys(discover_tsc17(ps).maximal), {(0, 1, 2, 3)})

    def test_candidate_cap_keeps_longest(self):
        _, ps = _profiles(STAIRS)
        cs = discover_tsc17(ps, max_candidates=5)
        self.assertEqual(len(cs.candidates), 5)
        self.assertTrue(all(len(c) >= 4 for c in cs.candidates))
        self.assertIn((2, 4, 6, 8, 10, 12), _keys(cs.candidates))

    def test_cap_on_long_chain_builds_longest_runs(self):
        """A single chain of 1500 nodes has over a million runs; only the cap is built"""
        T = TimeSeries(np.arange(1500, dtype=float))
        ps = compute_profiles(T, WindowSpec(1, RAW))
        for method in (TSC17, TSC22):
            cs = discover(ps, T, method, {"max_candidates": 50})
            self.assertEqual(len(cs.candidates), 50)
            self.assertEqual(cs.candidates[0].nodes, tuple(range(1500)))
            # sizes 1500 down to 1491 give 45 runs, the last 5 have 1490 nodes
            self.assertEqual(min(len(c) for c in cs.candidates), 1490)
            self.assertEqual(len(_keys(cs.candidates)), 50)


class TestTsc22(unittest.TestCase):

    def test_maximal_chains(self):
        _, ps = _profiles(STAIRS_SWAPPED)
        cs = discover_tsc22(ps)
        self.assertEqual(
            _keys(cs.maximal),
            {(2, 4, 6, 10, 12), (0, 11), (7, 9), (2, 4, 6, 8), (1, 3)},
        )

    def test_candidates_end_on_critical_nodes(self):
        _, ps = _profiles(STAIRS_SWAPPED)
        crit = critical_nodes(ps)
        cs = discover_tsc22(ps)
        self.assertTrue(cs.candidates)
        for c in cs.candidates:
            self.assertIn(c.latest, crit)
            self.assertGreaterEqual(len(c), 2)
        self.assertIn((2, 4, 6, 10), _keys(cs.candidates))
        self.assertNotIn((2, 4, 6), _keys(cs.candidates))

    def test_contains_tsc17_candidates(self):
        """Every mutual-link chain is also a relaxed chain"""
        rng = np.random.default_rng(42)
        for trial in range(5):
            T = TimeSeries(rng.standard_normal(120))
            ps = compute_profiles(T, WindowSpec(6))
            strict = _keys(discover(ps, T, TSC17).candidates)
            relaxed = _keys(discover(ps, T, TSC22).candidates)
            self.assertTrue(strict <= relaxed, f"trial {trial}: {sorted(strict - relaxed)[:3]}")


class TestTsc20(unittest.TestCase):

    def test_direction_angle(self):
        origin = np.array([0.0, 0.0])
        self.assertAlmostEqual(direction_angle(origin, [1.0, 0.0], [0.0, 1.0]), 90.0)
        self.assertAlmostEqual(direction_angle(origin, [1.0, 0.0], [2.0, 0.0]), 0.0)
        self.assertAlmostEqual(direction_angle(origin, [1.0, 0.0], [-1.0, 0.0]), 180.0)
        self.assertEqual(direction_angle(origin, [0.0, 0.0], [0.0, 1.0]), 0.0)

    def test_invalid_angle(self):
        T, ps = _profiles(STAIRS)
        with self.assertRaises(ValueError):
            discover_tsc20(ps, T, theta=0)
        with self.assertRaises(ValueError):
            discover_tsc20(ps, T, theta=181)

    def test_one_dimensional_chain(self):
        """With l=1 every step points the same way or straight back"""
        T, ps = _profiles(STAIRS)
        cs = discover_tsc20(ps, T)
        self.assertIn((2, 4, 6, 8, 10, 12), _keys(cs.maximal))
        self.assertEqual(cs.params, {"angle": 40.0})

    def test_maximal_not_covered(self):
        rng = np.random.default_rng(8)
        T = TimeSeries(rng.standard_normal(150))
        ps = compute_profiles(T, WindowSpec(5))
        cs = discover_tsc20(ps, T, theta=60)
        maximal = _keys(cs.maximal)
        candidates = _keys(cs.candidates)
        self.assertTrue(maximal <= candidates)
        for small in maximal:
            n = len(small)
            for big in candidates:
                if len(big) > n:
                    runs = {big[p:p + n] for p in range(len(big) - n + 1)}
                    self.assertNotIn(small, runs)

    def test_sub_chains_sharing_anchor(self):
        T, ps = _profiles(STAIRS)
        cs = discover_tsc20(ps, T)
        keys = _keys(cs.candidates)
        for run in ((10, 12), (8, 10, 12), (6, 8, 10, 12), (4, 6, 8, 10, 12)):
            self.assertIn(run, keys)
        self.assertNotIn((8, 10, 12), _keys(cs.maximal))
        for c in cs.candidates:
            full = grow_forced(ps, T, c.latest, TSC20).nodes
            self.assertEqual(full[len(full) - len(c):], c.nodes)

    def test_window_vectors(self):
        T = TimeSeries([1, 2, 3, 5, 8])
        raw = window_vectors(T, WindowSpec(2, RAW))
        self.assertEqual(raw.shape, (4, 2))
        z = window_vectors(T, WindowSpec(3))
        np.testing.assert_allclose(z.std(axis=1), 1.0)


class TestGrowForced(unittest.TestCase):

    def test_each_method(self):
        T, ps = _profiles(STAIRS)
        self.assertEqual(grow_forced(ps, T, 12, TSC17).nodes, (2, 4, 6, 8, 10, 12))
        self.assertEqual(grow_forced(ps, T, 12, TSC20).nodes, (2, 4, 6, 8, 10, 12))

        T, ps = _profiles(STAIRS_SWAPPED)
        self.assertEqual(grow_forced(ps, T, 12, TSC22).nodes, (2, 4, 6, 10, 12))

    def test_non_critical_start_is_anchor(self):
        T, ps = _profiles(STAIRS_SWAPPED)
        # 6 is not in INNS(4), so the walk cannot leave 6
        self.assertEqual(grow_forced(ps, T, 6, TSC22).nodes, (6,))

    def test_unknown_method(self):
        T, ps = _profiles(STAIRS)
        with self.assertRaises(ValueError):
            grow_forced(ps, T, 12, "tsc99")
        with self.assertRaises(ValueError):
            discover(ps, T, "tsc99")
        with self.assertRaises(IndexError):
            grow_forced(ps, T, 13, TSC17)


if __name__ == '__main__':
    unittest.main()
