import unittest
from unittest.mock import patch, MagicMock
import io
import json
import logging
import os
import sys
import tempfile

import pandas as pd

# Add the parent directory to the path so we can import tschains
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from tschains.core import log_file_path, main, setup_logging

STAIRS_SWAPPED = [40, 20, 1, 23, 2, 58, 3.3, 36, 3, 34, 4, 43, 5]


class TestCore(unittest.TestCase):

    def setUp(self):
        # Create a temporary directory for test files
        self.temp_dir = tempfile.mkdtemp()
        self.series = os.path.join(self.temp_dir, "series.txt")
        with open(self.series, "w") as fh:
            fh.write("\n".join(str(v) for v in STAIRS_SWAPPED) + "\n")

    def tearDown(self):
        # Drop file handlers added by main()
        root = logging.getLogger()
        for h in list(root.handlers):
            if isinstance(h, logging.FileHandler):
                root.removeHandler(h)
                h.close()
        import shutil
        shutil.rmtree(self.temp_dir)

    def _path(self, name):
        return os.path.join(self.temp_dir, name)

    def _run(self, argv):
        err = io.StringIO()
        with patch('sys.stderr', err):
            code = main(argv)
        return code, err.getvalue()

    def test_discover_and_rank(self):
        """discover writes ranked chains; rank reorders a discovery file"""
        out = self._path("chains.json")
        code, _ = self._run(['discover', '-i', self.series, '-l', '1', '--mode', 'raw', '-o', out])
        self.assertEqual(code, 0)
        with open(out) as fh:
            doc = json.load(fh)
        self.assertEqual(list(doc)[0], "schemaVersion")
        self.assertEqual(doc["schemaVersion"], "1")
        self.assertEqual(doc["method"], "tsc22")
        self.assertEqual(doc["chains"][0]["nodes"], [2, 4, 6, 10, 12])
        self.assertEqual(doc["chains"][0]["scores"]["effLen"], 3)
        self.assertEqual(doc["maximalCount"], 5)

        ranked = self._path("ranked.json")
        code, _ = self._run(['rank', '-i', out, '--series', self.series, '--topk', '2', '-o', ranked])
        self.assertEqual(code, 0)
        with open(ranked) as fh:
            doc = json.load(fh)
        self.assertEqual(len(doc["chains"]), 2)
        self.assertEqual(doc["chains"][0]["nodes"], [2, 4, 6, 10, 12])

    def test_discover_to_stdout(self):
        out = io.StringIO()
        with patch('sys.stdout', out):
            code, _ = self._run(['discover', '-i', self.series, '-l', '1', '--mode', 'raw',
                                 '--method', 'tsc17', '--topk', '1'])
        self.assertEqual(code, 0)
        doc = json.loads(out.getvalue())
        self.assertEqual(doc["chains"][0]["nodes"], [10, 12])

    def test_profiles(self):
        out = self._path("profiles.csv")
        inns = self._path("inns.json")
        code, _ = self._run(['profiles', '-i', self.series, '-l', '1', '--mode', 'raw', '-o', out, '--inns', inns])
        self.assertEqual(code, 0)
        frame = pd.read_csv(out)
        self.assertEqual(list(frame.columns), ["index", "leftDist", "leftIdx", "rightDist", "rightIdx"])
        self.assertEqual(len(frame), 13)
        with open(inns) as fh:
            self.assertEqual(json.load(fh)["inns"]["1"], [3, 9, 12])

    def test_synth_then_eval(self):
        series = self._path("bench.csv")
        manifest = self._path("bench.json")
        code, _ = self._run(['synth', '--seed', '4', '--nodes', '5', '--window', '20', '--distractors', '2',
                             '--core-len', '500', '--head-len', '60', '--tail-len', '60',
                             '-o', series, '--manifest', manifest])
        self.assertEqual(code, 0)
        with open(manifest) as fh:
            truth = json.load(fh)
        self.assertEqual(len(truth["chainStarts"]), 5)

        report = self._path("report.json")
        code, _ = self._run(['eval', '--series', series, '--manifest', manifest,
                             '--method', 'tsc22', '--protocol', 'norank', '-o', report])
        self.assertEqual(code, 0)
        with open(report) as fh:
            doc = json.load(fh)
        self.assertEqual(doc["protocol"], "without-ranking")
        self.assertGreaterEqual(doc["hits"], 1)

    def test_synth_is_deterministic(self):
        outputs = []
        for k in range(2):
            series, manifest = self._path(f"s{k}.csv"), self._path(f"m{k}.json")
            code, _ = self._run(['synth', '--seed', '7', '--window', '20', '--nodes', '4',
                                 '--distractors', '1', '--core-len', '300', '--head-len', '30',
                                 '--tail-len', '30', '-o', series, '--manifest', manifest])
            self.assertEqual(code, 0)
            with open(series, "rb") as a, open(manifest, "rb") as b:
                outputs.append((a.read(), b.read()))
        self.assertEqual(outputs[0], outputs[1])

    def test_verify(self):
        out = self._path("verify.json")
        code, _ = self._run(['verify', '--n', '24', '--trials', '1', '-o', out])
        self.assertEqual(code, 0)
        with open(out) as fh:
            self.assertTrue(json.load(fh)["ok"])

    def test_errors(self):
        """Failures exit 1 with one JSON line on stderr"""
        code, err = self._run(['discover', '-i', self._path("missing.txt"), '-l', '4'])
        self.assertEqual(code, 1)
        self.assertEqual(json.loads(err.strip().splitlines()[-1])["error"], "FileNotFoundError")

        short = self._path("short.txt")
        with open(short, "w") as fh:
            fh.write("1\n2\n3\n")
        code, err = self._run(['profiles', '-i', short, '-l', '3'])
        self.assertEqual(code, 1)
        self.assertEqual(json.loads(err.strip().splitlines()[-1])["error"], "SeriesTooShortError")

        code, _ = self._run(['discover', '-i', self.series])
        self.assertEqual(code, 2)

    def test_log_file_in_directory(self):
        path = log_file_path(self.temp_dir)
        self.assertTrue(os.path.basename(path).startswith("tschains_"))
        self.assertTrue(path.endswith(".log"))
        self.assertEqual(log_file_path(self._path("run.log")), self._path("run.log"))

        code, _ = self._run(['verify', '--n', '16', '--trials', '1', '-o', self._path("v.json"),
                             '--log-file', self._path("run.log")])
        self.assertEqual(code, 0)
        with open(self._path("run.log")) as fh:
            self.assertIn("verify finished", fh.read())

    @patch("tschains.core.system.start_monitor")
    @patch("tschains.core.run_benchmark")
    def test_bench_stops_monitor(self, mock_run_benchmark, mock_start_monitor):
        """The monitor thread is stopped and joined once the suite returns"""
        stop_evt, mon_thr = MagicMock(), MagicMock()
        mock_start_monitor.return_value = (stop_evt, mon_thr)
        table = pd.DataFrame({"family": ["average"], "method": ["tsc22"], "runs": [1],
                              "recall": [1.0], "precision": [1.0], "f1": [1.0], "wins": [0]})
        mock_run_benchmark.return_value = ([], table)

        out = self._path("bench.csv")
        code, _ = self._run(['bench', '--seeds', '1', '-o', out])
        self.assertEqual(code, 0)
        stop_evt.set.assert_called_once()
        mon_thr.join.assert_called_once()
        suite = mock_run_benchmark.call_args[0][0]
        self.assertEqual(suite.seeds, (0,))
        self.assertEqual(pd.read_csv(out)["f1"].iloc[0], 1.0)

    def test_setup_logging(self):
        """Test that setup_logging configures logging correctly"""
        with patch("tschains.core.logging.getLogger") as mock_get_logger, patch(
            "tschains.core.logging.StreamHandler"
        ) as mock_stream_handler, patch(
            "tschains.core.logging.Formatter"
        ) as mock_formatter, patch(
            "tschains.core.has_handler_of_type", return_value=False
        ):

            mock_logger = MagicMock()
            mock_get_logger.return_value = mock_logger

            logger, log_format = setup_logging()

            # Verify that getLogger was called with no arguments (gets root logger)
            mock_get_logger.assert_called_once_with()

            # Verify handler and formatter were created
            mock_stream_handler.assert_called_once()
            mock_formatter.assert_called_once()

            # Verify the returned values
            self.assertEqual(logger, mock_logger)
            self.assertIsNotNone(log_format)


if __name__ == '__main__':
    unittest.main()
