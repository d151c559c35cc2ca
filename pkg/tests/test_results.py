import os
import sys
import tempfile
import unittest
from pathlib import Path
from types import SimpleNamespace

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from tcsl import results, templates
from tcsl.analysis import PulseMetrics
from tcsl.core import FieldState
from tcsl.errors import ComparisonError


class TestResults(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.z = (np.arange(4) + 0.5) * 0.25

    def tearDown(self):
        self.tmp.cleanup()

    def test_floats_use_nine_significant_digits(self):
        path = results.write_rows(self.dir / "x.csv", ["a", "b"], [(1.0 / 3.0, 2.0)])
        self.assertEqual(path.read_text(), "a,b\n0.333333333,2\n")

    def test_spacetime_file_reloads_as_grid(self):
        """Test that a written space-time CSV reads back as a (time, z) grid."""
        # Arrange
        a = np.array([1.0 + 0.5j, 0.25j, -1.0, 0.0])
        snaps = [SimpleNamespace(t=t, fields=FieldState(t * a, 0.5 * a), p12=-0.1j * a)
                 for t in (1.0, 2.0, 3.0)]

        # Act
        path = results.write_spacetime(self.dir / "run" / "st.csv", snaps, self.z)
        data = results.read_spacetime(path)

        # Assert
        self.assertEqual(data.label, "st")
        np.testing.assert_allclose(data.times, [1.0, 2.0, 3.0])
        np.testing.assert_allclose(data.z, self.z)
        self.assertEqual(data.a_plus.shape, (3, 4))
        np.testing.assert_allclose(data.a_plus[2], 3.0 * a)
        np.testing.assert_allclose(data.p12[0], -0.1j * a)

    def test_metrics_header_and_rows(self):
        m = PulseMetrics(5.0, 1.0 + 1.0j, 0.0, 2.0, 0.5, 4.0, 1.0, 0.2, 0.01)
        path = results.write_metrics(self.dir / "m.csv", [m])
        lines = path.read_text().splitlines()
        self.assertEqual(lines[0], ",".join(templates.METRICS_HEADER))
        self.assertEqual(lines[1], "5,1.41421356,0,2,0.5,4,1,0.2,0.01")
        self.assertEqual(lines[0].split(",")[-1], "atomic_norm")

    def test_wrong_header(self):
        path = self.dir / "other.csv"
        path.write_text("t,z\n1,2\n")
        with self.assertRaisesRegex(ComparisonError, "not a space-time CSV"):
            results.read_spacetime(path)

    def test_empty_file(self):
        path = results.write_rows(self.dir / "empty.csv", templates.SPACETIME_HEADER, [])
        with self.assertRaisesRegex(ComparisonError, "no samples"):
            results.read_spacetime(path)

    def test_missing_file(self):
        with self.assertRaisesRegex(ComparisonError, "not found"):
            results.read_spacetime(self.dir / "absent.csv")


if __name__ == '__main__':
    unittest.main()
