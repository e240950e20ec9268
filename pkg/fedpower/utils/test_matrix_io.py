import struct
import tempfile
import unittest
from pathlib import Path

import numpy as np

from fedpower.exceptions import FormatError
from fedpower.utils import matrix_io


class TestMatrixIO(unittest.TestCase):
    def test_header_layout(self):
        payload = matrix_io.dumps(np.array([[1.0, 2.0, 3.0]]))
        self.assertEqual(payload[:4], b"FPMX")
        self.assertEqual(struct.unpack("<II", payload[4:12]), (1, 3))
        self.assertEqual(len(payload), 12 + 3 * 8)
        self.assertEqual(struct.unpack("<d", payload[12:20])[0], 1.0)

    def test_file_roundtrip_is_exact(self):
        m = np.random.default_rng(3).normal(size=(4, 5))
        with tempfile.TemporaryDirectory() as tmp:
            path = matrix_io.write_matrix(Path(tmp) / "m.fpmx", m)
            back = matrix_io.read_matrix(path)
        self.assertTrue(np.array_equal(m, back))

    def test_rejects_bad_magic(self):
        payload = b"XXXX" + matrix_io.dumps(np.eye(2))[4:]
        with self.assertRaises(FormatError):
            matrix_io.loads(payload)

    def test_rejects_truncated_payload(self):
        with self.assertRaises(FormatError):
            matrix_io.loads(matrix_io.dumps(np.eye(2))[:-8])
