import os
import shutil
import struct
import tempfile
import unittest

import numpy as np

from polymodal import stt
from polymodal.errors import MalformedContainer, MissingFile

class STTTestCase(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp(prefix='polymodal-stt-')

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def test_header_layout(self):
        s = stt.to_bytes(np.zeros((2, 3), dtype=np.float32))
        self.assertEqual(s[:4], b'STT1')
        self.assertEqual(struct.unpack('<BB', s[4:6]), (stt.DTYPE_FLOAT32, 2))
        self.assertEqual(struct.unpack('<2I', s[6:14]), (2, 3))
        self.assertEqual(len(s), 14 + 6 * 4)

    def test_file_round_trip_is_bitwise(self):
        rng = np.random.RandomState(0)
        for dims, dtype in (((7,), np.float64), ((3, 4, 5), np.float32), ((1, 1, 103), np.float64)):
            arr = rng.normal(size=dims).astype(dtype)
            path = os.path.join(self.tmpdir, 'x.stt')
            stt.write(path, arr)
            out = stt.read(path)
            self.assertEqual(out.dtype, arr.dtype)
            self.assertEqual(out.tobytes(), arr.tobytes())

    def test_float64_to_float32(self):
        s = stt.to_bytes(np.array([0.1]), stt.DTYPE_FLOAT32)
        self.assertEqual(stt.from_bytes(s)[0], np.float32(0.1))

    def test_malformed(self):
        good = stt.to_bytes(np.ones((2, 2)))
        self.assertRaises(MalformedContainer, stt.from_bytes, b'STT2' + good[4:])
        self.assertRaises(MalformedContainer, stt.from_bytes, good[:4] + b'\x07' + good[5:])
        self.assertRaises(MalformedContainer, stt.from_bytes, good[:-1])
        self.assertRaises(MalformedContainer, stt.from_bytes, good + b'\x00')
        self.assertRaises(MalformedContainer, stt.from_bytes, good[:8])
        self.assertRaises(MalformedContainer, stt.from_bytes, b'STT1' + struct.pack('<BB', 1, 0))
        self.assertRaises(MalformedContainer, stt.from_bytes,
                b'STT1' + struct.pack('<BBI', 1, 1, 0))

    def test_missing_file(self):
        self.assertRaises(MissingFile, stt.read, os.path.join(self.tmpdir, 'absent.stt'))

if __name__ == '__main__':
    unittest.main()
