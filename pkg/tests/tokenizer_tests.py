import unittest

import numpy as np

from polymodal.tokenizer import BOS, EOS, PAD, SEP, VOCAB_SIZE, detokenize, tokenize_text

class TokenizerTestCase(unittest.TestCase):
    def test_round_trip_random_bytes(self):
        rng = np.random.RandomState(0)
        for i in range(10000):
            s = rng.randint(0, 256, size=rng.randint(0, 1025)).astype(np.uint8).tobytes()
            ids = tokenize_text(s)
            self.assertEqual(len(ids), len(s))
            self.assertEqual(detokenize(ids), s)

    def test_text_is_utf8(self):
        self.assertEqual(tokenize_text('é'), [0xc3, 0xa9])
        self.assertEqual(tokenize_text(''), [])

    def test_specials_dropped(self):
        self.assertEqual(detokenize([BOS, 104, 105, SEP, PAD, EOS]), b'hi')
        self.assertEqual(VOCAB_SIZE, 260)
        self.assertTrue(all(i < VOCAB_SIZE for i in (PAD, BOS, EOS, SEP)))

if __name__ == '__main__':
    unittest.main()
