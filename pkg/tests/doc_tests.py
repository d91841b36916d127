import doctest
import unittest

from polymodal import errors, format, metrics, tokenizer

def load_tests(loader, tests, ignore):
    for module in (errors, format, metrics, tokenizer):
        tests.addTests(doctest.DocTestSuite(module))
    return tests

class ErrorTestCase(unittest.TestCase):
    def test_abstract(self):
        self.assertRaises(TypeError, errors.PolymodalError)
        self.assertRaises(TypeError, errors.ContractError)

    def test_required_params(self):
        self.assertRaises(TypeError, errors.InvalidConfig, field='seed')

    def test_exit_codes(self):
        self.assertEqual(errors.InvalidConfig(field='seed', value=-1, reason='bad').exit_code, 1)
        self.assertEqual(errors.MissingFile(path='x').exit_code, 2)
        self.assertTrue(isinstance(errors.HashMismatch(path='x', expected='a', actual='b'), errors.DataIOError))

    def test_serialize(self):
        d = errors.EmptyInput(metric='mrr').serialize()
        self.assertEqual(list(d), ['description', 'code'])
        self.assertEqual(d['code'], errors.EmptyInput.code)

    def test_equality(self):
        self.assertEqual(errors.MissingFile(path='a'), errors.MissingFile(path='a'))
        self.assertNotEqual(errors.MissingFile(path='a'), errors.MissingFile(path='b'))

if __name__ == '__main__':
    unittest.main()
