import os
import shutil
import tempfile
import unittest
from unittest import mock

from wigner_matching.config import DEFAULT_OUT, OUT_ENV, ExperimentConfig
from wigner_matching.exceptions import ConfigException
from wigner_matching.phase.derivative import FiniteDifferenceBackend, SpectralBackend
from wigner_matching.phase.loader import dump_json


class ExperimentConfigTestCase(unittest.TestCase):
    def setUp(self):
        super().setUp()
        self.out = tempfile.mkdtemp(prefix='wigner_matching_test_')

    def tearDown(self):
        super().tearDown()
        shutil.rmtree(self.out, ignore_errors=True)

    def test_defaults(self):
        config = ExperimentConfig()
        config.validate()
        grid = config.region_grid('x<0')
        self.assertEqual((grid.x_min, grid.x_max, grid.nx, grid.n_p), (-3.0, 0.0, 31, 31))
        self.assertEqual(config.region_grid('x>0').x_max, 3.0)
        self.assertEqual(config.region_grid('all', refine=2).nx, 61)
        self.assertIsNone(config.derivative_backend())
        self.assertEqual(config.complex_times, [0j, 1 + 0j, 1 - 0.5j])

    def test_tolerances(self):
        config = ExperimentConfig(tol_scale=10.0, tolerances={'sse': 1e-9})
        self.assertAlmostEqual(config.tolerance('sse'), 1e-8)
        self.assertAlmostEqual(config.tolerance('transform'), 1e-5)
        self.assertEqual(config.tolerance('eigen'), 1e-2)
        with self.assertRaisesRegex(ConfigException, 'Unknown tolerance'):
            config.tolerance('speed')

    def test_invalid(self):
        with self.assertRaisesRegex(ConfigException, 'Unknown configuration keys: colour'):
            ExperimentConfig.from_json({'colour': 'red'})
        with self.assertRaisesRegex(ConfigException, 'undersized grid'):
            ExperimentConfig.from_json({'grid': {'nx': 2}})
        with self.assertRaisesRegex(ConfigException, 'Unknown grid keys'):
            ExperimentConfig.from_json({'grid': {'dx': 0.1}})
        with self.assertRaisesRegex(ConfigException, 'tol_scale must be positive'):
            ExperimentConfig.from_json({'tol_scale': 0.0})
        with self.assertRaisesRegex(ConfigException, 'Unknown derivative backend'):
            ExperimentConfig.from_json({'backend': 'chebyshev'})
        with self.assertRaisesRegex(ConfigException, 'Invalid quadrature settings'):
            ExperimentConfig.from_json({'quadrature': {'nodes': 3}})
        with self.assertRaisesRegex(ConfigException, r'\[t, s\] pairs'):
            ExperimentConfig.from_json({'times': [[1.0]]})

    def test_backends(self):
        self.assertIsInstance(ExperimentConfig(backend='fd6').derivative_backend(), FiniteDifferenceBackend)
        self.assertIsInstance(ExperimentConfig(backend='spectral:0.1').derivative_backend(), SpectralBackend)

    def test_load(self):
        path = os.path.join(self.out, 'config.json')
        dump_json({'seed': 11, 'grid': {'nx': 41}}, path)
        config = ExperimentConfig.load(path)
        self.assertEqual(config.seed, 11)
        self.assertEqual(config.region_grid('all').nx, 41)
        with self.assertRaisesRegex(ConfigException, 'missing or is not valid JSON'):
            ExperimentConfig.load(os.path.join(self.out, 'absent.json'))

    def test_out_dir(self):
        with mock.patch.dict(os.environ, {OUT_ENV: self.out}):
            self.assertEqual(ExperimentConfig().out_dir, self.out)
            self.assertEqual(ExperimentConfig(out='elsewhere').out_dir, 'elsewhere')
        with mock.patch.dict(os.environ, clear=True):
            self.assertEqual(ExperimentConfig().out_dir, DEFAULT_OUT)


if __name__ == '__main__':
    unittest.main()
