"""
Tests for run configuration parsing, overrides and manifests
"""

import pytest
import unittest
import tempfile
import shutil
import sys
import os

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from data_functions import GaussianBump, ReferenceForcing, Zero
from models import MethodKind
from run_config import ConfigError, RunConfig, apply_overrides, load, parse


pytestmark = pytest.mark.unit


class TestDefaults(unittest.TestCase):
    """Defaults reproduce the reference setup"""

    def test_positive_defaults(self):
        config = RunConfig()
        spec = config.problem()
        self.assertEqual(spec.a, 1.0)
        self.assertEqual(spec.nu, 1e-3)
        self.assertEqual((spec.c, spec.l1, spec.l2, spec.t_final), (1.0, 1.0, 1.0, 1.0))
        self.assertEqual(spec.f, ReferenceForcing(t0=0.1))
        self.assertEqual(spec.h, GaussianBump(x0=-0.6))
        self.assertIsInstance(spec.g1, Zero)
        self.assertIsInstance(spec.g2, Zero)

    def test_negative_sign_moves_bump(self):
        config = parse("[problem]\nsign = negative\n")
        self.assertEqual(config.a, -1.0)
        self.assertEqual(config.problem().h, GaussianBump(x0=0.5))

    def test_nu_override_in_problem(self):
        self.assertEqual(RunConfig().problem(nu=3e-2).nu, 3e-2)

    def test_methods_and_lists(self):
        config = RunConfig()
        self.assertEqual(config.method.label, 'factorization_k1')
        self.assertEqual([m.label for m in config.methods],
                         ['variational', 'non_variational', 'factorization_k1', 'factorization_k2'])
        self.assertEqual(config.nu_list, [3e-2, 1e-2, 3e-3, 1e-3])
        self.assertEqual(config.snapshot_times, [0.25, 0.5, 0.75])


class TestParsing(unittest.TestCase):

    def test_ini_values(self):
        config = parse("[problem]\nnu = 0.01\nforcing = zero\n[grid]\nn_cells = 400\n")
        self.assertEqual(config.get('problem', 'nu'), 0.01)
        self.assertEqual(config.get('grid', 'n_cells'), 400)
        self.assertIsInstance(config.problem().f, Zero)

    def test_unknown_key_named(self):
        with self.assertRaises(ConfigError) as exc:
            parse("[problem]\nvisocsity = 0.01\n")
        self.assertIn('visocsity', str(exc.exception))

    def test_unknown_section(self):
        with self.assertRaises(ConfigError) as exc:
            parse("[solver]\nnu = 0.01\n")
        self.assertIn('solver', str(exc.exception))

    def test_bad_type(self):
        with self.assertRaises(ConfigError):
            parse("[grid]\nn_cells = many\n")

    def test_bad_choice(self):
        with self.assertRaises(ConfigError):
            parse("[problem]\nsign = sideways\n")

    def test_bad_method(self):
        config = parse("[sweep]\nmethod = schwarz\n")
        with self.assertRaises(ConfigError):
            config.method

    def test_bad_number_list(self):
        config = parse("[sweep]\nnu_list = 1e-2,abc\n")
        with self.assertRaises(ConfigError):
            config.nu_list

    def test_malformed_file(self):
        with self.assertRaises(ConfigError):
            parse("[problem\nnu = 1\n")

    def test_non_variational_options(self):
        config = parse("[sweep]\nmethod = non_variational\ntheta = 0.25\nmax_iters = 10\n")
        method = config.method
        self.assertIs(method.kind, MethodKind.NON_VARIATIONAL)
        self.assertEqual((method.theta, method.max_iters), (0.25, 10))


class TestOverrides(unittest.TestCase):

    def test_qualified_and_bare_keys(self):
        config = apply_overrides(RunConfig(), ['problem.nu=0.02', 'n_cells=800'])
        self.assertEqual(config.get('problem', 'nu'), 0.02)
        self.assertEqual(config.get('grid', 'n_cells'), 800)

    def test_malformed_override(self):
        with self.assertRaises(ConfigError):
            apply_overrides(RunConfig(), ['nu'])

    def test_unknown_override(self):
        with self.assertRaises(ConfigError):
            apply_overrides(RunConfig(), ['grid.spacing=3'])

    def test_none_resets_derived_value(self):
        config = apply_overrides(RunConfig(), ['x0=0.2', 'x0=none'])
        self.assertEqual(config.x0, -0.6)


class TestManifest(unittest.TestCase):
    """Manifests round trip through load()"""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_sorted_lines(self):
        lines = RunConfig().manifest_lines()
        self.assertEqual(lines, sorted(lines))
        self.assertIn('problem.nu=0.001', lines)
        self.assertIn('grid.n_steps=', lines)

    def test_manifest_reloads_identically(self):
        config = apply_overrides(RunConfig(), ['nu=0.0123', 'sign=negative', 'theta=0.3'])
        path = os.path.join(self.temp_dir, 'manifest.txt')
        config.write_manifest(path)
        reloaded = load(path)
        self.assertEqual(reloaded.values, config.values)
        self.assertEqual(reloaded.manifest_lines(), config.manifest_lines())

    def test_floats_keep_every_digit(self):
        config = apply_overrides(RunConfig(), ['nu=0.1'])
        path = os.path.join(self.temp_dir, 'manifest.txt')
        config.write_manifest(path)
        self.assertEqual(load(path).get('problem', 'nu'), 0.1)

    def test_load_ini_with_overrides(self):
        path = os.path.join(self.temp_dir, 'run.ini')
        with open(path, 'w') as f:
            f.write("[problem]\nnu = 0.05\n")
        config = load(path, ['nu=0.04'])
        self.assertEqual(config.get('problem', 'nu'), 0.04)

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            load(os.path.join(self.temp_dir, 'absent.ini'))

    def test_shipped_configs_parse(self):
        root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
        for name in ('positive.ini', 'negative.ini'):
            config = load(os.path.join(root, 'configs', name))
            self.assertTrue(config.methods)
            self.assertTrue(config.nu_list)


@pytest.mark.parametrize('text', ['', '# only a comment\n'])
def test_empty_configuration_gives_defaults(text):
    assert parse(text).values == RunConfig().values
