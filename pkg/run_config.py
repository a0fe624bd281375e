"""
Run configuration

INI files with the sections [problem], [grid], [sweep] and [output]. Every
key has a typed default; unknown keys are rejected. Overrides of the form
section.key=value (or key=value when the key is unique) apply on top, and
the resolved configuration is written back as a manifest of sorted
section.key=value lines, which load() reads as well.
"""

import configparser
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Tuple

from data_functions import GaussianBump, ReferenceForcing, Zero
from models import CouplingMethod, ProblemSpec


class ConfigError(Exception):
    """Raised for unreadable configurations, unknown keys or bad values"""
    pass


# section -> key -> (type, default); None defaults mean "derived"
SCHEMA: Dict[str, Dict[str, Tuple[type, Any]]] = {
    'problem': {
        'sign': (str, 'positive'),
        'speed': (float, 1.0),
        'nu': (float, 1e-3),
        'c': (float, 1.0),
        'l1': (float, 1.0),
        'l2': (float, 1.0),
        't_final': (float, 1.0),
        'forcing': (str, 'reference'),
        't0': (float, 0.1),
        'initial': (str, 'gaussian'),
        'x0': (float, None),
        'bump_scale': (float, 100.0),
    },
    'grid': {
        'n_cells': (int, 2000),
        'n_steps': (int, None),
        'peclet_limit': (float, 2.0),
        'layer_cells': (float, 5.0),
    },
    'sweep': {
        'method': (str, 'factorization_k1'),
        'methods': (str, 'variational,non_variational,factorization_k1,factorization_k2'),
        'nu_list': (str, '3e-2,1e-2,3e-3,1e-3'),
        'theta': (float, None),
        'max_iters': (int, 200),
        'tol': (float, 1e-8),
        'initial_guess': (str, 'zero'),
        'neg_data': (str, 'closed_form'),
    },
    'output': {
        'out_dir': (str, 'results'),
        'snapshot_times': (str, '0.25,0.5,0.75'),
    },
}

CHOICES = {
    ('problem', 'sign'): ('positive', 'negative'),
    ('problem', 'forcing'): ('reference', 'zero'),
    ('problem', 'initial'): ('gaussian', 'zero'),
    ('sweep', 'initial_guess'): ('zero', 'reference'),
    ('sweep', 'neg_data'): ('closed_form', 'numerical'),
}


def _convert(section: str, key: str, raw: str) -> Any:
    kind, _ = SCHEMA[section][key]
    raw = raw.strip()
    if raw == '' or raw.lower() == 'none':
        return None
    try:
        value = kind(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r} as {kind.__name__}")
    choices = CHOICES.get((section, key))
    if choices and value not in choices:
        raise ConfigError(f"{section}.{key}: {value!r} is not one of {', '.join(choices)}")
    return value


def _format(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, float):
        return '%.17g' % value
    return str(value)


def _split_floats(section: str, key: str, raw: str) -> List[float]:
    try:
        return [float(item) for item in raw.split(',') if item.strip()]
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected comma separated numbers, got {raw!r}")


@dataclass
class RunConfig:
    """Resolved configuration, one dict per section"""

    values: Dict[str, Dict[str, Any]] = field(
        default_factory=lambda: {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()}
    )

    def get(self, section: str, key: str) -> Any:
        return self.values[section][key]

    def set(self, section: str, key: str, raw: str):
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key '{key}' in section [{section}]")
        self.values[section][key] = _convert(section, key, raw)

    # Derived views

    @property
    def a(self) -> float:
        speed = self.get('problem', 'speed')
        return speed if self.get('problem', 'sign') == 'positive' else -speed

    @property
    def x0(self) -> float:
        x0 = self.get('problem', 'x0')
        if x0 is None:
            return -0.6 if self.a > 0 else 0.5
        return x0

    def problem(self, nu: Optional[float] = None) -> ProblemSpec:
        p = self.values['problem']
        forcing = ReferenceForcing(t0=p['t0']) if p['forcing'] == 'reference' else Zero()
        initial = GaussianBump(x0=self.x0, scale=p['bump_scale']) if p['initial'] == 'gaussian' else Zero()
        return ProblemSpec(
            a=self.a, nu=p['nu'] if nu is None else nu, c=p['c'], l1=p['l1'], l2=p['l2'],
            t_final=p['t_final'], f=forcing, h=initial
        )

    def _method(self, label: str) -> CouplingMethod:
        s = self.values['sweep']
        options = {}
        if label.strip().lower() == 'non_variational':
            options = {'theta': s['theta'], 'max_iters': s['max_iters'], 'tol': s['tol']}
        try:
            return CouplingMethod.from_label(label, **options)
        except ValueError as e:
            raise ConfigError(f"sweep: {e}")

    @property
    def method(self) -> CouplingMethod:
        return self._method(self.get('sweep', 'method'))

    @property
    def methods(self) -> List[CouplingMethod]:
        labels = [m for m in self.get('sweep', 'methods').split(',') if m.strip()]
        return [self._method(label) for label in labels]

    @property
    def nu_list(self) -> List[float]:
        return _split_floats('sweep', 'nu_list', self.get('sweep', 'nu_list'))

    @property
    def snapshot_times(self) -> List[float]:
        return _split_floats('output', 'snapshot_times', self.get('output', 'snapshot_times'))

    @property
    def coupling_options(self) -> Dict[str, Any]:
        return {'initial_guess': self.get('sweep', 'initial_guess'), 'neg_data': self.get('sweep', 'neg_data')}

    def manifest_lines(self) -> List[str]:
        return sorted(
            f"{section}.{key}={_format(value)}"
            for section, keys in self.values.items() for key, value in keys.items()
        )

    def write_manifest(self, path: str):
        with open(path, 'w', newline='\n') as f:
            f.write('\n'.join(self.manifest_lines()) + '\n')


def _find_section(key: str) -> str:
    sections = [s for s, keys in SCHEMA.items() if key in keys]
    if not sections:
        raise ConfigError(f"unknown key '{key}'")
    if len(sections) > 1:
        raise ConfigError(f"key '{key}' is ambiguous, use one of {', '.join(f'{s}.{key}' for s in sections)}")
    return sections[0]


def apply_overrides(config: RunConfig, overrides: Iterable[str]) -> RunConfig:
    """
    Apply section.key=value or key=value assignments.

    Raises:
        ConfigError: On malformed assignments or unknown keys
    """
    for item in overrides:
        if '=' not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        name, raw = item.split('=', 1)
        name = name.strip()
        if '.' in name:
            section, key = name.split('.', 1)
        else:
            section, key = _find_section(name), name
        config.set(section, key, raw)
    return config


def parse(text: str) -> RunConfig:
    """
    Parse an INI configuration or a manifest.

    Raises:
        ConfigError: Naming the offending section or key
    """
    config = RunConfig()
    lines = [line.strip() for line in text.splitlines()]
    content = [line for line in lines if line and not line.startswith(('#', ';'))]
    if content and not any(line.startswith('[') for line in content):
        return apply_overrides(config, content)

    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"cannot parse configuration: {e}")
    for section in parser.sections():
        for key, raw in parser.items(section):
            config.set(section, key, raw)
    return config


def load(path: Optional[str], overrides: Iterable[str] = ()) -> RunConfig:
    """
    Read a configuration file (or start from the defaults) and apply overrides.

    Raises:
        ConfigError: If the file cannot be read or holds invalid entries
    """
    if path is None:
        config = RunConfig()
    else:
        if not os.path.exists(path):
            raise ConfigError(f"configuration file not found: {path}")
        with open(path, 'r') as f:
            config = parse(f.read())
    return apply_overrides(config, overrides)
