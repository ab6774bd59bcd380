"""Run configuration: one JSON file, one top-level section per command.

Every section is checked against a schema before any computation starts.
Unknown keys, wrong types, out-of-range values and missing required keys
raise ``ConfigurationError`` naming the dotted key. Command-line flags
(``--seed``, ``--out``, ``--threads``) override the file.

Physical values are plain numbers in the units their key names
(``omega_khz``, ``t2_ms``, ``bz_gauss``); the commands attach the pint units
and leave the conversion to the library boundary.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Union

from numerics.errors import ConfigurationError
from numerics.random import MAX_SEED

logger = logging.getLogger(__name__)

COMMANDS = ('levels', 'synth', 'verify-tables', 'grover', 'rb', 'ramsey', 'calibrate')
DEFAULT_FIXTURES = ('fixtures/table1_d5.csv', 'fixtures/table2_d8.csv')

_REQUIRED = object()


@dataclass(frozen=True)
class Option:
    """Schema entry for one configuration key.

    Attributes:
        kind: 'int', 'float', 'bool', 'str', 'list' or 'section'.
        default: Value used when the key is absent; omit to make the key required.
        check: Predicate a present value must satisfy.
        requirement: Text reported when ``check`` fails.
        item: Element kind for lists.
        schema: Nested schema for sections.
        nullable: Whether JSON null is accepted.
    """
    kind: str
    default: Any = _REQUIRED
    check: Optional[Callable[[Any], bool]] = None
    requirement: str = ''
    item: str = 'float'
    schema: Optional[Mapping[str, 'Option']] = None
    nullable: bool = False

    @property
    def required(self) -> bool:
        return self.default is _REQUIRED


def _scalar(key: str, kind: str, value: Any) -> Any:
    if kind == 'bool':
        if not isinstance(value, bool):
            raise ConfigurationError(key, f'expected true or false, got {value!r}')
        return value
    if isinstance(value, bool):
        raise ConfigurationError(key, f'expected {kind}, got {value!r}')
    if kind == 'int':
        if not isinstance(value, int):
            raise ConfigurationError(key, f'expected an integer, got {value!r}')
        return value
    if kind == 'float':
        if not isinstance(value, (int, float)):
            raise ConfigurationError(key, f'expected a number, got {value!r}')
        return float(value)
    if kind == 'str':
        if not isinstance(value, str):
            raise ConfigurationError(key, f'expected a string, got {value!r}')
        return value
    raise ValueError(f'Unknown option kind {kind!r}')


def _parse(key: str, option: Option, value: Any) -> Any:
    if value is None:
        if option.nullable:
            return None
        raise ConfigurationError(key, 'null is not allowed')
    if option.kind == 'section':
        parsed = check_section(key, value, option.schema)
    elif option.kind == 'list':
        if not isinstance(value, list):
            raise ConfigurationError(key, f'expected a list, got {value!r}')
        parsed = tuple(_scalar(f'{key}[{i}]', option.item, v) for i, v in enumerate(value))
    else:
        parsed = _scalar(key, option.kind, value)
    if option.check is not None and not option.check(parsed):
        raise ConfigurationError(key, f'{option.requirement}, got {value!r}')
    return parsed


def check_section(name: str, raw: Any, schema: Mapping[str, Option]) -> Dict[str, Any]:
    """Validate ``raw`` against ``schema`` and fill in defaults.

    Raises:
        ConfigurationError: For the first unknown, missing or invalid key.
    """
    if not isinstance(raw, dict):
        raise ConfigurationError(name, f'expected an object, got {raw!r}')
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigurationError(f'{name}.{unknown[0]}', 'unknown key')
    parsed = {}
    for key, option in schema.items():
        dotted = f'{name}.{key}'
        if key not in raw:
            if option.required:
                raise ConfigurationError(dotted, 'required key is missing')
            parsed[key] = option.default
        else:
            parsed[key] = _parse(dotted, option, raw[key])
    return parsed


def _positive(value) -> bool:
    return value > 0


def _non_negative(value) -> bool:
    return value >= 0


def _all_positive(values) -> bool:
    return len(values) > 0 and all(v > 0 for v in values)


def _non_empty(values) -> bool:
    return len(values) > 0


def _dimension(value) -> bool:
    return 2 <= value <= 8


def _seed(value) -> bool:
    return 0 <= value <= MAX_SEED


def _one_of(*choices: str) -> Option:
    return Option('str', default=choices[0], check=lambda v: v in choices,
                  requirement=f'must be one of {", ".join(choices)}')


D = Option('int', check=_dimension, requirement='must be between 2 and 8')
OMEGA = Option('float', default=10.0, check=_positive, requirement='must be positive')

NOISE_SCHEMA = {
    'sensitivities': Option('list', default=None, nullable=True),
    't2_ms': Option('float', default=None, nullable=True, check=_positive,
                    requirement='must be positive'),
    'gamma': Option('float', default=0.0, check=_non_negative, requirement='must be non-negative'),
    'normalization': _one_of('slowest', 'sensitivity_sum'),
}

CONSTANTS_SCHEMA = {
    'name': Option('str', default='manifold'),
    'nuclear_spin': Option('float'),
    'electronic_j': Option('float'),
    'a_mhz': Option('float'),
    'b_mhz': Option('float'),
    'g_j': Option('float'),
    'g_i': Option('float'),
}

WEIGHTS_SCHEMA = {
    'strength': Option('float', default=1.0),
    'sensitivity': Option('float', default=1.0),
    'separation': Option('float', default=1.0),
    'separation_cap': Option('float', default=1.0),
}

LANDSCAPE_SCHEMA = {
    'axes': Option('list', default=(0, 1), item='int',
                   check=lambda v: len(v) == 2 and v[0] != v[1] and min(v) >= 0,
                   requirement='must be two distinct amplitude indices'),
    'low': Option('float', default=0.8, check=_positive, requirement='must be positive'),
    'high': Option('float', default=1.2, check=_positive, requirement='must be positive'),
    'points': Option('int', default=21, check=_non_negative, requirement='must be non-negative'),
}

SCHEMAS: Dict[str, Dict[str, Option]] = {
    'levels': {
        'd': Option('int', check=lambda v: 2 <= v <= 24, requirement='must be between 2 and 24'),
        'constants': Option('section', schema=CONSTANTS_SCHEMA),
        'bz_gauss': Option('float', check=_non_negative, requirement='must be non-negative'),
        'bz_scan_gauss': Option('list', default=()),
        'pols': Option('list', default=('x', 'z'), item='str',
                       check=lambda v: len(v) > 0 and set(v) <= {'x', 'z'},
                       requirement='must list polarizations among x and z'),
        'top_k': Option('int', default=10, nullable=True, check=_positive,
                        requirement='must be positive'),
        'weights': Option('section', default=None, nullable=True, schema=WEIGHTS_SCHEMA),
    },
    'synth': {
        'd': D,
        'target': _one_of('oracle', 'identity', 'equal_superposition', 'reflection', 'random'),
        'mark': Option('int', default=0, check=_non_negative, requirement='must be non-negative'),
        'name': Option('str', default=None, nullable=True),
        'n_pulses': Option('int', default=2, check=_positive, requirement='must be positive'),
        'restarts': Option('int', default=10, check=_positive, requirement='must be positive'),
        'max_iters': Option('int', default=2000, check=_positive, requirement='must be positive'),
        'step': Option('float', default=0.1, check=_positive, requirement='must be positive'),
        'tol': Option('float', default=1e-3, check=_positive, requirement='must be positive'),
        'convention': Option('str', default='theta1-forward-tone-plus'),
        'early_stop': Option('bool', default=False),
    },
    'verify-tables': {
        'tables': Option('list', default=DEFAULT_FIXTURES, item='str', check=_non_empty,
                         requirement='must name at least one table'),
    },
    'grover': {
        'd': D,
        'source': _one_of('analytic', 'table'),
        'table': Option('str', default=None, nullable=True),
        'convention': Option('str', default='winner'),
        'n_iterations': Option('int', default=None, nullable=True, check=_non_negative,
                               requirement='must be non-negative'),
        'pulse_duration_us': Option('float', default=33.0, check=_positive,
                                    requirement='must be positive'),
        'omega_khz': OMEGA,
        'noise': Option('section', default=None, nullable=True, schema=NOISE_SCHEMA),
        'sweep_mark': Option('int', default=0, check=_non_negative, requirement='must be non-negative'),
        'n_max': Option('int', default=0, check=lambda v: v == 0 or v >= 2,
                        requirement='must be 0 (no sweep) or at least 2'),
        'fit': _one_of('linear', 'exponential'),
    },
    'rb': {
        'd': D,
        'lengths': Option('list', default=(1, 5, 10, 20, 50), item='int', check=_all_positive,
                          requirement='must be positive integers'),
        'n_sequences': Option('int', default=10, check=_positive, requirement='must be positive'),
        'include_inverse': Option('bool', default=True),
        'omega_khz': OMEGA,
        'noise': Option('section', default=None, nullable=True, schema=NOISE_SCHEMA),
    },
    'ramsey': {
        'd': D,
        'omega_khz': OMEGA,
        'detunings_khz': Option('list', default=None, nullable=True),
        'delays_ms': Option('list', check=_non_empty, requirement='must not be empty'),
        'noise': Option('section', default=None, nullable=True, schema=NOISE_SCHEMA),
    },
    'calibrate': {
        'd': D,
        'omega_khz': OMEGA,
        'n_sequences': Option('int', default=4, check=_positive, requirement='must be positive'),
        'length': Option('int', default=10, check=_positive, requirement='must be positive'),
        'perturbation': Option('float', default=0.1, check=lambda v: -0.5 < v < 0.5,
                               requirement='must lie in (-0.5, 0.5)'),
        'max_iters': Option('int', default=2000, check=_positive, requirement='must be positive'),
        'landscape': Option('section', default=None, nullable=True, schema=LANDSCAPE_SCHEMA),
    },
}

for _schema in SCHEMAS.values():
    _schema['seed'] = Option('int', default=0, check=_seed, requirement='must be in [0, 2**64 - 1]')
    _schema['threads'] = Option('int', default=1, check=_positive, requirement='must be positive')
del _schema


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters of one command run.

    Attributes:
        command: The command name.
        params: Section values with defaults filled in; always holds ``seed``
            and ``threads``.
        out_dir: Directory receiving every output file.
        source: Config file the section came from, if any.
    """
    command: str
    params: Dict[str, Any]
    out_dir: Path = Path('.')
    source: Optional[str] = None

    @property
    def seed(self) -> int:
        return self.params['seed']

    @property
    def threads(self) -> int:
        return self.params['threads']

    @property
    def d(self) -> Optional[int]:
        return self.params.get('d')

    def __getitem__(self, key: str) -> Any:
        return self.params[key]

    def snapshot(self) -> Dict[str, Any]:
        """Plain-JSON copy of the parameters for the run record."""
        return json.loads(json.dumps(self.params, default=list))


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Parse a JSON config file.

    Raises:
        FileNotFoundError: If the file does not exist.
        ConfigurationError: If the file is not a JSON object.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f'Config file not found: {path}')
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(str(path), f'invalid JSON at line {exc.lineno}: {exc.msg}') from exc
    if not isinstance(data, dict):
        raise ConfigurationError(str(path), 'top level must be an object with one section per command')
    unknown = sorted(set(data) - set(COMMANDS))
    if unknown:
        raise ConfigurationError(unknown[0], 'unknown command section')
    return data


def build_run_config(command: str, section: Optional[Mapping[str, Any]] = None,
                     seed: Optional[int] = None, out_dir: Union[str, Path, None] = None,
                     threads: Optional[int] = None, source: Optional[str] = None) -> RunConfig:
    """Validate a command section and apply flag overrides.

    Overrides are validated by the same schema as file values.
    """
    if command not in SCHEMAS:
        raise ConfigurationError(command, f'unknown command; expected one of {", ".join(COMMANDS)}')
    raw = dict(section or {})
    overrides = {k: v for k, v in (('seed', seed), ('threads', threads)) if v is not None}
    raw.update(overrides)
    params = check_section(command, raw, SCHEMAS[command])
    logger.debug('Config for %s: %s', command, params)
    return RunConfig(command=command, params=params, out_dir=Path(out_dir or '.'),
                     source=source)


def load_run_config(command: str, path: Union[str, Path, None] = None,
                    **flags) -> RunConfig:
    """Read ``path`` (if given), pick the command's section and validate it."""
    section = None
    if path is not None:
        section = read_config_file(path).get(command)
        if section is None:
            raise ConfigurationError(command, f'section is missing from {path}')
    return build_run_config(command, section, source=None if path is None else str(path), **flags)
