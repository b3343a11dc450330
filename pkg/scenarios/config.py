# scenarios/config.py - Scenario configuration parsing
import json
import logging
import math
from dataclasses import asdict, dataclass, fields as dataclass_fields
from typing import Any, Dict, Optional, Tuple

from fields.errors import ArtifactError, MissingSection, ParseError, UnknownKey
from fields.model_core import ModelParams

logger = logging.getLogger(__name__)

COMMANDS = ('steady', 'dispersion', 'mode', 'simulate', 'aggregate')
TOP_LEVEL_KEYS = ('params', 'rng_seed', 'output_dir') + COMMANDS


@dataclass(frozen=True)
class SteadySection:
    n_points: int = 11


@dataclass(frozen=True)
class DispersionSection:
    k_min: float = 0.1
    k_max: float = 5.0
    n_k: int = 100
    omega_max: Optional[float] = None
    branch: int = 0


@dataclass(frozen=True)
class ModeSection:
    """omega is solved from the dispersion relation (root `branch`) when omitted"""
    k: float = 1.0
    kind: str = 'single_decay'
    lambdas: Optional[Tuple[float, float]] = None
    omega: Optional[float] = None
    n_points: int = 101
    branch: int = 0


@dataclass(frozen=True)
class SeedPulseSection:
    center: Tuple[float, float] = (0.0, 0.0)
    width: float = 1.0
    amplitude: float = 1e-3


@dataclass(frozen=True)
class SimulateSection:
    n_x: int = 64
    n_y: int = 64
    L_x: Optional[float] = None
    dt_factor: float = 0.9
    n_steps: int = 10
    snapshot_every: int = 0
    sponge_cells: int = 0
    sponge_strength: float = 1.0
    seed_mode: Optional[ModeSection] = None
    seed_amplitude: float = 1e-3
    seed_pulse: Optional[SeedPulseSection] = None


@dataclass(frozen=True)
class AggregateSection:
    """events_path=None samples synth_M synthetic events instead"""
    n_cells: int = 16
    events_path: Optional[str] = None
    synth_M: int = 10000
    workers: Optional[int] = None


SECTION_TYPES = {
    'steady': SteadySection,
    'dispersion': DispersionSection,
    'mode': ModeSection,
    'simulate': SimulateSection,
    'aggregate': AggregateSection,
}
_NESTED = {'seed_mode': ModeSection, 'seed_pulse': SeedPulseSection}
_PAIRS = ('lambdas', 'center')

# lower bounds of integer fields; listed float fields must be > 0
_MIN_INT = {
    'n_points': 1, 'n_k': 1, 'branch': 0, 'n_x': 1, 'n_y': 1, 'n_steps': 0,
    'snapshot_every': 0, 'sponge_cells': 0, 'n_cells': 1, 'synth_M': 1, 'workers': 1,
}
_POSITIVE = ('k_min', 'k_max', 'omega_max', 'k', 'omega', 'L_x', 'dt_factor', 'width')


@dataclass(frozen=True)
class ScenarioConfig:
    command: str
    params: ModelParams
    section: Any
    rng_seed: int = 0
    output_dir: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready echo that parse_config maps back to an equal config"""
        data: Dict[str, Any] = {'params': self.params.to_dict(), 'rng_seed': self.rng_seed}
        if self.output_dir is not None:
            data['output_dir'] = self.output_dir
        data[self.command] = {k: v for k, v in asdict(self.section).items() if v is not None}
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _coerce(value, annotation, key: str):
    try:
        if annotation is int:
            if isinstance(value, bool) or float(value) != int(value):
                raise ValueError
            return int(value)
        if annotation is float or annotation == Optional[float]:
            if isinstance(value, bool) or not math.isfinite(float(value)):
                raise ValueError
            return float(value)
        if annotation is str or annotation == Optional[str]:
            return str(value)
        if annotation == Optional[int]:
            return int(value)
    except (TypeError, ValueError):
        raise ParseError(None, f"{key}: cannot interpret {value!r}")
    return value


def _build_section(cls, data: Any, prefix: str):
    if not isinstance(data, dict):
        raise ParseError(None, f"section '{prefix}' must be an object")
    known = {f.name: f for f in dataclass_fields(cls)}
    values = {}
    for key, value in data.items():
        if key not in known:
            raise UnknownKey(f"{prefix}.{key}")
        if value is None:
            continue
        name = f"{prefix}.{key}"
        if key in _NESTED:
            values[key] = _build_section(_NESTED[key], value, name)
        elif key in _PAIRS:
            if not isinstance(value, (list, tuple)) or len(value) != 2:
                raise ParseError(None, f"{name} must be a pair of numbers")
            values[key] = tuple(_coerce(v, float, name) for v in value)
        else:
            values[key] = _coerce(value, known[key].type, name)
    _check_ranges(values, prefix)
    section = cls(**values)
    if isinstance(section, DispersionSection) and section.k_min > section.k_max:
        raise ParseError(None, f"{prefix}: k_min {section.k_min} exceeds k_max {section.k_max}")
    return section


def _check_ranges(values: Dict[str, Any], prefix: str):
    for key, value in values.items():
        if key in _MIN_INT and value < _MIN_INT[key]:
            raise ParseError(None, f"{prefix}.{key} must be >= {_MIN_INT[key]}, got {value}")
        if key in _POSITIVE and value <= 0.0:
            raise ParseError(None, f"{prefix}.{key} must be positive, got {value}")


def check_seed(seed: int, source: str = 'rng_seed') -> int:
    if seed < 0:
        raise ParseError(None, f"{source} must be non-negative, got {seed}")
    return seed


def parse_config(text: str, command: Optional[str] = None) -> ScenarioConfig:
    """
    Parse a JSON scenario document holding exactly one command section.
    When `command` is given it must name that section.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.lineno, e.msg)
    if not isinstance(raw, dict):
        raise ParseError(1, "config must be a JSON object")

    for key in raw:
        if key not in TOP_LEVEL_KEYS:
            raise UnknownKey(key)

    present = [name for name in COMMANDS if raw.get(name) is not None]
    if len(present) != 1:
        raise MissingSection(f"exactly one command section required, found {present or 'none'}")
    section_name = present[0]
    if command is not None and command != section_name:
        raise MissingSection(f"command '{command}' needs a '{command}' section, found '{section_name}'")

    try:
        params = ModelParams.from_dict(raw.get('params') or {})
    except (TypeError, ValueError) as e:
        raise ParseError(None, f"params: {e}")
    section = _build_section(SECTION_TYPES[section_name], raw[section_name], section_name)
    if isinstance(section, SimulateSection) and (section.seed_mode is None) == (section.seed_pulse is None):
        raise MissingSection("simulate needs exactly one of seed_mode or seed_pulse")

    config = ScenarioConfig(
        command=section_name,
        params=params,
        section=section,
        rng_seed=check_seed(_coerce(raw.get('rng_seed', 0), int, 'rng_seed')),
        output_dir=raw.get('output_dir'),
    )
    logger.debug(f"Parsed {section_name} scenario config")
    return config


def load_config(path: str, command: Optional[str] = None) -> ScenarioConfig:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise ArtifactError(f"cannot read config {path}: {e}") from e
    return parse_config(text, command)
