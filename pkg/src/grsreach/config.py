"""Run configuration: a flat YAML mapping of key: value lines."""

import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import yaml

from grsreach.errors import ConfigError

FLOAT_KEYS = (
    'mass', 'radius', 'prop_mass', 'arm_length', 'L_f', 'L_G', 'dt', 'eps', 'k',
    'T', 'target_angle', 'r', 'M0', 'M1', 'L', 'eps_init_constant',
)
SYSTEMS = ('quadrotor', 'identity', 'affine')
VARIANTS = ('auto', 'algorithm1', 'algorithm2')


@dataclass
class RunConfig:
    """Everything a run needs; every key is optional.

    Vectors and matrices are plain (nested) lists. f_x0 and G_x0, when
    left out, are sampled from the plant at x0.
    """
    system: str = 'quadrotor'
    d: int | None = None
    m: int | None = None
    affine_A: list | None = None
    affine_f0: list | None = None
    affine_G: list | None = None
    mass: float = 1.0
    radius: float = 0.1
    prop_mass: float = 0.01
    arm_length: float = 0.5
    literal_prop_mass: bool = False
    x0: list | None = None
    f_x0: list | None = None
    G_x0: list | None = None
    L_f: float = 1.0
    L_G: float = 1.0
    dt: float = 1e-4
    eps: float = 0.005
    k: float = 5.0
    T: float = 0.25
    variant: str = 'auto'
    target_angle: float = 30.0
    target: list | None = None
    r: float | None = None
    max_cycles: int = 100_000
    out_dir: str | None = None
    substep_divisor: int = 20
    n_dirs: int = 360
    M0: float | None = None
    M1: float | None = None
    L: float | None = None
    eps_init_constant: float = 100.0

    def __post_init__(self):
        self.validate()

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_mapping(cls, data: dict) -> 'RunConfig':
        unknown = sorted(set(data) - set(cls.keys()))
        if unknown:
            raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
        for key, value in data.items():
            if isinstance(value, dict):
                raise ConfigError(f"'{key}' must not be a nested mapping")
        # PyYAML reads exponents without a dot, such as 1e-4, as strings.
        data = {
            key: _as_float(key, value) if key in FLOAT_KEYS else value
            for key, value in data.items()
        }
        return cls(**data)

    @classmethod
    def load(cls, path: Path) -> 'RunConfig':
        """Load a config file; a missing or malformed file is a ConfigError."""
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            with open(path) as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must hold a key: value mapping")
        return cls.from_mapping(data)

    def save(self, path: Path) -> None:
        """Write every key, defaults included, so the run can be replayed."""
        with open(path, 'w') as f:
            yaml.dump(asdict(self), f, default_flow_style=None,
                      sort_keys=False, indent=2)

    def updated(self, **changes) -> 'RunConfig':
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def validate(self) -> None:
        if self.system not in SYSTEMS:
            raise ConfigError(
                f"system must be one of {', '.join(SYSTEMS)}, got '{self.system}'"
            )
        if self.variant not in VARIANTS:
            raise ConfigError(
                f"variant must be one of {', '.join(VARIANTS)}, got '{self.variant}'"
            )
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or value is None or isinstance(value, str):
                continue
            _check_finite(f.name, value)
        for key in ('d', 'm', 'max_cycles', 'substep_divisor', 'n_dirs'):
            value = getattr(self, key)
            if value is not None and (
                not isinstance(value, int) or isinstance(value, bool) or value < 1
            ):
                raise ConfigError(f"'{key}' must be a positive integer, got {value!r}")
        for key in ('dt', 'T', 'eps', 'k', 'mass', 'radius', 'arm_length'):
            value = getattr(self, key)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"'{key}' must be a number, got {value!r}")
        if self.system == 'affine' and (
            self.affine_A is None or self.affine_f0 is None or self.affine_G is None
        ):
            raise ConfigError("system 'affine' needs affine_A, affine_f0 and affine_G")
        if self.system == 'identity' and self.d is None:
            raise ConfigError("system 'identity' needs d")


def _as_float(key: str, value):
    if not isinstance(value, str):
        return value
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"'{key}' must be a number, got {value!r}") from None


def _check_finite(key: str, value) -> None:
    if isinstance(value, list):
        for item in value:
            _check_finite(key, item)
        return
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{key}' must be numeric, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"'{key}' must be finite, got {value!r}")
