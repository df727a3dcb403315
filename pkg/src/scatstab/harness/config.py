"""Experiment configuration files.

Configs are TOML documents (https://toml.io, a nested key-value format with a
formal grammar). Every table and key is listed below; anything else is an
error. Defaults apply to omitted keys.

.. code-block:: toml

    experiment = "stability"   # deformation | stability | sharpness |
                               # counterexample | smooth | bandlimited
    seed = 0                   # seeds random banks and random fields
    n_jobs = 1                 # threads for rung evaluation

    [grid]
    dim = 2
    extent = 512               # samples per axis, power of two
    length = 8.0               # window side; or give `spacing` instead

    [signal]
    kind = "cartoon"           # cartoon | smooth | bandlimited | concentrated | pgm
    f1 = { kind = "gaussian", amplitude = 0.5, width = 1.0 }
    f2 = { kind = "constant", value = 1.0 }
    domain = { kind = "disc", radius = 1.0 }
    # smooth:       part = { kind = "gaussian-mixture", components = [...] }
    # bandlimited:  bandwidth = 4.0
    # pgm:          path = "image.pgm"

    [network]
    kind = "wavelet"           # identity | wavelet | gabor | random
    depth = 2
    nonlinearity = "modulus"   # modulus | relu | tanh | sigmoid | identity
    subsampling = 1
    normalize = true
    scale = 1.0                # extra atom factor applied after normalization
    num_scales = 2             # wavelet
    mother = "morlet"          # wavelet: morlet | dog
    orientations = 0           # wavelet: 0 selects the default
    centers = [0.0, 4.0]       # gabor, cycles per unit length
    width = 2.0                # gabor
    count = 4                  # random
    smoothness = 0.05          # random

    [deformation]
    kind = "translation"       # translation | gaussian-bump | smooth-random
    s0 = 0.25
    rungs = 7
    direction = [1.0, 0.0]
    width = 1.0                # gaussian-bump
    modes = 2                  # smooth-random
    interp = "exact"           # exact | linear | cubic | nearest | fourier
    jacobian_norm = "entry"    # entry | operator
    counterexample = false     # allow ||tau|| >= 1/2 and non-cartoon families

    [checks]                   # acceptance windows, all optional
    alpha = [0.45, 0.55]
    prefactor = [1.34, 1.49]
    rung_tolerance = 0.02
    contractivity_slack = 1e-8
    growth = [1.5, 2.5]        # bandlimited
    bandwidths = [2.0, 4.0, 8.0, 16.0]
    bandlimited_shift = 0.001
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..signals import Grid

__all__ = [
    "ConfigError",
    "GridConfig",
    "SignalConfig",
    "NetworkConfig",
    "DeformationConfig",
    "ChecksConfig",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "EXPERIMENTS",
]

EXPERIMENTS = ("deformation", "stability", "sharpness", "counterexample", "smooth", "bandlimited")


class ConfigError(ValueError):
    """Unparseable or inconsistent configuration."""


@dataclass(frozen=True)
class GridConfig:
    dim: int = 1
    extent: int = 8192
    length: float | None = None
    spacing: float | None = None

    def build(self, refine: int = 0) -> Grid:
        if self.length is not None and self.spacing is not None:
            raise ConfigError("grid: give either length or spacing, not both")
        spacing = self.spacing if self.spacing is not None else (self.length or 8.0) / self.extent
        try:
            grid = Grid(self.dim, (self.extent,) * self.dim, spacing)
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from None
        return grid.refined(2**refine) if refine else grid


@dataclass(frozen=True)
class SignalConfig:
    kind: str = "cartoon"
    f1: dict = field(default_factory=lambda: {"kind": "zero"})
    f2: dict = field(default_factory=lambda: {"kind": "constant", "value": 1.0})
    domain: dict = field(default_factory=lambda: {"kind": "interval", "a": -1.0, "b": 1.0})
    part: dict = field(default_factory=lambda: {"kind": "gaussian"})
    bandwidth: float = 4.0
    path: str = ""


@dataclass(frozen=True)
class NetworkConfig:
    kind: str = "identity"
    depth: int = 0
    nonlinearity: str = "modulus"
    subsampling: int = 1
    normalize: bool = True
    scale: float = 1.0
    num_scales: int = 2
    mother: str = "morlet"
    orientations: int = 0
    centers: list = field(default_factory=lambda: [0.0, 4.0, 8.0])
    width: float = 2.0
    count: int = 4
    smoothness: float = 0.05


@dataclass(frozen=True)
class DeformationConfig:
    kind: str = "translation"
    s0: float = 0.25
    rungs: int = 7
    direction: list = field(default_factory=list)
    width: float = 1.0
    modes: int = 2
    interp: str = "exact"
    jacobian_norm: str = "entry"
    counterexample: bool = False


@dataclass(frozen=True)
class ChecksConfig:
    alpha: list | None = None
    prefactor: list | None = None
    rung_tolerance: float = 0.02
    contractivity_slack: float = 1e-8
    growth: list = field(default_factory=lambda: [1.5, 2.5])
    bandwidths: list = field(default_factory=lambda: [2.0, 4.0, 8.0, 16.0])
    bandlimited_shift: float = 1e-3


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "deformation"
    seed: int = 0
    n_jobs: int = 1
    grid: GridConfig = field(default_factory=GridConfig)
    signal: SignalConfig = field(default_factory=SignalConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    deformation: DeformationConfig = field(default_factory=DeformationConfig)
    checks: ChecksConfig = field(default_factory=ChecksConfig)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=int(seed))


_SECTIONS = {
    "grid": GridConfig,
    "signal": SignalConfig,
    "network": NetworkConfig,
    "deformation": DeformationConfig,
    "checks": ChecksConfig,
}


def _coerce(name: str, value, default):
    """Loose type check against the default's type."""
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{name}: expected a boolean, got {value!r}")
    elif isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
    elif isinstance(default, float) or (default is None and isinstance(value, (int, float))):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name}: expected a number, got {value!r}")
        return float(value)
    elif isinstance(default, str) and not isinstance(value, str):
        raise ConfigError(f"{name}: expected a string, got {value!r}")
    elif isinstance(default, dict) and not isinstance(value, dict):
        raise ConfigError(f"{name}: expected a table, got {value!r}")
    return value


def _build_section(cls, name: str, table) -> object:
    if not isinstance(table, dict):
        raise ConfigError(f"[{name}] must be a table")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(table) - set(known))
    if unknown:
        raise ConfigError(f"[{name}]: unknown keys {unknown}")
    defaults = cls()
    values = {
        key: _coerce(f"{name}.{key}", val, getattr(defaults, key)) for key, val in table.items()
    }
    return cls(**values)


def parse_config(data: dict) -> ExperimentConfig:
    top = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - top)
    if unknown:
        raise ConfigError(f"unknown top-level keys {unknown}")
    kwargs = {}
    for key, value in data.items():
        if key in _SECTIONS:
            kwargs[key] = _build_section(_SECTIONS[key], key, value)
        else:
            kwargs[key] = _coerce(key, value, getattr(ExperimentConfig(), key))
    cfg = ExperimentConfig(**kwargs)
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}; expected one of {EXPERIMENTS}")
    if cfg.deformation.rungs < 1:
        raise ConfigError("deformation.rungs must be >= 1")
    return cfg


def load_config(path) -> ExperimentConfig:
    """Read and validate a TOML experiment config; raises :class:`ConfigError`."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return parse_config(data)
