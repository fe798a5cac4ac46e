# This file is part of irsma.
#
# SPDX-License-Identifier: BSD-3-Clause

"""
Scenario configuration

A ScenarioConfig holds every experiment input with the default values of the
reference setup. Config files contain one "section.key = value" assignment
per line (see config.md); parse_config applies them on top of the defaults.
"""

import dataclasses
import math
import re
import typing
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from irsma.beamforming import LinkBudget
from irsma.channel import FadingParams, reference_gain, wavelength
from irsma.geometry import GeometryError, IrsGeometry, TxRegion, as_vec3
from irsma.optimize import AoSettings, BcdSettings, Scenario

# user direction from the IRS center when no user position is configured
DEFAULT_USER_DIRECTION = (3.0, 30.0, -2.0)

Vector = Tuple[float, float, float]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class IrsConfig:
    m_y_count: int = 15
    m_z_count: int = 15
    spacing: Optional[float] = None     # lambda/2


@dataclass(frozen=True)
class TxRegionConfig:
    center: Vector = (5.0, 5.0, 0.0)
    axis: Vector = (1.0, 0.0, 0.0)
    length: float = 0.6
    d_min: Optional[float] = None       # lambda/2
    delta_s: float = 0.01


@dataclass(frozen=True)
class UserConfig:
    position: Optional[Vector] = None
    d_iu: float = 30.0


@dataclass(frozen=True)
class FadingConfig:
    rician_k_db: float = 3.0
    kappa: float = 2.8


@dataclass(frozen=True)
class MultipathConfig:
    n_paths: int = 8
    box_min: Vector = (1.0, 1.0, -1.0)
    box_max: Vector = (4.0, 4.0, 1.0)
    power_split: float = 1.0
    seed: int = 0
    redraw: bool = True


@dataclass(frozen=True)
class SolverConfig:
    bcd_max_sweeps: int = 20
    bcd_rel_tol: float = 1e-6
    ao_max_iters: int = 30
    ao_rel_tol: float = 1e-5


SECTIONS = ("irs", "tx_region", "user", "fading", "multipath", "solver")


@dataclass(frozen=True)
class ScenarioConfig:
    frequency_hz: float = 5e9
    n_antennas: int = 4
    transmit_snr_db: float = 110.0
    trials: int = 100
    seed: int = 0
    irs: IrsConfig = field(default_factory=IrsConfig)
    tx_region: TxRegionConfig = field(default_factory=TxRegionConfig)
    user: UserConfig = field(default_factory=UserConfig)
    fading: FadingConfig = field(default_factory=FadingConfig)
    multipath: MultipathConfig = field(default_factory=MultipathConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """Check every parameter, raising ConfigError on the first problem.
        """
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if self.n_antennas < 1:
            raise ConfigError(f"n_antennas must be at least 1, got {self.n_antennas}")
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {self.seed}")
        mp = self.multipath
        if mp.n_paths < 0 or mp.seed < 0:
            raise ConfigError("multipath.n_paths and multipath.seed must be nonnegative")
        if mp.power_split < 0:
            raise ConfigError(f"multipath.power_split must be nonnegative, got {mp.power_split}")
        if any(lo > hi for lo, hi in zip(mp.box_min, mp.box_max)):
            raise ConfigError(f"empty scatter box {mp.box_min}..{mp.box_max}")
        try:
            self.geometry()
            region = self.region()
            self.fading_params()
            self.bcd_settings()
            self.ao_settings()
            LinkBudget.from_db(self.transmit_snr_db)
            if abs(self.user_position()[0]) < 1e-6:
                raise GeometryError(f"user position {self.user_position().tolist()} "
                                    f"lies in the IRS plane")
        except ValueError as error:
            raise ConfigError(str(error)) from error
        # every scheme must be able to place the symmetric FPA array
        if self.n_antennas * self.d_min > region.length_a + 1e-9:
            raise ConfigError(f"{self.n_antennas} antennas at pitch {self.d_min:g} m do not fit "
                              f"on the {region.length_a:g} m transmit region")

    @property
    def wavelength(self) -> float:
        try:
            return wavelength(self.frequency_hz)
        except ValueError as error:
            raise ConfigError(str(error)) from error

    @property
    def irs_spacing(self) -> float:
        return self.irs.spacing if self.irs.spacing is not None else self.wavelength / 2

    @property
    def d_min(self) -> float:
        return self.tx_region.d_min if self.tx_region.d_min is not None else self.wavelength / 2

    @property
    def rician_k(self) -> float:
        return 10 ** (self.fading.rician_k_db / 10)

    def geometry(self) -> IrsGeometry:
        return IrsGeometry(self.irs.m_y_count, self.irs.m_z_count, self.irs_spacing)

    def region(self) -> TxRegion:
        t = self.tx_region
        return TxRegion(np.array(t.center), t.length, self.d_min, t.delta_s, np.array(t.axis))

    def user_position(self) -> np.ndarray:
        if self.user.position is not None:
            return as_vec3(self.user.position, "user.position")
        direction = np.array(DEFAULT_USER_DIRECTION)
        return self.user.d_iu * direction / np.linalg.norm(direction)

    @property
    def d_iu(self) -> float:
        """IRS-user distance used for the path loss.
        """
        if self.user.position is not None:
            return float(np.linalg.norm(self.user_position()))
        return self.user.d_iu

    def fading_params(self) -> FadingParams:
        return FadingParams(self.rician_k, self.fading.kappa, self.d_iu,
                            reference_gain(self.wavelength))

    def scatter_power(self) -> float:
        """Total NLoS power: power_split times the LoS power at the region
        center.
        """
        q_b = np.linalg.norm(self.tx_region.center)
        return self.multipath.power_split * (self.wavelength / (4 * np.pi * q_b)) ** 2

    def budget(self) -> LinkBudget:
        return LinkBudget.from_db(self.transmit_snr_db)

    def bcd_settings(self) -> BcdSettings:
        return BcdSettings(self.solver.bcd_max_sweeps, self.solver.bcd_rel_tol)

    def ao_settings(self) -> AoSettings:
        return AoSettings(self.solver.ao_max_iters, self.solver.ao_rel_tol, self.bcd_settings())

    def scenario(self) -> Scenario:
        return Scenario(self.geometry(), self.region(), self.n_antennas, self.wavelength,
                        self.budget())

    def with_changes(self, **changes) -> "ScenarioConfig":
        """Copy with parameters replaced, using dotted keys for sections, e.g.
        config.with_changes(**{"irs.m_y_count": 9}).
        """
        top = {}
        sections: Dict[str, dict] = {}
        for key, value in changes.items():
            section, _, name = key.rpartition(".")
            if section:
                sections.setdefault(section, {})[name] = value
            else:
                top[name] = value
        for section, values in sections.items():
            top[section] = dataclasses.replace(getattr(self, section), **values)
        return dataclasses.replace(self, **top)

    def resolved(self) -> Dict[str, object]:
        """Get every parameter as a flat dict with dotted keys, including
        derived values.
        """
        flat: Dict[str, object] = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name in SECTIONS:
                for g in dataclasses.fields(value):
                    v = getattr(value, g.name)
                    flat[f"{f.name}.{g.name}"] = list(v) if isinstance(v, tuple) else v
            else:
                flat[f.name] = value
        flat.update({
            "derived.wavelength": self.wavelength,
            "derived.irs_spacing": self.irs_spacing,
            "derived.d_min": self.d_min,
            "derived.rician_k": self.rician_k,
            "derived.d_iu": self.d_iu,
            "derived.path_loss_amplitude": self.fading_params().path_loss_amplitude,
            "derived.user_position": self.user_position().tolist(),
            "derived.scatter_power": self.scatter_power(),
            "derived.sample_count": self.region().sample_count,
        })
        return flat


_re_blank = re.compile(r"^\s*([#;].*)?$")
_re_entry = re.compile(r"^\s*([a-z_][a-z0-9_]*(?:\.[a-z_][a-z0-9_]*)?)\s*=\s*([^#;]*?)\s*([#;].*)?$",
                       re.I)
_re_int = re.compile(r"^[-+]?[0-9]+$")
_re_float = re.compile(r"^[-+]?([0-9]+\.?[0-9]*|\.[0-9]+)([eE][-+]?[0-9]+)?$")
_re_vector = re.compile(r"^\[(.*)\]$")


def _parse_scalar(text: str, line: int):
    lower = text.lower()
    if lower in ("true", "yes", "on"):
        return True
    if lower in ("false", "no", "off"):
        return False
    if lower == "none":
        return None
    if _re_int.match(text):
        return int(text)
    if _re_float.match(text):
        return float(text)
    raise ConfigError(f'Bad value "{text}" (line {line})')


def _parse_value(text: str, line: int):
    r = _re_vector.match(text)
    if r:
        items = [s.strip() for s in r.group(1).split(",")]
        values = [_parse_scalar(s, line) for s in items if s]
        if any(isinstance(v, bool) or v is None for v in values):
            raise ConfigError(f'Vector components must be numbers: "{text}" (line {line})')
        return tuple(float(v) for v in values)
    return _parse_scalar(text, line)


def _coerce(value, hint, key: str, line: int):
    if typing.get_origin(hint) is typing.Union:
        if value is None:
            return None
        hint = [a for a in typing.get_args(hint) if a is not type(None)][0]
    if value is None:
        raise ConfigError(f'"{key}" cannot be none (line {line})')
    if hint is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f'"{key}" must be true or false (line {line})')
    if typing.get_origin(hint) is tuple:
        if isinstance(value, tuple) and len(value) == 3:
            return value
        raise ConfigError(f'"{key}" must be a vector [x, y, z] (line {line})')
    if isinstance(value, bool) or isinstance(value, tuple):
        raise ConfigError(f'"{key}" must be a number (line {line})')
    if hint is int:
        if isinstance(value, int):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise ConfigError(f'"{key}" must be an integer (line {line})')
    if not math.isfinite(value):
        raise ConfigError(f'"{key}" must be finite (line {line})')
    return float(value)


def parse_config(src: str, base: Optional[ScenarioConfig] = None) -> ScenarioConfig:
    """Parse config file contents, applied on top of base (default values
    if None).
    """
    base = base or ScenarioConfig()
    hints = typing.get_type_hints(ScenarioConfig)
    section_hints = {name: typing.get_type_hints(hints[name]) for name in SECTIONS}
    changes = {}
    lines = {}
    for i, text in enumerate(src.split("\n")):
        line = i + 1
        if _re_blank.match(text):
            continue
        r = _re_entry.match(text)
        if r is None:
            raise ConfigError(f"Syntax error (line {line})")
        key = r.group(1).lower()
        section, _, name = key.rpartition(".")
        if section:
            if section not in section_hints:
                raise ConfigError(f'Unknown section "{section}" (line {line})')
            if name not in section_hints[section]:
                raise ConfigError(f'Unknown key "{key}" (line {line})')
            hint = section_hints[section][name]
        else:
            if name not in hints or name in SECTIONS:
                raise ConfigError(f'Unknown key "{key}" (line {line})')
            hint = hints[name]
        if key in changes:
            raise ConfigError(f'Duplicate key "{key}", first set on line {lines[key]} '
                              f'(line {line})')
        changes[key] = _coerce(_parse_value(r.group(2), line), hint, key, line)
        lines[key] = line
    return base.with_changes(**changes)


def load_config(path: str, base: Optional[ScenarioConfig] = None) -> ScenarioConfig:
    """Read and parse a config file.
    """
    try:
        with open(path, encoding="utf-8") as f:
            src = f.read()
    except OSError as error:
        raise ConfigError(f"Cannot read config file {path}: {error.strerror}") from error
    try:
        return parse_config(src, base)
    except ConfigError as error:
        raise ConfigError(f"{path}: {error}") from error
