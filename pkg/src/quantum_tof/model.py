"""Particles, gravity and the cat-state experiment configuration.

Everything is stored in SI units. Lengths are metres, times seconds, masses
kilograms. The vertical axis points up, gravity is a non-negative scalar and
the potential is ``V = m g z`` so that packets fall toward negative ``z``.
"""
from dataclasses import dataclass, field, replace
import math

import numpy as np

from .constants import G_EARTH, HBAR, SODIUM23_MASS


class ConfigError(ValueError):
    """Base class for invalid experiment parameters."""

    code = "InvalidConfig"


class NonPositiveWidth(ConfigError):
    code = "NonPositiveWidth"


class NonPositiveMass(ConfigError):
    code = "NonPositiveMass"


class NegativeSeparation(ConfigError):
    code = "NegativeSeparation"


class ZeroAmplitudes(ConfigError):
    code = "ZeroAmplitudes"


class NegativeGravity(ConfigError):
    code = "NegativeGravity"


class InvalidTimeGrid(ConfigError):
    code = "InvalidTimeGrid"


@dataclass(frozen=True)
class Particle:
    mass: float
    label: str = ""

    def __post_init__(self):
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise NonPositiveMass(f"particle mass must be > 0, got {self.mass!r}")


@dataclass(frozen=True)
class Gravity:
    g: float = G_EARTH

    def __post_init__(self):
        if not (self.g >= 0 and math.isfinite(self.g)):
            raise NegativeGravity(f"gravity must be >= 0, got {self.g!r}")


def sodium():
    """The 23Na atom."""
    return Particle(mass=SODIUM23_MASS, label="Na-23")


_DEFAULT_AMP = 1 / math.sqrt(2)


@dataclass(frozen=True)
class CatConfig:
    """Raw experiment parameters; see :func:`validate_config`.

    ``c1`` weights the packet initially centred at ``z = 0`` and ``c2`` the
    packet centred at ``z = -d``.
    """

    particle: Particle = field(default_factory=sodium)
    sigma0: float = 1e-6
    d: float = 50e-6
    c1: complex = _DEFAULT_AMP
    c2: complex = _DEFAULT_AMP
    gravity: Gravity = field(default_factory=Gravity)
    detector_H: float = -1e-2
    hbar: float = HBAR

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class ValidatedConfig:
    """A :class:`CatConfig` that passed every check, with derived quantities.

    The normalisation constant is computed on construction from the other
    fields, so it can never be stale.
    """

    config: CatConfig
    norm: float

    @property
    def mass(self):
        return self.config.particle.mass

    @property
    def sigma0(self):
        return self.config.sigma0

    @property
    def d(self):
        return self.config.d

    @property
    def g(self):
        return self.config.gravity.g

    @property
    def H(self):
        return self.config.detector_H

    @property
    def hbar(self):
        return self.config.hbar

    @property
    def c1(self):
        return complex(self.config.c1)

    @property
    def c2(self):
        return complex(self.config.c2)

    def replace(self, **changes):
        """Validated copy with some :class:`CatConfig` fields changed."""
        return validate_config(replace(self.config, **changes))


def cat_norm(sigma0, d, c1=_DEFAULT_AMP, c2=_DEFAULT_AMP):
    """Normalisation of ``c1 psi1 + c2 psi2`` for two Gaussians a distance ``d`` apart.

    Reduces to ``1/sqrt(1 + exp(-d^2/8 sigma0^2))`` for ``c1 = c2 = 1/sqrt(2)``.
    """
    c1, c2 = complex(c1), complex(c2)
    overlap = math.exp(-d * d / (8.0 * sigma0 * sigma0))
    s = abs(c1) ** 2 + abs(c2) ** 2 + 2.0 * (c1.conjugate() * c2).real * overlap
    if not s > 0:
        raise ZeroAmplitudes("superposition has zero norm")
    return 1.0 / math.sqrt(s)


def validate_config(cfg):
    """Check every invariant of ``cfg`` and attach the normalisation constant.

    Raises
    ------
    NonPositiveWidth, NonPositiveMass, NegativeSeparation, ZeroAmplitudes,
    NegativeGravity, ConfigError
    """
    if isinstance(cfg, ValidatedConfig):
        return cfg
    if not isinstance(cfg.particle, Particle):
        raise ConfigError("particle must be a Particle")
    if not (cfg.particle.mass > 0):
        raise NonPositiveMass(f"particle mass must be > 0, got {cfg.particle.mass!r}")
    if not (cfg.sigma0 > 0 and math.isfinite(cfg.sigma0)):
        raise NonPositiveWidth(f"sigma0 must be > 0, got {cfg.sigma0!r}")
    if not (cfg.d >= 0 and math.isfinite(cfg.d)):
        raise NegativeSeparation(f"separation d must be >= 0, got {cfg.d!r}")
    if not (cfg.gravity.g >= 0 and math.isfinite(cfg.gravity.g)):
        raise NegativeGravity(f"gravity must be >= 0, got {cfg.gravity.g!r}")
    if not math.isfinite(cfg.detector_H):
        raise ConfigError("detector position must be finite")
    if not (cfg.hbar > 0):
        raise ConfigError("hbar must be > 0")
    c1, c2 = complex(cfg.c1), complex(cfg.c2)
    if c1 == 0 and c2 == 0:
        raise ZeroAmplitudes("c1 and c2 are both zero")
    if not all(map(math.isfinite, (c1.real, c1.imag, c2.real, c2.imag))):
        raise ConfigError("amplitudes must be finite")
    return ValidatedConfig(cfg, cat_norm(cfg.sigma0, cfg.d, c1, c2))


def as_validated(cfg):
    return cfg if isinstance(cfg, ValidatedConfig) else validate_config(cfg)


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    n_samples: int

    def __post_init__(self):
        if not (0 <= self.t_start < self.t_end) or not math.isfinite(self.t_end):
            raise InvalidTimeGrid(
                f"need 0 <= t_start < t_end, got [{self.t_start}, {self.t_end}]"
            )
        if int(self.n_samples) != self.n_samples or self.n_samples < 2:
            raise InvalidTimeGrid(f"n_samples must be an integer >= 2, got {self.n_samples}")

    @property
    def dt(self):
        return (self.t_end - self.t_start) / (self.n_samples - 1)

    @property
    def times(self):
        return np.linspace(self.t_start, self.t_end, int(self.n_samples))
