"""Domain types for scattering problems with a confined nonlinearity.

The physical setting is the stationary one-dimensional Schroedinger
equation on the real line,

    -psi''(x) + v(x) psi(x) + gamma * chi(x) * f(|psi(x)|) psi(x) = k^2 psi(x),

where the potential v is supported inside the unit interval (here a
single complex delta spike, or nothing at all), chi is the indicator
function of [0, 1], gamma is a real coupling and f is a real-valued
nonlinearity profile evaluated on the local amplitude |psi|.  Outside
[0, 1] the equation is free and solutions are plane waves.

This module holds the small immutable records shared by the numerical
machinery: the potential and nonlinearity descriptions, the problem
configuration, the (psi, psi') state vector and the boundary
amplitudes.  It also provides configuration validation and a flat
``key = value`` config-file parser.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Union


class ConfigError(ValueError):
    """Raised when a configuration file or record cannot be used."""


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


def _require_finite_complex(name: str, z: complex) -> None:
    _require_finite(name, z.real, z.imag)


# ---------------------------------------------------------------------------
# potential
# ---------------------------------------------------------------------------

ZERO = "zero"
DELTA = "delta"


@dataclass(frozen=True)
class PotentialSpec:
    """Potential supported inside the unit interval.

    ``zero``   no potential at all;
    ``delta``  a single spike  v(x) = strength * delta(x - position)
               with complex strength and 0 < position < 1 strictly.
    """

    kind: str
    strength: complex = 0j
    position: float = 0.5

    def __post_init__(self) -> None:
        if self.kind not in (ZERO, DELTA):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        _require_finite_complex("strength", self.strength)
        _require_finite("position", self.position)
        if self.kind == DELTA and not 0.0 < self.position < 1.0:
            raise ValueError("position must lie strictly inside (0,1)")

    @classmethod
    def zero(cls) -> "PotentialSpec":
        return cls(ZERO)

    @classmethod
    def delta(cls, strength: complex, position: float) -> "PotentialSpec":
        return cls(DELTA, complex(strength), float(position))


# ---------------------------------------------------------------------------
# nonlinearity profiles
# ---------------------------------------------------------------------------

# Integer codes used by the compiled integrator core; -1 means "no fast
# path, call the Python object".
_CODE_KERR = 0
_CODE_POWER = 1
_CODE_CONSTANT = 2
_CODE_CUSTOM = -1


@dataclass(frozen=True)
class Kerr:
    """Intensity nonlinearity f(amp) = amp**2."""

    def __call__(self, amp):
        return amp * amp

    def amplitude_for(self, value: float) -> float:
        """Amplitude with f(amp) = value; requires value > 0."""
        if value <= 0.0:
            raise ValueError("Kerr profile only attains positive values")
        return math.sqrt(value)

    sign = 1
    fast_code = _CODE_KERR
    fast_param = 0.0


@dataclass(frozen=True)
class Power:
    """Power-law nonlinearity f(amp) = amp**p with exponent p > 0."""

    p: float

    def __post_init__(self) -> None:
        _require_finite("p", self.p)
        if self.p <= 0.0:
            raise ValueError("power-law exponent must be positive")

    def __call__(self, amp):
        return amp**self.p

    def amplitude_for(self, value: float) -> float:
        if value <= 0.0:
            raise ValueError("power-law profile only attains positive values")
        return value ** (1.0 / self.p)

    sign = 1
    fast_code = _CODE_POWER

    @property
    def fast_param(self) -> float:
        return self.p


@dataclass(frozen=True)
class Constant:
    """Amplitude-independent profile f(amp) = c.

    Mostly useful for validation: with this profile the equation stays
    linear (shifted k^2), so closed-form solutions exist.  It cannot be
    inverted for an amplitude, hence it is not usable for singularity
    sweeps.
    """

    c: float

    def __post_init__(self) -> None:
        _require_finite("c", self.c)

    def __call__(self, amp):
        import numpy as np

        if isinstance(amp, np.ndarray):
            return np.full_like(amp, self.c)
        return self.c

    def amplitude_for(self, value: float) -> float:
        raise ValueError("constant profile cannot be inverted for an amplitude")

    @property
    def sign(self) -> int:
        return (self.c > 0) - (self.c < 0)

    fast_code = _CODE_CONSTANT

    @property
    def fast_param(self) -> float:
        return self.c


@dataclass(frozen=True)
class CustomProfile:
    """User-supplied profile amp -> f(amp), f real and finite for amp >= 0."""

    fn: Callable[[float], float]

    def __call__(self, amp):
        return self.fn(amp)

    def amplitude_for(self, value: float) -> float:
        raise ValueError("custom profile does not define an inverse")

    sign = 0  # unknown
    fast_code = _CODE_CUSTOM
    fast_param = 0.0


NonlinearityProfile = Union[Kerr, Power, Constant, CustomProfile]


# ---------------------------------------------------------------------------
# configuration and state
# ---------------------------------------------------------------------------

DEFAULT_ODE_TOL = 1e-10
DEFAULT_MAX_STEPS = 10**6


@dataclass(frozen=True)
class ProblemConfig:
    """One scattering problem: potential, coupling, profile, solver knobs.

    gamma = 0 is allowed and recovers the linear problem, which serves
    as the main validation limit throughout.
    """

    potential: PotentialSpec
    gamma: float
    profile: NonlinearityProfile = field(default_factory=Kerr)
    ode_tol: float = DEFAULT_ODE_TOL
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self) -> None:
        _require_finite("gamma", self.gamma)


@dataclass(frozen=True)
class WaveState:
    """The complex pair (psi, psi') at a position x; the ODE state."""

    x: float
    psi: complex
    dpsi: complex

    def __post_init__(self) -> None:
        _require_finite("x", self.x)
        _require_finite_complex("psi", self.psi)
        _require_finite_complex("dpsi", self.dpsi)


@dataclass(frozen=True)
class BoundaryData:
    """Wavenumber plus the two boundary amplitudes of the Jost pair.

    ``amp_left`` is the value of the left Jost solution at x = 0 and
    ``amp_right`` the value of the right Jost solution at x = 1.
    """

    k: float
    amp_left: complex
    amp_right: complex

    def __post_init__(self) -> None:
        _require_finite("k", self.k)
        _require_finite_complex("amp_left", self.amp_left)
        _require_finite_complex("amp_right", self.amp_right)
        if self.k <= 0.0:
            raise ValueError("k must be positive")
        if self.amp_left == 0 or self.amp_right == 0:
            raise ValueError("boundary amplitudes must be nonzero")


def validate_config(config: ProblemConfig) -> list[str]:
    """Collect human-readable invariant violations; empty list means valid."""
    violations: list[str] = []
    pot = config.potential
    if pot.kind == DELTA and not 0.0 < pot.position < 1.0:
        violations.append("position must lie strictly inside (0,1)")
    if not math.isfinite(config.gamma):
        violations.append("gamma must be finite")
    if not config.ode_tol > 0.0:
        violations.append("ode_tol must be positive")
    if not config.max_steps > 0:
        violations.append("max_steps must be positive")
    for amp in (0.0, 1.0, 2.0):
        try:
            value = config.profile(amp)
        except Exception as exc:  # user profiles may do anything
            violations.append(f"profile evaluation failed at amp={amp}: {exc}")
            continue
        if not math.isfinite(value):
            violations.append(f"profile must return finite values, got {value!r} at amp={amp}")
    return violations


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------

_CONFIG_KEYS = frozenset(
    {
        "potential.kind",
        "potential.re_z",
        "potential.im_z",
        "potential.a",
        "gamma",
        "profile.kind",
        "profile.p",
        "ode_tol",
        "max_steps",
    }
)


def parse_config(text: str) -> ProblemConfig:
    """Parse flat ``key = value`` configuration text.

    Unknown keys are rejected.  ``profile.p`` is the generic profile
    parameter: the exponent for ``power`` and the value for ``constant``.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value.strip()

    def as_float(key: str, default: float | None = None) -> float:
        if key not in raw:
            if default is None:
                raise ConfigError(f"missing required key {key!r}")
            return default
        try:
            return float(raw[key])
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: {exc}") from None

    pot_kind = raw.get("potential.kind", ZERO)
    if pot_kind == ZERO:
        for key in ("potential.re_z", "potential.im_z", "potential.a"):
            if key in raw:
                raise ConfigError(f"key {key!r} is meaningless for a zero potential")
        potential = PotentialSpec.zero()
    elif pot_kind == DELTA:
        strength = complex(as_float("potential.re_z", 0.0), as_float("potential.im_z", 0.0))
        position = as_float("potential.a")
        try:
            potential = PotentialSpec.delta(strength, position)
        except ValueError as exc:
            raise ConfigError(f"key 'potential.a': {exc}") from None
    else:
        raise ConfigError(f"key 'potential.kind': unknown value {pot_kind!r}")

    prof_kind = raw.get("profile.kind", "kerr")
    if prof_kind == "kerr":
        if "profile.p" in raw:
            raise ConfigError("key 'profile.p' is meaningless for the kerr profile")
        profile: NonlinearityProfile = Kerr()
    elif prof_kind == "power":
        profile = Power(as_float("profile.p"))
    elif prof_kind == "constant":
        profile = Constant(as_float("profile.p"))
    else:
        raise ConfigError(f"key 'profile.kind': unknown value {prof_kind!r}")

    max_steps_f = as_float("max_steps", float(DEFAULT_MAX_STEPS))
    if max_steps_f != int(max_steps_f):
        raise ConfigError("key 'max_steps': expected an integer")

    config = ProblemConfig(
        potential=potential,
        gamma=as_float("gamma"),
        profile=profile,
        ode_tol=as_float("ode_tol", DEFAULT_ODE_TOL),
        max_steps=int(max_steps_f),
    )
    violations = validate_config(config)
    if violations:
        raise ConfigError("; ".join(violations))
    return config


def load_config(path: str | Path) -> ProblemConfig:
    """Read and parse a configuration file."""
    return parse_config(Path(path).read_text(encoding="utf-8"))
