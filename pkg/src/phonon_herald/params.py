"""Physical inputs of the optomechanical cavity and the model constants derived from them.

All derived quantities are angular rates in SI units (rad/s). The cavity
linewidth ``kappa = pi c / (F L)`` is treated as an angular rate as well.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from scipy import constants as _const

from .errors import ParameterError

# Speed of light is fixed at four significant digits: the 51.847 kHz coupling
# quoted for the reference set is only reproduced with this value.
SPEED_OF_LIGHT = 2.998e8
HBAR = _const.hbar
K_B = _const.k

DEFAULT_QUALITY_FLOOR = 1e3


@dataclass(frozen=True)
class PhysicalParams:
    """Raw experimental inputs, SI units throughout.

    ``mech_freq`` and ``mech_damping`` are angular (rad/s); use
    :meth:`from_lab_units` to build from the usual GHz / Hz / mW / ng numbers.
    """

    cavity_length: float
    laser_wavelength: float
    mech_freq: float
    laser_power: float
    mirror_mass: float
    finesse: float
    bath_temp: float
    mech_damping: float
    detuning_ratio: float
    cavity_freq_equals_laser: bool = True
    quality_floor: float = DEFAULT_QUALITY_FLOOR

    @classmethod
    def from_lab_units(
        cls,
        *,
        cavity_length_mm: float,
        laser_wavelength_nm: float,
        mech_freq_ghz: float,
        laser_power_mw: float,
        mirror_mass_ng: float,
        finesse: float,
        bath_temp_mk: float,
        mech_damping_hz: float,
        detuning_ratio: float,
        cavity_freq_equals_laser: bool = True,
        quality_floor: float = DEFAULT_QUALITY_FLOOR,
    ) -> PhysicalParams:
        two_pi = 2.0 * math.pi
        return cls(
            cavity_length=cavity_length_mm * 1e-3,
            laser_wavelength=laser_wavelength_nm * 1e-9,
            mech_freq=two_pi * mech_freq_ghz * 1e9,
            laser_power=laser_power_mw * 1e-3,
            mirror_mass=mirror_mass_ng * 1e-12,
            finesse=finesse,
            bath_temp=bath_temp_mk * 1e-3,
            mech_damping=two_pi * mech_damping_hz,
            detuning_ratio=detuning_ratio,
            cavity_freq_equals_laser=cavity_freq_equals_laser,
            quality_floor=quality_floor,
        )

    def replace(self, **changes) -> PhysicalParams:
        return PhysicalParams(**{**asdict(self), **changes})


def reference_params(**overrides) -> PhysicalParams:
    """Reference parameter set: 1 mm cavity, 1064 nm, 1 GHz mirror, 5 mW, 5 ng, F=1e4, 1 mK."""
    lab = dict(
        cavity_length_mm=1.0,
        laser_wavelength_nm=1064.0,
        mech_freq_ghz=1.0,
        laser_power_mw=5.0,
        mirror_mass_ng=5.0,
        finesse=1e4,
        bath_temp_mk=1.0,
        mech_damping_hz=100.0,
        detuning_ratio=-1.0,
    )
    lab.update(overrides)
    return PhysicalParams.from_lab_units(**lab)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[tuple[str, str], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def fields(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.violations)

    def __bool__(self) -> bool:
        # truthy when there is something to report
        return bool(self.violations)

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "; ".join(f"{name}: {msg}" for name, msg in self.violations)


_STRICTLY_POSITIVE = (
    "cavity_length",
    "laser_wavelength",
    "mech_freq",
    "mirror_mass",
    "mech_damping",
)


def validate(p: PhysicalParams) -> ValidationReport:
    """Collect every violated constraint instead of stopping at the first."""
    out: list[tuple[str, str]] = []

    def finite(name: str) -> bool:
        value = getattr(p, name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            out.append((name, f"must be a finite number, got {value!r}"))
            return False
        return True

    for name in _STRICTLY_POSITIVE:
        if finite(name) and getattr(p, name) <= 0:
            out.append((name, f"must be > 0, got {getattr(p, name)!r}"))
    if finite("laser_power") and p.laser_power < 0:
        out.append(("laser_power", f"must be >= 0, got {p.laser_power!r}"))
    if finite("finesse") and p.finesse < 1:
        out.append(("finesse", f"must be >= 1, got {p.finesse!r}"))
    if finite("bath_temp") and p.bath_temp < 0:
        out.append(("bath_temp", f"must be >= 0, got {p.bath_temp!r}"))
    finite("detuning_ratio")
    if not p.cavity_freq_equals_laser:
        out.append(
            (
                "cavity_freq_equals_laser",
                "only a laser resonant with the bare cavity is supported",
            )
        )
    if (
        finite("quality_floor")
        and "mech_freq" not in dict(out)
        and "mech_damping" not in dict(out)
    ):
        q = p.mech_freq / p.mech_damping
        if q < p.quality_floor:
            out.append(
                (
                    "mech_damping",
                    f"quality factor {q:.4g} below floor {p.quality_floor:.4g}",
                )
            )
    return ValidationReport(tuple(out))


def thermal_occupancy(temperature: float, omega: float) -> float:
    """Bose-Einstein occupancy ``1 / (exp(hbar omega / k_B T) - 1)``; 0 at T = 0."""
    if temperature < 0 or omega <= 0:
        raise ParameterError(
            f"need T >= 0 and omega > 0, got T={temperature!r}, omega={omega!r}",
            ("bath_temp",),
        )
    if temperature == 0:
        return 0.0
    x = HBAR * omega / (K_B * temperature)
    if x > 700.0:
        # 1/(e^x - 1) == e^-x to double precision here, and expm1 would overflow
        return math.exp(-x)
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class DerivedParams:
    kappa: float
    omega_c: float
    g0: float
    e_mag: float
    alpha_s: float
    g: float
    n_bar: float
    delta: float
    omega_m: float
    gamma_m: float

    @property
    def weak_coupling(self) -> bool:
        return self.g < self.kappa

    @property
    def resolved_sideband(self) -> bool:
        return self.kappa < self.omega_m

    @property
    def coupling_ratio(self) -> float:
        return self.g / self.kappa

    def as_dict(self) -> dict:
        d = asdict(self)
        d["weak_coupling"] = self.weak_coupling
        d["resolved_sideband"] = self.resolved_sideband
        d["coupling_ratio"] = self.coupling_ratio
        return d


def derive_params(p: PhysicalParams) -> DerivedParams:
    report = validate(p)
    if report:
        raise ParameterError(f"invalid parameters: {report}", report.fields)

    c = SPEED_OF_LIGHT
    kappa = math.pi * c / (p.finesse * p.cavity_length)
    omega_c = 2.0 * math.pi * c / p.laser_wavelength
    g0 = (omega_c / p.cavity_length) * math.sqrt(HBAR / (p.mirror_mass * p.mech_freq))
    # drive frequency equals the bare cavity frequency
    e_mag = math.sqrt(2.0 * p.laser_power * kappa / (HBAR * omega_c))
    delta = p.detuning_ratio * p.mech_freq
    alpha_s = e_mag / math.sqrt(kappa**2 + delta**2)
    g = math.sqrt(2.0) * alpha_s * g0
    n_bar = thermal_occupancy(p.bath_temp, p.mech_freq)

    culprits = {
        "kappa": ("finesse", "cavity_length"),
        "omega_c": ("laser_wavelength",),
        "g0": ("mirror_mass", "mech_freq", "cavity_length"),
        "e_mag": ("laser_power",),
        "alpha_s": ("laser_power", "detuning_ratio"),
        "g": ("laser_power",),
        "n_bar": ("bath_temp",),
        "delta": ("detuning_ratio",),
    }
    values = dict(
        kappa=kappa,
        omega_c=omega_c,
        g0=g0,
        e_mag=e_mag,
        alpha_s=alpha_s,
        g=g,
        n_bar=n_bar,
        delta=delta,
    )
    for name, value in values.items():
        if not math.isfinite(value):
            raise ParameterError(
                f"{name} is not finite ({value!r}); check {', '.join(culprits[name])}",
                culprits[name],
            )
    return DerivedParams(omega_m=p.mech_freq, gamma_m=p.mech_damping, **values)
