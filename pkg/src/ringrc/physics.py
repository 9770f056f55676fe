"""
Coupled-mode model of a silicon add-drop microring with free-carrier and
thermo-optic nonlinearities.

All public functions work in SI units and in the frame rotating at the pump
frequency, so the input fields are slowly varying baseband envelopes and the
detuning carries the whole frequency offset:

    da/dt  = [i·δ - γ_tot]·a + i·sqrt(2/τ_c)·(E_in + E_add)
    dΔN/dt = -ΔN/τ_FC + Γ_FCA·c²·β_TPA·|a|⁴ / (2·ħ·ω_p·V_FCA²·n_Si²)
    dΔT/dt = -ΔT/τ_th + Γ_th·R_abs·|a|² / (m·c_p)

with
    δ      = ω_p - ω_0·[1 - (ΔN·dn/dN + ΔT·dn/dT)/n_Si]
    γ_tot  = γ_lin + 2/τ_c + γ_TPA + γ_FCA
    R_abs  = 2·(f_abs·γ_lin + γ_TPA + γ_FCA)

|a|² is the intracavity energy in J and the port fields are in sqrt(W).
The integrator does not call these functions in its inner loop; it uses the
pre-scaled coefficients from :func:`normalized_coefficients`, which express
the same equations in ns / pJ / mW / 10²⁴ m⁻³ units.
"""

from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

from ringrc.errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

C_LIGHT = 299_792_458.0  # m/s
HBAR = 1.054_571_817e-34  # J·s

DEFAULT_DEVICE_FILE = Path(__file__).with_name("data") / "device_default.toml"

# Internal unit system used by the compiled kernel.
T_UNIT = 1e-9  # s
E_UNIT = 1e-12  # J, unit of |a|²
P_UNIT = 1e-3  # W, unit of |E|²
N_UNIT = 1e24  # m⁻³


@dataclass(frozen=True)
class MrrParams:
    """
    Physical constants and device parameters of the ring.

    Parameters
    ----------
    omega_p : float
        Pump angular frequency [rad/s].
    delta_omega : float
        Pump-resonance offset ω_p - ω_0 [rad/s]. The cold resonance is derived.
    tau_c : float
        Bus-ring coupling decay time [s].
    alpha : float
        Waveguide power attenuation [1/m].
    tau_fc, tau_th : float
        Free-carrier lifetime and thermal decay time [s].
    n_si : float
        Silicon refractive index.
    dn_dN : float
        Free-carrier dispersion coefficient [m³], negative.
    dn_dT : float
        Thermo-optic coefficient [1/K], positive.
    beta_tpa : float
        Two-photon absorption coefficient [m/W].
    sigma_fca : float
        Free-carrier absorption cross-section [m²].
    c_p : float
        Specific heat [J/(kg·K)].
    mass : float
        Ring mass [kg].
    gamma_fca_conf, gamma_tpa_conf, gamma_th_conf : float
        Confinement factors.
    v_fca, v_tpa : float
        Effective volumes [m³].
    absorption_fraction : float
        Share of the linear waveguide loss that heats the ring (the rest is
        scattered out).
    """

    omega_p: float
    delta_omega: float
    tau_c: float
    alpha: float
    tau_fc: float
    tau_th: float
    n_si: float
    dn_dN: float
    dn_dT: float
    beta_tpa: float
    sigma_fca: float
    c_p: float
    mass: float
    gamma_fca_conf: float
    gamma_tpa_conf: float
    gamma_th_conf: float
    v_fca: float
    v_tpa: float
    absorption_fraction: float = 1.0

    def __post_init__(self) -> None:
        for name in ("omega_p", "tau_c", "tau_fc", "tau_th", "n_si", "c_p", "mass", "v_fca", "v_tpa"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive and finite, got {value!r}")
        for name in ("alpha", "beta_tpa", "sigma_fca", "gamma_fca_conf", "gamma_tpa_conf", "gamma_th_conf"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"{name} must be non-negative, got {value!r}")
        # Zero is allowed for both index coefficients so the linear model can
        # be built; the signs themselves are fixed.
        if self.dn_dT < 0:
            raise ConfigError(f"dn_dT must be >= 0 (thermal red-shift), got {self.dn_dT!r}")
        if self.dn_dN > 0:
            raise ConfigError(f"dn_dN must be <= 0 (carrier blue-shift), got {self.dn_dN!r}")
        if not 0.0 <= self.absorption_fraction <= 1.0:
            raise ConfigError(f"absorption_fraction must lie in [0, 1], got {self.absorption_fraction!r}")
        if not math.isfinite(self.delta_omega) or abs(self.delta_omega) >= 0.01 * self.omega_p:
            raise ConfigError(
                f"|delta_omega| must be << omega_p (quasi-monochromatic), got {self.delta_omega!r}"
            )

    @property
    def omega_0(self) -> float:
        return self.omega_p - self.delta_omega

    def replace(self, **changes) -> "MrrParams":
        return dataclasses.replace(self, **changes)

    def linearized(self) -> "MrrParams":
        """Copy with every nonlinear coefficient set to zero."""
        return self.replace(beta_tpa=0.0, sigma_fca=0.0, dn_dN=0.0, dn_dT=0.0)

    @classmethod
    def from_toml(cls, path: str | Path, **overrides) -> "MrrParams":
        """Load a device file; keyword overrides win over file values."""
        path = Path(path)
        try:
            with path.open("rb") as fh:
                raw = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"device file not found: {path}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse device file {path}: {exc}") from None
        # Accept either a flat file or one with a [device] table.
        values = dict(raw.get("device", raw))
        values.update(overrides)
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(values) - names
        if unknown:
            raise ConfigError(f"unknown device keys in {path}: {sorted(unknown)}")
        missing = {f.name for f in dataclasses.fields(cls) if f.default is dataclasses.MISSING} - set(values)
        if missing:
            raise ConfigError(f"missing device keys in {path}: {sorted(missing)}")
        return cls(**{k: float(v) for k, v in values.items()})

    @classmethod
    def default(cls, **overrides) -> "MrrParams":
        return cls.from_toml(DEFAULT_DEVICE_FILE, **overrides)


@dataclass(frozen=True)
class MrrState:
    """Mode amplitude a [sqrt(J)], excess carrier density [m⁻³], temperature offset [K]."""

    a: complex = 0j
    deltaN: float = 0.0
    deltaT: float = 0.0

    def is_finite(self) -> bool:
        return (
            math.isfinite(self.a.real)
            and math.isfinite(self.a.imag)
            and math.isfinite(self.deltaN)
            and math.isfinite(self.deltaT)
        )


@dataclass(frozen=True)
class DriveField:
    """Baseband envelopes at the input and add ports [sqrt(W)]."""

    e_in: complex = 0j
    e_add: complex = 0j


class LossRates(NamedTuple):
    gamma_lin: float
    gamma_coup: float
    gamma_tpa: float
    gamma_fca: float
    gamma_tot: float


class PortFields(NamedTuple):
    e_through: complex
    p_drop: float


def detuning(state: MrrState, params: MrrParams) -> float:
    """Total angular detuning δ(t) including the carrier and thermal shifts [rad/s]."""
    index_change = state.deltaN * params.dn_dN + state.deltaT * params.dn_dT
    return params.omega_p - params.omega_0 * (1.0 - index_change / params.n_si)


def loss_rates(state: MrrState, params: MrrParams) -> LossRates:
    """Amplitude decay rates of the cavity mode [1/s]."""
    n = params.n_si
    energy = abs(state.a) ** 2
    gamma_lin = C_LIGHT * params.alpha / (2.0 * n)
    gamma_coup = 2.0 / params.tau_c
    gamma_tpa = params.gamma_tpa_conf * params.beta_tpa * C_LIGHT**2 * energy / (2.0 * n**2 * params.v_tpa)
    gamma_fca = params.gamma_fca_conf * params.sigma_fca * C_LIGHT * state.deltaN / (2.0 * n)
    return LossRates(
        gamma_lin, gamma_coup, gamma_tpa, gamma_fca, gamma_lin + gamma_coup + gamma_tpa + gamma_fca
    )


def carrier_generation(state: MrrState, params: MrrParams) -> float:
    """TPA carrier generation rate [m⁻³/s]."""
    energy = abs(state.a) ** 2
    return (
        params.gamma_fca_conf
        * C_LIGHT**2
        * params.beta_tpa
        * energy**2
        / (2.0 * HBAR * params.omega_p * params.v_fca**2 * params.n_si**2)
    )


def absorbed_power(state: MrrState, params: MrrParams) -> float:
    """Optical power turned into heat inside the ring [W]."""
    rates = loss_rates(state, params)
    r_abs = 2.0 * (params.absorption_fraction * rates.gamma_lin + rates.gamma_tpa + rates.gamma_fca)
    return r_abs * abs(state.a) ** 2


def rhs(state: MrrState, drive: DriveField, params: MrrParams) -> MrrState:
    """Time derivative of the ring state, returned as an MrrState of rates."""
    rates = loss_rates(state, params)
    delta = detuning(state, params)
    kappa = math.sqrt(2.0 / params.tau_c)
    da = complex(-rates.gamma_tot, delta) * state.a + 1j * kappa * (drive.e_in + drive.e_add)
    dN = -state.deltaN / params.tau_fc + carrier_generation(state, params)
    dT = -state.deltaT / params.tau_th + params.gamma_th_conf * absorbed_power(state, params) / (
        params.mass * params.c_p
    )
    return MrrState(da, dN, dT)


def port_fields(state: MrrState, drive: DriveField, params: MrrParams) -> PortFields:
    """Through-port field [sqrt(W)] and drop-port power [W]."""
    kappa = math.sqrt(2.0 / params.tau_c)
    return PortFields(drive.e_in + 1j * kappa * state.a, kappa**2 * abs(state.a) ** 2)


def steady_state_energy_linear(e_in: complex, params: MrrParams) -> float:
    """Closed-form |a|² of the cold, linear cavity under a constant drive [J]."""
    gamma = 2.0 / params.tau_c + C_LIGHT * params.alpha / (2.0 * params.n_si)
    return (2.0 / params.tau_c) * abs(e_in) ** 2 / (params.delta_omega**2 + gamma**2)


class KernelCoefficients(NamedTuple):
    """The model equations pre-scaled to ns, pJ, mW and 10²⁴ m⁻³."""

    delta0: float  # rad/ns
    shift_n: float  # rad/ns per 10²⁴ m⁻³
    shift_t: float  # rad/ns per K
    gamma0: float  # 1/ns, linear + coupling
    gamma_lin_abs: float  # 1/ns, absorptive share of linear loss
    tpa: float  # 1/ns per pJ
    fca: float  # 1/ns per 10²⁴ m⁻³
    kappa: float  # 1/sqrt(ns)
    gen: float  # 10²⁴ m⁻³/ns per pJ²
    inv_tau_fc: float  # 1/ns
    inv_tau_th: float  # 1/ns
    heat: float  # K/ns per (1/ns · pJ)


def normalized_coefficients(params: MrrParams) -> KernelCoefficients:
    p = params
    n = p.n_si
    gamma_lin = C_LIGHT * p.alpha / (2.0 * n)
    return KernelCoefficients(
        delta0=p.delta_omega * T_UNIT,
        shift_n=p.omega_0 * p.dn_dN / n * N_UNIT * T_UNIT,
        shift_t=p.omega_0 * p.dn_dT / n * T_UNIT,
        gamma0=(gamma_lin + 2.0 / p.tau_c) * T_UNIT,
        gamma_lin_abs=p.absorption_fraction * gamma_lin * T_UNIT,
        tpa=p.gamma_tpa_conf * p.beta_tpa * C_LIGHT**2 / (2.0 * n**2 * p.v_tpa) * T_UNIT * E_UNIT,
        fca=p.gamma_fca_conf * p.sigma_fca * C_LIGHT / (2.0 * n) * T_UNIT * N_UNIT,
        kappa=math.sqrt(2.0 / p.tau_c * T_UNIT),
        gen=p.gamma_fca_conf * C_LIGHT**2 * p.beta_tpa / (2.0 * HBAR * p.omega_p * p.v_fca**2 * n**2)
        * T_UNIT
        * E_UNIT**2
        / N_UNIT,
        inv_tau_fc=T_UNIT / p.tau_fc,
        inv_tau_th=T_UNIT / p.tau_th,
        heat=p.gamma_th_conf / (p.mass * p.c_p) * E_UNIT,
    )
