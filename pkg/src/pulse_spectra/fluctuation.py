"""Stretched-exponential tail formulas and physical scale estimates.

Tail constants ``b`` and ``c0`` default to 1; outputs that depend on them are
relative/asymptotic values, not calibrated probabilities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

SPEED_OF_LIGHT = 2.998e8  # m/s

# reference values of the scattering estimate
SCATTER_COEFF = 4.6
REF_PULSE_LENGTH_UM = 160.0
REF_SOUND_SPEED_MPS = 200.0
REF_WAVELENGTH_NM = 570.0
REF_TEMPERATURE_K = 1.0


def _positive(**kw):
    for k, v in kw.items():
        if not (v > 0 and math.isfinite(v)):
            raise DomainError(f"{k} must be positive and finite, got {v}")


@dataclass(frozen=True)
class TailParams:
    alpha: float
    b: float = 1.0
    c0: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        _positive(b=self.b, c0=self.c0)


@dataclass(frozen=True)
class PulseUnits:
    c_coeff: float
    tau_life: float      # s
    tau: float           # s
    wavelength: float    # m
    pulse_length: float  # m

    @property
    def oscillations(self) -> float:
        """Carrier periods within one pulse length."""
        return self.pulse_length / self.wavelength


def tail_pdf(u: float, p: TailParams) -> float:
    """``c0 exp(-b u^alpha)``."""
    if not u >= 0:
        raise DomainError(f"u must be non-negative, got {u}")
    return p.c0 * math.exp(-p.b * u ** p.alpha)


def tail_ccdf(u: float, p: TailParams) -> float:
    """``c0/(alpha b) u^(1-alpha) exp(-b u^alpha)``, the leading tail of P(>u)."""
    if not u > 0:
        raise DomainError(f"u must be positive, got {u}")
    return p.c0 / (p.alpha * p.b) * u ** (1.0 - p.alpha) * math.exp(-p.b * u ** p.alpha)


def dominant_frequency(u: float, tau: float) -> float:
    _positive(u=u, tau=tau)
    return u / tau


def omega_alpha_measure(omega_max: float, alpha: float):
    """``(omega_max^alpha, exp(-omega_max^alpha))``."""
    _positive(omega_max=omega_max)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    p = omega_max ** alpha
    return p, math.exp(-p)


def scattering_ratio(u: float = 1.0, pulse_length_um: float = REF_PULSE_LENGTH_UM,
                     sound_speed_mps: float = REF_SOUND_SPEED_MPS,
                     wavelength_nm: float = REF_WAVELENGTH_NM,
                     temperature_K: float = REF_TEMPERATURE_K) -> float:
    """Expected photons scattered off a pulse-length sound mode, relative to one."""
    _positive(u=u, pulse_length_um=pulse_length_um, sound_speed_mps=sound_speed_mps,
              wavelength_nm=wavelength_nm, temperature_K=temperature_K)
    return (SCATTER_COEFF * u
            * (REF_PULSE_LENGTH_UM / pulse_length_um) ** 5
            * (REF_SOUND_SPEED_MPS / sound_speed_mps) ** 1.5
            * (wavelength_nm / REF_WAVELENGTH_NM) ** 4
            * (REF_TEMPERATURE_K / temperature_K))


def lifetime_to_pulse_scale(c_coeff: float, tau_life_s: float,
                            wavelength_m: float = REF_WAVELENGTH_NM * 1e-9) -> PulseUnits:
    """Pulse time scale ``tau = C tau_life`` and its length in metres."""
    _positive(c_coeff=c_coeff, tau_life_s=tau_life_s, wavelength_m=wavelength_m)
    tau = c_coeff * tau_life_s
    return PulseUnits(c_coeff, tau_life_s, tau, wavelength_m, SPEED_OF_LIGHT * tau)
