"""Distance -> SNR -> Shannon capacity. Linear units inside, dB only at the edges."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geo import BOLTZMANN_JK, LIGHT_SPEED_KMS


def db_to_ratio(db):
    return 10.0 ** (np.asarray(db, dtype=np.float64) / 10.0)


def ratio_to_db(ratio):
    return 10.0 * np.log10(np.asarray(ratio, dtype=np.float64))


@dataclass(frozen=True)
class LinkBudgetParams:
    """EIRP in watts, receive gain as a linear ratio, T_s in kelvin, B and f in Hz."""

    eirp_w: float = 1.0e4
    rx_gain: float = 1.0e3
    noise_temp_k: float = 500.0
    bandwidth_hz: float = 250.0e6
    carrier_hz: float = 26.5e9

    def __post_init__(self):
        for name, value in vars(self).items():
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value}")

    @property
    def wavelength_m(self) -> float:
        return LIGHT_SPEED_KMS * 1000.0 / self.carrier_hz


def free_space_loss(d_km, wavelength_m):
    """(4 pi d / lambda)^2, with ``d`` in km and ``lambda`` in metres."""
    d = np.asarray(d_km, dtype=np.float64)
    if np.any(d <= 0) or not wavelength_m > 0:
        raise ValueError("distance and wavelength must be positive")
    out = (4.0 * math.pi * d * 1000.0 / wavelength_m) ** 2
    return float(out) if out.ndim == 0 else out


def snr(params: LinkBudgetParams, d_km):
    loss = free_space_loss(d_km, params.wavelength_m)
    noise = BOLTZMANN_JK * params.noise_temp_k * params.bandwidth_hz
    return params.eirp_w * params.rx_gain / (noise * loss)


def capacity_from_snr(bandwidth_hz: float, snr_value):
    out = bandwidth_hz * np.log2(1.0 + np.asarray(snr_value, dtype=np.float64))
    return float(out) if np.ndim(out) == 0 else out


def link_capacity(params: LinkBudgetParams, d_km):
    """Shannon rate in bit/s for a link of length ``d_km``."""
    return capacity_from_snr(params.bandwidth_hz, snr(params, d_km))
