import logging
import math

import numpy as np

from app.core.errors import InvalidInputError
from app.models.constellation import ShellSpec, SystemRole
from app.models.radio import LinkMetrics, RadioConfig
from app.utils.helper import to_db, to_linear

logger = logging.getLogger("link_budget")

SPEED_OF_LIGHT = 299792458.0


def fspl_db(range_m, carrier_hz: float):
    rng = np.asarray(range_m, dtype=float)
    if np.any(rng <= 0):
        raise InvalidInputError("range_m must be positive")
    out = 20.0 * np.log10(4.0 * math.pi * rng * carrier_hz / SPEED_OF_LIGHT)
    return float(out) if out.ndim == 0 else out


def noise_power_dbw(cfg: RadioConfig, noise_figure_db: float = None) -> float:
    nf = cfg.noise_figure_db if noise_figure_db is None else noise_figure_db
    return (cfg.noise_psd_dbm_hz - 30.0) + 10.0 * math.log10(cfg.bandwidth_hz) + nf


def power_control_db(cfg: RadioConfig, shell_altitude_km: float, ref_altitude_km: float) -> float:
    """Boost for higher shells so zenith received power matches the reference shell."""
    if not cfg.power_control:
        return 0.0
    delta = fspl_db(shell_altitude_km * 1e3, cfg.carrier_hz) - fspl_db(ref_altitude_km * 1e3, cfg.carrier_hz)
    lim = cfg.power_control_limit_db
    return float(min(max(delta, -lim), lim))


def tx_power_dbw(cfg: RadioConfig, role: SystemRole, shell: ShellSpec, max_gain_dbi: float,
                 ref_altitude_km: float = None) -> float:
    """Per-satellite transmit power: EIRP density at the beam peak over the band,
    minus the peak array gain, plus the per-shell power-control adjustment."""
    eirp = cfg.eirp_density_primary_dbw_hz if role == SystemRole.primary else cfg.eirp_density_secondary_dbw_hz
    ref = shell.altitude_km if ref_altitude_km is None else ref_altitude_km
    return eirp + 10.0 * math.log10(cfg.bandwidth_hz) - max_gain_dbi + power_control_db(cfg, shell.altitude_km, ref)


def snr(tx_power_dbw, g_tx_dbi, g_rx_dbi, range_m, cfg: RadioConfig, noise_dbw: float = None):
    """SNR in dB; each argument may be an array (dB-domain sum)."""
    n = noise_power_dbw(cfg) if noise_dbw is None else noise_dbw
    return np.asarray(tx_power_dbw) + g_tx_dbi + g_rx_dbi - fspl_db(range_m, cfg.carrier_hz) - n


def inr(interferer_tx_dbw, g_tx_toward_victim_dbi, g_rx_toward_interferer_dbi, range_m,
        cfg: RadioConfig, noise_dbw: float = None):
    """INR at a victim: interferer's gain toward the victim while steered at its own user,
    victim's gain toward the interferer while steered at its serving satellite.
    Gains of -inf (array nulls) propagate to an INR of -inf."""
    n = noise_power_dbw(cfg) if noise_dbw is None else noise_dbw
    return (np.asarray(interferer_tx_dbw) + g_tx_toward_victim_dbi + g_rx_toward_interferer_dbi
            - fspl_db(range_m, cfg.carrier_hz) - n)


def sinr(snr_db, inr_db):
    snr_lin = to_linear(snr_db)
    inr_lin = to_linear(inr_db)
    out = to_db(snr_lin / (1.0 + inr_lin))
    return float(out) if np.ndim(out) == 0 else out


def link_metrics(snr_db: float, inr_db: float, noise_dbw: float) -> LinkMetrics:
    return LinkMetrics(
        snr_db=float(snr_db),
        inr_db=float(inr_db),
        sinr_db=sinr(snr_db, inr_db),
        received_signal_dbw=float(snr_db) + noise_dbw,
        interference_dbw=float(inr_db) + noise_dbw,
        noise_dbw=noise_dbw,
    )


def spectral_efficiency_loss(snr_db, inr_db):
    """Fraction of log2(1+SNR) lost when interference is treated as noise."""
    snr_lin = to_linear(snr_db)
    if np.any(snr_lin <= 0):
        raise InvalidInputError("snr must be positive in linear terms")
    sinr_lin = snr_lin / (1.0 + to_linear(inr_db))
    out = 1.0 - np.log2(1.0 + sinr_lin) / np.log2(1.0 + snr_lin)
    return float(out) if np.ndim(out) == 0 else out


def inr_threshold_from_delta_t(delta_t_fraction: float) -> float:
    """INR ceiling (dB) equivalent to a fractional noise-temperature rise dT/T."""
    if delta_t_fraction <= 0:
        raise InvalidInputError("delta_t_fraction must be positive")
    return 10.0 * math.log10(delta_t_fraction)
