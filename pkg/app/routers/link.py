from fastapi import APIRouter, HTTPException
import logging

from app.core.errors import InvalidInputError
from app.core.link_budget import (
    fspl_db, inr_threshold_from_delta_t, link_metrics, noise_power_dbw, spectral_efficiency_loss,
)
from app.models.radio import LinkMetrics, RadioConfig

logger = logging.getLogger("link")
router = APIRouter()


def _bad_request(endpoint: str, e: Exception):
    logger.error(f"Invalid input in {endpoint}: {e}")
    return HTTPException(status_code=400, detail=str(e))


@router.get("/threshold")
async def threshold_from_delta_t(delta_t: float):
    """INR threshold (dB) for a tolerated fractional noise-temperature rise."""
    try:
        return {"delta_t": delta_t, "inr_th_db": inr_threshold_from_delta_t(delta_t)}
    except InvalidInputError as e:
        raise _bad_request("threshold_from_delta_t", e)


@router.get("/spectral-efficiency-loss")
async def get_spectral_efficiency_loss(snr_db: float, inr_db: float):
    try:
        return {"snr_db": snr_db, "inr_db": inr_db, "loss": spectral_efficiency_loss(snr_db, inr_db)}
    except InvalidInputError as e:
        raise _bad_request("get_spectral_efficiency_loss", e)


@router.get("/fspl")
async def get_fspl(range_m: float, carrier_hz: float = 20e9):
    try:
        if carrier_hz <= 0:
            raise InvalidInputError("carrier_hz must be positive")
        return {"range_m": range_m, "carrier_hz": carrier_hz, "fspl_db": fspl_db(range_m, carrier_hz)}
    except InvalidInputError as e:
        raise _bad_request("get_fspl", e)


@router.get("/noise")
async def get_noise_power(bandwidth_hz: float = 400e6, noise_figure_db: float = 1.2,
                          noise_psd_dbm_hz: float = -174.0):
    try:
        cfg = RadioConfig(bandwidth_hz=bandwidth_hz, noise_psd_dbm_hz=noise_psd_dbm_hz,
                          noise_figure_db=noise_figure_db)
    except ValueError as e:
        raise _bad_request("get_noise_power", e)
    return {"noise_dbw": noise_power_dbw(cfg)}


@router.get("/metrics", response_model=LinkMetrics)
async def get_link_metrics(snr_db: float, inr_db: float, bandwidth_hz: float = 400e6, noise_figure_db: float = 1.2):
    try:
        cfg = RadioConfig(bandwidth_hz=bandwidth_hz, noise_figure_db=noise_figure_db)
        return link_metrics(snr_db, inr_db, noise_power_dbw(cfg))
    except ValueError as e:
        raise _bad_request("get_link_metrics", e)
    except Exception:
        logger.exception("Unexpected error in get_link_metrics")
        raise HTTPException(status_code=500, detail="Internal Server Error in get_link_metrics")
