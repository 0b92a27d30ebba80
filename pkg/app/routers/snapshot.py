from fastapi import APIRouter, HTTPException
import logging

from app.core.config import load_scenario_config
from app.core.emit import json_safe
from app.core.errors import CoexSimError
from app.core.scenario import load_context, snapshot
from app.models.api import SnapshotRequest

logger = logging.getLogger("snapshot")
router = APIRouter()


@router.post("")
async def get_snapshot(request: SnapshotRequest):
    try:
        config = request.config or load_scenario_config()
        try:
            city = config.city(request.city)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"City '{request.city}' not in config")
        return json_safe(snapshot(load_context(config), city, request.t_s))
    except HTTPException as he:
        logger.error(f"HTTP error in get_snapshot: {he.detail}")
        raise he
    except CoexSimError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception:
        logger.exception("Unexpected error in get_snapshot")
        raise HTTPException(status_code=500, detail="Internal Server Error in get_snapshot")
