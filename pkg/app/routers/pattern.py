from fastapi import APIRouter, HTTPException
import logging

from app.core.phased_array import max_gain, pattern_cut
from app.models.api import PatternPoint, PatternResponse

logger = logging.getLogger("pattern")
router = APIRouter()


@router.get("/{array}", response_model=PatternResponse)
async def get_pattern(array: str, step_deg: float = 0.5, normalize: bool = True):
    try:
        if not 0 < step_deg <= 90:
            raise HTTPException(status_code=400, detail="step_deg must lie in (0, 90]")
        try:
            spec, angles, gains = pattern_cut(array, step_deg, normalize)
        except ValueError as e:
            raise HTTPException(status_code=400, detail=str(e))
        return PatternResponse(
            array=spec.label, max_gain_dbi=max_gain(spec), normalized=normalize,
            points=[PatternPoint(angle_deg=float(a), gain_db=float(g)) for a, g in zip(angles, gains)],
        )
    except HTTPException as he:
        logger.error(f"HTTP error in get_pattern: {he.detail}")
        raise he
    except Exception:
        logger.exception("Unexpected error in get_pattern")
        raise HTTPException(status_code=500, detail="Internal Server Error in get_pattern")
