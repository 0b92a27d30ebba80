from fastapi import APIRouter
from sse_starlette.sse import EventSourceResponse
import asyncio
import logging

from app.core.globals import progress_state

logger = logging.getLogger("progress")
router = APIRouter()

POLL_INTERVAL_S = 1.0


async def progress_events(process_id: str, poll_interval_s: float = POLL_INTERVAL_S):
    """Yields the run's progress until it completes (100) or fails (-1)."""
    while True:
        progress_value = progress_state.get(process_id, 0)
        if progress_value == -1:  # Error state
            yield {"event": "progress", "data": "error"}
            break
        yield {"event": "progress", "data": str(progress_value)}
        if progress_value >= 100:
            break
        await asyncio.sleep(poll_interval_s)


@router.get("/progress/{process_id}")
async def progress_stream(process_id: str):
    logger.debug(f"Progress stream opened for {process_id}")
    return EventSourceResponse(progress_events(process_id))
