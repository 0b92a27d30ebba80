from fastapi import APIRouter, BackgroundTasks, HTTPException
import logging
import uuid

from app.core.config import load_scenario_config, resolve_threads
from app.core.emit import json_safe, serializable, summarize
from app.core.errors import CoexSimError
from app.core.globals import progress_state, scenario_results
from app.core.scenario import generate_results
from app.models.api import RunRequest

logger = logging.getLogger("scenario_api")
router = APIRouter()

TABLES = ("selection", "uncertainty", "bounds")


def _result_or_404(process_id: str):
    if process_id not in progress_state:
        raise HTTPException(status_code=404, detail="Process ID not found")
    result = scenario_results.get(process_id)
    if result is None:
        raise HTTPException(status_code=404, detail="Run has not produced results yet")
    return result


@router.post("/run")
async def start_run(request: RunRequest, background_tasks: BackgroundTasks):
    try:
        config = request.config or load_scenario_config()
        if request.cities:
            for name in request.cities:
                config.city(name)
        threads = resolve_threads(request.threads)

        process_id = str(uuid.uuid4())
        progress_state[process_id] = 0
        background_tasks.add_task(generate_results, config, process_id, request.cities, threads)
        logger.info(f"Started scenario run process_id={process_id}")
        return {"status": "started", "process_id": process_id}
    except KeyError as e:
        raise HTTPException(status_code=400, detail=f"Unknown city {e}")
    except CoexSimError as e:
        logger.error(f"Rejected scenario run: {e}")
        raise HTTPException(status_code=400, detail=str(e))
    except Exception:
        logger.exception("Unexpected error in start_run")
        raise HTTPException(status_code=500, detail="Internal Server Error in start_run")


@router.get("/status/{process_id}")
async def get_run_status(process_id: str):
    """Check the status of a scenario run"""
    if process_id not in progress_state:
        raise HTTPException(status_code=404, detail="Process ID not found")

    progress = progress_state[process_id]
    if progress == 100:
        result = scenario_results.get(process_id)
        return {
            "status": "complete",
            "progress": 100,
            "selection_rows": 0 if result is None else len(result.selection),
            "uncertainty_rows": 0 if result is None else len(result.uncertainty),
        }
    elif progress == -1:
        return {"status": "failed", "progress": -1}
    else:
        return {"status": "in_progress", "progress": progress}


@router.get("/summary/{process_id}")
async def get_summary(process_id: str):
    try:
        result = _result_or_404(process_id)
        return summarize(result.config, result.bounds, result.selection, result.uncertainty)
    except HTTPException as he:
        logger.error(f"HTTP error in get_summary: {he.detail}")
        raise he
    except Exception:
        logger.exception("Unexpected error in get_summary")
        raise HTTPException(status_code=500, detail="Internal Server Error in get_summary")


@router.get("/result/{process_id}/{table}")
async def get_table(process_id: str, table: str, limit: int = 1000, offset: int = 0):
    try:
        if table not in TABLES:
            raise HTTPException(status_code=400, detail=f"table must be one of {', '.join(TABLES)}")
        result = _result_or_404(process_id)
        df = getattr(result, table)
        records = json_safe(serializable(df.iloc[offset:offset + limit]).to_dict(orient="records"))
        return {"status": "success", "table": table, "total": len(df), "rows": records}
    except HTTPException as he:
        logger.error(f"HTTP error in get_table: {he.detail}")
        raise he
    except Exception:
        logger.exception("Unexpected error in get_table")
        raise HTTPException(status_code=500, detail="Internal Server Error in get_table")
