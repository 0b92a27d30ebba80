import logging
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from app.routers import link, pattern, progress, scenario, snapshot
from app.core.config import load_scenario_config, refresh_config_cache
from app.core.scenario import refresh_context_cache
from app.core.errors import ConfigError
from app.utils.helper import configure_logging

configure_logging()
logger = logging.getLogger(__name__)

app = FastAPI(title="CoexSim API", version="1.0.0")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(progress.router)
app.include_router(scenario.router, prefix="/scenario", tags=["Scenario"])
app.include_router(snapshot.router, prefix="/snapshot", tags=["Snapshot"])
app.include_router(pattern.router, prefix="/pattern", tags=["Antenna Pattern"])
app.include_router(link.router, prefix="/link", tags=["Link Budget"])

@app.get("/", tags=["Root"])
async def root():
    return {
        "message": "Welcome to CoexSim API",
        "docs_url": "/docs",
        "version": "1.0.0"
    }

@app.on_event("startup")
async def startup_event():
    refresh_config_cache()
    refresh_context_cache()
    try:
        config = load_scenario_config()
        logger.info(f"Loaded default scenario: {config.primary.name} vs {config.secondary.name}, "
                    f"{len(config.cities)} cities")
    except ConfigError as e:
        # runs can still be started with an inline config
        logger.error(f"Default scenario config unavailable: {e}")


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, port=8080, host="0.0.0.0")
