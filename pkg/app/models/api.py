from typing import List, Optional

from pydantic import BaseModel, Field

from app.models.scenario import ScenarioConfig


class RunRequest(BaseModel):
    config: Optional[ScenarioConfig] = Field(None, description="Inline config; the shipped default is used when omitted")
    cities: Optional[List[str]] = None
    threads: Optional[int] = Field(None, ge=1)


class SnapshotRequest(BaseModel):
    city: str
    t_s: float = Field(0.0, ge=0)
    config: Optional[ScenarioConfig] = None


class PatternPoint(BaseModel):
    angle_deg: float
    gain_db: float


class PatternResponse(BaseModel):
    array: str
    max_gain_dbi: float
    normalized: bool
    points: List[PatternPoint]
