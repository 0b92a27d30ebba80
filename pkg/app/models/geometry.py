from enum import Enum
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field

from app.models.radio import ArraySpec


class UserRole(str, Enum):
    primary = "u"
    secondary = "v"


class GroundUser(BaseModel):
    model_config = ConfigDict(frozen=True)

    lat_deg: float = Field(..., ge=-90, le=90)
    lon_deg: float = Field(..., ge=-180, le=180)
    alt_m: float = 0.0
    array: ArraySpec
    noise_figure_db: float = 1.2
    role: UserRole = UserRole.primary


class LinkGeometry(BaseModel):
    model_config = ConfigDict(frozen=True)

    range_m: float = Field(..., gt=0)
    elevation_deg: float
    dir_user_frame: Tuple[float, float, float]
    dir_sat_frame: Tuple[float, float, float]
